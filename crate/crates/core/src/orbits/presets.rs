//! Orbit data used by the command line and the examples.

use std::sync::Arc;

use super::maps::LinearMap;
use super::sampler::PolarSampler;
use super::OrbitDatum;
use crate::error::Result;
use crate::field::{Boundary, Parity, ScalarField};
use crate::grid::Grid;
use crate::operators::{invert_k_laplacian, k_laplacian};

fn cartesian(grid: &Arc<Grid>, parity: Parity, boundary: Boundary, f: impl Fn(f64, f64) -> f64) -> ScalarField {
    ScalarField::from_fn(grid, parity, boundary, |r, p| f(r * p.cos(), r * p.sin()))
}

/// `g0 = exp(-r^2)` with the non-radial stream `f0 = (1 + x/2) exp(-r^2) / 2`.
pub fn gaussian(grid: &Arc<Grid>) -> Result<OrbitDatum> {
    let g = cartesian(grid, Parity::Even, Boundary::Free, |x, y| (-(x * x + y * y)).exp());
    let f = cartesian(grid, Parity::Even, Boundary::Dirichlet, |x, y| {
        0.5 * (1.0 + 0.5 * x) * (-(x * x + y * y)).exp()
    });
    OrbitDatum::new(f, g)
}

/// Image of `base` under the area-preserving linear map `s`.
///
/// `g = g0 o s^{-1}`, and `f` solves `Delta f = (Delta f0) o s^{-1}`, so the
/// pair satisfies both orbit conditions with `Phi = s`.
pub fn transported(base: &OrbitDatum, s: LinearMap) -> Result<OrbitDatum> {
    let grid = &base.f.grid;
    let inv = s.inverse();
    let g0 = PolarSampler::new(&base.g);
    let lap0 = PolarSampler::new(&k_laplacian(&base.f));
    let g = cartesian(grid, Parity::Even, Boundary::Free, |x, y| g0.cartesian(inv.map([x, y])));
    let rho = cartesian(grid, Parity::Even, Boundary::Free, |x, y| lap0.cartesian(inv.map([x, y])));
    let f = invert_k_laplacian(&rho)?;
    OrbitDatum::new(f, g)
}

/// [`gaussian`] transported by the shear `(x, y) -> (x + s y, y)`.
pub fn sheared(grid: &Arc<Grid>, s: f64) -> Result<OrbitDatum> {
    transported(&gaussian(grid)?, LinearMap::shear(s))
}

/// `g = g0^p`, whose superlevel areas are those of `g0` divided by `p`.
pub fn area_mismatched(grid: &Arc<Grid>, p: f64) -> Result<OrbitDatum> {
    let base = gaussian(grid)?;
    OrbitDatum::new(base.f.clone(), base.g.map(|v| v.max(0.0).powf(p)))
}

/// [`gaussian`] with a localized bump added to the stream near `(x0, 0)`.
pub fn bumped(grid: &Arc<Grid>, x0: f64, amplitude: f64) -> Result<OrbitDatum> {
    let base = gaussian(grid)?;
    let bump = cartesian(grid, Parity::Even, Boundary::Dirichlet, |x, y| {
        amplitude * (-((x - x0).powi(2) + y * y) / 0.1).exp()
    });
    OrbitDatum::new(&base.f + &bump, base.g)
}
