//! Circle averages of `Delta f` transported by a candidate map.

use std::f64::consts::TAU;

use rayon::prelude::*;

use super::maps::{area_defect, PlanarMap};
use super::sampler::PolarSampler;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::operators::k_laplacian;

#[derive(Debug, Clone, Copy)]
pub struct CircleOptions {
    /// Quadrature nodes per circle.
    pub samples: usize,
    /// Largest admissible `|det D Phi - 1|` at the probe points.
    pub map_tolerance: f64,
    /// Probe points per circle for the area-preservation check.
    pub probes: usize,
}

impl Default for CircleOptions {
    fn default() -> Self {
        CircleOptions {
            samples: 512,
            map_tolerance: 5e-3,
            probes: 8,
        }
    }
}

/// `int_{S_r} h o map ds` by the trapezoid rule (spectral for periodic data).
pub fn circle_integral(h: &PolarSampler, map: &dyn PlanarMap, r: f64, samples: usize) -> Result<f64> {
    let angles: Vec<f64> = (0..samples).map(|k| TAU * k as f64 / samples as f64).collect();
    let pts = map.apply_circle(r, &angles)?;
    Ok(TAU * r / samples as f64 * pts.iter().map(|&p| h.cartesian(p)).sum::<f64>())
}

/// `|int_{S_r} (Delta f) o Phi ds - int_{S_r} Delta f0 ds|` for each radius.
pub fn circle_average_condition(
    f: &ScalarField,
    f0: &ScalarField,
    map: &dyn PlanarMap,
    radii: &[f64],
    opts: CircleOptions,
) -> Result<Vec<f64>> {
    let probes: Vec<[f64; 2]> = radii
        .iter()
        .flat_map(|&r| {
            (0..opts.probes).map(move |k| {
                let a = TAU * (k as f64 + 0.37) / opts.probes as f64;
                [r * a.cos(), r * a.sin()]
            })
        })
        .collect();
    let step = 1e-4 * radii.iter().copied().fold(1.0, f64::max);
    let defect = area_defect(map, &probes, step)?;
    if defect > opts.map_tolerance {
        return Err(Error::Precondition(format!(
            "candidate map is not area preserving: |det D Phi - 1| = {defect:e} exceeds {:e}",
            opts.map_tolerance
        )));
    }
    let lap = PolarSampler::new(&k_laplacian(f));
    let lap0 = PolarSampler::new(&k_laplacian(f0));
    radii
        .par_iter()
        .map(|&r| {
            let moved = circle_integral(&lap, map, r, opts.samples)?;
            let fixed = circle_integral(&lap0, &super::maps::Identity, r, opts.samples)?;
            Ok((moved - fixed).abs())
        })
        .collect()
}
