//! Self-test battery of discrete operator identities.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{euler_rhs, FlowState};
use crate::error::Result;
use crate::field::{Boundary, Parity, ScalarField};
use crate::geometry::{GeometryKind, Profile};
use crate::grid::{Domain, Grid};
use crate::operators::{
    coadjoint, commutator, divergence, inner_product, k_laplacian, poisson_bracket, skew_gradient, AxisymField,
};

/// Observed convergence order required of consistent-but-inexact identities.
pub const MIN_ORDER: f64 = 1.8;
/// Defects below this (relative) count as exact.
pub const EXACT: f64 = 1e-12;

pub const GRIDS: [usize; 3] = [32, 64, 128];

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub identity: String,
    pub geometry: String,
    /// Defects on each grid of [`GRIDS`] (one entry for single-grid checks).
    pub defects: Vec<f64>,
    /// Smallest observed order between consecutive grids, if inexact.
    pub order: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Geometries of the battery with the domains they are probed on.
pub fn battery_geometries() -> Result<Vec<(GeometryKind, Domain)>> {
    Ok(vec![
        (GeometryKind::doubly_warped(Profile::EuclideanRotation), Domain::periodic(0.0, 1.0, 1.0)?),
        (GeometryKind::doubly_warped(Profile::Sol), Domain::periodic(-0.5, 0.5, 1.0)?),
        (GeometryKind::fibration(-1)?, Domain::periodic(0.0, 1.0, TAU)?),
        (GeometryKind::fibration(0)?, Domain::periodic(0.0, 1.0, TAU)?),
        (GeometryKind::fibration(1)?, Domain::periodic(0.0, 1.0, TAU)?),
    ])
}

/// Smooth test data adapted to the ends of a grid.
struct Probe {
    grid: Arc<Grid>,
}

impl Probe {
    /// A smooth function on the manifold, indexed by `k`.
    fn smooth(&self, k: usize) -> impl Fn(f64, f64) -> f64 {
        let g = &self.grid;
        let pole = g.has_pole();
        let axis = g.has_axis();
        let l = g.psi_period().unwrap_or(1.0);
        let c = [0.3, -0.7, 1.1, 0.5][k % 4];
        let m = 1.0 + (k % 3) as f64;
        move |r: f64, p: f64| {
            if pole {
                let (x, y) = (r * p.cos(), r * p.sin());
                (c * x + 0.4 * y * m).sin() + 0.5 * (m * x * y - c).cos()
            } else {
                let e = if axis { r * r } else { r };
                let w = TAU * p / l;
                (c * e + m * w.cos()).sin() + 0.3 * (e * m).cos() * (w + c).sin()
            }
        }
    }

    /// Factor vanishing to second order on every wall.
    fn wall_factor(&self) -> impl Fn(f64) -> f64 {
        let g = &self.grid;
        let (lo, hi) = (g.domain.r_min, g.domain.r_max);
        let inner_wall = g.inner.is_dirichlet() && !g.has_pole();
        move |r: f64| {
            let a = if inner_wall { (r - lo).powi(2) } else { 1.0 };
            a * (hi - r).powi(2)
        }
    }

    fn free(&self, k: usize) -> ScalarField {
        ScalarField::from_fn(&self.grid, Parity::Even, Boundary::Free, self.smooth(k))
    }

    fn stream(&self, k: usize) -> ScalarField {
        let (f, w) = (self.smooth(k), self.wall_factor());
        ScalarField::from_fn(&self.grid, Parity::Even, Boundary::Dirichlet, move |r, p| w(r) * f(r, p))
    }

    fn swirl(&self, k: usize) -> ScalarField {
        let f = self.smooth(k);
        let g = Arc::clone(&self.grid);
        let axis = g.has_axis();
        ScalarField::from_fn(&self.grid, Parity::KNormSqScaled, Boundary::Free, move |r, p| {
            if axis {
                r * r * f(r, p)
            } else {
                f(r, p)
            }
        })
    }

    fn field(&self, k: usize) -> AxisymField {
        AxisymField {
            stream: self.stream(k),
            swirl: self.swirl(k + 1),
        }
    }
}

fn weighted_norm(f: &ScalarField) -> f64 {
    f.weighted_dot(f).sqrt()
}

fn antisymmetry(p: &Probe) -> Result<f64> {
    let (a, b) = (p.free(0), p.free(1));
    let ab = poisson_bracket(&a, &b)?;
    let ba = poisson_bracket(&b, &a)?;
    Ok((&ab + &ba).max_abs() / ab.max_abs().max(f64::MIN_POSITIVE))
}

fn jacobi_defect(p: &Probe) -> Result<f64> {
    let (a, b, c) = (p.free(0), p.free(1), p.free(2));
    let t1 = poisson_bracket(&a, &poisson_bracket(&b, &c)?)?;
    let t2 = poisson_bracket(&b, &poisson_bracket(&c, &a)?)?;
    let t3 = poisson_bracket(&c, &poisson_bracket(&a, &b)?)?;
    Ok(weighted_norm(&(&(&t1 + &t2) + &t3)) / weighted_norm(&t1))
}

fn divergence_defect(p: &Probe) -> Result<f64> {
    let f = p.stream(0);
    let v = skew_gradient(&f);
    let scale = v.u_r.iter().chain(&v.u_psi).fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(divergence(&v).max_abs() / scale / p.grid.min_spacing().recip())
}

fn self_adjointness(p: &Probe) -> Result<f64> {
    let (a, b) = (p.stream(0), p.stream(1));
    let lhs = a.weighted_dot(&k_laplacian(&b));
    let rhs = k_laplacian(&a).weighted_dot(&b);
    Ok((lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE))
}

/// Sum over the eight stream/swirl component triples of the adjointness
/// defect, relative to the full pairing. Bounds the total defect without
/// relying on cancellation between components.
fn coadjoint_defect(p: &Probe) -> Result<f64> {
    let full = p.field(0);
    let rhs = inner_product(&full, &commutator(&p.field(1), &p.field(2))?);
    let part = |k: usize, swirl: bool| {
        let a = p.field(k);
        let zero = |f: &ScalarField| f.map(|_| 0.0);
        if swirl {
            AxisymField { stream: zero(&a.stream), ..a }
        } else {
            AxisymField { swirl: zero(&a.swirl), ..a }
        }
    };
    let mut total = 0.0;
    for combo in 0..8 {
        let (u, v, w) = (part(0, combo & 1 != 0), part(1, combo & 2 != 0), part(2, combo & 4 != 0));
        let lhs = inner_product(&coadjoint(&v, &u)?, &w);
        total += (lhs + inner_product(&u, &commutator(&v, &w)?)).abs();
    }
    Ok(total / rhs.abs().max(f64::MIN_POSITIVE))
}

type Identity = fn(&Probe) -> Result<f64>;

fn converging_row(name: &str, geom: GeometryKind, dom: Domain, f: Identity, exact: bool) -> Result<CheckRow> {
    let defects: Vec<f64> = GRIDS
        .iter()
        .map(|&n| f(&Probe { grid: Grid::new(geom, dom, n, n)? }))
        .collect::<Result<_>>()?;
    if exact {
        let worst = defects.iter().copied().fold(0.0, f64::max);
        return Ok(CheckRow {
            identity: name.into(),
            geometry: geom.to_string(),
            pass: worst <= EXACT,
            defects,
            order: None,
        });
    }
    let mut order = f64::INFINITY;
    let mut pass = true;
    for w in defects.windows(2) {
        if w[1] <= EXACT {
            continue;
        }
        let o = (w[0] / w[1]).log2();
        order = order.min(o);
        pass &= o >= MIN_ORDER;
    }
    Ok(CheckRow {
        identity: name.into(),
        geometry: geom.to_string(),
        defects,
        order: order.is_finite().then_some(order),
        pass,
    })
}

/// Random nodal state on `grid`, with a Dirichlet stream.
fn random_state(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Result<FlowState> {
    let f: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    FlowState::new(0.0, ScalarField::stream(grid, f)?, ScalarField::swirl(grid, s)?)
}

/// `Delta f_t` of the general system against `-{f, Delta f} - {f, sigma}`.
pub fn fibration_rhs_defect(grid: &Arc<Grid>, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = random_state(grid, &mut rng)?;
    let (df, _) = euler_rhs(&state)?;
    let general = k_laplacian(&df);
    let lap = k_laplacian(&state.f);
    let special = -&(&poisson_bracket(&state.f, &lap)? + &poisson_bracket(&state.f, &state.sigma)?);
    Ok((&general - &special).max_abs() / special.max_abs())
}

/// `-1/2 {1/|K|^2, sigma^2}` in the general bracket form, with the exact
/// radial derivative of `1/|K|^2`, against `beta' / (alpha beta^4) d_psi(sigma^2)`.
pub fn centrifugal_defect(grid: &Arc<Grid>, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = random_state(grid, &mut rng)?;
    let geom = grid.geometry;
    let s = f64::from(geom.orientation);
    let np = grid.npsi;
    let sq = state.sigma.map(|v| v * v);
    let pad = sq.padded();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for i in 0..grid.nr {
        let r = grid.rows[i].r;
        let k2 = geom.killing_data(r)?.k_norm_sq;
        let dinv = -geom.k_norm_sq_derivative(r)? / (k2 * k2);
        let mu = geom.volume_weight(r)?;
        let w = geom.warp_profile(r)?;
        for j in 0..np {
            let (ii, jj) = (i as isize, j as isize);
            let dpsi = (pad.get(ii, jj + 1) - pad.get(ii, jj - 1)) / (2.0 * grid.hpsi);
            let general = -0.5 * s * dinv * dpsi / mu;
            let special = s * w.dbeta / (w.alpha * w.beta.powi(4)) * dpsi;
            worst = worst.max((general - special).abs());
            scale = scale.max(special.abs());
        }
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}

fn single_row(name: &str, geom: GeometryKind, defect: f64, tol: f64) -> CheckRow {
    CheckRow {
        identity: name.into(),
        geometry: geom.to_string(),
        defects: vec![defect],
        order: None,
        pass: defect <= tol,
    }
}

/// Discrete identities across the battery geometries and grids.
pub fn operator_identities() -> Result<CheckReport> {
    let mut rows = Vec::new();
    for (geom, dom) in battery_geometries()? {
        rows.push(converging_row("bracket antisymmetry", geom, dom, antisymmetry, true)?);
        rows.push(converging_row("Jacobi identity", geom, dom, jacobi_defect, false)?);
        rows.push(converging_row("div of skew gradient", geom, dom, divergence_defect, false)?);
        rows.push(converging_row("K-Laplacian self-adjointness", geom, dom, self_adjointness, false)?);
        rows.push(converging_row("coadjoint adjointness", geom, dom, coadjoint_defect, false)?);
    }
    Ok(CheckReport { rows })
}

/// Euler right-hand-side reductions on random states.
pub fn equation_cross_checks() -> Result<CheckReport> {
    let mut rows = Vec::new();
    for k in [-1, 0, 1] {
        let geom = GeometryKind::fibration(k)?;
        let grid = Grid::new(geom, Domain::periodic(0.0, 1.0, TAU)?, 32, 32)?;
        let d = (0..4).map(|s| fibration_rhs_defect(&grid, s)).collect::<Result<Vec<_>>>()?;
        rows.push(single_row("fibration vorticity equation", geom, d.into_iter().fold(0.0, f64::max), EXACT));
    }
    for (p, dom) in [
        (Profile::EuclideanRotation, Domain::periodic(0.0, 1.0, 1.0)?),
        (Profile::H3Rotation, Domain::periodic(0.0, 1.0, 1.0)?),
        (Profile::S2xR_Rotation, Domain::periodic(0.0, 1.0, 1.0)?),
        (Profile::Sol, Domain::periodic(-0.5, 0.5, 1.0)?),
    ] {
        let geom = GeometryKind::doubly_warped(p);
        let grid = Grid::new(geom, dom, 32, 32)?;
        let d = (0..4).map(|s| centrifugal_defect(&grid, s)).collect::<Result<Vec<_>>>()?;
        rows.push(single_row("doubly-warped centrifugal term", geom, d.into_iter().fold(0.0, f64::max), EXACT));
    }
    Ok(CheckReport { rows })
}

/// The full battery.
pub fn run_all() -> Result<CheckReport> {
    let mut report = operator_identities()?;
    report.rows.extend(equation_cross_checks()?.rows);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equation_cross_checks_hold() {
        let r = equation_cross_checks().unwrap();
        for row in &r.rows {
            assert!(row.pass, "{row:?}");
        }
    }
}
