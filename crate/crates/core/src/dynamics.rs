//! Time integration of the reduced Euler equations and Lagrangian markers.

use std::f64::consts::TAU;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Ghost, GhostRules, Padded, ScalarField};
use crate::grid::{Grid, PsiExtent};
use crate::operators::{self, AxisymField};

/// CFL safety factor applied to the advective time-step bound.
pub const CFL_SAFETY: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub f: ScalarField,
    pub sigma: ScalarField,
    w: ScalarField,
}

impl FlowState {
    pub fn new(t: f64, f: ScalarField, sigma: ScalarField) -> Result<Self> {
        f.same_grid(&sigma)?;
        let u = AxisymField::new(f, sigma)?;
        Ok(Self::from_field(t, u))
    }

    pub fn from_field(t: f64, u: AxisymField) -> Self {
        let w = operators::vorticity(&u);
        FlowState {
            t,
            f: u.stream,
            sigma: u.swirl,
            w,
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::from_field(0.0, AxisymField::zeros(grid))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.f.grid
    }

    /// Cached `w = Delta_K f + phi sigma / |K|^2`.
    pub fn vorticity(&self) -> &ScalarField {
        &self.w
    }

    pub fn field(&self) -> AxisymField {
        AxisymField {
            stream: self.f.clone(),
            swirl: self.sigma.clone(),
        }
    }
}

/// `(df/dt, dsigma/dt)` of the reduced Euler system.
///
/// The centrifugal term `1/2 {1/|K|^2, sigma^2}` is evaluated as
/// `{sigma/|K|^2, sigma}`, which equals it in the continuum and keeps the
/// discrete energy exactly conserved by the bracket.
pub fn euler_rhs(state: &FlowState) -> Result<(ScalarField, ScalarField)> {
    let (f, sigma) = (&state.f, &state.sigma);
    let dsigma = -&operators::poisson_bracket(f, sigma)?;
    let g = operators::swirl_coefficient(sigma);
    let transport = operators::poisson_bracket(f, &state.w)?;
    let centrifugal = operators::poisson_bracket(&g, sigma)?;
    let rhs = &centrifugal - &transport;
    let df = operators::invert_k_laplacian(&rhs)?;
    Ok((df, dsigma.with_kind(sigma.parity, sigma.boundary)))
}

/// Largest time step allowed by the CFL condition (infinite at rest).
pub fn admissible_dt(state: &FlowState) -> f64 {
    let g = state.grid();
    let u = operators::skew_gradient(&state.f);
    let ur = u.u_r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let up = u.u_psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rate = (ur / g.hr).max(up / g.hpsi);
    if rate == 0.0 {
        f64::INFINITY
    } else {
        CFL_SAFETY / rate
    }
}

/// The four Runge-Kutta stage fields of one step, shared with the markers.
#[derive(Debug, Clone)]
pub struct RkStages {
    pub t0: f64,
    pub dt: f64,
    pub fields: [AxisymField; 4],
}

fn add_scaled(base: &AxisymField, a: f64, df: &ScalarField, ds: &ScalarField) -> AxisymField {
    let mut out = base.clone();
    for (y, v) in out.stream.values.iter_mut().zip(&df.values) {
        *y += a * v;
    }
    for (y, v) in out.swirl.values.iter_mut().zip(&ds.values) {
        *y += a * v;
    }
    out
}

/// One classical RK4 step, also returning the stage fields.
pub fn step_with_stages(state: &FlowState, dt: f64) -> Result<(FlowState, RkStages)> {
    let adm = admissible_dt(state);
    if !(dt > 0.0) || dt > adm * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, admissible: adm });
    }
    let y0 = state.field();
    let (f1, s1) = euler_rhs(state)?;
    let y1 = add_scaled(&y0, 0.5 * dt, &f1, &s1);
    let st1 = FlowState::from_field(state.t + 0.5 * dt, y1.clone());
    let (f2, s2) = euler_rhs(&st1)?;
    let y2 = add_scaled(&y0, 0.5 * dt, &f2, &s2);
    let st2 = FlowState::from_field(state.t + 0.5 * dt, y2.clone());
    let (f3, s3) = euler_rhs(&st2)?;
    let y3 = add_scaled(&y0, dt, &f3, &s3);
    let st3 = FlowState::from_field(state.t + dt, y3.clone());
    let (f4, s4) = euler_rhs(&st3)?;

    let mut next = y0.clone();
    let c = dt / 6.0;
    for (k, y) in next.stream.values.iter_mut().enumerate() {
        *y += c * (f1.values[k] + 2.0 * f2.values[k] + 2.0 * f3.values[k] + f4.values[k]);
    }
    for (k, y) in next.swirl.values.iter_mut().enumerate() {
        *y += c * (s1.values[k] + 2.0 * s2.values[k] + 2.0 * s3.values[k] + s4.values[k]);
    }
    let stages = RkStages {
        t0: state.t,
        dt,
        fields: [y0, y1, y2, y3],
    };
    Ok((FlowState::from_field(state.t + dt, next), stages))
}

pub fn step(state: &FlowState, dt: f64) -> Result<FlowState> {
    step_with_stages(state, dt).map(|(s, _)| s)
}

/// Quotient-surface Lagrangian markers with their accumulated `theta` shift.
#[derive(Debug, Clone)]
pub struct FlowMap {
    pub grid: Arc<Grid>,
    pub seeds: Vec<[f64; 2]>,
    /// Current `(r, psi)`; `psi` is not wrapped, so winding is kept.
    pub positions: Vec<[f64; 2]>,
    pub theta_shift: Vec<f64>,
    pub frozen: Vec<bool>,
}

impl FlowMap {
    pub fn from_seeds(grid: &Arc<Grid>, seeds: Vec<[f64; 2]>) -> Result<Self> {
        if let Some(s) = seeds.iter().find(|s| !grid.contains(s[0], s[1])) {
            return Err(Error::Precondition(format!(
                "marker seed ({}, {}) lies outside the domain",
                s[0], s[1]
            )));
        }
        let n = seeds.len();
        Ok(FlowMap {
            grid: Arc::clone(grid),
            positions: seeds.clone(),
            seeds,
            theta_shift: vec![0.0; n],
            frozen: vec![false; n],
        })
    }

    /// One marker on every grid node, in row-major order.
    pub fn on_nodes(grid: &Arc<Grid>) -> Self {
        let mut seeds = Vec::with_capacity(grid.len());
        for &r in &grid.r_nodes {
            for &p in &grid.psi_nodes {
                seeds.push([r, p]);
            }
        }
        FlowMap::from_seeds(grid, seeds).expect("grid nodes are interior")
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn frozen_count(&self) -> usize {
        self.frozen.iter().filter(|&&b| b).count()
    }
}

/// Interpolated marker velocity of one axisymmetric field.
///
/// Grids with a polar-chart pole interpolate Cartesian components
/// `(x, y) = r (cos psi, sin psi)`, which stay smooth through the pole.
pub struct MarkerVelocity {
    grid: Arc<Grid>,
    cartesian: bool,
    a: Padded,
    b: Padded,
    theta: Padded,
}

impl MarkerVelocity {
    pub fn new(u: &AxisymField) -> Self {
        let grid = Arc::clone(u.grid());
        let v = operators::skew_gradient(&u.stream);
        let np = grid.npsi;
        let theta: Vec<f64> = (0..grid.len())
            .map(|k| {
                let rg = &grid.rows[k / np];
                let q = grid.geometry.connection_coefficient(rg.r);
                u.swirl.values[k] / rg.k_norm_sq - q * v.u_psi[k]
            })
            .collect();
        let even = GhostRules {
            r_wall: Ghost::Extrapolate,
            axis: Ghost::Even,
            psi_wall: Ghost::Extrapolate,
        };
        let cartesian = grid.has_pole();
        let (a, b) = if cartesian {
            let mut xs = vec![0.0; grid.len()];
            let mut ys = vec![0.0; grid.len()];
            for k in 0..grid.len() {
                let r = grid.rows[k / np].r;
                let (s, c) = grid.psi_nodes[k % np].sin_cos();
                xs[k] = v.u_r[k] * c - r * v.u_psi[k] * s;
                ys[k] = v.u_r[k] * s + r * v.u_psi[k] * c;
            }
            (Padded::with_rules(&grid, &xs, even), Padded::with_rules(&grid, &ys, even))
        } else {
            let radial = GhostRules {
                r_wall: Ghost::Zero,
                axis: Ghost::Zero,
                psi_wall: Ghost::Extrapolate,
            };
            let angular = GhostRules {
                r_wall: Ghost::Extrapolate,
                axis: Ghost::Even,
                psi_wall: Ghost::Zero,
            };
            (
                Padded::with_rules(&grid, &v.u_r, radial),
                Padded::with_rules(&grid, &v.u_psi, angular),
            )
        };
        let theta = Padded::with_rules(&grid, &theta, even);
        MarkerVelocity {
            grid,
            cartesian,
            a,
            b,
            theta,
        }
    }

    #[inline]
    fn sample(&self, r: f64, psi: f64) -> [f64; 3] {
        let x = self.grid.row_coordinate(r);
        let y = self.grid.column_coordinate(psi);
        [self.a.bilinear(x, y), self.b.bilinear(x, y), self.theta.bilinear(x, y)]
    }

    /// `(dr/dt, dpsi/dt, dtheta/dt)` at a quotient point.
    pub fn polar(&self, r: f64, psi: f64) -> [f64; 3] {
        let [a, b, th] = self.sample(r, psi);
        if self.cartesian {
            let (s, c) = psi.sin_cos();
            let rr = r.max(1e-300);
            [a * c + b * s, (-a * s + b * c) / rr, th]
        } else {
            [a, b, th]
        }
    }

    /// `(dx/dt, dy/dt, dtheta/dt)` in the Cartesian chart of a pole grid.
    fn cartesian(&self, x: f64, y: f64) -> [f64; 3] {
        let r = x.hypot(y);
        let psi = y.atan2(x);
        self.sample(r, psi)
    }
}

fn unwrap_near(angle: f64, reference: f64) -> f64 {
    angle + TAU * ((reference - angle) / TAU).round()
}

fn inside(grid: &Grid, r: f64, psi: f64) -> bool {
    let dom = &grid.domain;
    let r_ok = r >= dom.r_min - 1e-12 && r <= dom.r_max + 1e-12;
    let p_ok = match dom.psi {
        PsiExtent::Periodic { .. } => true,
        PsiExtent::Walls { min, max } => psi >= min - 1e-12 && psi <= max + 1e-12,
    };
    r_ok && p_ok
}

/// Advances every unfrozen marker by one RK4 step through the stage fields.
///
/// Markers that leave the truncated domain are clamped to it and frozen.
pub fn advance_flow_map(map: &mut FlowMap, stages: &RkStages) {
    let vel: Vec<MarkerVelocity> = stages.fields.iter().map(MarkerVelocity::new).collect();
    advance_with(map, [&vel[0], &vel[1], &vel[2], &vel[3]], stages.dt);
}

/// Advances markers through a time-independent field.
pub fn advance_flow_map_steady(map: &mut FlowMap, velocity: &MarkerVelocity, dt: f64) {
    advance_with(map, [velocity; 4], dt);
}

/// Advances markers by one RK4 step given the velocity at the start, the
/// midpoint (used twice) and the end of the step. `dt` may be negative.
pub fn advance_flow_map_through(map: &mut FlowMap, velocity: [&MarkerVelocity; 4], dt: f64) {
    advance_with(map, velocity, dt);
}

fn advance_with(map: &mut FlowMap, vel: [&MarkerVelocity; 4], dt: f64) {
    let grid = Arc::clone(&map.grid);
    let cart = vel[0].cartesian;
    let results: Vec<([f64; 2], f64, bool)> = map
        .positions
        .par_iter()
        .zip(map.frozen.par_iter())
        .map(|(p, &frozen)| {
            if frozen {
                return (*p, 0.0, true);
            }
            let (r, psi) = (p[0], p[1]);
            if cart {
                let (x0, y0) = (r * psi.cos(), r * psi.sin());
                let k1 = vel[0].cartesian(x0, y0);
                let k2 = vel[1].cartesian(x0 + 0.5 * dt * k1[0], y0 + 0.5 * dt * k1[1]);
                let k3 = vel[2].cartesian(x0 + 0.5 * dt * k2[0], y0 + 0.5 * dt * k2[1]);
                let k4 = vel[3].cartesian(x0 + dt * k3[0], y0 + dt * k3[1]);
                let comb = |i: usize| dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                let (x, y) = (x0 + comb(0), y0 + comb(1));
                let rn = x.hypot(y);
                let pn = if rn > 0.0 { unwrap_near(y.atan2(x), psi) } else { psi };
                finish(&grid, rn, pn, comb(2))
            } else {
                let k1 = vel[0].polar(r, psi);
                let k2 = vel[1].polar(r + 0.5 * dt * k1[0], psi + 0.5 * dt * k1[1]);
                let k3 = vel[2].polar(r + 0.5 * dt * k2[0], psi + 0.5 * dt * k2[1]);
                let k4 = vel[3].polar(r + dt * k3[0], psi + dt * k3[1]);
                let comb = |i: usize| dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                finish(&grid, r + comb(0), psi + comb(1), comb(2))
            }
        })
        .collect();
    let mut newly_frozen = 0;
    for (k, (pos, dth, frozen)) in results.into_iter().enumerate() {
        if frozen && !map.frozen[k] {
            newly_frozen += 1;
        }
        map.positions[k] = pos;
        map.theta_shift[k] += dth;
        map.frozen[k] = frozen;
    }
    if newly_frozen > 0 {
        log::warn!("{newly_frozen} markers left the domain and were frozen");
    }
}

fn finish(grid: &Grid, r: f64, psi: f64, dtheta: f64) -> ([f64; 2], f64, bool) {
    if inside(grid, r, psi) {
        ([r, psi], dtheta, false)
    } else {
        let dom = &grid.domain;
        let rc = r.clamp(dom.r_min, dom.r_max);
        let pc = match dom.psi {
            PsiExtent::Periodic { .. } => psi,
            PsiExtent::Walls { min, max } => psi.clamp(min, max),
        };
        ([rc, pc], dtheta, true)
    }
}

/// `max |sigma(t, gamma(x)) - sigma_0(x)|` over unfrozen markers.
pub fn swirl_transport_residual(state: &FlowState, map: &FlowMap, sigma0: &ScalarField) -> f64 {
    let g = state.grid();
    let now = state.sigma.padded();
    let init = sigma0.padded();
    let at = |p: &Padded, r: f64, psi: f64| p.bilinear(g.row_coordinate(r), g.column_coordinate(psi));
    map.positions
        .par_iter()
        .zip(map.seeds.par_iter())
        .zip(map.frozen.par_iter())
        .filter(|(_, &fz)| !fz)
        .map(|((p, s), _)| (at(&now, p[0], p[1]) - at(&init, s[0], s[1])).abs())
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub energy: f64,
    pub casimir_1: f64,
    pub casimir_2: f64,
    pub sup_sigma: f64,
    pub sup_vorticity: f64,
    pub swirl_residual: f64,
}

impl Diagnostics {
    pub const CSV_HEADER: &'static str = "t,energy,casimir_1,casimir_2,sup_sigma,sup_vorticity,swirl_residual";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.12e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.t,
            self.energy,
            self.casimir_1,
            self.casimir_2,
            self.sup_sigma,
            self.sup_vorticity,
            self.swirl_residual
        )
    }
}

/// Energy, swirl Casimirs and sup norms; `swirl_residual` is left at zero.
pub fn conserved_diagnostics(state: &FlowState) -> Diagnostics {
    let u = state.field();
    Diagnostics {
        t: state.t,
        energy: operators::energy(&u),
        casimir_1: state.sigma.integral(),
        casimir_2: state.sigma.weighted_dot(&state.sigma),
        sup_sigma: state.sigma.max_abs(),
        sup_vorticity: state.w.max_abs(),
        swirl_residual: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Boundary, Parity};
    use crate::geometry::{GeometryKind, Profile};
    use crate::grid::Domain;

    fn rot(n: usize) -> Arc<Grid> {
        let dom = Domain::periodic(0.0, 1.0, 2.0).unwrap();
        Grid::new(GeometryKind::doubly_warped(Profile::EuclideanRotation), dom, n, n).unwrap()
    }

    fn radial_state(g: &Arc<Grid>) -> FlowState {
        let f = ScalarField::from_fn(g, Parity::Even, Boundary::Dirichlet, |r, _| r * r * (1.0 - r * r));
        let s = ScalarField::from_fn(g, Parity::KNormSqScaled, Boundary::Free, |r, _| r * r * (2.0 - r));
        FlowState::new(0.0, f, s).unwrap()
    }

    #[test]
    fn zero_state_is_fixed() {
        let g = rot(8);
        let s0 = FlowState::zeros(&g);
        let s1 = step(&s0, 0.1).unwrap();
        assert_eq!(s1.f.max_abs() + s1.sigma.max_abs(), 0.0);
        assert_eq!(s1.t, 0.1);
        let d = conserved_diagnostics(&s0);
        assert_eq!(d.energy + d.casimir_1 + d.casimir_2 + d.sup_sigma + d.sup_vorticity, 0.0);
    }

    #[test]
    fn radial_state_is_steady() {
        let g = rot(16);
        let s0 = radial_state(&g);
        let (df, ds) = euler_rhs(&s0).unwrap();
        assert!(df.max_abs() < 1e-12 && ds.max_abs() < 1e-12);
        let dt = 0.5 * admissible_dt(&s0);
        let mut s = s0.clone();
        let mut map = FlowMap::on_nodes(&g);
        for _ in 0..100 {
            let (next, stages) = step_with_stages(&s, dt).unwrap();
            advance_flow_map(&mut map, &stages);
            s = next;
        }
        assert!((&s.f - &s0.f).max_abs() <= 1e-10);
        // markers only move in psi, at the speed f'(r) / (alpha beta) = 2 - 4 r^2
        let t = s.t;
        for (k, p) in map.positions.iter().enumerate() {
            let seed = map.seeds[k];
            let (i, j) = (k / g.npsi, k % g.npsi);
            let (r0, p0) = (seed[0], seed[1]);
            assert!((p[0] - r0).abs() < 1e-12);
            let u = operators::skew_gradient(&s0.f).u_psi[i * g.npsi + j];
            assert!((p[1] - p0 - t * u).abs() < 1e-9);
            assert!((u - (2.0 - 4.0 * r0 * r0)).abs() < 0.02);
        }
    }

    #[test]
    fn pure_swirl_only_moves_theta() {
        let dom = Domain::periodic(0.0, 1.0, TAU).unwrap();
        let g = Grid::new(GeometryKind::fibration(0).unwrap(), dom, 12, 12).unwrap();
        let f = ScalarField::zeros(&g, Parity::Even, Boundary::Dirichlet);
        let s = ScalarField::from_fn(&g, Parity::KNormSqScaled, Boundary::Free, |r, _| 1.0 + r * r);
        let st = FlowState::new(0.0, f, s).unwrap();
        let mut map = FlowMap::on_nodes(&g);
        let (_, stages) = step_with_stages(&st, 0.25).unwrap();
        advance_flow_map(&mut map, &stages);
        for k in 0..map.len() {
            let r = map.seeds[k][0];
            assert!((map.positions[k][0] - r).abs() < 1e-14);
            assert!((map.theta_shift[k] - 0.25 * (1.0 + r * r)).abs() < 1e-12);
        }
    }

    #[test]
    fn swirl_free_stays_swirl_free() {
        let g = rot(16);
        let f = ScalarField::from_fn(&g, Parity::Even, Boundary::Dirichlet, |r, p| {
            r * r * (1.0 - r * r) * (1.0 + 0.3 * (std::f64::consts::PI * p).cos())
        });
        let s = ScalarField::zeros(&g, Parity::KNormSqScaled, Boundary::Free);
        let mut st = FlowState::new(0.0, f, s).unwrap();
        let dt = 0.5 * admissible_dt(&st);
        for _ in 0..5 {
            st = step(&st, dt).unwrap();
        }
        assert!(st.sigma.max_abs() <= 1e-12);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = rot(16);
        let s0 = radial_state(&g);
        let adm = admissible_dt(&s0);
        match step(&s0, 2.0 * adm) {
            Err(Error::Cfl { admissible, .. }) => assert_eq!(admissible, adm),
            other => panic!("expected a CFL error, got {other:?}"),
        }
    }

    #[test]
    fn constant_swirl_transport_is_exact() {
        let g = rot(16);
        let f = ScalarField::from_fn(&g, Parity::Even, Boundary::Dirichlet, |r, p| {
            r * r * (1.0 - r) * (std::f64::consts::PI * p).sin()
        });
        let s = ScalarField::from_fn(&g, Parity::Even, Boundary::Free, |_, _| 2.0);
        let s0 = s.clone();
        let mut st = FlowState::new(0.0, f, s).unwrap();
        let mut map = FlowMap::on_nodes(&g);
        assert_eq!(swirl_transport_residual(&st, &map, &s0), 0.0);
        let dt = 0.5 * admissible_dt(&st);
        for _ in 0..4 {
            let (next, stages) = step_with_stages(&st, dt).unwrap();
            advance_flow_map(&mut map, &stages);
            st = next;
        }
        assert!(swirl_transport_residual(&st, &map, &s0) < 1e-10);
    }
}
