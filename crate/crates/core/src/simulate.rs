//! Fixed-step time integration with diagnostics and Lagrangian markers.

use crate::dynamics::{
    admissible_dt, advance_flow_map, conserved_diagnostics, step_with_stages, swirl_transport_residual, Diagnostics,
    FlowMap, FlowState,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub horizon: f64,
    /// Fixed step; when absent it is `cfl` times the admissible step of the
    /// initial state, shortened so that it divides the horizon.
    pub dt: Option<f64>,
    pub cfl: f64,
    /// Emit a diagnostics row every `cadence` steps (and always at the end).
    pub cadence: usize,
    /// Carry node markers and report the swirl transport residual.
    pub markers: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            horizon: 1.0,
            dt: None,
            cfl: 0.8,
            cadence: 1,
            markers: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rows: Vec<Diagnostics>,
    pub state: FlowState,
    pub dt: f64,
    pub steps: usize,
}

/// Number of steps and the step that exactly reaches `horizon`.
pub fn step_plan(initial: &FlowState, opts: &RunOptions) -> Result<(usize, f64)> {
    if !(opts.horizon > 0.0) || !(opts.cfl > 0.0) || opts.cadence == 0 {
        return Err(Error::Precondition("horizon, cfl and cadence must be positive".into()));
    }
    let target = match opts.dt {
        Some(dt) if dt > 0.0 => dt,
        Some(dt) => return Err(Error::Precondition(format!("dt must be positive, got {dt}"))),
        None => (opts.cfl * admissible_dt(initial)).min(opts.horizon),
    };
    let steps = (opts.horizon / target - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, opts.horizon / steps as f64))
}

/// Integrates `initial` to `t0 + horizon`.
///
/// `observe(step, state, row)` runs after every step (and once for step 0);
/// `row` is present on the diagnostics cadence.
pub fn simulate(
    initial: FlowState,
    opts: &RunOptions,
    mut observe: impl FnMut(usize, &FlowState, Option<&Diagnostics>) -> Result<()>,
) -> Result<RunOutcome> {
    let (steps, dt) = step_plan(&initial, opts)?;
    let sigma0 = initial.sigma.clone();
    let mut map = opts.markers.then(|| FlowMap::on_nodes(initial.grid()));
    let mut state = initial;
    let mut rows = Vec::new();
    for n in 0..=steps {
        if n > 0 {
            let (next, stages) = step_with_stages(&state, dt)?;
            if let Some(m) = map.as_mut() {
                advance_flow_map(m, &stages);
            }
            state = next;
        }
        let row = (n % opts.cadence == 0 || n == steps).then(|| {
            let mut d = conserved_diagnostics(&state);
            if let Some(m) = &map {
                d.swirl_residual = swirl_transport_residual(&state, m, &sigma0);
            }
            d
        });
        observe(n, &state, row.as_ref())?;
        rows.extend(row);
    }
    Ok(RunOutcome { rows, state, dt, steps })
}

/// Largest relative change of `pick` over the rows, against the first row.
pub fn relative_drift(rows: &[Diagnostics], pick: impl Fn(&Diagnostics) -> f64) -> f64 {
    let Some(first) = rows.first() else { return 0.0 };
    let base = pick(first);
    let scale = if base.abs() > 0.0 { base.abs() } else { 1.0 };
    rows.iter().map(|d| (pick(d) - base).abs() / scale).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Boundary, Parity, ScalarField};
    use crate::geometry::{GeometryKind, Profile};
    use crate::grid::{Domain, Grid};

    #[test]
    fn zero_data_gives_zero_rows() {
        let g = Grid::new(
            GeometryKind::doubly_warped(Profile::EuclideanRotation),
            Domain::periodic(0.0, 1.0, 1.0).unwrap(),
            8,
            8,
        )
        .unwrap();
        let opts = RunOptions { horizon: 0.5, dt: Some(0.1), ..Default::default() };
        let out = simulate(FlowState::zeros(&g), &opts, |_, _, _| Ok(())).unwrap();
        assert_eq!(out.steps, 5);
        assert_eq!(out.rows.len(), 6);
        for d in &out.rows {
            assert_eq!([d.energy, d.casimir_1, d.casimir_2, d.sup_sigma, d.sup_vorticity, d.swirl_residual], [0.0; 6]);
        }
    }

    #[test]
    fn plan_divides_the_horizon() {
        let g = Grid::new(GeometryKind::fibration(0).unwrap(), Domain::periodic(0.0, 1.0, std::f64::consts::TAU).unwrap(), 8, 8)
            .unwrap();
        let f = ScalarField::from_fn(&g, Parity::Even, Boundary::Dirichlet, |r, p| (1.0 - r * r) * (1.0 + 0.1 * r * p.cos()));
        let s = FlowState::new(0.0, f, ScalarField::zeros(&g, Parity::KNormSqScaled, Boundary::Free)).unwrap();
        let opts = RunOptions { horizon: 1.0, ..Default::default() };
        let (n, dt) = step_plan(&s, &opts).unwrap();
        assert!((n as f64 * dt - 1.0).abs() < 1e-12);
        assert!(dt <= admissible_dt(&s));
        assert!(step_plan(&s, &RunOptions { cadence: 0, ..opts }).is_err());
    }
}
