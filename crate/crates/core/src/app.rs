//! Run orchestration behind the command-line front end.
//!
//! Each `run_*` function reads a validated [`RunConfig`], writes its
//! artifacts under `out`, and returns a summary. [`exit_code`] maps errors to
//! process exit statuses.

use std::path::Path;

use log::info;
use serde::Serialize;

use crate::check::{self, CheckReport};
use crate::config::{OrbitPreset, Route, RunConfig};
use crate::dynamics::FlowState;
use crate::error::{Error, Result};
use crate::io::{snapshot_steps, write_text, DiagnosticsWriter, Snapshot};
use crate::linearized::integral::{phi_by_integral, IntegralOptions};
use crate::linearized::scan::{
    conjugate_scan, detections_stable, small_swirl_continuity, tail_norms, Detection, ScanOptions, ScanReport,
    SweepRow,
};
use crate::linearized::shooting::{phi_by_shooting, JacobiHistory, ShootingOptions};
use crate::linearized::{BasisSpec, PerturbationBasis};
use crate::operators::AxisymField;
use crate::orbits::{self, presets as orbit_presets, OrbitOptions, Tolerances, Verdict};
use crate::presets::{FlowPreset, PresetParams};
use crate::simulate::{simulate, RunOptions, RunOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn create_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))
}

/// Writes `diagnostics.csv` and, if requested, `snapshots/{f,sigma}_NNNN.bin`.
pub fn run_simulate(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let (grid, preset) = cfg.flow_grid()?;
    let initial = preset.initial_state(&grid, cfg.params())?;
    let opts = RunOptions {
        horizon: cfg.horizon_for(preset),
        dt: cfg.dt,
        cfl: cfg.cfl,
        cadence: cfg.cadence,
        markers: cfg.markers,
    };
    let (steps, dt) = crate::simulate::step_plan(&initial, &opts)?;
    info!("simulate {} on {}: {steps} steps of {dt:.3e}", preset.name(), grid.geometry);
    create_dir(out)?;
    let shots = snapshot_steps(steps, cfg.snapshots);
    let shot_dir = out.join("snapshots");
    if !shots.is_empty() {
        create_dir(&shot_dir)?;
    }
    let mut csv = DiagnosticsWriter::create(&out.join("diagnostics.csv"))?;
    let mut taken = 0;
    let outcome = simulate(initial, &opts, |n, state: &FlowState, row| {
        if let Some(d) = row {
            csv.row(d)?;
        }
        if shots.binary_search(&n).is_ok() {
            Snapshot::of(&state.f).write(&shot_dir.join(format!("f_{taken:04}.bin")))?;
            Snapshot::of(&state.sigma).write(&shot_dir.join(format!("sigma_{taken:04}.bin")))?;
            taken += 1;
        }
        Ok(())
    })?;
    csv.finish()?;
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub basis_size: usize,
    pub conjugate_times: Vec<f64>,
    /// Every detection of the primary basis has a partner within the
    /// configured relative stability.
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct JacobiSummary {
    pub preset: String,
    pub basis_size: usize,
    pub route: Route,
    pub horizon: f64,
    pub slope: f64,
    /// `min sigma_min(Phi_t) / (slope * t)` over the scan.
    pub min_relative_singular_value: f64,
    pub conjugate_times: Vec<f64>,
    pub detections: Vec<Detection>,
    pub comparison: Option<Comparison>,
    pub tail_norms: Vec<(usize, f64)>,
    pub sweep: Vec<SweepRow>,
}

fn shooting_options(cfg: &RunConfig) -> ShootingOptions {
    ShootingOptions {
        epsilon: cfg.jacobi.epsilon,
        dt: cfg.jacobi.dt,
        tolerance: cfg.jacobi.shooting_tolerance,
    }
}

/// `Phi_t` on `times` by the configured route.
pub fn jacobi_history(cfg: &RunConfig, u0: &AxisymField, basis: &PerturbationBasis, times: &[f64]) -> Result<JacobiHistory> {
    let j = &cfg.jacobi;
    match j.route {
        Route::Shooting => phi_by_shooting(u0, basis, times, shooting_options(cfg)),
        Route::Integral => {
            let opts = IntegralOptions {
                dt: j.dt,
                tolerance: j.integral_tolerance,
                max_iterations: j.max_iterations,
                swirl_limit: j.swirl_limit,
            };
            phi_by_integral(u0, basis, times, opts).map(|s| JacobiHistory { times: s.times, phi: s.phi })
        }
    }
}

fn scan_with(cfg: &RunConfig, u0: &AxisymField, size: usize, times: &[f64]) -> Result<ScanReport> {
    let basis = PerturbationBasis::graded(u0.grid(), size, BasisSpec::JACOBI)?;
    let history = jacobi_history(cfg, u0, &basis, times)?;
    Ok(conjugate_scan(
        &history,
        ScanOptions {
            threshold: cfg.jacobi.threshold,
            ..Default::default()
        },
    ))
}

/// Writes `trace.csv`, `conjugate_times.csv`, optional `tail_norms.csv` and
/// `sweep.csv`, and `report.json`.
pub fn run_jacobi(cfg: &RunConfig, out: &Path) -> Result<JacobiSummary> {
    let (grid, preset) = cfg.jacobi_grid()?;
    let u0 = preset.build(&grid, cfg.params())?;
    let times = cfg.jacobi_times(preset)?;
    let j = &cfg.jacobi;
    create_dir(out)?;
    info!("jacobi {} with N = {} on {} samples", preset.name(), j.basis_size, times.len());
    let report = scan_with(cfg, &u0, j.basis_size, &times)?;
    write_text(&out.join("trace.csv"), &report.csv())?;
    let mut conj = String::from("t,sigma_min,det_sign_change\n");
    for d in &report.detections {
        conj.push_str(&format!("{:.12e},{:.12e},{}\n", d.t, d.sigma_min, d.det_sign_change));
    }
    write_text(&out.join("conjugate_times.csv"), &conj)?;

    let comparison = if j.compare_basis_size > 0 {
        info!("comparison basis N = {}", j.compare_basis_size);
        let other = scan_with(cfg, &u0, j.compare_basis_size, &times)?;
        Some(Comparison {
            basis_size: j.compare_basis_size,
            conjugate_times: other.detections.iter().map(|d| d.t).collect(),
            stable: detections_stable(&report.detections, &other.detections, j.stability),
        })
    } else {
        None
    };

    let tails = if j.tail_thresholds.is_empty() {
        Vec::new()
    } else {
        let top = j.tail_thresholds.iter().copied().max().unwrap_or(0);
        let basis = PerturbationBasis::up_to_frequency(&grid, top + top / 4, BasisSpec::STREAM_COS)?;
        let t = tail_norms(&u0, &basis, &j.tail_thresholds)?;
        let mut csv = String::from("threshold,norm\n");
        for (th, n) in &t {
            csv.push_str(&format!("{th},{n:.12e}\n"));
        }
        write_text(&out.join("tail_norms.csv"), &csv)?;
        t
    };

    let sweep = if j.sweep.is_empty() {
        Vec::new()
    } else {
        let direction = FlowPreset::RigidRotation.build(&grid, PresetParams::default())?;
        let basis = PerturbationBasis::graded(&grid, j.basis_size, BasisSpec::JACOBI)?;
        let horizon = *times.last().unwrap_or(&j.sample_dt);
        let rows = small_swirl_continuity(&u0, &direction, &j.sweep, &basis, horizon, shooting_options(cfg));
        let mut csv = String::from("amplitude,sigma_min,error\n");
        for r in &rows {
            let s = r.sigma_min.map(|v| format!("{v:.12e}")).unwrap_or_default();
            csv.push_str(&format!("{:.12e},{s},{}\n", r.amplitude, r.error.clone().unwrap_or_default().replace(',', ";")));
        }
        write_text(&out.join("sweep.csv"), &csv)?;
        rows
    };

    let summary = JacobiSummary {
        preset: preset.name().into(),
        basis_size: j.basis_size,
        route: j.route,
        horizon: *times.last().unwrap_or(&0.0),
        slope: report.slope,
        min_relative_singular_value: report.min_relative_singular_value(),
        conjugate_times: report.detections.iter().map(|d| d.t).collect(),
        detections: report.detections.clone(),
        comparison,
        tail_norms: tails,
        sweep,
    };
    write_text(&out.join("report.json"), &to_json(&summary)?)?;
    Ok(summary)
}

/// Writes `verdict.json`.
pub fn run_orbit(cfg: &RunConfig, out: &Path) -> Result<Verdict> {
    let (grid, preset) = cfg.orbit_grid()?;
    let o = &cfg.orbit;
    let u0 = orbit_presets::gaussian(&grid)?;
    let u = match preset {
        OrbitPreset::Identical => u0.clone(),
        OrbitPreset::ShearedDatum => orbit_presets::sheared(&grid, o.shear)?,
        OrbitPreset::AreaMismatched => orbit_presets::area_mismatched(&grid, o.exponent)?,
    };
    let opts = OrbitOptions {
        tolerances: Tolerances {
            area: o.area_tolerance,
            circle: o.circle_tolerance,
            map: o.map_tolerance,
        },
        levels: o.levels.clone(),
        radii: o.radii.clone(),
    };
    info!("orbit {} on {} x {}", preset.name(), grid.nr, grid.npsi);
    let verdict = orbits::orbit_membership(&u0, &u, &opts)?;
    create_dir(out)?;
    write_text(&out.join("verdict.json"), &to_json(&verdict)?)?;
    Ok(verdict)
}

/// Runs the operator battery and writes `check.json`.
pub fn run_check(out: &Path) -> Result<CheckReport> {
    let report = check::run_all()?;
    create_dir(out)?;
    write_text(&out.join("check.json"), &to_json(&report)?)?;
    Ok(report)
}
