//! Integrates a swirling Gaussian vortex and reports conservation and
//! swirl-transport diagnostics.
//!
//! `cargo run --release --example simulate_vortex -- 96`

use axiflow::config::RunConfig;
use axiflow::simulate::{relative_drift, simulate, RunOptions};

fn main() -> axiflow::error::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let cfg = RunConfig::load(
        None,
        &[
            "preset=gaussian-vortex".into(),
            "amplitude=0.05".into(),
            "swirl=0.2".into(),
            format!("nr={n}"),
            format!("npsi={n}"),
        ],
    )?;
    let (grid, preset) = cfg.flow_grid()?;
    let initial = preset.initial_state(&grid, cfg.params())?;
    let opts = RunOptions { horizon: 1.0, cadence: 20, ..Default::default() };
    let out = simulate(initial, &opts, |_, _, row| {
        if let Some(d) = row {
            println!("t = {:.3}  energy = {:.10e}  swirl residual = {:.3e}", d.t, d.energy, d.swirl_residual);
        }
        Ok(())
    })?;
    println!("{} steps of {:.3e}", out.steps, out.dt);
    println!("energy drift      {:.2e}", relative_drift(&out.rows, |d| d.energy));
    println!("int sigma^2 drift {:.2e}", relative_drift(&out.rows, |d| d.casimir_2));
    Ok(())
}
