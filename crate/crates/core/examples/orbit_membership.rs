//! Orbit membership verdicts for the three orbit presets.

use axiflow::app::run_orbit;
use axiflow::config::RunConfig;

fn main() -> axiflow::error::Result<()> {
    let out = std::env::temp_dir().join("axiflow-orbit-example");
    for preset in ["identical", "sheared-datum", "area-mismatched"] {
        let cfg = RunConfig::load(None, &[format!("preset={preset}")])?;
        let v = run_orbit(&cfg, &out.join(preset))?;
        println!(
            "{preset:<16} member {:<5}  area residual {:.2e}  circle residual {:.2e}",
            v.member, v.area.max_residual, v.circle.max_residual
        );
    }
    Ok(())
}
