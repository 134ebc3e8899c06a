//! Scans the linearized exponential map along rigid rotation and along the
//! translation profile.
//!
//! Rigid rotation develops conjugate points; the translation profile does not.

use axiflow::app::run_jacobi;
use axiflow::config::RunConfig;

fn main() -> axiflow::error::Result<()> {
    let out = std::env::temp_dir().join("axiflow-jacobi-example");
    for preset in ["translation-profile", "rigid-rotation"] {
        let cfg = RunConfig::load(None, &[format!("preset={preset}")])?;
        let s = run_jacobi(&cfg, &out.join(preset))?;
        println!(
            "{preset}: horizon {:.2}, slope {:.3}, min sigma_min/(slope t) = {:.3}",
            s.horizon, s.slope, s.min_relative_singular_value
        );
        for d in &s.detections {
            println!("  conjugate point near t = {:.4} (sigma_min {:.2e})", d.t, d.sigma_min);
        }
    }
    Ok(())
}
