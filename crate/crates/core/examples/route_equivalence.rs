//! Builds the linearized flow map of a swirl-free jet twice: by shooting
//! perturbed geodesics and by the integral decomposition.

use axiflow::app::jacobi_history;
use axiflow::config::{Route, RunConfig};
use axiflow::linearized::{BasisSpec, PerturbationBasis};

fn main() -> axiflow::error::Result<()> {
    let over = ["preset=perturbed-jet", "amplitude=0.5", "nr=48", "npsi=48"].map(String::from);
    let mut cfg = RunConfig::load(None, &over)?;
    let (grid, preset) = cfg.jacobi_grid()?;
    let u0 = preset.build(&grid, cfg.params())?;
    let basis = PerturbationBasis::graded(&grid, 16, BasisSpec::JACOBI)?;
    let times = [0.5, 1.0];
    let shooting = jacobi_history(&cfg, &u0, &basis, &times)?;
    cfg.jacobi.route = Route::Integral;
    let integral = jacobi_history(&cfg, &u0, &basis, &times)?;
    for (k, t) in times.iter().enumerate() {
        let (a, b) = (&shooting.phi[k], &integral.phi[k]);
        println!("t = {t}: |Phi| = {:.4}, relative difference {:.3}%", a.norm(), 100.0 * (a - b).norm() / a.norm());
    }
    Ok(())
}
