//! Tail norms of the coadjoint operator of a jet restricted to high modes.

use axiflow::config::RunConfig;
use axiflow::linearized::scan::tail_norms;
use axiflow::linearized::{BasisSpec, PerturbationBasis};

fn main() -> axiflow::error::Result<()> {
    let cfg = RunConfig::load(None, &["preset=perturbed-jet".to_string()])?;
    let (grid, preset) = cfg.jacobi_grid()?;
    let u0 = preset.build(&grid, cfg.params())?;
    let basis = PerturbationBasis::up_to_frequency(&grid, 20, BasisSpec::STREAM_COS)?;
    println!("{} modes", basis.len());
    for (threshold, norm) in tail_norms(&u0, &basis, &[2, 4, 8, 12, 16])? {
        println!("modes above {threshold:>2}: operator norm {norm:.4e}");
    }
    Ok(())
}
