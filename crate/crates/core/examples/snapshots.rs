//! Runs the CLI simulate pipeline into a temporary directory and reads the
//! diagnostics and field snapshots back.

use axiflow::app::run_simulate;
use axiflow::config::RunConfig;
use axiflow::io::Snapshot;

fn main() -> axiflow::error::Result<()> {
    let out = std::env::temp_dir().join("axiflow-snapshots-example");
    let cfg = RunConfig::load(
        None,
        &["preset=gaussian-vortex".into(), "amplitude=0.05".into(), "swirl=0.5".into(), "nr=32".into(), "npsi=32".into(), "snapshots=4".into()],
    )?;
    run_simulate(&cfg, &out)?;
    let csv = std::fs::read_to_string(out.join("diagnostics.csv"))?;
    println!("{} diagnostics rows in {}", csv.lines().count() - 1, out.display());
    for k in 0..=4 {
        let s = Snapshot::read(&out.join(format!("snapshots/sigma_{k:04}.bin")))?;
        let peak = s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("snapshot {k}: {} x {} nodes, max |sigma| = {peak:.6}", s.nr, s.npsi);
    }
    Ok(())
}
