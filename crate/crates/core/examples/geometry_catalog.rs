//! Lists the geometry catalog with the Killing-field data at a sample radius.

use axiflow::geometry::{GeometryKind, Profile};

fn main() -> axiflow::error::Result<()> {
    let r = 0.5;
    println!("{:<28} {:>10} {:>10}", "geometry", "|K|^2", "phi");
    let kinds = Profile::ALL
        .into_iter()
        .map(GeometryKind::doubly_warped)
        .chain([-1, 0, 1].into_iter().map(|k| GeometryKind::fibration(k).unwrap()));
    for g in kinds {
        let k = g.killing_data(r)?;
        println!("{:<28} {:>10.5} {:>10.5}", g.to_string(), k.k_norm_sq, k.phi);
    }
    Ok(())
}
