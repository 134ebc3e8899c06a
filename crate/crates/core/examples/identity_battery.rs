//! Runs the discrete identity battery and prints each row.

fn main() -> axiflow::error::Result<()> {
    let report = axiflow::check::run_all()?;
    for r in &report.rows {
        let defects: Vec<String> = r.defects.iter().map(|d| format!("{d:.2e}")).collect();
        let order = r.order.map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into());
        println!("{} {:<32} {:<20} [{}] order {order}", if r.pass { "ok  " } else { "FAIL" }, r.identity, r.geometry, defects.join(", "));
    }
    println!("{}", if report.pass() { "all identities hold" } else { "some identities failed" });
    Ok(())
}
