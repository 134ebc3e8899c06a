use std::path::Path;
use std::process::Command;

use axiflow::app;
use axiflow::config::RunConfig;
use axiflow::io::Snapshot;
use axiflow::simulate::relative_drift;

fn config(overrides: &[&str]) -> RunConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    RunConfig::load(None, &o).unwrap()
}

fn axiflow(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_axiflow"))
        .args(args)
        .arg("--quiet")
        .arg("--out")
        .arg(out)
        .status()
        .unwrap()
        .code()
        .unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let k = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn zero_data_writes_zero_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&["nr=12", "npsi=12", "horizon=0.2", "dt=0.05"]);
    app::run_simulate(&cfg, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    for name in ["energy", "casimir_1", "casimir_2", "sup_sigma", "sup_vorticity", "swirl_residual"] {
        assert!(column(&csv, name).iter().all(|&v| v == 0.0), "{name}");
    }
}

#[test]
fn radial_steady_swirl_residual_stays_tiny() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&["preset=radial-steady", "swirl=0.8", "nr=24", "npsi=24", "cadence=10"]);
    app::run_simulate(&cfg, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let res = column(&csv, "swirl_residual");
    assert!(res.iter().all(|&r| r <= 1e-10), "{res:?}");
}

#[test]
fn hyperbolic_gaussian_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&[
        "preset=gaussian-vortex",
        "amplitude=0.05",
        "swirl=0.2",
        "geometry=Fibration",
        "curvature=-1",
        "r_range=[0.1,1.1]",
        "nr=32",
        "npsi=32",
    ]);
    let out = app::run_simulate(&cfg, dir.path()).unwrap();
    let drift = relative_drift(&out.rows, |d| d.energy);
    assert!(drift <= 1e-6, "{drift:e}");
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--set", "preset=gaussian-vortex", "--set", "swirl=0.3", "--set", "nr=16", "--set", "npsi=16"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(axiflow(&args, &a), 0);
    assert_eq!(axiflow(&args, &b), 0);
    let read = |p: &Path| std::fs::read(p.join("diagnostics.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn snapshots_follow_the_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let code = axiflow(&["simulate", "--snapshots", "3", "--set", "preset=radial-steady", "--set", "nr=10", "--set", "npsi=8"], dir.path());
    assert_eq!(code, 0);
    let shots = dir.path().join("snapshots");
    for k in 0..4 {
        let f = Snapshot::read(&shots.join(format!("f_{k:04}.bin"))).unwrap();
        assert_eq!((f.nr, f.npsi, f.values.len()), (10, 8, 80));
        assert_eq!(f.r_range, [0.0, 1.0]);
        assert!(shots.join(format!("sigma_{k:04}.bin")).exists());
    }
    assert!(!shots.join("f_0004.bin").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(axiflow(&["simulate", "--set", "nrr=32"], dir.path()), 2);
    assert_eq!(axiflow(&["simulate", "--set", "preset=vortex"], dir.path()), 2);
    assert_eq!(axiflow(&["simulate", "--set", "nr=-4"], dir.path()), 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"nr\": 16,\n  \"horizn\": 1\n}\n").unwrap();
    assert_eq!(axiflow(&["simulate", "--config", bad.to_str().unwrap()], dir.path()), 2);
    let err = RunConfig::load(Some(&bad), &[]).unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn unwritable_output_is_a_run_failure() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "").unwrap();
    assert_eq!(axiflow(&["simulate", "--set", "nr=8", "--set", "npsi=8"], &file.join("sub")), 3);
}

#[test]
fn jacobi_presets_split_on_conjugate_points() {
    let dir = tempfile::tempdir().unwrap();
    let mut t = config(&["preset=translation-profile"]);
    t.jacobi.basis_size = 4;
    let ts = app::run_jacobi(&t, &dir.path().join("t")).unwrap();
    assert!(ts.conjugate_times.is_empty(), "{:?}", ts.conjugate_times);
    let mut r = config(&["preset=rigid-rotation"]);
    r.jacobi.basis_size = 4;
    r.jacobi.compare_basis_size = 8;
    let rs = app::run_jacobi(&r, &dir.path().join("r")).unwrap();
    assert!(!rs.conjugate_times.is_empty());
    assert!(rs.comparison.unwrap().stable);
    let report = std::fs::read_to_string(dir.path().join("r/report.json")).unwrap();
    assert!(report.contains("\"conjugate_times\""));
}

#[test]
fn orbit_presets_give_the_expected_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    for (preset, member) in [("identical", true), ("sheared-datum", true), ("area-mismatched", false)] {
        let v = app::run_orbit(&config(&[&format!("preset={preset}")]), dir.path()).unwrap();
        assert_eq!(v.member, member, "{preset}");
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("verdict.json")).unwrap()).unwrap();
        assert_eq!(json["member"], member);
        assert!(json["area"]["residuals"].is_array() && json["tolerances"]["area"].is_number());
    }
}

#[test]
fn check_subcommand_passes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(axiflow(&["check"], dir.path()), 0);
    assert!(dir.path().join("check.json").exists());
}
