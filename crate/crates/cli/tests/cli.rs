use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_l2hodge"))
}

fn cookbook(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cookbook").join(format!("{name}.toml"))
}

fn run_scenario(config: &Path, out: &Path, extra: &[&str]) -> std::process::Output {
    bin().arg("scenario").arg("run").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn csv(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn passing_scenario_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(&cookbook("hardy_3_1"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("hardy_3_1.report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["pass"], true);
    assert_eq!(report["seed"], 7);
    for c in report["checks"].as_array().unwrap() {
        for key in ["name", "expected", "actual", "tol", "pass"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
    }
    assert_eq!(report["data_refs"][0], "hardy_3_1.summary.csv");
}

#[test]
fn failing_check_exits_one_and_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    std::fs::write(&cfg, "name = \"strict\"\nkind = \"cutoff\"\n[params]\nn_values = [4.0]\ntolerance = 1e-9\n").unwrap();
    let out = run_scenario(&cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let report = std::fs::read_to_string(dir.path().join("strict.report.json")).unwrap();
    assert!(report.contains("\"pass\": false"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("noseed", "name = \"noseed\"\nkind = \"warped_hardy\"\n[params]\nn = 3\nk = 1\nlength = 10.0\ndr = 0.05\nsamples = 5\n"),
        ("range", "name = \"range\"\nkind = \"warped_hardy\"\nseed = 1\n[params]\nn = 3\nk = 1\nlength = 10.0\ndr = 0.5\nsamples = 5\n"),
        ("unknown", "name = \"unknown\"\nkind = \"nope\"\n"),
        ("field", "name = \"field\"\nkind = \"cutoff\"\n[params]\nn_values = [4.0]\nbogus = 1\n"),
    ];
    for (name, text) in cases {
        let cfg = dir.path().join(format!("{name}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let out = run_scenario(&cfg, dir.path(), &[]);
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
    let missing = run_scenario(&dir.path().join("absent.toml"), dir.path(), &[]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical_and_seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(run_scenario(&cookbook("gap_3_0"), d, &[]).status.success());
    }
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read(&a, "gap_3_0.report.json"), read(&b, "gap_3_0.report.json"));
    assert_eq!(read(&a, "gap_3_0.summary.csv"), read(&b, "gap_3_0.summary.csv"));
    let c = dir.path().join("c");
    assert!(run_scenario(&cookbook("gap_3_0"), &c, &["--seed", "99"]).status.success());
    let report = String::from_utf8(read(&c, "gap_3_0.report.json")).unwrap();
    assert!(report.contains("\"seed\": 99"));
}

#[test]
fn lambda0_and_capacity_series_are_monotone() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_scenario(&cookbook("lambda0_sigma"), dir.path(), &["--format", "csv"]).status.success());
    let rows = csv(&dir.path().join("lambda0_sigma.lambda0.csv"));
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
    assert!(!dir.path().join("lambda0_sigma.report.json").exists());
    assert!(run_scenario(&cookbook("ends_radial3d"), dir.path(), &[]).status.success());
    let rows = csv(&dir.path().join("ends_radial3d.capacity.csv"));
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
}

#[test]
fn generated_mesh_round_trips_through_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let gen = bin().args(["gen", "closed", "--genus", "2", "--refinement", "2", "--out"]).arg(dir.path()).output().unwrap();
    assert!(gen.status.success());
    let mesh = dir.path().join("closed.off");
    let betti = bin().arg("betti").arg(&mesh).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&betti.stdout).unwrap();
    assert_eq!(v["betti"], serde_json::json!([1, 4, 1]));
    let hodge = bin().arg("hodge").arg(&mesh).arg("--metric").arg(dir.path().join("closed.metric.json")).output().unwrap();
    assert!(hodge.status.success(), "{}", String::from_utf8_lossy(&hodge.stderr));
    let v: serde_json::Value = serde_json::from_slice(&hodge.stdout).unwrap();
    let dims: Vec<u64> = v["harmonic"].as_array().unwrap().iter().map(|r| r["dim"].as_u64().unwrap()).collect();
    assert_eq!(dims, [1, 4, 1]);
    let bad = bin().arg("betti").arg(dir.path().join("missing.off")).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
