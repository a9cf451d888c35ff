use std::path::Path;
use std::process::{Command, Output};

fn rydant(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydant"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn rydant")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_for_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["eigen", "sweep", "spectrum", "cellfield", "compare"] {
        let o = rydant(dir.path(), &[cmd, "--help"]);
        assert!(o.status.success(), "{cmd}");
        assert!(stdout(&o).contains("Usage"));
    }
}

#[test]
fn eigen_reports_splitting() {
    let dir = tempfile::tempdir().unwrap();
    let o = rydant(
        dir.path(),
        &["eigen", "--rabi-mhz", "4", "--detuning-mhz", "3", "--phi", "0"],
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("delta_at_mhz: 5.00000000e0"));

    let o = rydant(
        dir.path(),
        &["eigen", "--phi", "1.5708", "--chi", "0.7854", "--csv", "e.csv"],
    );
    assert!(stdout(&o).contains("branch_splittings_mhz"));
    let csv = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert!(csv.starts_with("index,closed_form_mhz,numeric_mhz\n"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn eigen_without_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = rydant(
        dir.path(),
        &["eigen", "--rabi-mhz", "0", "--detuning-mhz", "2", "--csv", "e.csv"],
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(v == 0.0 || (v + 2.0).abs() < 1e-12, "{v}");
    }
}

#[test]
fn usage_and_schema_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(rydant(dir.path(), &["eigen", "--chi", "abc"]).status.code(), Some(2));
    assert_eq!(rydant(dir.path(), &["nonsense"]).status.code(), Some(2));

    std::fs::write(
        dir.path().join("noplane.json"),
        r#"{"schema_version": 1, "sweep": {"readout": "eigen"}}"#,
    )
    .unwrap();
    let o = rydant(dir.path(), &["sweep", "-c", "noplane.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("plane"));

    std::fs::write(
        dir.path().join("typo.json"),
        r#"{"schema_version": 1, "drive": {"rabi": 2}}"#,
    )
    .unwrap();
    assert_eq!(rydant(dir.path(), &["eigen", "-c", "typo.json"]).status.code(), Some(2));
    std::fs::write(dir.path().join("old.json"), r#"{"schema_version": 7}"#).unwrap();
    assert_eq!(rydant(dir.path(), &["eigen", "-c", "old.json"]).status.code(), Some(2));
}

#[test]
fn contract_violations_exit_1_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"schema_version": 1, "sweep": {"plane": "XY", "cell": true}, "cell": {"wall_thickness_mm": 0}}"#,
    )
    .unwrap();
    let o = rydant(dir.path(), &["sweep", "-c", "bad.json", "--out", "out"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());

    let o = rydant(dir.path(), &["eigen", "--rabi-mhz", "-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ideal_sweep_and_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let o = rydant(dir.path(), &["sweep", "--plane", "XZ", "--seed", "4", "--out", "a"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("XZ: deviation 0.00 dB"));
    let csv = std::fs::read_to_string(dir.path().join("a/pattern.csv")).unwrap();
    assert!(csv.starts_with("plane,angle_deg,gain_db\n"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/sweep.json")).unwrap()).unwrap();
    assert_eq!(report["metadata"]["seed"], 4);

    let o = rydant(
        dir.path(),
        &["compare", "a/sweep.json", "--dipole-reference", "--out", "c"],
    );
    assert!(o.status.success());
    let cmp: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c/compare.json")).unwrap()).unwrap();
    assert!(cmp["comparisons"][0]["improvement_db"].as_f64().unwrap() > 20.0);

    let o = rydant(dir.path(), &["compare", "a/sweep.json", "a/sweep.json", "--out", "c"]);
    assert!(o.status.success());
    let cmp: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c/compare.json")).unwrap()).unwrap();
    assert_eq!(cmp["comparisons"][0]["improvement_db"].as_f64(), Some(0.0));
}

#[test]
fn noisy_cell_sweep_records_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let o = rydant(
        dir.path(),
        &[
            "sweep",
            "--preset",
            "thz-33s",
            "--plane",
            "XY",
            "--cell",
            "--noise-sigma-db",
            "0.1",
            "--out",
            "o",
        ],
    );
    assert!(o.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/sweep.json")).unwrap()).unwrap();
    assert!(report["patterns"][0]["deviation_db"].as_f64().unwrap() > 0.0);
    assert_eq!(report["patterns"][0]["metadata"]["cell"], true);
}

#[test]
fn spectrum_readout() {
    let dir = tempfile::tempdir().unwrap();
    let o = rydant(dir.path(), &["spectrum", "--rabi-mhz", "0", "--out", "off"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("no splitting"));

    let o = rydant(
        dir.path(),
        &["spectrum", "--preset", "thz-33s", "--rabi-mhz", "10", "--out", "on"],
    );
    assert!(o.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("on/spectrum.json")).unwrap()).unwrap();
    let at = report["delta_at_mhz"].as_f64().unwrap();
    assert!((at - 10.0).abs() < 0.5, "{at}");
    assert!(report["field"]["amplitude"].as_f64().is_some());
    assert_eq!(report["metadata"]["mu_placeholder"], true);
    let csv = std::fs::read_to_string(dir.path().join("on/spectrum.csv")).unwrap();
    assert!(csv.starts_with("detuning_hz,transmission\n"));
}

#[test]
fn cellfield_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let o = rydant(dir.path(), &["cellfield", "--preset", "thz-33s", "--out", "c"]);
    assert!(o.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c/cellfield.json")).unwrap()).unwrap();
    let spacing = report["node_spacing_m"].as_f64().unwrap();
    assert!((spacing - 1.1566e-3).abs() < 1e-6, "{spacing}");
    assert_eq!(report["sweep"].as_array().unwrap().len(), 10);
    assert!(report["deviation_db"].as_f64().unwrap() > 0.0);

    let o = rydant(
        dir.path(),
        &["cellfield", "--no-walls", "--sweep", "0:15:75", "--out", "flat"],
    );
    assert!(o.status.success());
    let profile = std::fs::read_to_string(dir.path().join("flat/profile.csv")).unwrap();
    assert!(profile.starts_with("position_m,amplitude_rel\n"));
    for line in profile.lines().skip(1) {
        let a: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((a - 1.0).abs() < 1e-8);
    }
    let sweep = std::fs::read_to_string(dir.path().join("flat/cellfield_sweep.csv")).unwrap();
    assert!(sweep.starts_with("angle_deg,path_avg_rel,gain_db\n"));
    assert_eq!(sweep.lines().count(), 7);
}
