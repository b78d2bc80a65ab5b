use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ghostfringe::gate::{dn_corr_gate, GateAngles};
use ghostfringe::pattern::Mode;
use ghostfringe::setup::{SetupBasic, SetupGate};
use tempfile::TempDir;

const BASIC: &str = "\
[setup]
a = 0.5e-3
lambda = 500e-9
z = 1.0
f = 1.0
x1 = -5e-3
x2 = 5e-3
";

const SMALL_MC: &str =
    "[scan]\nstart = -5e-5\nstop = 5e-5\nstep = 1e-5\n[mc]\nn_realizations = 600\n";

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("experiment.toml");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_ghostfringe"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("GHOSTFRINGE_THREADS")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn meta(csv: &str, key: &str) -> Option<String> {
    csv.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
}

#[test]
fn minimal_config_runs_with_defaults() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), BASIC, &["scan"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/scan_exact.csv")).unwrap();
    assert_eq!(meta(&csv, "setup.x1p").as_deref(), Some("-0.005"));
    assert_eq!(meta(&csv, "setup.x2p").as_deref(), Some("0.005"));
    assert_eq!(meta(&csv, "scan.axis").as_deref(), Some("x_C"));
    assert_eq!(data_rows(&csv).len(), 41);
    assert!(!dir.path().join("out/scan_mc.csv").exists());
}

#[test]
fn negative_distance_is_rejected_by_field_name() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &BASIC.replace("z = 1.0", "z = -1.0"), &["scan"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("setup.z") && err.contains(":4:"), "{err}");
}

#[test]
fn misspelt_key_gets_a_suggestion() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &format!("{BASIC}[scan]\ndetecter_x = 0.0\n"),
        &["scan"],
    );
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("`detecter_x`") && err.contains("did you mean `detector_x`"),
        "{err}"
    );
}

#[test]
fn too_few_realizations_is_an_error() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &format!("{BASIC}[mc]\nn_realizations = 50\n"),
        &["scan", "--mode", "mc"],
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn mode_all_writes_every_pattern_and_the_comparison() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &format!("mode = \"all\"\n{BASIC}{SMALL_MC}"),
        &["scan"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["scan_exact.csv", "scan_asymptotic.csv", "scan_mc.csv"] {
        let csv = fs::read_to_string(dir.path().join("out").join(name)).unwrap();
        assert_eq!(data_rows(&csv).len(), 11, "{name}");
    }
    let mc = fs::read_to_string(dir.path().join("out/scan_mc.csv")).unwrap();
    assert!(mc.contains("x_C,x_T,value,stderr\n"));
    let cmp = fs::read_to_string(dir.path().join("out/comparison.csv")).unwrap();
    let rows = data_rows(&cmp);
    assert_eq!(rows.len(), 3);
    assert_eq!((rows[1][0].as_str(), rows[1][1].as_str()), ("exact", "mc"));
    assert!(rows[1][4].parse::<f64>().unwrap() < 5.0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("timing mc:"));
}

#[test]
fn truth_table_is_the_cnot_permutation() {
    let dir = TempDir::new().unwrap();
    let config = BASIC.replace("[setup]", "[setup]\nkind = \"gate\"");
    let o = run(dir.path(), &config, &["truth-table", "--strict-conditions"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/truth_table_exact.csv")).unwrap();
    assert!(csv.contains("input,HH,HV,VH,VV\n"));
    let rows = data_rows(&csv);
    let expect = [("HH", 1), ("HV", 2), ("VH", 4), ("VV", 3)];
    for (row, (label, one)) in rows.iter().zip(expect) {
        assert_eq!(row[0], label);
        for (c, v) in row.iter().enumerate().skip(1) {
            let v: f64 = v.parse().unwrap();
            let want = if c == one { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-9, "{label} column {c}: {v}");
        }
    }
}

#[test]
fn truth_table_rejects_unpolarized_setups() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), BASIC, &["truth-table"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gate"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let config = format!("mode = \"all\"\n{BASIC}{SMALL_MC}");
    let read = |d: &TempDir| {
        [
            "scan_exact.csv",
            "scan_asymptotic.csv",
            "scan_mc.csv",
            "comparison.csv",
        ]
        .map(|n| fs::read(d.path().join("out").join(n)).unwrap())
    };
    assert!(run(dir.path(), &config, &["scan"]).status.success());
    let first = read(&dir);
    assert!(run(dir.path(), &config, &["scan"]).status.success());
    assert_eq!(first, read(&dir));

    let other = TempDir::new().unwrap();
    assert!(run(other.path(), &config, &["scan", "--seed", "2"])
        .status
        .success());
    assert_ne!(first[2], read(&other)[2]);
}

#[test]
fn csv_values_round_trip_to_fifteen_digits() {
    let dir = TempDir::new().unwrap();
    let config = BASIC.replace("[setup]", "[setup]\nkind = \"gate\"")
        + "[angles]\nphi_c = 0.3\nphi_t = 1.1\ntheta_c = 0.7\ntheta_t = 2.0\n[scan]\naxis = \"diagonal\"\nstart = -1e-4\nstop = 1e-4\nstep = 7e-6\n";
    let o = run(dir.path(), &config, &["scan"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/scan_exact.csv")).unwrap();
    let setup: SetupGate = SetupBasic::new(0.5e-3, 500e-9, 1.0, 1.0, -5e-3, 5e-3, -5e-3, 5e-3)
        .unwrap()
        .into();
    let angles = GateAngles::new(0.3, 1.1, 0.7, 2.0);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 29);
    let sig15 = |v: f64| format!("{v:.14e}");
    for row in rows {
        let x: f64 = row[0].parse().unwrap();
        assert_eq!(row[0], row[1]);
        let v: f64 = row[2].parse().unwrap();
        assert_eq!(
            sig15(v),
            sig15(dn_corr_gate(&setup, angles, x, x, Mode::Exact))
        );
    }
}

#[test]
fn strict_mode_exits_two_on_warnings() {
    let dir = TempDir::new().unwrap();
    let weak = BASIC.replace("x2 = 5e-3", "x2 = 5e-3\nx1p = -4.5e-3");
    let o = run(dir.path(), &weak, &["conditions"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning: |x1-x1'|/l_coh"));
    let o = run(dir.path(), &weak, &["conditions", "--strict-conditions"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), BASIC, &["conditions", "--strict-conditions"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn verify_reports_pass() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &format!("{BASIC}{SMALL_MC}"), &["verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS"));
}
