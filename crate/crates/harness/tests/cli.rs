use std::process::Command;

fn phototaxis() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_phototaxis"));
    c.env("RUST_LOG", "warn");
    c
}

#[test]
fn simulate_without_calibration_explains_what_to_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = phototaxis()
        .args(["--chi", "0.05", "--out"])
        .arg(dir.path())
        .arg("simulate")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("phototaxis calibrate"), "{stderr}");
    assert!(stderr.contains("calibration.csv"), "{stderr}");
}

#[test]
fn theory_with_explicit_inputs_writes_one_row_per_chi() {
    let dir = tempfile::tempdir().unwrap();
    let out = phototaxis()
        .args(["--chi", "0.025", "--chi", "0.1", "--out"])
        .arg(dir.path())
        .args(["theory", "--d-f", "0.045", "--lambda0", "1.36"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("theory.csv")).unwrap();
    let chis: Vec<f64> = r.records().map(|rec| rec.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(chis, vec![0.025, 0.1]);
    for name in ["cumulants.csv", "radial_theory_0.025.csv", "manifest_theory.txt"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn theory_without_inputs_names_the_missing_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = phototaxis().arg("--out").arg(dir.path()).args(["theory", "--lambda0", "1.0"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("D_f"));
}

#[test]
fn unknown_config_keys_fail_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[run]\nparticles = 10\n").unwrap();
    let out = phototaxis().arg("--config").arg(&cfg).arg("--out").arg(dir.path().join("o")).arg("calibrate").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("particles"));
    assert!(!dir.path().join("o").exists());
}
