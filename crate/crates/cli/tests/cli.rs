use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qforge(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qforge"))
        .env_remove("QFORGE_THREADS")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn f(v: &Value, path: &str) -> f64 {
    v.pointer(path).and_then(Value::as_f64).unwrap_or_else(|| panic!("missing {path} in {v}"))
}

#[test]
fn spectrum_reproduces_reference_design() {
    let dir = tempfile::tempdir().unwrap();
    let doc = stdout_json(&qforge(dir.path(), &["--json", "spectrum"]));
    assert!((f(&doc, "/result/numeric/f01_GHz") - 4.48).abs() < 0.05);
    assert!((f(&doc, "/result/impedance_ohm") - 315.0).abs() < 5.0);
    assert!(f(&doc, "/result/variational/alpha_GHz") > 0.0);

    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let header = csv.lines().find(|l| l.starts_with("level")).unwrap();
    assert_eq!(header, "level,energy_numeric_GHz,energy_variational_GHz");
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn spectrum_without_junction_is_harmonic() {
    let dir = tempfile::tempdir().unwrap();
    let doc = stdout_json(&qforge(dir.path(), &["--json", "spectrum", "--ej", "0"]));
    let f01 = f(&doc, "/result/numeric/f01_GHz");
    let exact = (8.0f64 * 25.2 * 0.297).sqrt();
    assert!((f01 - exact).abs() / exact < 1e-5, "{f01} vs {exact}");
    assert!(f(&doc, "/result/numeric/alpha_GHz").abs() < 1e-4);
}

#[test]
fn invalid_parameters_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = qforge(dir.path(), &["spectrum", "--ec", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qforge(dir.path(), &["fidelity", "--q-diel", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qforge(dir.path(), &["compare", "--qubit", "squid"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_files_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"schema_version": 7}"#).unwrap();
    let o = qforge(dir.path(), &["--config", cfg.to_str().unwrap(), "spectrum"]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(&cfg, r#"{"schema_version": 1, "circuit": {"ej": 3}}"#).unwrap();
    let o = qforge(dir.path(), &["--config", cfg.to_str().unwrap(), "spectrum"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_config_and_config_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1, "circuit": {"e_j": 10.0, "e_l": 30.0, "e_c": 0.3}, "noise": {"q_diel": 2e6}}"#,
    )
    .unwrap();
    let o = qforge(dir.path(), &["--config", cfg.to_str().unwrap(), "fidelity", "--ej", "12"]);
    assert!(o.status.success());
    for name in ["fidelity.csv", "fidelity.json"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.contains("\"e_j\":12.0") || text.contains("\"e_j\": 12.0"), "{name}");
        assert!(text.contains("\"e_l\":30.0") || text.contains("\"e_l\": 30.0"), "{name}");
        assert!(text.contains("2000000.0"), "{name}");
    }
}

#[test]
fn csv_floats_carry_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qforge(dir.path(), &["coherence"]).status.success());
    let csv = fs::read_to_string(dir.path().join("coherence.csv")).unwrap();
    let row = csv.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap();
    let f01 = row.split(',').next().unwrap();
    let mantissa = f01.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{f01}");
}

#[test]
fn sweep_reruns_are_byte_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep", "--n-ratio", "3", "--n-z", "3", "--f01", "4"];
    assert!(qforge(a.path(), &[&["--threads", "1"][..], &args].concat()).status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_qforge"))
        .env("QFORGE_THREADS", "3")
        .arg("--out")
        .arg(b.path())
        .args(args)
        .output()
        .unwrap();
    assert!(o.status.success());
    let csv = |d: &Path| fs::read_to_string(d.join("sweep.csv")).unwrap();
    let body = |s: String| s.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_eq!(body(csv(a.path())), body(csv(b.path())));
    assert_eq!(csv(b.path()).matches("\"threads\":3").count(), 1);
}

#[test]
fn zero_threads_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = qforge(dir.path(), &["--threads", "0", "spectrum"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn transmon_offset_charge_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let run = |ng: &str| {
        let o = qforge(
            dir.path(),
            &["--json", "compare", "--qubit", "transmon", "--ng", ng, "--flux-points", "3"],
        );
        let doc = stdout_json(&o);
        assert_eq!(f(&doc, "/result/qubits/0/n_g"), ng.parse::<f64>().unwrap());
        fs::read_to_string(dir.path().join("compare_flux.csv")).unwrap()
    };
    let first_f01 = |csv: String| -> f64 {
        let row = csv.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap().to_string();
        row.split(',').nth(2).unwrap().parse().unwrap()
    };
    let f0 = first_f01(run("0"));
    let f_half = first_f01(run("0.5"));
    assert!((f0 - 4.47).abs() < 0.05);
    // E_J/E_C ~ 50 leaves a small but resolvable charge dispersion
    assert!(f0 != f_half && (f0 - f_half).abs() < 1e-3);
}

#[test]
fn validate_reports_json_and_catches_mutation() {
    let dir = tempfile::tempdir().unwrap();
    let doc = stdout_json(&qforge(dir.path(), &["--json", "validate", "--only", "1,12"]));
    assert_eq!(doc["passed"], Value::Bool(true));
    assert_eq!(doc["criteria"].as_array().unwrap().len(), 2);

    let o = qforge(dir.path(), &["validate", "--only", "1", "--r-k", "30000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("criterion  1 FAIL"));

    let o = qforge(dir.path(), &["validate", "--only", "13"]);
    assert_eq!(o.status.code(), Some(2));
}
