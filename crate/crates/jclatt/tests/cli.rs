use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jclatt"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn validate_report(cfg: &Path) -> serde_json::Value {
    let out = bin().arg("validate").arg("--config").arg(cfg).output().unwrap();
    assert!(out.status.success());
    serde_json::from_slice(&out.stdout).unwrap()
}

fn failed_details(report: &serde_json::Value) -> Vec<String> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| format!("{}: {}", c["name"].as_str().unwrap(), c["detail"].as_str().unwrap()))
        .collect()
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig2e.json");
    for run in ["a", "b"] {
        let st = bin().arg("edge-spectrum").arg("--config").arg(&cfg).arg("--out").arg(tmp.path().join(run)).status().unwrap();
        assert!(st.success());
    }
    for f in ["spectrum.csv", "summary.json"] {
        let a = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn summary_carries_hash_and_version() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig2a.json");
    let st = bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(tmp.path()).status().unwrap();
    assert!(st.success());
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("summary.json")).unwrap()).unwrap();
    let raw = std::fs::read(&cfg).unwrap();
    assert_eq!(s["config_sha256"], jclatt::runner::sha256_hex(&raw));
    assert_eq!(s["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(s["files"][0], "loci.csv");
}

#[test]
fn unknown_key_is_a_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"experiment": "loci", "big_m": 0, "colour": "red"}"#);
    let st = bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(tmp.path().join("o")).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let cfg = write(tmp.path(), "d.json", r#"{"experiment": "loci"}"#);
    let st = bin().arg("bands").arg("--config").arg(&cfg).arg("--out").arg(tmp.path().join("o")).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn paper_parameters_validate() {
    for name in ["fig1d.json", "fig4.json", "fig5.json", "fig6a.json", "synthesize_nodal.json"] {
        let r = validate_report(&configs().join(name));
        assert_eq!(r["passed"], true, "{name}: {:?}", failed_details(&r));
    }
}

#[test]
fn close_tones_fail_and_name_the_pair() {
    let tmp = tempfile::tempdir().unwrap();
    // 15 MHz apart with t0 = 3 MHz: 5·t0.
    let cfg = write(
        tmp.path(),
        "s.json",
        r#"{"experiment": "synthesize", "schedule": {"links": [[
            {"amplitude_mhz": 3, "frequency_mhz": 100, "phase": 0},
            {"amplitude_mhz": 3, "frequency_mhz": 115, "phase": 0}]]}}"#,
    );
    let r = validate_report(&cfg);
    assert_eq!(r["passed"], false);
    let f = failed_details(&r);
    assert_eq!(f.len(), 1);
    assert!(f[0].contains("tones 0 and 1"), "{f:?}");
}

#[test]
fn strong_coupling_fails_jc_check() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "r.json", r#"{"experiment": "rabi", "setup": {"g_a_mhz": 1800}}"#);
    let r = validate_report(&cfg);
    assert_eq!(r["passed"], false);
    let f = failed_details(&r);
    assert!(f.iter().any(|s| s.starts_with("JC regime A") && s.contains("0.3000")), "{f:?}");
}

#[test]
fn physics_failure_exit_code_and_force() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "e.json",
        r#"{"experiment": "edge-dynamics", "setup": {"n_cells": 2, "g_a_mhz": 1800},
            "k_z_values": [0.7], "t_final": 0.002, "integrator": {"dt": 2e-5, "convergence_check": false}}"#,
    );
    let st = bin().arg("edge").arg("--config").arg(&cfg).arg("--out").arg(tmp.path().join("o")).status().unwrap();
    assert_eq!(st.code(), Some(3));
    let st = bin().arg("edge").arg("--config").arg(&cfg).arg("--out").arg(tmp.path().join("o")).arg("--force").status().unwrap();
    assert_eq!(st.code(), Some(0));
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("o/summary.json")).unwrap()).unwrap();
    assert_eq!(s["forced"], true);
}

#[test]
fn oversized_step_is_a_numerical_abort() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "e.json",
        r#"{"experiment": "edge-dynamics", "setup": {"n_cells": 2}, "k_z_values": [0.7],
            "t_final": 0.05, "integrator": {"dt": 0.01}}"#,
    );
    let st = bin().arg("edge-dynamics").arg("--config").arg(&cfg).arg("--out").arg(tmp.path().join("o")).status().unwrap();
    assert_eq!(st.code(), Some(4));
}

#[test]
fn schedule_file_is_relative_to_config() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "sched.json", r#"{"links": [[{"amplitude_mhz": 3, "frequency_mhz": 100, "phase": 0.2}]]}"#);
    let cfg = write(tmp.path(), "s.json", r#"{"experiment": "synthesize", "schedule_file": "sched.json"}"#);
    let st = bin().arg("synthesize").arg("--config").arg(&cfg).arg("--out").arg(tmp.path().join("o")).status().unwrap();
    assert!(st.success());
    assert!(tmp.path().join("o/flux_drive.json").exists());
}
