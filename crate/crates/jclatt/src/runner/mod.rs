//! Config loading, validation and experiment orchestration behind the CLI.
//!
//! Every run writes CSV series plus `summary.json` into the output
//! directory. Summaries carry the SHA-256 of the config bytes and the tool
//! version and contain no timestamps, so identical configs give identical files.

mod config;
mod exec;

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{
    BandsParams, ChiralParams, CircuitFile, DiagramGrid, EdgeDynamicsParams, EdgeSpectrumParams, EdgeWavefunctionsParams,
    ExperimentConfig, ExperimentId, LociParams, NoiseFile, Params, PhasesParams, RabiParams, SweepParams, SynthesizeParams,
};

use crate::{Error, Result};

/// One pass/fail item of a validation report or run summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub experiment: ExperimentId,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: ExperimentId,
    pub config_sha256: String,
    pub seed: u64,
    pub forced: bool,
    pub validation: Vec<Check>,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub files: Vec<String>,
}

/// Schema and physics checks without running anything.
pub fn validate(cfg: &ExperimentConfig) -> ValidationReport {
    let checks = exec::validate(cfg);
    let passed = checks.iter().all(|c| c.pass);
    ValidationReport { experiment: cfg.experiment, checks, passed }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs a config and writes its artifacts into `out`.
///
/// Physics validation failures abort with [`Error::Physics`] unless `force`.
pub fn run(cfg: &ExperimentConfig, raw: &[u8], out: &Path, force: bool) -> Result<Summary> {
    let report = validate(cfg);
    if !report.passed && !force {
        let why: Vec<String> = report.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        return Err(Error::Physics(why.join("; ")));
    }
    std::fs::create_dir_all(out)?;
    let mut cfg = cfg.clone();
    if force {
        cfg.thresholds.g_over_omega_max = f64::INFINITY;
    }
    let mut sink = exec::Sink::new(out.to_path_buf());
    let (results, checks) = exec::execute(&cfg, &mut sink)?;
    let pass = checks.iter().all(|c| c.pass);
    let summary = Summary {
        tool: "jclatt",
        version: env!("CARGO_PKG_VERSION"),
        experiment: cfg.experiment,
        config_sha256: sha256_hex(raw),
        seed: cfg.seed,
        forced: force,
        validation: report.checks,
        results,
        checks,
        pass,
        files: sink.files,
    };
    let path = out.join("summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}

/// Output directory: explicit override, else the config's, else `out/<experiment>`.
pub fn output_dir(cfg: &ExperimentConfig, over: Option<&Path>) -> PathBuf {
    match (over, &cfg.output_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => p.clone(),
        (None, None) => PathBuf::from("out").join(cfg.experiment.as_str()),
    }
}
