use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::circuit::{Resonator, SquidCircuit};
use crate::defaults::{self, Thresholds};
use crate::dynamics::{EdgeSide, ExperimentKind, IntegratorConfig, NodalSetup, NoiseSpec, RabiSetup, ToneChoice};
use crate::edge::DecayLaw;
use crate::model::io::ScheduleFile;
use crate::model::Spin;
use crate::units::{khz, mhz};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Bands,
    Phases,
    Loci,
    EdgeSpectrum,
    EdgeWavefunctions,
    Rabi,
    EdgeDynamics,
    Chiral,
    Sweep,
    Synthesize,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::Bands,
        ExperimentId::Phases,
        ExperimentId::Loci,
        ExperimentId::EdgeSpectrum,
        ExperimentId::EdgeWavefunctions,
        ExperimentId::Rabi,
        ExperimentId::EdgeDynamics,
        ExperimentId::Chiral,
        ExperimentId::Sweep,
        ExperimentId::Synthesize,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::Bands => "bands",
            ExperimentId::Phases => "phases",
            ExperimentId::Loci => "loci",
            ExperimentId::EdgeSpectrum => "edge-spectrum",
            ExperimentId::EdgeWavefunctions => "edge-wavefunctions",
            ExperimentId::Rabi => "rabi",
            ExperimentId::EdgeDynamics => "edge-dynamics",
            ExperimentId::Chiral => "chiral",
            ExperimentId::Sweep => "sweep",
            ExperimentId::Synthesize => "synthesize",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.as_str() == s)
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

// Effective-model experiments work in units of t'0: M, d and energies are
// all multiples of it. Momenta are in units of π.

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsParams {
    #[serde(default)]
    pub big_m: f64,
    #[serde(default = "one")]
    pub d: f64,
    /// k_x planes to sample.
    #[serde(default = "default_kx")]
    pub k_x: Vec<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_kx() -> Vec<f64> {
    vec![-0.5, 0.5]
}

fn default_resolution() -> usize {
    101
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LociParams {
    #[serde(default)]
    pub big_m: f64,
    #[serde(default = "one")]
    pub d: f64,
    #[serde(default)]
    pub resolution: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramGrid {
    pub m_min: f64,
    pub m_max: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub n_m: usize,
    pub n_d: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasesParams {
    #[serde(default)]
    pub diagram: Option<DiagramGrid>,
    /// (M, d) points that get a full winding map.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub map_resolution: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpectrumParams {
    #[serde(default = "twenty")]
    pub n_cells: usize,
    #[serde(default)]
    pub big_m: f64,
    #[serde(default = "one")]
    pub d: f64,
    #[serde(default)]
    pub k_y: f64,
    #[serde(default = "minus_one")]
    pub k_z_min: f64,
    #[serde(default = "one")]
    pub k_z_max: f64,
    #[serde(default = "default_nkz")]
    pub n_k_z: usize,
}

fn twenty() -> usize {
    20
}

fn minus_one() -> f64 {
    -1.0
}

fn default_nkz() -> usize {
    201
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeWavefunctionsParams {
    #[serde(default = "twenty")]
    pub n_cells: usize,
    #[serde(default)]
    pub big_m: f64,
    #[serde(default = "one")]
    pub d: f64,
    #[serde(default)]
    pub k_y: f64,
    #[serde(default = "default_kz_nontrivial")]
    pub k_z: f64,
    #[serde(default)]
    pub law: DecayLaw,
}

fn default_kz_nontrivial() -> f64 {
    0.7
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiParams {
    #[serde(default)]
    pub setup: RabiSetup,
    /// Defaults to all four A→B transitions.
    #[serde(default = "all_transitions")]
    pub transitions: Vec<ToneChoice>,
    #[serde(default = "rabi_integrator")]
    pub integrator: IntegratorConfig,
}

fn all_transitions() -> Vec<ToneChoice> {
    let mut v = Vec::new();
    for from in Spin::ALL {
        for to in Spin::ALL {
            v.push(ToneChoice { from, to });
        }
    }
    v
}

/// The 920 MHz tone needs dt·ω ≤ 0.5.
pub fn rabi_integrator() -> IntegratorConfig {
    IntegratorConfig { dt: 8e-5, ..Default::default() }
}

/// Noise block of a config; rates in kHz (γ/2π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseFile {
    pub gamma_khz: f64,
    pub photon_loss: bool,
    pub qubit_decay: bool,
    pub dephasing: bool,
}

impl Default for NoiseFile {
    fn default() -> Self {
        NoiseFile { gamma_khz: 0.0, photon_loss: true, qubit_decay: true, dephasing: true }
    }
}

impl NoiseFile {
    pub fn to_spec(&self) -> Result<NoiseSpec> {
        let n = NoiseSpec {
            gamma: khz(self.gamma_khz),
            photon_loss: self.photon_loss,
            qubit_decay: self.qubit_decay,
            dephasing: self.dephasing,
        };
        n.validate()?;
        Ok(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDynamicsParams {
    #[serde(default)]
    pub setup: NodalSetup,
    /// One run per value; overrides `setup.k_z`.
    #[serde(default = "both_kz")]
    pub k_z_values: Vec<f64>,
    #[serde(default = "left")]
    pub side: EdgeSide,
    #[serde(default = "edge_t")]
    pub t_final: f64,
    #[serde(default)]
    pub noise: NoiseFile,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

fn both_kz() -> Vec<f64> {
    vec![0.3, 0.7]
}

fn left() -> EdgeSide {
    EdgeSide::Left
}

fn edge_t() -> f64 {
    defaults::EDGE_DURATION
}

fn chiral_t() -> f64 {
    defaults::CHIRAL_DURATION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiralParams {
    #[serde(default)]
    pub setup: NodalSetup,
    #[serde(default = "both_kz")]
    pub k_z_values: Vec<f64>,
    #[serde(default = "chiral_t")]
    pub t_final: f64,
    #[serde(default)]
    pub noise: NoiseFile,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub setup: NodalSetup,
    pub n_cells: Vec<usize>,
    #[serde(default = "both_kz")]
    pub k_z_values: Vec<f64>,
    pub gamma_khz: Vec<f64>,
    /// Defaults to 0.5 μs (edge) or 2 μs (chiral).
    #[serde(default)]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

impl SweepParams {
    pub fn duration(&self) -> f64 {
        self.t_final.unwrap_or(match self.kind {
            ExperimentKind::Edge => defaults::EDGE_DURATION,
            ExperimentKind::Chiral => defaults::CHIRAL_DURATION,
        })
    }
}

/// Coupler circuit in lab units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitFile {
    pub critical_current_ua: f64,
    pub resonator_mhz: [f64; 2],
    pub resonator_inductance_nh: [f64; 2],
    pub n_dc: u32,
}

impl Default for CircuitFile {
    fn default() -> Self {
        CircuitFile { critical_current_ua: 1.6, resonator_mhz: [6000.0, 6000.0], resonator_inductance_nh: [2.0, 2.0], n_dc: 1 }
    }
}

impl CircuitFile {
    pub fn to_circuit(&self) -> Result<SquidCircuit> {
        let ic = self.critical_current_ua * 1e-6;
        let r = |k: usize| Resonator::for_frequency(mhz(self.resonator_mhz[k]), self.resonator_inductance_nh[k] * 1e-9);
        let c = SquidCircuit {
            critical_current: ic,
            series_inductance: crate::circuit::PHI0 / (2.0 * ic),
            n_dc: self.n_dc,
            left: r(0)?,
            right: r(1)?,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeParams {
    #[serde(default)]
    pub circuit: CircuitFile,
    /// Inline schedule; each link is synthesized separately.
    #[serde(default)]
    pub schedule: Option<ScheduleFile>,
    /// Schedule file, relative to the config file.
    #[serde(default)]
    pub schedule_file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Bands(BandsParams),
    Phases(PhasesParams),
    Loci(LociParams),
    EdgeSpectrum(EdgeSpectrumParams),
    EdgeWavefunctions(EdgeWavefunctionsParams),
    Rabi(RabiParams),
    EdgeDynamics(EdgeDynamicsParams),
    Chiral(ChiralParams),
    Sweep(SweepParams),
    Synthesize(SynthesizeParams),
}

/// A parsed, schema-checked config file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub output_dir: Option<PathBuf>,
    /// Reserved; every pipeline is deterministic.
    pub seed: u64,
    pub thresholds: Thresholds,
    pub params: Params,
    /// Directory of the config file, for relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

const COMMON: [&str; 4] = ["experiment", "output_dir", "seed", "thresholds"];

impl ExperimentConfig {
    /// Parses JSON text. `default_experiment` fills a missing `experiment` key.
    pub fn from_str(text: &str, default_experiment: Option<ExperimentId>) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("not valid JSON: {e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(Error::Config("top level must be an object".into()));
        };
        let experiment = match obj.remove("experiment") {
            Some(Value::String(s)) => ExperimentId::parse(&s).ok_or_else(|| {
                let known: Vec<&str> = ExperimentId::ALL.iter().map(|e| e.as_str()).collect();
                Error::Config(format!("unknown experiment {s:?}; expected one of {known:?}"))
            })?,
            Some(other) => return Err(Error::Config(format!("experiment must be a string, got {other}"))),
            None => default_experiment.ok_or_else(|| Error::Config("missing key \"experiment\"".into()))?,
        };
        if let Some(want) = default_experiment {
            if want != experiment {
                return Err(Error::Config(format!("config is for {experiment:?}, not {want:?}")));
            }
        }
        let output_dir = take::<Option<PathBuf>>(&mut obj, "output_dir")?.flatten();
        let seed = take::<u64>(&mut obj, "seed")?.unwrap_or(0);
        let thresholds = take::<Thresholds>(&mut obj, "thresholds")?.unwrap_or_default();
        let rest = Value::Object(obj);
        let params = match experiment {
            ExperimentId::Bands => Params::Bands(parse(rest)?),
            ExperimentId::Phases => Params::Phases(parse(rest)?),
            ExperimentId::Loci => Params::Loci(parse(rest)?),
            ExperimentId::EdgeSpectrum => Params::EdgeSpectrum(parse(rest)?),
            ExperimentId::EdgeWavefunctions => Params::EdgeWavefunctions(parse(rest)?),
            ExperimentId::Rabi => Params::Rabi(parse(rest)?),
            ExperimentId::EdgeDynamics => Params::EdgeDynamics(parse(rest)?),
            ExperimentId::Chiral => Params::Chiral(parse(rest)?),
            ExperimentId::Sweep => Params::Sweep(parse(rest)?),
            ExperimentId::Synthesize => Params::Synthesize(parse(rest)?),
        };
        Ok(ExperimentConfig { experiment, output_dir, seed, thresholds, params, base_dir: PathBuf::from(".") })
    }

    pub fn load(path: &std::path::Path, default_experiment: Option<ExperimentId>) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::Config("config is not UTF-8".into()))?;
        let mut cfg = Self::from_str(text, default_experiment)?;
        cfg.base_dir = path.parent().map(|p| p.to_path_buf()).unwrap_or_default();
        Ok((cfg, bytes))
    }
}

fn take<T: serde::de::DeserializeOwned>(obj: &mut Map<String, Value>, key: &str) -> Result<Option<T>> {
    match obj.remove(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v).map(Some).map_err(|e| Error::Config(format!("{key}: {e}"))),
    }
}

fn parse<T: serde::de::DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("unknown field") {
            Error::Config(format!("{msg} (common keys: {COMMON:?})"))
        } else {
            Error::Config(msg)
        }
    })
}
