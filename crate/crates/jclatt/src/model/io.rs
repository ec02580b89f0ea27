//! JSON documents for lattices and drive schedules. Frequencies are plain MHz
//! in files and converted to rad/μs on load.

use serde::{Deserialize, Serialize};

use super::cell::{LatticeSpec, UnitCellParams};
use super::drive::{DriveSchedule, DriveTone};
use crate::defaults::Thresholds;
use crate::units::{mhz, to_mhz};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellFile {
    pub omega_mhz: f64,
    pub g_mhz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeFile {
    pub n_cells: usize,
    pub cell_a: CellFile,
    pub cell_b: CellFile,
}

impl LatticeFile {
    pub fn to_spec(&self, th: &Thresholds) -> Result<LatticeSpec> {
        let cell = |c: &CellFile| UnitCellParams::with_thresholds(mhz(c.omega_mhz), mhz(c.g_mhz), th);
        LatticeSpec::new(self.n_cells, cell(&self.cell_a)?, cell(&self.cell_b)?)
    }

    pub fn from_spec(spec: &LatticeSpec) -> Self {
        let cell = |c: &UnitCellParams| CellFile { omega_mhz: to_mhz(c.omega), g_mhz: to_mhz(c.g) };
        LatticeFile { n_cells: spec.n_cells, cell_a: cell(&spec.cell_a), cell_b: cell(&spec.cell_b) }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneFile {
    /// Effective hopping t0 in MHz (the waveform prefactor is 4·t0).
    pub amplitude_mhz: f64,
    pub frequency_mhz: f64,
    pub phase: f64,
    #[serde(default = "one")]
    pub sign: f64,
}

/// `links[l]` lists the tones of the coupling between sites l+1 and l+2 (1-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub links: Vec<Vec<ToneFile>>,
}

impl ScheduleFile {
    /// Converts to a schedule; close tones are an error unless `allow_close`.
    pub fn to_schedule(&self, th: &Thresholds, allow_close: bool) -> Result<DriveSchedule> {
        let mut links = Vec::with_capacity(self.links.len());
        for tones in &self.links {
            let mut v = Vec::with_capacity(tones.len());
            for t in tones {
                v.push(DriveTone::new(mhz(t.amplitude_mhz), mhz(t.frequency_mhz), t.phase, t.sign)?);
            }
            links.push(v);
        }
        if allow_close {
            DriveSchedule::new_unchecked(links)
        } else {
            DriveSchedule::new(links, th.tone_separation_ratio)
        }
    }

    pub fn from_schedule(s: &DriveSchedule) -> Self {
        ScheduleFile {
            links: s
                .links()
                .iter()
                .map(|tones| {
                    tones
                        .iter()
                        .map(|t| ToneFile {
                            amplitude_mhz: to_mhz(t.amplitude),
                            frequency_mhz: to_mhz(t.frequency),
                            phase: t.phase,
                            sign: t.sign,
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_roundtrip() {
        let f: LatticeFile = serde_json::from_str(
            r#"{"n_cells": 4, "cell_a": {"omega_mhz": 6000, "g_mhz": 300}, "cell_b": {"omega_mhz": 5650, "g_mhz": 270}}"#,
        )
        .unwrap();
        let spec = f.to_spec(&Thresholds::default()).unwrap();
        assert!((spec.cell_b.g - mhz(270.0)).abs() < 1e-9);
        let back = LatticeFile::from_spec(&spec);
        assert!((back.cell_a.omega_mhz - 6000.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_keys_rejected() {
        let r: std::result::Result<LatticeFile, _> = serde_json::from_str(
            r#"{"n_cells": 4, "cell_a": {"omega_mhz": 6000, "g_mhz": 300, "x": 1}, "cell_b": {"omega_mhz": 5650, "g_mhz": 270}}"#,
        );
        assert!(r.is_err());
    }
}
