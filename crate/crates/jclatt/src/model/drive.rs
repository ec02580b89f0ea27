use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::cell::{hopping_intervals, LatticeSpec, Spin};
use crate::{Error, Result};

/// One cosine tone of an inter-cell coupling.
///
/// The waveform is `4·amplitude·cos(frequency·t + sign·phase)`. The stored
/// amplitude is the effective hopping t0, not the waveform prefactor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveTone {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub sign: f64,
}

impl DriveTone {
    pub fn new(amplitude: f64, frequency: f64, phase: f64, sign: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("tone amplitude {amplitude} < 0")));
        }
        if !(frequency >= 0.0 && frequency.is_finite()) {
            return Err(Error::InvalidParameter(format!("tone frequency {frequency} < 0")));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::InvalidParameter(format!("tone sign must be ±1, got {sign}")));
        }
        Ok(DriveTone { amplitude, frequency, phase, sign })
    }

    pub fn value(&self, t: f64) -> f64 {
        4.0 * self.amplitude * (self.frequency * t + self.sign * self.phase).cos()
    }
}

/// Two tones on one link that sit closer than the separation rule allows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToneConflict {
    pub link: usize,
    pub first: usize,
    pub second: usize,
    pub separation: f64,
    pub required: f64,
}

impl std::fmt::Display for ToneConflict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "link {}: tones {} and {} separated by {:.4} MHz, need {:.4} MHz",
            self.link + 1,
            self.first,
            self.second,
            crate::units::to_mhz(self.separation),
            crate::units::to_mhz(self.required)
        )
    }
}

/// Per-link tone lists; `links[l]` drives the coupling between sites l and l+1.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriveSchedule {
    links: Vec<Vec<DriveTone>>,
}

pub const MAX_TONES_PER_LINK: usize = 4;

impl DriveSchedule {
    /// Validating constructor: at most four tones per link, pairwise spacing
    /// at least `ratio`·(max amplitude on the link).
    pub fn new(links: Vec<Vec<DriveTone>>, ratio: f64) -> Result<Self> {
        let s = Self::new_unchecked(links)?;
        let conflicts = s.separation_conflicts(ratio);
        if let Some(c) = conflicts.first() {
            return Err(Error::Physics(format!("tone separation: {c}")));
        }
        Ok(s)
    }

    /// Keeps the tone-count limit but only warns about close tones.
    pub fn new_unchecked(links: Vec<Vec<DriveTone>>) -> Result<Self> {
        for (l, tones) in links.iter().enumerate() {
            if tones.len() > MAX_TONES_PER_LINK {
                return Err(Error::InvalidParameter(format!(
                    "link {} carries {} tones (max {MAX_TONES_PER_LINK})",
                    l + 1,
                    tones.len()
                )));
            }
        }
        let s = DriveSchedule { links };
        for c in s.separation_conflicts(20.0) {
            log::warn!("{c}");
        }
        Ok(s)
    }

    pub fn empty(n_links: usize) -> Self {
        DriveSchedule { links: vec![Vec::new(); n_links] }
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn tones(&self, link: usize) -> &[DriveTone] {
        &self.links[link]
    }

    pub fn links(&self) -> &[Vec<DriveTone>] {
        &self.links
    }

    pub fn value(&self, link: usize, t: f64) -> f64 {
        self.links[link].iter().map(|tone| tone.value(t)).sum()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.all_tones().map(|t| t.amplitude).fold(0.0, f64::max)
    }

    pub fn max_frequency(&self) -> f64 {
        self.all_tones().map(|t| t.frequency).fold(0.0, f64::max)
    }

    fn all_tones(&self) -> impl Iterator<Item = &DriveTone> {
        self.links.iter().flatten()
    }

    pub fn separation_conflicts(&self, ratio: f64) -> Vec<ToneConflict> {
        let mut out = Vec::new();
        for (l, tones) in self.links.iter().enumerate() {
            let amp = tones.iter().map(|t| t.amplitude).fold(0.0, f64::max);
            let required = ratio * amp;
            for i in 0..tones.len() {
                for j in i + 1..tones.len() {
                    let sep = (tones[i].frequency - tones[j].frequency).abs();
                    if sep < required * (1.0 - 1e-9) {
                        out.push(ToneConflict { link: l, first: i, second: j, separation: sep, required });
                    }
                }
            }
        }
        out
    }
}

/// J_l(t) = Σ 4 t0 cos(ω^d t + s φ).
pub fn drive_value(schedule: &DriveSchedule, link: usize, t: f64) -> f64 {
    schedule.value(link, t)
}

/// Phase choice for the first (spin-conserving) tone of the two-tone nodal drive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodalPhaseConvention {
    /// (−1)^{l+1}·π/2 with 1-based l, as printed. Realizes the nodal chain
    /// conjugated by Π_l (−1)^l σ^z_l (same spectrum, mirrored edge content).
    Printed,
    /// (−1)^l·π/2 with 1-based l. Realizes the nodal chain itself.
    Corrected,
}

/// Two-tone nodal-loop drive on every link.
///
/// Tone 1 sits at the spin-conserving interval, tone 2 at the spin-flip
/// interval minus 2m. Both intervals must be shared by all four transitions
/// of each link (the ω_A = ω_B, g_A ≠ g_B parameter family).
pub fn nodal_drive(
    lattice: &LatticeSpec,
    t0: f64,
    m: f64,
    convention: NodalPhaseConvention,
) -> Result<DriveSchedule> {
    let mut links = Vec::with_capacity(lattice.n_links());
    for link in 0..lattice.n_links() {
        let iv = hopping_intervals(lattice, link)?;
        let same = iv.get(Spin::Up, Spin::Up).interval;
        let flip = iv.get(Spin::Up, Spin::Down).interval;
        let tol = 1e-9 * same.max(flip).max(1.0);
        if (iv.get(Spin::Down, Spin::Down).interval - same).abs() > tol
            || (iv.get(Spin::Down, Spin::Up).interval - flip).abs() > tol
        {
            return Err(Error::Physics(format!(
                "link {}: intervals do not pair up; two-tone nodal drive needs ω_A = ω_B",
                link + 1
            )));
        }
        let l1 = (link + 1) as i32;
        let parity = if l1 % 2 == 0 { 1.0 } else { -1.0 };
        let phase1 = match convention {
            NodalPhaseConvention::Printed => -parity * FRAC_PI_2,
            NodalPhaseConvention::Corrected => parity * FRAC_PI_2,
        };
        let flip_freq = flip - 2.0 * m;
        if flip_freq < 0.0 {
            return Err(Error::Physics(format!("Zeeman detuning m = {m} exceeds half the spin-flip interval")));
        }
        links.push(vec![
            DriveTone::new(t0, same, phase1, 1.0)?,
            DriveTone::new(t0, flip_freq, FRAC_PI_2, 1.0)?,
        ]);
    }
    DriveSchedule::new_unchecked(links)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UnitCellParams;
    use crate::units::mhz;

    fn nodal_lattice(n: usize) -> LatticeSpec {
        LatticeSpec::new(
            n,
            UnitCellParams::from_mhz(6000.0, 200.0).unwrap(),
            UnitCellParams::from_mhz(6000.0, 100.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_tone_values() {
        let t0 = mhz(3.0);
        let tone = DriveTone::new(t0, mhz(100.0), FRAC_PI_2, 1.0).unwrap();
        assert!(tone.value(0.0).abs() < 1e-12);
        for s in [1.0, -1.0] {
            let tone = DriveTone::new(t0, mhz(100.0), 0.0, s).unwrap();
            assert!((tone.value(0.0) - 4.0 * t0).abs() < 1e-12);
        }
    }

    #[test]
    fn nodal_drive_vanishes_at_zero() {
        let lat = nodal_lattice(6);
        for conv in [NodalPhaseConvention::Printed, NodalPhaseConvention::Corrected] {
            let d = nodal_drive(&lat, mhz(3.0), mhz(2.0), conv).unwrap();
            for l in 0..5 {
                assert!(drive_value(&d, l, 0.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nodal_intervals() {
        let d = nodal_drive(&nodal_lattice(3), mhz(3.0), 0.0, NodalPhaseConvention::Corrected).unwrap();
        for l in 0..2 {
            assert!((d.tones(l)[0].frequency - mhz(100.0)).abs() < 1e-9);
            assert!((d.tones(l)[1].frequency - mhz(300.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn periodic_for_commensurate_tones() {
        let t0 = mhz(3.0);
        let s = DriveSchedule::new(
            vec![vec![
                DriveTone::new(t0, mhz(100.0), 0.3, 1.0).unwrap(),
                DriveTone::new(t0, mhz(300.0), -1.1, -1.0).unwrap(),
            ]],
            20.0,
        )
        .unwrap();
        let period = 0.01;
        for k in 0..50 {
            let t = 0.0137 * k as f64;
            let a = s.value(0, t);
            let b = s.value(0, t + period);
            assert!((a - b).abs() <= 1e-12 * 8.0 * t0, "{a} {b}");
        }
    }

    #[test]
    fn tone_limits() {
        let t = DriveTone::new(1.0, 100.0, 0.0, 1.0).unwrap();
        assert!(DriveSchedule::new_unchecked(vec![vec![t; 5]]).is_err());
        let close = DriveTone::new(1.0, 105.0, 0.0, 1.0).unwrap();
        let err = DriveSchedule::new(vec![vec![t, close]], 20.0).unwrap_err();
        assert!(err.to_string().contains("tones 0 and 1"));
        assert!(DriveTone::new(-1.0, 1.0, 0.0, 1.0).is_err());
        assert!(DriveTone::new(1.0, 1.0, 0.0, 0.5).is_err());
    }
}
