use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lattice::{wrap_phase, EffectiveLatticeParams, Hopping, LinkHoppings};
use crate::model::{dressed_hopping_element, DriveSchedule, DriveTone, LatticeSpec, Spin, ToneConflict};
use crate::units::to_mhz;
use crate::{Error, Result, C64};

/// Rotating-frame detuning E_{l,α} − s_α m − (E_{l+1,α'} − s_α' m) of a link transition.
fn transition(lattice: &LatticeSpec, link: usize, from: Spin, to: Spin, m: f64) -> f64 {
    let left = lattice.levels(link).energy(from) - from.sign() * m;
    let right = lattice.levels(link + 1).energy(to) - to.sign() * m;
    left - right
}

/// Tone whose resonant RWA term on link `link` is t0·e^{iφ} c†_{l,α} c_{l+1,α'}.
///
/// A tone 4A·cos(ωt + θ) at ω = |Δ| contributes 2A·μ·e^{−i sgn(Δ) θ}, with μ
/// the dressed matrix element of a†_l a_{l+1}. The stored tone has
/// sign s = sgn(Δ) and phase −(φ + π[μ < 0]), so that s·phase = θ.
pub fn resonant_tone(
    lattice: &LatticeSpec,
    link: usize,
    from: Spin,
    to: Spin,
    m: f64,
    t0: f64,
    phi: f64,
) -> Result<DriveTone> {
    if link + 1 >= lattice.n_cells {
        return Err(Error::InvalidParameter(format!("link {link} out of range")));
    }
    let delta = transition(lattice, link, from, to, m);
    let mu = dressed_hopping_element(from, to);
    let sign = if delta < 0.0 { -1.0 } else { 1.0 };
    let shift = if mu < 0.0 { PI } else { 0.0 };
    DriveTone::new(t0 / (2.0 * mu.abs()), delta.abs(), wrap_phase(-(phi + shift)), sign)
}

/// Drive schedule whose RWA limit in the frame rotating with m is `params`.
pub fn realize_effective(lattice: &LatticeSpec, params: &EffectiveLatticeParams) -> Result<DriveSchedule> {
    if params.n_cells != lattice.n_cells {
        return Err(Error::DimensionMismatch { expected: lattice.n_cells, got: params.n_cells });
    }
    let mut links = Vec::with_capacity(lattice.n_links());
    for (l, hop) in params.links.iter().enumerate() {
        let mut tones = Vec::new();
        for a in Spin::ALL {
            for b in Spin::ALL {
                let h = hop.get(a, b);
                if h.amplitude > 0.0 {
                    tones.push(resonant_tone(lattice, l, a, b, params.zeeman, h.amplitude, h.phase)?);
                }
            }
        }
        links.push(tones);
    }
    DriveSchedule::new_unchecked(links)
}

/// Reads the effective model back off a drive: keeps every tone that is
/// resonant (to 10⁻⁹ relative) with a link transition in the frame rotating
/// with m, and sums its RWA coefficient.
pub fn effective_from_drive(lattice: &LatticeSpec, schedule: &DriveSchedule, m: f64) -> Result<EffectiveLatticeParams> {
    if schedule.n_links() != lattice.n_links() {
        return Err(Error::DimensionMismatch { expected: lattice.n_links(), got: schedule.n_links() });
    }
    let mut links = Vec::with_capacity(lattice.n_links());
    for l in 0..lattice.n_links() {
        let mut hop = LinkHoppings::default();
        for a in Spin::ALL {
            for b in Spin::ALL {
                let delta = transition(lattice, l, a, b, m);
                let mu = dressed_hopping_element(a, b);
                let mut coef = C64::new(0.0, 0.0);
                for tone in schedule.tones(l) {
                    let theta = tone.sign * tone.phase;
                    let tol = 1e-9 * delta.abs().max(1.0);
                    if (tone.frequency - delta.abs()).abs() > tol {
                        if (tone.frequency - delta.abs()).abs() < tone.amplitude {
                            log::warn!("link {}: tone near but not on the {:?}{:?} resonance", l + 1, a, b);
                        }
                        continue;
                    }
                    if tone.frequency == 0.0 {
                        coef += 4.0 * tone.amplitude * mu * theta.cos();
                    } else {
                        let s = if delta < 0.0 { -1.0 } else { 1.0 };
                        coef += 2.0 * tone.amplitude * mu * C64::from_polar(1.0, -s * theta);
                    }
                }
                hop.set(a, b, Hopping::from_complex(coef));
            }
        }
        links.push(hop);
    }
    EffectiveLatticeParams::new(lattice.n_cells, m, links)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RwaViolation {
    /// A tone slower than ratio × t0 of its link.
    SlowTone { link: usize, tone: usize, frequency_mhz: f64, required_mhz: f64 },
    /// Two tones on one link closer than ratio × t0.
    CloseTones { link: usize, first: usize, second: usize, separation_mhz: f64, required_mhz: f64 },
}

impl std::fmt::Display for RwaViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RwaViolation::SlowTone { link, tone, frequency_mhz, required_mhz } => write!(
                f,
                "link {}: tone {tone} at {frequency_mhz:.4} MHz is below {required_mhz:.4} MHz",
                link + 1
            ),
            RwaViolation::CloseTones { link, first, second, separation_mhz, required_mhz } => write!(
                f,
                "link {}: tones {first} and {second} separated by {separation_mhz:.4} MHz, need {required_mhz:.4} MHz",
                link + 1
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RwaReport {
    pub ratio: f64,
    pub zeeman_mhz: f64,
    pub violations: Vec<RwaViolation>,
}

impl RwaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every tone frequency and every pairwise tone spacing on a link
/// is at least `ratio` times the largest t0 on that link.
pub fn validate_rwa(lattice: &LatticeSpec, schedule: &DriveSchedule, m: f64, ratio: f64) -> RwaReport {
    let mut violations = Vec::new();
    if schedule.n_links() != lattice.n_links() {
        log::warn!("schedule has {} links, lattice {}", schedule.n_links(), lattice.n_links());
    }
    for l in 0..schedule.n_links() {
        let tones = schedule.tones(l);
        let amp = tones.iter().map(|t| t.amplitude).fold(0.0, f64::max);
        let required = ratio * amp;
        for (k, t) in tones.iter().enumerate() {
            if t.frequency < required * (1.0 - 1e-9) {
                violations.push(RwaViolation::SlowTone {
                    link: l,
                    tone: k,
                    frequency_mhz: to_mhz(t.frequency),
                    required_mhz: to_mhz(required),
                });
            }
        }
    }
    for ToneConflict { link, first, second, separation, required } in schedule.separation_conflicts(ratio) {
        violations.push(RwaViolation::CloseTones {
            link,
            first,
            second,
            separation_mhz: to_mhz(separation),
            required_mhz: to_mhz(required),
        });
    }
    RwaReport { ratio, zeeman_mhz: to_mhz(m), violations }
}
