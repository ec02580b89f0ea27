//! SQUID-plus-inductor coupler between neighbouring resonators.
//!
//! Circuit quantities are SI (A, H, F, Wb). Resonator frequencies and
//! coupler coefficients come out in rad/μs like the rest of the crate;
//! φ0/(I_c·L) is dimensionless so the coefficients need no extra scale.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::model::DriveTone;
use crate::units::to_mhz;
use crate::{Error, Result};

/// Reduced flux quantum ħ/2e in Wb.
pub const PHI0: f64 = 3.291_059_757_000_6e-16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resonator {
    /// H.
    pub inductance: f64,
    /// F.
    pub capacitance: f64,
}

impl Resonator {
    /// Resonator with fundamental ω = π/√(L C) equal to `omega` (rad/μs).
    pub fn for_frequency(omega: f64, inductance: f64) -> Result<Self> {
        if !(omega > 0.0 && inductance > 0.0) {
            return Err(Error::InvalidParameter("resonator frequency and inductance must be positive".into()));
        }
        let w = omega * 1e6;
        Ok(Resonator { inductance, capacitance: (PI / w).powi(2) / inductance })
    }

    /// π/√(L C) in rad/μs.
    pub fn omega(&self) -> f64 {
        PI / (self.inductance * self.capacitance).sqrt() * 1e-6
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquidCircuit {
    /// Junction critical current, A.
    pub critical_current: f64,
    /// Series inductance L, H.
    pub series_inductance: f64,
    /// Φ_dc = 4π n″ φ0.
    pub n_dc: u32,
    pub left: Resonator,
    pub right: Resonator,
}

impl Default for SquidCircuit {
    /// 6 GHz resonators of 2 nH and a 1.6 μA SQUID: a 3 MHz hopping needs Ω ≈ 0.039.
    fn default() -> Self {
        let r = Resonator::for_frequency(crate::units::mhz(6000.0), 2e-9).unwrap();
        let ic = 1.6e-6;
        SquidCircuit { critical_current: ic, series_inductance: PHI0 / (2.0 * ic), n_dc: 1, left: r, right: r }
    }
}

impl SquidCircuit {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("critical_current", self.critical_current),
            ("series_inductance", self.series_inductance),
            ("left.inductance", self.left.inductance),
            ("left.capacitance", self.left.capacitance),
            ("right.inductance", self.right.inductance),
            ("right.capacitance", self.right.capacitance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn phi_dc(&self) -> f64 {
        4.0 * PI * self.n_dc as f64 * PHI0
    }

    /// √(ω_l ω_{l+1}/(L_l L_{l+1})) in rad/μs per H.
    fn cross_scale(&self) -> f64 {
        (self.left.omega() * self.right.omega() / (self.left.inductance * self.right.inductance)).sqrt()
    }

    /// Hopping t0 produced by tone strength Ω.
    pub fn hopping_for(&self, omega_j: f64) -> f64 {
        PHI0 * omega_j * self.cross_scale() / (8.0 * self.critical_current)
    }
}

/// L_S = φ0 / (2 I_c cos(Φ_ext/2φ0)).
pub fn squid_inductance(phi_ext: f64, circuit: &SquidCircuit) -> Result<f64> {
    let x = phi_ext / (2.0 * PHI0);
    let r = (x - PI / 2.0).rem_euclid(PI);
    if r.min(PI - r) < 1e-6 {
        return Err(Error::Divergence(x));
    }
    Ok(PHI0 / (2.0 * circuit.critical_current * x.cos()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxTone {
    /// Dimensionless Ω_j.
    pub strength: f64,
    /// rad/μs.
    pub frequency: f64,
    pub phase: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxDrive {
    pub tones: Vec<FluxTone>,
}

impl FluxDrive {
    pub fn total_strength(&self) -> f64 {
        self.tones.iter().map(|t| t.strength).sum()
    }

    /// 1 + Σ Ω_j [cos(ω_j t + φ_j) + 1].
    pub fn denominator(&self, t: f64) -> f64 {
        1.0 + self.tones.iter().map(|j| j.strength * ((j.frequency * t + j.phase).cos() + 1.0)).sum::<f64>()
    }

    /// Lower bound of the denominator over all t.
    pub fn min_denominator(&self) -> f64 {
        1.0 + self.tones.iter().map(|j| if j.strength >= 0.0 { 0.0 } else { 2.0 * j.strength }).sum::<f64>()
    }
}

/// Φ_ac(t) = 2φ0 arccos(−1/D(t)), principal branch.
pub fn flux_waveform(drive: &FluxDrive, t: f64) -> Result<f64> {
    let d = drive.denominator(t);
    let arg = -1.0 / d;
    if !(-1.0..=1.0).contains(&arg) {
        return Err(Error::Domain(arg));
    }
    Ok(2.0 * PHI0 * arg.acos())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CouplerCoefficients {
    /// Coefficient of (a†_l + a_l)(a†_{l+1} + a_{l+1}), rad/μs.
    pub cross: f64,
    /// Coefficients of (a†_l + a_l)² and (a†_{l+1} + a_{l+1})².
    pub self_left: f64,
    pub self_right: f64,
    /// L_S + L, H.
    pub total_inductance: f64,
}

pub fn coupler_coefficient(circuit: &SquidCircuit, drive: &FluxDrive, t: f64) -> Result<CouplerCoefficients> {
    let ls = squid_inductance(circuit.phi_dc() + flux_waveform(drive, t)?, circuit)?;
    let total = ls + circuit.series_inductance;
    Ok(CouplerCoefficients {
        cross: -circuit.cross_scale() * total,
        self_left: circuit.left.omega() / (2.0 * circuit.left.inductance) * total,
        self_right: circuit.right.omega() / (2.0 * circuit.right.inductance) * total,
        total_inductance: total,
    })
}

/// Flux tones and series inductance that realize a set of hopping tones.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Synthesis {
    pub drive: FluxDrive,
    /// L = φ0 (ΣΩ + 1)/(2 I_c).
    pub series_inductance: f64,
    pub circuit: SquidCircuit,
}

/// Inverts t0_j = φ0 Ω_j √(ω_l ω_{l+1}/(L_l L_{l+1}))/(8 I_c) for each tone.
pub fn synthesize_flux_for_hopping(target: &[DriveTone], circuit: &SquidCircuit) -> Result<Synthesis> {
    circuit.validate()?;
    let unit = circuit.hopping_for(1.0);
    let mut tones = Vec::with_capacity(target.len());
    for (k, t) in target.iter().enumerate() {
        if !(t.amplitude >= 0.0 && t.amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("tone {k}: amplitude must be non-negative")));
        }
        tones.push(FluxTone { strength: t.amplitude / unit, frequency: t.frequency, phase: t.sign * t.phase });
    }
    let drive = FluxDrive { tones };
    if drive.min_denominator() <= 0.0 || !drive.total_strength().is_finite() {
        return Err(Error::DriveTooStrong(format!("denominator reaches {}", drive.min_denominator())));
    }
    let series_inductance = PHI0 * (drive.total_strength() + 1.0) / (2.0 * circuit.critical_current);
    let circuit = SquidCircuit { series_inductance, ..circuit.clone() };
    Ok(Synthesis { drive, series_inductance, circuit })
}

/// One recovered spectral line compared with its target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecoveredLine {
    pub frequency_mhz: f64,
    /// Target 4·t0 and recovered amplitude, rad/μs.
    pub target_amplitude: f64,
    pub amplitude: f64,
    pub target_phase: f64,
    pub phase: f64,
    pub amplitude_rel_error: f64,
    pub phase_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynthesisReport {
    pub lines: Vec<RecoveredLine>,
    /// Largest spectral line away from the targets, relative to the weakest target.
    pub spurious_rel: f64,
    /// Largest |Φ_ac(t) − Φ_ac(Ω = 0)| / φ0.
    pub flux_excursion: f64,
    /// Whether Φ_ac − 2πφ0 stays below 0.1 φ0.
    pub small_ac: bool,
    /// Range of L_S + L over the window, H.
    pub total_inductance_range: [f64; 2],
    /// Largest |same-site coefficient| over the window, rad/μs.
    pub max_frequency_shift: f64,
    /// Static part of the cross coefficient, rad/μs.
    pub cross_offset: f64,
    pub window: f64,
    pub samples: usize,
    /// "fft" when the window holds whole periods of every tone, else "least-squares".
    pub method: String,
}

/// Samples the cross coefficient over a window and extracts each target line.
pub fn verify_synthesis(syn: &Synthesis, target: &[DriveTone]) -> Result<SynthesisReport> {
    let freqs: Vec<f64> = syn.drive.tones.iter().map(|t| t.frequency).filter(|f| *f > 0.0).collect();
    let (window, commensurate) = common_window(&freqs);
    let f_max = freqs.iter().copied().fold(0.0, f64::max);
    let mut n = 1usize;
    // Nyquist with headroom for the third harmonic of the fastest tone.
    let min_samples = if f_max > 0.0 { (window * f_max * 8.0 / (2.0 * PI)).ceil() as usize } else { 64 };
    while n < min_samples.max(64) {
        n *= 2;
    }
    let dt = window / n as f64;
    let static_flux = 2.0 * PHI0 * PI;
    let mut cross = Vec::with_capacity(n);
    let (mut excursion, mut lo, mut hi, mut shift): (f64, f64, f64, f64) = (0.0, f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for k in 0..n {
        let t = k as f64 * dt;
        let c = coupler_coefficient(&syn.circuit, &syn.drive, t)?;
        excursion = excursion.max((flux_waveform(&syn.drive, t)? - static_flux).abs() / PHI0);
        lo = lo.min(c.total_inductance);
        hi = hi.max(c.total_inductance);
        shift = shift.max(c.self_left.abs()).max(c.self_right.abs());
        cross.push(c.cross);
    }
    let offset = cross.iter().sum::<f64>() / n as f64;
    let signal: Vec<f64> = cross.iter().map(|c| c - offset).collect();

    let mut lines = Vec::new();
    let fitted = if commensurate { None } else { Some(least_squares(&signal, dt, &freqs)) };
    for (k, t) in target.iter().enumerate() {
        if t.frequency <= 0.0 {
            continue;
        }
        let (amp, phase) = match &fitted {
            None => fourier_line(&signal, dt, t.frequency),
            Some(fit) => fit[freqs.iter().position(|f| *f == t.frequency).unwrap_or(k)],
        };
        let target_amp = 4.0 * t.amplitude;
        let target_phase = t.sign * t.phase;
        lines.push(RecoveredLine {
            frequency_mhz: to_mhz(t.frequency),
            target_amplitude: target_amp,
            amplitude: amp,
            target_phase,
            phase,
            amplitude_rel_error: if target_amp > 0.0 { (amp - target_amp).abs() / target_amp } else { amp },
            phase_error: wrap(phase - target_phase).abs(),
        });
    }

    // Spectrum of what is left after the target lines are removed.
    let mut residual = signal.clone();
    for l in &lines {
        let w = crate::units::mhz(l.frequency_mhz);
        for (k, r) in residual.iter_mut().enumerate() {
            *r -= l.amplitude * (w * k as f64 * dt + l.phase).cos();
        }
    }
    let weakest = lines.iter().map(|l| l.target_amplitude).filter(|a| *a > 0.0).fold(f64::INFINITY, f64::min);
    let spurious = peak_line(&residual);
    let spurious_rel = if weakest.is_finite() { spurious / weakest } else { spurious };

    Ok(SynthesisReport {
        lines,
        spurious_rel,
        flux_excursion: excursion,
        small_ac: excursion < 0.1,
        total_inductance_range: [lo, hi],
        max_frequency_shift: shift,
        cross_offset: offset,
        window,
        samples: n,
        method: if commensurate { "fft" } else { "least-squares" }.into(),
    })
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

/// Shortest window holding whole periods of every frequency, up to 1000
/// periods of the slowest; otherwise 200 slow periods flagged as incommensurate.
fn common_window(freqs: &[f64]) -> (f64, bool) {
    let Some(slow) = freqs.iter().copied().reduce(f64::min) else {
        return (1.0, true);
    };
    let base = 2.0 * PI / slow;
    for k in 1..=1000 {
        let w = base * k as f64;
        if freqs.iter().all(|f| {
            let c = f * w / (2.0 * PI);
            (c - c.round()).abs() < 1e-9 * c.max(1.0)
        }) {
            return (w, true);
        }
    }
    (base * 200.0, false)
}

/// Amplitude and phase of the FFT bin at `omega` (must be a bin frequency).
fn fourier_line(signal: &[f64], dt: f64, omega: f64) -> (f64, f64) {
    let n = signal.len();
    let spec = fft(signal);
    let bin = (omega * dt * n as f64 / (2.0 * PI)).round() as usize;
    let c = spec[bin % n] * (2.0 / n as f64);
    (c.norm(), c.arg())
}

fn fft(signal: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|v| Complex::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Largest single-sided line amplitude in a real signal.
fn peak_line(signal: &[f64]) -> f64 {
    let n = signal.len();
    let spec = fft(signal);
    spec[1..n / 2].iter().map(|c| c.norm() * 2.0 / n as f64).fold(0.0, f64::max)
}

/// Fits Σ a_j cos(ω_j t) + b_j sin(ω_j t) and returns (amplitude, phase) per tone.
fn least_squares(signal: &[f64], dt: f64, freqs: &[f64]) -> Vec<(f64, f64)> {
    let m = 2 * freqs.len();
    let a = nalgebra::DMatrix::from_fn(signal.len(), m, |k, c| {
        let x = freqs[c / 2] * k as f64 * dt;
        if c % 2 == 0 {
            x.cos()
        } else {
            x.sin()
        }
    });
    let b = nalgebra::DVector::from_column_slice(signal);
    let sol = a.svd(true, true).solve(&b, 1e-12).expect("SVD computed with U and V");
    (0..freqs.len())
        .map(|j| {
            let (c, s) = (sol[2 * j], sol[2 * j + 1]);
            // c cos x + s sin x = A cos(x + φ) with A cos φ = c, A sin φ = −s.
            ((c * c + s * s).sqrt(), (-s).atan2(c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz;

    #[test]
    fn zero_flux_and_periodicity() {
        let c = SquidCircuit::default();
        let l0 = squid_inductance(0.0, &c).unwrap();
        assert!((l0 - PHI0 / (2.0 * c.critical_current)).abs() < 1e-12 * l0);
        let l1 = squid_inductance(c.phi_dc(), &c).unwrap();
        assert!((l1 - l0).abs() < 1e-9 * l0);
        assert!(matches!(squid_inductance(PI * PHI0, &c), Err(Error::Divergence(_))));
    }

    #[test]
    fn flux_waveform_static_values() {
        let none = FluxDrive::default();
        assert!((flux_waveform(&none, 0.3).unwrap() - 2.0 * PI * PHI0).abs() < 1e-12 * PHI0);
        let d = FluxDrive { tones: vec![FluxTone { strength: 0.04, frequency: mhz(100.0), phase: 0.0 }] };
        let trough = PI / mhz(100.0);
        assert!((flux_waveform(&d, trough).unwrap() - 2.0 * PI * PHI0).abs() < 1e-9 * PHI0);
        let period = 2.0 * PI / mhz(100.0);
        for k in 0..20 {
            let t = k as f64 * 1.3e-4;
            assert!((flux_waveform(&d, t).unwrap() - flux_waveform(&d, t + period).unwrap()).abs() < 1e-9 * PHI0);
        }
    }

    #[test]
    fn resonator_frequency_roundtrip() {
        let r = Resonator::for_frequency(mhz(6000.0), 2e-9).unwrap();
        assert!((r.omega() / mhz(6000.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_target_is_static() {
        let c = SquidCircuit::default();
        let tone = DriveTone::new(0.0, mhz(100.0), 0.0, 1.0).unwrap();
        let s = synthesize_flux_for_hopping(&[tone], &c).unwrap();
        assert_eq!(s.drive.tones[0].strength, 0.0);
        assert!((s.series_inductance - PHI0 / (2.0 * c.critical_current)).abs() < 1e-20);
        let a = coupler_coefficient(&s.circuit, &s.drive, 0.0).unwrap();
        let b = coupler_coefficient(&s.circuit, &s.drive, 0.0123).unwrap();
        assert!((a.cross - b.cross).abs() < 1e-9);
    }
}
