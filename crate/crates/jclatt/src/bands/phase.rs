use std::fmt;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::winding::winding_analytic;
use crate::effective::m_prime;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseLabel {
    TrivialGapped,
    /// Single loop in the k_x = −π/2 plane.
    OneLoopMinus,
    /// Single loop in the k_x = +π/2 plane.
    OneLoopPlus,
    TwoLoops,
    NontrivialGapped,
    /// (M, d) on a boundary of the diagram.
    Critical,
}

impl PhaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::TrivialGapped => "trivial-gapped",
            PhaseLabel::OneLoopMinus => "one-loop-minus",
            PhaseLabel::OneLoopPlus => "one-loop-plus",
            PhaseLabel::TwoLoops => "two-loops",
            PhaseLabel::NontrivialGapped => "nontrivial-gapped",
            PhaseLabel::Critical => "critical",
        }
    }

    pub fn loop_count(&self) -> Option<usize> {
        match self {
            PhaseLabel::TrivialGapped | PhaseLabel::NontrivialGapped => Some(0),
            PhaseLabel::OneLoopMinus | PhaseLabel::OneLoopPlus => Some(1),
            PhaseLabel::TwoLoops => Some(2),
            PhaseLabel::Critical => None,
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// ν(k_y, k_z) sampled on `k × k`, row index k_y. `None` where the gap closes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindingMap {
    pub k: Vec<f64>,
    pub values: Vec<Option<u8>>,
}

impl WindingMap {
    pub fn resolution(&self) -> usize {
        self.k.len()
    }

    pub fn get(&self, iy: usize, iz: usize) -> Option<u8> {
        self.values[iy * self.k.len() + iz]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseDiagramCell {
    pub big_m: f64,
    pub d: f64,
    pub label: PhaseLabel,
    pub winding_map: Option<WindingMap>,
}

/// Samples ν on a `resolution`² grid spanning [−π, π] inclusive.
pub fn winding_map(big_m: f64, d: f64, t0: f64, resolution: usize) -> WindingMap {
    let n = resolution.max(2);
    let k: Vec<f64> = (0..n).map(|i| -PI + 2.0 * PI * i as f64 / (n - 1) as f64).collect();
    let values = (0..n * n)
        .into_par_iter()
        .map(|idx| winding_analytic(m_prime(big_m, d, k[idx / n], k[idx % n]), t0).ok())
        .collect();
    WindingMap { k, values }
}

fn label(big_m: f64, d: f64, t0: f64) -> PhaseLabel {
    let (lo, hi) = (big_m - 4.0 * d, big_m + 4.0 * d);
    let tol = 1e-12 * t0.max(big_m.abs()).max(d);
    let two_t = 2.0 * t0;
    let edges = [lo, hi];
    if edges.iter().any(|e| (e - two_t).abs() <= tol || (e + two_t).abs() <= tol) {
        return PhaseLabel::Critical;
    }
    let plus = lo < -two_t && -two_t < hi;
    let minus = lo < two_t && two_t < hi;
    match (plus, minus) {
        (true, true) => PhaseLabel::TwoLoops,
        (true, false) => PhaseLabel::OneLoopPlus,
        (false, true) => PhaseLabel::OneLoopMinus,
        (false, false) if lo > -two_t && hi < two_t => PhaseLabel::NontrivialGapped,
        (false, false) => PhaseLabel::TrivialGapped,
    }
}

/// Phase of the (M, d) point; the winding map is attached when
/// `map_resolution` is given.
pub fn classify_phase(big_m: f64, d: f64, t0: f64, map_resolution: Option<usize>) -> Result<PhaseDiagramCell> {
    if !(t0 > 0.0) {
        return Err(Error::InvalidParameter(format!("t0 must be positive, got {t0}")));
    }
    if !(d >= 0.0) || !big_m.is_finite() {
        return Err(Error::InvalidParameter(format!("need d >= 0 and finite M, got M = {big_m}, d = {d}")));
    }
    Ok(PhaseDiagramCell {
        big_m,
        d,
        label: label(big_m, d, t0),
        winding_map: map_resolution.map(|r| winding_map(big_m, d, t0, r)),
    })
}

/// Labels on an `n_m × n_d` grid over closed ranges (units of t'0 as given).
pub fn phase_diagram(m_range: (f64, f64), d_range: (f64, f64), n_m: usize, n_d: usize, t0: f64) -> Result<Vec<PhaseDiagramCell>> {
    let lin = |r: (f64, f64), n: usize, i: usize| if n < 2 { r.0 } else { r.0 + (r.1 - r.0) * i as f64 / (n - 1) as f64 };
    (0..n_m * n_d)
        .into_par_iter()
        .map(|idx| classify_phase(lin(m_range, n_m, idx / n_d), lin(d_range, n_d, idx % n_d), t0, None))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_points() {
        let c = |m, d| classify_phase(m, d, 1.0, None).unwrap().label;
        assert_eq!(c(0.0, 1.0), PhaseLabel::TwoLoops);
        assert_eq!(c(2.5, 0.5), PhaseLabel::OneLoopMinus);
        assert_eq!(c(-2.5, 0.5), PhaseLabel::OneLoopPlus);
        assert_eq!(c(0.0, 0.0), PhaseLabel::NontrivialGapped);
        assert_eq!(c(10.0, 1.0), PhaseLabel::TrivialGapped);
        assert_eq!(c(2.0, 0.0), PhaseLabel::Critical);
        assert_eq!(c(0.0, 0.5), PhaseLabel::Critical);
        assert!(classify_phase(0.0, -1.0, 1.0, None).is_err());
    }

    #[test]
    fn gapped_maps_are_uniform() {
        let m = classify_phase(0.0, 0.0, 1.0, Some(11)).unwrap().winding_map.unwrap();
        assert!(m.values.iter().all(|v| *v == Some(1)));
        let m = winding_map(10.0, 1.0, 1.0, 11);
        assert!(m.values.iter().all(|v| *v == Some(0)));
    }

    #[test]
    fn diagram_grid() {
        let cells = phase_diagram((-6.0, 6.0), (0.0, 2.0), 13, 5, 1.0).unwrap();
        assert_eq!(cells.len(), 65);
        assert_eq!(cells[0].big_m, -6.0);
        assert_eq!(cells[64].d, 2.0);
    }
}
