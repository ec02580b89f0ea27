use rayon::prelude::*;
use serde::Serialize;

use crate::effective::m_prime;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochPoint {
    pub k_x: f64,
    pub k_y: f64,
    pub k_z: f64,
    pub b_y: f64,
    pub b_z: f64,
    /// Upper band; the lower band is `-e_plus`.
    pub e_plus: f64,
}

impl BlochPoint {
    pub fn e_minus(&self) -> f64 {
        -self.e_plus
    }

    pub fn gap(&self) -> f64 {
        2.0 * self.e_plus
    }
}

/// Evaluates the Bloch fields and bands at one k-point.
pub fn bloch_fields(k_x: f64, k_y: f64, k_z: f64, t0: f64, big_m: f64, d: f64) -> BlochPoint {
    let b_y = -2.0 * t0 * k_x.cos();
    let b_z = 2.0 * t0 * k_x.sin() + m_prime(big_m, d, k_y, k_z);
    BlochPoint { k_x, k_y, k_z, b_y, b_z, e_plus: b_y.hypot(b_z) }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandSample {
    pub k_y: f64,
    pub k_z: f64,
    pub e_plus: f64,
    pub e_minus: f64,
}

/// Both bands on a `resolution`² grid of (k_y, k_z) ∈ [−π, π)² at fixed k_x.
pub fn band_surface(k_x: f64, t0: f64, big_m: f64, d: f64, resolution: usize) -> Vec<BandSample> {
    let ks = grid(resolution);
    (0..resolution * resolution)
        .into_par_iter()
        .map(|n| {
            let (ky, kz) = (ks[n / resolution], ks[n % resolution]);
            let p = bloch_fields(k_x, ky, kz, t0, big_m, d);
            BandSample { k_y: ky, k_z: kz, e_plus: p.e_plus, e_minus: p.e_minus() }
        })
        .collect()
}

/// `n` uniform points on [−π, π).
pub(crate) fn grid(n: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    (0..n).map(|i| -pi + 2.0 * pi * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn touching_point_and_zone_center() {
        let p = bloch_fields(PI / 2.0, PI / 2.0, PI, 1.0, 0.0, 1.0);
        assert!(p.e_plus.abs() < 1e-12);
        let q = bloch_fields(0.0, 0.3, 1.1, 1.5, 0.2, 0.4);
        let mp = m_prime(0.2, 0.4, 0.3, 1.1);
        assert!((q.b_y + 3.0).abs() < 1e-15);
        assert!((q.e_plus - (9.0 + mp * mp).sqrt()).abs() < 1e-12);
        assert_eq!(q.e_minus(), -q.e_plus);
    }

    #[test]
    fn surface_size() {
        let s = band_surface(PI / 2.0, 1.0, 0.0, 1.0, 8);
        assert_eq!(s.len(), 64);
        assert!(s.iter().all(|b| b.e_plus >= 0.0 && b.e_minus == -b.e_plus));
    }
}
