use std::f64::consts::PI;

use serde::Serialize;

use super::bloch::bloch_fields;
use crate::{Error, Result};

/// ν = ½[sgn(m'+2t'0) − sgn(m'−2t'0)].
pub fn winding_analytic(m_eff: f64, t0: f64) -> Result<u8> {
    let two_t = 2.0 * t0;
    if (m_eff.abs() - two_t).abs() <= 1e-12 * two_t.max(f64::MIN_POSITIVE) {
        return Err(Error::OnNodalLoop { m_eff, t0 });
    }
    Ok(u8::from(m_eff.abs() < two_t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindingIntegral {
    pub raw: f64,
    pub nu: i64,
    /// min over the k_x circle of |b| (units of t'0 as given).
    pub min_gap: f64,
    /// Samples actually used after refinement.
    pub n_kx: usize,
}

/// Turning number of (b_y, b_z) around the k_x circle.
///
/// The angle is measured as atan2(b_y, b_z); with this orientation the
/// result agrees with [`winding_analytic`]. The sample count is doubled
/// until no step turns by more than π/2. `gap_threshold` is relative to t'0.
pub fn winding_integral(k_y: f64, k_z: f64, t0: f64, big_m: f64, d: f64, n_kx: usize, gap_threshold: f64) -> Result<WindingIntegral> {
    if n_kx < 64 {
        return Err(Error::InvalidParameter(format!("n_kx must be at least 64, got {n_kx}")));
    }
    let mut n = n_kx;
    loop {
        let angles: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let kx = -PI + 2.0 * PI * i as f64 / n as f64;
                let p = bloch_fields(kx, k_y, k_z, t0, big_m, d);
                (p.b_y.atan2(p.b_z), p.e_plus)
            })
            .collect();
        let min_gap = angles.iter().map(|a| a.1).fold(f64::INFINITY, f64::min);
        if min_gap < gap_threshold * t0 {
            return Err(Error::NodalLineProximity { gap: min_gap, threshold: gap_threshold * t0 });
        }
        let mut total = 0.0;
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let step = wrap(angles[(i + 1) % n].0 - angles[i].0);
            max_step = max_step.max(step.abs());
            total += step;
        }
        if max_step <= PI / 2.0 || n >= 1 << 22 {
            let raw = total / (2.0 * PI);
            return Ok(WindingIntegral { raw, nu: raw.round() as i64, min_gap, n_kx: n });
        }
        n *= 2;
    }
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::m_prime;

    #[test]
    fn closed_form_cases() {
        assert_eq!(winding_analytic(0.0, 1.0).unwrap(), 1);
        assert_eq!(winding_analytic(4.0, 1.0).unwrap(), 0);
        assert_eq!(winding_analytic(-2.5, 1.0).unwrap(), 0);
        assert!(matches!(winding_analytic(2.0, 1.0), Err(Error::OnNodalLoop { .. })));
        assert!(matches!(winding_analytic(-2.0, 1.0), Err(Error::OnNodalLoop { .. })));
    }

    #[test]
    fn integral_matches_closed_form_on_grid() {
        let (t0, big_m, d) = (1.0, 0.0, 1.0);
        for i in 0..21 {
            for j in 0..21 {
                let ky = -PI + 2.0 * PI * i as f64 / 21.0;
                let kz = -PI + 2.0 * PI * j as f64 / 21.0;
                let mp = m_prime(big_m, d, ky, kz);
                let Ok(nu) = winding_analytic(mp, t0) else { continue };
                let w = winding_integral(ky, kz, t0, big_m, d, 512, 1e-6).unwrap();
                assert_eq!(w.nu, nu as i64, "ky={ky} kz={kz}");
                assert!((w.raw - w.nu as f64).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn trivial_side_and_refusal() {
        let w = winding_integral(0.0, 0.3 * PI, 1.0, 0.0, 1.0, 512, 1e-6).unwrap();
        assert_eq!(w.nu, 0);
        // m' = -2t'0 exactly at (π/2, π): the line passes through the loop.
        let e = winding_integral(PI / 2.0, PI, 1.0, 0.0, 1.0, 512, 1e-6);
        assert!(matches!(e, Err(Error::NodalLineProximity { .. })));
    }

    #[test]
    fn refinement_near_small_gap() {
        // m' = 2t'0 − 1e-4: gap 1e-4, angle sweeps quickly near k_x = −π/2.
        let w = winding_integral(0.0, 0.0, 1.0, 2.0 - 1e-4 - 4.0, 1.0, 64, 1e-6).unwrap();
        assert_eq!(w.nu, 1);
        assert!(w.n_kx > 64);
    }
}
