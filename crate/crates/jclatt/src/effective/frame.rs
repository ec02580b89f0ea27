use super::lattice::polariton_index;
use crate::model::{polariton_amplitude as amplitude, HilbertBasis, LatticeSpec, Spin};
use crate::{Error, Result, C64};

/// e^{+i(E_{l,α} − s_α m)t}: the factor picked up by |α⟩_l under U†.
pub fn frame_phase(lattice: &LatticeSpec, m: f64, site: usize, spin: Spin, t: f64) -> C64 {
    let e = lattice.levels(site).energy(spin) - spin.sign() * m;
    C64::from_polar(1.0, e * t)
}

/// Rotating-frame polariton amplitudes (length 2N) of a lab state.
pub fn rotating_frame_map(
    lab_state: &[C64],
    basis: &HilbertBasis,
    lattice: &LatticeSpec,
    m: f64,
    t: f64,
) -> Result<Vec<C64>> {
    if lab_state.len() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: lab_state.len() });
    }
    if basis.n_cells() != lattice.n_cells {
        return Err(Error::BasisMismatch("basis and lattice sizes differ".into()));
    }
    let mut out = vec![C64::new(0.0, 0.0); 2 * lattice.n_cells];
    for site in 0..lattice.n_cells {
        for s in Spin::ALL {
            out[polariton_index(site, s)] = amplitude(basis, lab_state, site, s) * frame_phase(lattice, m, site, s, t);
        }
    }
    Ok(out)
}

/// Inverse of [`rotating_frame_map`] on the single-excitation sector.
pub fn polariton_to_lab(
    amps: &[C64],
    basis: &HilbertBasis,
    lattice: &LatticeSpec,
    m: f64,
    t: f64,
) -> Result<Vec<C64>> {
    if amps.len() != 2 * lattice.n_cells {
        return Err(Error::DimensionMismatch { expected: 2 * lattice.n_cells, got: amps.len() });
    }
    let mut psi = vec![C64::new(0.0, 0.0); basis.dim()];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for site in 0..lattice.n_cells {
        let q = basis.single_excitation(site, true);
        let p = basis.single_excitation(site, false);
        for s in Spin::ALL {
            let c = amps[polariton_index(site, s)] * frame_phase(lattice, m, site, s, t).conj();
            psi[q] += c * r;
            psi[p] += c * (s.sign() * r);
        }
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use crate::model::{build_basis, UnitCellParams};

    fn setup() -> (LatticeSpec, HilbertBasis) {
        let lat = LatticeSpec::new(
            3,
            UnitCellParams::from_mhz(6000.0, 200.0).unwrap(),
            UnitCellParams::from_mhz(6000.0, 100.0).unwrap(),
        )
        .unwrap();
        let b = build_basis(&lat, 2, 3).unwrap();
        (lat, b)
    }

    #[test]
    fn identity_at_zero_and_roundtrip() {
        let (lat, b) = setup();
        let amps: Vec<C64> = (0..6).map(|k| C64::new(0.1 * k as f64, -0.2)).collect();
        let psi = polariton_to_lab(&amps, &b, &lat, 0.3, 0.0).unwrap();
        let back = rotating_frame_map(&psi, &b, &lat, 0.3, 0.0).unwrap();
        for (x, y) in amps.iter().zip(&back) {
            assert!((x - y).norm() < 1e-15);
        }
        let psi = polariton_to_lab(&amps, &b, &lat, 0.3, 0.71).unwrap();
        let back = rotating_frame_map(&psi, &b, &lat, 0.3, 0.71).unwrap();
        for (x, y) in amps.iter().zip(&back) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn norm_equals_single_excitation_weight() {
        let (lat, b) = setup();
        let psi: Vec<C64> = (0..b.dim()).map(|k| C64::new((k as f64).sin(), (0.3 * k as f64).cos())).collect();
        let single: f64 = (0..b.dim()).filter(|&i| b.excitations(i) == 1).map(|i| psi[i].norm_sqr()).sum();
        let out = rotating_frame_map(&psi, &b, &lat, 1.0, 0.4).unwrap();
        assert!((norm(&out).powi(2) - single).abs() < 1e-12);
    }
}
