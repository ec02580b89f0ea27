use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// `Forward` applies H ↦ V†HV and ψ ↦ V†ψ (original model → nodal chain);
/// `Inverse` applies H ↦ VHV† and ψ ↦ Vψ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeDirection {
    Forward,
    Inverse,
}

/// V = Σ_l (−i)^{l−1} I_l on the 2N polariton space.
pub fn gauge_matrix(n_cells: usize) -> DMatrix<C64> {
    let mut v = DMatrix::zeros(2 * n_cells, 2 * n_cells);
    for site in 0..n_cells {
        let f = site_factor(site);
        v[(2 * site, 2 * site)] = f;
        v[(2 * site + 1, 2 * site + 1)] = f;
    }
    v
}

/// (−i)^site.
fn site_factor(site: usize) -> C64 {
    match site % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

fn check_dim(n: usize) -> Result<usize> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: n + n % 2, got: n });
    }
    Ok(n / 2)
}

pub fn gauge_transform_state(psi: &[C64], dir: GaugeDirection) -> Result<Vec<C64>> {
    check_dim(psi.len())?;
    Ok(psi
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = site_factor(i / 2);
            match dir {
                GaugeDirection::Forward => f.conj() * x,
                GaugeDirection::Inverse => f * x,
            }
        })
        .collect())
}

pub fn gauge_transform_operator(h: &DMatrix<C64>, dir: GaugeDirection) -> Result<DMatrix<C64>> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: h.ncols() });
    }
    check_dim(h.nrows())?;
    let mut out = h.clone();
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            let (fi, fj) = (site_factor(i / 2), site_factor(j / 2));
            out[(i, j)] = match dir {
                GaugeDirection::Forward => fi.conj() * h[(i, j)] * fj,
                GaugeDirection::Inverse => fi * h[(i, j)] * fj.conj(),
            };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::chiral_operator;
    use crate::linalg::max_abs_diff;

    #[test]
    fn unitary_and_first_site_fixed() {
        let v = gauge_matrix(5);
        let id = DMatrix::<C64>::identity(10, 10);
        assert!(max_abs_diff(&(v.adjoint() * &v), &id) < 1e-15);
        assert_eq!(v[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(v[(1, 1)], C64::new(1.0, 0.0));
    }

    #[test]
    fn site_local_operators_invariant() {
        let s = chiral_operator(4);
        let mapped = gauge_transform_operator(&s, GaugeDirection::Forward).unwrap();
        assert!(max_abs_diff(&mapped, &s) < 1e-15);
    }

    #[test]
    fn roundtrip_and_mismatch() {
        let psi: Vec<C64> = (0..6).map(|k| C64::new(k as f64, 1.0)).collect();
        let f = gauge_transform_state(&psi, GaugeDirection::Forward).unwrap();
        let b = gauge_transform_state(&f, GaugeDirection::Inverse).unwrap();
        for (x, y) in psi.iter().zip(&b) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!(gauge_transform_state(&psi[..5], GaugeDirection::Forward).is_err());
    }
}
