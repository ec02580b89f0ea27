//! Open-boundary spectra and edge states of the nodal chain.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defaults::Thresholds;
use crate::effective::{build_nodal_chain, chiral_operator, gauge_transform_state, polariton_index, GaugeDirection, NodalLoopParams};
use crate::linalg::{hermitian_eigen, inner};
use crate::model::Spin;
use crate::{Error, Result, C64};

#[derive(Clone, Debug)]
pub struct OpenChainSpectrum {
    pub params: NodalLoopParams,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, in polariton order (2·site + spin).
    pub vectors: DMatrix<C64>,
    /// Column indices of the mid-gap pair when flagged.
    pub midgap: Option<[usize; 2]>,
}

impl OpenChainSpectrum {
    /// The two states closest to zero energy, flagged or not.
    pub fn zero_pair(&self) -> [usize; 2] {
        let mut idx: Vec<usize> = (0..self.energies.len()).collect();
        idx.sort_by(|&a, &b| self.energies[a].abs().total_cmp(&self.energies[b].abs()));
        let mut p = [idx[0], idx[1]];
        p.sort_unstable();
        p
    }

    pub fn state(&self, col: usize) -> Vec<C64> {
        self.vectors.column(col).iter().copied().collect()
    }
}

/// Spectrum of the open chain at m' = m'(k_y, k_z) with default thresholds.
pub fn open_chain_spectrum(n_cells: usize, t0: f64, big_m: f64, d: f64, k_y: f64, k_z: f64) -> Result<OpenChainSpectrum> {
    if n_cells < 2 {
        return Err(Error::InvalidParameter(format!("open chain needs N >= 2, got {n_cells}")));
    }
    let p = NodalLoopParams::from_momentum(n_cells, t0, big_m, d, k_y, k_z)?;
    Ok(open_chain_spectrum_with(&p, &Thresholds::default()))
}

/// Mid-gap flag: exactly two levels with |E| < ε·t'0 and every other level
/// beyond `midgap_bulk_factor`·ε·t'0.
pub fn open_chain_spectrum_with(p: &NodalLoopParams, th: &Thresholds) -> OpenChainSpectrum {
    let (energies, vectors) = hermitian_eigen(&build_nodal_chain(p));
    let eps = th.midgap_energy * p.t0_eff;
    let inside: Vec<usize> = (0..energies.len()).filter(|&i| energies[i].abs() < eps).collect();
    let bulk = (0..energies.len()).filter(|i| !inside.contains(i)).map(|i| energies[i].abs()).fold(f64::INFINITY, f64::min);
    let midgap = (inside.len() == 2 && bulk > th.midgap_bulk_factor * eps).then(|| [inside[0], inside[1]]);
    OpenChainSpectrum { params: *p, energies, vectors, midgap }
}

/// Open-chain spectra along k_z at fixed k_y, one row per k_z.
pub fn spectrum_sweep(n_cells: usize, t0: f64, big_m: f64, d: f64, k_y: f64, k_z: &[f64]) -> Result<Vec<(f64, Vec<f64>, bool)>> {
    k_z.par_iter()
        .map(|&kz| open_chain_spectrum(n_cells, t0, big_m, d, k_y, kz).map(|s| (kz, s.energies, s.midgap.is_some())))
        .collect()
}

/// How the decay ratio q between neighbouring cells is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayLaw {
    /// q = tan(m'π / 8t'0).
    #[default]
    ClosedForm,
    /// q = m' / 2t'0, the zero-energy transfer ratio of the chain.
    TransferMatrix,
}

impl DecayLaw {
    pub fn ratio(self, m_eff: f64, t0: f64) -> f64 {
        match self {
            DecayLaw::ClosedForm => (m_eff * PI / (8.0 * t0)).tan(),
            DecayLaw::TransferMatrix => m_eff / (2.0 * t0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeStatePair {
    pub n_cells: usize,
    pub law: DecayLaw,
    /// Signed ratio; the amplitude on cell l carries q^{l−1}.
    pub q: f64,
    /// ln(1/|q|); infinite at q = 0.
    pub lambda: f64,
    pub norm: f64,
    /// ψ_L(l, α) = A q^{l−1} i^{l−1} for both spins.
    pub left: Vec<C64>,
    /// ψ_R(l, ↑) = −ψ_R(l, ↓) = A q^{N−l} i^{l−1}.
    pub right: Vec<C64>,
}

pub fn analytic_edge_states(n_cells: usize, m_eff: f64, t0: f64, law: DecayLaw) -> Result<EdgeStatePair> {
    if n_cells < 2 {
        return Err(Error::InvalidParameter(format!("edge states need N >= 2, got {n_cells}")));
    }
    if !(t0 > 0.0) {
        return Err(Error::InvalidParameter(format!("t0 must be positive, got {t0}")));
    }
    if m_eff.abs() >= 2.0 * t0 {
        return Err(Error::TrivialPhase { m_eff, two_t0: 2.0 * t0 });
    }
    let q = law.ratio(m_eff, t0);
    assert!(q.abs() < 1.0, "decay ratio {q} not below one");
    let q2 = q * q;
    let norm = ((1.0 - q2) / (2.0 * (1.0 - q2.powi(n_cells as i32)))).sqrt();
    let ipow = |k: usize| C64::i().powu(k as u32);
    let qpow = |k: usize| if k == 0 { 1.0 } else { q.powi(k as i32) };
    let mut left = vec![C64::new(0.0, 0.0); 2 * n_cells];
    let mut right = left.clone();
    for site in 0..n_cells {
        let l = ipow(site) * (norm * qpow(site));
        let r = ipow(site) * (norm * qpow(n_cells - 1 - site));
        left[polariton_index(site, Spin::Up)] = l;
        left[polariton_index(site, Spin::Down)] = l;
        right[polariton_index(site, Spin::Up)] = r;
        right[polariton_index(site, Spin::Down)] = -r;
    }
    let lambda = if q == 0.0 { f64::INFINITY } else { (1.0 / q.abs()).ln() };
    Ok(EdgeStatePair { n_cells, law, q, lambda, norm, left, right })
}

impl EdgeStatePair {
    /// Profiles with the i^{l−1} factor divided out; real for the analytic states.
    pub fn stripped(&self) -> Result<(Vec<C64>, Vec<C64>)> {
        Ok((
            gauge_transform_state(&self.left, GaugeDirection::Inverse)?,
            gauge_transform_state(&self.right, GaugeDirection::Inverse)?,
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeOverlap {
    /// |⟨ψ_num|ψ_ana⟩|² for the left and right edge.
    pub left: f64,
    pub right: f64,
    /// Weight of each analytic state inside the numeric zero-mode subspace,
    /// i.e. the overlap after the best unitary mixing of the pair.
    pub left_subspace: f64,
    pub right_subspace: f64,
    /// Numeric energies of the pair.
    pub energies: [f64; 2],
    /// Per cell √Σ_α |ψ_num − e^{iφ}ψ_ana|² after phase alignment.
    pub residual_left: Vec<f64>,
    pub residual_right: Vec<f64>,
    /// Numeric states split by S^x and phase-aligned to the analytic ones.
    #[serde(skip)]
    pub numeric_left: Vec<C64>,
    #[serde(skip)]
    pub numeric_right: Vec<C64>,
}

impl EdgeOverlap {
    pub fn min(&self) -> f64 {
        self.left.min(self.right)
    }
}

/// Compares the numeric zero-mode pair with the analytic states.
///
/// The pair is split into left/right by diagonalizing Σ_l S^x_l inside the
/// two-dimensional zero subspace; the +1 eigenvector is the left state.
pub fn edge_overlap(numeric: &OpenChainSpectrum, analytic: &EdgeStatePair) -> Result<EdgeOverlap> {
    let n = numeric.params.n_cells;
    if n != analytic.n_cells {
        return Err(Error::DimensionMismatch { expected: n, got: analytic.n_cells });
    }
    let pair = numeric.midgap.unwrap_or_else(|| numeric.zero_pair());
    let a = numeric.state(pair[0]);
    let b = numeric.state(pair[1]);
    let sx = chiral_operator(n);
    let mv = |v: &[C64]| -> Vec<C64> { (&sx * nalgebra::DVector::from_column_slice(v)).iter().copied().collect() };
    let (sa, sb) = (mv(&a), mv(&b));
    let m = Matrix2::new(inner(&a, &sa), inner(&a, &sb), inner(&b, &sa), inner(&b, &sb));
    let eig = nalgebra::SymmetricEigen::new(m);
    let top = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let combine = |k: usize| -> Vec<C64> {
        let (ca, cb) = (eig.eigenvectors[(0, k)], eig.eigenvectors[(1, k)]);
        a.iter().zip(&b).map(|(x, y)| x * ca + y * cb).collect()
    };
    let mut num_left = combine(top);
    let mut num_right = combine(1 - top);

    let subspace = |psi: &[C64]| inner(&a, psi).norm_sqr() + inner(&b, psi).norm_sqr();
    let align = |num: &mut Vec<C64>, ana: &[C64]| -> (f64, Vec<f64>) {
        let ov = inner(num, ana);
        if ov.norm() > 0.0 {
            let phase = ov / ov.norm();
            for x in num.iter_mut() {
                *x *= phase;
            }
        }
        let res = (0..n)
            .map(|site| {
                let i = polariton_index(site, Spin::Up);
                ((num[i] - ana[i]).norm_sqr() + (num[i + 1] - ana[i + 1]).norm_sqr()).sqrt()
            })
            .collect();
        (ov.norm_sqr(), res)
    };
    let (left, residual_left) = align(&mut num_left, &analytic.left);
    let (right, residual_right) = align(&mut num_right, &analytic.right);
    Ok(EdgeOverlap {
        left,
        right,
        left_subspace: subspace(&analytic.left),
        right_subspace: subspace(&analytic.right),
        energies: [numeric.energies[pair[0]], numeric.energies[pair[1]]],
        residual_left,
        residual_right,
        numeric_left: num_left,
        numeric_right: num_right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::m_prime;
    use crate::linalg::norm;

    #[test]
    fn zero_coupling_limit() {
        let e = analytic_edge_states(5, 0.0, 1.0, DecayLaw::ClosedForm).unwrap();
        assert_eq!(e.q, 0.0);
        assert!((e.norm - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((e.left[0].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(e.left[2..].iter().all(|x| x.norm() == 0.0));
        assert!((e.right[9].re + 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normalized_and_localized() {
        for law in [DecayLaw::ClosedForm, DecayLaw::TransferMatrix] {
            for m in [-1.5, -0.3, 0.824, 1.9] {
                let e = analytic_edge_states(12, m, 1.0, law).unwrap();
                assert!((norm(&e.left) - 1.0).abs() < 1e-10);
                assert!((norm(&e.right) - 1.0).abs() < 1e-10);
                for site in 0..11 {
                    let r = e.left[2 * site + 2].norm() / e.left[2 * site].norm();
                    assert!((r - e.q.abs()).abs() < 1e-12);
                }
            }
        }
        assert!(matches!(analytic_edge_states(4, 2.0, 1.0, DecayLaw::ClosedForm), Err(Error::TrivialPhase { .. })));
    }

    #[test]
    fn stripped_profiles_are_real() {
        let e = analytic_edge_states(8, 0.824, 1.0, DecayLaw::ClosedForm).unwrap();
        let (l, r) = e.stripped().unwrap();
        assert!(l.iter().chain(&r).all(|x| x.im.abs() < 1e-15));
    }

    #[test]
    fn transfer_ratio_is_exact_zero_mode_of_semi_infinite_chain() {
        let m = m_prime(0.0, 1.0, 0.0, 0.7 * PI);
        let p = NodalLoopParams::new(20, 1.0, m).unwrap();
        let h = build_nodal_chain(&p);
        let e = analytic_edge_states(20, m, 1.0, DecayLaw::TransferMatrix).unwrap();
        let hv = &h * nalgebra::DVector::from_vec(e.left.clone());
        // Only the far end leaks, by m'·A·q^{N−1}.
        let bulk: f64 = hv.iter().take(36).map(|x| x.norm()).fold(0.0, f64::max);
        assert!(bulk < 1e-14);
    }

    #[test]
    fn spectrum_flags_and_pairs() {
        let s = open_chain_spectrum(20, 1.0, 0.0, 1.0, 0.0, 0.7 * PI).unwrap();
        assert!(s.midgap.is_some());
        let t = open_chain_spectrum(20, 1.0, 0.0, 1.0, 0.0, 0.3 * PI).unwrap();
        assert!(t.midgap.is_none());
        for sp in [&s, &t] {
            let n = sp.energies.len();
            for i in 0..n {
                assert!((sp.energies[i] + sp.energies[n - 1 - i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn self_overlap_and_mirror() {
        let m = 0.824;
        let e = analytic_edge_states(10, m, 1.0, DecayLaw::TransferMatrix).unwrap();
        let s = open_chain_spectrum_with(&NodalLoopParams::new(10, 1.0, m).unwrap(), &Thresholds::default());
        let o = edge_overlap(&s, &e).unwrap();
        assert!(o.min() > 0.9999);
        // Mirror l → N+1−l with ↑↔↓ maps |left| onto |right|.
        for site in 0..10 {
            let mirror = 9 - site;
            assert!((e.left[2 * site].norm() - e.right[2 * mirror + 1].norm()).abs() < 1e-14);
        }
    }
}
