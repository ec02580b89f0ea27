use std::f64::consts::FRAC_1_SQRT_2;

use super::basis::{HilbertBasis, Ladder};
use super::cell::Spin;
use super::hamiltonian::LatticeOperator;
use super::sparse::SparseMatrix;
use crate::{Result, C64};

/// Dressed single-site operators embedded in the full basis.
#[derive(Clone, Debug)]
pub struct PolaritonOperators {
    pub up_up: LatticeOperator,
    pub down_down: LatticeOperator,
    pub up_down: LatticeOperator,
    pub sx: LatticeOperator,
    pub sz: LatticeOperator,
}

/// Lab-frame vector of |α⟩_site = (|0e⟩ ± |1g⟩)/√2 with every other site in |0g⟩.
pub fn polariton_state(basis: &HilbertBasis, site: usize, spin: Spin) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); basis.dim()];
    v[basis.single_excitation(site, true)] = C64::new(FRAC_1_SQRT_2, 0.0);
    v[basis.single_excitation(site, false)] = C64::new(spin.sign() * FRAC_1_SQRT_2, 0.0);
    v
}

/// ⟨α|_site amplitude of a lab state.
pub fn polariton_amplitude(basis: &HilbertBasis, psi: &[C64], site: usize, spin: Spin) -> C64 {
    let q = psi[basis.single_excitation(site, true)];
    let p = psi[basis.single_excitation(site, false)];
    (q + spin.sign() * p) * FRAC_1_SQRT_2
}

fn outer(basis: &HilbertBasis, site: usize, a: Spin, b: Spin) -> SparseMatrix {
    let qa = basis.single_excitation(site, true);
    let pa = basis.single_excitation(site, false);
    let ket = [(qa, FRAC_1_SQRT_2), (pa, a.sign() * FRAC_1_SQRT_2)];
    let bra = [(qa, FRAC_1_SQRT_2), (pa, b.sign() * FRAC_1_SQRT_2)];
    let mut t = Vec::new();
    for &(i, x) in &ket {
        for &(j, y) in &bra {
            t.push((i, j, C64::new(x * y, 0.0)));
        }
    }
    SparseMatrix::from_triplets(basis.dim(), t)
}

pub fn polariton_projectors(basis: &HilbertBasis, site: usize) -> Result<PolaritonOperators> {
    if site >= basis.n_cells() {
        return Err(crate::Error::InvalidParameter(format!("site {site} out of range")));
    }
    let uu = outer(basis, site, Spin::Up, Spin::Up);
    let dd = outer(basis, site, Spin::Down, Spin::Down);
    let ud = outer(basis, site, Spin::Up, Spin::Down);
    let du = outer(basis, site, Spin::Down, Spin::Up);
    let sx = ud.add(&du);
    let sz = uu.add(&dd.scaled(C64::new(-1.0, 0.0)));
    let op = |m| LatticeOperator::new(basis.clone(), m);
    Ok(PolaritonOperators { up_up: op(uu)?, down_down: op(dd)?, up_down: op(ud)?, sx: op(sx)?, sz: op(sz)? })
}

/// ⟨α|_0 a†_0 a_1 |α'⟩_1 evaluated on a two-site basis from the dressed-state
/// definitions. Equals s_α·s_α'/2.
pub fn dressed_hopping_element(from: Spin, to: Spin) -> f64 {
    let basis = HilbertBasis::new(2, 1, 1).expect("two-site basis");
    let ket = polariton_state(&basis, 1, to);
    let bra = polariton_state(&basis, 0, from);
    let mut moved = vec![C64::new(0.0, 0.0); basis.dim()];
    for (i, amp) in ket.iter().enumerate() {
        if let Some((j, a)) = basis.apply_word(i, &[Ladder::Adag(0), Ladder::A(1)]) {
            moved[j] += amp * a;
        }
    }
    crate::linalg::inner(&bra, &moved).re
}
