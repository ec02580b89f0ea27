use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lattice::polariton_index;
use crate::model::Spin;
use crate::{Error, Result, C64};

/// Parameters of the real-space nodal chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodalLoopParams {
    pub n_cells: usize,
    /// t'0 (rad/μs).
    pub t0_eff: f64,
    /// m'(k_y, k_z) (rad/μs).
    pub m_eff: f64,
}

impl NodalLoopParams {
    pub fn new(n_cells: usize, t0_eff: f64, m_eff: f64) -> Result<Self> {
        if !(t0_eff > 0.0) {
            return Err(Error::InvalidParameter(format!("t0_eff must be positive, got {t0_eff}")));
        }
        if n_cells == 0 {
            return Err(Error::InvalidParameter("n_cells must be positive".into()));
        }
        Ok(NodalLoopParams { n_cells, t0_eff, m_eff })
    }

    /// m' = M + 2d(cos k_y + cos k_z).
    pub fn from_momentum(n_cells: usize, t0_eff: f64, big_m: f64, d: f64, ky: f64, kz: f64) -> Result<Self> {
        Self::new(n_cells, t0_eff, m_prime(big_m, d, ky, kz))
    }
}

pub fn m_prime(big_m: f64, d: f64, ky: f64, kz: f64) -> f64 {
    big_m + 2.0 * d * (ky.cos() + kz.cos())
}

/// m'·S^z on site; link block i t'0 (↑↑, ↑↓) and −i t'0 (↓↑, ↓↓) plus conjugates.
pub fn build_nodal_chain(p: &NodalLoopParams) -> DMatrix<C64> {
    let n = 2 * p.n_cells;
    let mut h = DMatrix::zeros(n, n);
    for site in 0..p.n_cells {
        for s in Spin::ALL {
            let i = polariton_index(site, s);
            h[(i, i)] = C64::new(p.m_eff * s.sign(), 0.0);
        }
    }
    for l in 0..p.n_cells.saturating_sub(1) {
        for a in Spin::ALL {
            for b in Spin::ALL {
                let v = C64::new(0.0, a.sign() * p.t0_eff);
                let i = polariton_index(l, a);
                let j = polariton_index(l + 1, b);
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
    }
    h
}

/// Σ_l S^x_l on the 2N space (block-diagonal σ_x).
pub fn chiral_operator(n_cells: usize) -> DMatrix<C64> {
    chiral_weighted(n_cells, |_| 1.0)
}

/// P_d = Σ_l l·S^x_l with 1-based weights l.
pub fn chiral_position_operator(n_cells: usize) -> DMatrix<C64> {
    chiral_weighted(n_cells, |site| (site + 1) as f64)
}

fn chiral_weighted(n_cells: usize, w: impl Fn(usize) -> f64) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(2 * n_cells, 2 * n_cells);
    for site in 0..n_cells {
        let u = polariton_index(site, Spin::Up);
        let d = polariton_index(site, Spin::Down);
        m[(u, d)] = C64::new(w(site), 0.0);
        m[(d, u)] = C64::new(w(site), 0.0);
    }
    m
}
