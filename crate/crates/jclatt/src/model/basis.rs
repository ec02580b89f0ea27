use std::collections::HashMap;
use std::sync::Arc;

use super::cell::LatticeSpec;
use crate::{Error, Result};

/// Ladder operator acting on one site.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    A(usize),
    Adag(usize),
    SigmaPlus(usize),
    SigmaMinus(usize),
}

#[derive(Debug)]
struct BasisData {
    n_cells: usize,
    n_ph_max: usize,
    n_exc_max: usize,
    // Site codes, n_cells per state: code = 2·photons + qubit.
    codes: Vec<u8>,
    index: HashMap<Box<[u8]>, usize>,
}

/// Truncated product basis of N (photon, qubit) sites.
///
/// Keeps states with at most `n_ph_max` photons per site and at most
/// `n_exc_max` excitations in total. States are ordered by total excitation
/// number, then lexicographically by site codes (site 0 most significant),
/// so the global ground state has index 0. Cloning is cheap.
#[derive(Clone, Debug)]
pub struct HilbertBasis {
    inner: Arc<BasisData>,
}

impl PartialEq for HilbertBasis {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.n_cells() == other.n_cells()
                && self.n_ph_max() == other.n_ph_max()
                && self.n_exc_max() == other.n_exc_max())
    }
}

pub fn build_basis(lattice: &LatticeSpec, n_ph_max: usize, n_exc_max: usize) -> Result<HilbertBasis> {
    HilbertBasis::new(lattice.n_cells, n_ph_max, n_exc_max)
}

impl HilbertBasis {
    pub fn new(n_cells: usize, n_ph_max: usize, n_exc_max: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidParameter("n_cells must be positive".into()));
        }
        if n_ph_max < 1 || n_exc_max < 1 {
            return Err(Error::InvalidParameter("n_ph_max and n_exc_max must be at least 1".into()));
        }
        if n_ph_max > 100 {
            return Err(Error::InvalidParameter(format!("n_ph_max = {n_ph_max} is unreasonable")));
        }
        if n_exc_max > n_cells * (n_ph_max + 1) {
            return Err(Error::InvalidParameter(format!(
                "n_exc_max = {n_exc_max} exceeds the maximum possible {} excitations",
                n_cells * (n_ph_max + 1)
            )));
        }
        let mut codes = Vec::new();
        let mut current = vec![0u8; n_cells];
        for total in 0..=n_exc_max {
            fill(&mut current, 0, total, n_ph_max, &mut codes);
        }
        let dim = codes.len() / n_cells;
        let mut index = HashMap::with_capacity(dim);
        for i in 0..dim {
            index.insert(codes[i * n_cells..(i + 1) * n_cells].into(), i);
        }
        Ok(HilbertBasis { inner: Arc::new(BasisData { n_cells, n_ph_max, n_exc_max, codes, index }) })
    }

    pub fn dim(&self) -> usize {
        self.inner.codes.len() / self.inner.n_cells
    }

    pub fn n_cells(&self) -> usize {
        self.inner.n_cells
    }

    pub fn n_ph_max(&self) -> usize {
        self.inner.n_ph_max
    }

    pub fn n_exc_max(&self) -> usize {
        self.inner.n_exc_max
    }

    /// Site codes of state `i`.
    pub fn state(&self, i: usize) -> &[u8] {
        let n = self.inner.n_cells;
        &self.inner.codes[i * n..(i + 1) * n]
    }

    pub fn index_of(&self, codes: &[u8]) -> Option<usize> {
        self.inner.index.get(codes).copied()
    }

    pub fn photons(&self, i: usize, site: usize) -> usize {
        (self.state(i)[site] >> 1) as usize
    }

    pub fn excited(&self, i: usize, site: usize) -> bool {
        self.state(i)[site] & 1 == 1
    }

    pub fn excitations(&self, i: usize) -> usize {
        self.state(i).iter().map(|&c| ((c >> 1) + (c & 1)) as usize).sum()
    }

    /// Index of |0e⟩ (qubit) or |1g⟩ (photon) at `site`, all other sites in |0g⟩.
    pub fn single_excitation(&self, site: usize, qubit: bool) -> usize {
        let mut codes = vec![0u8; self.n_cells()];
        codes[site] = if qubit { 1 } else { 2 };
        self.index_of(&codes).expect("single-excitation states are always in the basis")
    }

    /// Applies a product of ladder operators (rightmost first) to state `i`
    /// without intermediate truncation. Returns the target index and the
    /// amplitude, or `None` if the result vanishes or leaves the basis.
    pub fn apply_word(&self, i: usize, word: &[Ladder]) -> Option<(usize, f64)> {
        let mut codes: Vec<u16> = self.state(i).iter().map(|&c| c as u16).collect();
        let mut amp = 1.0;
        for op in word.iter().rev() {
            match *op {
                Ladder::A(s) => {
                    let n = codes[s] >> 1;
                    if n == 0 {
                        return None;
                    }
                    amp *= (n as f64).sqrt();
                    codes[s] -= 2;
                }
                Ladder::Adag(s) => {
                    let n = codes[s] >> 1;
                    amp *= (n as f64 + 1.0).sqrt();
                    codes[s] += 2;
                }
                Ladder::SigmaPlus(s) => {
                    if codes[s] & 1 == 1 {
                        return None;
                    }
                    codes[s] |= 1;
                }
                Ladder::SigmaMinus(s) => {
                    if codes[s] & 1 == 0 {
                        return None;
                    }
                    codes[s] &= !1;
                }
            }
        }
        if codes.iter().any(|&c| (c >> 1) as usize > self.n_ph_max()) {
            return None;
        }
        let narrow: Vec<u8> = codes.iter().map(|&c| c as u8).collect();
        self.index_of(&narrow).map(|j| (j, amp))
    }

    /// Human-readable label such as `0g|1e|0g`.
    pub fn label(&self, i: usize) -> String {
        self.state(i)
            .iter()
            .map(|&c| format!("{}{}", c >> 1, if c & 1 == 1 { 'e' } else { 'g' }))
            .collect::<Vec<_>>()
            .join("|")
    }
}

fn fill(current: &mut [u8], site: usize, remaining: usize, n_ph_max: usize, out: &mut Vec<u8>) {
    if site == current.len() {
        if remaining == 0 {
            out.extend_from_slice(current);
        }
        return;
    }
    for n in 0..=n_ph_max {
        for q in 0..=1usize {
            let e = n + q;
            if e > remaining {
                continue;
            }
            current[site] = (2 * n + q) as u8;
            fill(current, site + 1, remaining - e, n_ph_max, out);
        }
    }
    current[site] = 0;
}
