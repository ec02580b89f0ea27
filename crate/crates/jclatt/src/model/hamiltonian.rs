use super::basis::{HilbertBasis, Ladder};
use super::cell::LatticeSpec;
use super::drive::DriveSchedule;
use super::sparse::SparseMatrix;
use crate::{Error, Result, C64};

/// A Hermitian operator on a truncated basis.
#[derive(Clone, Debug)]
pub struct LatticeOperator {
    basis: HilbertBasis,
    matrix: SparseMatrix,
}

impl LatticeOperator {
    pub fn new(basis: HilbertBasis, matrix: SparseMatrix) -> Result<Self> {
        if matrix.dim() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), got: matrix.dim() });
        }
        Ok(LatticeOperator { basis, matrix })
    }

    pub fn basis(&self) -> &HilbertBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.matrix
    }

    /// ‖H − H†‖_max / ‖H‖_max (0 for the zero operator).
    pub fn hermiticity_rel(&self) -> f64 {
        let scale = self.matrix.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            self.matrix.hermiticity_error() / scale
        }
    }

    /// max |H_ij| over entries that connect different excitation numbers,
    /// i.e. ‖[H, N_exc]‖_max up to integer factors.
    pub fn excitation_leak(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.matrix.dim() {
            let ni = self.basis.excitations(i);
            for (j, v) in self.matrix.row(i) {
                if self.basis.excitations(j) != ni {
                    worst = worst.max(v.norm());
                }
            }
        }
        worst
    }
}

/// H(t) = H_static + Σ_l J_l(t)·V_l with disjoint sparsity patterns.
///
/// Every stored entry carries the index of the term that scales it: 0 for
/// the static part, l+1 for link l. This lets the propagator assemble any
/// linear combination of H at several times in one pass over the entries.
#[derive(Clone, Debug)]
pub struct DrivenHamiltonian {
    basis: Option<HilbertBasis>,
    pattern: SparseMatrix,
    term: Vec<u32>,
    schedule: DriveSchedule,
    include_counter_rotating: bool,
}

impl DrivenHamiltonian {
    /// Lab-frame JC-lattice Hamiltonian. With `include_counter_rotating`,
    /// σ⁺a† + σ⁻a on every site and J_l(a†_l a†_{l+1} + a_l a_{l+1}) on every
    /// link are added.
    pub fn lab(
        lattice: &LatticeSpec,
        schedule: &DriveSchedule,
        basis: &HilbertBasis,
        include_counter_rotating: bool,
    ) -> Result<Self> {
        if basis.n_cells() != lattice.n_cells {
            return Err(Error::BasisMismatch(format!(
                "basis has {} cells, lattice has {}",
                basis.n_cells(),
                lattice.n_cells
            )));
        }
        if schedule.n_links() != lattice.n_links() {
            return Err(Error::BasisMismatch(format!(
                "schedule has {} links, lattice has {}",
                schedule.n_links(),
                lattice.n_links()
            )));
        }
        let n = lattice.n_cells;
        let mut trip: Vec<(usize, usize, C64, u32)> = Vec::new();
        let push = |i: usize, word: &[Ladder], coef: f64, term: u32, trip: &mut Vec<_>| {
            if let Some((j, amp)) = basis.apply_word(i, word) {
                trip.push((j, i, C64::new(coef * amp, 0.0), term));
            }
        };
        for i in 0..basis.dim() {
            for site in 0..n {
                let cell = lattice.cell(site);
                let occ = basis.photons(i, site) + basis.excited(i, site) as usize;
                if occ > 0 {
                    trip.push((i, i, C64::new(cell.omega * occ as f64, 0.0), 0));
                }
                push(i, &[Ladder::SigmaPlus(site), Ladder::A(site)], cell.g, 0, &mut trip);
                push(i, &[Ladder::SigmaMinus(site), Ladder::Adag(site)], cell.g, 0, &mut trip);
                if include_counter_rotating {
                    push(i, &[Ladder::SigmaPlus(site), Ladder::Adag(site)], cell.g, 0, &mut trip);
                    push(i, &[Ladder::SigmaMinus(site), Ladder::A(site)], cell.g, 0, &mut trip);
                }
            }
            for link in 0..lattice.n_links() {
                let term = link as u32 + 1;
                let (l, r) = (link, link + 1);
                push(i, &[Ladder::Adag(l), Ladder::A(r)], 1.0, term, &mut trip);
                push(i, &[Ladder::Adag(r), Ladder::A(l)], 1.0, term, &mut trip);
                if include_counter_rotating {
                    push(i, &[Ladder::Adag(l), Ladder::Adag(r)], 1.0, term, &mut trip);
                    push(i, &[Ladder::A(l), Ladder::A(r)], 1.0, term, &mut trip);
                }
            }
        }
        let (pattern, term) = assemble_tagged(basis.dim(), trip);
        Ok(DrivenHamiltonian {
            basis: Some(basis.clone()),
            pattern,
            term,
            schedule: schedule.clone(),
            include_counter_rotating,
        })
    }

    /// Time-independent Hamiltonian (e.g. an effective polariton model).
    pub fn stationary(matrix: SparseMatrix) -> Self {
        let term = vec![0; matrix.nnz()];
        DrivenHamiltonian {
            basis: None,
            pattern: matrix,
            term,
            schedule: DriveSchedule::empty(0),
            include_counter_rotating: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn basis(&self) -> Option<&HilbertBasis> {
        self.basis.as_ref()
    }

    pub fn schedule(&self) -> &DriveSchedule {
        &self.schedule
    }

    pub fn includes_counter_rotating(&self) -> bool {
        self.include_counter_rotating
    }

    /// Number of scalar coefficients (static term included).
    pub fn n_terms(&self) -> usize {
        1 + self.schedule.n_links()
    }

    pub fn pattern(&self) -> &SparseMatrix {
        &self.pattern
    }

    pub fn max_drive_frequency(&self) -> f64 {
        self.schedule.max_frequency()
    }

    /// out[0] = 1, out[l+1] = J_l(t).
    pub fn coefficients(&self, t: f64, out: &mut [f64]) {
        out[0] = 1.0;
        for (l, o) in out.iter_mut().skip(1).enumerate() {
            *o = self.schedule.value(l, t);
        }
    }

    /// Values of Σ_k weights[k]·H_k on the stored pattern.
    pub fn assemble(&self, weights: &[f64], out: &mut [C64]) {
        for ((o, v), &k) in out.iter_mut().zip(self.pattern.values()).zip(&self.term) {
            *o = v * weights[k as usize];
        }
    }

    pub fn at(&self, t: f64) -> SparseMatrix {
        let mut w = vec![0.0; self.n_terms()];
        self.coefficients(t, &mut w);
        let mut vals = vec![C64::new(0.0, 0.0); self.pattern.nnz()];
        self.assemble(&w, &mut vals);
        self.pattern.with_values(vals)
    }

    /// The term with index `k` alone (0 = static part, l+1 = link l operator).
    pub fn term_matrix(&self, k: usize) -> SparseMatrix {
        let mut w = vec![0.0; self.n_terms()];
        w[k] = 1.0;
        let mut vals = vec![C64::new(0.0, 0.0); self.pattern.nnz()];
        self.assemble(&w, &mut vals);
        let mut t = Vec::new();
        for i in 0..self.dim() {
            let (a, b) = (self.pattern.row_ptr()[i], self.pattern.row_ptr()[i + 1]);
            for idx in a..b {
                if vals[idx] != C64::new(0.0, 0.0) {
                    t.push((i, self.pattern.cols()[idx], vals[idx]));
                }
            }
        }
        SparseMatrix::from_triplets(self.dim(), t)
    }
}

fn assemble_tagged(dim: usize, mut trip: Vec<(usize, usize, C64, u32)>) -> (SparseMatrix, Vec<u32>) {
    trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut merged: Vec<(usize, usize, C64, u32)> = Vec::with_capacity(trip.len());
    for t in trip {
        match merged.last_mut() {
            Some(last) if last.0 == t.0 && last.1 == t.1 => {
                assert_eq!(last.3, t.3, "entry ({}, {}) shared by two terms", t.0, t.1);
                last.2 += t.2;
            }
            _ => merged.push(t),
        }
    }
    merged.retain(|t| t.2 != C64::new(0.0, 0.0));
    let term = merged.iter().map(|t| t.3).collect();
    let m = SparseMatrix::from_triplets(dim, merged.into_iter().map(|t| (t.0, t.1, t.2)).collect());
    (m, term)
}

/// Snapshot of the lab Hamiltonian at time t.
pub fn build_lab_hamiltonian(
    lattice: &LatticeSpec,
    schedule: &DriveSchedule,
    basis: &HilbertBasis,
    t: f64,
    include_counter_rotating: bool,
) -> Result<LatticeOperator> {
    let h = DrivenHamiltonian::lab(lattice, schedule, basis, include_counter_rotating)?;
    LatticeOperator::new(basis.clone(), h.at(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;
    use crate::model::{build_basis, nodal_drive, NodalPhaseConvention, UnitCellParams};
    use crate::units::mhz;

    fn nodal(n: usize) -> LatticeSpec {
        LatticeSpec::new(
            n,
            UnitCellParams::from_mhz(6000.0, 200.0).unwrap(),
            UnitCellParams::from_mhz(6000.0, 100.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_cell_jc_levels() {
        let c = UnitCellParams::from_mhz(6000.0, 300.0).unwrap();
        let lat = LatticeSpec::new(1, c, c).unwrap();
        let b = build_basis(&lat, 1, 2).unwrap();
        let h = build_lab_hamiltonian(&lat, &DriveSchedule::empty(0), &b, 0.0, false).unwrap();
        let d = h.matrix().to_dense();
        let block = d.view((1, 1), (2, 2)).into_owned();
        let (e, _) = hermitian_eigen(&block);
        assert!((e[0] - (c.omega - c.g)).abs() < 1e-9);
        assert!((e[1] - (c.omega + c.g)).abs() < 1e-9);
    }

    #[test]
    fn hermitian_and_conserving() {
        let lat = nodal(4);
        let b = build_basis(&lat, 2, 3).unwrap();
        let d = nodal_drive(&lat, mhz(3.0), mhz(2.0), NodalPhaseConvention::Corrected).unwrap();
        for t in [0.0, 0.0123, 0.377] {
            let off = build_lab_hamiltonian(&lat, &d, &b, t, false).unwrap();
            assert!(off.hermiticity_rel() < 1e-12);
            assert_eq!(off.excitation_leak(), 0.0);
            let on = build_lab_hamiltonian(&lat, &d, &b, t, true).unwrap();
            assert!(on.hermiticity_rel() < 1e-12);
            assert!(on.excitation_leak() > 0.0);
        }
    }

    #[test]
    fn basis_mismatch() {
        let lat = nodal(3);
        let b = build_basis(&nodal(4), 1, 1).unwrap();
        assert!(build_lab_hamiltonian(&lat, &DriveSchedule::empty(2), &b, 0.0, false).is_err());
    }
}
