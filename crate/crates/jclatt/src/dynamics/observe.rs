use serde::Serialize;

use crate::model::{HilbertBasis, LatticeSpec, Spin};
use crate::{Error, Result, C64};

/// Computes the recorded observables from lab-frame amplitudes or density
/// matrix elements.
#[derive(Clone, Debug)]
pub struct Observer {
    basis: HilbertBasis,
    n_cells: usize,
    /// (site, photons, excited) for every occupied site of every state.
    occupied: Vec<Vec<(u16, u8, bool)>>,
    /// |0e⟩_l and |1g⟩_l indices per site.
    single: Vec<(usize, usize)>,
    /// E_{l,α} − s_α m per site, (↑, ↓).
    frame: Vec<(f64, f64)>,
}

impl Observer {
    /// `zeeman` is the frame offset m used for the chiral center.
    pub fn new(basis: &HilbertBasis, lattice: &LatticeSpec, zeeman: f64) -> Result<Self> {
        if basis.n_cells() != lattice.n_cells {
            return Err(Error::BasisMismatch("basis and lattice sizes differ".into()));
        }
        let n = lattice.n_cells;
        let occupied = (0..basis.dim())
            .map(|i| {
                (0..n)
                    .filter_map(|s| {
                        let (p, e) = (basis.photons(i, s), basis.excited(i, s));
                        (p > 0 || e).then_some((s as u16, p as u8, e))
                    })
                    .collect()
            })
            .collect();
        let single = (0..n).map(|s| (basis.single_excitation(s, true), basis.single_excitation(s, false))).collect();
        let frame = (0..n)
            .map(|s| {
                let lv = lattice.levels(s);
                (lv.energy(Spin::Up) - zeeman, lv.energy(Spin::Down) + zeeman)
            })
            .collect();
        Ok(Observer { basis: basis.clone(), n_cells: n, occupied, single, frame })
    }

    pub fn basis(&self) -> &HilbertBasis {
        &self.basis
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Per-site ⟨σ⁺σ⁻⟩ and ⟨a†a⟩ from state populations.
    pub(crate) fn populations(&self, pop: impl Fn(usize) -> f64) -> (Vec<f64>, Vec<f64>) {
        let mut q = vec![0.0; self.n_cells];
        let mut p = vec![0.0; self.n_cells];
        for (i, occ) in self.occupied.iter().enumerate() {
            if occ.is_empty() {
                continue;
            }
            let w = pop(i);
            if w == 0.0 {
                continue;
            }
            for &(s, n, e) in occ {
                p[s as usize] += w * n as f64;
                if e {
                    q[s as usize] += w;
                }
            }
        }
        (q, p)
    }

    /// P̄_d(t) = Σ_l l·2Re(c*_{l↑} c_{l↓}) with rotating-frame amplitudes.
    /// `elem(i, j)` returns ρ_ij (or ψ_i ψ_j*).
    pub(crate) fn chiral(&self, t: f64, elem: impl Fn(usize, usize) -> C64) -> f64 {
        let mut total = 0.0;
        for site in 0..self.n_cells {
            let (q, p) = self.single[site];
            // ⟨↓|ρ|↑⟩ with |↑⟩, |↓⟩ = (|0e⟩ ± |1g⟩)/√2.
            let down_up = (elem(q, q) + elem(q, p) - elem(p, q) - elem(p, p)) * 0.5;
            let (eu, ed) = self.frame[site];
            let rot = C64::from_polar(1.0, (ed - eu) * t);
            total += (site + 1) as f64 * 2.0 * (down_up * rot).re;
        }
        total
    }

    pub(crate) fn sample_pure(&self, t: f64, psi: &[C64], rec: &mut TrajectoryRecord) {
        let (q, p) = self.populations(|i| psi[i].norm_sqr());
        let chi = self.chiral(t, |i, j| psi[i] * psi[j].conj());
        let norm = psi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        rec.push(t, q, p, chi, norm);
    }
}

/// Time series produced by an evolution.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// qubit[k][l] = ⟨σ⁺_l σ⁻_l⟩ at times[k].
    pub qubit: Vec<Vec<f64>>,
    /// photon[k][l] = ⟨a†_l a_l⟩.
    pub photon: Vec<Vec<f64>>,
    /// Rotating-frame chiral center P̄_d.
    pub chiral: Vec<f64>,
    /// ‖ψ‖ for pure runs, tr ρ for density-matrix runs.
    pub norm: Vec<f64>,
    /// tr ρ² (density-matrix runs only).
    pub purity: Vec<f64>,
    pub steps: usize,
    pub dt: f64,
    /// Largest |norm − 1| seen at any recorded time.
    pub max_drift: f64,
    /// 1 − |⟨ψ_dt|ψ_dt/2⟩|² when the half-step check ran.
    pub convergence_infidelity: Option<f64>,
    /// Most negative eigenvalue found by the positivity checks.
    pub min_eigenvalue: Option<f64>,
    /// Final lab-frame state of a pure run.
    #[serde(skip)]
    pub final_state: Option<Vec<C64>>,
}

impl TrajectoryRecord {
    pub(crate) fn push(&mut self, t: f64, q: Vec<f64>, p: Vec<f64>, chi: f64, norm: f64) {
        self.times.push(t);
        self.qubit.push(q);
        self.photon.push(p);
        self.chiral.push(chi);
        self.max_drift = self.max_drift.max((norm - 1.0).abs());
        self.norm.push(norm);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Polariton density ⟨σ⁺σ⁻ + a†a⟩ per site at record k.
    pub fn density(&self, k: usize) -> Vec<f64> {
        self.qubit[k].iter().zip(&self.photon[k]).map(|(a, b)| a + b).collect()
    }

    pub fn final_density(&self) -> Vec<f64> {
        self.density(self.len() - 1)
    }

    /// Density time series of one site.
    pub fn site_density(&self, site: usize) -> Vec<f64> {
        (0..self.len()).map(|k| self.qubit[k][site] + self.photon[k][site]).collect()
    }

    /// Trapezoidal time average of P̄_d over the whole record, and the
    /// change of that running average over the last quarter of the window.
    pub fn chiral_center(&self) -> (f64, f64) {
        let n = self.len();
        if n < 2 {
            return (self.chiral.first().copied().unwrap_or(0.0), 0.0);
        }
        let t_end = self.times[n - 1];
        let mut integral = 0.0;
        let mut at_three_quarters = None;
        for k in 1..n {
            integral += 0.5 * (self.chiral[k] + self.chiral[k - 1]) * (self.times[k] - self.times[k - 1]);
            if at_three_quarters.is_none() && self.times[k] >= 0.75 * t_end {
                at_three_quarters = Some(integral / (self.times[k] - self.times[0]));
            }
        }
        let centre = integral / (t_end - self.times[0]);
        (centre, (centre - at_three_quarters.unwrap_or(centre)).abs())
    }
}
