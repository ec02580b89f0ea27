use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::IntegratorConfig;
use super::lindblad::{evolve_lindblad_from_state, NoiseSpec};
use super::observe::{Observer, TrajectoryRecord};
use super::pure::{evolve_pure, evolve_pure_sampled};
use crate::defaults::{self, Thresholds};
use crate::effective::{m_prime, resonant_tone};
use crate::model::{
    build_basis, nodal_drive, polariton_amplitude, polariton_state, DriveSchedule, DrivenHamiltonian, HilbertBasis,
    LatticeSpec, NodalPhaseConvention, Spin, UnitCellParams,
};
use crate::units::mhz;
use crate::{Error, Result, C64};

/// Two-cell A–B lattice for the frequency-addressing test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiSetup {
    pub omega_a_mhz: f64,
    pub g_a_mhz: f64,
    pub omega_b_mhz: f64,
    pub g_b_mhz: f64,
    pub t0_mhz: f64,
    pub n_ph_max: usize,
    pub n_exc_max: usize,
    pub counter_rotating: bool,
    /// Number of Rabi cycles to simulate.
    pub cycles: usize,
}

impl Default for RabiSetup {
    fn default() -> Self {
        RabiSetup {
            omega_a_mhz: 6000.0,
            g_a_mhz: 300.0,
            omega_b_mhz: 5650.0,
            g_b_mhz: 270.0,
            t0_mhz: 3.0,
            n_ph_max: defaults::N_PH_MAX,
            n_exc_max: defaults::N_EXC_MAX,
            counter_rotating: true,
            cycles: 3,
        }
    }
}

impl RabiSetup {
    pub fn lattice(&self, th: &Thresholds) -> Result<LatticeSpec> {
        let a = UnitCellParams::with_thresholds(mhz(self.omega_a_mhz), mhz(self.g_a_mhz), th)?;
        let b = UnitCellParams::with_thresholds(mhz(self.omega_b_mhz), mhz(self.g_b_mhz), th)?;
        LatticeSpec::new(2, a, b)
    }

    pub fn rabi_period(&self) -> f64 {
        PI / mhz(self.t0_mhz)
    }
}

/// Transition |α⟩_A|0g⟩_B → |0g⟩_A|α'⟩_B addressed by one tone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneChoice {
    pub from: Spin,
    pub to: Spin,
}

impl std::fmt::Display for ToneChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}A->{}B", self.from.symbol(), self.to.symbol())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RabiResult {
    pub transition: ToneChoice,
    pub tone_frequency_mhz: f64,
    pub rabi_period: f64,
    /// Peak target population inside each cycle window [(k−1)T_R, kT_R].
    pub cycle_fidelities: Vec<f64>,
    pub times: Vec<f64>,
    pub target_population: Vec<f64>,
    /// Minimum population kept by each non-target initial state under the same tone.
    pub survivals: Vec<(String, f64)>,
    pub min_survival: f64,
    pub convergence_infidelity: Option<f64>,
}

impl RabiResult {
    pub fn fidelity(&self, cycle: usize) -> Option<f64> {
        self.cycle_fidelities.get(cycle.checked_sub(1)?).copied()
    }
}

/// Drives one transition of a two-cell lattice and tracks the transfer.
pub fn run_rabi_test(setup: &RabiSetup, target: ToneChoice, cfg: &IntegratorConfig, th: &Thresholds) -> Result<RabiResult> {
    let lattice = setup.lattice(th)?;
    let t0 = mhz(setup.t0_mhz);
    let tone = resonant_tone(&lattice, 0, target.from, target.to, 0.0, t0, 0.0)?;
    let schedule = DriveSchedule::new_unchecked(vec![vec![tone]])?;
    let basis = build_basis(&lattice, setup.n_ph_max, setup.n_exc_max)?;
    let h = DrivenHamiltonian::lab(&lattice, &schedule, &basis, setup.counter_rotating)?;
    let period = setup.rabi_period();
    let t_final = period * setup.cycles as f64;

    let psi0 = polariton_state(&basis, 0, target.from);
    let (times, target_population, conv) =
        evolve_tracked(&h, &psi0, t_final, cfg, th, |psi| polariton_amplitude(&basis, psi, 1, target.to).norm_sqr())?;
    let cycle_fidelities = (1..=setup.cycles)
        .map(|k| {
            let (lo, hi) = ((k - 1) as f64 * period, k as f64 * period);
            times
                .iter()
                .zip(&target_population)
                .filter(|(t, _)| **t >= lo - 1e-12 && **t <= hi + 1e-12)
                .map(|(_, p)| *p)
                .fold(0.0, f64::max)
        })
        .collect();

    let mut survivals = Vec::new();
    let others = [(0usize, target.from.flip()), (1usize, target.to.flip())];
    for (site, spin) in others {
        let start = polariton_state(&basis, site, spin);
        let quiet = IntegratorConfig { convergence_check: false, ..cfg.clone() };
        let (_, pops, _) =
            evolve_tracked(&h, &start, t_final, &quiet, th, |psi| polariton_amplitude(&basis, psi, site, spin).norm_sqr())?;
        let keep = pops.iter().copied().fold(1.0, f64::min);
        survivals.push((format!("{}{}", spin.symbol(), if site == 0 { "A" } else { "B" }), keep));
    }
    let min_survival = survivals.iter().map(|s| s.1).fold(1.0, f64::min);
    Ok(RabiResult {
        transition: target,
        tone_frequency_mhz: crate::units::to_mhz(tone.frequency),
        rabi_period: period,
        cycle_fidelities,
        times,
        target_population,
        survivals,
        min_survival,
        convergence_infidelity: conv,
    })
}

/// Pure evolution returning sample times and per-sample values of `f`.
fn evolve_tracked(
    h: &DrivenHamiltonian,
    psi0: &[C64],
    t_final: f64,
    cfg: &IntegratorConfig,
    th: &Thresholds,
    f: impl Fn(&[C64]) -> f64,
) -> Result<(Vec<f64>, Vec<f64>, Option<f64>)> {
    let (mut times, mut values) = (Vec::new(), Vec::new());
    let rec = evolve_pure_sampled(h, psi0, t_final, cfg, th, None, &mut |t, psi| {
        times.push(t);
        values.push(f(psi));
    })?;
    Ok((times, values, rec.convergence_infidelity))
}

/// Nodal-loop chain realized by the two-tone drive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodalSetup {
    pub n_cells: usize,
    pub omega_mhz: f64,
    pub g_a_mhz: f64,
    pub g_b_mhz: f64,
    pub t0_mhz: f64,
    /// M and d in units of t'0.
    pub big_m: f64,
    pub d: f64,
    /// Momenta in units of π.
    pub k_y: f64,
    pub k_z: f64,
    pub convention: NodalPhaseConvention,
    pub n_ph_max: usize,
    pub n_exc_max: usize,
    pub counter_rotating: bool,
}

impl Default for NodalSetup {
    fn default() -> Self {
        NodalSetup {
            n_cells: 20,
            omega_mhz: 6000.0,
            g_a_mhz: 200.0,
            g_b_mhz: 100.0,
            t0_mhz: 3.0,
            big_m: 0.0,
            d: 1.0,
            k_y: 0.0,
            k_z: 0.7,
            convention: NodalPhaseConvention::Corrected,
            n_ph_max: defaults::N_PH_MAX,
            n_exc_max: defaults::N_EXC_MAX,
            counter_rotating: true,
        }
    }
}

/// Everything needed to run a nodal-chain experiment.
pub struct NodalSystem {
    pub lattice: LatticeSpec,
    pub basis: HilbertBasis,
    pub hamiltonian: DrivenHamiltonian,
    pub observer: Observer,
    pub m_eff: f64,
}

impl NodalSetup {
    pub fn t0(&self) -> f64 {
        mhz(self.t0_mhz)
    }

    /// m'(k_y, k_z) in rad/μs.
    pub fn m_eff(&self) -> f64 {
        self.t0() * m_prime(self.big_m, self.d, self.k_y * PI, self.k_z * PI)
    }

    pub fn lattice(&self, th: &Thresholds) -> Result<LatticeSpec> {
        let a = UnitCellParams::with_thresholds(mhz(self.omega_mhz), mhz(self.g_a_mhz), th)?;
        let b = UnitCellParams::with_thresholds(mhz(self.omega_mhz), mhz(self.g_b_mhz), th)?;
        LatticeSpec::new(self.n_cells, a, b)
    }

    pub fn schedule(&self, lattice: &LatticeSpec) -> Result<DriveSchedule> {
        nodal_drive(lattice, self.t0(), self.m_eff(), self.convention)
    }

    pub fn build(&self, th: &Thresholds) -> Result<NodalSystem> {
        if self.n_cells < 2 {
            return Err(Error::InvalidParameter("nodal experiments need at least two cells".into()));
        }
        let lattice = self.lattice(th)?;
        let schedule = self.schedule(&lattice)?;
        let basis = build_basis(&lattice, self.n_ph_max, self.n_exc_max)?;
        let hamiltonian = DrivenHamiltonian::lab(&lattice, &schedule, &basis, self.counter_rotating)?;
        let m_eff = self.m_eff();
        let observer = Observer::new(&basis, &lattice, m_eff)?;
        Ok(NodalSystem { lattice, basis, hamiltonian, observer, m_eff })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeSide {
    /// Qubit excitation |0e⟩ on the first cell.
    Left,
    /// Photon |1g⟩ on the last cell.
    Right,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeResult {
    pub side: EdgeSide,
    pub edge_site: usize,
    pub gamma: f64,
    pub record: TrajectoryRecord,
    /// Density of the edge site at the final time.
    pub edge_density: f64,
    /// Site (0-based) with the largest final density.
    pub max_site: usize,
    pub edge_is_max: bool,
    /// Pearson correlation of ⟨σ⁺σ⁻⟩ and ⟨a†a⟩ on the edge site over the run.
    pub qubit_photon_correlation: f64,
}

fn evolve(
    sys: &NodalSystem,
    psi0: &[C64],
    t_final: f64,
    noise: Option<&NoiseSpec>,
    cfg: &IntegratorConfig,
    th: &Thresholds,
) -> Result<TrajectoryRecord> {
    match noise {
        Some(n) if n.gamma > 0.0 => {
            evolve_lindblad_from_state(&sys.hamiltonian, psi0, n, t_final, cfg, th, &sys.observer).map(|r| r.0)
        }
        _ => evolve_pure(&sys.hamiltonian, psi0, t_final, cfg, th, Some(&sys.observer)),
    }
}

/// Starts one excitation on an edge and follows the polariton density.
pub fn run_edge_detection(
    setup: &NodalSetup,
    side: EdgeSide,
    t_final: f64,
    noise: Option<&NoiseSpec>,
    cfg: &IntegratorConfig,
    th: &Thresholds,
) -> Result<EdgeResult> {
    let sys = setup.build(th)?;
    let n = setup.n_cells;
    let (site, qubit) = match side {
        EdgeSide::Left => (0, true),
        EdgeSide::Right => (n - 1, false),
    };
    let mut psi0 = vec![C64::new(0.0, 0.0); sys.basis.dim()];
    psi0[sys.basis.single_excitation(site, qubit)] = C64::new(1.0, 0.0);
    let record = evolve(&sys, &psi0, t_final, noise, cfg, th)?;
    let fin = record.final_density();
    let max_site = (0..n).max_by(|&a, &b| fin[a].total_cmp(&fin[b])).unwrap_or(0);
    let q: Vec<f64> = record.qubit.iter().map(|r| r[site]).collect();
    let p: Vec<f64> = record.photon.iter().map(|r| r[site]).collect();
    Ok(EdgeResult {
        side,
        edge_site: site,
        gamma: noise.map_or(0.0, |n| n.gamma),
        edge_density: fin[site],
        max_site,
        edge_is_max: max_site == site,
        qubit_photon_correlation: pearson(&q, &p),
        record,
    })
}

pub(crate) fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    if n < 2.0 {
        return 0.0;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiralResult {
    /// 0-based cell holding the initial |↑⟩ polariton.
    pub start_site: usize,
    pub gamma: f64,
    pub record: TrajectoryRecord,
    /// Time average of P̄_d over the run.
    pub center: f64,
    /// Change of the running average over the last quarter of the run.
    pub drift: f64,
    /// 2 × center.
    pub nu_estimate: f64,
}

/// Single |↑⟩ polariton on cell ⌈N/2⌉ (1-based); tracks the chiral center.
pub fn run_chiral_center(
    setup: &NodalSetup,
    t_final: f64,
    noise: Option<&NoiseSpec>,
    cfg: &IntegratorConfig,
    th: &Thresholds,
) -> Result<ChiralResult> {
    let sys = setup.build(th)?;
    let start_site = setup.n_cells.div_ceil(2) - 1;
    let psi0 = polariton_state(&sys.basis, start_site, Spin::Up);
    let record = evolve(&sys, &psi0, t_final, noise, cfg, th)?;
    let (center, drift) = record.chiral_center();
    let bound = setup.n_cells as f64 + 1e-9;
    if let Some(bad) = record.chiral.iter().find(|v| v.abs() > bound) {
        return Err(Error::Physics(format!("chiral center {bad} exceeds the bound N = {}", setup.n_cells)));
    }
    Ok(ChiralResult {
        start_site,
        gamma: noise.map_or(0.0, |n| n.gamma),
        record,
        center,
        drift,
        nu_estimate: 2.0 * center,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Edge,
    Chiral,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub experiment: ExperimentKind,
    pub n_cells: usize,
    /// k_z in units of π.
    pub k_z: f64,
    /// rad/μs.
    pub gamma: f64,
    /// Edge: site-1 density at T. Chiral: oscillation center.
    pub value: f64,
    /// Edge: whether the edge site holds the largest density. Chiral: 2·center rounded to 1.
    pub nontrivial: bool,
    pub steps: usize,
}

/// Runs every (N, k_z, γ) combination of an edge or chiral experiment.
/// γ = 0 rows use pure-state evolution.
#[allow(clippy::too_many_arguments)]
pub fn decoherence_sweep(
    kind: ExperimentKind,
    base: &NodalSetup,
    n_list: &[usize],
    k_z_list: &[f64],
    gammas: &[f64],
    t_final: f64,
    cfg: &IntegratorConfig,
    th: &Thresholds,
) -> Result<Vec<SweepRow>> {
    let mut jobs = Vec::new();
    for &n in n_list {
        for &kz in k_z_list {
            for &g in gammas {
                jobs.push((n, kz, g));
            }
        }
    }
    let quiet = IntegratorConfig { convergence_check: false, ..cfg.clone() };
    jobs.into_par_iter()
        .map(|(n, kz, gamma)| {
            let setup = NodalSetup { n_cells: n, k_z: kz, ..base.clone() };
            let noise = NoiseSpec::uniform(gamma)?;
            match kind {
                ExperimentKind::Edge => {
                    let r = run_edge_detection(&setup, EdgeSide::Left, t_final, Some(&noise), &quiet, th)?;
                    Ok(SweepRow {
                        experiment: kind,
                        n_cells: n,
                        k_z: kz,
                        gamma,
                        value: r.edge_density,
                        nontrivial: r.edge_is_max,
                        steps: r.record.steps,
                    })
                }
                ExperimentKind::Chiral => {
                    let r = run_chiral_center(&setup, t_final, Some(&noise), &quiet, th)?;
                    Ok(SweepRow {
                        experiment: kind,
                        n_cells: n,
                        k_z: kz,
                        gamma,
                        value: r.center,
                        nontrivial: r.nu_estimate.round() as i64 == 1,
                        steps: r.record.steps,
                    })
                }
            }
        })
        .collect()
}
