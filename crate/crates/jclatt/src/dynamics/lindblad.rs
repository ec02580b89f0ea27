use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::config::{IntegratorConfig, Scheme};
use super::observe::{Observer, TrajectoryRecord};
use super::propagator::{components, ChebWork, Sector, UnionFind};
use super::pure::{check_step, magnus_weights};
use crate::defaults::Thresholds;
use crate::linalg::hermitian_eigen;
use crate::model::{DrivenHamiltonian, HilbertBasis, Ladder};
use crate::{Error, Result, C64};

/// Uniform Markovian noise: photon loss a_l, qubit decay σ⁻_l and qubit
/// dephasing σ^z_l on every site, all at rate γ (rad/μs).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    pub gamma: f64,
    pub photon_loss: bool,
    pub qubit_decay: bool,
    pub dephasing: bool,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { gamma: 0.0, photon_loss: true, qubit_decay: true, dephasing: true }
    }
}

impl NoiseSpec {
    pub fn uniform(gamma: f64) -> Result<Self> {
        let n = NoiseSpec { gamma, ..Default::default() };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("noise rate must be >= 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Block-diagonal density matrix: one dense block per invariant sector.
#[derive(Clone, Debug)]
pub struct DensityBlocks {
    pub dim: usize,
    pub sectors: Vec<Vec<usize>>,
    pub blocks: Vec<DMatrix<C64>>,
}

impl DensityBlocks {
    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().re).sum()
    }

    pub fn purity(&self) -> f64 {
        self.blocks.iter().map(|b| b.iter().map(|x| x.norm_sqr()).sum::<f64>()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks.iter().map(|b| hermitian_eigen(b).0.first().copied().unwrap_or(0.0)).fold(f64::INFINITY, f64::min)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (s, b) in self.sectors.iter().zip(&self.blocks) {
            for (a, &i) in s.iter().enumerate() {
                for (c, &j) in s.iter().enumerate() {
                    m[(i, j)] = b[(a, c)];
                }
            }
        }
        m
    }
}

/// One jump operator restricted to a source sector: local source index,
/// local target index in `target` sector, matrix element.
struct Scatter {
    source: usize,
    target: usize,
    pairs: Vec<(usize, usize, f64)>,
}

struct Plan {
    sectors: Vec<Sector>,
    scatters: Vec<Scatter>,
    /// Σ Γ†Γ per state (diagonal in the product basis), per sector.
    kdiag: Vec<Vec<f64>>,
    /// Excited-qubit bitmask per state, per sector (dephasing).
    zmask: Vec<Vec<u64>>,
    n_cells: usize,
}

fn jump_words(n: usize, noise: &NoiseSpec) -> Vec<Ladder> {
    let mut w = Vec::new();
    for l in 0..n {
        if noise.photon_loss {
            w.push(Ladder::A(l));
        }
        if noise.qubit_decay {
            w.push(Ladder::SigmaMinus(l));
        }
    }
    w
}

/// Groups states into sectors that stay block-diagonal under H, the jumps
/// and the initial coherences.
fn plan(h: &DrivenHamiltonian, basis: &HilbertBasis, noise: &NoiseSpec, support: &[usize], coherent: &[(usize, usize)]) -> Plan {
    let dim = basis.dim();
    let n = basis.n_cells();
    let words = if noise.gamma > 0.0 { jump_words(n, noise) } else { Vec::new() };
    let maps: Vec<Vec<Option<(usize, f64)>>> =
        words.iter().map(|w| (0..dim).map(|i| basis.apply_word(i, std::slice::from_ref(w))).collect()).collect();

    let mut uf = UnionFind::new(dim);
    for c in components(h.pattern()) {
        for w in c.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    for &(i, j) in coherent {
        uf.union(i, j);
    }
    loop {
        let mut changed = false;
        for map in &maps {
            // Every source class must land in a single target class.
            let mut target_of: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
            for (i, m) in map.iter().enumerate() {
                if let Some((j, _)) = m {
                    let r = uf.find(i);
                    match target_of.get(&r) {
                        Some(&t) => changed |= uf.union(t, *j),
                        None => {
                            target_of.insert(r, *j);
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    // Active classes: those holding the initial support, closed under jumps.
    let mut active = std::collections::BTreeSet::new();
    let classes = uf.classes();
    let mut class_of = vec![0usize; dim];
    for (k, c) in classes.iter().enumerate() {
        for &i in c {
            class_of[i] = k;
        }
    }
    let mut stack_cls: Vec<usize> = support.iter().map(|&i| class_of[i]).collect();
    while let Some(c) = stack_cls.pop() {
        if !active.insert(c) {
            continue;
        }
        for map in &maps {
            for &i in &classes[c] {
                if let Some((j, _)) = map[i] {
                    stack_cls.push(class_of[j]);
                }
            }
        }
    }
    let active: Vec<usize> = active.into_iter().collect();
    let slot: std::collections::HashMap<usize, usize> = active.iter().enumerate().map(|(s, &c)| (c, s)).collect();
    let sectors: Vec<Sector> = active.iter().map(|&c| Sector::new(h.pattern(), classes[c].clone())).collect();
    let mut local = vec![usize::MAX; dim];
    for s in &sectors {
        for (k, &i) in s.states.iter().enumerate() {
            local[i] = k;
        }
    }
    let mut scatters = Vec::new();
    for map in &maps {
        for (si, s) in sectors.iter().enumerate() {
            let mut pairs = Vec::new();
            let mut target = None;
            for (k, &i) in s.states.iter().enumerate() {
                if let Some((j, amp)) = map[i] {
                    target = Some(slot[&class_of[j]]);
                    pairs.push((k, local[j], amp));
                }
            }
            if let Some(t) = target {
                scatters.push(Scatter { source: si, target: t, pairs });
            }
        }
    }
    let kdiag = sectors
        .iter()
        .map(|s| {
            s.states
                .iter()
                .map(|&i| {
                    let mut k = 0.0;
                    for l in 0..n {
                        if noise.photon_loss {
                            k += basis.photons(i, l) as f64;
                        }
                        if noise.qubit_decay && basis.excited(i, l) {
                            k += 1.0;
                        }
                        if noise.dephasing {
                            k += 1.0;
                        }
                    }
                    k
                })
                .collect()
        })
        .collect();
    let zmask = sectors
        .iter()
        .map(|s| s.states.iter().map(|&i| (0..n).filter(|&l| basis.excited(i, l)).fold(0u64, |m, l| m | (1 << l))).collect())
        .collect();
    Plan { sectors, scatters, kdiag, zmask, n_cells: n }
}

impl Plan {
    /// out = D(ρ) with rate γ.
    fn dissipator(&self, gamma: f64, dephasing: bool, rho: &[DMatrix<C64>], out: &mut [DMatrix<C64>]) {
        for (s, (r, o)) in rho.iter().zip(out.iter_mut()).enumerate() {
            let k = &self.kdiag[s];
            let z = &self.zmask[s];
            let d = r.nrows();
            for j in 0..d {
                for i in 0..d {
                    let mut f = -0.5 * (k[i] + k[j]);
                    if dephasing {
                        f += self.n_cells as f64 - 2.0 * (z[i] ^ z[j]).count_ones() as f64;
                    }
                    o[(i, j)] = r[(i, j)] * (gamma * f);
                }
            }
        }
        for sc in &self.scatters {
            let (src, dst) = (&rho[sc.source], sc.target);
            for &(a, ta, x) in &sc.pairs {
                for &(b, tb, y) in &sc.pairs {
                    let v = src[(a, b)] * (gamma * x * y);
                    out[dst][(ta, tb)] += v;
                }
            }
        }
    }

    /// ρ ← e^{D h} ρ by one classical RK4 step (trace-exact).
    fn dissipate(&self, gamma: f64, dephasing: bool, h: f64, rho: &mut [DMatrix<C64>], ws: &mut RkWork) {
        let RkWork { k1, k2, k3, k4, tmp } = ws;
        self.dissipator(gamma, dephasing, rho, k1);
        for s in 0..rho.len() {
            tmp[s] = &rho[s] + &k1[s] * C64::new(0.5 * h, 0.0);
        }
        self.dissipator(gamma, dephasing, tmp, k2);
        for s in 0..rho.len() {
            tmp[s] = &rho[s] + &k2[s] * C64::new(0.5 * h, 0.0);
        }
        self.dissipator(gamma, dephasing, tmp, k3);
        for s in 0..rho.len() {
            tmp[s] = &rho[s] + &k3[s] * C64::new(h, 0.0);
        }
        self.dissipator(gamma, dephasing, tmp, k4);
        for s in 0..rho.len() {
            rho[s] += (&k1[s] + &k2[s] * C64::new(2.0, 0.0) + &k3[s] * C64::new(2.0, 0.0) + &k4[s]) * C64::new(h / 6.0, 0.0);
        }
    }
}

struct RkWork {
    k1: Vec<DMatrix<C64>>,
    k2: Vec<DMatrix<C64>>,
    k3: Vec<DMatrix<C64>>,
    k4: Vec<DMatrix<C64>>,
    tmp: Vec<DMatrix<C64>>,
}

/// Lindblad evolution of a dense initial density matrix.
pub fn evolve_lindblad(
    h: &DrivenHamiltonian,
    rho0: &DMatrix<C64>,
    noise: &NoiseSpec,
    t_final: f64,
    cfg: &IntegratorConfig,
    th: &Thresholds,
    observer: &Observer,
) -> Result<(TrajectoryRecord, DensityBlocks)> {
    let dim = h.dim();
    if rho0.nrows() != dim || rho0.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rho0.nrows() });
    }
    let herm = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| (rho0[(i, j)] - rho0[(j, i)].conj()).norm()).fold(0.0, f64::max);
    if herm > 1e-12 {
        return Err(Error::InvalidParameter(format!("initial density matrix not Hermitian ({herm:.2e})")));
    }
    let tr = rho0.trace().re;
    if (tr - 1.0).abs() > th.trace_tolerance {
        return Err(Error::InvalidParameter(format!("initial density matrix has trace {tr}")));
    }
    let min_eig = hermitian_eigen(rho0).0[0];
    if min_eig < -th.positivity_tolerance {
        return Err(Error::InvalidParameter(format!("initial density matrix not positive ({min_eig:.2e})")));
    }
    let support: Vec<usize> = (0..dim).filter(|&i| rho0[(i, i)].re > 0.0).collect();
    let mut coherent = Vec::new();
    for &i in &support {
        for &j in &support {
            if i < j && rho0[(i, j)] != C64::new(0.0, 0.0) {
                coherent.push((i, j));
            }
        }
    }
    run(h, |i, j| rho0[(i, j)], &support, &coherent, noise, t_final, cfg, th, observer)
}

/// Lindblad evolution starting from the pure state |ψ0⟩⟨ψ0|.
pub fn evolve_lindblad_from_state(
    h: &DrivenHamiltonian,
    psi0: &[C64],
    noise: &NoiseSpec,
    t_final: f64,
    cfg: &IntegratorConfig,
    th: &Thresholds,
    observer: &Observer,
) -> Result<(TrajectoryRecord, DensityBlocks)> {
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi0.len() });
    }
    let n0: f64 = psi0.iter().map(|x| x.norm_sqr()).sum();
    if (n0 - 1.0).abs() > th.trace_tolerance {
        return Err(Error::InvalidParameter(format!("initial state norm² {n0} is not 1")));
    }
    let support: Vec<usize> = (0..psi0.len()).filter(|&i| psi0[i] != C64::new(0.0, 0.0)).collect();
    let coherent: Vec<(usize, usize)> = support.windows(2).map(|w| (w[0], w[1])).collect();
    run(h, |i, j| psi0[i] * psi0[j].conj(), &support, &coherent, noise, t_final, cfg, th, observer)
}

#[allow(clippy::too_many_arguments)]
fn run(
    h: &DrivenHamiltonian,
    entry: impl Fn(usize, usize) -> C64,
    support: &[usize],
    coherent: &[(usize, usize)],
    noise: &NoiseSpec,
    t_final: f64,
    cfg: &IntegratorConfig,
    th: &Thresholds,
    observer: &Observer,
) -> Result<(TrajectoryRecord, DensityBlocks)> {
    noise.validate()?;
    if cfg.scheme != Scheme::Magnus4 {
        return Err(Error::InvalidParameter("density-matrix runs use the Magnus propagator".into()));
    }
    let basis = h.basis().ok_or_else(|| Error::BasisMismatch("Lindblad evolution needs a lattice basis".into()))?;
    if observer.basis().dim() != basis.dim() {
        return Err(Error::BasisMismatch("observer basis differs from the Hamiltonian".into()));
    }
    if basis.n_cells() > 64 {
        return Err(Error::InvalidParameter("dephasing bookkeeping supports at most 64 cells".into()));
    }
    let (n_steps, dt) = cfg.steps(t_final);
    check_step(h, cfg, dt, th)?;
    let plan = plan(h, basis, noise, support, coherent);
    let total: usize = plan.sectors.iter().map(|s| s.dim()).sum();
    if total > th.lindblad_dimension_warning {
        log::warn!(
            "density matrix spans {total} states (blocks {:?}); this run will be slow",
            plan.sectors.iter().map(|s| s.dim()).collect::<Vec<_>>()
        );
    }
    let mut rho: Vec<DMatrix<C64>> =
        plan.sectors.iter().map(|s| DMatrix::from_fn(s.dim(), s.dim(), |a, b| entry(s.states[a], s.states[b]))).collect();
    let zeros = || plan.sectors.iter().map(|s| DMatrix::zeros(s.dim(), s.dim())).collect::<Vec<_>>();
    let mut ws = RkWork { k1: zeros(), k2: zeros(), k3: zeros(), k4: zeros(), tmp: zeros() };

    // Where each observer quantity lives.
    let mut place = vec![(usize::MAX, 0usize); basis.dim()];
    for (s, sec) in plan.sectors.iter().enumerate() {
        for (k, &i) in sec.states.iter().enumerate() {
            place[i] = (s, k);
        }
    }
    let stride = cfg.record_stride.max(1);
    let n_records = n_steps / stride + 1;
    let check_every = (n_records / 20).max(1);
    let mut rec = TrajectoryRecord { steps: n_steps, dt, ..Default::default() };
    let mut min_eig = f64::INFINITY;
    let mut n_rec = 0usize;
    let mut record = |t: f64, rho: &[DMatrix<C64>], rec: &mut TrajectoryRecord, force_check: bool| -> Result<()> {
        let elem = |i: usize, j: usize| {
            let (si, ki) = place[i];
            let (sj, kj) = place[j];
            if si == usize::MAX || si != sj {
                C64::new(0.0, 0.0)
            } else {
                rho[si][(ki, kj)]
            }
        };
        let (q, p) = observer.populations(|i| elem(i, i).re);
        let chi = observer.chiral(t, elem);
        let trace: f64 = rho.iter().map(|b| b.trace().re).sum();
        rec.push(t, q, p, chi, trace);
        rec.purity.push(rho.iter().map(|b| b.iter().map(|x| x.norm_sqr()).sum::<f64>()).sum());
        if (trace - 1.0).abs() > th.trace_tolerance {
            return Err(Error::TraceDrift { drift: (trace - 1.0).abs(), t, limit: th.trace_tolerance });
        }
        if force_check || n_rec % check_every == 0 {
            let e = rho.iter().map(|b| hermitian_eigen(b).0.first().copied().unwrap_or(0.0)).fold(f64::INFINITY, f64::min);
            min_eig = min_eig.min(e);
            if e < -th.positivity_tolerance {
                return Err(Error::Positivity { eigenvalue: e, t });
            }
        }
        n_rec += 1;
        Ok(())
    };

    let mut vals_a = vec![C64::new(0.0, 0.0); h.pattern().nnz()];
    let mut vals_b = vals_a.clone();
    let mut work = ChebWork::default();
    let mut flat: Vec<Vec<C64>> = plan.sectors.iter().map(|s| vec![C64::new(0.0, 0.0); s.dim() * s.dim()]).collect();
    let dissipate = noise.gamma > 0.0;
    record(0.0, &rho, &mut rec, true)?;
    for step in 0..n_steps {
        let t = step as f64 * dt;
        if dissipate {
            plan.dissipate(noise.gamma, noise.dephasing, 0.5 * dt, &mut rho, &mut ws);
        }
        let (first, second) = magnus_weights(h, t, dt);
        h.assemble(&first, &mut vals_a);
        h.assemble(&second, &mut vals_b);
        for (s, sec) in plan.sectors.iter().enumerate() {
            let d = sec.dim();
            let buf = &mut flat[s];
            // Row-major copy of ρ: column c of the buffer is column c of ρ.
            for i in 0..d {
                for c in 0..d {
                    buf[i * d + c] = rho[s][(i, c)];
                }
            }
            for pass in 0..2 {
                for vals in [&vals_a, &vals_b] {
                    sec.expm(vals, dt, buf, d, th.chebyshev_tolerance, &mut work);
                }
                if pass == 0 {
                    // X = Uρ → X†, then U·X† = UρU†.
                    for i in 0..d {
                        for c in i..d {
                            let (a, b) = (buf[i * d + c], buf[c * d + i]);
                            buf[i * d + c] = b.conj();
                            buf[c * d + i] = a.conj();
                        }
                    }
                }
            }
            for i in 0..d {
                for c in 0..d {
                    rho[s][(i, c)] = buf[i * d + c];
                }
            }
            let herm = (&rho[s] + rho[s].adjoint()) * C64::new(0.5, 0.0);
            rho[s] = herm;
        }
        if dissipate {
            plan.dissipate(noise.gamma, noise.dephasing, 0.5 * dt, &mut rho, &mut ws);
        }
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            record((step + 1) as f64 * dt, &rho, &mut rec, step + 1 == n_steps)?;
        }
    }
    rec.min_eigenvalue = Some(min_eig);
    let blocks = DensityBlocks { dim: basis.dim(), sectors: plan.sectors.iter().map(|s| s.states.clone()).collect(), blocks: rho };
    Ok((rec, blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_pure;
    use crate::model::{build_basis, DriveSchedule, DriveTone, LatticeSpec, UnitCellParams};
    use crate::units::mhz;

    fn small(cr: bool) -> (LatticeSpec, DrivenHamiltonian) {
        let lat = LatticeSpec::new(2, UnitCellParams::from_mhz(600.0, 20.0).unwrap(), UnitCellParams::from_mhz(565.0, 10.0).unwrap()).unwrap();
        let basis = build_basis(&lat, 2, 3).unwrap();
        let tone = DriveTone::new(mhz(3.0), mhz(35.0), 0.4, 1.0).unwrap();
        let sched = DriveSchedule::new_unchecked(vec![vec![tone]]).unwrap();
        let h = DrivenHamiltonian::lab(&lat, &sched, &basis, cr).unwrap();
        (lat, h)
    }

    #[test]
    fn closed_system_matches_pure_evolution() {
        let (lat, h) = small(true);
        let basis = h.basis().unwrap().clone();
        let obs = Observer::new(&basis, &lat, mhz(1.0)).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); basis.dim()];
        psi[basis.single_excitation(0, true)] = C64::new(0.6, 0.0);
        psi[basis.single_excitation(0, false)] = C64::new(0.0, 0.8);
        let cfg = IntegratorConfig { dt: 2e-4, record_stride: 10, convergence_check: false, ..Default::default() };
        let th = Thresholds::default();
        let pure = evolve_pure(&h, &psi, 0.1, &cfg, &th, Some(&obs)).unwrap();
        let (mixed, fin) = evolve_lindblad_from_state(&h, &psi, &NoiseSpec::default(), 0.1, &cfg, &th, &obs).unwrap();
        assert_eq!(pure.len(), mixed.len());
        for k in 0..pure.len() {
            for l in 0..2 {
                assert!((pure.qubit[k][l] - mixed.qubit[k][l]).abs() < 1e-8);
                assert!((pure.photon[k][l] - mixed.photon[k][l]).abs() < 1e-8);
            }
            assert!((pure.chiral[k] - mixed.chiral[k]).abs() < 1e-8);
            assert!((mixed.purity[k] - 1.0).abs() < 1e-8);
        }
        let v = pure.final_state.unwrap();
        let dense = fin.to_dense();
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                assert!((dense[(i, j)] - v[i] * v[j].conj()).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn photon_loss_decays_exponentially() {
        let lat = LatticeSpec::new(1, UnitCellParams::from_mhz(600.0, 0.0).unwrap(), UnitCellParams::from_mhz(600.0, 0.0).unwrap()).unwrap();
        let basis = build_basis(&lat, 2, 2).unwrap();
        let h = DrivenHamiltonian::lab(&lat, &DriveSchedule::empty(0), &basis, false).unwrap();
        let obs = Observer::new(&basis, &lat, 0.0).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); basis.dim()];
        psi[basis.index_of(&[4]).unwrap()] = C64::new(1.0, 0.0);
        let gamma = 2.0;
        let noise = NoiseSpec { gamma, photon_loss: true, qubit_decay: false, dephasing: false };
        let cfg = IntegratorConfig { dt: 1e-3, record_stride: 50, convergence_check: false, ..Default::default() };
        let (rec, _) = evolve_lindblad_from_state(&h, &psi, &noise, 0.5, &cfg, &Thresholds::default(), &obs).unwrap();
        for k in 0..rec.len() {
            let want = 2.0 * (-gamma * rec.times[k]).exp();
            assert!((rec.photon[k][0] - want).abs() < 1e-9, "{} vs {want}", rec.photon[k][0]);
        }
    }

    #[test]
    fn linear_in_initial_state_and_trace_preserving() {
        let (lat, h) = small(true);
        let basis = h.basis().unwrap().clone();
        let obs = Observer::new(&basis, &lat, 0.0).unwrap();
        let d = basis.dim();
        let ket = |i: usize| {
            let mut v = nalgebra::DVector::zeros(d);
            v[i] = C64::new(1.0, 0.0);
            v
        };
        let a = ket(basis.single_excitation(0, true));
        let b = (ket(basis.single_excitation(1, false)) + ket(basis.single_excitation(1, true)) * C64::new(0.0, 1.0)) * C64::new(0.5f64.sqrt(), 0.0);
        let ra = &a * a.adjoint();
        let rb = &b * b.adjoint();
        let p = 0.3;
        let mix = &ra * C64::new(p, 0.0) + &rb * C64::new(1.0 - p, 0.0);
        let noise = NoiseSpec::uniform(mhz(0.5)).unwrap();
        let cfg = IntegratorConfig { dt: 2e-4, record_stride: 100, convergence_check: false, ..Default::default() };
        let th = Thresholds::default();
        let run = |r: &DMatrix<C64>| evolve_lindblad(&h, r, &noise, 0.05, &cfg, &th, &obs).unwrap();
        let (ra_rec, fa) = run(&ra);
        let (_, fb) = run(&rb);
        let (_, fm) = run(&mix);
        let want = fa.to_dense() * C64::new(p, 0.0) + fb.to_dense() * C64::new(1.0 - p, 0.0);
        let err = crate::linalg::max_abs_diff(&want, &fm.to_dense());
        assert!(err < 1e-10, "err = {err}");
        assert!(ra_rec.max_drift < 1e-10);
        assert!(fm.min_eigenvalue() > -1e-10);
    }
}
