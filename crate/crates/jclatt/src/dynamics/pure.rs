use super::config::{Frame, IntegratorConfig, Scheme};
use super::observe::{Observer, TrajectoryRecord};
use super::propagator::{components, ChebWork, Sector};
use crate::defaults::Thresholds;
use crate::model::DrivenHamiltonian;
use crate::{Error, Result, C64};

const SQRT3: f64 = 1.732_050_807_568_877_2;
/// Gauss nodes on [0, 1].
pub(crate) const C1: f64 = 0.5 - SQRT3 / 6.0;
pub(crate) const C2: f64 = 0.5 + SQRT3 / 6.0;
pub(crate) const A1: f64 = 0.25 + SQRT3 / 6.0;
pub(crate) const A2: f64 = 0.25 - SQRT3 / 6.0;

/// Checks the step against the limit that applies to the scheme and frame.
pub(crate) fn check_step(h: &DrivenHamiltonian, cfg: &IntegratorConfig, dt: f64, th: &Thresholds) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
    }
    let (scale, limit, what) = match (cfg.scheme, cfg.frame) {
        (Scheme::Magnus4, Frame::Lab) => (h.max_drive_frequency(), th.magnus_step_limit, "highest drive frequency"),
        (Scheme::Magnus4, Frame::Interaction) => {
            return Err(Error::InvalidParameter("the Magnus propagator runs in the lab frame; use frame = lab".into()))
        }
        (Scheme::Rk4, Frame::Lab) => {
            let p = h.pattern();
            let d = (0..p.dim()).map(|i| p.get(i, i).norm()).fold(0.0, f64::max);
            (d, th.rk4_step_limit, "largest diagonal frequency")
        }
        (Scheme::Rk4, Frame::Interaction) => (residual_frequency(h), th.rk4_step_limit, "largest interaction-frame frequency"),
    };
    if dt * scale > limit {
        return Err(Error::StepSize(format!(
            "dt = {dt:.3e} μs times the {what} {scale:.4e} rad/μs exceeds {limit}; use dt <= {:.3e}",
            limit / scale
        )));
    }
    Ok(())
}

/// max |D_i − D_j| over stored off-diagonal entries plus the top drive frequency.
fn residual_frequency(h: &DrivenHamiltonian) -> f64 {
    let p = h.pattern();
    let diag: Vec<f64> = (0..p.dim()).map(|i| p.get(i, i).re).collect();
    let mut w: f64 = 0.0;
    for i in 0..p.dim() {
        for (j, _) in p.row(i) {
            if j != i {
                w = w.max((diag[i] - diag[j]).abs());
            }
        }
    }
    w + h.max_drive_frequency()
}

/// Weights of the two CFM4 exponentials for the step [t, t + dt].
pub(crate) fn magnus_weights(h: &DrivenHamiltonian, t: f64, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let k = h.n_terms();
    let (mut w1, mut w2) = (vec![0.0; k], vec![0.0; k]);
    h.coefficients(t + C1 * dt, &mut w1);
    h.coefficients(t + C2 * dt, &mut w2);
    let first = w1.iter().zip(&w2).map(|(a, b)| A1 * a + A2 * b).collect();
    let second = w1.iter().zip(&w2).map(|(a, b)| A2 * a + A1 * b).collect();
    (first, second)
}

/// Schrödinger evolution of `psi0` over [0, t_final].
pub fn evolve_pure(
    h: &DrivenHamiltonian,
    psi0: &[C64],
    t_final: f64,
    cfg: &IntegratorConfig,
    th: &Thresholds,
    observer: Option<&Observer>,
) -> Result<TrajectoryRecord> {
    evolve_pure_sampled(h, psi0, t_final, cfg, th, observer, &mut |_, _| {})
}

/// As [`evolve_pure`], also handing every recorded state to `sample`.
pub fn evolve_pure_sampled(
    h: &DrivenHamiltonian,
    psi0: &[C64],
    t_final: f64,
    cfg: &IntegratorConfig,
    th: &Thresholds,
    observer: Option<&Observer>,
    sample: &mut dyn FnMut(f64, &[C64]),
) -> Result<TrajectoryRecord> {
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi0.len() });
    }
    let n0 = psi0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if (n0 - 1.0).abs() > th.norm_tolerance {
        return Err(Error::InvalidParameter(format!("initial state norm {n0} is not 1")));
    }
    if let Some(obs) = observer {
        if obs.basis().dim() != h.dim() {
            return Err(Error::BasisMismatch("observer basis differs from the Hamiltonian".into()));
        }
    }
    let (n_steps, dt) = cfg.steps(t_final);
    check_step(h, cfg, dt, th)?;
    let mut rec = run(h, psi0, n_steps, dt, cfg, th, observer, sample)?;
    if cfg.convergence_check {
        let half = IntegratorConfig { dt: dt / 2.0, convergence_check: false, ..cfg.clone() };
        let fine = run(h, psi0, 2 * n_steps, dt / 2.0, &half, th, None, &mut |_, _| {})?;
        let (a, b) = (rec.final_state.as_ref().unwrap(), fine.final_state.as_ref().unwrap());
        let ov: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
        let inf = (1.0 - ov.norm_sqr()).max(0.0);
        if inf > 1e-6 {
            log::warn!("half-step check: final-state infidelity {inf:.2e}; consider a smaller dt");
        }
        rec.convergence_infidelity = Some(inf);
    }
    Ok(rec)
}

#[allow(clippy::too_many_arguments)]
fn run(
    h: &DrivenHamiltonian,
    psi0: &[C64],
    n_steps: usize,
    dt: f64,
    cfg: &IntegratorConfig,
    th: &Thresholds,
    observer: Option<&Observer>,
    sample: &mut dyn FnMut(f64, &[C64]),
) -> Result<TrajectoryRecord> {
    let mut rec = TrajectoryRecord { steps: n_steps, dt, ..Default::default() };
    let stride = cfg.record_stride.max(1);
    let mut record = |t: f64, psi: &[C64], rec: &mut TrajectoryRecord| -> Result<()> {
        sample(t, psi);
        match observer {
            Some(o) => o.sample_pure(t, psi, rec),
            None => {
                let norm = psi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                rec.max_drift = rec.max_drift.max((norm - 1.0).abs());
            }
        }
        if rec.max_drift > th.norm_tolerance {
            return Err(Error::NormDrift { drift: rec.max_drift, t, limit: th.norm_tolerance, dt: dt / 2.0 });
        }
        Ok(())
    };
    let fin = match cfg.scheme {
        Scheme::Magnus4 => magnus(h, psi0, n_steps, dt, stride, th, &mut rec, &mut record)?,
        Scheme::Rk4 => rk4(h, psi0, n_steps, dt, cfg.frame, stride, &mut rec, &mut record)?,
    };
    rec.final_state = Some(fin);
    Ok(rec)
}

type Recorder<'a> = dyn FnMut(f64, &[C64], &mut TrajectoryRecord) -> Result<()> + 'a;

#[allow(clippy::too_many_arguments)]
fn magnus(
    h: &DrivenHamiltonian,
    psi0: &[C64],
    n_steps: usize,
    dt: f64,
    stride: usize,
    th: &Thresholds,
    rec: &mut TrajectoryRecord,
    record: &mut Recorder<'_>,
) -> Result<Vec<C64>> {
    let sectors: Vec<Sector> = components(h.pattern())
        .into_iter()
        .filter(|c| c.iter().any(|&i| psi0[i] != C64::new(0.0, 0.0)))
        .map(|c| Sector::new(h.pattern(), c))
        .collect();
    let mut local: Vec<Vec<C64>> = sectors.iter().map(|s| s.states.iter().map(|&i| psi0[i]).collect()).collect();
    let mut vals = vec![C64::new(0.0, 0.0); h.pattern().nnz()];
    let mut work = ChebWork::default();
    let mut psi = psi0.to_vec();
    record(0.0, &psi, rec)?;
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let (first, second) = magnus_weights(h, t, dt);
        for w in [&first, &second] {
            h.assemble(w, &mut vals);
            for (sec, x) in sectors.iter().zip(local.iter_mut()) {
                sec.expm(&vals, dt, x, 1, th.chebyshev_tolerance, &mut work);
            }
        }
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            for (sec, x) in sectors.iter().zip(&local) {
                for (&i, v) in sec.states.iter().zip(x) {
                    psi[i] = *v;
                }
            }
            record((step + 1) as f64 * dt, &psi, rec)?;
        }
    }
    Ok(psi)
}

#[allow(clippy::too_many_arguments)]
fn rk4(
    h: &DrivenHamiltonian,
    psi0: &[C64],
    n_steps: usize,
    dt: f64,
    frame: Frame,
    stride: usize,
    rec: &mut TrajectoryRecord,
    record: &mut Recorder<'_>,
) -> Result<Vec<C64>> {
    let p = h.pattern();
    let n = p.dim();
    let diag: Vec<f64> = match frame {
        Frame::Lab => vec![0.0; n],
        Frame::Interaction => (0..n).map(|i| p.get(i, i).re).collect(),
    };
    let mut w = vec![0.0; h.n_terms()];
    let mut vals = vec![C64::new(0.0, 0.0); p.nnz()];
    // dψ/dt = −i H_I(t) ψ with H_I_ij = H_ij e^{i(D_i − D_j)t} − D_i δ_ij.
    let mut deriv = |t: f64, x: &[C64], out: &mut [C64]| {
        h.coefficients(t, &mut w);
        h.assemble(&w, &mut vals);
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for idx in p.row_ptr()[i]..p.row_ptr()[i + 1] {
                let j = p.cols()[idx];
                let mut v = vals[idx];
                if frame == Frame::Interaction {
                    if i == j {
                        v -= diag[i];
                    } else {
                        v *= C64::from_polar(1.0, (diag[i] - diag[j]) * t);
                    }
                }
                acc += v * x[j];
            }
            out[i] = C64::new(acc.im, -acc.re);
        }
    };
    let to_lab = |t: f64, x: &[C64]| -> Vec<C64> {
        x.iter().zip(&diag).map(|(v, d)| v * C64::from_polar(1.0, -d * t)).collect()
    };
    let mut x = psi0.to_vec();
    let zero = vec![C64::new(0.0, 0.0); n];
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero);
    record(0.0, &x, rec)?;
    for step in 0..n_steps {
        let t = step as f64 * dt;
        deriv(t, &x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + k1[i] * (0.5 * dt);
        }
        deriv(t + 0.5 * dt, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + k2[i] * (0.5 * dt);
        }
        deriv(t + 0.5 * dt, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + k3[i] * dt;
        }
        deriv(t + dt, &tmp, &mut k4);
        for i in 0..n {
            x[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            let tt = (step + 1) as f64 * dt;
            record(tt, &to_lab(tt, &x), rec)?;
        }
    }
    Ok(to_lab(n_steps as f64 * dt, &x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_basis, DriveSchedule, LatticeSpec, UnitCellParams};
    use crate::units::mhz;

    fn stationary() -> DrivenHamiltonian {
        let lat = LatticeSpec::new(2, UnitCellParams::from_mhz(6000.0, 200.0).unwrap(), UnitCellParams::from_mhz(5650.0, 100.0).unwrap()).unwrap();
        let basis = build_basis(&lat, 2, 3).unwrap();
        DrivenHamiltonian::lab(&lat, &DriveSchedule::empty(1), &basis, true).unwrap()
    }

    #[test]
    fn eigenstate_picks_up_phase_only() {
        let h = stationary();
        let dense = h.at(0.0).to_dense();
        let (e, v) = crate::linalg::hermitian_eigen(&dense);
        let k = 3;
        let psi: Vec<C64> = v.column(k).iter().copied().collect();
        let cfg = IntegratorConfig { dt: 1e-3, convergence_check: false, ..Default::default() };
        let rec = evolve_pure(&h, &psi, 0.05, &cfg, &Thresholds::default(), None).unwrap();
        let fin = rec.final_state.unwrap();
        let phase = C64::from_polar(1.0, -e[k] * 0.05);
        let err = fin.iter().zip(&psi).map(|(a, b)| (a - b * phase).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn rk4_and_magnus_agree_on_small_driven_system() {
        let lat = LatticeSpec::new(2, UnitCellParams::from_mhz(60.0, 3.0).unwrap(), UnitCellParams::from_mhz(50.0, 2.0).unwrap()).unwrap();
        let basis = build_basis(&lat, 1, 2).unwrap();
        let tone = crate::model::DriveTone::new(mhz(1.0), mhz(10.0), 0.3, 1.0).unwrap();
        let sched = DriveSchedule::new_unchecked(vec![vec![tone]]).unwrap();
        let h = DrivenHamiltonian::lab(&lat, &sched, &basis, true).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); basis.dim()];
        psi[basis.single_excitation(0, true)] = C64::new(1.0, 0.0);
        let th = Thresholds::default();
        let m = IntegratorConfig { dt: 1e-4, convergence_check: true, ..Default::default() };
        let a = evolve_pure(&h, &psi, 0.2, &m, &th, None).unwrap();
        assert!(a.convergence_infidelity.unwrap() < 1e-10);
        for frame in [Frame::Lab, Frame::Interaction] {
            let r = IntegratorConfig { scheme: Scheme::Rk4, frame, dt: 2e-5, convergence_check: false, ..Default::default() };
            let b = evolve_pure(&h, &psi, 0.2, &r, &th, None).unwrap();
            let (x, y) = (a.final_state.as_ref().unwrap(), b.final_state.unwrap());
            let err = x.iter().zip(&y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            assert!(err < 1e-7, "{frame:?}: {err}");
        }
    }

    #[test]
    fn step_guard() {
        let h = stationary();
        let r = IntegratorConfig { scheme: Scheme::Rk4, dt: 1e-4, ..Default::default() };
        let mut psi = vec![C64::new(0.0, 0.0); h.dim()];
        psi[1] = C64::new(1.0, 0.0);
        let e = evolve_pure(&h, &psi, 0.01, &r, &Thresholds::default(), None);
        assert!(matches!(e, Err(Error::StepSize(_))));
    }
}
