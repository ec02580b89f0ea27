use std::f64::consts::PI;
use std::path::PathBuf;

use serde_json::{json, Value};

use super::config::*;
use super::Check;
use crate::bands::{band_surface, nodal_loci, phase_diagram, classify_phase, winding_analytic};
use crate::circuit::{synthesize_flux_for_hopping, verify_synthesis};
use crate::defaults::Thresholds;
use crate::dynamics::{
    decoherence_sweep, run_chiral_center, run_edge_detection, run_rabi_test, NodalSetup, RabiSetup, TrajectoryRecord,
};
use crate::edge::{analytic_edge_states, DecayLaw, edge_overlap, spectrum_sweep, open_chain_spectrum_with};
use crate::effective::{gauge_transform_state, m_prime, polariton_index, resonant_tone, validate_rwa, GaugeDirection, NodalLoopParams};
use crate::model::io::ScheduleFile;
use crate::model::{DriveSchedule, HilbertBasis, Spin};
use crate::units::mhz;
use crate::{Error, Result, C64};

/// Collects output files relative to the output directory.
pub(super) struct Sink {
    dir: PathBuf,
    pub files: Vec<String>,
}

impl Sink {
    pub fn new(dir: PathBuf) -> Self {
        Sink { dir, files: Vec::new() }
    }

    fn csv(&mut self, name: &str, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name)).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(&r).map_err(csv_err)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<()> {
        std::fs::write(self.dir.join(name), serde_json::to_string_pretty(v)? + "\n")?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn f(x: f64) -> String {
    format!("{x}")
}

fn hdr(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// "0.7" → "kz0p7" for file names.
fn kz_tag(kz: f64) -> String {
    format!("kz{}", f(kz).replace('-', "m").replace('.', "p"))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub(super) fn validate(cfg: &ExperimentConfig) -> Vec<Check> {
    let th = &cfg.thresholds;
    let mut out = Vec::new();
    match &cfg.params {
        Params::Bands(p) => {
            effective_checks(&mut out, p.big_m, p.d, None);
            out.push(Check::new("grid", p.resolution >= 2, format!("resolution {}", p.resolution)));
        }
        Params::Loci(p) => effective_checks(&mut out, p.big_m, p.d, None),
        Params::Phases(p) => {
            for pt in &p.points {
                effective_checks(&mut out, pt[0], pt[1], None);
            }
            if let Some(g) = &p.diagram {
                out.push(Check::new(
                    "diagram grid",
                    g.n_m >= 1 && g.n_d >= 1 && g.d_min >= 0.0 && g.m_min <= g.m_max && g.d_min <= g.d_max,
                    format!("{}x{} over M [{}, {}], d [{}, {}]", g.n_m, g.n_d, g.m_min, g.m_max, g.d_min, g.d_max),
                ));
            }
        }
        Params::EdgeSpectrum(p) => {
            effective_checks(&mut out, p.big_m, p.d, Some(p.n_cells));
            out.push(Check::new("grid", p.n_k_z >= 2, format!("{} k_z samples", p.n_k_z)));
        }
        Params::EdgeWavefunctions(p) => {
            effective_checks(&mut out, p.big_m, p.d, Some(p.n_cells));
            let m = m_prime(p.big_m, p.d, p.k_y * PI, p.k_z * PI);
            out.push(Check::new("nontrivial point", m.abs() < 2.0, format!("|m'| = {:.6} t'0, edge states need < 2", m.abs())));
        }
        Params::Rabi(p) => rabi_checks(&mut out, &p.setup, th),
        Params::EdgeDynamics(p) => {
            for &kz in &p.k_z_values {
                nodal_checks(&mut out, &NodalSetup { k_z: kz, ..p.setup.clone() }, p.noise.gamma_khz > 0.0, th);
            }
            noise_check(&mut out, &p.noise);
        }
        Params::Chiral(p) => {
            for &kz in &p.k_z_values {
                nodal_checks(&mut out, &NodalSetup { k_z: kz, ..p.setup.clone() }, p.noise.gamma_khz > 0.0, th);
            }
            noise_check(&mut out, &p.noise);
        }
        Params::Sweep(p) => {
            let open = p.gamma_khz.iter().any(|g| *g > 0.0);
            for &n in &p.n_cells {
                for &kz in &p.k_z_values {
                    nodal_checks(&mut out, &NodalSetup { n_cells: n, k_z: kz, ..p.setup.clone() }, open, th);
                }
            }
            out.push(Check::new(
                "gamma list",
                !p.gamma_khz.is_empty() && p.gamma_khz.iter().all(|g| *g >= 0.0 && g.is_finite()),
                format!("{:?} kHz", p.gamma_khz),
            ));
        }
        Params::Synthesize(p) => {
            match p.circuit.to_circuit() {
                Ok(c) => {
                    out.push(Check::new("circuit", true, format!("omega/2pi = {:.3} MHz", crate::units::to_mhz(c.left.omega()))));
                    match load_schedule(cfg, p) {
                        Ok(s) => {
                            for (l, tones) in s.links.iter().enumerate() {
                                for (k, t) in tones.iter().enumerate() {
                                    let strength = mhz(t.amplitude_mhz) / c.hopping_for(1.0);
                                    out.push(Check::new(
                                        format!("link {} tone {k} amplitude", l + 1),
                                        t.amplitude_mhz >= 0.0 && t.frequency_mhz >= 0.0,
                                        format!("Omega = {strength:.4}{}", if strength > 0.05 { " (above the weak-drive range 0.05)" } else { "" }),
                                    ));
                                }
                                tone_spacing_check(&mut out, l, tones, th.tone_separation_ratio);
                            }
                        }
                        Err(e) => out.push(Check::new("schedule", false, e.to_string())),
                    }
                }
                Err(e) => out.push(Check::new("circuit", false, e.to_string())),
            }
        }
    }
    out
}

fn effective_checks(out: &mut Vec<Check>, big_m: f64, d: f64, n: Option<usize>) {
    out.push(Check::new("M, d", big_m.is_finite() && d.is_finite() && d >= 0.0, format!("M = {big_m}, d = {d} (t'0)")));
    if let Some(n) = n {
        out.push(Check::new("chain length", n >= 2, format!("N = {n}")));
    }
}

fn jc_check(out: &mut Vec<Check>, label: &str, omega_mhz: f64, g_mhz: f64, th: &Thresholds) {
    let r = g_mhz / omega_mhz;
    let ok = omega_mhz > 0.0 && g_mhz >= 0.0 && r < th.g_over_omega_max;
    let mut detail = format!("g/omega = {r:.4}, limit {}", th.g_over_omega_max);
    if ok && r > th.g_over_omega_warn {
        detail += &format!(" (above the soft limit {})", th.g_over_omega_warn);
    }
    out.push(Check::new(format!("JC regime {label}"), ok, detail));
}

fn truncation_check(out: &mut Vec<Check>, n_ph: usize, n_exc: usize, cr: bool) {
    let ok = n_ph >= 1 && n_exc >= 1;
    let mut detail = format!("n_ph_max = {n_ph}, n_exc_max = {n_exc}");
    if cr && n_exc < 3 {
        detail += "; counter-rotating terms need n_exc_max >= 3 to act on one excitation";
    }
    out.push(Check::new("truncation", ok && (!cr || n_exc >= 3), detail));
}

fn rabi_checks(out: &mut Vec<Check>, s: &RabiSetup, th: &Thresholds) {
    jc_check(out, "A", s.omega_a_mhz, s.g_a_mhz, th);
    jc_check(out, "B", s.omega_b_mhz, s.g_b_mhz, th);
    truncation_check(out, s.n_ph_max, s.n_exc_max, s.counter_rotating);
    out.push(Check::new("cycles", s.cycles >= 1, format!("{} cycles", s.cycles)));
    let Ok(lattice) = s.lattice(&Thresholds { g_over_omega_max: f64::INFINITY, ..th.clone() }) else {
        return;
    };
    // All four transitions share the link: every tone pair must be separated.
    let mut tones = Vec::new();
    for from in Spin::ALL {
        for to in Spin::ALL {
            match resonant_tone(&lattice, 0, from, to, 0.0, mhz(s.t0_mhz), 0.0) {
                Ok(t) => tones.push(t),
                Err(e) => out.push(Check::new("tones", false, e.to_string())),
            }
        }
    }
    if let Ok(sched) = DriveSchedule::new_unchecked(vec![tones]) {
        let rep = validate_rwa(&lattice, &sched, 0.0, th.tone_separation_ratio);
        let detail = if rep.passed() {
            format!("all tone spacings >= {} t0", th.tone_separation_ratio)
        } else {
            rep.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        };
        out.push(Check::new("tone separation", rep.passed(), detail));
    }
}

fn nodal_checks(out: &mut Vec<Check>, s: &NodalSetup, open: bool, th: &Thresholds) {
    let tag = format!("N={} k_z={}", s.n_cells, s.k_z);
    jc_check(out, &format!("A ({tag})"), s.omega_mhz, s.g_a_mhz, th);
    jc_check(out, &format!("B ({tag})"), s.omega_mhz, s.g_b_mhz, th);
    truncation_check(out, s.n_ph_max, s.n_exc_max, s.counter_rotating);
    out.push(Check::new(format!("chain length ({tag})"), s.n_cells >= 2, format!("N = {}", s.n_cells)));
    let relaxed = Thresholds { g_over_omega_max: f64::INFINITY, ..th.clone() };
    match s.lattice(&relaxed).and_then(|l| s.schedule(&l).map(|sch| (l, sch))) {
        Ok((lattice, sched)) => {
            let rep = validate_rwa(&lattice, &sched, s.m_eff(), th.tone_separation_ratio);
            let detail = if rep.passed() {
                format!("tones >= {} t0 apart", th.tone_separation_ratio)
            } else {
                rep.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
            };
            out.push(Check::new(format!("tone separation ({tag})"), rep.passed(), detail));
        }
        Err(e) => out.push(Check::new(format!("drive ({tag})"), false, e.to_string())),
    }
    if open {
        if let Ok(b) = HilbertBasis::new(s.n_cells, s.n_ph_max, s.n_exc_max) {
            let dim = b.dim();
            let mut detail = format!("basis dimension {dim}");
            if dim > th.lindblad_dimension_warning {
                detail += &format!(" above {}; density-matrix runs will be slow", th.lindblad_dimension_warning);
            }
            out.push(Check::new(format!("density matrix size ({tag})"), true, detail));
        }
    }
}

fn tone_spacing_check(out: &mut Vec<Check>, link: usize, tones: &[crate::model::io::ToneFile], ratio: f64) {
    let t0 = tones.iter().map(|t| t.amplitude_mhz).fold(0.0, f64::max);
    let need = ratio * t0;
    let mut bad = Vec::new();
    for i in 0..tones.len() {
        for j in i + 1..tones.len() {
            let sep = (tones[i].frequency_mhz - tones[j].frequency_mhz).abs();
            if sep < need {
                bad.push(format!("tones {i} and {j} separated by {sep:.4} MHz, need {need:.4} MHz"));
            }
        }
    }
    let detail = if bad.is_empty() { format!("spacings >= {ratio} t0") } else { bad.join("; ") };
    out.push(Check::new(format!("link {} tone separation", link + 1), bad.is_empty(), detail));
}

fn noise_check(out: &mut Vec<Check>, n: &NoiseFile) {
    let r = n.to_spec();
    out.push(Check::new("noise", r.is_ok(), r.map_or_else(|e| e.to_string(), |_| format!("gamma/2pi = {} kHz", n.gamma_khz))));
}

fn load_schedule(cfg: &ExperimentConfig, p: &SynthesizeParams) -> Result<ScheduleFile> {
    match (&p.schedule, &p.schedule_file) {
        (Some(s), None) => Ok(s.clone()),
        (None, Some(path)) => {
            let full = if path.is_absolute() { path.clone() } else { cfg.base_dir.join(path) };
            let text = std::fs::read_to_string(&full).map_err(|e| Error::Config(format!("cannot read {}: {e}", full.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", full.display())))
        }
        _ => Err(Error::Config("give exactly one of schedule, schedule_file".into())),
    }
}

pub(super) fn execute(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let th = &cfg.thresholds;
    match &cfg.params {
        Params::Bands(p) => bands(p, sink),
        Params::Loci(p) => loci(p, th, sink),
        Params::Phases(p) => phases(p, th, sink),
        Params::EdgeSpectrum(p) => edge_spectrum(p, sink),
        Params::EdgeWavefunctions(p) => edge_wavefunctions(p, th, sink),
        Params::Rabi(p) => rabi(p, th, sink),
        Params::EdgeDynamics(p) => edge_dynamics(p, th, sink),
        Params::Chiral(p) => chiral(p, th, sink),
        Params::Sweep(p) => sweep(p, th, sink),
        Params::Synthesize(p) => synthesize(cfg, p, th, sink),
    }
}

fn bands(p: &BandsParams, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let mut planes = Vec::new();
    for (i, &kx) in p.k_x.iter().enumerate() {
        let s = band_surface(kx * PI, 1.0, p.big_m, p.d, p.resolution);
        let min_gap = s.iter().map(|b| b.e_plus - b.e_minus).fold(f64::INFINITY, f64::min);
        let name = format!("bands_kx{i}.csv");
        sink.csv(
            &name,
            &hdr(&["k_y_pi", "k_z_pi", "e_plus", "e_minus"]),
            s.iter().map(|b| vec![f(b.k_y / PI), f(b.k_z / PI), f(b.e_plus), f(b.e_minus)]),
        )?;
        planes.push(json!({"k_x_pi": kx, "file": name, "min_gap": min_gap}));
    }
    Ok((json!({"energy_unit": "t'0", "planes": planes}), Vec::new()))
}

fn loci(p: &LociParams, th: &Thresholds, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let res = p.resolution.unwrap_or(th.loci_resolution);
    let l = nodal_loci(p.big_m, p.d, 1.0, res);
    let mut rows = Vec::new();
    for (plane, lines) in [("+", &l.plus), ("-", &l.minus)] {
        for (c, line) in lines.iter().enumerate() {
            for (k, pt) in line.points.iter().enumerate() {
                rows.push(vec![plane.to_string(), c.to_string(), (line.closed as u8).to_string(), k.to_string(), f(pt[0] / PI), f(pt[1] / PI)]);
            }
        }
    }
    sink.csv("loci.csv", &hdr(&["k_x_plane", "curve", "closed", "point", "k_y_pi", "k_z_pi"]), rows)?;
    let label = classify_phase(p.big_m, p.d, 1.0, None)?.label;
    let results = json!({
        "phase": label.as_str(),
        "curves_plus": l.plus.len(),
        "curves_minus": l.minus.len(),
        "closed": l.plus.iter().chain(&l.minus).all(|c| c.closed),
    });
    Ok((results, Vec::new()))
}

fn phases(p: &PhasesParams, th: &Thresholds, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let mut results = serde_json::Map::new();
    if let Some(g) = &p.diagram {
        let cells = phase_diagram((g.m_min, g.m_max), (g.d_min, g.d_max), g.n_m, g.n_d, 1.0)?;
        sink.csv(
            "diagram.csv",
            &hdr(&["big_m", "d", "label", "loops"]),
            cells.iter().map(|c| {
                vec![f(c.big_m), f(c.d), c.label.as_str().into(), c.label.loop_count().map_or(String::new(), |n| n.to_string())]
            }),
        )?;
        let mut counts = std::collections::BTreeMap::new();
        for c in &cells {
            *counts.entry(c.label.as_str()).or_insert(0usize) += 1;
        }
        results.insert("diagram_counts".into(), json!(counts));
    }
    let res = p.map_resolution.unwrap_or(th.phase_map_resolution);
    let mut pts = Vec::new();
    for (i, pt) in p.points.iter().enumerate() {
        let cell = classify_phase(pt[0], pt[1], 1.0, Some(res))?;
        let map = cell.winding_map.as_ref().expect("requested");
        let name = format!("winding_{i}.csv");
        let n = map.resolution();
        let mut rows = Vec::with_capacity(n * n);
        let mut nontrivial = 0usize;
        for iy in 0..n {
            for iz in 0..n {
                let v = map.get(iy, iz);
                nontrivial += (v == Some(1)) as usize;
                rows.push(vec![f(map.k[iy] / PI), f(map.k[iz] / PI), v.map_or(String::new(), |x| x.to_string())]);
            }
        }
        sink.csv(&name, &hdr(&["k_y_pi", "k_z_pi", "nu"]), rows)?;
        pts.push(json!({"big_m": pt[0], "d": pt[1], "label": cell.label.as_str(), "file": name,
            "nontrivial_fraction": nontrivial as f64 / (n * n) as f64}));
    }
    results.insert("points".into(), json!(pts));
    Ok((Value::Object(results), Vec::new()))
}

/// k_z (units of π) where |m'| = 2 at fixed k_y, in [−1, 1].
fn transitions(big_m: f64, d: f64, ky: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if d == 0.0 {
        return out;
    }
    for target in [-2.0, 2.0] {
        let c = (target - big_m) / (2.0 * d) - (ky * PI).cos();
        if c.abs() <= 1.0 {
            let k = c.acos() / PI;
            out.push(k);
            out.push(-k);
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    out
}

fn edge_spectrum(p: &EdgeSpectrumParams, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let kz = linspace(p.k_z_min, p.k_z_max, p.n_k_z);
    let kz_rad: Vec<f64> = kz.iter().map(|k| k * PI).collect();
    let rows = spectrum_sweep(p.n_cells, 1.0, p.big_m, p.d, p.k_y * PI, &kz_rad)?;
    let mut out = Vec::new();
    for (kzr, energies, flagged) in &rows {
        for (i, e) in energies.iter().enumerate() {
            out.push(vec![f(kzr / PI), i.to_string(), f(*e), (*flagged as u8).to_string()]);
        }
    }
    sink.csv("spectrum.csv", &hdr(&["k_z_pi", "index", "energy", "midgap"]), out)?;
    let nu: Vec<Option<u8>> = kz_rad
        .iter()
        .map(|&k| winding_analytic(m_prime(p.big_m, p.d, p.k_y * PI, k), 1.0).ok())
        .collect();
    let flagged: Vec<bool> = rows.iter().map(|r| r.2).collect();
    // Flagged points where the analytic winding is not 1.
    let outside: Vec<f64> = (0..kz.len()).filter(|&i| flagged[i] && nu[i] != Some(1)).map(|i| kz[i]).collect();
    // Where the flag switches on or off, against the analytic transitions.
    let switches: Vec<f64> = (1..kz.len()).filter(|&i| flagged[i] != flagged[i - 1]).map(|i| 0.5 * (kz[i] + kz[i - 1])).collect();
    let analytic: Vec<f64> = transitions(p.big_m, p.d, p.k_y).into_iter().filter(|t| *t > kz[0] && *t < kz[kz.len() - 1]).collect();
    let nearest = |x: f64, set: &[f64]| set.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min);
    let offset = switches
        .iter()
        .map(|&x| nearest(x, &analytic))
        .chain(analytic.iter().map(|&x| nearest(x, &switches)))
        .fold(0.0, f64::max);
    let step = if kz.len() > 1 { kz[1] - kz[0] } else { 0.0 };
    let count = flagged.iter().filter(|x| **x).count();
    let results = json!({
        "energy_unit": "t'0",
        "n_cells": p.n_cells,
        "flagged_count": count,
        "flag_switches_k_z_pi": switches,
        "analytic_transitions_k_z_pi": analytic,
        "boundary_offset_k_z_pi": offset,
        "grid_step_k_z_pi": step,
        "flagged_outside_nu1_k_z_pi": outside,
    });
    let checks = vec![
        Check::new(
            "mid-gap pair only where nu = 1",
            outside.is_empty(),
            format!("{count} of {} k_z points flagged, {} outside the nu = 1 interval", kz.len(), outside.len()),
        ),
        Check::new(
            "mid-gap boundary at analytic transition",
            offset <= step * (1.0 + 1e-9),
            format!("largest offset {offset:.4} pi, grid step {step:.4} pi"),
        ),
    ];
    Ok((results, checks))
}

/// Real and imaginary parts of the gauge-stripped ↑ components, plus max |Im|/max |Re|.
fn stripped_profile(psi: &[C64], n: usize) -> Result<(Vec<f64>, f64)> {
    let s = gauge_transform_state(psi, GaugeDirection::Inverse)?;
    let up: Vec<C64> = (0..n).map(|l| s[polariton_index(l, Spin::Up)]).collect();
    let re = up.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let im = s.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok((up.iter().map(|z| z.re).collect(), if re > 0.0 { im / re } else { im }))
}

fn edge_wavefunctions(p: &EdgeWavefunctionsParams, th: &Thresholds, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let m = m_prime(p.big_m, p.d, p.k_y * PI, p.k_z * PI);
    let params = NodalLoopParams::new(p.n_cells, 1.0, m)?;
    let spec = open_chain_spectrum_with(&params, th);
    let pair = analytic_edge_states(p.n_cells, m, 1.0, p.law)?;
    let ov = edge_overlap(&spec, &pair)?;
    let (al, ar) = pair.stripped()?;
    let n = p.n_cells;
    let (nl, res_l) = stripped_profile(&ov.numeric_left, n)?;
    let (nr, res_r) = stripped_profile(&ov.numeric_right, n)?;
    let ana_l: Vec<f64> = (0..n).map(|l| al[polariton_index(l, Spin::Up)].re).collect();
    let ana_r: Vec<f64> = (0..n).map(|l| ar[polariton_index(l, Spin::Up)].re).collect();
    sink.csv(
        "wavefunctions.csv",
        &hdr(&["site", "left_analytic", "left_numeric", "right_analytic", "right_numeric", "residual_left", "residual_right"]),
        (0..n).map(|l| {
            vec![(l + 1).to_string(), f(ana_l[l]), f(nl[l]), f(ana_r[l]), f(nr[l]), f(ov.residual_left[l]), f(ov.residual_right[l])]
        }),
    )?;
    let imag = res_l.max(res_r);
    // The other decay law, for reference.
    let other = match p.law {
        DecayLaw::ClosedForm => DecayLaw::TransferMatrix,
        DecayLaw::TransferMatrix => DecayLaw::ClosedForm,
    };
    let other_overlap = edge_overlap(&spec, &analytic_edge_states(n, m, 1.0, other)?)?.min();
    let results = json!({
        "m_eff": m,
        "law": p.law,
        "q": pair.q,
        "lambda": pair.lambda,
        "transfer_ratio": m / 2.0,
        "overlap": ov,
        "other_law": other,
        "other_law_overlap": other_overlap,
        "imaginary_residue": imag,
        "midgap_flagged": spec.midgap.is_some(),
    });
    let checks = vec![
        Check::new("overlap", ov.min() >= th.edge_overlap_min, format!("min overlap {:.6}, need {}", ov.min(), th.edge_overlap_min)),
        Check::new("stripped profiles real", imag <= 1e-8, format!("max |Im|/max |Re| = {imag:.2e}")),
    ];
    Ok((results, checks))
}

fn rabi(p: &RabiParams, th: &Thresholds, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let mut results = Vec::new();
    let mut checks = Vec::new();
    for &tc in &p.transitions {
        let r = run_rabi_test(&p.setup, tc, &p.integrator, th)?;
        let name = format!("rabi_{}A_{}B.csv", tc.from.symbol(), tc.to.symbol());
        sink.csv(
            &name,
            &hdr(&["t_us", "target_population"]),
            r.times.iter().zip(&r.target_population).map(|(t, v)| vec![f(*t), f(*v)]),
        )?;
        if tc.from == Spin::Up && tc.to == Spin::Down {
            if let Some(f3) = r.fidelity(3) {
                checks.push(Check::new(
                    "third-cycle fidelity upA->downB",
                    (f3 - th.rabi_fidelity_target).abs() <= th.rabi_fidelity_tolerance,
                    format!("{f3:.5}, target {} +- {}", th.rabi_fidelity_target, th.rabi_fidelity_tolerance),
                ));
            }
            checks.push(Check::new(
                "non-target survival upA->downB",
                r.min_survival > th.survival_min,
                format!("{:.5}, need > {}", r.min_survival, th.survival_min),
            ));
        }
        results.push(json!({
            "transition": tc.to_string(),
            "tone_frequency_mhz": r.tone_frequency_mhz,
            "rabi_period_us": r.rabi_period,
            "cycle_fidelities": r.cycle_fidelities,
            "survivals": r.survivals,
            "min_survival": r.min_survival,
            "convergence_infidelity": r.convergence_infidelity,
            "file": name,
        }));
    }
    Ok((json!({"transitions": results}), checks))
}

fn expected_nu(s: &NodalSetup) -> Option<u8> {
    winding_analytic(s.m_eff(), s.t0()).ok()
}

fn write_series(sink: &mut Sink, name: &str, rec: &TrajectoryRecord, pick: impl Fn(usize) -> Vec<f64>) -> Result<()> {
    let n = pick(0).len();
    let mut header = vec!["t_us".to_string()];
    header.extend((1..=n).map(|l| format!("l{l}")));
    sink.csv(
        name,
        &header,
        (0..rec.len()).map(|k| {
            let mut row = vec![f(rec.times[k])];
            row.extend(pick(k).into_iter().map(f));
            row
        }),
    )
}

fn edge_dynamics(p: &EdgeDynamicsParams, th: &Thresholds, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let noise = p.noise.to_spec()?;
    let mut results = Vec::new();
    let mut checks = Vec::new();
    for &kz in &p.k_z_values {
        let setup = NodalSetup { k_z: kz, ..p.setup.clone() };
        let r = run_edge_detection(&setup, p.side, p.t_final, Some(&noise), &p.integrator, th)?;
        let tag = kz_tag(kz);
        let rec = &r.record;
        write_series(sink, &format!("edge_{tag}_density.csv"), rec, |k| rec.density(k))?;
        write_series(sink, &format!("edge_{tag}_qubit.csv"), rec, |k| rec.qubit[k].clone())?;
        write_series(sink, &format!("edge_{tag}_photon.csv"), rec, |k| rec.photon[k].clone())?;
        let nu = expected_nu(&setup);
        match nu {
            Some(1) => {
                checks.push(Check::new(
                    format!("edge site maximal (k_z = {kz} pi)"),
                    r.edge_is_max,
                    format!("site {} holds {:.4}; maximum at site {}", r.edge_site + 1, r.edge_density, r.max_site + 1),
                ));
                checks.push(Check::new(
                    format!("qubit/photon anticorrelated (k_z = {kz} pi)"),
                    r.qubit_photon_correlation < th.correlation_max,
                    format!("{:.3}, need < {}", r.qubit_photon_correlation, th.correlation_max),
                ));
            }
            Some(_) => checks.push(Check::new(
                format!("edge site not maximal (k_z = {kz} pi)"),
                !r.edge_is_max,
                format!("site {} holds {:.4}; maximum at site {}", r.edge_site + 1, r.edge_density, r.max_site + 1),
            )),
            None => {}
        }
        results.push(json!({
            "k_z_pi": kz,
            "m_eff_over_t0": setup.m_eff() / setup.t0(),
            "expected_nu": nu,
            "edge_site": r.edge_site + 1,
            "edge_density": r.edge_density,
            "max_site": r.max_site + 1,
            "edge_is_max": r.edge_is_max,
            "qubit_photon_correlation": r.qubit_photon_correlation,
            "final_density": rec.final_density(),
            "max_norm_drift": rec.max_drift,
            "convergence_infidelity": rec.convergence_infidelity,
            "steps": rec.steps,
        }));
    }
    Ok((json!({"gamma_khz": p.noise.gamma_khz, "runs": results}), checks))
}

fn chiral(p: &ChiralParams, th: &Thresholds, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let noise = p.noise.to_spec()?;
    let mut results = Vec::new();
    let mut checks = Vec::new();
    for &kz in &p.k_z_values {
        let setup = NodalSetup { k_z: kz, ..p.setup.clone() };
        let r = run_chiral_center(&setup, p.t_final, Some(&noise), &p.integrator, th)?;
        let name = format!("chiral_{}.csv", kz_tag(kz));
        sink.csv(
            &name,
            &hdr(&["t_us", "chiral_center"]),
            r.record.times.iter().zip(&r.record.chiral).map(|(t, c)| vec![f(*t), f(*c)]),
        )?;
        let nu = expected_nu(&setup);
        if let Some(nu) = nu {
            let want = nu as f64 / 2.0;
            checks.push(Check::new(
                format!("oscillation center (k_z = {kz} pi)"),
                (r.center - want).abs() <= th.chiral_center_tolerance,
                format!("{:.4}, expected {want} +- {}", r.center, th.chiral_center_tolerance),
            ));
        }
        results.push(json!({
            "k_z_pi": kz,
            "expected_nu": nu,
            "start_site": r.start_site + 1,
            "center": r.center,
            "drift": r.drift,
            "nu_estimate": r.nu_estimate,
            "file": name,
            "steps": r.record.steps,
        }));
    }
    Ok((json!({"gamma_khz": p.noise.gamma_khz, "n_cells": p.setup.n_cells, "runs": results}), checks))
}

fn sweep(p: &SweepParams, th: &Thresholds, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let gammas: Vec<f64> = p.gamma_khz.iter().map(|g| crate::units::khz(*g)).collect();
    let rows = decoherence_sweep(p.kind, &p.setup, &p.n_cells, &p.k_z_values, &gammas, p.duration(), &p.integrator, th)?;
    sink.csv(
        "sweep.csv",
        &hdr(&["experiment", "n_cells", "k_z_pi", "gamma_khz", "value", "nontrivial", "steps"]),
        rows.iter().map(|r| {
            vec![
                format!("{:?}", r.experiment).to_lowercase(),
                r.n_cells.to_string(),
                f(r.k_z),
                f(r.gamma / (2.0 * PI) * 1e3),
                f(r.value),
                (r.nontrivial as u8).to_string(),
                r.steps.to_string(),
            ]
        }),
    )?;
    let table: Vec<Value> = rows
        .iter()
        .map(|r| json!({"n_cells": r.n_cells, "k_z_pi": r.k_z, "gamma_khz": r.gamma / (2.0 * PI) * 1e3, "value": r.value, "nontrivial": r.nontrivial}))
        .collect();
    Ok((json!({"kind": p.kind, "t_final_us": p.duration(), "rows": table}), Vec::new()))
}

fn synthesize(cfg: &ExperimentConfig, p: &SynthesizeParams, th: &Thresholds, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let circuit = p.circuit.to_circuit()?;
    let schedule = load_schedule(cfg, p)?.to_schedule(th, true)?;
    let mut links = Vec::new();
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    for (l, tones) in schedule.links().iter().enumerate() {
        let syn = synthesize_flux_for_hopping(tones, &circuit)?;
        let rep = verify_synthesis(&syn, tones)?;
        for (k, line) in rep.lines.iter().enumerate() {
            checks.push(Check::new(
                format!("link {} tone {k} amplitude", l + 1),
                line.amplitude_rel_error <= th.fft_amplitude_rel,
                format!("relative error {:.2e}, limit {}", line.amplitude_rel_error, th.fft_amplitude_rel),
            ));
            checks.push(Check::new(
                format!("link {} tone {k} phase", l + 1),
                line.phase_error <= th.fft_phase,
                format!("error {:.2e} rad, limit {}", line.phase_error, th.fft_phase),
            ));
        }
        checks.push(Check::new(
            format!("link {} spurious lines", l + 1),
            rep.spurious_rel < th.fft_harmonic_rel,
            format!("{:.2e} of the weakest line, limit {}", rep.spurious_rel, th.fft_harmonic_rel),
        ));
        links.push(json!({
            "link": l + 1,
            "series_inductance_nh": syn.series_inductance * 1e9,
            "tones": syn.drive.tones.iter().map(|t| json!({
                "strength": t.strength,
                "frequency_mhz": crate::units::to_mhz(t.frequency),
                "phase": t.phase,
            })).collect::<Vec<_>>(),
        }));
        reports.push(json!({"link": l + 1, "report": rep}));
    }
    let drive = json!({
        "critical_current_ua": circuit.critical_current * 1e6,
        "phi_dc_over_phi0": circuit.phi_dc() / crate::circuit::PHI0,
        "links": links,
    });
    sink.json("flux_drive.json", &drive)?;
    Ok((json!({"verification": reports}), checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_points() {
        let t = transitions(0.0, 1.0, 0.0);
        // cos k_z = 0 → ±π/2; cos k_z = −2 has no solution.
        assert_eq!(t.len(), 2);
        assert!((t[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tags() {
        assert_eq!(kz_tag(0.7), "kz0p7");
        assert_eq!(kz_tag(-0.25), "kzm0p25");
    }
}
