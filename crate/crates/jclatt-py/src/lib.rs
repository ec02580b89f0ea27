//! Python bindings. Structured results come back as plain dicts.

#[pyo3::pymodule]
mod jclatt_py {
    use std::f64::consts::PI;
    use std::path::PathBuf;

    use jclatt::defaults::Thresholds;
    use jclatt::dynamics::{self, EdgeSide, IntegratorConfig, NoiseSpec, ToneChoice};
    use jclatt::edge::{self, DecayLaw};
    use jclatt::model::{DriveTone, Spin};
    use jclatt::runner::{self, ExperimentConfig};
    use jclatt::units::{khz, mhz, to_mhz};
    use pyo3::exceptions::{PyRuntimeError, PyValueError};
    use pyo3::prelude::*;
    use serde_json::json;

    fn err(e: jclatt::Error) -> PyErr {
        match e {
            jclatt::Error::InvalidParameter(_) | jclatt::Error::Config(_) | jclatt::Error::Json(_) => {
                PyValueError::new_err(e.to_string())
            }
            _ => PyRuntimeError::new_err(e.to_string()),
        }
    }

    fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
        py.import("json")?.call_method1("loads", (v.to_string(),))
    }

    fn spin(s: &str) -> PyResult<Spin> {
        s.parse().map_err(err)
    }

    /// Physical JC-lattice parameters for the two-cell frequency-addressing test.
    #[pyclass(name = "RabiSetup")]
    #[derive(Clone)]
    struct PyRabiSetup {
        inner: dynamics::RabiSetup,
    }

    #[pymethods]
    impl PyRabiSetup {
        #[new]
        #[pyo3(signature = (omega_a_mhz=6000.0, g_a_mhz=300.0, omega_b_mhz=5650.0, g_b_mhz=270.0, t0_mhz=3.0, n_ph_max=2, n_exc_max=3, counter_rotating=true, cycles=3))]
        #[allow(clippy::too_many_arguments)]
        fn new(
            omega_a_mhz: f64,
            g_a_mhz: f64,
            omega_b_mhz: f64,
            g_b_mhz: f64,
            t0_mhz: f64,
            n_ph_max: usize,
            n_exc_max: usize,
            counter_rotating: bool,
            cycles: usize,
        ) -> Self {
            PyRabiSetup {
                inner: dynamics::RabiSetup {
                    omega_a_mhz,
                    g_a_mhz,
                    omega_b_mhz,
                    g_b_mhz,
                    t0_mhz,
                    n_ph_max,
                    n_exc_max,
                    counter_rotating,
                    cycles,
                },
            }
        }

        /// The four link-1 hopping intervals in MHz, ascending.
        fn hopping_intervals_mhz(&self) -> PyResult<Vec<f64>> {
            let lat = self.inner.lattice(&Thresholds::default()).map_err(err)?;
            let iv = jclatt::model::hopping_intervals(&lat, 0).map_err(err)?;
            Ok(iv.sorted().into_iter().map(to_mhz).collect())
        }

        /// Drives |from⟩_A → |to⟩_B and reports per-cycle fidelities and survivals.
        #[pyo3(signature = (from_spin="up", to_spin="down", dt=8e-5))]
        fn rabi<'py>(&self, py: Python<'py>, from_spin: &str, to_spin: &str, dt: f64) -> PyResult<Bound<'py, PyAny>> {
            let tone = ToneChoice { from: spin(from_spin)?, to: spin(to_spin)? };
            let cfg = IntegratorConfig { dt, ..Default::default() };
            let r = py.detach(|| dynamics::run_rabi_test(&self.inner, tone, &cfg, &Thresholds::default())).map_err(err)?;
            to_py(
                py,
                &json!({
                    "transition": r.transition,
                    "tone_frequency_mhz": r.tone_frequency_mhz,
                    "rabi_period_us": r.rabi_period,
                    "cycle_fidelities": r.cycle_fidelities,
                    "min_survival": r.min_survival,
                    "survivals": r.survivals,
                    "convergence_infidelity": r.convergence_infidelity,
                }),
            )
        }

        fn __repr__(&self) -> String {
            format!("{:?}", self.inner)
        }
    }

    /// Nodal-loop chain realized with the two-tone drive.
    #[pyclass(name = "NodalSetup")]
    #[derive(Clone)]
    struct PyNodalSetup {
        inner: dynamics::NodalSetup,
    }

    #[pymethods]
    impl PyNodalSetup {
        #[new]
        #[pyo3(signature = (n_cells=20, k_z=0.7, k_y=0.0, big_m=0.0, d=1.0, n_ph_max=2, n_exc_max=3, counter_rotating=true))]
        #[allow(clippy::too_many_arguments)]
        fn new(
            n_cells: usize,
            k_z: f64,
            k_y: f64,
            big_m: f64,
            d: f64,
            n_ph_max: usize,
            n_exc_max: usize,
            counter_rotating: bool,
        ) -> Self {
            let inner = dynamics::NodalSetup {
                n_cells,
                k_z,
                k_y,
                big_m,
                d,
                n_ph_max,
                n_exc_max,
                counter_rotating,
                ..Default::default()
            };
            PyNodalSetup { inner }
        }

        /// m' in units of t'0.
        #[getter]
        fn m_eff(&self) -> f64 {
            self.inner.m_eff() / self.inner.t0()
        }

        #[getter]
        fn n_cells(&self) -> usize {
            self.inner.n_cells
        }

        /// Edge-detection run; γ in kHz (γ/2π), 0 for a closed system.
        #[pyo3(signature = (t_final=0.5, gamma_khz=0.0, side="left", dt=2e-4))]
        fn edge<'py>(&self, py: Python<'py>, t_final: f64, gamma_khz: f64, side: &str, dt: f64) -> PyResult<Bound<'py, PyAny>> {
            let side = match side {
                "left" => EdgeSide::Left,
                "right" => EdgeSide::Right,
                other => return Err(PyValueError::new_err(format!("side must be left or right, got {other:?}"))),
            };
            let noise = NoiseSpec::uniform(khz(gamma_khz)).map_err(err)?;
            let cfg = IntegratorConfig { dt, convergence_check: false, ..Default::default() };
            let r = py
                .detach(|| dynamics::run_edge_detection(&self.inner, side, t_final, Some(&noise), &cfg, &Thresholds::default()))
                .map_err(err)?;
            to_py(
                py,
                &json!({
                    "edge_site": r.edge_site + 1,
                    "edge_density": r.edge_density,
                    "max_site": r.max_site + 1,
                    "edge_is_max": r.edge_is_max,
                    "qubit_photon_correlation": r.qubit_photon_correlation,
                    "times": r.record.times,
                    "final_density": r.record.final_density(),
                }),
            )
        }

        /// Chiral-center run started on the middle cell.
        #[pyo3(signature = (t_final=2.0, gamma_khz=0.0, dt=2e-4))]
        fn chiral<'py>(&self, py: Python<'py>, t_final: f64, gamma_khz: f64, dt: f64) -> PyResult<Bound<'py, PyAny>> {
            let noise = NoiseSpec::uniform(khz(gamma_khz)).map_err(err)?;
            let cfg = IntegratorConfig { dt, convergence_check: false, ..Default::default() };
            let r = py
                .detach(|| dynamics::run_chiral_center(&self.inner, t_final, Some(&noise), &cfg, &Thresholds::default()))
                .map_err(err)?;
            to_py(
                py,
                &json!({
                    "start_site": r.start_site + 1,
                    "center": r.center,
                    "drift": r.drift,
                    "nu_estimate": r.nu_estimate,
                    "times": r.record.times,
                    "chiral": r.record.chiral,
                }),
            )
        }

        fn __repr__(&self) -> String {
            format!("{:?}", self.inner)
        }
    }

    /// m' = M + 2d(cos k_y + cos k_z), momenta in units of π.
    #[pyfunction]
    fn m_prime(big_m: f64, d: f64, k_y: f64, k_z: f64) -> f64 {
        jclatt::effective::m_prime(big_m, d, k_y * PI, k_z * PI)
    }

    #[pyfunction]
    #[pyo3(signature = (m_eff, t0=1.0))]
    fn winding_analytic(m_eff: f64, t0: f64) -> PyResult<u8> {
        jclatt::bands::winding_analytic(m_eff, t0).map_err(err)
    }

    /// Returns (raw, nu, min_gap).
    #[pyfunction]
    #[pyo3(signature = (k_y, k_z, big_m, d, t0=1.0, n_kx=512))]
    fn winding_integral(k_y: f64, k_z: f64, big_m: f64, d: f64, t0: f64, n_kx: usize) -> PyResult<(f64, i64, f64)> {
        let w = jclatt::bands::winding_integral(k_y * PI, k_z * PI, t0, big_m, d, n_kx, Thresholds::default().winding_gap)
            .map_err(err)?;
        Ok((w.raw, w.nu, w.min_gap))
    }

    /// Open-chain energies (units of t'0), ascending.
    #[pyfunction]
    #[pyo3(signature = (n_cells, k_z, big_m=0.0, d=1.0, k_y=0.0))]
    fn open_chain_spectrum(n_cells: usize, k_z: f64, big_m: f64, d: f64, k_y: f64) -> PyResult<Vec<f64>> {
        Ok(edge::open_chain_spectrum(n_cells, 1.0, big_m, d, k_y * PI, k_z * PI).map_err(err)?.energies)
    }

    /// (left, right) overlaps between numeric and analytic edge states.
    #[pyfunction]
    #[pyo3(signature = (n_cells, k_z, big_m=0.0, d=1.0, k_y=0.0, law="closed-form"))]
    fn edge_overlap(n_cells: usize, k_z: f64, big_m: f64, d: f64, k_y: f64, law: &str) -> PyResult<(f64, f64)> {
        let law = match law {
            "closed-form" => DecayLaw::ClosedForm,
            "transfer-matrix" => DecayLaw::TransferMatrix,
            other => return Err(PyValueError::new_err(format!("unknown law {other:?}"))),
        };
        let m = jclatt::effective::m_prime(big_m, d, k_y * PI, k_z * PI);
        let spec = edge::open_chain_spectrum(n_cells, 1.0, big_m, d, k_y * PI, k_z * PI).map_err(err)?;
        let pair = edge::analytic_edge_states(n_cells, m, 1.0, law).map_err(err)?;
        let ov = edge::edge_overlap(&spec, &pair).map_err(err)?;
        Ok((ov.left, ov.right))
    }

    /// Flux drive for one link from (t0 MHz, frequency MHz, phase) tones, plus its verification report.
    #[pyfunction]
    fn synthesize<'py>(py: Python<'py>, tones: Vec<(f64, f64, f64)>) -> PyResult<Bound<'py, PyAny>> {
        let target = tones
            .iter()
            .map(|&(a, f, p)| DriveTone::new(mhz(a), mhz(f), p, 1.0))
            .collect::<jclatt::Result<Vec<_>>>()
            .map_err(err)?;
        let circuit = jclatt::circuit::SquidCircuit::default();
        let syn = jclatt::circuit::synthesize_flux_for_hopping(&target, &circuit).map_err(err)?;
        let rep = jclatt::circuit::verify_synthesis(&syn, &target).map_err(err)?;
        let strengths: Vec<f64> = syn.drive.tones.iter().map(|t| t.strength).collect();
        let v = json!({
            "strengths": strengths,
            "series_inductance_nh": syn.series_inductance * 1e9,
            "report": serde_json::to_value(&rep).map_err(|e| PyRuntimeError::new_err(e.to_string()))?,
        });
        to_py(py, &v)
    }

    /// Schema and physics checks for a config file.
    #[pyfunction]
    fn validate_config<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyAny>> {
        let (cfg, _) = ExperimentConfig::load(&path, None).map_err(err)?;
        let report = runner::validate(&cfg);
        to_py(py, &serde_json::to_value(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?)
    }

    /// Runs a config file like `jclatt run` and returns the summary.
    #[pyfunction]
    #[pyo3(signature = (path, out=None, force=false))]
    fn run_config<'py>(py: Python<'py>, path: PathBuf, out: Option<PathBuf>, force: bool) -> PyResult<Bound<'py, PyAny>> {
        let (cfg, raw) = ExperimentConfig::load(&path, None).map_err(err)?;
        let dir = runner::output_dir(&cfg, out.as_deref());
        let s = py.detach(|| runner::run(&cfg, &raw, &dir, force)).map_err(err)?;
        to_py(py, &serde_json::to_value(&s).map_err(|e| PyRuntimeError::new_err(e.to_string()))?)
    }
}
