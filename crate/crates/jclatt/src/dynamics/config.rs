use serde::{Deserialize, Serialize};

use crate::defaults;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Commutator-free Magnus, fourth order, two exponentials per step.
    Magnus4,
    /// Classical fixed-step Runge-Kutta.
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    Lab,
    /// Interaction picture with respect to the static diagonal.
    Interaction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub frame: Frame,
    /// Step (μs). The run length is split into ⌈T/dt⌉ equal steps.
    pub dt: f64,
    /// Record every this many steps (the first and last step are always recorded).
    pub record_stride: usize,
    /// Repeat pure runs at dt/2 and report the final-state infidelity.
    pub convergence_check: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            scheme: Scheme::Magnus4,
            frame: Frame::Lab,
            dt: defaults::DT,
            record_stride: 1,
            convergence_check: true,
        }
    }
}

impl IntegratorConfig {
    pub fn with_dt(dt: f64) -> Self {
        IntegratorConfig { dt, ..Default::default() }
    }

    /// Number of steps and the step actually used for a run of length `t_final`.
    pub fn steps(&self, t_final: f64) -> (usize, f64) {
        let n = ((t_final / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, t_final / n as f64)
    }
}
