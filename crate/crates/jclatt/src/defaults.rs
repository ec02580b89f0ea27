//! Default numeric thresholds, tolerances and grid sizes.
//!
//! Every value here can be overridden per run through the `thresholds`
//! block of a config file. Field names in JSON match the Rust names.
//!
//! | field | default | meaning |
//! |---|---|---|
//! | `hermiticity_rel` | 1e-12 | max ‖H − H†‖/‖H‖ for built operators |
//! | `g_over_omega_max` | 0.2 | JC regime hard limit on g/ω |
//! | `g_over_omega_warn` | 0.1 | JC regime warning level |
//! | `tone_separation_ratio` | 20 | min tone spacing (and tone frequency) over max t0 |
//! | `norm_tolerance` | 1e-6 | pure-state norm drift limit |
//! | `trace_tolerance` | 1e-6 | density-matrix trace drift limit |
//! | `positivity_tolerance` | 1e-6 | most negative eigenvalue allowed for ρ |
//! | `midgap_energy` | 1e-3 | mid-gap flag, in units of t'0 |
//! | `midgap_bulk_factor` | 10 | bulk gap must exceed this × `midgap_energy` |
//! | `winding_gap` | 1e-6 | refuse winding integral below this gap (× t'0) |
//! | `winding_n_kx` | 512 | k_x samples for the winding integral |
//! | `loci_resolution` | 256 | marching-squares grid per axis |
//! | `phase_map_resolution` | 201 | winding-map grid per axis |
//! | `lindblad_dimension_warning` | 2000 | warn when the density matrix is larger |
//! | `rk4_step_limit` | 0.05 | max dt × (fastest residual frequency) for RK4 |
//! | `magnus_step_limit` | 0.5 | max dt × (highest drive frequency) for Magnus |
//! | `chebyshev_tolerance` | 1e-14 | series truncation for the propagator |
//! | `rabi_fidelity_target` | 0.9979 | third-cycle fidelity for the worst transition |
//! | `rabi_fidelity_tolerance` | 0.002 | accepted deviation from the target |
//! | `survival_min` | 0.99 | non-target survival under unmatched tones |
//! | `chiral_center_tolerance` | 0.05 | accepted deviation of the chiral center from ν/2 |
//! | `correlation_max` | -0.5 | qubit/photon correlation must be below this |
//! | `fft_amplitude_rel` | 0.01 | synthesized line amplitude tolerance |
//! | `fft_phase` | 1e-3 | synthesized line phase tolerance (rad) |
//! | `fft_harmonic_rel` | 0.05 | spurious line level over the weakest target line |
//! | `edge_overlap_min` | 0.999 | analytic vs numeric edge-state overlap |

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub hermiticity_rel: f64,
    pub g_over_omega_max: f64,
    pub g_over_omega_warn: f64,
    pub tone_separation_ratio: f64,
    pub norm_tolerance: f64,
    pub trace_tolerance: f64,
    pub positivity_tolerance: f64,
    pub midgap_energy: f64,
    pub midgap_bulk_factor: f64,
    pub winding_gap: f64,
    pub winding_n_kx: usize,
    pub loci_resolution: usize,
    pub phase_map_resolution: usize,
    pub lindblad_dimension_warning: usize,
    pub rk4_step_limit: f64,
    pub magnus_step_limit: f64,
    pub chebyshev_tolerance: f64,
    pub rabi_fidelity_target: f64,
    pub rabi_fidelity_tolerance: f64,
    pub survival_min: f64,
    pub chiral_center_tolerance: f64,
    pub correlation_max: f64,
    pub fft_amplitude_rel: f64,
    pub fft_phase: f64,
    pub fft_harmonic_rel: f64,
    pub edge_overlap_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            hermiticity_rel: 1e-12,
            g_over_omega_max: 0.2,
            g_over_omega_warn: 0.1,
            tone_separation_ratio: 20.0,
            norm_tolerance: 1e-6,
            trace_tolerance: 1e-6,
            positivity_tolerance: 1e-6,
            midgap_energy: 1e-3,
            midgap_bulk_factor: 10.0,
            winding_gap: 1e-6,
            winding_n_kx: 512,
            loci_resolution: 256,
            phase_map_resolution: 201,
            lindblad_dimension_warning: 2000,
            rk4_step_limit: 0.05,
            magnus_step_limit: 0.5,
            chebyshev_tolerance: 1e-14,
            rabi_fidelity_target: 0.9979,
            rabi_fidelity_tolerance: 0.002,
            survival_min: 0.99,
            chiral_center_tolerance: 0.05,
            correlation_max: -0.5,
            fft_amplitude_rel: 0.01,
            fft_phase: 1e-3,
            fft_harmonic_rel: 0.05,
            edge_overlap_min: 0.999,
        }
    }
}

/// Default photon cutoff per site.
pub const N_PH_MAX: usize = 2;
/// Default cap on total excitations.
pub const N_EXC_MAX: usize = 3;
/// Default time step (μs) for lab-frame propagation.
pub const DT: f64 = 2e-4;
/// Edge-detection window (μs).
pub const EDGE_DURATION: f64 = 0.5;
/// Chiral-center averaging window (μs).
pub const CHIRAL_DURATION: f64 = 2.0;
