//! Time evolution under the driven lab Hamiltonian, pure and open.
//!
//! The default propagator is a fourth-order commutator-free Magnus scheme
//! whose exponentials are evaluated by Chebyshev series on the invariant
//! sectors of the Hamiltonian (parity sectors when counter-rotating terms
//! are present). Fixed-step RK4 is available for small systems.

mod config;
mod experiments;
mod lindblad;
mod observe;
mod propagator;
mod pure;

pub use config::{Frame, IntegratorConfig, Scheme};
pub use experiments::{
    decoherence_sweep, run_chiral_center, run_edge_detection, run_rabi_test, ChiralResult, EdgeResult, EdgeSide,
    ExperimentKind, NodalSetup, NodalSystem, RabiResult, RabiSetup, SweepRow, ToneChoice,
};
pub use lindblad::{evolve_lindblad, evolve_lindblad_from_state, DensityBlocks, NoiseSpec};
pub use observe::{Observer, TrajectoryRecord};
pub use pure::{evolve_pure, evolve_pure_sampled};
