//! Rotating-frame polariton models: the general spin-1/2 lattice, the nodal
//! chain, the gauge map V, the lab→rotating-frame map and RWA checks.
//!
//! Polariton vectors have length 2N, ordered site-major, spin-minor:
//! (↑₀, ↓₀, ↑₁, ↓₁, …).

mod export;
mod frame;
mod gauge;
mod lattice;
mod nodal;
mod rwa;

pub use export::{read_matrix_csv, write_matrix_csv, EffectiveFile, HoppingFile, LinkFile};
pub use frame::{frame_phase, polariton_to_lab, rotating_frame_map};
pub use gauge::{gauge_matrix, gauge_transform_operator, gauge_transform_state, GaugeDirection};
pub use lattice::{build_effective_hamiltonian, polariton_index, EffectiveLatticeParams, Hopping, LinkHoppings};
pub use nodal::{build_nodal_chain, chiral_operator, chiral_position_operator, m_prime, NodalLoopParams};
pub use rwa::{effective_from_drive, realize_effective, resonant_tone, validate_rwa, RwaReport, RwaViolation};
