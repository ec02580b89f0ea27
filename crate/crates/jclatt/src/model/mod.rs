//! Physical lattice, dressed states, drive waveforms and the lab-frame
//! Hamiltonian on a truncated photon/qubit product space.

mod basis;
mod cell;
mod drive;
mod hamiltonian;
pub mod io;
mod polariton;
mod sparse;

pub use basis::{build_basis, HilbertBasis, Ladder};
pub use cell::{
    dressed_levels, hopping_intervals, DressedLevels, HoppingInterval, HoppingIntervals,
    LatticeSpec, Spin, UnitCellParams,
};
pub use drive::{
    drive_value, nodal_drive, DriveSchedule, DriveTone, NodalPhaseConvention, ToneConflict,
};
pub use hamiltonian::{build_lab_hamiltonian, DrivenHamiltonian, LatticeOperator};
pub use polariton::{
    dressed_hopping_element, polariton_amplitude, polariton_projectors, polariton_state, PolaritonOperators,
};
pub use sparse::SparseMatrix;
