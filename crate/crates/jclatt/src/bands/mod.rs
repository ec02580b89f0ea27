//! Momentum-space analysis of the nodal-loop model.
//!
//! H(k) = b_y(k) S^y + b_z(k) S^z with b_y = −2t'0 cos k_x and
//! b_z = 2t'0 sin k_x + m'(k_y, k_z). All energies share the unit of t'0.

mod bloch;
mod loci;
mod phase;
mod winding;

pub use bloch::{band_surface, bloch_fields, BandSample, BlochPoint};
pub use loci::{nodal_loci, NodalLoci, Polyline};
pub use phase::{classify_phase, phase_diagram, winding_map, PhaseDiagramCell, PhaseLabel, WindingMap};
pub use winding::{winding_analytic, winding_integral, WindingIntegral};
