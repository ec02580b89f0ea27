//! Jaynes-Cummings lattice simulator.
//!
//! Units: ħ = 1, angular frequencies in rad/μs, time in μs. A frequency of
//! f MHz is stored as `2π·f` (see [`units::mhz`]). Sites and links are
//! 0-based in the API; site 0 is the first A-type cell. Output files label
//! sites from 1.

pub mod bands;
pub mod circuit;
pub mod defaults;
pub mod dynamics;
pub mod edge;
pub mod effective;
mod error;
pub mod linalg;
pub mod model;
pub mod runner;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
