//! Unit conversions. Internal angular frequencies are rad/μs.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// f in MHz → angular frequency in rad/μs.
pub fn mhz(f: f64) -> f64 {
    TWO_PI * f
}

/// f in kHz → angular frequency in rad/μs.
pub fn khz(f: f64) -> f64 {
    TWO_PI * f * 1e-3
}

/// Angular frequency in rad/μs → MHz.
pub fn to_mhz(w: f64) -> f64 {
    w / TWO_PI
}

/// Angular frequency in rad/s → rad/μs.
pub fn per_second_to_per_us(w: f64) -> f64 {
    w * 1e-6
}
