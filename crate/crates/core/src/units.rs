//! Physical constants and unit conversions.

use std::f64::consts::TAU;

/// Bohr magneton over Planck's constant, in Hz per gauss.
pub const BOHR_MAGNETON_HZ_PER_GAUSS: f64 = 1.3996e6;

/// Bohr magneton over ħ, in rad/s per gauss.
pub const BOHR_MAGNETON_RAD_PER_GAUSS: f64 = TAU * BOHR_MAGNETON_HZ_PER_GAUSS;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// One part per million.
pub const PPM: f64 = 1e-6;

/// Ordinary frequency in MHz to angular frequency in rad/s.
#[inline]
pub fn mhz(f: f64) -> f64 {
    TAU * f * 1e6
}

/// Ordinary frequency in kHz to angular frequency in rad/s.
#[inline]
pub fn khz(f: f64) -> f64 {
    TAU * f * 1e3
}

/// Angular frequency in rad/s to ordinary frequency in MHz.
#[inline]
pub fn to_mhz(omega: f64) -> f64 {
    omega / (TAU * 1e6)
}

/// Angular frequency in rad/s to ordinary frequency in kHz.
#[inline]
pub fn to_khz(omega: f64) -> f64 {
    omega / (TAU * 1e3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        assert!((to_mhz(mhz(2.887)) - 2.887).abs() < 1e-12);
        assert!((to_khz(khz(135.0)) - 135.0).abs() < 1e-10);
        assert!((mhz(1.0) - khz(1000.0)).abs() < 1e-6);
    }
}
