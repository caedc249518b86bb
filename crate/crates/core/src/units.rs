//! Unit conversions. Catalog values are in µg-based units; everything else
//! is SI.

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// One micro-g in m/s².
pub const MICRO_G: f64 = STANDARD_GRAVITY * 1e-6;

#[inline]
pub fn ug_to_si(value: f64) -> f64 {
    value * MICRO_G
}

#[inline]
pub fn si_to_ug(value: f64) -> f64 {
    value / MICRO_G
}
