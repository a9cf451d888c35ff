//! Unit conversions. Angular frequencies are rad/s throughout the library.

use std::f64::consts::TAU;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn mhz_to_rad(mhz: f64) -> f64 {
    TAU * mhz * 1e6
}

pub fn rad_to_mhz(rad: f64) -> f64 {
    rad / (TAU * 1e6)
}

pub fn rad_to_hz(rad: f64) -> f64 {
    rad / TAU
}

/// Amplitude ratio in decibels, `20·log10(ratio)`.
pub fn amplitude_db(ratio: f64) -> f64 {
    20.0 * ratio.log10()
}

/// Vacuum wavelength in meters for a frequency in Hz.
pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}
