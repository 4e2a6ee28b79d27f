//! Receiver clock bookkeeping: from code phase to UTC, and from a spoofed
//! code-phase shift to the timing error it plants.

use crate::error::{Error, Result};

/// C/A chipping rate in hertz.
pub const CHIP_RATE_HZ: f64 = 1.023e6;

/// The affine corrections a receiver applies to its raw time-of-reception.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingModel {
    /// Signal propagation delay from satellite to receiver, seconds.
    pub propagation_delay_s: f64,
    /// Broadcast UTC correction, seconds.
    pub utc_correction_s: f64,
}

impl TimingModel {
    pub fn new(propagation_delay_s: f64, utc_correction_s: f64) -> Result<Self> {
        if !propagation_delay_s.is_finite() || !utc_correction_s.is_finite() {
            return Err(Error::InvalidInput("timing corrections must be finite".into()));
        }
        Ok(Self {
            propagation_delay_s,
            utc_correction_s,
        })
    }

    /// UTC estimate from a raw receiver time stamp:
    /// `t_utc = t_receiver - t_propagation - Δt_utc`.
    pub fn utc_from_receiver(&self, t_receiver_s: f64) -> f64 {
        t_receiver_s - self.propagation_delay_s - self.utc_correction_s
    }
}

/// The receiver clock error produced by locking to a replica whose code
/// phase is shifted by `chip_shift` chips: `Δt = chips / 1.023e6` seconds.
///
/// This is the attacker's lever arm: once tracking follows the counterfeit
/// correlation peak, every stamped measurement inherits this offset.
pub fn spoof_phase_to_timing_error(chip_shift: f64) -> f64 {
    chip_shift / CHIP_RATE_HZ
}
