//! GPS L1 C/A front end: code generation, scene synthesis, acquisition, and
//! the jam-then-spoof capture sequence.
//!
//! Civilian GPS is unauthenticated: the C/A spreading codes are public, so an
//! attacker can transmit a structurally valid replica and, once a receiver's
//! correlator locks to the counterfeit instead of the satellite, walk the
//! receiver's clock solution by choosing the replica's code phase. A code
//! phase shift of `Δchips` maps to a timing error of `Δchips / 1.023e6`
//! seconds — which downstream PMUs turn into phase rotations.
//!
//! The model here is deliberately compact but keeps the parts that matter
//! for capture behavior: true Gold spreading codes (so cross-correlation
//! floors are authentic), complex baseband scenes with per-satellite power,
//! code phase, and Doppler, and a standard coherent correlate-and-pick-peak
//! acquisition over a code-phase x Doppler grid.

mod acquire;
mod code;
mod signal;
mod timing;

pub use acquire::{acquire, acquire_detailed, run_spoof_scenario, AcquisitionGrid, AcquisitionResult, DopplerGrid, SpoofOutcome};
pub use code::{circular_cross_correlation, gen_ca_code, CODE_LENGTH};
pub use signal::{synthesize_baseband, GpsScene, SatelliteSignal};
pub use timing::{spoof_phase_to_timing_error, TimingModel, CHIP_RATE_HZ};
