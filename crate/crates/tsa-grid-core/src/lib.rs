//! Phasor-domain simulation of GPS time-stamp attacks (TSA) on synchronized
//! phasor measurement applications.
//!
//! A PMU stamps its phasors with GPS-disciplined time. Spoofing the GPS signal
//! shifts that clock by `Δt`, which rotates every reported phasor by
//! `Δθ = 360·f0·Δt` degrees while leaving magnitudes untouched. This crate
//! models the attack end to end:
//!
//! * [`gps`] — C/A code generation, baseband scene synthesis, acquisition,
//!   and the jam-then-spoof capture sequence that produces the clock shift.
//! * [`phasor`] — phasor arithmetic, line constants, and the clock-offset to
//!   phase-rotation mapping shared by every downstream study.
//! * [`line_fault`] — two-terminal fault detection and location on short,
//!   medium, and long lines, and how asynchronism corrupts both.
//! * [`voltage`] — Thevenin-equivalent voltage-stability monitoring at a load
//!   bus and the asymmetric bias TSA injects into the power margin.
//! * [`event`] — multilateration of a disturbance from arrival stamps, and
//!   the mislocation caused by a single victim receiver.
//! * [`harness`] — the key-value scenario configs, sweep runner, CSV
//!   emission, and run manifests behind the `tsa-grid-sim` CLI.
//!
//! All angles cross public interfaces in degrees; radians stay internal.
//! Every stochastic path takes an explicit seed, and a given (config, seed)
//! pair reproduces its output streams byte for byte.

pub mod error;
pub mod event;
pub mod gps;
pub mod harness;
pub mod line_fault;
mod linalg;
pub mod phasor;
pub mod voltage;

pub use error::{Error, Result};
