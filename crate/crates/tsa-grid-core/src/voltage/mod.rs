//! Voltage-stability monitoring and its clock-attack failure modes.
//!
//! A load-bus PMU streams voltage and current phasors; a sliding-window
//! least-squares fit recovers the Thevenin equivalent seen from the bus,
//! and two stability indices follow from it: an impedance-ratio margin and
//! a loadability (power) margin. The scenario generator produces the input
//! stream — a modulated source feeding a parallel-line corridor through
//! staged fault and line-trip events — and the sweep driver replays the
//! whole pipeline under a range of receiving-clock offsets to measure how
//! far each index drifts.

mod margins;
mod scenario;
mod sweep;
mod thevenin;

pub use margins::{margin_error_metric, margin_indices, margin_p, margin_z, MarginIndices};
pub use scenario::{run_voltage_scenario, VoltageFrame, VoltageScenario};
pub use sweep::{
    assess_margins, sweep_tsa_voltage, MarginFrame, TsaVoltageSweep, VoltageSummary,
    VoltageSweepFrame, ESTIMATION_WINDOW,
};
pub use thevenin::{estimate_thevenin, ThevEstimate, CONDITION_LIMIT, MIN_WINDOW};
