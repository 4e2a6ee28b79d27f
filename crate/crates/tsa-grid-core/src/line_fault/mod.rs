//! Two-terminal fault detection and location, and what asynchronism between
//! the line-end PMUs does to both.
//!
//! A fault on a two-source line is found from synchronized voltage/current
//! phasors at the two terminals. Three line representations are carried,
//! each with its matched indicator pair and locator:
//!
//! * **short** — series impedance only; indicators `A = |Vs - Vr - z1·L·Is|`
//!   and `B = |Is + Ir|`, closed-form locator.
//! * **medium** — nominal-π; the same shape with shunt-corrected currents
//!   (`B`, `C`), locator by golden-section search on the fault-voltage
//!   mismatch.
//! * **long** — distributed parameters; forward/backward wave components
//!   `N` and `M` whose ratio gives the fault position through a complex
//!   logarithm.
//!
//! Zero asynchronism makes every locator exact on this crate's forward
//! model. A time-stamp attack rotates one end's phasors and biases the
//! estimate; sweeps over the asynchronism angle quantify by how much.

mod detect;
mod locate;
mod network;
mod sweep;

pub use detect::{calibrate_thresholds, detect_fault, detect_with_thresholds, IndicatorTrace};
pub use locate::{
    indicator_names, indicators, indicators_long, indicators_medium, indicators_short, locate,
    locate_long, locate_medium, locate_short, Located,
};
pub use network::{
    solve_fault_network, FaultFrame, FaultScenario, FaultType, LineModel, PhaseMeasurement,
    PHASE_SHIFTS_DEG,
};
pub use sweep::{sweep_tsa_fault, FaultSweepFrame, LocationEstimate, TsaFaultSweep};
