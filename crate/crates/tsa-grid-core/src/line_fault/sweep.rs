//! Attack sweeps: how detection and location degrade with asynchronism.
//!
//! A spoofed receiver does not drift smoothly — capture yanks its code
//! phase, so the clock error lands as a step. The sweep models exactly
//! that: the receiving end's phase reference rotates by `Δθ` from
//! `t_attack` onward while the sending end stays honest, and the usual
//! relay pipeline (indicator trace → detection → location) runs on what
//! the corrupted stream shows. Each offset in the sweep is an independent
//! replay of the same underlying fault.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phasor::{apply_tsa, LineEnd, TsaOffset, TwoEndMeasurements};

use super::detect::{detect_fault, IndicatorTrace};
use super::locate::{indicator_names, indicators, locate};
use super::network::{steady_states, FaultScenario, PhaseMeasurement};

/// One emitted frame of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultSweepFrame {
    pub dtheta_deg: f64,
    pub t: f64,
    pub fault_on: bool,
    pub indicator1: f64,
    pub indicator2: f64,
    /// Location output, present from the detection frame onward.
    pub d_est: Option<f64>,
    pub error: Option<f64>,
    pub clamped: bool,
}

/// Summary of one sweep point: what the relay concluded at this offset.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationEstimate {
    pub dtheta_deg: f64,
    pub d_true: f64,
    /// When the detector first fired. Before `t_fault`, this is a false
    /// alarm raised by the attack step itself.
    pub detect_time_s: Option<f64>,
    /// Final (steady post-fault) location estimate, if detection occurred.
    pub d_est: Option<f64>,
    pub error: Option<f64>,
    pub clamped: bool,
}

/// Full result of a fault-location attack sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TsaFaultSweep {
    pub frames: Vec<FaultSweepFrame>,
    pub estimates: Vec<LocationEstimate>,
}

/// Locate the fault on each attacked phase and average the estimates.
///
/// Phases whose measurements still look healthy (the locator reports a
/// degenerate null) are skipped; `None` means no phase produced a fix.
fn average_locate(
    s: &FaultScenario,
    ms: &[TwoEndMeasurements],
) -> Result<Option<(f64, bool)>> {
    let mut sum = 0.0;
    let mut clamped = false;
    let mut n = 0usize;
    for m in ms {
        match locate(s.model, m, &s.line) {
            Ok(l) => {
                sum += l.d_est;
                clamped |= l.clamped;
                n += 1;
            }
            Err(Error::Singular(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((n > 0).then(|| (sum / n as f64, clamped)))
}

/// Run the relay pipeline at every offset in `dthetas_deg`.
///
/// `f0_hz` is the nominal system frequency tying phase to clock error;
/// `t_attack_s` is when the receiving end's offset steps from zero to the
/// sweep value. Results preserve the input offset order.
pub fn sweep_tsa_fault(
    s: &FaultScenario,
    dthetas_deg: &[f64],
    f0_hz: f64,
    t_attack_s: f64,
) -> Result<TsaFaultSweep> {
    s.validate()?;
    if dthetas_deg.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one offset".into()));
    }
    if !(t_attack_s.is_finite() && (0.0..s.duration_s).contains(&t_attack_s)) {
        return Err(Error::InvalidInput(format!(
            "attack time {t_attack_s} must fall inside the simulated span [0, {})",
            s.duration_s
        )));
    }
    let (pre, post) = steady_states(s)?;
    let times = s.frame_times();
    let phases = s.fault_type.faulted_phases();

    let per_offset: Vec<(Vec<FaultSweepFrame>, LocationEstimate)> = dthetas_deg
        .par_iter()
        .map(|&deg| sweep_one(s, deg, f0_hz, t_attack_s, &pre, &post, &times, phases))
        .collect::<Result<Vec<_>>>()?;

    let mut frames = Vec::with_capacity(times.len() * dthetas_deg.len());
    let mut estimates = Vec::with_capacity(dthetas_deg.len());
    for (rows, estimate) in per_offset {
        frames.extend(rows);
        estimates.push(estimate);
    }
    Ok(TsaFaultSweep { frames, estimates })
}

#[allow(clippy::too_many_arguments)]
fn sweep_one(
    s: &FaultScenario,
    dtheta_deg: f64,
    f0_hz: f64,
    t_attack_s: f64,
    pre: &[PhaseMeasurement; 3],
    post: &[PhaseMeasurement; 3],
    times: &[f64],
    phases: &[usize],
) -> Result<(Vec<FaultSweepFrame>, LocationEstimate)> {
    let offset = TsaOffset::from_degrees(dtheta_deg, f0_hz)?;
    let mut trace = IndicatorTrace {
        t: times.to_vec(),
        first: Vec::with_capacity(times.len()),
        second: Vec::with_capacity(times.len()),
        names: indicator_names(s.model),
    };
    let mut frame_meas: Vec<Vec<TwoEndMeasurements>> = Vec::with_capacity(times.len());
    for &t in times {
        let steady = if t >= s.t_fault_s { post } else { pre };
        let attacked = t >= t_attack_s && dtheta_deg != 0.0;
        let ms: Vec<TwoEndMeasurements> = phases
            .iter()
            .map(|&p| {
                let m = steady[p].m;
                if attacked {
                    apply_tsa(&m, LineEnd::Receiving, &offset)
                } else {
                    m
                }
            })
            .collect();
        let mut sums = (0.0, 0.0);
        for m in &ms {
            let (a, b) = indicators(s.model, m, &s.line)?;
            sums.0 += a;
            sums.1 += b;
        }
        trace.first.push(sums.0 / ms.len() as f64);
        trace.second.push(sums.1 / ms.len() as f64);
        frame_meas.push(ms);
    }

    let detected = detect_fault(&trace, s.threshold_ratio)?;
    let mut rows = Vec::with_capacity(times.len());
    let mut final_loc: Option<(f64, bool)> = None;
    for (k, &t) in times.iter().enumerate() {
        let loc = match detected {
            Some(d) if k >= d => average_locate(s, &frame_meas[k])?,
            _ => None,
        };
        rows.push(FaultSweepFrame {
            dtheta_deg,
            t,
            fault_on: t >= s.t_fault_s,
            indicator1: trace.first[k],
            indicator2: trace.second[k],
            d_est: loc.map(|l| l.0),
            error: loc.map(|l| (l.0 - s.d_true).abs()),
            clamped: loc.is_some_and(|l| l.1),
        });
        if loc.is_some() {
            final_loc = loc;
        }
    }
    let estimate = LocationEstimate {
        dtheta_deg,
        d_true: s.d_true,
        detect_time_s: detected.map(|k| times[k]),
        d_est: final_loc.map(|l| l.0),
        error: final_loc.map(|l| (l.0 - s.d_true).abs()),
        clamped: final_loc.is_some_and(|l| l.1),
    };
    Ok((rows, estimate))
}
