//! Margin tracking over time and under clock-offset sweeps.
//!
//! The attack modeled here corrupts the load-bus PMU's GPS clock, so its
//! *voltage* phasor rotates by `Δθ_R` relative to the remote-referenced
//! current feed it is paired with. A rotation common to both quantities
//! would cancel out of every index (see the estimator's property tests);
//! the frame *mismatch* is what reaches the margins — and it reaches them
//! unevenly: the impedance-ratio margin depends only on magnitudes and
//! survives untouched, while the power margin picks up the rotated power
//! angle and drifts, asymmetrically in the sign of `Δθ_R`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phasor::Phasor;

use super::margins::{margin_error_metric, margin_indices, MarginIndices};
use super::scenario::{run_voltage_scenario, VoltageFrame, VoltageScenario};
use super::thevenin::{estimate_thevenin, ThevEstimate};

/// Sliding estimation window length, frames.
pub const ESTIMATION_WINDOW: usize = 20;

/// One frame of the margin pipeline's output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginFrame {
    pub t: f64,
    /// Load-bus voltage as the (possibly attacked) PMU reports it.
    pub v: Phasor,
    pub i: Phasor,
    /// Current Thevenin estimate; `None` until a window has filled and
    /// produced at least one valid fit.
    pub estimate: Option<ThevEstimate>,
    pub margins: Option<MarginIndices>,
    /// True when this frame shows a reused (or absent) estimate because its
    /// own window was unusable.
    pub stale: bool,
    pub collapse: bool,
}

/// Run the sliding-window estimation and margin pipeline over a scenario's
/// frames, with the load-bus voltage rotated by `dtheta_deg`.
///
/// Windows whose excitation is too weak keep the last valid estimate and
/// mark the frame stale; frames before the first valid estimate carry no
/// margins at all.
pub fn assess_margins(frames: &[VoltageFrame], dtheta_deg: f64) -> Result<Vec<MarginFrame>> {
    let attacked: Vec<(Phasor, Phasor)> =
        frames.iter().map(|f| (f.v.rotated_deg(dtheta_deg), f.i)).collect();
    let mut out = Vec::with_capacity(frames.len());
    let mut current: Option<ThevEstimate> = None;
    for (k, frame) in frames.iter().enumerate() {
        let (v, i) = attacked[k];
        let mut stale = true;
        if k + 1 >= ESTIMATION_WINDOW {
            let window = &attacked[k + 1 - ESTIMATION_WINDOW..=k];
            let vw: Vec<Phasor> = window.iter().map(|(v, _)| *v).collect();
            let iw: Vec<Phasor> = window.iter().map(|(_, i)| *i).collect();
            match estimate_thevenin(&vw, &iw) {
                Ok(est) => {
                    current = Some(est);
                    stale = false;
                }
                Err(Error::Singular(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let margins = match &current {
            Some(est) => Some(margin_indices(est, v, i)?),
            None => None,
        };
        out.push(MarginFrame {
            t: frame.t,
            v,
            i,
            estimate: current,
            margins,
            stale,
            collapse: frame.collapse,
        });
    }
    Ok(out)
}

/// One sweep point's emitted frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageSweepFrame {
    pub dtheta_deg: f64,
    pub m: MarginFrame,
}

/// Per-offset damage summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageSummary {
    pub dtheta_deg: f64,
    /// Mean absolute power-margin discrepancy against the clean run.
    pub margin_p_metric: f64,
    /// Largest impedance-margin deviation against the clean run — expected
    /// to sit at rounding noise.
    pub margin_z_max_dev: f64,
}

/// Full result of a voltage-margin attack sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TsaVoltageSweep {
    pub frames: Vec<VoltageSweepFrame>,
    pub summaries: Vec<VoltageSummary>,
}

/// Replay the margin pipeline at every offset in `dthetas_deg`.
///
/// The underlying scenario is solved once; each offset only re-runs the
/// estimation and margin stages on rotated measurements. Output preserves
/// the input offset order.
pub fn sweep_tsa_voltage(
    vs: &VoltageScenario,
    dthetas_deg: &[f64],
    seed: u64,
) -> Result<TsaVoltageSweep> {
    if dthetas_deg.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one offset".into()));
    }
    for &deg in dthetas_deg {
        if !deg.is_finite() {
            return Err(Error::InvalidInput("sweep offsets must be finite".into()));
        }
    }
    let base = run_voltage_scenario(vs, seed)?;
    let clean = assess_margins(&base, 0.0)?;

    let per_offset: Vec<(Vec<MarginFrame>, VoltageSummary)> = dthetas_deg
        .par_iter()
        .map(|&deg| {
            let attacked = assess_margins(&base, deg)?;
            let mut clean_p = Vec::new();
            let mut attacked_p = Vec::new();
            let mut z_dev: f64 = 0.0;
            for (c, a) in clean.iter().zip(&attacked) {
                if let (Some(mc), Some(ma)) = (c.margins, a.margins) {
                    clean_p.push(mc.margin_p);
                    attacked_p.push(ma.margin_p);
                    z_dev = z_dev.max((ma.margin_z - mc.margin_z).abs());
                }
            }
            let metric = margin_error_metric(&clean_p, &attacked_p)?;
            Ok((
                attacked,
                VoltageSummary { dtheta_deg: deg, margin_p_metric: metric, margin_z_max_dev: z_dev },
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut frames = Vec::with_capacity(base.len() * dthetas_deg.len());
    let mut summaries = Vec::with_capacity(dthetas_deg.len());
    for (&deg, (rows, summary)) in dthetas_deg.iter().zip(per_offset) {
        frames.extend(rows.into_iter().map(|m| VoltageSweepFrame { dtheta_deg: deg, m }));
        summaries.push(summary);
    }
    Ok(TsaVoltageSweep { frames, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn zero_offset_sweeps_report_zero_damage() {
        let vs = VoltageScenario::default();
        let sweep = sweep_tsa_voltage(&vs, &[0.0], 1).unwrap();
        assert_eq!(sweep.summaries[0].margin_p_metric, 0.0);
        assert_eq!(sweep.summaries[0].margin_z_max_dev, 0.0);
    }

    #[test]
    fn pipeline_tracks_every_frame_once_warmed_up() {
        let vs = VoltageScenario::default();
        let frames = assess_margins(&run_voltage_scenario(&vs, 0).unwrap(), 0.0).unwrap();
        // The default scenario's modulation keeps every window excited, so
        // after the first window fills no frame should fall back to a stale
        // estimate or drop its margins.
        for f in &frames[ESTIMATION_WINDOW - 1..] {
            assert!(!f.stale, "stale frame at t={}", f.t);
            let m = f.margins.expect("margins missing on a warmed-up frame");
            assert!(m.margin_p >= 0.0);
            assert!(f.estimate.unwrap().condition.is_finite());
        }
    }

    #[test]
    fn impedance_margin_is_immune_to_the_attack() {
        let vs = VoltageScenario::default();
        let sweep = sweep_tsa_voltage(&vs, &[25.0, -25.0], 1).unwrap();
        for s in &sweep.summaries {
            assert!(
                s.margin_z_max_dev < 1e-9,
                "margin_z moved by {} at {}°",
                s.margin_z_max_dev,
                s.dtheta_deg
            );
            assert!(s.margin_p_metric > 1e-3, "margin_p should visibly drift");
        }
    }

    #[test]
    fn power_margin_damage_grows_with_offset_and_is_asymmetric() {
        let vs = VoltageScenario::default();
        let offsets = [5.0, 15.0, 25.0, -5.0, -15.0, -25.0, 20.0, -20.0];
        let sweep = sweep_tsa_voltage(&vs, &offsets, 1).unwrap();
        let metric: Vec<f64> = sweep.summaries.iter().map(|s| s.margin_p_metric).collect();
        assert!(metric[0] < metric[1] && metric[1] < metric[2], "positive arm: {metric:?}");
        assert!(metric[3] < metric[4] && metric[4] < metric[5], "negative arm: {metric:?}");
        assert!(metric[6] > metric[7], "+20° should hurt more than -20°: {metric:?}");
    }

    #[test]
    fn unexcited_windows_never_produce_an_estimate() {
        let mut vs = VoltageScenario::default();
        vs.modulation = 0.0;
        vs.fault_window_s = (20.0, 20.5);
        vs.trip_times_s = (40.0, 60.0);
        let frames = assess_margins(&run_voltage_scenario(&vs, 0).unwrap(), 0.0).unwrap();
        assert!(frames.iter().all(|f| f.stale && f.margins.is_none() && f.estimate.is_none()));
    }

    #[test]
    fn frames_before_the_window_fills_carry_no_margins() {
        let vs = VoltageScenario::default();
        let frames = assess_margins(&run_voltage_scenario(&vs, 0).unwrap(), 0.0).unwrap();
        for f in &frames[..ESTIMATION_WINDOW - 1] {
            assert!(f.stale && f.margins.is_none());
        }
        assert!(!frames[ESTIMATION_WINDOW - 1].stale);
        assert!(frames[ESTIMATION_WINDOW - 1].margins.is_some());
    }

    #[test]
    fn empty_and_non_finite_sweeps_are_rejected() {
        let vs = VoltageScenario::default();
        assert!(sweep_tsa_voltage(&vs, &[], 0).is_err());
        assert!(sweep_tsa_voltage(&vs, &[f64::NAN], 0).is_err());
        let mut bad = VoltageScenario::default();
        bad.zs_pu = Complex64::ZERO;
        assert!(sweep_tsa_voltage(&bad, &[0.0], 0).is_err());
    }
}
