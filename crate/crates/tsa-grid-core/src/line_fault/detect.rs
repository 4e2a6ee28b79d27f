//! Threshold-based fault detection on indicator traces.
//!
//! A relay watches the two model indicators frame by frame and declares a
//! fault when both rise a set ratio above their recent quiescent level. Two
//! flavors are provided:
//!
//! * [`detect_fault`] — self-calibrating: each frame is compared against
//!   the median of up to one second of preceding frames, so slow ambient
//!   drift never fires it;
//! * [`calibrate_thresholds`] / [`detect_with_thresholds`] — fixed
//!   thresholds frozen from a reference window, the way a commissioning
//!   engineer would set a relay. A time-stamp attack that steps the
//!   apparent phase angle after commissioning walks straight over these.

use crate::error::{Error, Result};

/// A per-frame time series of one indicator pair.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorTrace {
    pub t: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    /// Display names of the pair, e.g. `("N", "M")`.
    pub names: (&'static str, &'static str),
}

impl IndicatorTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn validate(&self) -> Result<()> {
        if self.t.len() != self.first.len() || self.t.len() != self.second.len() {
            return Err(Error::InvalidInput(
                "indicator trace columns must have equal length".into(),
            ));
        }
        Ok(())
    }
}

/// Median of a nonempty slice.
fn median(xs: &[f64]) -> f64 {
    let mut xs = xs.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("indicators are ordered"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Frames of history a detector needs before it may fire.
const MIN_HISTORY: usize = 10;

/// Scan a trace with a self-calibrating median detector.
///
/// Frame `k` (for `k ≥ 10`) fires when **both** indicators strictly exceed
/// `threshold_ratio` times the median of up to one second of preceding
/// frames. Returns the first firing frame index, or `None`. A trace shorter
/// than ten frames carries too little history to calibrate against and is
/// rejected.
pub fn detect_fault(trace: &IndicatorTrace, threshold_ratio: f64) -> Result<Option<usize>> {
    trace.validate()?;
    if trace.len() < MIN_HISTORY {
        return Err(Error::InvalidInput(format!(
            "detection needs at least {MIN_HISTORY} frames of history, got {}",
            trace.len()
        )));
    }
    if !(threshold_ratio.is_finite() && threshold_ratio > 1.0) {
        return Err(Error::InvalidInput("threshold ratio must exceed 1".into()));
    }
    let dt = trace.t[1] - trace.t[0];
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput("trace times must be increasing".into()));
    }
    let window = (1.0 / dt).round().max(1.0) as usize;
    for k in MIN_HISTORY..trace.len() {
        let start = k.saturating_sub(window);
        let med1 = median(&trace.first[start..k]);
        let med2 = median(&trace.second[start..k]);
        if trace.first[k] > threshold_ratio * med1 && trace.second[k] > threshold_ratio * med2 {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Freeze absolute thresholds from a reference window.
///
/// Returns `threshold_ratio` times the median of each indicator over frames
/// with `t ∈ [window.0, window.1)`.
pub fn calibrate_thresholds(
    trace: &IndicatorTrace,
    window: (f64, f64),
    threshold_ratio: f64,
) -> Result<(f64, f64)> {
    trace.validate()?;
    if !(threshold_ratio.is_finite() && threshold_ratio > 1.0) {
        return Err(Error::InvalidInput("threshold ratio must exceed 1".into()));
    }
    let idx: Vec<usize> = (0..trace.len())
        .filter(|&k| trace.t[k] >= window.0 && trace.t[k] < window.1)
        .collect();
    if idx.is_empty() {
        return Err(Error::InvalidInput(format!(
            "calibration window [{}, {}) contains no frames",
            window.0, window.1
        )));
    }
    let first: Vec<f64> = idx.iter().map(|&k| trace.first[k]).collect();
    let second: Vec<f64> = idx.iter().map(|&k| trace.second[k]).collect();
    Ok((threshold_ratio * median(&first), threshold_ratio * median(&second)))
}

/// Scan a trace against fixed absolute thresholds; first frame where both
/// indicators strictly exceed them, or `None`.
pub fn detect_with_thresholds(trace: &IndicatorTrace, thresholds: (f64, f64)) -> Option<usize> {
    (0..trace.len()).find(|&k| trace.first[k] > thresholds.0 && trace.second[k] > thresholds.1)
}
