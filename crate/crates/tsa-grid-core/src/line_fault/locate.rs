//! Fault indicators and one-ended/two-ended location formulas.
//!
//! Each line model pairs two scalar indicators that are exactly zero on a
//! healthy line with a locator that inverts the faulted network for the
//! per-unit fault position `d` (measured from the receiving end):
//!
//! * short — `A = |V_S − V_R − z1·L·I_S|`, `B = |I_S + I_R|`, and a
//!   closed-form `d` from the series voltage balance;
//! * medium — charging-corrected currents give `B = |I_S′ + I_R′|` and
//!   `C = |V_S − V_R − z1·L·I_S′|`; `d` minimizes the mismatch between the
//!   fault-point voltages propagated from each end;
//! * long — forward/backward wave amplitudes give residuals `N` and `M`
//!   whose ratio is `e^{2γdL}`, so `d` falls out of a complex logarithm.
//!
//! All three locators are exact on data produced by their own line model;
//! every deviation seen downstream is injected by the time-stamp attack.
//!
//! Both currents are measured flowing *into* the line. The wave formulas
//! are written for a receiving current flowing out toward the load, so the
//! long-line functions negate `ir` internally.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phasor::{LineParameters, TwoEndMeasurements};

use super::network::LineModel;

/// Result of a location attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Located {
    /// Estimated per-unit distance from the receiving end, clamped to [0, 1].
    pub d_est: f64,
    /// True when the raw estimate fell outside the line (or, for the
    /// scan-based locator, pinned to an endpoint without the objective
    /// vanishing). A clamped estimate means the measurements are not
    /// consistent with any fault on this line.
    pub clamped: bool,
}

/// Relative floor below which an indicator is treated as identically zero.
const NULL_FLOOR: f64 = 1e-9;

/// Names of the indicator pair for a model, in emission order.
pub fn indicator_names(model: LineModel) -> (&'static str, &'static str) {
    match model {
        LineModel::Short => ("A", "B"),
        LineModel::Medium => ("B", "C"),
        LineModel::Long => ("N", "M"),
    }
}

fn complexes(m: &TwoEndMeasurements) -> (Complex64, Complex64, Complex64, Complex64) {
    (m.vs.to_complex(), m.is.to_complex(), m.vr.to_complex(), m.ir.to_complex())
}

/// Short-line indicators `(A, B)`.
pub fn indicators_short(m: &TwoEndMeasurements, line: &LineParameters) -> Result<(f64, f64)> {
    let (vs, is, vr, ir) = complexes(m);
    let zl = line.z1 * line.length_miles;
    Ok(((vs - vr - zl * is).norm(), (is + ir).norm()))
}

/// Medium-line indicators `(B, C)` from charging-corrected currents.
pub fn indicators_medium(m: &TwoEndMeasurements, line: &LineParameters) -> Result<(f64, f64)> {
    let (vs, is, vr, ir) = complexes(m);
    let zl = line.z1 * line.length_miles;
    let y_half = line.y1 * line.length_miles / 2.0;
    let is_c = is - vs * y_half;
    let ir_c = ir - vr * y_half;
    Ok(((is_c + ir_c).norm(), (vs - vr - zl * is_c).norm()))
}

/// Forward/backward wave residuals for the long line, as complex values.
fn wave_residuals(
    m: &TwoEndMeasurements,
    line: &LineParameters,
) -> Result<(Complex64, Complex64, Complex64)> {
    let (gamma, zc) = line.long_constants()?;
    let (vs, is, vr, ir) = complexes(m);
    let ir_out = -ir; // toward the load, the convention the wave split uses
    let gl = gamma * line.length_miles;
    let n = (vr - zc * ir_out) / 2.0 - (vs - zc * is) / 2.0 * gl.exp();
    let mm = (vs + zc * is) / 2.0 * (-gl).exp() - (vr + zc * ir_out) / 2.0;
    Ok((n, mm, gamma))
}

/// Long-line indicators `(N, M)`.
pub fn indicators_long(m: &TwoEndMeasurements, line: &LineParameters) -> Result<(f64, f64)> {
    let (n, mm, _) = wave_residuals(m, line)?;
    Ok((n.norm(), mm.norm()))
}

/// Indicator pair for any model.
pub fn indicators(model: LineModel, m: &TwoEndMeasurements, line: &LineParameters) -> Result<(f64, f64)> {
    match model {
        LineModel::Short => indicators_short(m, line),
        LineModel::Medium => indicators_medium(m, line),
        LineModel::Long => indicators_long(m, line),
    }
}

fn clamp_unit(d: f64) -> Located {
    if d.is_nan() {
        return Located { d_est: 0.0, clamped: true };
    }
    Located { d_est: d.clamp(0.0, 1.0), clamped: !(0.0..=1.0).contains(&d) }
}

/// Closed-form short-line locator.
pub fn locate_short(m: &TwoEndMeasurements, line: &LineParameters) -> Result<Located> {
    let (vs, is, vr, ir) = complexes(m);
    let zl = line.z1 * line.length_miles;
    let denom = zl * (is + ir);
    if denom.norm() <= NULL_FLOOR * zl.norm() * is.norm().max(ir.norm()) {
        return Err(Error::Singular(
            "terminal currents cancel: no fault current to locate".into(),
        ));
    }
    let d = ((vr - vs + zl * is) / denom).re;
    Ok(clamp_unit(d))
}

/// Long-line locator via the wave-amplitude ratio.
pub fn locate_long(m: &TwoEndMeasurements, line: &LineParameters) -> Result<Located> {
    let (n, mm, gamma) = wave_residuals(m, line)?;
    let scale = m.vs.magnitude().max(m.vr.magnitude());
    if n.norm() <= NULL_FLOOR * scale || mm.norm() <= NULL_FLOOR * scale {
        return Err(Error::Singular(
            "wave residuals vanish: the line looks healthy between its terminals".into(),
        ));
    }
    let d = ((n / mm).ln() / (gamma * line.length_miles * 2.0)).re;
    Ok(clamp_unit(d))
}

/// Mismatch between the fault-point voltages propagated from each end of a
/// nominal-π segment pair split at per-unit position `d`.
fn medium_mismatch(m: &TwoEndMeasurements, line: &LineParameters, d: f64) -> f64 {
    let (vs, is, vr, ir) = complexes(m);
    let l1 = (1.0 - d) * line.length_miles;
    let l2 = d * line.length_miles;
    let vf_s = vs - line.z1 * l1 * (is - vs * line.y1 * l1 / 2.0);
    let vf_r = vr - line.z1 * l2 * (ir - vr * line.y1 * l2 / 2.0);
    (vf_s - vf_r).norm()
}

/// Medium-line locator: coarse scan plus golden-section refinement.
///
/// The mismatch is the modulus of a complex quadratic in `d`, so it can dip
/// twice; the scan picks the basin before the 1-D refinement tightens it.
pub fn locate_medium(m: &TwoEndMeasurements, line: &LineParameters) -> Result<Located> {
    let (b_ind, c_ind) = indicators_medium(m, line)?;
    let v_scale = m.vs.magnitude().max(m.vr.magnitude());
    let i_scale = m.is.magnitude().max(m.ir.magnitude());
    if b_ind <= NULL_FLOOR * i_scale && c_ind <= NULL_FLOOR * v_scale {
        return Err(Error::Singular(
            "both indicators vanish: the line looks healthy between its terminals".into(),
        ));
    }

    const SCAN_POINTS: usize = 201;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..SCAN_POINTS {
        let d = k as f64 / (SCAN_POINTS - 1) as f64;
        let f = medium_mismatch(m, line, d);
        if f < best.1 {
            best = (k, f);
        }
    }
    let step = 1.0 / (SCAN_POINTS - 1) as f64;
    let mut lo = (best.0 as f64 * step - step).max(0.0);
    let mut hi = (best.0 as f64 * step + step).min(1.0);

    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = medium_mismatch(m, line, x1);
    let mut f2 = medium_mismatch(m, line, x2);
    while hi - lo > 1e-8 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = medium_mismatch(m, line, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = medium_mismatch(m, line, x2);
        }
    }
    let d_est = 0.5 * (lo + hi);
    let at_edge = d_est < 1e-6 || d_est > 1.0 - 1e-6;
    let residual = medium_mismatch(m, line, d_est);
    Ok(Located {
        d_est,
        clamped: at_edge && residual > 1e-6 * v_scale,
    })
}

/// Locator for any model.
pub fn locate(model: LineModel, m: &TwoEndMeasurements, line: &LineParameters) -> Result<Located> {
    match model {
        LineModel::Short => locate_short(m, line),
        LineModel::Medium => locate_medium(m, line),
        LineModel::Long => locate_long(m, line),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::line_fault::network::test_fixtures::scenario;
    use crate::line_fault::network::{steady_states, FaultType};
    use crate::phasor::{apply_tsa, LineEnd, TsaOffset};

    const MODELS: [LineModel; 3] = [LineModel::Short, LineModel::Medium, LineModel::Long];

    #[test]
    fn healthy_line_nulls_every_indicator() {
        for model in MODELS {
            let s = scenario(model);
            let (pre, _) = steady_states(&s).unwrap();
            for phase in &pre {
                let (a, b) = indicators(model, &phase.m, &s.line).unwrap();
                let scale = phase.m.vs.magnitude();
                assert!(a < 1e-9 * scale, "{model:?} first indicator {a} on healthy line");
                assert!(b < 1e-9 * scale, "{model:?} second indicator {b} on healthy line");
            }
        }
    }

    #[test]
    fn fault_raises_indicators_orders_of_magnitude_above_quiescent() {
        for model in MODELS {
            let s = scenario(model);
            let (pre, post) = steady_states(&s).unwrap();
            let (a0, b0) = indicators(model, &pre[0].m, &s.line).unwrap();
            let (a1, b1) = indicators(model, &post[0].m, &s.line).unwrap();
            assert!(a1 > 10.0 * a0.max(1e-12) && b1 > 10.0 * b0.max(1e-12));
            // The faulted values are physically large, not just nonzero.
            assert!(a1 > 1e-3 * post[0].m.vs.magnitude().max(post[0].m.is.magnitude()));
            assert!(b1 > 0.0);
        }
    }

    #[test]
    fn each_locator_is_exact_on_its_own_line_model() {
        for model in MODELS {
            for d_true in [0.2, 0.5, 0.8] {
                let mut s = scenario(model);
                s.d_true = d_true;
                let (_, post) = steady_states(&s).unwrap();
                let loc = locate(model, &post[0].m, &s.line).unwrap();
                assert!(
                    (loc.d_est - d_true).abs() < 1e-6,
                    "{model:?}: d_est {} vs d_true {d_true}",
                    loc.d_est
                );
                assert!(!loc.clamped);
            }
        }
    }

    #[test]
    fn locating_a_healthy_line_reports_the_degeneracy() {
        for model in MODELS {
            let s = scenario(model);
            let (pre, _) = steady_states(&s).unwrap();
            let err = locate(model, &pre[0].m, &s.line).unwrap_err();
            assert!(matches!(err, Error::Singular(_)), "{model:?} gave {err:?}");
        }
    }

    #[test]
    fn locators_are_exact_for_every_fault_type() {
        for fault_type in [FaultType::PhaseA, FaultType::PhaseAB, FaultType::PhaseABC] {
            let mut s = scenario(LineModel::Long);
            s.fault_type = fault_type;
            s.d_true = 0.6;
            let (_, post) = steady_states(&s).unwrap();
            for &p in fault_type.faulted_phases() {
                let loc = locate_long(&post[p].m, &s.line).unwrap();
                assert!((loc.d_est - 0.6).abs() < 1e-9, "phase {p}: {}", loc.d_est);
            }
        }
    }

    #[test]
    fn a_common_clock_shift_at_both_ends_is_invisible() {
        // Rotating both terminals by the same angle leaves every locator
        // fixed: only the asynchronism between the ends is observable.
        for model in MODELS {
            let mut s = scenario(model);
            s.d_true = 0.37;
            let (_, post) = steady_states(&s).unwrap();
            let baseline = locate(model, &post[0].m, &s.line).unwrap().d_est;
            for angle in [10.0, 77.0, -120.0] {
                let offset = TsaOffset::from_degrees(angle, 60.0).unwrap();
                let shifted = apply_tsa(
                    &apply_tsa(&post[0].m, LineEnd::Sending, &offset),
                    LineEnd::Receiving,
                    &offset,
                );
                let loc = locate(model, &shifted, &s.line).unwrap();
                assert!(
                    (loc.d_est - baseline).abs() < 1e-9,
                    "{model:?} moved from {baseline} to {} under a common {angle}° shift",
                    loc.d_est
                );
            }
        }
    }

    #[test]
    fn one_sided_clock_error_biases_the_estimate() {
        for model in MODELS {
            let mut s = scenario(model);
            s.d_true = 0.5;
            let (_, post) = steady_states(&s).unwrap();
            let offset = TsaOffset::from_degrees(30.0, 60.0).unwrap();
            let attacked = apply_tsa(&post[0].m, LineEnd::Receiving, &offset);
            let loc = locate(model, &attacked, &s.line).unwrap();
            assert!(
                (loc.d_est - 0.5).abs() > 0.01,
                "{model:?}: 30° asynchronism barely moved the estimate ({})",
                loc.d_est
            );
        }
    }

    #[test]
    fn wild_measurements_clamp_to_the_line() {
        // A 180° receiving-end rotation is far outside any physical fault;
        // the estimate must stay inside [0, 1] and say it was clamped if the
        // raw value escaped.
        let mut s = scenario(LineModel::Short);
        s.d_true = 0.9;
        let (_, post) = steady_states(&s).unwrap();
        let offset = TsaOffset::from_degrees(180.0, 60.0).unwrap();
        let attacked = apply_tsa(&post[0].m, LineEnd::Receiving, &offset);
        let loc = locate_short(&attacked, &s.line).unwrap();
        assert!((0.0..=1.0).contains(&loc.d_est));
    }

    #[test]
    fn indicator_names_track_the_model() {
        assert_eq!(indicator_names(LineModel::Short), ("A", "B"));
        assert_eq!(indicator_names(LineModel::Medium), ("B", "C"));
        assert_eq!(indicator_names(LineModel::Long), ("N", "M"));
    }
}
