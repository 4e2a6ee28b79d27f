//! Phasor arithmetic, transmission-line constants, and the clock-offset to
//! phase-rotation mapping.
//!
//! A synchrophasor is a complex number whose angle is referenced to a shared
//! GPS-disciplined clock. A receiver clock error of `Δt` seconds therefore
//! rotates every phasor that PMU reports by
//!
//! ```text
//! Δθ = 360 · f0 · Δt   degrees
//! ```
//!
//! at nominal frequency `f0`, while magnitudes are untouched. Everything the
//! rest of this crate does — fault locators fed rotated line-end
//! measurements, Thevenin fits fed rotated bus voltages, arrival stamps fed
//! shifted times — flows through the small kit in this module.
//!
//! Angles are stored as rectangular components and exposed in degrees at
//! every interface; radians never cross a public signature.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Phasor
// ---------------------------------------------------------------------------

/// A complex phasor in rectangular form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phasor {
    /// Real part.
    pub re: f64,
    /// Imaginary part.
    pub im: f64,
}

impl Phasor {
    /// Phasor from rectangular components.
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    /// Phasor from a magnitude and an angle in degrees.
    pub fn from_polar_deg(magnitude: f64, angle_deg: f64) -> Self {
        let rad = angle_deg.to_radians();
        Self {
            re: magnitude * rad.cos(),
            im: magnitude * rad.sin(),
        }
    }

    /// Magnitude `|V|`.
    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Angle in degrees, normalized to `(-180, 180]`.
    pub fn angle_deg(&self) -> f64 {
        let mut deg = self.im.atan2(self.re).to_degrees();
        if deg <= -180.0 {
            deg += 360.0;
        }
        deg
    }

    /// This phasor rotated by `delta_deg` degrees (positive =
    /// counter-clockwise). Magnitude is preserved exactly up to floating
    /// point rounding.
    pub fn rotated_deg(&self, delta_deg: f64) -> Self {
        let rad = delta_deg.to_radians();
        let (sin, cos) = rad.sin_cos();
        Self {
            re: self.re * cos - self.im * sin,
            im: self.re * sin + self.im * cos,
        }
    }

    /// View as a `num_complex` value for arithmetic-heavy call sites.
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Build from a `num_complex` value.
    pub fn from_complex(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<Complex64> for Phasor {
    fn from(z: Complex64) -> Self {
        Phasor::from_complex(z)
    }
}

impl From<Phasor> for Complex64 {
    fn from(p: Phasor) -> Self {
        p.to_complex()
    }
}

// ---------------------------------------------------------------------------
// Clock offsets
// ---------------------------------------------------------------------------

/// Convert a clock error in seconds into the phase rotation it imposes on
/// phasors stamped at nominal frequency `f0_hz`, in degrees.
///
/// The result is not wrapped: a 20 ms error at 60 Hz reports 432 degrees,
/// which matters when reasoning about how many cycles an attack slipped.
pub fn time_offset_to_phase_deg(dt_seconds: f64, f0_hz: f64) -> f64 {
    360.0 * f0_hz * dt_seconds
}

/// A time-stamp offset at one PMU, carried in both time and angle form.
///
/// The two representations are kept consistent by construction:
/// `dtheta_deg == 360 * f0_hz * dt_seconds` always holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsaOffset {
    /// Clock error in seconds (positive = stamps run ahead of true time).
    pub dt_seconds: f64,
    /// Equivalent phasor rotation in degrees (unwrapped).
    pub dtheta_deg: f64,
    /// Nominal system frequency the conversion used, in hertz.
    pub f0_hz: f64,
}

impl TsaOffset {
    /// Offset from a clock error in seconds.
    pub fn from_time(dt_seconds: f64, f0_hz: f64) -> Result<Self> {
        if !(f0_hz.is_finite() && f0_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "nominal frequency must be positive and finite, got {f0_hz}"
            )));
        }
        if !dt_seconds.is_finite() {
            return Err(Error::InvalidInput("clock offset must be finite".into()));
        }
        Ok(Self {
            dt_seconds,
            dtheta_deg: time_offset_to_phase_deg(dt_seconds, f0_hz),
            f0_hz,
        })
    }

    /// Offset from a phase rotation in degrees.
    pub fn from_degrees(dtheta_deg: f64, f0_hz: f64) -> Result<Self> {
        if !(f0_hz.is_finite() && f0_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "nominal frequency must be positive and finite, got {f0_hz}"
            )));
        }
        if !dtheta_deg.is_finite() {
            return Err(Error::InvalidInput("phase offset must be finite".into()));
        }
        Ok(Self {
            dt_seconds: dtheta_deg / (360.0 * f0_hz),
            dtheta_deg,
            f0_hz,
        })
    }

    /// A zero offset (perfectly synchronized clock).
    pub fn zero(f0_hz: f64) -> Result<Self> {
        Self::from_time(0.0, f0_hz)
    }
}

/// The asynchronism between two line ends: `Δθ = Δθ_R - Δθ_S` in degrees.
///
/// Two-terminal algorithms only ever see this difference; shifting both
/// clocks by the same amount is invisible to them.
pub fn relative_asynchronism_deg(receiving: &TsaOffset, sending: &TsaOffset) -> f64 {
    receiving.dtheta_deg - sending.dtheta_deg
}

// ---------------------------------------------------------------------------
// Two-end measurements
// ---------------------------------------------------------------------------

/// Which line terminal a PMU (and hence an attack) sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineEnd {
    Sending,
    Receiving,
}

/// Synchronized voltage/current pairs from both ends of one line.
///
/// Both currents are measured flowing *into* the line, so in unfaulted
/// operation `is ≈ -ir`. All four phasors share the common GPS time
/// reference; [`apply_tsa`] models what a clock error at one end does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoEndMeasurements {
    /// Sending-end voltage.
    pub vs: Phasor,
    /// Sending-end current, into the line.
    pub is: Phasor,
    /// Receiving-end voltage.
    pub vr: Phasor,
    /// Receiving-end current, into the line.
    pub ir: Phasor,
}

/// Rotate the phasors reported by one end by the offset's `Δθ`.
///
/// A clock error rotates *every* phasor that PMU reports — voltage and
/// current together — which is why magnitude-only quantities are immune
/// while phase-difference computations between the two ends are not.
pub fn apply_tsa(m: &TwoEndMeasurements, end: LineEnd, offset: &TsaOffset) -> TwoEndMeasurements {
    let d = offset.dtheta_deg;
    match end {
        LineEnd::Sending => TwoEndMeasurements {
            vs: m.vs.rotated_deg(d),
            is: m.is.rotated_deg(d),
            vr: m.vr,
            ir: m.ir,
        },
        LineEnd::Receiving => TwoEndMeasurements {
            vs: m.vs,
            is: m.is,
            vr: m.vr.rotated_deg(d),
            ir: m.ir.rotated_deg(d),
        },
    }
}

// ---------------------------------------------------------------------------
// Line constants
// ---------------------------------------------------------------------------

/// Per-unit-length and derived constants for one transmission line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineParameters {
    /// Series impedance per mile, ohm/mile.
    pub z1: Complex64,
    /// Shunt admittance per mile, siemens/mile. Zero selects a purely
    /// series (short-line) representation.
    pub y1: Complex64,
    /// Line length in miles.
    pub length_miles: f64,
    /// Propagation constant `γ = sqrt(z1·y1)` per mile; absent when `y1 = 0`.
    pub gamma: Option<Complex64>,
    /// Characteristic impedance `Zc = sqrt(z1/y1)` in ohms; absent when
    /// `y1 = 0`.
    pub zc: Option<Complex64>,
}

impl LineParameters {
    /// Total series impedance `z1 · length` in ohms.
    pub fn series_impedance(&self) -> Complex64 {
        self.z1 * self.length_miles
    }

    /// The distributed-parameter constants, or an error for lines built with
    /// `y1 = 0`, which cannot support the long-line model.
    pub fn long_constants(&self) -> Result<(Complex64, Complex64)> {
        match (self.gamma, self.zc) {
            (Some(g), Some(zc)) => Ok((g, zc)),
            _ => Err(Error::InvalidInput(
                "distributed-parameter constants unavailable: line was built with y1 = 0".into(),
            )),
        }
    }
}

/// Derive `γ` and `Zc` from per-mile constants.
///
/// Complex square roots take the principal branch: non-negative real part,
/// and non-negative imaginary part when the real part is zero. This pins the
/// signs so that `Re(γ) ≥ 0` (attenuation, not gain) and keeps every
/// downstream `exp(±γL)` consistent.
///
/// `y1 = 0` is permitted and marks the constants absent for short-line use;
/// a zero `z1` or non-positive length is an error.
pub fn derive_line_constants(z1: Complex64, y1: Complex64, length_miles: f64) -> Result<LineParameters> {
    if !(length_miles.is_finite() && length_miles > 0.0) {
        return Err(Error::InvalidInput(format!(
            "line length must be positive and finite, got {length_miles}"
        )));
    }
    for (name, z) in [("z1", z1), ("y1", y1)] {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} must be finite")));
        }
    }
    if z1 == Complex64::ZERO {
        return Err(Error::InvalidInput("series impedance z1 must be nonzero".into()));
    }

    let (gamma, zc) = if y1 == Complex64::ZERO {
        (None, None)
    } else {
        // `Complex64::sqrt` is the principal branch (arg halved into
        // (-pi/2, pi/2]), exactly the convention documented above.
        (Some((z1 * y1).sqrt()), Some((z1 / y1).sqrt()))
    };

    Ok(LineParameters {
        z1,
        y1,
        length_miles,
        gamma,
        zc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn polar_construction_matches_hand_values() {
        let p = Phasor::from_polar_deg(2.0, 30.0);
        assert_relative_eq!(p.re, 3.0_f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(p.im, 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.magnitude(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(p.angle_deg(), 30.0, max_relative = 1e-12);
    }

    #[test]
    fn angle_convention_is_half_open_at_minus_180() {
        assert_eq!(Phasor::new(-1.0, 0.0).angle_deg(), 180.0);
        // A negative zero imaginary part must not produce -180.
        assert_eq!(Phasor::new(-1.0, -0.0).angle_deg(), 180.0);
        // A tiny negative imaginary part sits just above -180, inside the range.
        let just_above = Phasor::new(-1.0, -1e-12).angle_deg();
        assert!(just_above > -180.0 && just_above < -179.0);
        assert_relative_eq!(Phasor::new(0.0, 1.0).angle_deg(), 90.0);
        assert_relative_eq!(Phasor::new(0.0, -1.0).angle_deg(), -90.0);
    }

    #[test]
    fn rotation_composes_and_preserves_magnitude() {
        let p = Phasor::from_polar_deg(3.2, 41.0);
        let once = p.rotated_deg(25.0).rotated_deg(-55.0);
        let direct = p.rotated_deg(-30.0);
        assert_relative_eq!(once.re, direct.re, max_relative = 1e-12);
        assert_relative_eq!(once.im, direct.im, max_relative = 1e-12);
        assert_relative_eq!(once.magnitude(), 3.2, max_relative = 1e-12);
    }

    #[test]
    fn time_offset_examples() {
        // 100 microseconds at 60 Hz is 2.16 degrees.
        assert_relative_eq!(time_offset_to_phase_deg(1e-4, 60.0), 2.16, max_relative = 1e-12);
        // A 20 ms slip is 432 degrees: more than a full cycle, reported unwrapped.
        assert_relative_eq!(time_offset_to_phase_deg(0.02, 60.0), 432.0, max_relative = 1e-12);
        // Half a cycle of clock error is a perfect phase flip.
        let off = TsaOffset::from_time(1.0 / 120.0, 60.0).unwrap();
        assert_relative_eq!(off.dtheta_deg, 180.0, max_relative = 1e-12);
    }

    #[test]
    fn offset_representations_stay_consistent() {
        let from_time = TsaOffset::from_time(1.389638e-3, 60.0).unwrap();
        let from_deg = TsaOffset::from_degrees(from_time.dtheta_deg, 60.0).unwrap();
        assert_relative_eq!(from_deg.dt_seconds, from_time.dt_seconds, max_relative = 1e-12);
        assert_relative_eq!(
            from_time.dtheta_deg,
            360.0 * 60.0 * from_time.dt_seconds,
            max_relative = 1e-12
        );
    }

    #[test]
    fn offset_rejects_bad_frequency_and_nonfinite_values() {
        assert!(TsaOffset::from_time(1e-3, 0.0).is_err());
        assert!(TsaOffset::from_time(1e-3, -60.0).is_err());
        assert!(TsaOffset::from_time(f64::NAN, 60.0).is_err());
        assert!(TsaOffset::from_degrees(f64::INFINITY, 60.0).is_err());
    }

    fn sample_measurements() -> TwoEndMeasurements {
        TwoEndMeasurements {
            vs: Phasor::from_polar_deg(1.02, 12.0),
            is: Phasor::from_polar_deg(0.45, -18.0),
            vr: Phasor::from_polar_deg(0.98, 4.0),
            ir: Phasor::from_polar_deg(0.45, 162.0),
        }
    }

    #[test]
    fn tsa_rotates_only_the_chosen_end() {
        let m = sample_measurements();
        let off = TsaOffset::from_degrees(30.0, 60.0).unwrap();
        let hit = apply_tsa(&m, LineEnd::Receiving, &off);
        assert_eq!(hit.vs, m.vs);
        assert_eq!(hit.is, m.is);
        assert_relative_eq!(hit.vr.angle_deg(), m.vr.angle_deg() + 30.0, max_relative = 1e-12);
        assert_relative_eq!(hit.ir.magnitude(), m.ir.magnitude(), max_relative = 1e-12);

        let hit_s = apply_tsa(&m, LineEnd::Sending, &off);
        assert_eq!(hit_s.vr, m.vr);
        assert_relative_eq!(hit_s.vs.angle_deg(), m.vs.angle_deg() + 30.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_offset_is_identity() {
        let m = sample_measurements();
        let off = TsaOffset::zero(60.0).unwrap();
        let out = apply_tsa(&m, LineEnd::Receiving, &off);
        assert_eq!(out, m);
    }

    #[test]
    fn asynchronism_is_the_offset_difference() {
        let s = TsaOffset::from_degrees(10.0, 60.0).unwrap();
        let r = TsaOffset::from_degrees(25.0, 60.0).unwrap();
        assert_relative_eq!(relative_asynchronism_deg(&r, &s), 15.0, max_relative = 1e-12);
    }

    #[test]
    fn line_constants_satisfy_product_identities() {
        // 345 kV class overhead construction, per mile at 60 Hz.
        let z1 = Complex64::new(0.059, 0.587);
        let y1 = Complex64::new(0.0, 7.41e-6);
        let line = derive_line_constants(z1, y1, 400.0).unwrap();
        let (gamma, zc) = line.long_constants().unwrap();
        let z_back = gamma * zc;
        let y_back = gamma / zc;
        assert_relative_eq!(z_back.re, z1.re, max_relative = 1e-12);
        assert_relative_eq!(z_back.im, z1.im, max_relative = 1e-12);
        assert_relative_eq!(y_back.re, y1.re, epsilon = 1e-18);
        assert_relative_eq!(y_back.im, y1.im, max_relative = 1e-12);
        // Attenuation is non-negative on the principal branch.
        assert!(gamma.re >= 0.0);
    }

    #[test]
    fn principal_sqrt_branch_handles_negative_real_products() {
        // A lossless line: z1·y1 is a negative real number, whose principal
        // square root is purely positive imaginary.
        let z1 = Complex64::new(0.0, 0.5);
        let y1 = Complex64::new(0.0, 5e-6);
        let line = derive_line_constants(z1, y1, 100.0).unwrap();
        let (gamma, zc) = line.long_constants().unwrap();
        assert!(gamma.re.abs() < 1e-18, "lossless gamma is imaginary, got {gamma}");
        assert!(gamma.im > 0.0);
        // Zc of a lossless line is purely real positive.
        assert!(zc.re > 0.0);
        assert!(zc.im.abs() < 1e-9 * zc.re);
    }

    #[test]
    fn zero_shunt_marks_constants_absent() {
        let line = derive_line_constants(Complex64::new(0.1, 0.8), Complex64::ZERO, 25.0).unwrap();
        assert!(line.gamma.is_none());
        assert!(line.zc.is_none());
        assert!(line.long_constants().is_err());
    }

    #[test]
    fn degenerate_line_parameters_are_rejected() {
        let z1 = Complex64::new(0.1, 0.8);
        let y1 = Complex64::new(0.0, 5e-6);
        assert!(derive_line_constants(z1, y1, 0.0).is_err());
        assert!(derive_line_constants(z1, y1, -5.0).is_err());
        assert!(derive_line_constants(Complex64::ZERO, y1, 50.0).is_err());
        assert!(derive_line_constants(Complex64::new(f64::NAN, 0.0), y1, 50.0).is_err());
    }

    proptest! {
        #[test]
        fn rotation_preserves_magnitude(mag in 1e-3..1e4_f64, angle in -180.0..180.0_f64, delta in -720.0..720.0_f64) {
            let p = Phasor::from_polar_deg(mag, angle);
            let r = p.rotated_deg(delta);
            prop_assert!((r.magnitude() - mag).abs() <= 1e-9 * mag);
        }

        #[test]
        fn two_terminal_view_sees_only_the_offset_difference(
            base_s in -30.0..30.0_f64,
            base_r in -30.0..30.0_f64,
            common in -90.0..90.0_f64,
        ) {
            let m = sample_measurements();
            let apply_pair = |ds: f64, dr: f64| {
                let off_s = TsaOffset::from_degrees(ds, 60.0).unwrap();
                let off_r = TsaOffset::from_degrees(dr, 60.0).unwrap();
                apply_tsa(&apply_tsa(&m, LineEnd::Sending, &off_s), LineEnd::Receiving, &off_r)
            };
            let a = apply_pair(base_s, base_r);
            let b = apply_pair(base_s + common, base_r + common);
            // The ratio vr/vs (a pure phase-difference quantity) is identical.
            let ratio_a = a.vr.to_complex() / a.vs.to_complex();
            let ratio_b = b.vr.to_complex() / b.vs.to_complex();
            prop_assert!((ratio_a - ratio_b).norm() < 1e-9);
        }

        #[test]
        fn offset_roundtrip_through_degrees(dt in -0.05..0.05_f64) {
            let off = TsaOffset::from_time(dt, 60.0).unwrap();
            let back = TsaOffset::from_degrees(off.dtheta_deg, 60.0).unwrap();
            prop_assert!((back.dt_seconds - dt).abs() <= 1e-15_f64.max(1e-12 * dt.abs()));
        }
    }
}
