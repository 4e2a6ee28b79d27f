//! Voltage-stability margin indices from a Thevenin equivalent.
//!
//! Two distances to the stability limit are tracked:
//!
//! * `MARGIN_Z = 100·(1 − k_crit)` with `k_crit = |z_th|/|z_l|` — the
//!   impedance-ratio margin, zero exactly at the maximum-power-transfer
//!   point where load and Thevenin impedance magnitudes meet;
//! * `MARGIN_P = p_Lmax − P_L` — the headroom between delivered active
//!   power and the constant-power-factor loadability limit
//!   `p_Lmax = |e_th|²·cos φ / (2·|z_th|·(1 + cos(θ_th − φ)))`,
//!   taken as zero once `|z_l| ≤ |z_th|` (already past the nose).
//!
//! `MARGIN_P` is clamped at zero when estimation noise drives the formula
//! slightly negative; the clamp is flagged so consumers can tell a true
//! zero margin from a noisy one.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phasor::Phasor;

use super::thevenin::ThevEstimate;

/// Margin indices for one frame, with the load impedance they came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginIndices {
    pub margin_z: f64,
    pub k_crit: f64,
    pub margin_p: f64,
    pub z_l: Complex64,
    /// True when the power margin was clamped up to zero.
    pub clamped: bool,
}

/// Impedance-ratio margin: `(margin_z, k_crit)`.
pub fn margin_z(z_th: Complex64, z_l: Complex64) -> Result<(f64, f64)> {
    if z_l.norm() == 0.0 {
        return Err(Error::InvalidInput("load impedance must be nonzero".into()));
    }
    let k_crit = z_th.norm() / z_l.norm();
    Ok((100.0 * (1.0 - k_crit), k_crit))
}

/// Active-power margin to the constant-power-factor loadability limit.
///
/// Returns `(margin_p, clamped)`. On the `|z_l| ≤ |z_th|` branch the margin
/// is zero by definition (not a clamp).
pub fn margin_p(est: &ThevEstimate, z_l: Complex64, p_load: f64) -> Result<(f64, bool)> {
    if z_l.norm() == 0.0 {
        return Err(Error::InvalidInput("load impedance must be nonzero".into()));
    }
    if est.z_th.norm() == 0.0 {
        return Err(Error::InvalidInput(
            "loadability is unbounded for a zero Thevenin impedance".into(),
        ));
    }
    if z_l.norm() <= est.z_th.norm() {
        return Ok((0.0, false));
    }
    let phi = z_l.arg();
    let theta = est.z_th.arg();
    let denom = 1.0 + (theta - phi).cos();
    if denom < 1e-12 {
        return Err(Error::InvalidInput(
            "degenerate angle pairing: loadability limit diverges".into(),
        ));
    }
    let e_mag = est.e_th.magnitude();
    let p_lmax = e_mag * e_mag * phi.cos() / (2.0 * est.z_th.norm() * denom);
    let raw = p_lmax - p_load;
    if raw < 0.0 {
        Ok((0.0, true))
    } else {
        Ok((raw, false))
    }
}

/// Both indices for one measured frame.
///
/// The load impedance is `V/I` and the delivered power `Re(V·conj(I))`,
/// both taken from the frame itself.
pub fn margin_indices(est: &ThevEstimate, v: Phasor, i: Phasor) -> Result<MarginIndices> {
    if i.magnitude() == 0.0 {
        return Err(Error::InvalidInput(
            "load current is zero: load impedance undefined".into(),
        ));
    }
    let (vc, ic) = (v.to_complex(), i.to_complex());
    let z_l = vc / ic;
    let p_load = (vc * ic.conj()).re;
    let (mz, k_crit) = margin_z(est.z_th, z_l)?;
    let (mp, clamped) = margin_p(est, z_l, p_load)?;
    Ok(MarginIndices { margin_z: mz, k_crit, margin_p: mp, z_l, clamped })
}

/// Mean absolute power-margin discrepancy between two equal-length traces.
pub fn margin_error_metric(clean: &[f64], attacked: &[f64]) -> Result<f64> {
    if clean.len() != attacked.len() {
        return Err(Error::InvalidInput(format!(
            "margin traces differ in length ({} vs {})",
            clean.len(),
            attacked.len()
        )));
    }
    if clean.is_empty() {
        return Err(Error::InvalidInput("margin traces are empty".into()));
    }
    let total: f64 = clean.iter().zip(attacked).map(|(c, a)| (a - c).abs()).sum();
    Ok(total / clean.len() as f64)
}
