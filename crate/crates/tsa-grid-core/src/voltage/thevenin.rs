//! Least-squares Thevenin-equivalent estimation from a measurement window.
//!
//! The remote system behind a load bus is modeled as a source `e_th` in
//! series with an impedance `z_th`, so every synchronized frame satisfies
//! `V_k = e_th − z_th·I_k`. A window of frames with varying load pins both
//! complex unknowns by linear least squares. The estimate is only as good
//! as the window's excitation: if the currents barely vary, the system is
//! near rank-deficient, which the conditioning diagnostic exposes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::phasor::Phasor;

/// Fewest frames that give the two complex unknowns any redundancy.
pub const MIN_WINDOW: usize = 4;

/// Windows whose normalized design matrix conditions worse than this are
/// rejected as uninformative.
pub const CONDITION_LIMIT: f64 = 1e6;

/// A fitted Thevenin equivalent plus fit diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThevEstimate {
    pub e_th: Phasor,
    pub z_th: Complex64,
    /// Condition number of the column-normalized design matrix.
    pub condition: f64,
    /// Number of frames the fit used.
    pub window: usize,
}

impl ThevEstimate {
    /// A negative Thevenin resistance cannot describe a passive remote
    /// system; such estimates are diagnostic red flags, not hard errors.
    pub fn is_physical(&self) -> bool {
        self.z_th.re >= 0.0
    }
}

/// Fit `V_k = e_th − z_th·I_k` over a window of synchronized frames.
///
/// Solves the 2×2 complex normal equations. Errors on windows shorter than
/// [`MIN_WINDOW`], mismatched lengths, or excitation too weak to separate
/// the source from the impedance (condition above [`CONDITION_LIMIT`]).
pub fn estimate_thevenin(v: &[Phasor], i: &[Phasor]) -> Result<ThevEstimate> {
    if v.len() != i.len() {
        return Err(Error::InvalidInput(format!(
            "voltage and current windows differ in length ({} vs {})",
            v.len(),
            i.len()
        )));
    }
    let n = v.len();
    if n < MIN_WINDOW {
        return Err(Error::InvalidInput(format!(
            "estimation window needs at least {MIN_WINDOW} frames, got {n}"
        )));
    }

    let mut sum_i = Complex64::ZERO;
    let mut sum_ii = 0.0;
    let mut sum_v = Complex64::ZERO;
    let mut sum_iv = Complex64::ZERO;
    for (vk, ik) in v.iter().zip(i) {
        let (vk, ik) = (vk.to_complex(), ik.to_complex());
        sum_i += ik;
        sum_ii += ik.norm_sqr();
        sum_v += vk;
        sum_iv += ik.conj() * vk;
    }

    // Condition of the design matrix with unit-normalized columns [1, −I]:
    // its Gram matrix has unit diagonal and off-diagonal magnitude g, so the
    // singular values are √(1±g).
    let col_norms = (n as f64).sqrt() * sum_ii.sqrt();
    if col_norms == 0.0 {
        return Err(Error::Singular("window currents are identically zero".into()));
    }
    let g = sum_i.norm() / col_norms;
    let condition = if g < 1.0 { ((1.0 + g) / (1.0 - g)).sqrt() } else { f64::INFINITY };
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::Singular(format!(
            "window lacks load variation (condition {condition:.3e} exceeds {CONDITION_LIMIT:.0e})"
        )));
    }

    let nf = Complex64::new(n as f64, 0.0);
    let a = vec![vec![nf, -sum_i], vec![-sum_i.conj(), Complex64::new(sum_ii, 0.0)]];
    let b = vec![sum_v, -sum_iv];
    let x = linalg::solve(a, b)?;
    Ok(ThevEstimate {
        e_th: Phasor::from_complex(x[0]),
        z_th: x[1],
        condition,
        window: n,
    })
}
