//! Dense complex linear solves for the small nodal networks used here.
//!
//! Every system in this crate is tiny (two or three bus voltages, a 2x2
//! Thevenin fit, a 3x3 Gauss-Newton step), so a partial-pivot Gaussian
//! elimination is both sufficient and easy to audit. Singularity is reported
//! as an error, never patched over.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solve `a * x = b` in place for a small square complex system.
///
/// Uses Gaussian elimination with partial (max-magnitude) pivoting. Returns
/// an error if a pivot falls below `1e-13` times the largest magnitude seen
/// in the original matrix, which for the well-scaled networks in this crate
/// only happens when the system is genuinely singular.
pub fn solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = a.len();
    if n == 0 || b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInput(format!(
            "linear solve needs a square system, got {}x? with rhs {}",
            n,
            b.len()
        )));
    }

    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Err(Error::Singular("all-zero matrix".into()));
    }
    let pivot_floor = 1e-13 * scale;

    for col in 0..n {
        // Partial pivot: bring the largest remaining entry of this column up.
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .norm()
                    .partial_cmp(&a[j][col].norm())
                    .expect("pivot magnitudes are finite")
            })
            .expect("non-empty pivot range");
        if a[pivot_row][col].norm() < pivot_floor {
            return Err(Error::Singular(format!(
                "pivot {:.3e} below floor {:.3e} at column {col}",
                a[pivot_row][col].norm(),
                pivot_floor
            )));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);

        let pivot = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / pivot;
            if factor == Complex64::ZERO {
                continue;
            }
            for k in col..n {
                let upper = a[col][k];
                a[row][k] -= factor * upper;
            }
            let upper_b = b[col];
            b[row] -= factor * upper_b;
        }
    }

    // Back substitution.
    let mut x = vec![Complex64::ZERO; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}
