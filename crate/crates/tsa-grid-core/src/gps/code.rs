//! C/A (coarse/acquisition) Gold code generation.
//!
//! Each GPS satellite spreads its signal with a 1023-chip Gold code built
//! from two 10-stage LFSRs. G1 feeds back stages 3 and 10; G2 feeds back
//! stages 2, 3, 6, 8, 9, and 10. The satellite's PRN number selects a pair
//! of G2 stages whose XOR is combined with the G1 output, which is
//! equivalent to (but cheaper than) delaying G2 by a per-PRN amount.
//!
//! Chips are returned as `±1` so that the modulo-2 additions of the signal
//! model become plain multiplications: bit 0 maps to +1, bit 1 to -1.

use crate::error::{Error, Result};

/// Chips per C/A code period.
pub const CODE_LENGTH: usize = 1023;

/// G2 phase-select stage pairs (1-indexed) for PRN 1 through 32.
const G2_TAPS: [(usize, usize); 32] = [
    (2, 6),
    (3, 7),
    (4, 8),
    (5, 9),
    (1, 9),
    (2, 10),
    (1, 8),
    (2, 9),
    (3, 10),
    (2, 3),
    (3, 4),
    (5, 6),
    (6, 7),
    (7, 8),
    (8, 9),
    (9, 10),
    (1, 4),
    (2, 5),
    (3, 6),
    (4, 7),
    (5, 8),
    (6, 9),
    (1, 3),
    (4, 6),
    (5, 7),
    (6, 8),
    (7, 9),
    (8, 10),
    (1, 6),
    (2, 7),
    (3, 8),
    (4, 9),
];

/// Generate the 1023-chip C/A code for `prn` (1..=32) as `±1` values.
pub fn gen_ca_code(prn: u8) -> Result<[i8; CODE_LENGTH]> {
    let (t1, t2) = *G2_TAPS
        .get(prn.wrapping_sub(1) as usize)
        .ok_or_else(|| Error::InvalidInput(format!("PRN must be in 1..=32, got {prn}")))?;

    // Registers indexed 0..=9 for stages 1..=10, initialized to all ones.
    let mut g1 = [1u8; 10];
    let mut g2 = [1u8; 10];
    let mut chips = [0i8; CODE_LENGTH];

    for chip in chips.iter_mut() {
        let bit = g1[9] ^ g2[t1 - 1] ^ g2[t2 - 1];
        *chip = if bit == 1 { -1 } else { 1 };

        let g1_fb = g1[2] ^ g1[9];
        let g2_fb = g2[1] ^ g2[2] ^ g2[5] ^ g2[7] ^ g2[8] ^ g2[9];
        for i in (1..10).rev() {
            g1[i] = g1[i - 1];
            g2[i] = g2[i - 1];
        }
        g1[0] = g1_fb;
        g2[0] = g2_fb;
    }

    Ok(chips)
}

/// Full circular cross-correlation of two `±1` codes over all 1023 lags.
///
/// `result[lag] = Σ_k a[k] · b[(k + lag) mod 1023]`. For two distinct Gold
/// codes the values stay in the three-valued set `{-65, -1, 63}`; the same
/// code against itself peaks at 1023 at zero lag.
pub fn circular_cross_correlation(a: &[i8; CODE_LENGTH], b: &[i8; CODE_LENGTH]) -> [i32; CODE_LENGTH] {
    let mut out = [0i32; CODE_LENGTH];
    for (lag, slot) in out.iter_mut().enumerate() {
        let mut acc = 0i32;
        for k in 0..CODE_LENGTH {
            let j = k + lag;
            let j = if j >= CODE_LENGTH { j - CODE_LENGTH } else { j };
            acc += i32::from(a[k]) * i32::from(b[j]);
        }
        *slot = acc;
    }
    out
}
