//! Coherent C/A acquisition and the jam-then-spoof capture sequence.
//!
//! Acquisition correlates one code period of baseband samples against a
//! local replica over a code-phase x Doppler grid: for each Doppler bin the
//! carrier residual is wiped off, and the circular correlation over all
//! sample lags is computed with FFTs. The winning cell is the largest
//! magnitude; exact ties resolve to the lowest code phase, then the lowest
//! Doppler, so results are reproducible bit for bit.
//!
//! The spoof scenario follows the practical two-step recipe: broadcast a
//! jamming floor so the victim loses lock, then present a stronger replica
//! during re-acquisition. Whoever owns the tallest peak owns the receiver's
//! clock from then on.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::gps::code::{gen_ca_code, CODE_LENGTH};
use crate::gps::signal::{synthesize_baseband, GpsScene};
use crate::gps::timing::{spoof_phase_to_timing_error, CHIP_RATE_HZ};

/// Exclusion half-width around a peak when measuring the noise floor, chips.
const FLOOR_EXCLUSION_CHIPS: f64 = 2.0;

/// Capture is declared when the winning code phase lands within half a chip
/// of the spoofed phase.
const CAPTURE_TOLERANCE_CHIPS: f64 = 0.5;

// ---------------------------------------------------------------------------
// Doppler grid
// ---------------------------------------------------------------------------

/// The Doppler bins an acquisition searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerGrid {
    pub min_hz: f64,
    pub max_hz: f64,
    pub step_hz: f64,
}

impl Default for DopplerGrid {
    /// ±10 kHz in 500 Hz steps — 41 bins.
    fn default() -> Self {
        Self {
            min_hz: -10_000.0,
            max_hz: 10_000.0,
            step_hz: 500.0,
        }
    }
}

impl DopplerGrid {
    pub fn bins(&self) -> Result<Vec<f64>> {
        if !(self.step_hz.is_finite() && self.step_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "Doppler step must be positive, got {}",
                self.step_hz
            )));
        }
        if !(self.min_hz.is_finite() && self.max_hz.is_finite() && self.min_hz <= self.max_hz) {
            return Err(Error::InvalidInput(format!(
                "Doppler range [{}, {}] is malformed",
                self.min_hz, self.max_hz
            )));
        }
        let count = ((self.max_hz - self.min_hz) / self.step_hz).round() as usize + 1;
        Ok((0..count).map(|i| self.min_hz + i as f64 * self.step_hz).collect())
    }
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// Outcome of one acquisition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionResult {
    pub prn: u8,
    /// Estimated code phase in chips.
    pub code_phase_chips: f64,
    /// Estimated Doppler in hertz (the winning bin).
    pub doppler_hz: f64,
    /// Correlation magnitude of the winning cell.
    pub peak: f64,
    /// Peak over the mean magnitude of cells more than two chips away.
    /// Always at least 1; near 1 means "nothing but noise here".
    pub peak_to_floor: f64,
}

/// The full search surface, for diagnostics and CSV dumps.
#[derive(Debug, Clone)]
pub struct AcquisitionGrid {
    /// Doppler bin centers, hertz.
    pub doppler_bins_hz: Vec<f64>,
    /// Chip offset of each lag (lag index / samples-per-chip).
    pub lag_chips: Vec<f64>,
    /// `magnitudes[bin][lag]`, same order as the fields above.
    pub magnitudes: Vec<Vec<f64>>,
}

impl AcquisitionGrid {
    /// Largest magnitude among cells whose circular chip distance to
    /// `center_chips` is at most `radius_chips`.
    pub fn peak_near(&self, center_chips: f64, radius_chips: f64) -> f64 {
        let mut best = 0.0_f64;
        for row in &self.magnitudes {
            for (lag, &mag) in row.iter().enumerate() {
                if circular_chip_distance(self.lag_chips[lag], center_chips) <= radius_chips {
                    best = best.max(mag);
                }
            }
        }
        best
    }

    /// Mean magnitude of cells farther than `radius_chips` from every
    /// listed center. Returns zero when nothing qualifies.
    pub fn floor_excluding(&self, centers_chips: &[f64], radius_chips: f64) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for row in &self.magnitudes {
            for (lag, &mag) in row.iter().enumerate() {
                let chip = self.lag_chips[lag];
                if centers_chips
                    .iter()
                    .all(|&c| circular_chip_distance(chip, c) > radius_chips)
                {
                    sum += mag;
                    count += 1;
                }
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

/// Outcome of the jam-then-spoof sequence for the targeted PRN.
#[derive(Debug, Clone, PartialEq)]
pub struct SpoofOutcome {
    /// Acquisition against the authentic scene alone.
    pub before: AcquisitionResult,
    /// Re-acquisition against authentic + spoof under the jamming floor.
    pub after: AcquisitionResult,
    /// True when the re-acquired code phase sits within half a chip of the
    /// spoofed phase.
    pub captured: bool,
    /// True when the authentic and counterfeit peaks are within the noise
    /// floor of each other — the receiver could settle on either.
    pub ambiguous: bool,
    /// Signed circular code-phase movement, after minus before, in chips.
    pub chip_shift: f64,
    /// The clock error that movement plants, in seconds.
    pub timing_error_s: f64,
}

fn circular_chip_distance(a: f64, b: f64) -> f64 {
    let len = CODE_LENGTH as f64;
    let d = (a - b).rem_euclid(len);
    d.min(len - d)
}

/// Signed circular difference `a - b` folded into `(-1023/2, 1023/2]` chips.
fn circular_chip_delta(a: f64, b: f64) -> f64 {
    let len = CODE_LENGTH as f64;
    let mut d = (a - b).rem_euclid(len);
    if d > len / 2.0 {
        d -= len;
    }
    d
}

// ---------------------------------------------------------------------------
// Acquisition
// ---------------------------------------------------------------------------

/// Acquire `prn` from baseband samples, returning the winning cell.
///
/// Uses exactly one code period of coherent integration (the leading
/// period of `samples`); errors if fewer samples than that are provided.
pub fn acquire(
    samples: &[Complex64],
    sample_rate_hz: f64,
    prn: u8,
    grid: &DopplerGrid,
) -> Result<AcquisitionResult> {
    acquire_detailed(samples, sample_rate_hz, prn, grid).map(|(result, _)| result)
}

/// As [`acquire`], but also returns the full search surface.
pub fn acquire_detailed(
    samples: &[Complex64],
    sample_rate_hz: f64,
    prn: u8,
    grid: &DopplerGrid,
) -> Result<(AcquisitionResult, AcquisitionGrid)> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::InvalidInput("sample rate must be positive".into()));
    }
    let n = (sample_rate_hz * CODE_LENGTH as f64 / CHIP_RATE_HZ).round() as usize;
    if samples.len() < n {
        return Err(Error::InvalidInput(format!(
            "need at least one code period ({n} samples), got {}",
            samples.len()
        )));
    }
    let bins = grid.bins()?;
    let samples_per_chip = sample_rate_hz / CHIP_RATE_HZ;

    // Replica spectrum, conjugated once.
    let code = gen_ca_code(prn)?;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut code_freq: Vec<Complex64> = (0..n)
        .map(|k| {
            let idx = ((k as f64 / samples_per_chip).floor() as i64).rem_euclid(CODE_LENGTH as i64) as usize;
            Complex64::new(f64::from(code[idx]), 0.0)
        })
        .collect();
    fft.process(&mut code_freq);
    for c in code_freq.iter_mut() {
        *c = c.conj();
    }

    let window = &samples[..n];
    let mut magnitudes: Vec<Vec<f64>> = Vec::with_capacity(bins.len());
    for &doppler in &bins {
        // Wipe off the carrier residual, then correlate via the FFT.
        let step = -2.0 * std::f64::consts::PI * doppler / sample_rate_hz;
        let mut work: Vec<Complex64> = window
            .iter()
            .enumerate()
            .map(|(k, &x)| x * Complex64::from_polar(1.0, step * k as f64))
            .collect();
        fft.process(&mut work);
        for (w, c) in work.iter_mut().zip(&code_freq) {
            *w *= c;
        }
        ifft.process(&mut work);
        let scale = 1.0 / n as f64;
        magnitudes.push(work.iter().map(|z| z.norm() * scale).collect());
    }

    // Global peak with deterministic tie-breaking: higher magnitude wins;
    // exact ties go to the lowest code phase, then the lowest Doppler.
    let (mut best_mag, mut best_lag, mut best_bin) = (f64::NEG_INFINITY, 0usize, 0usize);
    for (bi, row) in magnitudes.iter().enumerate() {
        for (lag, &mag) in row.iter().enumerate() {
            let better = mag > best_mag
                || (mag == best_mag && (lag < best_lag || (lag == best_lag && bi < best_bin)));
            if better {
                best_mag = mag;
                best_lag = lag;
                best_bin = bi;
            }
        }
    }

    let lag_chips: Vec<f64> = (0..n).map(|lag| lag as f64 / samples_per_chip).collect();
    let peak_chip = lag_chips[best_lag];

    // Noise floor: mean magnitude outside ±2 chips of the peak, all bins.
    let mut floor_sum = 0.0;
    let mut floor_count = 0usize;
    for row in &magnitudes {
        for (lag, &mag) in row.iter().enumerate() {
            if circular_chip_distance(lag_chips[lag], peak_chip) > FLOOR_EXCLUSION_CHIPS {
                floor_sum += mag;
                floor_count += 1;
            }
        }
    }
    let floor = if floor_count == 0 { 0.0 } else { floor_sum / floor_count as f64 };
    let peak_to_floor = if floor > 0.0 {
        best_mag / floor
    } else if best_mag > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };

    let result = AcquisitionResult {
        prn,
        code_phase_chips: peak_chip,
        doppler_hz: bins[best_bin],
        peak: best_mag,
        peak_to_floor,
    };
    let grid = AcquisitionGrid {
        doppler_bins_hz: bins,
        lag_chips,
        magnitudes,
    };
    Ok((result, grid))
}

// ---------------------------------------------------------------------------
// Jam-then-spoof
// ---------------------------------------------------------------------------

/// Run the two-step capture sequence against the first authentic satellite's
/// PRN (the targeted channel).
///
/// `before` acquires the authentic scene as-is. `after` re-acquires a scene
/// holding the authentic and counterfeit signals together under the elevated
/// `jam_sigma` noise floor — the receiver that lost lock during jamming sees
/// exactly this. The spoof scene must target the same PRN set and may not
/// quietly lower the noise: `jam_sigma` must be at least the authentic
/// scene's `noise_sigma`.
pub fn run_spoof_scenario(
    authentic: &GpsScene,
    spoof: &GpsScene,
    jam_sigma: f64,
    grid: &DopplerGrid,
    seed: u64,
) -> Result<SpoofOutcome> {
    authentic.validate()?;
    spoof.validate()?;
    let target_prn = authentic
        .satellites
        .first()
        .ok_or_else(|| Error::InvalidInput("authentic scene has no satellites".into()))?
        .prn;

    let mut auth_prns: Vec<u8> = authentic.satellites.iter().map(|s| s.prn).collect();
    let mut spoof_prns: Vec<u8> = spoof.satellites.iter().map(|s| s.prn).collect();
    auth_prns.sort_unstable();
    auth_prns.dedup();
    spoof_prns.sort_unstable();
    spoof_prns.dedup();
    if auth_prns != spoof_prns {
        return Err(Error::InvalidInput(
            "spoof scene must target the same PRN set as the authentic scene".into(),
        ));
    }
    if spoof.sample_rate_hz != authentic.sample_rate_hz {
        return Err(Error::InvalidInput("scenes must share a sample rate".into()));
    }
    if !(jam_sigma.is_finite() && jam_sigma >= authentic.noise_sigma) {
        return Err(Error::InvalidInput(format!(
            "jam_sigma ({jam_sigma}) models a noise increase and must be at least the \
             authentic noise_sigma ({})",
            authentic.noise_sigma
        )));
    }

    let auth_sat = &authentic.satellites[0];
    let spoof_sat = spoof
        .satellites
        .iter()
        .find(|s| s.prn == target_prn)
        .expect("PRN sets match, so the target PRN exists in the spoof scene");

    // Step 0: honest lock.
    let before_samples = synthesize_baseband(authentic, seed)?;
    let before = acquire(&before_samples, authentic.sample_rate_hz, target_prn, grid)?;

    // Step 1+2: jam (elevated floor), then re-acquire with the counterfeit
    // present. Noise for the second window is an independent draw.
    let combined = GpsScene {
        satellites: authentic
            .satellites
            .iter()
            .chain(spoof.satellites.iter())
            .cloned()
            .collect(),
        noise_sigma: jam_sigma,
        sample_rate_hz: authentic.sample_rate_hz,
        duration_ms: authentic.duration_ms,
        carrier_freq_hz: authentic.carrier_freq_hz,
    };
    let after_samples = synthesize_baseband(&combined, seed.wrapping_add(1))?;
    let (after, after_grid) = acquire_detailed(&after_samples, combined.sample_rate_hz, target_prn, grid)?;

    let captured =
        circular_chip_distance(after.code_phase_chips, spoof_sat.code_phase_chips) <= CAPTURE_TOLERANCE_CHIPS;

    // Tie diagnostic: compare the best cells near the authentic and spoofed
    // phases; within one floor of each other means the lock is a coin flip.
    let m_auth = after_grid.peak_near(auth_sat.code_phase_chips, FLOOR_EXCLUSION_CHIPS);
    let m_spoof = after_grid.peak_near(spoof_sat.code_phase_chips, FLOOR_EXCLUSION_CHIPS);
    let floor = after_grid.floor_excluding(
        &[auth_sat.code_phase_chips, spoof_sat.code_phase_chips],
        FLOOR_EXCLUSION_CHIPS,
    );
    let ambiguous = (m_auth - m_spoof).abs() <= floor;

    let chip_shift = circular_chip_delta(after.code_phase_chips, before.code_phase_chips);
    Ok(SpoofOutcome {
        before,
        after,
        captured,
        ambiguous,
        chip_shift,
        timing_error_s: spoof_phase_to_timing_error(chip_shift),
    })
}
