//! Complex-baseband GPS scene synthesis.
//!
//! The carrier is already removed in this representation: each satellite
//! contributes `√(2P) · C(t - τ) · D(t) · exp(j2π·f_dop·t)` where `C` is its
//! ±1 C/A code delayed by the code phase `τ`, `D` the ±1 navigation bit
//! stream at 50 bps, `f_dop` the Doppler residual, and `P` the received
//! power. Receiver noise is circular complex Gaussian with a per-component
//! standard deviation of `noise_sigma`, so it adds `2·noise_sigma²` to the
//! mean sample power.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gps::code::{gen_ca_code, CODE_LENGTH};
use crate::gps::timing::CHIP_RATE_HZ;

/// Default complex sampling rate: four samples per C/A chip.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 4.092e6;

/// Nominal L1 carrier, carried along for bookkeeping only — synthesis is at
/// baseband.
pub const L1_CARRIER_HZ: f64 = 1.57542e9;

/// Navigation data bit duration (50 bps).
const NAV_BIT_SECONDS: f64 = 0.02;

/// One satellite's contribution to a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SatelliteSignal {
    /// PRN number, 1..=32.
    pub prn: u8,
    /// Received power `P` (linear, arbitrary units).
    pub power: f64,
    /// Code phase delay in chips, `0 ≤ τ < 1023`.
    pub code_phase_chips: f64,
    /// Doppler residual in hertz, `|f| ≤ 10 kHz`.
    pub doppler_hz: f64,
    /// Navigation bits as ±1, cycled at 50 bps from `t = 0`. Empty means a
    /// constant +1 stream.
    pub nav_bits: Vec<i8>,
}

impl SatelliteSignal {
    /// A satellite with a constant +1 navigation stream.
    pub fn new(prn: u8, power: f64, code_phase_chips: f64, doppler_hz: f64) -> Self {
        Self {
            prn,
            power,
            code_phase_chips,
            doppler_hz,
            nav_bits: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=32).contains(&self.prn) {
            return Err(Error::InvalidInput(format!("PRN must be in 1..=32, got {}", self.prn)));
        }
        if !(self.power.is_finite() && self.power >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "satellite power must be non-negative, got {}",
                self.power
            )));
        }
        if !(0.0..1023.0).contains(&self.code_phase_chips) {
            return Err(Error::InvalidInput(format!(
                "code phase must lie in [0, 1023), got {}",
                self.code_phase_chips
            )));
        }
        if !(self.doppler_hz.is_finite() && self.doppler_hz.abs() <= 10_000.0) {
            return Err(Error::InvalidInput(format!(
                "Doppler must satisfy |f| <= 10 kHz, got {}",
                self.doppler_hz
            )));
        }
        if self.nav_bits.iter().any(|&b| b != 1 && b != -1) {
            return Err(Error::InvalidInput("navigation bits must be ±1".into()));
        }
        Ok(())
    }
}

/// A complete baseband scene: satellites plus the receiver noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct GpsScene {
    pub satellites: Vec<SatelliteSignal>,
    /// Per-component standard deviation of the circular complex noise.
    pub noise_sigma: f64,
    /// Complex sampling rate in hertz.
    pub sample_rate_hz: f64,
    /// Scene duration in milliseconds (one C/A period per millisecond).
    pub duration_ms: u32,
    /// Nominal carrier, informational only.
    pub carrier_freq_hz: f64,
}

impl GpsScene {
    /// Scene at the default 4.092 MHz rate and nominal L1 carrier.
    pub fn new(satellites: Vec<SatelliteSignal>, noise_sigma: f64, duration_ms: u32) -> Result<Self> {
        let scene = Self {
            satellites,
            noise_sigma,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            duration_ms,
            carrier_freq_hz: L1_CARRIER_HZ,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        for sat in &self.satellites {
            sat.validate()?;
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        if self.duration_ms == 0 {
            return Err(Error::InvalidInput("scene duration must be at least 1 ms".into()));
        }
        Ok(())
    }

    /// Number of complex samples the scene synthesizes.
    pub fn sample_count(&self) -> usize {
        (self.sample_rate_hz * f64::from(self.duration_ms) * 1e-3).round() as usize
    }
}

/// Synthesize the complex baseband sample stream for a scene.
///
/// Deterministic for a given `(scene, seed)`: noise comes from a seeded
/// ChaCha stream, two normal draws per sample, independent of the satellite
/// list, so scenes that differ only in satellites share identical noise.
pub fn synthesize_baseband(scene: &GpsScene, seed: u64) -> Result<Vec<Complex64>> {
    scene.validate()?;
    let n = scene.sample_count();
    let fs = scene.sample_rate_hz;
    let mut samples = vec![Complex64::ZERO; n];

    // Per-satellite deterministic contributions.
    for sat in &scene.satellites {
        let code = gen_ca_code(sat.prn)?;
        let amp = (2.0 * sat.power).sqrt();
        if amp == 0.0 {
            continue;
        }
        let phase_rad_per_sample = 2.0 * std::f64::consts::PI * sat.doppler_hz / fs;
        // One rounding, not two: keeps the chip index consistent across
        // samples that sit an exact number of code periods apart.
        let chips_per_sample = CHIP_RATE_HZ / fs;
        for (k, slot) in samples.iter_mut().enumerate() {
            let t = k as f64 / fs;
            let chip_pos = chips_per_sample * k as f64 - sat.code_phase_chips;
            let idx = (chip_pos.floor() as i64).rem_euclid(CODE_LENGTH as i64) as usize;
            let nav = if sat.nav_bits.is_empty() {
                1.0
            } else {
                let bit_idx = (t / NAV_BIT_SECONDS).floor() as usize % sat.nav_bits.len();
                f64::from(sat.nav_bits[bit_idx])
            };
            let carrier = Complex64::from_polar(1.0, phase_rad_per_sample * k as f64);
            *slot += amp * f64::from(code[idx]) * nav * carrier;
        }
    }

    // Circular complex Gaussian receiver noise.
    if scene.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for slot in samples.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *slot += scene.noise_sigma * Complex64::new(re, im);
        }
    }

    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_noiseless_scene_is_all_zeros() {
        let scene = GpsScene::new(Vec::new(), 0.0, 1).unwrap();
        let samples = synthesize_baseband(&scene, 1).unwrap();
        assert_eq!(samples.len(), 4092);
        assert!(samples.iter().all(|s| *s == Complex64::ZERO));
    }

    #[test]
    fn single_satellite_at_zero_doppler_toggles_between_code_levels() {
        let power = 2.0;
        let scene = GpsScene::new(vec![SatelliteSignal::new(5, power, 0.0, 0.0)], 0.0, 1).unwrap();
        let samples = synthesize_baseband(&scene, 0).unwrap();
        let amp = (2.0 * power).sqrt();
        for (k, s) in samples.iter().enumerate() {
            assert!(s.im.abs() < 1e-12, "zero Doppler leaves samples real");
            assert!(
                (s.re.abs() - amp).abs() < 1e-12,
                "sample {k} magnitude {} differs from ±√(2P) = {amp}",
                s.re
            );
        }
    }

    #[test]
    fn mean_sample_power_matches_signal_plus_noise_budget() {
        // E|x|² = Σ 2·P_k + 2·σ² for ±1 codes and unit-magnitude carriers.
        let sigma = 0.7;
        let scene = GpsScene::new(
            vec![
                SatelliteSignal::new(1, 1.0, 123.25, 2500.0),
                SatelliteSignal::new(2, 0.5, 864.5, -4000.0),
            ],
            sigma,
            4,
        )
        .unwrap();
        let samples = synthesize_baseband(&scene, 42).unwrap();
        let mean_power: f64 = samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64;
        let expected = 2.0 * (1.0 + 0.5) + 2.0 * sigma * sigma;
        // Cross terms and the finite noise sample leave a few percent of slack.
        assert!(
            (mean_power - expected).abs() < 0.05 * expected,
            "mean power {mean_power} vs budget {expected}"
        );
    }

    #[test]
    fn synthesis_is_deterministic_per_seed_and_differs_across_seeds() {
        let scene = GpsScene::new(vec![SatelliteSignal::new(9, 1.0, 77.0, 1000.0)], 0.4, 2).unwrap();
        let a = synthesize_baseband(&scene, 7).unwrap();
        let b = synthesize_baseband(&scene, 7).unwrap();
        let c = synthesize_baseband(&scene, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn nav_bits_flip_the_code_sign_at_20_ms_boundaries() {
        let mut sat = SatelliteSignal::new(3, 0.5, 0.0, 0.0);
        sat.nav_bits = vec![1, -1];
        let scene = GpsScene {
            satellites: vec![sat],
            noise_sigma: 0.0,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            duration_ms: 40,
            carrier_freq_hz: L1_CARRIER_HZ,
        };
        let samples = synthesize_baseband(&scene, 0).unwrap();
        let per_ms = 4092;
        // Same code chip 20 ms apart, opposite nav bit: samples negate.
        for k in 0..per_ms {
            let early = samples[k];
            let late = samples[k + 20 * per_ms];
            assert!((early + late).norm() < 1e-9, "sample {k} did not flip with the nav bit");
        }
    }

    #[test]
    fn scene_validation_rejects_out_of_range_fields() {
        assert!(GpsScene::new(vec![SatelliteSignal::new(0, 1.0, 0.0, 0.0)], 0.0, 1).is_err());
        assert!(GpsScene::new(vec![SatelliteSignal::new(1, -1.0, 0.0, 0.0)], 0.0, 1).is_err());
        assert!(GpsScene::new(vec![SatelliteSignal::new(1, 1.0, 1023.0, 0.0)], 0.0, 1).is_err());
        assert!(GpsScene::new(vec![SatelliteSignal::new(1, 1.0, 0.0, 15_000.0)], 0.0, 1).is_err());
        assert!(GpsScene::new(Vec::new(), -0.1, 1).is_err());
        assert!(GpsScene::new(Vec::new(), 0.1, 0).is_err());
        let mut bad_nav = SatelliteSignal::new(1, 1.0, 0.0, 0.0);
        bad_nav.nav_bits = vec![1, 0];
        assert!(GpsScene::new(vec![bad_nav], 0.0, 1).is_err());
    }
}
