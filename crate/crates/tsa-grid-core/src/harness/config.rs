//! Scenario configuration: TOML schema, defaults, and validation.
//!
//! A run is described by one small TOML file: the scenario `kind`, a
//! `seed`, the `sweep` values (clock offsets in degrees, stamp shifts in
//! seconds, or spoof power ratios, depending on the kind), and an optional
//! kind-specific parameter block. Every block field has a default, so the
//! minimal config is three lines; unknown keys are rejected by name.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gps::DopplerGrid;
use crate::line_fault::{FaultScenario, FaultType, LineModel};
use crate::phasor::{derive_line_constants, Phasor};
use crate::voltage::VoltageScenario;

/// A complex quantity in rectangular form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexParam {
    pub re: f64,
    pub im: f64,
}

impl From<ComplexParam> for Complex64 {
    fn from(p: ComplexParam) -> Self {
        Complex64::new(p.re, p.im)
    }
}

impl From<Complex64> for ComplexParam {
    fn from(z: Complex64) -> Self {
        ComplexParam { re: z.re, im: z.im }
    }
}

/// A phasor in polar form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarParam {
    pub magnitude: f64,
    pub angle_deg: f64,
}

impl From<PolarParam> for Phasor {
    fn from(p: PolarParam) -> Self {
        Phasor::from_polar_deg(p.magnitude, p.angle_deg)
    }
}

/// Which experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Fault,
    Voltage,
    Event,
    Gps,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Fault => "fault",
            ScenarioKind::Voltage => "voltage",
            ScenarioKind::Event => "event",
            ScenarioKind::Gps => "gps",
        }
    }
}

/// Line model selector in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModelParam {
    Short,
    Medium,
    #[default]
    Long,
}

impl ModelParam {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelParam::Short => "short",
            ModelParam::Medium => "medium",
            ModelParam::Long => "long",
        }
    }
}

impl From<ModelParam> for LineModel {
    fn from(m: ModelParam) -> Self {
        match m {
            ModelParam::Short => LineModel::Short,
            ModelParam::Medium => LineModel::Medium,
            ModelParam::Long => LineModel::Long,
        }
    }
}

/// Fault type selector in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FaultTypeParam {
    A,
    Ab,
    #[default]
    Abc,
}

impl FaultTypeParam {
    pub fn as_str(self) -> &'static str {
        match self {
            FaultTypeParam::A => "a",
            FaultTypeParam::Ab => "ab",
            FaultTypeParam::Abc => "abc",
        }
    }
}

impl From<FaultTypeParam> for FaultType {
    fn from(f: FaultTypeParam) -> Self {
        match f {
            FaultTypeParam::A => FaultType::PhaseA,
            FaultTypeParam::Ab => FaultType::PhaseAB,
            FaultTypeParam::Abc => FaultType::PhaseABC,
        }
    }
}

/// Top-level run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Seed for every random draw the run makes.
    pub seed: u64,
    /// Sweep values: clock offsets in degrees (fault, voltage), stamp
    /// shifts in seconds (event), or spoof-to-authentic power ratios (gps).
    pub sweep: Vec<f64>,
    /// Default output directory; the CLI's `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<FaultConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voltage: Option<VoltageConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<EventConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gps: Option<GpsConfig>,
}

impl ScenarioConfig {
    /// Check cross-field consistency and vet the kind-specific block by
    /// building its scenario objects.
    pub fn validate(&self) -> Result<()> {
        if self.sweep.is_empty() {
            return Err(Error::Config("sweep must list at least one value".into()));
        }
        if let Some(bad) = self.sweep.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("sweep values must be finite, got {bad}")));
        }
        for (name, present) in [
            ("fault", self.fault.is_some()),
            ("voltage", self.voltage.is_some()),
            ("event", self.event.is_some()),
            ("gps", self.gps.is_some()),
        ] {
            if present && name != self.kind.as_str() {
                return Err(Error::Config(format!(
                    "config block [{name}] does not belong in a {} scenario",
                    self.kind.as_str()
                )));
            }
        }
        match self.kind {
            ScenarioKind::Fault => {
                self.fault_config().to_scenario()?;
            }
            ScenarioKind::Voltage => {
                self.voltage_config().to_scenario()?;
            }
            ScenarioKind::Event => self.event_config().validate()?,
            ScenarioKind::Gps => {
                // The gps sweep carries spoof-to-authentic power ratios.
                if let Some(bad) = self.sweep.iter().find(|r| **r <= 0.0) {
                    return Err(Error::Config(format!(
                        "gps sweep values are power ratios and must be positive, got {bad}"
                    )));
                }
                self.gps_config().validate()?;
            }
        }
        Ok(())
    }

    /// The fault block, defaults filled in.
    pub fn fault_config(&self) -> FaultConfig {
        self.fault.clone().unwrap_or_default()
    }

    pub fn voltage_config(&self) -> VoltageConfig {
        self.voltage.clone().unwrap_or_default()
    }

    pub fn event_config(&self) -> EventConfig {
        self.event.clone().unwrap_or_default()
    }

    pub fn gps_config(&self) -> GpsConfig {
        self.gps.clone().unwrap_or_default()
    }

    /// A copy with the active block expanded to its fully resolved form, so
    /// the manifest echo pins every parameter the run used.
    pub fn resolved(&self) -> ScenarioConfig {
        let mut out = self.clone();
        match self.kind {
            ScenarioKind::Fault => out.fault = Some(self.fault_config().resolved()),
            ScenarioKind::Voltage => out.voltage = Some(self.voltage_config()),
            ScenarioKind::Event => out.event = Some(self.event_config()),
            ScenarioKind::Gps => out.gps = Some(self.gps_config()),
        }
        out
    }
}

/// Parse and validate a TOML scenario config.
///
/// Unknown keys, missing required keys, and type mismatches are reported
/// with the offending key named (and a line/column where the parser has
/// one).
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim().replace('\n', " ")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Fault-location experiment parameters.
///
/// The electrical defaults model a 230 kV-class corridor; `length_miles`
/// and `fault_z_ohm` default per line model (400 mi / 100 Ω for long,
/// 50 mi / 10 Ω for medium, 25 mi / 10 Ω for short).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultConfig {
    pub model: ModelParam,
    pub fault_type: FaultTypeParam,
    /// True fault position as a fraction of line length from the sending end.
    pub d_true: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_miles: Option<f64>,
    pub frame_rate_hz: f64,
    pub duration_s: f64,
    pub t_fault_s: f64,
    /// When the receiving clock starts carrying the swept offset.
    pub t_attack_s: f64,
    pub f0_hz: f64,
    pub threshold_ratio: f64,
    pub z1_ohm_per_mile: ComplexParam,
    pub y1_siemens_per_mile: ComplexParam,
    pub source_s: PolarParam,
    pub source_r: PolarParam,
    pub zs_s_ohm: ComplexParam,
    pub zs_r_ohm: ComplexParam,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault_z_ohm: Option<ComplexParam>,
}

impl Default for FaultConfig {
    fn default() -> Self {
        FaultConfig {
            model: ModelParam::Long,
            fault_type: FaultTypeParam::Abc,
            d_true: 0.5,
            length_miles: None,
            frame_rate_hz: 30.0,
            duration_s: 10.0,
            t_fault_s: 5.0,
            t_attack_s: 2.0,
            f0_hz: 60.0,
            threshold_ratio: 5.0,
            z1_ohm_per_mile: ComplexParam { re: 0.059, im: 0.587 },
            y1_siemens_per_mile: ComplexParam { re: 0.0, im: 7.41e-6 },
            source_s: PolarParam { magnitude: 199_186.0, angle_deg: 20.0 },
            source_r: PolarParam { magnitude: 199_186.0, angle_deg: 0.0 },
            zs_s_ohm: ComplexParam { re: 1.0, im: 15.0 },
            zs_r_ohm: ComplexParam { re: 1.0, im: 15.0 },
            fault_z_ohm: None,
        }
    }
}

impl FaultConfig {
    pub fn resolved_length_miles(&self) -> f64 {
        self.length_miles.unwrap_or(match self.model {
            ModelParam::Short => 25.0,
            ModelParam::Medium => 50.0,
            ModelParam::Long => 400.0,
        })
    }

    pub fn resolved_fault_z(&self) -> ComplexParam {
        self.fault_z_ohm.unwrap_or(match self.model {
            ModelParam::Long => ComplexParam { re: 100.0, im: 0.0 },
            _ => ComplexParam { re: 10.0, im: 0.0 },
        })
    }

    /// A copy with the per-model options made explicit.
    pub fn resolved(&self) -> FaultConfig {
        let mut out = self.clone();
        out.length_miles = Some(self.resolved_length_miles());
        out.fault_z_ohm = Some(self.resolved_fault_z());
        out
    }

    /// Build the forward scenario this config describes.
    pub fn to_scenario(&self) -> Result<FaultScenario> {
        if !(self.f0_hz.is_finite() && self.f0_hz > 0.0) {
            return Err(Error::Config(format!("f0_hz must be positive, got {}", self.f0_hz)));
        }
        if !(self.t_attack_s.is_finite() && self.t_attack_s >= 0.0) {
            return Err(Error::Config(format!(
                "t_attack_s must be non-negative, got {}",
                self.t_attack_s
            )));
        }
        // The short model treats the line as a pure series impedance; the
        // shunt admittance only shapes medium/long forward data.
        let y1 = match self.model {
            ModelParam::Short => Complex64::ZERO,
            _ => self.y1_siemens_per_mile.into(),
        };
        let line =
            derive_line_constants(self.z1_ohm_per_mile.into(), y1, self.resolved_length_miles())
                .map_err(|e| Error::Config(e.to_string()))?;
        let scenario = FaultScenario {
            line,
            model: self.model.into(),
            fault_type: self.fault_type.into(),
            d_true: self.d_true,
            zf: self.resolved_fault_z().into(),
            es: self.source_s.into(),
            er: self.source_r.into(),
            zs_s: self.zs_s_ohm.into(),
            zs_r: self.zs_r_ohm.into(),
            t_fault_s: self.t_fault_s,
            duration_s: self.duration_s,
            frame_rate_hz: self.frame_rate_hz,
            threshold_ratio: self.threshold_ratio,
        };
        scenario.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(scenario)
    }
}

/// Voltage-stability experiment parameters (all per unit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VoltageConfig {
    pub e0_pu: f64,
    pub modulation: f64,
    pub modulation_hz: f64,
    pub p_load_pu: f64,
    /// Constant load power factor, lagging.
    pub power_factor: f64,
    pub fault_window_s: [f64; 2],
    pub trip_times_s: [f64; 2],
    pub frame_rate_hz: f64,
    pub duration_s: f64,
    pub noise_sigma_pu: f64,
    pub zs_pu: ComplexParam,
    /// Series impedance of each of the three identical parallel lines.
    pub line_z_pu: ComplexParam,
    pub fault_z_pu: ComplexParam,
}

impl Default for VoltageConfig {
    fn default() -> Self {
        VoltageConfig {
            e0_pu: 1.0,
            modulation: 0.03,
            modulation_hz: 1.0,
            p_load_pu: 1.0,
            power_factor: 0.995,
            fault_window_s: [2.0, 2.5],
            trip_times_s: [4.0, 6.0],
            frame_rate_hz: 30.0,
            duration_s: 10.0,
            noise_sigma_pu: 0.0,
            zs_pu: ComplexParam { re: 0.01, im: 0.05 },
            line_z_pu: ComplexParam { re: 0.01, im: 0.1 },
            fault_z_pu: ComplexParam { re: 0.2, im: 0.0 },
        }
    }
}

impl VoltageConfig {
    pub fn to_scenario(&self) -> Result<VoltageScenario> {
        if !(self.power_factor > 0.0 && self.power_factor <= 1.0) {
            return Err(Error::Config(format!(
                "power_factor must be in (0, 1], got {}",
                self.power_factor
            )));
        }
        let phi = self.power_factor.acos();
        let line = derive_line_constants(self.line_z_pu.into(), Complex64::ZERO, 1.0)
            .map_err(|e| Error::Config(e.to_string()))?;
        let vs = VoltageScenario {
            e0_pu: self.e0_pu,
            modulation: self.modulation,
            modulation_hz: self.modulation_hz,
            zs_pu: self.zs_pu.into(),
            lines: [line, line, line],
            s_load_pu: Complex64::new(self.p_load_pu, self.p_load_pu * phi.tan()),
            fault_window_s: (self.fault_window_s[0], self.fault_window_s[1]),
            fault_z_pu: self.fault_z_pu.into(),
            trip_times_s: (self.trip_times_s[0], self.trip_times_s[1]),
            frame_rate_hz: self.frame_rate_hz,
            duration_s: self.duration_s,
            noise_sigma_pu: self.noise_sigma_pu,
        };
        vs.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(vs)
    }
}

/// Event-location experiment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EventConfig {
    /// Monitor coordinates, miles.
    pub mmr_positions: Vec<[f64; 2]>,
    /// True event: x miles, y miles, origin time seconds.
    pub event: [f64; 3],
    pub wave_speed_mi_s: f64,
    pub noise_sigma_s: f64,
    /// Monitor whose stamp the sweep shifts; defaults to the earliest
    /// arrival.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub victim: Option<String>,
}

impl Default for EventConfig {
    fn default() -> Self {
        EventConfig {
            mmr_positions: vec![[0.0, 0.0], [300.0, 20.0], [260.0, 280.0], [30.0, 310.0]],
            event: [-140.0, -140.0, 0.0],
            wave_speed_mi_s: 500.0,
            noise_sigma_s: 0.0,
            victim: None,
        }
    }
}

impl EventConfig {
    pub fn validate(&self) -> Result<()> {
        crate::event::synthesize_arrivals(
            (self.event[0], self.event[1], self.event[2]),
            &self.positions(),
            self.wave_speed_mi_s,
            self.noise_sigma_s,
            0,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn positions(&self) -> Vec<(f64, f64)> {
        self.mmr_positions.iter().map(|p| (p[0], p[1])).collect()
    }
}

/// GPS spoof-capture experiment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpsConfig {
    pub prn: u8,
    pub authentic_phase_chips: f64,
    pub authentic_doppler_hz: f64,
    pub spoof_phase_chips: f64,
    pub spoof_doppler_hz: f64,
    /// Receiver noise sigma during honest operation.
    pub noise_sigma: f64,
    /// Elevated noise floor during the jam-then-spoof handoff.
    pub jam_sigma: f64,
    pub duration_ms: u32,
    pub f0_hz: f64,
    pub doppler_min_hz: f64,
    pub doppler_max_hz: f64,
    pub doppler_step_hz: f64,
}

impl Default for GpsConfig {
    fn default() -> Self {
        GpsConfig {
            prn: 1,
            authentic_phase_chips: 300.25,
            authentic_doppler_hz: 1_000.0,
            spoof_phase_chips: 750.0,
            spoof_doppler_hz: 1_000.0,
            noise_sigma: 0.5,
            jam_sigma: 2.0,
            duration_ms: 1,
            f0_hz: 60.0,
            doppler_min_hz: -10_000.0,
            doppler_max_hz: 10_000.0,
            doppler_step_hz: 500.0,
        }
    }
}

impl GpsConfig {
    pub fn doppler_grid(&self) -> DopplerGrid {
        DopplerGrid {
            min_hz: self.doppler_min_hz,
            max_hz: self.doppler_max_hz,
            step_hz: self.doppler_step_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=32).contains(&self.prn) {
            return Err(Error::Config(format!("prn must be in 1..=32, got {}", self.prn)));
        }
        if !(self.f0_hz.is_finite() && self.f0_hz > 0.0) {
            return Err(Error::Config(format!("f0_hz must be positive, got {}", self.f0_hz)));
        }
        if !(self.jam_sigma.is_finite() && self.jam_sigma >= self.noise_sigma) {
            return Err(Error::Config(format!(
                "jam_sigma ({}) must be at least noise_sigma ({})",
                self.jam_sigma, self.noise_sigma
            )));
        }
        self.doppler_grid().bins().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_fault_config_fills_defaults() {
        let cfg = parse_config("kind = \"fault\"\nseed = 7\nsweep = [0.0, 30.0]\n").unwrap();
        assert_eq!(cfg.kind, ScenarioKind::Fault);
        let fc = cfg.fault_config();
        assert_eq!(fc.frame_rate_hz, 30.0);
        assert_eq!(fc.duration_s, 10.0);
        assert_eq!(fc.t_fault_s, 5.0);
        assert_eq!(fc.resolved_length_miles(), 400.0);
        let scenario = fc.to_scenario().unwrap();
        assert_eq!(scenario.model, LineModel::Long);
    }

    #[test]
    fn empty_text_names_the_missing_kind_key() {
        let err = parse_config("").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("kind"), "{err}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let err =
            parse_config("kind = \"fault\"\nseed = 1\nsweep = [0.0]\nbogus_key = 3\n").unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "{err}");

        let err = parse_config(
            "kind = \"fault\"\nseed = 1\nsweep = [0.0]\n[fault]\nframe_rat = 30\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("frame_rat"), "{err}");
    }

    #[test]
    fn empty_sweep_is_rejected() {
        let err = parse_config("kind = \"fault\"\nseed = 1\nsweep = []\n").unwrap_err();
        assert!(err.to_string().contains("sweep"), "{err}");
    }

    #[test]
    fn foreign_block_is_rejected_by_name() {
        let err = parse_config(
            "kind = \"fault\"\nseed = 1\nsweep = [0.0]\n[voltage]\ne0_pu = 1.0\n",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("voltage") && msg.contains("fault"), "{msg}");
    }

    #[test]
    fn per_model_defaults_resolve() {
        let short = FaultConfig { model: ModelParam::Short, ..FaultConfig::default() };
        assert_eq!(short.resolved_length_miles(), 25.0);
        assert_eq!(short.resolved_fault_z().re, 10.0);
        let long = FaultConfig::default();
        assert_eq!(long.resolved_length_miles(), 400.0);
        assert_eq!(long.resolved_fault_z().re, 100.0);
        // Explicit values win over the per-model defaults.
        let custom = FaultConfig {
            length_miles: Some(123.0),
            fault_z_ohm: Some(ComplexParam { re: 5.0, im: 1.0 }),
            ..FaultConfig::default()
        };
        assert_eq!(custom.resolved_length_miles(), 123.0);
        assert_eq!(custom.resolved_fault_z().im, 1.0);
    }

    #[test]
    fn out_of_range_values_are_config_errors() {
        let err = parse_config(
            "kind = \"fault\"\nseed = 1\nsweep = [0.0]\n[fault]\nd_true = 1.5\n",
        )
        .unwrap_err();
        assert!(err.is_config(), "{err}");

        let err = parse_config(
            "kind = \"voltage\"\nseed = 1\nsweep = [0.0]\n[voltage]\npower_factor = 1.2\n",
        )
        .unwrap_err();
        assert!(err.is_config() && err.to_string().contains("power_factor"), "{err}");

        let err = parse_config(
            "kind = \"gps\"\nseed = 1\nsweep = [2.0]\n[gps]\nprn = 40\n",
        )
        .unwrap_err();
        assert!(err.is_config() && err.to_string().contains("prn"), "{err}");
    }

    #[test]
    fn resolved_config_pins_every_fault_parameter() {
        let cfg = parse_config("kind = \"fault\"\nseed = 7\nsweep = [0.0]\n").unwrap();
        let resolved = cfg.resolved();
        let fc = resolved.fault.as_ref().expect("fault block expanded");
        assert_eq!(fc.length_miles, Some(400.0));
        assert_eq!(fc.fault_z_ohm, Some(ComplexParam { re: 100.0, im: 0.0 }));
        // Echoing the resolved config back through TOML keeps it parseable.
        let text = toml::to_string(&resolved).unwrap();
        let reparsed = parse_config(&text).unwrap();
        assert_eq!(reparsed, resolved);
    }

    #[test]
    fn default_voltage_and_event_blocks_validate() {
        parse_config("kind = \"voltage\"\nseed = 1\nsweep = [5.0, -5.0]\n").unwrap();
        parse_config("kind = \"event\"\nseed = 1\nsweep = [0.0, 0.2]\n").unwrap();
        parse_config("kind = \"gps\"\nseed = 1\nsweep = [0.5, 2.0]\n").unwrap();
    }
}
