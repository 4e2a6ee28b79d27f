//! Scenario execution: dispatch a validated config to its sweep and render
//! the results as CSV text plus a JSON run manifest.
//!
//! [`run_scenario`] is pure — it maps a config to a list of named file
//! bodies, so byte-for-byte reproducibility is testable without touching
//! the filesystem. [`run_to_dir`] writes those files and adds
//! `manifest.json`, which echoes the fully resolved config and is the one
//! output allowed to differ between reruns (it records wall time).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event::{apply_timestamp_attack, locate_event, synthesize_arrivals, EventSolution};
use crate::gps::{
    acquire_detailed, run_spoof_scenario, synthesize_baseband, GpsScene, SatelliteSignal,
    SpoofOutcome,
};
use crate::line_fault::sweep_tsa_fault;
use crate::phasor::time_offset_to_phase_deg;
use crate::voltage::sweep_tsa_voltage;

use super::config::{ScenarioConfig, ScenarioKind};

/// What [`run_to_dir`] left on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Every file written, CSVs first, `manifest.json` last.
    pub files: Vec<PathBuf>,
    pub wall_time_s: f64,
}

/// Execute the scenario a config describes and render its outputs.
///
/// Returns `(file name, file contents)` pairs. The same config always
/// yields byte-identical contents; all randomness flows from `cfg.seed`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<(String, String)>> {
    cfg.validate()?;
    match cfg.kind {
        ScenarioKind::Fault => run_fault(cfg),
        ScenarioKind::Voltage => run_voltage(cfg),
        ScenarioKind::Event => run_event(cfg),
        ScenarioKind::Gps => run_gps(cfg),
    }
}

/// Execute the scenario and write its outputs plus `manifest.json` under
/// `out_dir`, creating the directory if needed.
pub fn run_to_dir(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let outputs = run_scenario(cfg)?;
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::with_capacity(outputs.len() + 1);
    for (name, contents) in &outputs {
        let path = out_dir.join(name);
        fs::write(&path, contents)?;
        files.push(path);
    }
    let wall_time_s = start.elapsed().as_secs_f64();
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "kind": cfg.kind.as_str(),
        "seed": cfg.seed,
        "config": serde_json::to_value(cfg.resolved())
            .map_err(|e| Error::InvalidInput(format!("config not serializable: {e}")))?,
        "outputs": outputs.iter().map(|(name, _)| name.as_str()).collect::<Vec<_>>(),
        "wall_time_s": wall_time_s,
    });
    let path = out_dir.join("manifest.json");
    let mut body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::InvalidInput(format!("manifest not serializable: {e}")))?;
    body.push('\n');
    fs::write(&path, body)?;
    files.push(path);
    Ok(RunReport { files, wall_time_s })
}

fn run_fault(cfg: &ScenarioConfig) -> Result<Vec<(String, String)>> {
    let fc = cfg.fault_config();
    let scenario = fc.to_scenario()?;
    let sweep = sweep_tsa_fault(&scenario, &cfg.sweep, fc.f0_hz, fc.t_attack_s)?;
    let model = fc.model.as_str();
    let fault_type = fc.fault_type.as_str();

    let frames = render_csv(
        &[
            "t",
            "model",
            "fault_type",
            "D_true",
            "dtheta_deg",
            "indicator1",
            "indicator2",
            "D_est",
            "error",
            "clamped_flag",
        ],
        sweep.frames.iter().map(|f| {
            vec![
                fmt(f.t),
                model.to_string(),
                fault_type.to_string(),
                fmt(fc.d_true),
                fmt(f.dtheta_deg),
                fmt(f.indicator1),
                fmt(f.indicator2),
                fmt_opt(f.d_est),
                fmt_opt(f.error),
                flag(f.clamped),
            ]
        }),
    )?;

    let estimates = render_csv(
        &["dtheta_deg", "D_true", "detect_time_s", "D_est", "error", "clamped_flag"],
        sweep.estimates.iter().map(|e| {
            vec![
                fmt(e.dtheta_deg),
                fmt(e.d_true),
                fmt_opt(e.detect_time_s),
                fmt_opt(e.d_est),
                fmt_opt(e.error),
                flag(e.clamped),
            ]
        }),
    )?;

    Ok(vec![
        ("fault_frames.csv".to_string(), frames),
        ("fault_estimates.csv".to_string(), estimates),
    ])
}

fn run_voltage(cfg: &ScenarioConfig) -> Result<Vec<(String, String)>> {
    let vc = cfg.voltage_config();
    let vs = vc.to_scenario()?;
    let sweep = sweep_tsa_voltage(&vs, &cfg.sweep, cfg.seed)?;

    let frames = render_csv(
        &[
            "t",
            "v_mag",
            "v_angle_deg",
            "i_mag",
            "i_angle_deg",
            "e_th_mag",
            "z_th_mag",
            "k_crit",
            "margin_z",
            "margin_p",
            "dtheta_deg",
            "stale_flag",
            "collapse_flag",
        ],
        sweep.frames.iter().map(|sf| {
            let m = &sf.m;
            vec![
                fmt(m.t),
                fmt(m.v.magnitude()),
                fmt(m.v.angle_deg()),
                fmt(m.i.magnitude()),
                fmt(m.i.angle_deg()),
                fmt_opt(m.estimate.map(|e| e.e_th.magnitude())),
                fmt_opt(m.estimate.map(|e| e.z_th.norm())),
                fmt_opt(m.margins.map(|x| x.k_crit)),
                fmt_opt(m.margins.map(|x| x.margin_z)),
                fmt_opt(m.margins.map(|x| x.margin_p)),
                fmt(sf.dtheta_deg),
                flag(m.stale),
                flag(m.collapse),
            ]
        }),
    )?;

    let summary = render_csv(
        &["dtheta_deg", "margin_p_metric", "margin_z_max_dev"],
        sweep.summaries.iter().map(|s| {
            vec![fmt(s.dtheta_deg), fmt(s.margin_p_metric), fmt(s.margin_z_max_dev)]
        }),
    )?;

    Ok(vec![
        ("voltage_frames.csv".to_string(), frames),
        ("voltage_summary.csv".to_string(), summary),
    ])
}

fn run_event(cfg: &ScenarioConfig) -> Result<Vec<(String, String)>> {
    let ec = cfg.event_config();
    let records = synthesize_arrivals(
        (ec.event[0], ec.event[1], ec.event[2]),
        &ec.positions(),
        ec.wave_speed_mi_s,
        ec.noise_sigma_s,
        cfg.seed,
    )?;
    let victim = match &ec.victim {
        Some(id) => {
            if !records.iter().any(|r| r.id == *id) {
                return Err(Error::Config(format!("victim {id:?} is not a configured monitor")));
            }
            id.clone()
        }
        None => {
            records
                .iter()
                .min_by(|a, b| a.t_arrival_s.total_cmp(&b.t_arrival_s))
                .expect("synthesis guarantees records")
                .id
                .clone()
        }
    };
    // The no-attack solution anchors the displacement column, so a noisy
    // run reports attack damage, not noise damage.
    let baseline = locate_event(&records, ec.wave_speed_mi_s, None)?;

    let solutions: Vec<(f64, EventSolution)> = cfg
        .sweep
        .par_iter()
        .map(|&delta| {
            let shifted = apply_timestamp_attack(&records, &victim, delta)?;
            let sol = locate_event(&shifted, ec.wave_speed_mi_s, None)?;
            Ok((delta, sol))
        })
        .collect::<Result<Vec<_>>>()?;

    let body = render_csv(
        &[
            "x_e",
            "y_e",
            "t_e",
            "residual",
            "iterations",
            "converged",
            "victim_id",
            "delta",
            "displacement_miles",
        ],
        solutions.iter().map(|(delta, s)| {
            let displacement =
                (s.x_e_miles - baseline.x_e_miles).hypot(s.y_e_miles - baseline.y_e_miles);
            vec![
                fmt(s.x_e_miles),
                fmt(s.y_e_miles),
                fmt(s.t_e_s),
                fmt(s.residual_norm),
                s.iterations.to_string(),
                flag(s.converged),
                victim.clone(),
                fmt(*delta),
                fmt(displacement),
            ]
        }),
    )?;

    Ok(vec![("event_solutions.csv".to_string(), body)])
}

fn run_gps(cfg: &ScenarioConfig) -> Result<Vec<(String, String)>> {
    let gc = cfg.gps_config();
    let grid = gc.doppler_grid();
    let authentic = GpsScene::new(
        vec![SatelliteSignal::new(
            gc.prn,
            1.0,
            gc.authentic_phase_chips,
            gc.authentic_doppler_hz,
        )],
        gc.noise_sigma,
        gc.duration_ms,
    )?;

    // Every ratio replays the same jam-then-spoof handoff under the same
    // seed, so rows differ only by counterfeit power.
    let outcomes: Vec<(f64, SpoofOutcome)> = cfg
        .sweep
        .par_iter()
        .map(|&ratio| {
            let spoof = GpsScene::new(
                vec![SatelliteSignal::new(
                    gc.prn,
                    ratio,
                    gc.spoof_phase_chips,
                    gc.spoof_doppler_hz,
                )],
                gc.noise_sigma,
                gc.duration_ms,
            )?;
            let outcome = run_spoof_scenario(&authentic, &spoof, gc.jam_sigma, &grid, cfg.seed)?;
            Ok((ratio, outcome))
        })
        .collect::<Result<Vec<_>>>()?;

    let acquisition = render_csv(
        &[
            "power_ratio",
            "prn",
            "phase_before_chips",
            "phase_after_chips",
            "doppler_after_hz",
            "peak_after",
            "peak_to_floor_after",
            "captured_flag",
            "ambiguous_flag",
            "chip_shift",
            "timing_error_s",
            "dtheta_deg",
        ],
        outcomes.iter().map(|(ratio, o)| {
            vec![
                fmt(*ratio),
                o.after.prn.to_string(),
                fmt(o.before.code_phase_chips),
                fmt(o.after.code_phase_chips),
                fmt(o.after.doppler_hz),
                fmt(o.after.peak),
                fmt(o.after.peak_to_floor),
                flag(o.captured),
                flag(o.ambiguous),
                fmt(o.chip_shift),
                fmt(o.timing_error_s),
                fmt(time_offset_to_phase_deg(o.timing_error_s, gc.f0_hz)),
            ]
        }),
    )?;

    // Search-surface dump: the winning Doppler bin of a clean acquisition,
    // one row per code lag.
    let samples = synthesize_baseband(&authentic, cfg.seed)?;
    let (result, surface) =
        acquire_detailed(&samples, authentic.sample_rate_hz, gc.prn, &grid)?;
    let bin = surface
        .doppler_bins_hz
        .iter()
        .position(|&d| d == result.doppler_hz)
        .unwrap_or(0);
    let grid_csv = render_csv(
        &["code_phase_chips", "doppler_hz", "magnitude"],
        surface.lag_chips.iter().enumerate().map(|(lag, &chip)| {
            vec![fmt(chip), fmt(result.doppler_hz), fmt(surface.magnitudes[bin][lag])]
        }),
    )?;

    Ok(vec![
        ("gps_acquisition.csv".to_string(), acquisition),
        ("gps_grid.csv".to_string(), grid_csv),
    ])
}

/// Shortest round-trip decimal rendering; deterministic across platforms.
fn fmt(x: f64) -> String {
    format!("{x}")
}

/// Absent optionals render as empty CSV fields.
fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

fn render_csv<I>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::InvalidInput(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    let bytes =
        w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}
