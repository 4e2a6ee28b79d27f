//! Browser bindings for the demo page: three interactive operations, each
//! returning a JSON document ready for plotting.
//!
//! The `*_json` functions are plain Rust (testable on any target); the
//! `#[wasm_bindgen]` exports are thin wrappers that map errors onto JS
//! strings. All randomness is seeded, so the page's plots are reproducible.

use wasm_bindgen::prelude::*;

use tsa_grid_core::event::{apply_timestamp_attack, locate_event, synthesize_arrivals};
use tsa_grid_core::gps::{run_spoof_scenario, GpsScene, SatelliteSignal};
use tsa_grid_core::harness::{EventConfig, FaultConfig, GpsConfig, ModelParam};
use tsa_grid_core::line_fault::sweep_tsa_fault;
use tsa_grid_core::phasor::time_offset_to_phase_deg;
use tsa_grid_core::{Error, Result};

fn linspace(lo: f64, hi: f64, points: u32) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidInput("need at least two sweep points".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidInput(format!("bad sweep range [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|k| lo + step * k as f64).collect())
}

/// Location error versus clock offset for one line model.
pub fn fault_error_curve_json(
    model: &str,
    d_true: f64,
    max_offset_deg: f64,
    points: u32,
) -> Result<String> {
    let model = match model {
        "short" => ModelParam::Short,
        "medium" => ModelParam::Medium,
        "long" => ModelParam::Long,
        other => return Err(Error::Config(format!("unknown line model {other:?}"))),
    };
    let fc = FaultConfig { model, d_true, ..FaultConfig::default() };
    let scenario = fc.to_scenario()?;
    let offsets = linspace(0.0, max_offset_deg, points)?;
    let sweep = sweep_tsa_fault(&scenario, &offsets, fc.f0_hz, fc.t_attack_s)?;
    let rows: Vec<_> = sweep
        .estimates
        .iter()
        .map(|e| {
            serde_json::json!({
                "dtheta_deg": e.dtheta_deg,
                "d_est": e.d_est,
                "error": e.error,
                "clamped": e.clamped,
                "detect_time_s": e.detect_time_s,
            })
        })
        .collect();
    Ok(serde_json::json!({
        "model": model.as_str(),
        "d_true": d_true,
        "length_miles": fc.resolved_length_miles(),
        "rows": rows,
    })
    .to_string())
}

/// Re-acquisition outcome versus counterfeit power ratio.
pub fn gps_spoof_profile_json(
    min_ratio: f64,
    max_ratio: f64,
    points: u32,
    seed: u64,
) -> Result<String> {
    let gc = GpsConfig::default();
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
    let mut rows = Vec::new();
    for ratio in linspace(min_ratio, max_ratio, points)? {
        if ratio <= 0.0 {
            return Err(Error::InvalidInput(format!("power ratio must be positive, got {ratio}")));
        }
        let spoof = GpsScene::new(
            vec![SatelliteSignal::new(gc.prn, ratio, gc.spoof_phase_chips, gc.spoof_doppler_hz)],
            gc.noise_sigma,
            gc.duration_ms,
        )?;
        let o = run_spoof_scenario(&authentic, &spoof, gc.jam_sigma, &grid, seed)?;
        rows.push(serde_json::json!({
            "power_ratio": ratio,
            "captured": o.captured,
            "ambiguous": o.ambiguous,
            "phase_after_chips": o.after.code_phase_chips,
            "chip_shift": o.chip_shift,
            "timing_error_s": o.timing_error_s,
            "dtheta_deg": time_offset_to_phase_deg(o.timing_error_s, gc.f0_hz),
        }));
    }
    Ok(serde_json::json!({
        "prn": gc.prn,
        "authentic_phase_chips": gc.authentic_phase_chips,
        "spoof_phase_chips": gc.spoof_phase_chips,
        "rows": rows,
    })
    .to_string())
}

/// Estimate drift as one monitor's stamps are shifted further and further.
pub fn event_mislocation_json(max_delta_s: f64, points: u32, seed: u64) -> Result<String> {
    let ec = EventConfig::default();
    let records = synthesize_arrivals(
        (ec.event[0], ec.event[1], ec.event[2]),
        &ec.positions(),
        ec.wave_speed_mi_s,
        ec.noise_sigma_s,
        seed,
    )?;
    let victim = records
        .iter()
        .min_by(|a, b| a.t_arrival_s.total_cmp(&b.t_arrival_s))
        .expect("default geometry has monitors")
        .id
        .clone();
    let baseline = locate_event(&records, ec.wave_speed_mi_s, None)?;
    let mut rows = Vec::new();
    for delta in linspace(0.0, max_delta_s, points)? {
        let attacked = apply_timestamp_attack(&records, &victim, delta)?;
        let sol = locate_event(&attacked, ec.wave_speed_mi_s, None)?;
        let displacement =
            (sol.x_e_miles - baseline.x_e_miles).hypot(sol.y_e_miles - baseline.y_e_miles);
        rows.push(serde_json::json!({
            "delta_s": delta,
            "x_e": sol.x_e_miles,
            "y_e": sol.y_e_miles,
            "displacement_miles": displacement,
            "converged": sol.converged,
        }));
    }
    let monitors: Vec<_> = records
        .iter()
        .map(|r| serde_json::json!({ "id": r.id, "x": r.x_miles, "y": r.y_miles }))
        .collect();
    Ok(serde_json::json!({
        "monitors": monitors,
        "true_event": { "x": ec.event[0], "y": ec.event[1], "t": ec.event[2] },
        "victim": victim,
        "wave_speed_mi_s": ec.wave_speed_mi_s,
        "rows": rows,
    })
    .to_string())
}

fn to_js(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// JS: location error versus clock offset for `model` ("short" | "medium"
/// | "long") with the fault at `d_true`.
#[wasm_bindgen]
pub fn fault_error_curve(
    model: &str,
    d_true: f64,
    max_offset_deg: f64,
    points: u32,
) -> std::result::Result<String, JsValue> {
    fault_error_curve_json(model, d_true, max_offset_deg, points).map_err(to_js)
}

/// JS: spoof capture profile over a power-ratio range.
#[wasm_bindgen]
pub fn gps_spoof_profile(
    min_ratio: f64,
    max_ratio: f64,
    points: u32,
    seed: u64,
) -> std::result::Result<String, JsValue> {
    gps_spoof_profile_json(min_ratio, max_ratio, points, seed).map_err(to_js)
}

/// JS: event-location drift as the earliest monitor's stamp is forged.
#[wasm_bindgen]
pub fn event_mislocation(
    max_delta_s: f64,
    points: u32,
    seed: u64,
) -> std::result::Result<String, JsValue> {
    event_mislocation_json(max_delta_s, points, seed).map_err(to_js)
}
