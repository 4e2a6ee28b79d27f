//! Quasi-static stressed-feed scenario for the stability-margin study.
//!
//! A source whose RMS amplitude breathes at 1 Hz feeds a constant-power
//! load over three parallel lines. The event sequence stresses the feed in
//! stages: a mid-line shunt fault on the first line burns over a half-second
//! window, then the first and second lines trip out permanently. Each frame
//! is a steady-state solve — the 1 Hz modulation provides the load
//! variation the Thevenin estimator needs, and every topology change steps
//! the margins downward.
//!
//! The constant-power load has no closed-form terminal voltage, so each
//! frame runs a fixed-point iteration on the network's port equivalent; a
//! frame that cannot deliver the demanded power inside the iteration budget
//! is flagged as collapsed rather than failing the run.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::phasor::{LineParameters, Phasor};

/// Iteration budget for the constant-power fixed point.
const MAX_LOAD_ITERATIONS: usize = 100;

/// Relative power-mismatch tolerance declaring a frame converged.
const LOAD_TOLERANCE: f64 = 1e-9;

/// The §IV-B-style scenario: modulated source, three parallel lines,
/// constant-power load, staged events.
#[derive(Debug, Clone)]
pub struct VoltageScenario {
    /// Base source RMS amplitude, per unit.
    pub e0_pu: f64,
    /// Fractional amplitude of the sinusoidal source modulation.
    pub modulation: f64,
    /// Modulation frequency, Hz.
    pub modulation_hz: f64,
    /// Source impedance behind the sending bus, pu.
    pub zs_pu: Complex64,
    /// The three parallel lines, used as series impedances `z1·length`.
    pub lines: [LineParameters; 3],
    /// Constant load power S = P + jQ, pu (constant power factor).
    pub s_load_pu: Complex64,
    /// Shunt fault window on the first line's midpoint, seconds.
    pub fault_window_s: (f64, f64),
    /// Fault shunt impedance at the midpoint node, pu.
    pub fault_z_pu: Complex64,
    /// Permanent trip times of the first and second lines, seconds.
    pub trip_times_s: (f64, f64),
    pub frame_rate_hz: f64,
    pub duration_s: f64,
    /// Measurement noise σ added to each emitted phasor component, pu.
    pub noise_sigma_pu: f64,
}

impl Default for VoltageScenario {
    fn default() -> Self {
        let line = LineParameters {
            z1: Complex64::new(0.01, 0.1),
            y1: Complex64::ZERO,
            length_miles: 1.0,
            gamma: None,
            zc: None,
        };
        // P = 1 pu at 0.995 lagging power factor.
        let phi = 0.995_f64.acos();
        VoltageScenario {
            e0_pu: 1.0,
            modulation: 0.03,
            modulation_hz: 1.0,
            zs_pu: Complex64::new(0.01, 0.05),
            lines: [line.clone(), line.clone(), line],
            s_load_pu: Complex64::new(1.0, phi.tan()),
            fault_window_s: (2.0, 2.5),
            fault_z_pu: Complex64::new(0.2, 0.0),
            trip_times_s: (4.0, 6.0),
            frame_rate_hz: 30.0,
            duration_s: 10.0,
            noise_sigma_pu: 0.0,
        }
    }
}

impl VoltageScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.e0_pu.is_finite() && self.e0_pu > 0.0) {
            return Err(Error::InvalidInput("source amplitude must be positive".into()));
        }
        if !(self.modulation.is_finite() && (0.0..1.0).contains(&self.modulation)) {
            return Err(Error::InvalidInput("modulation fraction must lie in [0, 1)".into()));
        }
        if !(self.modulation_hz.is_finite() && self.modulation_hz > 0.0) {
            return Err(Error::InvalidInput("modulation frequency must be positive".into()));
        }
        if self.zs_pu == Complex64::ZERO || !self.zs_pu.re.is_finite() || !self.zs_pu.im.is_finite()
        {
            return Err(Error::InvalidInput("source impedance must be finite and nonzero".into()));
        }
        for (idx, line) in self.lines.iter().enumerate() {
            if line.series_impedance() == Complex64::ZERO {
                return Err(Error::InvalidInput(format!(
                    "line {idx} has zero series impedance"
                )));
            }
        }
        if !(self.s_load_pu.re.is_finite() && self.s_load_pu.im.is_finite())
            || self.s_load_pu.re <= 0.0
        {
            return Err(Error::InvalidInput(
                "load must draw positive active power".into(),
            ));
        }
        if self.fault_z_pu == Complex64::ZERO
            || !self.fault_z_pu.re.is_finite()
            || !self.fault_z_pu.im.is_finite()
        {
            return Err(Error::InvalidInput("fault impedance must be finite and nonzero".into()));
        }
        let (f0, f1) = self.fault_window_s;
        let (t0, t1) = self.trip_times_s;
        let ordered = 0.0 < f0 && f0 < f1 && f1 <= t0 && t0 < t1;
        if !(f0.is_finite() && f1.is_finite() && t0.is_finite() && t1.is_finite() && ordered) {
            return Err(Error::InvalidInput(format!(
                "event times must increase strictly: fault [{f0}, {f1}), trips {t0}, {t1}"
            )));
        }
        if !(self.frame_rate_hz.is_finite() && self.frame_rate_hz > 0.0) {
            return Err(Error::InvalidInput("frame rate must be positive".into()));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::InvalidInput("duration must be positive".into()));
        }
        if !(self.noise_sigma_pu.is_finite() && self.noise_sigma_pu >= 0.0) {
            return Err(Error::InvalidInput("noise sigma must be non-negative".into()));
        }
        Ok(())
    }

    /// Frame instants `k / frame_rate` covering `[0, duration)`.
    pub fn frame_times(&self) -> Vec<f64> {
        let count = (self.duration_s * self.frame_rate_hz).round() as usize;
        (0..count).map(|k| k as f64 / self.frame_rate_hz).collect()
    }
}

/// One emitted load-bus frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageFrame {
    pub t: f64,
    /// Load-bus voltage phasor, pu.
    pub v: Phasor,
    /// Current into the load, pu.
    pub i: Phasor,
    /// True when the constant-power iteration failed to converge (the load
    /// exceeded deliverable power at this frame).
    pub collapse: bool,
}

/// Which circuit the scenario presents at a given instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Topology {
    /// All three lines, no fault.
    Full,
    /// All three lines with the midpoint shunt on line 0.
    Faulted,
    /// Line 0 tripped.
    TwoLines,
    /// Lines 0 and 1 tripped.
    OneLine,
}

fn topology_at(vs: &VoltageScenario, t: f64) -> Topology {
    if t >= vs.trip_times_s.1 {
        Topology::OneLine
    } else if t >= vs.trip_times_s.0 {
        Topology::TwoLines
    } else if t >= vs.fault_window_s.0 && t < vs.fault_window_s.1 {
        Topology::Faulted
    } else {
        Topology::Full
    }
}

/// Port equivalent seen by the load bus: open-circuit voltage is
/// `h · E(t)`, series impedance is `z_eq`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PortEquivalent {
    h: Complex64,
    z_eq: Complex64,
}

fn reduce(vs: &VoltageScenario, topo: Topology) -> Result<PortEquivalent> {
    let z: Vec<Complex64> = vs.lines.iter().map(|l| l.series_impedance()).collect();
    let parallel = |zs: &[Complex64]| -> Complex64 {
        let y: Complex64 = zs.iter().map(|zi| zi.inv()).sum();
        y.inv()
    };
    match topo {
        Topology::Full => Ok(PortEquivalent { h: Complex64::ONE, z_eq: vs.zs_pu + parallel(&z) }),
        Topology::TwoLines => {
            Ok(PortEquivalent { h: Complex64::ONE, z_eq: vs.zs_pu + parallel(&z[1..]) })
        }
        Topology::OneLine => {
            Ok(PortEquivalent { h: Complex64::ONE, z_eq: vs.zs_pu + parallel(&z[2..]) })
        }
        Topology::Faulted => {
            // Nodes: sending bus, fault midpoint, load bus. Two solves of
            // the same admittance matrix give the open-circuit transfer and
            // the driving-point impedance at the load bus.
            let y_half = (z[0] / 2.0).inv();
            let y_f = vs.fault_z_pu.inv();
            let y_rest = z[1].inv() + z[2].inv();
            let y_s = vs.zs_pu.inv();
            let a = vec![
                vec![y_s + y_half + y_rest, -y_half, -y_rest],
                vec![-y_half, 2.0 * y_half + y_f, -y_half],
                vec![-y_rest, -y_half, y_half + y_rest],
            ];
            let voc = linalg::solve(a.clone(), vec![y_s, Complex64::ZERO, Complex64::ZERO])?;
            let zin = linalg::solve(a, vec![Complex64::ZERO, Complex64::ZERO, Complex64::ONE])?;
            Ok(PortEquivalent { h: voc[2], z_eq: zin[2] })
        }
    }
}

/// Fixed-point solve of the constant-power load against a port equivalent.
///
/// Returns the terminal pair and whether the power mismatch converged.
fn solve_load(voc: Complex64, z_eq: Complex64, s_load: Complex64) -> (Complex64, Complex64, bool) {
    let mut v = voc;
    let mut i = Complex64::ZERO;
    for _ in 0..MAX_LOAD_ITERATIONS {
        if v.norm() < 1e-12 {
            return (v, i, false);
        }
        i = (s_load / v).conj();
        v = voc - z_eq * i;
        let s = v * i.conj();
        if (s - s_load).norm() < LOAD_TOLERANCE * s_load.norm() {
            return (v, i, true);
        }
    }
    (v, i, false)
}

/// Run the scenario frame by frame.
///
/// Deterministic per `(scenario, seed)`; the seed only feeds measurement
/// noise, so noiseless runs ignore it entirely.
pub fn run_voltage_scenario(vs: &VoltageScenario, seed: u64) -> Result<Vec<VoltageFrame>> {
    vs.validate()?;
    let mut equivalents: Vec<(Topology, PortEquivalent)> = Vec::new();
    let mut frames = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = 2.0 * std::f64::consts::PI * vs.modulation_hz;
    for t in vs.frame_times() {
        let topo = topology_at(vs, t);
        let port = match equivalents.iter().find(|(k, _)| *k == topo) {
            Some((_, p)) => *p,
            None => {
                let p = reduce(vs, topo)?;
                equivalents.push((topo, p));
                p
            }
        };
        let e_t = vs.e0_pu * (1.0 + vs.modulation * (omega * t).sin());
        let voc = port.h * e_t;
        let (mut v, mut i, converged) = solve_load(voc, port.z_eq, vs.s_load_pu);
        if vs.noise_sigma_pu > 0.0 {
            let mut draw = || -> Complex64 {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                vs.noise_sigma_pu * Complex64::new(re, im)
            };
            v += draw();
            i += draw();
        }
        frames.push(VoltageFrame {
            t,
            v: Phasor::from_complex(v),
            i: Phasor::from_complex(i),
            collapse: !converged,
        });
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_v_mag(frames: &[VoltageFrame], window: (f64, f64)) -> f64 {
        let picked: Vec<f64> = frames
            .iter()
            .filter(|f| f.t >= window.0 && f.t < window.1)
            .map(|f| f.v.magnitude())
            .collect();
        assert!(!picked.is_empty());
        picked.iter().sum::<f64>() / picked.len() as f64
    }

    /// Defaults with every event pushed past the horizon.
    fn eventless() -> VoltageScenario {
        let mut vs = VoltageScenario::default();
        vs.fault_window_s = (20.0, 20.5);
        vs.trip_times_s = (40.0, 60.0);
        vs
    }

    #[test]
    fn true_equivalents_show_margins_shrinking_with_each_trip() {
        use crate::voltage::margins::margin_indices;
        use crate::voltage::thevenin::ThevEstimate;

        // Evaluate the stability indices against the exact port equivalent
        // of each post-event topology: every trip stiffens the source
        // impedance, so both margins must shrink while staying positive.
        let vs = VoltageScenario::default();
        let mut margins = Vec::new();
        for topo in [Topology::Full, Topology::TwoLines, Topology::OneLine] {
            let port = reduce(&vs, topo).unwrap();
            let voc = port.h * vs.e0_pu;
            let (v, i, converged) = solve_load(voc, port.z_eq, vs.s_load_pu);
            assert!(converged, "defaults must stay solvable on {topo:?}");
            let est = ThevEstimate {
                e_th: Phasor::from_complex(voc),
                z_th: port.z_eq,
                condition: 1.0,
                window: 0,
            };
            let m =
                margin_indices(&est, Phasor::from_complex(v), Phasor::from_complex(i)).unwrap();
            margins.push((m.margin_z, m.margin_p));
        }
        for pair in margins.windows(2) {
            assert!(pair[0].0 > pair[1].0, "margin_z not shrinking: {margins:?}");
            assert!(pair[0].1 > pair[1].1, "margin_p not shrinking: {margins:?}");
        }
        let (last_z, last_p) = margins[2];
        assert!(last_z > 0.0 && last_p > 0.0, "one line should still be stable: {margins:?}");
    }

    #[test]
    fn time_invariant_circuit_repeats_one_frame() {
        let mut vs = eventless();
        vs.modulation = 0.0;
        let frames = run_voltage_scenario(&vs, 7).unwrap();
        assert_eq!(frames.len(), 300);
        for f in &frames[1..] {
            assert_eq!((f.v, f.i, f.collapse), (frames[0].v, frames[0].i, frames[0].collapse));
        }
        assert!(!frames[0].collapse);
    }

    #[test]
    fn every_converged_frame_delivers_the_demanded_power() {
        let vs = VoltageScenario::default();
        let frames = run_voltage_scenario(&vs, 0).unwrap();
        let p = vs.s_load_pu.re;
        for f in &frames {
            assert!(!f.collapse, "defaults must not collapse (t = {})", f.t);
            let delivered = (f.v.to_complex() * f.i.to_complex().conj()).re;
            assert!(
                (delivered - p).abs() < 1e-8 * p,
                "frame at {}: delivered {delivered} vs demanded {p}",
                f.t
            );
        }
    }

    #[test]
    fn each_line_trip_steps_the_bus_voltage_down() {
        let frames = run_voltage_scenario(&VoltageScenario::default(), 0).unwrap();
        // Windows of exactly one modulation period so the 1 Hz breathing
        // averages out.
        let three_lines = mean_v_mag(&frames, (3.0, 4.0));
        let two_lines = mean_v_mag(&frames, (5.0, 6.0));
        let one_line = mean_v_mag(&frames, (7.0, 8.0));
        assert!(three_lines > two_lines && two_lines > one_line);
        // The fault window sags the voltage, then it recovers.
        let pre_fault = mean_v_mag(&frames, (1.0, 2.0));
        let in_fault = mean_v_mag(&frames, (2.0, 2.5));
        assert!(in_fault < pre_fault - 0.01, "fault dip too small: {pre_fault} -> {in_fault}");
    }

    #[test]
    fn noise_is_seeded_and_noiseless_runs_ignore_the_seed() {
        let vs = VoltageScenario::default();
        assert_eq!(
            run_voltage_scenario(&vs, 1).unwrap(),
            run_voltage_scenario(&vs, 2).unwrap(),
            "zero noise makes the seed irrelevant"
        );
        let mut noisy = VoltageScenario::default();
        noisy.noise_sigma_pu = 1e-3;
        assert_eq!(run_voltage_scenario(&noisy, 5).unwrap(), run_voltage_scenario(&noisy, 5).unwrap());
        assert_ne!(run_voltage_scenario(&noisy, 5).unwrap(), run_voltage_scenario(&noisy, 6).unwrap());
    }

    #[test]
    fn overload_is_flagged_as_collapse_not_an_error() {
        let mut vs = eventless();
        vs.s_load_pu = Complex64::new(8.0, 0.8); // far beyond deliverable
        let frames = run_voltage_scenario(&vs, 0).unwrap();
        assert!(frames.iter().all(|f| f.collapse));
    }

    #[test]
    fn validation_rejects_misordered_events_and_bad_parameters() {
        let mut vs = VoltageScenario::default();
        vs.fault_window_s = (2.0, 4.5); // overlaps the first trip
        assert!(vs.validate().is_err());
        let mut vs = VoltageScenario::default();
        vs.trip_times_s = (6.0, 4.0);
        assert!(vs.validate().is_err());
        let mut vs = VoltageScenario::default();
        vs.zs_pu = Complex64::ZERO;
        assert!(vs.validate().is_err());
        let mut vs = VoltageScenario::default();
        vs.modulation = 1.0;
        assert!(vs.validate().is_err());
        let mut vs = VoltageScenario::default();
        vs.s_load_pu = Complex64::new(-1.0, 0.0);
        assert!(vs.validate().is_err());
        let mut vs = VoltageScenario::default();
        vs.fault_z_pu = Complex64::ZERO;
        assert!(vs.validate().is_err());
    }
}
