//! Disturbing-event location from monitor arrival times, and what a single
//! forged time stamp does to it.
//!
//! A grid disturbance launches an electromechanical wave that reaches each
//! frequency monitor (MMR) at a time fixed by distance and propagation
//! speed. With four or more monitors the event's position and origin time
//! follow from the arrival-time differences. The residual for monitor `i`,
//!
//! ```text
//! f_i = (x_i − x_e)² + (y_i − y_e)² − v_e²·(t_i − t_e)²
//! ```
//!
//! vanishes at the true solution, so we minimize `Σ f_i²` with a damped
//! Gauss–Newton iteration. Four equations in three unknowns are exactly
//! consistent only for honest data; the least-squares form stays well-posed
//! when one monitor's clock has been skewed — which is precisely the attack
//! studied here: shifting a single arrival stamp drags the minimizer far
//! from the true position.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;

/// Default electromechanical wave speed, miles per second.
pub const DEFAULT_WAVE_SPEED_MI_S: f64 = 500.0;

const MAX_ITERATIONS: usize = 50;
const STEP_TOLERANCE: f64 = 1e-9;
const INITIAL_DAMPING: f64 = 1e-3;
const DAMPING_CEILING: f64 = 1e15;
/// Relative spread of the minor principal axis below which the monitor
/// geometry counts as collinear.
const COLLINEARITY_FLOOR: f64 = 1e-12;

/// One frequency monitor's position and stamped arrival time.
#[derive(Debug, Clone, PartialEq)]
pub struct MmrRecord {
    pub id: String,
    pub x_miles: f64,
    pub y_miles: f64,
    pub t_arrival_s: f64,
}

/// Solver output in the original (unscaled) coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSolution {
    pub x_e_miles: f64,
    pub y_e_miles: f64,
    pub t_e_s: f64,
    /// Root-mean-square residual, in miles².
    pub residual_norm: f64,
    pub iterations: usize,
    /// False when the iteration budget ran out before the step shrank below
    /// tolerance; the best iterate is still returned.
    pub converged: bool,
}

/// Generate arrival records for an event at `(x_e, y_e, t_e)` observed by
/// monitors at `positions`.
///
/// Each stamp is `t_e + distance/v_e` plus optional Gaussian noise of
/// standard deviation `noise_sigma_s`, drawn deterministically from `seed`.
pub fn synthesize_arrivals(
    event: (f64, f64, f64),
    positions: &[(f64, f64)],
    v_e_mi_s: f64,
    noise_sigma_s: f64,
    seed: u64,
) -> Result<Vec<MmrRecord>> {
    if !(v_e_mi_s > 0.0 && v_e_mi_s.is_finite()) {
        return Err(Error::InvalidInput("wave speed must be positive".into()));
    }
    if positions.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "triangulation needs at least 4 monitors, got {}",
            positions.len()
        )));
    }
    if !(noise_sigma_s >= 0.0 && noise_sigma_s.is_finite()) {
        return Err(Error::InvalidInput("noise sigma must be non-negative".into()));
    }
    let (x_e, y_e, t_e) = event;
    if ![x_e, y_e, t_e].iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidInput("event coordinates must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    positions
        .iter()
        .enumerate()
        .map(|(k, &(x, y))| {
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::InvalidInput(format!("monitor {k} has non-finite position")));
            }
            let dist = ((x - x_e).powi(2) + (y - y_e).powi(2)).sqrt();
            let mut t = t_e + dist / v_e_mi_s;
            if noise_sigma_s > 0.0 {
                let draw: f64 = StandardNormal.sample(&mut rng);
                t += noise_sigma_s * draw;
            }
            Ok(MmrRecord { id: format!("mmr-{}", k + 1), x_miles: x, y_miles: y, t_arrival_s: t })
        })
        .collect()
}

/// Shift one monitor's arrival stamp by `delta_s`, leaving everything else
/// untouched.
pub fn apply_timestamp_attack(
    records: &[MmrRecord],
    victim_id: &str,
    delta_s: f64,
) -> Result<Vec<MmrRecord>> {
    if !delta_s.is_finite() {
        return Err(Error::InvalidInput("time-stamp shift must be finite".into()));
    }
    let mut hit = false;
    let out = records
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if r.id == victim_id {
                r.t_arrival_s += delta_s;
                hit = true;
            }
            r
        })
        .collect();
    if !hit {
        return Err(Error::InvalidInput(format!("no monitor named {victim_id:?}")));
    }
    Ok(out)
}

/// The triangulation problem mapped to dimensionless variables: positions
/// divided by the monitor bounding-box diagonal (after centering), times
/// multiplied by `v_e` and divided by the same diagonal.
struct ScaledProblem {
    x: Vec<f64>,
    y: Vec<f64>,
    t: Vec<f64>,
    /// Bounding-box diagonal, miles.
    diag: f64,
    center: (f64, f64),
    t_origin: f64,
    v_e: f64,
}

impl ScaledProblem {
    fn new(records: &[MmrRecord], v_e: f64) -> Result<Self> {
        if records.len() < 4 {
            return Err(Error::InvalidInput(format!(
                "triangulation needs at least 4 monitors, got {}",
                records.len()
            )));
        }
        if !(v_e > 0.0 && v_e.is_finite()) {
            return Err(Error::InvalidInput("wave speed must be positive".into()));
        }
        for r in records {
            if ![r.x_miles, r.y_miles, r.t_arrival_s].iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidInput(format!("monitor {:?} has non-finite data", r.id)));
            }
        }
        check_not_collinear(records)?;
        let (min_x, max_x) = min_max(records.iter().map(|r| r.x_miles));
        let (min_y, max_y) = min_max(records.iter().map(|r| r.y_miles));
        let diag = ((max_x - min_x).powi(2) + (max_y - min_y).powi(2)).sqrt();
        let center = ((min_x + max_x) / 2.0, (min_y + max_y) / 2.0);
        let t_origin = min_max(records.iter().map(|r| r.t_arrival_s)).0;
        Ok(Self {
            x: records.iter().map(|r| (r.x_miles - center.0) / diag).collect(),
            y: records.iter().map(|r| (r.y_miles - center.1) / diag).collect(),
            t: records.iter().map(|r| (r.t_arrival_s - t_origin) * v_e / diag).collect(),
            diag,
            center,
            t_origin,
            v_e,
        })
    }

    fn scale_point(&self, x: f64, y: f64, t: f64) -> [f64; 3] {
        [
            (x - self.center.0) / self.diag,
            (y - self.center.1) / self.diag,
            (t - self.t_origin) * self.v_e / self.diag,
        ]
    }

    fn unscale(&self, u: [f64; 3]) -> (f64, f64, f64) {
        (
            u[0] * self.diag + self.center.0,
            u[1] * self.diag + self.center.1,
            u[2] * self.diag / self.v_e + self.t_origin,
        )
    }

    /// Dimensionless residuals `f_i / diag²`.
    fn residuals(&self, u: [f64; 3]) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.y)
            .zip(&self.t)
            .map(|((&x, &y), &t)| {
                (x - u[0]).powi(2) + (y - u[1]).powi(2) - (t - u[2]).powi(2)
            })
            .collect()
    }

    fn jacobian(&self, u: [f64; 3]) -> Vec<[f64; 3]> {
        self.x
            .iter()
            .zip(&self.y)
            .zip(&self.t)
            .map(|((&x, &y), &t)| {
                [-2.0 * (x - u[0]), -2.0 * (y - u[1]), 2.0 * (t - u[2])]
            })
            .collect()
    }

    fn cost(&self, u: [f64; 3]) -> f64 {
        self.residuals(u).iter().map(|f| f * f).sum()
    }

    /// Closed-form starting point: subtracting monitor 0's residual from
    /// each other's cancels every quadratic term, leaving a linear system
    /// in `(x_e, y_e, t_e)` that is exact on consistent data and a sturdy
    /// first guess otherwise.
    fn linear_init(&self) -> Option<[f64; 3]> {
        let c = |k: usize| self.x[k].powi(2) + self.y[k].powi(2) - self.t[k].powi(2);
        let mut ata = [[0.0f64; 3]; 3];
        let mut atb = [0.0; 3];
        for i in 1..self.x.len() {
            let row = [
                -2.0 * (self.x[i] - self.x[0]),
                -2.0 * (self.y[i] - self.y[0]),
                2.0 * (self.t[i] - self.t[0]),
            ];
            let rhs = -(c(i) - c(0));
            for a in 0..3 {
                for b in 0..3 {
                    ata[a][b] += row[a] * row[b];
                }
                atb[a] += row[a] * rhs;
            }
        }
        let a = ata
            .iter()
            .map(|row| row.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .collect();
        let b = atb.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let u = linalg::solve(a, b).ok()?;
        let u = [u[0].re, u[1].re, u[2].re];
        u.iter().all(|v| v.is_finite()).then_some(u)
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Reject monitor layouts whose minor principal axis has collapsed: with
/// all monitors on one line the perpendicular coordinate of the event is
/// unobservable.
fn check_not_collinear(records: &[MmrRecord]) -> Result<()> {
    let n = records.len() as f64;
    let mean_x = records.iter().map(|r| r.x_miles).sum::<f64>() / n;
    let mean_y = records.iter().map(|r| r.y_miles).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for r in records {
        let dx = r.x_miles - mean_x;
        let dy = r.y_miles - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let trace = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let gap = (trace * trace - 4.0 * det).max(0.0).sqrt();
    let minor = (trace - gap) / 2.0;
    let major = (trace + gap) / 2.0;
    if minor <= COLLINEARITY_FLOOR * major.max(f64::MIN_POSITIVE) {
        return Err(Error::Singular(
            "monitor positions are collinear; the event is unobservable".into(),
        ));
    }
    Ok(())
}

/// Solve the 3×3 normal equations `(JᵀJ + λ·diag(JᵀJ))·δ = −Jᵀf`.
fn damped_step(jac: &[[f64; 3]], res: &[f64], lambda: f64) -> Result<[f64; 3]> {
    let mut jtj = [[0.0; 3]; 3];
    let mut jtf = [0.0; 3];
    for (row, &f) in jac.iter().zip(res) {
        for a in 0..3 {
            for b in 0..3 {
                jtj[a][b] += row[a] * row[b];
            }
            jtf[a] += row[a] * f;
        }
    }
    let a = (0..3)
        .map(|r| {
            (0..3)
                .map(|c| {
                    let damp = if r == c { lambda * jtj[r][r].max(f64::MIN_POSITIVE) } else { 0.0 };
                    Complex64::new(jtj[r][c] + damp, 0.0)
                })
                .collect()
        })
        .collect();
    let b = jtf.iter().map(|&v| Complex64::new(-v, 0.0)).collect();
    let delta = linalg::solve(a, b)?;
    Ok([delta[0].re, delta[1].re, delta[2].re])
}

/// Locate the event behind a set of arrival records.
///
/// Minimizes the squared residuals by damped Gauss–Newton on scaled
/// variables. `init` seeds the iteration; by default it starts at the
/// earliest-arrival monitor with the origin time backed off by a tenth of
/// the arrival spread. Running out of iterations is not an error — the
/// best iterate comes back with `converged = false`.
pub fn locate_event(
    records: &[MmrRecord],
    v_e_mi_s: f64,
    init: Option<(f64, f64, f64)>,
) -> Result<EventSolution> {
    let problem = ScaledProblem::new(records, v_e_mi_s)?;

    let starts = match init {
        Some((x, y, t)) => {
            if ![x, y, t].iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidInput("initial guess must be finite".into()));
            }
            vec![problem.scale_point(x, y, t)]
        }
        None => {
            let first = records
                .iter()
                .min_by(|a, b| a.t_arrival_s.total_cmp(&b.t_arrival_s))
                .expect("validated non-empty");
            let (t_min, t_max) = min_max(records.iter().map(|r| r.t_arrival_s));
            let span = t_max - t_min;
            // A zero spread gives no time scale to back off by; fall back
            // to a tenth of the diagonal's travel time.
            let slack = if span > 0.0 { 0.1 * span } else { 0.1 * problem.diag / v_e_mi_s };
            let mut starts =
                vec![problem.scale_point(first.x_miles, first.y_miles, t_min - slack)];
            // The squared-residual surface has spurious stationary points;
            // the closed-form start lands in the right basin and the
            // lowest-cost finish wins.
            starts.extend(problem.linear_init());
            starts
        }
    };

    let best = starts
        .into_iter()
        .map(|u0| run_gauss_newton(&problem, u0))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
        .expect("at least one start");

    let (x_e, y_e, t_e) = problem.unscale(best.u);
    let n = records.len() as f64;
    let residual_norm = problem.diag.powi(2) * (best.cost / n).sqrt();
    Ok(EventSolution {
        x_e_miles: x_e,
        y_e_miles: y_e,
        t_e_s: t_e,
        residual_norm,
        iterations: best.iterations,
        converged: best.converged,
    })
}

struct GnRun {
    u: [f64; 3],
    cost: f64,
    iterations: usize,
    converged: bool,
}

fn run_gauss_newton(problem: &ScaledProblem, mut u: [f64; 3]) -> Result<GnRun> {
    let mut cost = problem.cost(u);
    let mut lambda = INITIAL_DAMPING;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let jac = problem.jacobian(u);
        let res = problem.residuals(u);
        let delta = damped_step(&jac, &res, lambda)?;
        iterations += 1;
        let candidate = [u[0] + delta[0], u[1] + delta[1], u[2] + delta[2]];
        let candidate_cost = problem.cost(candidate);
        if candidate_cost < cost {
            u = candidate;
            cost = candidate_cost;
            lambda /= 10.0;
            let step = (delta[0].powi(2) + delta[1].powi(2) + delta[2].powi(2)).sqrt();
            if step < STEP_TOLERANCE {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > DAMPING_CEILING {
                // The damped step has shrunk to nothing; we are at a
                // stationary point up to rounding.
                converged = true;
                break;
            }
        }
    }
    Ok(GnRun { u, cost, iterations, converged })
}
