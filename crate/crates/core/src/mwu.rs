//! Approximate maximization of `⟨v, x⟩` over
//! `Γ_{A,C} = {‖x‖_∞ ≤ 1, ‖Ax‖_∞ ≤ C√(n·ln(m/n + 2))}`.
//!
//! A Hedge loop over `2m + 1` experts (the objective and both sides of every
//! row) decides feasibility of one level `Λ`; bisection on `Λ` finds the best
//! level; the averaged point is shrunk into `Γ`.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::{dot, inf_norm, norm1, norm2, SetSystemMatrix};
use crate::oracle::{regularized_solve, MwuWeights, OracleOutcome, OracleParams};
use crate::rng::SeededRng;
use crate::sampling_tree::WeightTree;

/// Largest accepted `|m_j|` after rounding.
const WIDTH_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    /// Average of the oracle points; meets all three blocks up to `eps`.
    Point(Vec<f64>),
    /// Either an oracle call certified the level out of reach, or the run
    /// ended with an average that misses some block by more than `eps`. The
    /// payload is the excess.
    Infeasible(f64),
}

/// Parameters of one Hedge run at a fixed level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MwuSchedule {
    pub iterations: usize,
    pub eta: f64,
    /// Width `ρ` used to normalize constraint values into `[-1, 1]`.
    pub rho: f64,
    /// Additive accuracy `√n · mwu_accuracy(n)`.
    pub eps: f64,
    /// `C√(n·ln(m/n + 2))`.
    pub radius: f64,
}

impl MwuSchedule {
    pub fn new(a: &SetSystemMatrix, v: &[f64], c: f64, lambda: f64, cfg: &SolverConfig) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let root = (n as f64).sqrt();
        let params = OracleParams::new(n, cfg);
        let radius = SolverConfig::gamma_radius(c, m, n);
        let rho = (params.width_bound(n) + radius).max(lambda + norm2(v));
        let eps = root * cfg.mwu_accuracy(n);
        let experts = (2 * m + 1) as f64;
        let t = (cfg.mwu_iter_multiplier as f64 * rho * rho * experts.ln() / (eps * eps)).ceil();
        let iterations = if t.is_finite() { t as usize } else { usize::MAX }
            .clamp(cfg.mwu_min_iters, cfg.mwu_max_iters);
        Self {
            iterations,
            eta: (experts.ln() / iterations as f64).sqrt().min(0.5),
            rho,
            eps,
            radius,
        }
    }
}

/// Decides whether some `x ∈ [-1,1]^n` has `vᵀx/√n ≥ Λ` and `|Ax| ≤ C_{m,n}`.
///
/// Losses are normalized by the largest slack magnitude observed so far
/// rather than the worst-case width `ρ`, which is asserted as an upper bound.
/// The run stops as soon as the running average meets every block within
/// `eps`.
pub fn mwu_feasibility(
    a: &SetSystemMatrix,
    v: &[f64],
    c: f64,
    lambda: f64,
    cfg: &SolverConfig,
    rng: &mut SeededRng,
) -> Result<Feasibility> {
    let (m, n) = (a.rows(), a.cols());
    crate::matrix::check_len(n, v.len())?;
    let schedule = MwuSchedule::new(a, v, c, lambda, cfg);
    let mut experts = WeightTree::uniform(2 * m + 1)?;
    let mut sum = vec![0.0; n];
    let mut factors = vec![0.0; 2 * m + 1];

    let mut scale = schedule.eps;
    let mut rounds = 0;
    let mut last_violation = f64::INFINITY;
    for _ in 0..schedule.iterations {
        let weights = MwuWeights::from_distribution(&experts.probabilities());
        let x = match regularized_solve(a, &weights, v, lambda, c, cfg, rng)? {
            OracleOutcome::Point { x, .. } => x,
            OracleOutcome::Infeasible(margin) => return Ok(Feasibility::Infeasible(margin)),
        };
        let ax = a.mat_vec(&x)?;
        // Satisfaction slacks: negative means violated, and violated experts gain weight.
        slacks(&mut factors, v, &x, &ax, lambda, schedule.radius);
        let worst = factors.iter().fold(0.0f64, |w, f| w.max(f.abs()));
        assert!(worst <= schedule.rho * (1.0 + WIDTH_SLACK), "oracle point exceeds width: {worst}");
        scale = scale.max(worst);
        for f in factors.iter_mut() {
            *f = (-schedule.eta * *f / scale).exp();
        }
        experts.mult_all(&factors)?;
        for (s, xi) in sum.iter_mut().zip(&x) {
            *s += xi;
        }
        rounds += 1;
        let (avg, violation) = averaged(a, v, &sum, rounds, lambda, schedule.radius, &mut factors)?;
        if violation <= schedule.eps {
            return Ok(Feasibility::Point(avg));
        }
        last_violation = violation;
    }
    Ok(Feasibility::Infeasible(last_violation - schedule.eps))
}

/// Running average of the oracle points and its worst block violation.
fn averaged(
    a: &SetSystemMatrix,
    v: &[f64],
    sum: &[f64],
    rounds: usize,
    lambda: f64,
    radius: f64,
    factors: &mut [f64],
) -> Result<(Vec<f64>, f64)> {
    let x: Vec<f64> = sum.iter().map(|s| (s / rounds as f64).clamp(-1.0, 1.0)).collect();
    slacks(factors, v, &x, &a.mat_vec(&x)?, lambda, radius);
    let violation = -factors.iter().fold(f64::INFINITY, |w, &f| w.min(f));
    Ok((x, violation))
}

/// Constraint slacks laid out as `[objective, upper rows, lower rows]`.
fn slacks(out: &mut [f64], v: &[f64], x: &[f64], ax: &[f64], lambda: f64, radius: f64) {
    let m = ax.len();
    out[0] = dot(v, x) / (x.len() as f64).sqrt() - lambda;
    for (r, &ar) in ax.iter().enumerate() {
        out[1 + r] = radius - ar;
        out[1 + m + r] = radius + ar;
    }
}

/// One bisection probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub lambda: f64,
    pub feasible: bool,
}

/// Whether every feasible probe lies below every infeasible one.
pub fn trace_is_monotone(trace: &[Probe]) -> bool {
    let highest_feasible = trace
        .iter()
        .filter(|p| p.feasible)
        .map(|p| p.lambda)
        .fold(f64::NEG_INFINITY, f64::max);
    trace
        .iter()
        .filter(|p| !p.feasible)
        .all(|p| p.lambda > highest_feasible)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSearch {
    pub lambda: f64,
    pub x: Vec<f64>,
    pub trace: Vec<Probe>,
}

/// Bisection for the largest feasible level in `[0, min(2√n, ‖v‖₁/√n)]`,
/// to resolution `min(lambda_tolerance·√n/L(n)⁴, hi/8)`.
///
/// Level 0 is always feasible with `x = 0`. An infeasible probe is re-run up
/// to `cfg.probe_retries` times before it is accepted.
pub fn binary_search_lambda(
    a: &SetSystemMatrix,
    v: &[f64],
    c: f64,
    cfg: &SolverConfig,
    rng: &mut SeededRng,
) -> Result<LambdaSearch> {
    let n = a.cols();
    crate::matrix::check_len(n, v.len())?;
    let root = (n as f64).sqrt();
    let mut lo = 0.0;
    let mut hi = (2.0 * root).min(norm1(v) / root);
    // Never coarser than an eighth of the bracket, so small blocks still get probed.
    let tolerance = (cfg.lambda_tolerance * root / cfg.log(n as f64).powi(4)).min(hi / 8.0);
    let mut best = vec![0.0; n];
    let mut trace = Vec::new();
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let mut outcome = mwu_feasibility(a, v, c, mid, cfg, rng)?;
        for _ in 0..cfg.probe_retries {
            if matches!(outcome, Feasibility::Point(_)) {
                break;
            }
            outcome = mwu_feasibility(a, v, c, mid, cfg, rng)?;
        }
        match outcome {
            Feasibility::Point(x) => {
                trace.push(Probe { lambda: mid, feasible: true });
                lo = mid;
                best = x;
            }
            Feasibility::Infeasible(_) => {
                trace.push(Probe { lambda: mid, feasible: false });
                hi = mid;
            }
        }
    }
    if !trace_is_monotone(&trace) {
        return Err(Error::FeasibilityLost("non-monotone bisection trace".into()));
    }
    Ok(LambdaSearch {
        lambda: lo,
        x: best,
        trace,
    })
}

/// Diagnostics of one [`solve_with_report`] call.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub z: Vec<f64>,
    pub lambda: f64,
    pub probes: usize,
    /// Extra shrink factor applied when `(1 - 1/L³)·x̄` still left `Γ`.
    pub rescale: f64,
}

/// Near-maximizer of `⟨v, x⟩` over `Γ_{A,C}`; always returns a point of `Γ`.
pub fn solve(a: &SetSystemMatrix, v: &[f64], c: f64, cfg: &SolverConfig, rng: &mut SeededRng) -> Result<Vec<f64>> {
    Ok(solve_with_report(a, v, c, cfg, rng)?.z)
}

pub fn solve_with_report(
    a: &SetSystemMatrix,
    v: &[f64],
    c: f64,
    cfg: &SolverConfig,
    rng: &mut SeededRng,
) -> Result<SolveReport> {
    let (m, n) = (a.rows(), a.cols());
    let search = binary_search_lambda(a, v, c, cfg, rng)?;
    let shrink = 1.0 - cfg.log(n as f64).powi(3).recip();
    let mut z: Vec<f64> = search.x.iter().map(|x| (shrink * x).clamp(-1.0, 1.0)).collect();
    let radius = SolverConfig::gamma_radius(c, m, n);
    let width = inf_norm(&a.mat_vec(&z)?);
    let mut rescale = 1.0;
    if width > radius {
        rescale = radius / width * (1.0 - 1e-12);
        for zi in z.iter_mut() {
            *zi *= rescale;
        }
    }
    let width = inf_norm(&a.mat_vec(&z)?);
    if width > radius || z.iter().any(|zi| zi.abs() > 1.0) {
        return Err(Error::FeasibilityLost(format!("‖Az‖ = {width} > {radius}")));
    }
    Ok(SolveReport {
        z,
        lambda: search.lambda,
        probes: search.trace.len(),
        rescale,
    })
}
