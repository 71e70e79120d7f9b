//! Sublinear primal-dual solver for `min_{x ∈ C} max_j (v' + v_j)ᵀx` over the
//! scaled cube `C = [-1/√n, 1/√n]^n`.
//!
//! The primal player runs projected online gradient descent on `C`. The dual
//! player keeps multiplicative weights over the `m` constraints in a
//! [`WeightTree`] and only touches the constraints that share a nonzero with
//! the sampled coordinate, so one iteration costs `O(n + k log m)`.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::dot;
use crate::rng::SeededRng;
use crate::sampling_tree::WeightTree;

/// Largest squared norm accepted before sampling from `Dist(x, ℓ₂)`.
const NORM_SLACK: f64 = 1e-9;

pub fn clip(z: f64, c: f64) -> f64 {
    debug_assert!(c > 0.0);
    z.clamp(-c, c)
}

/// Samples `i` with probability `x_i²`, or `None` with probability `1 - ‖x‖²`.
pub fn dist_sample(x: &[f64], rng: &mut SeededRng) -> Result<Option<usize>> {
    dist_sample_truncated(x, 0.0, rng)
}

/// As [`dist_sample`], but coordinates with `|x_i| < floor` are never drawn;
/// their mass goes to `None`.
pub fn dist_sample_truncated(x: &[f64], floor: f64, rng: &mut SeededRng) -> Result<Option<usize>> {
    let mass: f64 = x.iter().map(|v| v * v).sum();
    if mass > 1.0 + NORM_SLACK {
        return Err(Error::NormExceeded(mass));
    }
    let u = rng.uniform() * mass.max(1.0);
    let mut acc = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        if xi.abs() < floor || xi == 0.0 {
            continue;
        }
        acc += xi * xi;
        if u < acc {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Unbiased single-sample estimate of `vᵀx` with variance at most 1.
pub fn estimate(x: &[f64], v: &[f64], rng: &mut SeededRng) -> Result<f64> {
    crate::matrix::check_len(v.len(), x.len())?;
    Ok(match dist_sample(x, rng)? {
        Some(i) => v[i] / x[i],
        None => 0.0,
    })
}

/// One projected gradient step onto the scaled cube.
pub fn lra_step(x_prev: &[f64], v: &[f64], eta: f64) -> Vec<f64> {
    let mut x = x_prev.to_vec();
    lra_step_in_place(&mut x, v, eta);
    x
}

pub fn lra_step_in_place(x: &mut [f64], v: &[f64], eta: f64) {
    assert_eq!(x.len(), v.len());
    let r = (x.len() as f64).sqrt().recip();
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi = (*xi - eta * vi).clamp(-r, r);
    }
}

/// Implicit access to the constraint vectors `v_1, …, v_m ∈ R^n`.
///
/// Implementors guarantee `‖v_j‖₂ ≤ 1/2`.
pub trait ConstraintAccessor {
    /// Ambient dimension `n`.
    fn dim(&self) -> usize;
    /// Number of constraints `m`.
    fn count(&self) -> usize;
    /// Bound on the number of constraints touching any one coordinate.
    fn max_hits(&self) -> usize;
    /// `out += scale · v_j`.
    fn add_row(&self, j: usize, scale: f64, out: &mut [f64]);
    /// Replaces `out` with the pairs `(j, v_j[i])` for every `v_j[i] ≠ 0`.
    fn column_hits(&self, i: usize, out: &mut Vec<(usize, f64)>);

    fn row_values(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.add_row(j, 1.0, &mut out);
        out
    }

    fn row_dot(&self, j: usize, x: &[f64]) -> f64 {
        dot(&self.row_values(j), x)
    }

    /// `max_j v_jᵀx`, or `-∞` when there are no constraints.
    fn max_row_dot(&self, x: &[f64]) -> f64 {
        (0..self.count())
            .map(|j| self.row_dot(j, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Explicitly stored constraint rows.
#[derive(Clone, Debug)]
pub struct DenseAccessor {
    n: usize,
    rows: Vec<Vec<f64>>,
    cols: Vec<Vec<(usize, f64)>>,
}

impl DenseAccessor {
    pub fn new(n: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); n];
        for (j, row) in rows.iter().enumerate() {
            crate::matrix::check_len(n, row.len())?;
            let norm = crate::matrix::norm2(row);
            if norm > 0.5 + NORM_SLACK {
                return Err(Error::NormViolation(norm));
            }
            for (i, &value) in row.iter().enumerate() {
                if value != 0.0 {
                    cols[i].push((j, value));
                }
            }
        }
        Ok(Self { n, rows, cols })
    }
}

impl ConstraintAccessor for DenseAccessor {
    fn dim(&self) -> usize {
        self.n
    }

    fn count(&self) -> usize {
        self.rows.len()
    }

    fn max_hits(&self) -> usize {
        self.cols.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn add_row(&self, j: usize, scale: f64, out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(&self.rows[j]) {
            *o += scale * v;
        }
    }

    fn column_hits(&self, i: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        out.extend_from_slice(&self.cols[i]);
    }

    fn row_dot(&self, j: usize, x: &[f64]) -> f64 {
        dot(&self.rows[j], x)
    }
}

/// `max_j (v' + v_j)ᵀx`.
pub fn minimax_objective<A: ConstraintAccessor + ?Sized>(v_prime: &[f64], acc: &A, x: &[f64]) -> f64 {
    dot(v_prime, x) + acc.max_row_dot(x)
}

/// Iteration count and step sizes of one solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub iterations: usize,
    /// Dual (weight) step.
    pub eta: f64,
    /// Primal (gradient) step `√(2/T)`.
    pub eta_x: f64,
}

impl Schedule {
    /// `T = multiplier · L(m)/ε²` capped at `minimax_max_iters`, and
    /// `η = √(L(m)/T) / minimax_eta_divisor`.
    pub fn new(m: usize, eps: f64, cfg: &SolverConfig) -> Self {
        let log_m = cfg.log(m as f64);
        let t = (cfg.minimax_iter_multiplier as f64 * log_m / (eps * eps)).ceil();
        let iterations = (t as usize).clamp(1, cfg.minimax_max_iters);
        let t = iterations as f64;
        Self {
            iterations,
            eta: (log_m / t).sqrt() / cfg.minimax_eta_divisor,
            eta_x: (2.0 / t).sqrt(),
        }
    }
}

/// What one iteration observed, kept for inspection.
#[derive(Clone, Debug, Default)]
pub struct StepRecord {
    pub tau: Option<usize>,
    pub s: usize,
    /// Clipped estimate of `v'ᵀx_{t-1}`; shared by every constraint not in `hits`.
    pub v_star: f64,
    /// `(j, clipped estimate of (v' + v_j)ᵀx_{t-1})` for the constraints touching `tau`.
    pub hits: Vec<(usize, f64)>,
}

/// State of one run, advanced by [`MinimaxState::step`].
pub struct MinimaxState<'a, A: ConstraintAccessor + ?Sized> {
    acc: &'a A,
    v_prime: &'a [f64],
    schedule: Schedule,
    floor: f64,
    t: usize,
    x: Vec<f64>,
    running_sum: Vec<f64>,
    weights: WeightTree,
    direction: Vec<f64>,
    column: Vec<(usize, f64)>,
    updates: Vec<(usize, f64)>,
    record: StepRecord,
}

/// Quadratic surrogate `1 + ηv + η²v²` of `exp(ηv)`.
fn surrogate(eta: f64, v: f64) -> f64 {
    let f = 1.0 + eta * v + eta * eta * v * v;
    assert!((0.25..=3.0).contains(&f), "multiplier {f} out of range");
    f
}

impl<'a, A: ConstraintAccessor + ?Sized> MinimaxState<'a, A> {
    pub fn new(v_prime: &'a [f64], acc: &'a A, eps: f64, cfg: &SolverConfig) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidEpsilon(eps));
        }
        let n = acc.dim();
        crate::matrix::check_len(n, v_prime.len())?;
        let norm = crate::matrix::norm2(v_prime);
        if norm > 0.5 + NORM_SLACK {
            return Err(Error::NormViolation(norm));
        }
        let m = acc.count();
        let schedule = Schedule::new(m, eps, cfg);
        Ok(Self {
            acc,
            v_prime,
            schedule,
            floor: 1e-9 * eps / n.max(1) as f64,
            t: 0,
            x: vec![0.0; n],
            running_sum: vec![0.0; n],
            weights: WeightTree::uniform(m)?,
            direction: vec![0.0; n],
            column: Vec::with_capacity(acc.max_hits()),
            updates: Vec::with_capacity(acc.max_hits()),
            record: StepRecord::default(),
        })
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.t >= self.schedule.iterations
    }

    /// Current primal iterate `x_t`.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn running_sum(&self) -> &[f64] {
        &self.running_sum
    }

    pub fn weights(&self) -> &WeightTree {
        &self.weights
    }

    pub fn last_step(&self) -> &StepRecord {
        &self.record
    }

    pub fn step(&mut self, rng: &mut SeededRng) -> Result<()> {
        let eta = self.schedule.eta;
        let cap = eta.recip();
        let tau = dist_sample_truncated(&self.x, self.floor, rng)?;
        let s = self.weights.sample(rng)?;

        self.record.tau = tau;
        self.record.s = s;
        self.record.hits.clear();
        if let Some(i) = tau {
            let xi = self.x[i];
            assert!(xi != 0.0);
            let base = self.v_prime[i];
            let v_star = clip(base / xi, cap);
            let denominator = surrogate(eta, v_star);
            self.record.v_star = v_star;
            self.acc.column_hits(i, &mut self.column);
            self.updates.clear();
            for &(j, value) in &self.column {
                let vj = clip((base + value) / xi, cap);
                self.record.hits.push((j, vj));
                self.updates.push((j, surrogate(eta, vj) / denominator));
            }
            self.weights.mult_many(&self.updates)?;
        }

        self.direction.copy_from_slice(self.v_prime);
        self.acc.add_row(s, 1.0, &mut self.direction);
        lra_step_in_place(&mut self.x, &self.direction, self.schedule.eta_x);
        for (acc, xi) in self.running_sum.iter_mut().zip(&self.x) {
            *acc += xi;
        }
        self.t += 1;
        Ok(())
    }

    /// Average iterate, clamped to the scaled cube against rounding.
    pub fn average(&self) -> Vec<f64> {
        let n = self.x.len();
        let r = (n as f64).sqrt().recip();
        let t = self.t.max(1) as f64;
        self.running_sum.iter().map(|s| (s / t).clamp(-r, r)).collect()
    }
}

/// Approximately solves `min_{x ∈ C} max_j (v' + v_j)ᵀx` to additive `eps`.
pub fn optimize<A: ConstraintAccessor + ?Sized>(
    v_prime: &[f64],
    acc: &A,
    eps: f64,
    cfg: &SolverConfig,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let mut state = MinimaxState::new(v_prime, acc, eps, cfg)?;
    while !state.is_done() {
        state.step(rng)?;
    }
    Ok(state.average())
}
