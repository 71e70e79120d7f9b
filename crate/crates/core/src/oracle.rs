//! Width-reduced oracle for the MWU feasibility loop.
//!
//! Given expert weights `ρ = (ρ₀, ρ₊, ρ₋)` it approximately minimizes the
//! penalized objective
//!
//! ```text
//! F(x) = -ρ₀ vᵀx/√n + (ρ₊ - ρ₋)ᵀAx + δ‖Ax‖_∞   over x ∈ [-1, 1]^n
//! ```
//!
//! by casting it as a minimax problem over the scaled cube, then either
//! returns a point of bounded width or certifies that the level `Λ` is out of
//! reach.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::{dot, inf_norm, norm1, norm2, SetSystemMatrix};
use crate::minimax::{self, ConstraintAccessor};
use crate::rng::SeededRng;

const WEIGHT_SLACK: f64 = 1e-9;

/// Normalized expert weights: `ρ₀` for the objective, `ρ₊`/`ρ₋` for the upper
/// and lower row constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct MwuWeights {
    pub rho0: f64,
    pub rho_plus: Vec<f64>,
    pub rho_minus: Vec<f64>,
}

impl MwuWeights {
    /// All mass on the objective.
    pub fn objective_only(m: usize) -> Self {
        Self {
            rho0: 1.0,
            rho_plus: vec![0.0; m],
            rho_minus: vec![0.0; m],
        }
    }

    /// Splits a distribution over `2m + 1` experts laid out as
    /// `[objective, upper_0..upper_m, lower_0..lower_m]`.
    pub fn from_distribution(p: &[f64]) -> Self {
        assert!(p.len() % 2 == 1, "expert count must be odd");
        let m = p.len() / 2;
        Self {
            rho0: p[0],
            rho_plus: p[1..=m].to_vec(),
            rho_minus: p[m + 1..].to_vec(),
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        crate::matrix::check_len(m, self.rho_plus.len())?;
        crate::matrix::check_len(m, self.rho_minus.len())?;
        let all = std::iter::once(&self.rho0)
            .chain(&self.rho_plus)
            .chain(&self.rho_minus);
        let mut total = 0.0;
        for &w in all {
            if !(w >= 0.0) {
                return Err(Error::WeightInvariantViolation(w));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SLACK {
            return Err(Error::WeightInvariantViolation(total));
        }
        Ok(())
    }

    /// `‖ρ₊‖₁ + ‖ρ₋‖₁`.
    pub fn row_mass(&self) -> f64 {
        norm1(&self.rho_plus) + norm1(&self.rho_minus)
    }

    fn row_difference(&self) -> Vec<f64> {
        self.rho_plus
            .iter()
            .zip(&self.rho_minus)
            .map(|(p, q)| p - q)
            .collect()
    }
}

/// `-ρ₀ vᵀx/√n + (ρ₊ - ρ₋)ᵀAx` given `Ax`.
fn linear_part(w: &MwuWeights, v: &[f64], x: &[f64], ax: &[f64]) -> f64 {
    let root = (x.len() as f64).sqrt();
    let rows: f64 = ax
        .iter()
        .zip(w.rho_plus.iter().zip(&w.rho_minus))
        .map(|(a, (p, q))| (p - q) * a)
        .sum();
    -w.rho0 * dot(v, x) / root + rows
}

/// The penalized objective `F(x)`.
pub fn eval_penalized(a: &SetSystemMatrix, w: &MwuWeights, v: &[f64], delta: f64, x: &[f64]) -> Result<f64> {
    crate::matrix::check_len(a.cols(), v.len())?;
    crate::matrix::check_len(a.rows(), w.rho_plus.len())?;
    crate::matrix::check_len(a.rows(), w.rho_minus.len())?;
    let ax = a.mat_vec(x)?;
    Ok(linear_part(w, v, x, &ax) + delta * inf_norm(&ax))
}

/// Constraint rows `±(δ/D)·A_r` read straight from the sparse storage.
///
/// Row `r` of `A` yields constraint `r` with a plus sign and constraint
/// `m + r` with a minus sign.
#[derive(Clone, Debug)]
pub struct ReductionAccessor<'a> {
    a: &'a SetSystemMatrix,
    scale: f64,
    max_hits: usize,
}

impl<'a> ReductionAccessor<'a> {
    pub fn new(a: &'a SetSystemMatrix, scale: f64) -> Self {
        let max_hits = 2 * (0..a.cols()).map(|c| a.col_support(c)).max().unwrap_or(0);
        Self { a, scale, max_hits }
    }

    fn split(&self, j: usize) -> (usize, f64) {
        let m = self.a.rows();
        if j < m {
            (j, self.scale)
        } else {
            (j - m, -self.scale)
        }
    }
}

impl ConstraintAccessor for ReductionAccessor<'_> {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn count(&self) -> usize {
        2 * self.a.rows()
    }

    fn max_hits(&self) -> usize {
        self.max_hits
    }

    fn add_row(&self, j: usize, scale: f64, out: &mut [f64]) {
        let (r, s) = self.split(j);
        let (cols, vals) = self.a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            out[c] += scale * s * v;
        }
    }

    fn column_hits(&self, i: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let m = self.a.rows();
        let (rows, vals) = self.a.col(i);
        for (&r, &v) in rows.iter().zip(vals) {
            out.push((r, self.scale * v));
            out.push((m + r, -self.scale * v));
        }
    }

    fn row_dot(&self, j: usize, x: &[f64]) -> f64 {
        let (r, s) = self.split(j);
        let (cols, vals) = self.a.row(r);
        s * cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum::<f64>()
    }

    fn max_row_dot(&self, x: &[f64]) -> f64 {
        if self.a.rows() == 0 {
            return f64::NEG_INFINITY;
        }
        self.scale.abs() * inf_norm(&self.a.mat_vec(x).expect("dimension checked by caller"))
    }
}

/// The minimax instance equivalent to minimizing `F`.
///
/// For `x' ∈ [-1/√n, 1/√n]^n` and `x = √n·x'`,
/// `max_j (v' + v_j)ᵀx' = F(x) / (denominator·√n)`.
#[derive(Clone, Debug)]
pub struct Reduction<'a> {
    pub v_prime: Vec<f64>,
    pub accessor: ReductionAccessor<'a>,
    pub denominator: f64,
}

/// Builds the minimax instance. The denominator is the smallest value keeping
/// `‖v'‖₂ ≤ 1/2` and every `‖v_j‖₂ ≤ 1/2`, namely `2·max(‖u‖₂, δ·max_r ‖A_r‖₂)`
/// with `u = -ρ₀v/√n + Aᵀ(ρ₊ - ρ₋)`, or 1 when both vanish.
pub fn build_reduction<'a>(
    a: &'a SetSystemMatrix,
    w: &MwuWeights,
    v: &[f64],
    delta: f64,
) -> Result<Reduction<'a>> {
    let n = a.cols();
    crate::matrix::check_len(n, v.len())?;
    w.validate(a.rows())?;
    let root = (n as f64).sqrt();
    let mut u = a.mat_transpose_vec(&w.row_difference())?;
    for (ui, vi) in u.iter_mut().zip(v) {
        *ui -= w.rho0 * vi / root;
    }
    let max_row = (0..a.rows()).map(|r| a.row_norm2(r)).fold(0.0, f64::max);
    let floor = delta * max_row;
    let denominator = match 2.0 * floor.max(norm2(&u)) {
        d if d > 0.0 => d,
        _ => 1.0,
    };
    let v_prime: Vec<f64> = u.iter().map(|x| x / denominator).collect();
    let norm = norm2(&v_prime);
    if norm > 0.5 + WEIGHT_SLACK {
        return Err(Error::NormViolation(norm));
    }
    Ok(Reduction {
        v_prime,
        accessor: ReductionAccessor::new(a, delta / denominator),
        denominator,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleOutcome {
    /// A point of the cube with `width = ‖Ax‖_∞` and `lhs_value` the linear
    /// part `-ρ₀ vᵀx/√n + (ρ₊ - ρ₋)ᵀAx`.
    Point { x: Vec<f64>, width: f64, lhs_value: f64 },
    /// The linear part exceeded the feasibility threshold by this much.
    Infeasible(f64),
}

/// Thresholds and tolerances used by one oracle call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleParams {
    pub delta: f64,
    /// Additive error allowed on `F`.
    pub accuracy: f64,
}

impl OracleParams {
    pub fn new(n: usize, cfg: &SolverConfig) -> Self {
        Self {
            delta: cfg.delta(n),
            accuracy: cfg.accuracy(n) * (n as f64).sqrt(),
        }
    }

    /// Largest `‖Ax‖_∞` of any returned point.
    pub fn width_bound(&self, n: usize) -> f64 {
        10.0 * (n as f64).sqrt() / self.delta
    }
}

/// One width-reduced oracle call for level `lambda` and radius constant `c`.
///
/// Rounds whose post-processed point misses the contract are retried with a
/// fresh stream up to `cfg.retry_count` times.
pub fn regularized_solve(
    a: &SetSystemMatrix,
    w: &MwuWeights,
    v: &[f64],
    lambda: f64,
    c: f64,
    cfg: &SolverConfig,
    rng: &mut SeededRng,
) -> Result<OracleOutcome> {
    let n = a.cols();
    let params = OracleParams::new(n, cfg);
    let reduction = build_reduction(a, w, v, params.delta)?;
    let root = (n as f64).sqrt();
    let radius = SolverConfig::gamma_radius(c, a.rows(), n);
    let base = -w.rho0 * lambda + w.row_mass() * radius;

    // The minimax error ε translates to ε·D·√n on F.
    let eps = (params.accuracy / (reduction.denominator * root)).min(cfg.minimax_max_eps);
    let f_error = eps * reduction.denominator * root;
    let case_two_threshold = base + params.delta * radius + f_error;

    for _ in 0..=cfg.retry_count {
        let scaled = minimax::optimize(&reduction.v_prime, &reduction.accessor, eps, cfg, rng)?;
        let x: Vec<f64> = scaled.iter().map(|xi| (xi * root).clamp(-1.0, 1.0)).collect();
        let ax = a.mat_vec(&x)?;
        let width = inf_norm(&ax);
        let tau = params.delta * width;
        let lhs = linear_part(w, v, &x, &ax);

        if tau >= 10.0 * root {
            let factor = 10.0 * root / tau;
            let y: Vec<f64> = x.iter().map(|xi| xi * factor).collect();
            let lhs_y = lhs * factor;
            if lhs_y <= base {
                let width = inf_norm(&a.mat_vec(&y)?);
                assert!(width <= params.width_bound(n) * (1.0 + 1e-9));
                return Ok(OracleOutcome::Point {
                    x: y,
                    width,
                    lhs_value: lhs_y,
                });
            }
            // The minimax solve missed its accuracy; try again.
            continue;
        }

        return Ok(if lhs <= case_two_threshold {
            OracleOutcome::Point {
                x,
                width,
                lhs_value: lhs,
            }
        } else {
            OracleOutcome::Infeasible(lhs - case_two_threshold)
        });
    }
    Err(Error::OracleFailureBudgetExceeded(cfg.retry_count as usize + 1))
}
