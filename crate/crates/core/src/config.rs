//! Solver constants.
//!
//! The guarantees the pipeline is built on are asymptotic, with unnamed
//! absolute constants. Every such constant is a field here. Fields marked
//! "asymptotic schedule when `None`" fall back to the textbook formula, which
//! is only practical for very large `n`. [`SolverConfig::desk`] holds values
//! calibrated for instances with a few hundred columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub seed: u64,
    /// Base constant for the Γ radius: `C_Alg ~ Unif([c0, 2·c0])`.
    pub c0: f64,
    /// Target constant `K` in `‖Av‖_∞ ≤ K·√(n·log(m/n + 2))`.
    pub spencer_constant: f64,
    pub mwu_iter_multiplier: u32,
    pub minimax_iter_multiplier: u32,
    /// Retries for every randomized phase before giving up.
    pub retry_count: u32,
    /// Binary-search resolution on Λ, in units of `√n / L(n)⁴`.
    pub lambda_tolerance: f64,
    /// Floor applied to every natural logarithm, `L(x) = max(ln x, floor)`.
    pub log_clamp_floor: f64,
    /// A partial coloring must fix at least `n / partial_fraction_divisor`
    /// coordinates.
    pub partial_fraction_divisor: f64,
    /// Threshold multiplier of the self-balancing walk.
    pub walk_threshold_multiplier: f64,
    /// Penalty weight δ of the regularized oracle; asymptotic schedule
    /// `1/L(n)⁴` when `None`. Always clamped to `[1/L(n)⁴, 0.999]`.
    pub oracle_delta: Option<f64>,
    /// Additive accuracy of the minimax solve in units of `√n`; asymptotic
    /// schedule `1/L(n)⁴` when `None`.
    pub oracle_accuracy: Option<f64>,
    /// Violation tolerated on the averaged MWU point, in units of `√n`;
    /// asymptotic schedule `1/L(n)³` when `None`.
    pub mwu_accuracy: Option<f64>,
    /// Divisor in the weight step `η = √(log m / T) / divisor`.
    pub minimax_eta_divisor: f64,
    /// Cap on the normalized accuracy handed to one minimax solve.
    pub minimax_max_eps: f64,
    pub mwu_min_iters: usize,
    pub mwu_max_iters: usize,
    pub minimax_max_iters: usize,
    /// Re-runs of an infeasible binary-search probe before accepting it.
    pub probe_retries: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            c0: 2.0,
            spencer_constant: 4.0,
            mwu_iter_multiplier: 1,
            minimax_iter_multiplier: 1,
            retry_count: 8,
            lambda_tolerance: 1.0,
            log_clamp_floor: 2.0,
            partial_fraction_divisor: 8.0,
            walk_threshold_multiplier: 2.0,
            oracle_delta: None,
            oracle_accuracy: None,
            mwu_accuracy: None,
            minimax_eta_divisor: 100.0,
            minimax_max_eps: 0.1,
            mwu_min_iters: 16,
            mwu_max_iters: 1_000_000,
            minimax_max_iters: 10_000_000,
            probe_retries: 0,
        }
    }
}

impl SolverConfig {
    /// Constants calibrated on random set systems with up to a few hundred
    /// columns. The textbook schedules behind [`Default`] are sound but far
    /// too slow at that size.
    pub fn desk() -> Self {
        Self {
            c0: 0.65,
            lambda_tolerance: 32.0,
            oracle_accuracy: Some(0.5),
            mwu_accuracy: Some(0.05),
            minimax_eta_divisor: 1.0,
            mwu_max_iters: 64,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.c0 > 0.0) {
            return bad("c0 must be positive");
        }
        if !(self.spencer_constant > 0.0) {
            return bad("spencer_constant must be positive");
        }
        if self.mwu_iter_multiplier < 1 || self.minimax_iter_multiplier < 1 {
            return bad("iteration multipliers must be at least 1");
        }
        if !(self.lambda_tolerance > 0.0) {
            return bad("lambda_tolerance must be positive");
        }
        if !(self.log_clamp_floor > 0.0) {
            return bad("log_clamp_floor must be positive");
        }
        if !(self.partial_fraction_divisor >= 1.0) {
            return bad("partial_fraction_divisor must be at least 1");
        }
        if !(self.walk_threshold_multiplier > 0.0) {
            return bad("walk_threshold_multiplier must be positive");
        }
        if let Some(d) = self.oracle_delta {
            if !(d > 0.0 && d < 1.0) {
                return bad("oracle_delta must lie in (0, 1)");
            }
        }
        if let Some(a) = self.oracle_accuracy {
            if !(a > 0.0) {
                return bad("oracle_accuracy must be positive");
            }
        }
        if let Some(a) = self.mwu_accuracy {
            if !(a > 0.0) {
                return bad("mwu_accuracy must be positive");
            }
        }
        if !(self.minimax_max_eps > 0.0 && self.minimax_max_eps < 1.0) {
            return bad("minimax_max_eps must lie in (0, 1)");
        }
        if !(self.minimax_eta_divisor > 0.0) {
            return bad("minimax_eta_divisor must be positive");
        }
        if self.mwu_min_iters < 1 || self.mwu_max_iters < self.mwu_min_iters || self.minimax_max_iters < 1 {
            return bad("iteration caps are inconsistent");
        }
        Ok(())
    }

    /// `L(x) = max(ln x, log_clamp_floor)`.
    pub fn log(&self, x: f64) -> f64 {
        x.ln().max(self.log_clamp_floor)
    }

    /// Penalty weight δ for an instance with `n` columns.
    pub fn delta(&self, n: usize) -> f64 {
        let floor = self.log(n as f64).powi(4).recip();
        self.oracle_delta.unwrap_or(floor).clamp(floor, 0.999)
    }

    /// Additive accuracy of one oracle call, in units of `√n`.
    pub fn accuracy(&self, n: usize) -> f64 {
        self.oracle_accuracy
            .unwrap_or_else(|| self.log(n as f64).powi(4).recip())
    }

    /// Violation tolerated on the averaged MWU point, in units of `√n`.
    pub fn mwu_accuracy(&self, n: usize) -> f64 {
        self.mwu_accuracy
            .unwrap_or_else(|| self.log(n as f64).powi(3).recip())
    }

    /// Radius `C·√(n·ln(m/n + 2))` of Γ.
    pub fn gamma_radius(c: f64, m: usize, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let n = n as f64;
        c * (n * (m as f64 / n + 2.0).ln()).sqrt()
    }

    /// The acceptance bound `spencer_constant·√(n·ln(m/n + 2))`.
    pub fn spencer_bound(&self, m: usize, n: usize) -> f64 {
        Self::gamma_radius(self.spencer_constant, m, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamped_log() {
        let cfg = SolverConfig::default();
        assert_eq!(cfg.log(2.0), 2.0);
        assert!((cfg.log(1e4) - 1e4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn delta_is_clamped_to_the_asymptotic_floor() {
        let mut cfg = SolverConfig::default();
        assert_eq!(cfg.delta(4), 1.0 / 16.0);
        cfg.oracle_delta = Some(1e-9);
        assert_eq!(cfg.delta(4), 1.0 / 16.0);
        cfg.oracle_delta = Some(0.5);
        assert_eq!(cfg.delta(4), 0.5);
    }

    #[test]
    fn validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let cfg = SolverConfig {
            c0: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig {
            mwu_iter_multiplier: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn json_overrides_are_partial() {
        let cfg: SolverConfig = serde_json::from_str(r#"{"c0": 3.5, "seed": 9}"#).unwrap();
        assert_eq!(cfg.c0, 3.5);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.retry_count, SolverConfig::default().retry_count);
        assert!(serde_json::from_str::<SolverConfig>(r#"{"nope": 1}"#).is_err());
    }
}
