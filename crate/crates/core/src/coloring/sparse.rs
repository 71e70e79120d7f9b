use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::SetSystemMatrix;
use crate::minimax::clip;
use crate::rng::SeededRng;

/// Result of one accepted walk.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkOutcome {
    pub signs: Vec<f64>,
    /// Largest `|⟨w, a_i⟩|` seen, in units of the normalized columns.
    pub max_correlation: f64,
    pub threshold: f64,
    pub restarts: u32,
}

/// Walk threshold `c = multiplier · ln(max(m,2)·max(n,2))`.
pub fn walk_threshold(m: usize, n: usize, cfg: &SolverConfig) -> f64 {
    cfg.walk_threshold_multiplier * ((m.max(2) * n.max(2)) as f64).ln()
}

/// Online self-balancing walk over the columns of `A`.
///
/// Each column, scaled so the largest column has unit ℓ₂ norm, receives the
/// sign that pushes the running sum `w` back toward zero with probability
/// `(1 + |⟨w, a_i⟩|/c)/2`. A run in which some `|⟨w, a_i⟩|` exceeds `c` is
/// restarted from scratch.
pub fn sparse_coloring(a: &SetSystemMatrix, cfg: &SolverConfig, rng: &mut SeededRng) -> Result<WalkOutcome> {
    let (m, n) = (a.rows(), a.cols());
    let norm = a.stats().one_to_two;
    let threshold = walk_threshold(m, n, cfg);
    if norm == 0.0 {
        return Ok(WalkOutcome {
            signs: vec![1.0; n],
            max_correlation: 0.0,
            threshold,
            restarts: 0,
        });
    }
    let scale = norm.recip();
    let mut w = vec![0.0; m];
    let mut last = (0.0, threshold);
    for restarts in 0..=cfg.retry_count {
        w.iter_mut().for_each(|x| *x = 0.0);
        let mut signs = Vec::with_capacity(n);
        let mut max_correlation: f64 = 0.0;
        let mut overflow = false;
        for i in 0..n {
            let (rows, vals) = a.col(i);
            let p: f64 = rows.iter().zip(vals).map(|(&r, &x)| w[r] * x).sum::<f64>() * scale;
            max_correlation = max_correlation.max(p.abs());
            if p.abs() > threshold {
                last = (p.abs(), threshold);
                overflow = true;
                break;
            }
            let minus = (1.0 + clip(p, threshold) / threshold) / 2.0;
            let s = if rng.bernoulli(minus) { -1.0 } else { 1.0 };
            for (&r, &x) in rows.iter().zip(vals) {
                w[r] += s * x * scale;
            }
            signs.push(s);
        }
        if !overflow {
            return Ok(WalkOutcome {
                signs,
                max_correlation,
                threshold,
                restarts,
            });
        }
    }
    Err(Error::WalkOverflow {
        value: last.0,
        threshold: last.1,
    })
}
