//! Full and partial colorings of set systems.

mod dense;
mod partial;
mod random;
mod sparse;
mod trace;

pub use dense::{dense_coloring, phase_cap};
pub use partial::{heavy_columns, partial_coloring, PartialColoring};
pub use random::{random_coloring_checked, random_signs, round_unbiased};
pub use sparse::{sparse_coloring, walk_threshold, WalkOutcome};
pub use trace::{PhaseRecord, PipelineTrace};

use std::str::FromStr;

use serde::Serialize;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::SetSystemMatrix;
use crate::rng::SeededRng;
use trace::Timer;

/// Which algorithm to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Dispatch on the shape of `A`.
    Auto,
    Dense,
    Sparse,
    Random,
    /// A single partial coloring with `Λ = I`.
    Partial,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Mode::Auto),
            "dense" => Ok(Mode::Dense),
            "sparse" => Ok(Mode::Sparse),
            "random" => Ok(Mode::Random),
            "partial" => Ok(Mode::Partial),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

/// Which branch [`coloring`] takes for an `m × n` instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Random,
    Sparse,
    Split,
}

pub fn branch_for(m: usize, n: usize, cfg: &SolverConfig) -> Branch {
    if m > n.saturating_mul(n) {
        Branch::Random
    } else if (m as f64) < n as f64 / cfg.log(n as f64).powi(2) {
        Branch::Sparse
    } else {
        Branch::Split
    }
}

/// A coloring together with how it was produced.
#[derive(Clone, Debug, PartialEq)]
pub struct ColoringRun {
    pub v: Vec<f64>,
    pub discrepancy: f64,
    pub trace: PipelineTrace,
    pub retries: u32,
}

/// Full `±1` coloring with `‖Av‖_∞ ≤ spencer_bound(m, n)`.
pub fn coloring(a: &SetSystemMatrix, cfg: &SolverConfig, rng: &mut SeededRng) -> Result<ColoringRun> {
    run_mode(a, Mode::Auto, cfg, rng)
}

pub fn run_mode(a: &SetSystemMatrix, mode: Mode, cfg: &SolverConfig, rng: &mut SeededRng) -> Result<ColoringRun> {
    cfg.validate()?;
    let (m, n) = (a.rows(), a.cols());
    let mut trace = PipelineTrace::default();
    if n == 0 {
        return Ok(ColoringRun {
            v: Vec::new(),
            discrepancy: 0.0,
            trace,
            retries: 0,
        });
    }
    let v = match mode {
        Mode::Auto => return auto(a, cfg, rng),
        Mode::Random => {
            let timer = Timer::start();
            let (v, retries) = random_coloring_checked(a, cfg.spencer_bound(m, n), rng, cfg.retry_count)?;
            push(&mut trace, "random", a, &v, timer, retries)?;
            v
        }
        Mode::Sparse => sparse_phase(a, cfg, rng, &mut trace)?,
        Mode::Dense => dense_coloring(a, cfg, rng, &mut trace)?,
        Mode::Partial => {
            let timer = Timer::start();
            let p = partial_coloring(a, &vec![1.0; n], cfg, rng)?;
            push(&mut trace, "partial", a, &p.v, timer, p.retries)?;
            p.v
        }
    };
    Ok(ColoringRun {
        discrepancy: a.discrepancy(&v)?,
        v,
        trace,
        retries: 0,
    })
}

fn push(trace: &mut PipelineTrace, name: &str, a: &SetSystemMatrix, v: &[f64], timer: Timer, retries: u32) -> Result<()> {
    trace.push(PhaseRecord {
        phase: name.into(),
        n_sub: a.cols(),
        m_sub: a.rows(),
        nnz: a.nnz(),
        disc_contrib: a.discrepancy(v)?,
        micros: timer.micros(),
        retries,
    });
    Ok(())
}

fn sparse_phase(a: &SetSystemMatrix, cfg: &SolverConfig, rng: &mut SeededRng, trace: &mut PipelineTrace) -> Result<Vec<f64>> {
    let timer = Timer::start();
    let walk = sparse_coloring(a, cfg, rng)?;
    push(trace, "sparse", a, &walk.signs, timer, walk.restarts)?;
    Ok(walk.signs)
}

fn auto(a: &SetSystemMatrix, cfg: &SolverConfig, rng: &mut SeededRng) -> Result<ColoringRun> {
    let (m, n) = (a.rows(), a.cols());
    let bound = cfg.spencer_bound(m, n);
    let mut last = String::new();
    for retries in 0..=cfg.retry_count {
        let mut trace = PipelineTrace::default();
        let attempt = match branch_for(m, n, cfg) {
            Branch::Random => {
                let timer = Timer::start();
                random_coloring_checked(a, bound, rng, cfg.retry_count).and_then(|(v, r)| {
                    push(&mut trace, "random", a, &v, timer, r)?;
                    Ok(v)
                })
            }
            Branch::Sparse => sparse_phase(a, cfg, rng, &mut trace),
            Branch::Split => split(a, cfg, rng, &mut trace),
        };
        match attempt {
            Ok(v) => {
                let discrepancy = a.discrepancy(&v)?;
                if discrepancy <= bound {
                    return Ok(ColoringRun {
                        v,
                        discrepancy,
                        trace,
                        retries,
                    });
                }
                last = format!("discrepancy {discrepancy} above {bound}");
            }
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::RetryExhausted(format!("coloring: {last}")))
}

/// Columns of small ℓ₂ norm go to the walk, the rest to iterated partial
/// coloring.
fn split(a: &SetSystemMatrix, cfg: &SolverConfig, rng: &mut SeededRng, trace: &mut PipelineTrace) -> Result<Vec<f64>> {
    let n = a.cols();
    let limit = (n as f64).sqrt() / cfg.log(n as f64);
    let (light, heavy): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| a.col_norm2(i) <= limit);
    let mut v = vec![0.0; n];
    if !light.is_empty() {
        let signs = sparse_phase(&a.select_columns(&light), cfg, rng, trace)?;
        for (&i, s) in light.iter().zip(signs) {
            v[i] = s;
        }
    }
    if !heavy.is_empty() {
        let signs = dense_coloring(&a.select_columns(&heavy), cfg, rng, trace)?;
        for (&i, s) in heavy.iter().zip(signs) {
            v[i] = s;
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches() {
        let cfg = SolverConfig::default();
        assert_eq!(branch_for(10, 3, &cfg), Branch::Random);
        assert_eq!(branch_for(9, 3, &cfg), Branch::Split);
        // 1000 / ln(1000)² = 20.9
        assert_eq!(branch_for(20, 1000, &cfg), Branch::Sparse);
        assert_eq!(branch_for(21, 1000, &cfg), Branch::Split);
    }

    #[test]
    fn many_sets_take_the_random_branch() {
        let n = 4;
        let sets: Vec<Vec<usize>> = (0..n * n + 1).map(|r| vec![r % n]).collect();
        let a = SetSystemMatrix::from_sets(&sets, n).unwrap();
        let run = coloring(&a, &SolverConfig::desk(), &mut SeededRng::new(0)).unwrap();
        let names: Vec<&str> = run.trace.phases.iter().map(|p| p.phase.as_str()).collect();
        assert_eq!(names, ["random"]);
    }

    #[test]
    fn light_columns_take_the_walk() {
        // Every column has norm 1, below √n / L(n) = 32 / ln 1024 ≈ 4.6.
        let n = 1024;
        let sets: Vec<Vec<usize>> = (0..64).map(|r| (r * 16..r * 16 + 16).collect()).collect();
        let a = SetSystemMatrix::from_sets(&sets, n).unwrap();
        let run = coloring(&a, &SolverConfig::desk(), &mut SeededRng::new(0)).unwrap();
        let names: Vec<&str> = run.trace.phases.iter().map(|p| p.phase.as_str()).collect();
        assert_eq!(names, ["sparse"]);
        assert!(run.v.iter().all(|x| x.abs() == 1.0));
    }

    #[test]
    fn mixed_instance_obeys_triangle_inequality() {
        // 40 dense columns plus 60 columns touching a single set each.
        let mut rng = SeededRng::new(6);
        let (m, n) = (40, 100);
        let sets: Vec<Vec<usize>> = (0..m)
            .map(|r| {
                let mut s: Vec<usize> = (0..40).filter(|_| rng.bernoulli(0.5)).collect();
                s.extend((40..n).filter(|c| c % m == r));
                s
            })
            .collect();
        let a = SetSystemMatrix::from_sets(&sets, n).unwrap();
        let cfg = SolverConfig::desk();
        let limit = (n as f64).sqrt() / cfg.log(n as f64);
        assert!((0..n).any(|i| a.col_norm2(i) <= limit) && (0..n).any(|i| a.col_norm2(i) > limit));
        let run = coloring(&a, &cfg, &mut rng).unwrap();
        assert_eq!(run.trace.phases[0].phase, "sparse");
        assert!(run.trace.phases.len() > 1);
        assert!(run.discrepancy <= run.trace.total_contribution() + 1e-9);
        assert!(run.discrepancy <= cfg.spencer_bound(m, n));
    }

    #[test]
    fn parse_modes() {
        assert_eq!("dense".parse::<Mode>().unwrap(), Mode::Dense);
        assert!("fast".parse::<Mode>().is_err());
    }

    #[test]
    fn empty_instance() {
        let run = coloring(&SetSystemMatrix::zeros(3, 0), &SolverConfig::desk(), &mut SeededRng::new(0)).unwrap();
        assert!(run.v.is_empty());
    }

    #[test]
    fn identity_has_discrepancy_one() {
        let a = SetSystemMatrix::identity(16);
        let run = coloring(&a, &SolverConfig::desk(), &mut SeededRng::new(0)).unwrap();
        assert_eq!(run.discrepancy, 1.0);
        assert!(run.v.iter().all(|x| x.abs() == 1.0));
    }

    #[test]
    fn every_mode_colors_a_small_instance() {
        let mut rng = SeededRng::new(4);
        let (m, n) = (16, 16);
        let sets: Vec<Vec<usize>> = (0..m).map(|_| (0..n).filter(|_| rng.bernoulli(0.5)).collect()).collect();
        let a = SetSystemMatrix::from_sets(&sets, n).unwrap();
        for mode in [Mode::Auto, Mode::Dense, Mode::Sparse, Mode::Random] {
            let run = run_mode(&a, mode, &SolverConfig::desk(), &mut rng).unwrap();
            assert!(run.v.iter().all(|x| x.abs() == 1.0), "{mode:?}");
            assert_eq!(run.discrepancy, a.discrepancy(&run.v).unwrap());
        }
        let run = run_mode(&a, Mode::Partial, &SolverConfig::desk(), &mut rng).unwrap();
        assert!(run.v.iter().all(|x| x.abs() <= 1.0));
    }
}
