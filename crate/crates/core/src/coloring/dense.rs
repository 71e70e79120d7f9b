use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::{inf_norm, SetSystemMatrix};
use crate::rng::SeededRng;

use super::partial::partial_coloring;
use super::random::round_unbiased;
use super::trace::{PhaseRecord, PipelineTrace, Timer};

const SNAP: f64 = 1e-12;

/// Most partial-coloring phases a run on `n` columns can need: each phase
/// shrinks the unfixed set by a factor `1 - 1/(2·divisor)`.
pub fn phase_cap(n: usize, cfg: &SolverConfig) -> usize {
    if n <= 1 {
        return 1;
    }
    let shrink = 1.0 - 1.0 / (2.0 * cfg.partial_fraction_divisor);
    ((n as f64).ln() / -shrink.ln()).ceil() as usize + 1
}

fn apply_sign(v: &[f64], g: &[usize], lambda: &[f64], step: &[f64], sigma: f64) -> (Vec<f64>, usize) {
    let mut out = v.to_vec();
    let mut newly = 0;
    for (k, &i) in g.iter().enumerate() {
        let mut x = v[i] + sigma * lambda[k] * step[k];
        if x.abs() >= 1.0 - SNAP {
            x = x.signum();
            newly += 1;
        }
        assert!(x.abs() <= 1.0, "sign combination left the cube: {x}");
        out[i] = x;
    }
    (out, newly)
}

/// Full coloring by iterated partial coloring plus a random completion.
pub fn dense_coloring(
    a: &SetSystemMatrix,
    cfg: &SolverConfig,
    rng: &mut SeededRng,
    trace: &mut PipelineTrace,
) -> Result<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    let mut v: Vec<f64> = vec![0.0; n];
    let completion_at = n as f64 / cfg.log(n as f64).powi(2);
    let cap = phase_cap(n, cfg);
    let mut phases = 0;
    loop {
        let g: Vec<usize> = (0..n).filter(|&i| v[i].abs() < 1.0).collect();
        if g.is_empty() {
            break;
        }
        if (g.len() as f64) < completion_at {
            random_completion(a, &mut v, &g, cfg, rng, trace)?;
            break;
        }
        phases += 1;
        assert!(phases <= cap, "phase count exceeded {cap}");
        let timer = Timer::start();
        let sub = a.select_columns(&g);
        let lambda: Vec<f64> = g.iter().map(|&i| 1.0 - v[i].abs()).collect();
        let needed = g.len() as f64 / (2.0 * cfg.partial_fraction_divisor);
        let mut accepted = None;
        for retries in 0..=cfg.retry_count {
            let partial = partial_coloring(&sub, &lambda, cfg, rng)?;
            let (plus, n_plus) = apply_sign(&v, &g, &lambda, &partial.v, 1.0);
            let (minus, n_minus) = apply_sign(&v, &g, &lambda, &partial.v, -1.0);
            // Among the signs that fix enough coordinates, keep the one with
            // the smaller discrepancy.
            let mut best: Option<(Vec<f64>, f64)> = None;
            for (candidate, newly) in [(plus, n_plus), (minus, n_minus)] {
                if (newly as f64) < needed {
                    continue;
                }
                let disc = a.discrepancy(&candidate)?;
                if best.as_ref().is_none_or(|(_, d)| disc < *d) {
                    best = Some((candidate, disc));
                }
            }
            if let Some((next, _)) = best {
                accepted = Some((next, partial.discrepancy, retries + partial.retries));
                break;
            }
        }
        let Some((next, contrib, retries)) = accepted else {
            return Err(Error::RetryExhausted(format!(
                "phase {phases}: neither sign fixes {needed} of {} coordinates",
                g.len()
            )));
        };
        v = next;
        trace.push(PhaseRecord {
            phase: "partial".into(),
            n_sub: g.len(),
            m_sub: m,
            nnz: sub.nnz(),
            disc_contrib: contrib,
            micros: timer.micros(),
            retries,
        });
    }
    Ok(v)
}

/// Rounds the coordinates in `g` unbiasedly, retrying until the discrepancy
/// grows by at most `10√n`.
fn random_completion(
    a: &SetSystemMatrix,
    v: &mut Vec<f64>,
    g: &[usize],
    cfg: &SolverConfig,
    rng: &mut SeededRng,
    trace: &mut PipelineTrace,
) -> Result<()> {
    let timer = Timer::start();
    let before = inf_norm(&a.mat_vec(v)?);
    let limit = before + 10.0 * (a.cols() as f64).sqrt();
    for retries in 0..=cfg.retry_count {
        let mut w = v.clone();
        round_unbiased(&mut w, g, rng);
        let after = inf_norm(&a.mat_vec(&w)?);
        if after <= limit {
            let delta: Vec<f64> = w.iter().zip(v.iter()).map(|(x, y)| x - y).collect();
            trace.push(PhaseRecord {
                phase: "completion".into(),
                n_sub: g.len(),
                m_sub: a.rows(),
                nnz: g.iter().map(|&i| a.col_support(i)).sum(),
                disc_contrib: inf_norm(&a.mat_vec(&delta)?),
                micros: timer.micros(),
                retries,
            });
            *v = w;
            return Ok(());
        }
    }
    Err(Error::RetryExhausted(format!("completion of {} coordinates", g.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_formula() {
        let cfg = SolverConfig::default();
        assert_eq!(phase_cap(1, &cfg), 1);
        // ln 256 / -ln(15/16) = 85.9
        assert_eq!(phase_cap(256, &cfg), 87);
    }

    #[test]
    fn sign_choice_fixes_matching_coordinates() {
        let v = [0.5, -0.5, 0.0, 1.0];
        let g = [0, 1, 2];
        let lambda = [0.5, 0.5, 1.0];
        let step = [1.0, 1.0, -1.0];
        let (plus, n_plus) = apply_sign(&v, &g, &lambda, &step, 1.0);
        assert_eq!(plus, vec![1.0, 0.0, -1.0, 1.0]);
        assert_eq!(n_plus, 2);
        let (minus, n_minus) = apply_sign(&v, &g, &lambda, &step, -1.0);
        assert_eq!(minus, vec![0.0, -1.0, 1.0, 1.0]);
        assert_eq!(n_minus, 2);
    }

    #[test]
    fn zero_matrix() {
        let a = SetSystemMatrix::zeros(5, 40);
        let mut trace = PipelineTrace::default();
        let v = dense_coloring(&a, &SolverConfig::desk(), &mut SeededRng::new(0), &mut trace).unwrap();
        assert!(trace.phases.len() <= 2);
        assert_eq!(a.discrepancy(&v).unwrap(), 0.0);
    }

    #[test]
    fn identity_decays_geometrically() {
        let n = 128;
        let a = SetSystemMatrix::identity(n);
        let cfg = SolverConfig::desk();
        let mut trace = PipelineTrace::default();
        let v = dense_coloring(&a, &cfg, &mut SeededRng::new(1), &mut trace).unwrap();
        assert!(a.discrepancy(&v).unwrap() <= cfg.spencer_bound(n, n));
        let sizes: Vec<usize> = trace.phases_named("partial").map(|p| p.n_sub).collect();
        let keep = 1.0 - 1.0 / (2.0 * cfg.partial_fraction_divisor);
        for w in sizes.windows(2) {
            assert!(w[1] as f64 <= keep * w[0] as f64, "{sizes:?}");
        }
    }

    proptest::proptest! {
        #[test]
        fn sign_combination_stays_in_cube(
            pairs in proptest::collection::vec((-1.0f64..=1.0, proptest::bool::ANY, proptest::bool::ANY), 1..20),
            sigma in proptest::bool::ANY,
        ) {
            let v: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let step: Vec<f64> = pairs.iter().map(|p| if p.1 { 1.0 } else { -0.5 }).collect();
            let g: Vec<usize> = (0..v.len()).filter(|&i| pairs[i].2 || v[i].abs() < 1.0).collect();
            let lambda: Vec<f64> = g.iter().map(|&i| 1.0 - v[i].abs()).collect();
            let sub: Vec<f64> = g.iter().map(|&i| step[i]).collect();
            let (out, _) = apply_sign(&v, &g, &lambda, &sub, if sigma { 1.0 } else { -1.0 });
            proptest::prop_assert!(out.iter().all(|x| x.abs() <= 1.0));
        }
    }

    #[test]
    fn full_coloring_with_trace() {
        let mut rng = SeededRng::new(9);
        let (m, n) = (20, 20);
        let sets: Vec<Vec<usize>> = (0..m).map(|_| (0..n).filter(|_| rng.bernoulli(0.5)).collect()).collect();
        let a = SetSystemMatrix::from_sets(&sets, n).unwrap();
        let cfg = SolverConfig::desk();
        let mut trace = PipelineTrace::default();
        let v = dense_coloring(&a, &cfg, &mut rng, &mut trace).unwrap();
        assert!(v.iter().all(|x| x.abs() == 1.0));
        assert!(!trace.phases.is_empty() && trace.phases.len() <= phase_cap(n, &cfg) + 1);
        let sizes: Vec<usize> = trace.phases.iter().map(|p| p.n_sub).collect();
        assert!(sizes.windows(2).all(|w| w[1] < w[0]));
        assert!(a.discrepancy(&v).unwrap() <= trace.total_contribution() + 1e-9);
    }
}
