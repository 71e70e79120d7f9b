use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::{inf_norm, SetSystemMatrix};
use crate::mwu;
use crate::rng::{sample_gaussian_conditioned, SeededRng};

use super::random::{random_signs, round_unbiased};

/// Output of [`partial_coloring`].
#[derive(Clone, Debug, PartialEq)]
pub struct PartialColoring {
    /// Entries in `[-1, 1]`; at least `n / partial_fraction_divisor` are `±1`.
    pub v: Vec<f64>,
    pub fixed_count: usize,
    /// `‖AΛv‖_∞`.
    pub discrepancy: f64,
    /// Radius constant drawn for the light block, 0 if it was empty.
    pub c_alg: f64,
    pub heavy_count: usize,
    pub retries: u32,
}

/// Columns with `|supp(Ae_i)| ≥ L(n)·nnz(A)/n`.
pub fn heavy_columns(a: &SetSystemMatrix, cfg: &SolverConfig) -> Vec<bool> {
    let n = a.cols();
    let threshold = cfg.log(n as f64) * a.nnz() as f64 / n as f64;
    (0..n).map(|i| a.col_support(i) as f64 >= threshold).collect()
}

/// Partial coloring of `AΛ` with `Λ = diag(lambda)`.
///
/// Heavy-support columns get random signs. The rest are colored by a
/// near-maximizer of `⟨g, x⟩` over `Γ_{A_light, C}` for a conditioned
/// Gaussian `g`, whose large coordinates are rounded to `±1`. The attempt is
/// repeated until enough coordinates are fixed and the discrepancy is within
/// the target bound.
pub fn partial_coloring(
    a: &SetSystemMatrix,
    lambda: &[f64],
    cfg: &SolverConfig,
    rng: &mut SeededRng,
) -> Result<PartialColoring> {
    let (m, n) = (a.rows(), a.cols());
    if lambda.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: lambda.len(),
        });
    }
    if let Some(&bad) = lambda.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::EntryOutOfRange {
            row: 0,
            col: 0,
            value: bad,
        });
    }
    let b = a.scale_columns(lambda)?;
    if n == 0 {
        return Ok(PartialColoring {
            v: Vec::new(),
            fixed_count: 0,
            discrepancy: 0.0,
            c_alg: 0.0,
            heavy_count: 0,
            retries: 0,
        });
    }
    let bound = cfg.spencer_bound(m, n);
    let needed = n as f64 / cfg.partial_fraction_divisor;
    let heavy = if m > n * n { vec![true; n] } else { heavy_columns(&b, cfg) };
    let light: Vec<usize> = (0..n).filter(|&i| !heavy[i]).collect();
    let heavy_count = n - light.len();
    let light_block = b.select_columns(&light);
    let round_at = 1.0 - 2.0 / cfg.log(n as f64);

    let mut last = String::new();
    for retries in 0..=cfg.retry_count {
        let mut v = random_signs(n, rng);
        let mut c_alg = 0.0;
        if !light.is_empty() {
            let g = sample_gaussian_conditioned(light.len(), rng, 1000)?;
            c_alg = rng.range(cfg.c0, 2.0 * cfg.c0);
            let z = match mwu::solve(&light_block, &g, c_alg, cfg, rng) {
                Ok(z) => z,
                Err(e) => {
                    last = e.to_string();
                    continue;
                }
            };
            for (&i, &zi) in light.iter().zip(&z) {
                v[i] = zi;
            }
            let big: Vec<usize> = light.iter().copied().filter(|&i| v[i].abs() >= round_at).collect();
            round_unbiased(&mut v, &big, rng);
        }
        let fixed_count = v.iter().filter(|x| x.abs() == 1.0).count();
        let discrepancy = inf_norm(&b.mat_vec(&v)?);
        if fixed_count as f64 >= needed && discrepancy <= bound {
            return Ok(PartialColoring {
                v,
                fixed_count,
                discrepancy,
                c_alg,
                heavy_count,
                retries,
            });
        }
        last = format!("fixed {fixed_count} of {n} (need {needed}), discrepancy {discrepancy} (bound {bound})");
    }
    Err(Error::RetryExhausted(format!("partial coloring: {last}")))
}
