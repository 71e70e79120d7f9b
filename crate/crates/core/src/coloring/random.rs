use crate::error::{Error, Result};
use crate::matrix::SetSystemMatrix;
use crate::rng::SeededRng;

pub fn random_signs(n: usize, rng: &mut SeededRng) -> Vec<f64> {
    (0..n).map(|_| rng.sign()).collect()
}

/// Uniform `±1` coloring resampled until `‖Av‖_∞ ≤ bound`. Returns the
/// coloring and the number of rejected draws.
pub fn random_coloring_checked(
    a: &SetSystemMatrix,
    bound: f64,
    rng: &mut SeededRng,
    max_retries: u32,
) -> Result<(Vec<f64>, u32)> {
    for attempt in 0..=max_retries {
        let v = random_signs(a.cols(), rng);
        if a.discrepancy(&v)? <= bound {
            return Ok((v, attempt));
        }
    }
    Err(Error::RetryExhausted(format!(
        "no random coloring within {bound} after {} draws",
        max_retries + 1
    )))
}

/// Rounds every coordinate to `±1` independently with mean `v_i`.
pub fn round_unbiased(v: &mut [f64], indices: &[usize], rng: &mut SeededRng) {
    for &i in indices {
        let p = (1.0 + v[i]) / 2.0;
        v[i] = if rng.bernoulli(p) { 1.0 } else { -1.0 };
    }
}
