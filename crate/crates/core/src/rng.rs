//! Seeded random streams.
//!
//! Every randomized routine takes a [`SeededRng`]. Identical seeds replay
//! identical sequences, and [`SeededRng::derive`] splits off independent
//! sub-streams for work that may run in any order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent child stream. Consumes one word of this stream, so the
    /// parent's subsequent output depends on how many children were derived.
    pub fn derive(&mut self, tag: u64) -> SeededRng {
        let word = self.inner.next_u64();
        SeededRng::new(splitmix64(word ^ splitmix64(tag)))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        self.inner.random_range(0..bound)
    }

    /// Uniform real in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// `true` with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform `±1`.
    pub fn sign(&mut self) -> f64 {
        if self.inner.next_u32() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

/// Draws `g ~ N(0, I_n)` conditioned on `‖g‖₂ ≤ 2√n` by rejection.
pub fn sample_gaussian_conditioned(n: usize, rng: &mut SeededRng, max_tries: usize) -> Result<Vec<f64>> {
    assert!(n >= 1, "dimension must be positive");
    let limit = 4.0 * n as f64;
    for _ in 0..max_tries {
        let g: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
        if g.iter().map(|x| x * x).sum::<f64>() <= limit {
            return Ok(g);
        }
    }
    Err(Error::RetryExhausted(format!(
        "no Gaussian sample with norm <= 2 sqrt({n}) in {max_tries} tries"
    )))
}
