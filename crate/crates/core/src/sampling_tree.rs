//! Dynamic weighted sampling over `m` nonnegative weights.
//!
//! A full binary tree sits on top of the weight array; every internal node
//! stores the total weight of its subtree. Updating one weight walks up the
//! `O(log m)` ancestors and sampling walks down, flipping one biased coin per
//! level.
//!
//! Weights are kept as base-2 logarithms in signed fixed point with
//! [`PRECISION_BITS`] fractional bits, so repeated multiplicative updates are
//! exact additions and weights can range over `[4^{-T}, 4^{T}]` without
//! overflow. A parent whose children's logs differ by more than
//! `2·PRECISION_BITS` takes the heavier child's log; otherwise it stores
//! `log y + log(1 + z/y)`. Sampling descends to the heavier child outright when
//! the logs differ by more than `PRECISION_BITS`.

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Fractional bits of every stored logarithm.
pub const PRECISION_BITS: u32 = 64;

const ONE: i128 = 1 << PRECISION_BITS;
const ONE_F: f64 = 18_446_744_073_709_551_616.0;
const ZERO_WEIGHT: i128 = i128::MIN;
const MERGE_CUTOFF: i128 = 2 * PRECISION_BITS as i128 * ONE;
const DESCENT_CUTOFF: i128 = PRECISION_BITS as i128 * ONE;

// The i128 <-> f64 casts are library calls; values that fit go through i64
// with 52 fractional bits, which is all the precision an f64 carries anyway.
const FAST_SHIFT: u32 = PRECISION_BITS - 52;
const FAST_SCALE: f64 = 4_503_599_627_370_496.0;

fn to_fixed(log2: f64) -> i128 {
    if log2.abs() < 1024.0 {
        ((log2 * FAST_SCALE) as i64 as i128) << FAST_SHIFT
    } else {
        (log2 * ONE_F) as i128
    }
}

fn to_f64(fixed: i128) -> f64 {
    let short = fixed >> FAST_SHIFT;
    if short.unsigned_abs() < 1 << 62 {
        short as i64 as f64 / FAST_SCALE
    } else {
        fixed as f64 / ONE_F
    }
}

/// `log2(2^a + 2^b)` on fixed-point logs.
fn log_sum(a: i128, b: i128) -> i128 {
    if a == ZERO_WEIGHT {
        return b;
    }
    if b == ZERO_WEIGHT {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let gap = hi - lo;
    if gap > MERGE_CUTOFF {
        return hi;
    }
    let correction = (-to_f64(gap)).exp2().ln_1p() * std::f64::consts::LOG2_E;
    hi + to_fixed(correction)
}

#[derive(Clone, Debug)]
pub struct WeightTree {
    size: usize,
    leaves: usize,
    // 1-based heap layout: node k has children 2k and 2k+1; leaf i is node leaves + i.
    nodes: Vec<i128>,
    dirty: Vec<usize>,
}

impl WeightTree {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::AllZeroWeights);
        }
        if let Some(&w) = weights.iter().find(|w| !(**w >= 0.0) || w.is_infinite()) {
            return Err(Error::NegativeWeight(w));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::AllZeroWeights);
        }
        let leaves = weights.len().next_power_of_two();
        let mut nodes = vec![ZERO_WEIGHT; 2 * leaves];
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                nodes[leaves + i] = to_fixed(w.log2());
            }
        }
        let mut tree = Self {
            size: weights.len(),
            leaves,
            nodes,
            dirty: Vec::new(),
        };
        tree.rebuild();
        Ok(tree)
    }

    /// Tree over `m` equal weights.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(&vec![1.0; m])
    }

    fn rebuild(&mut self) {
        for k in (1..self.leaves).rev() {
            self.nodes[k] = log_sum(self.nodes[2 * k], self.nodes[2 * k + 1]);
        }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn depth(&self) -> u32 {
        self.leaves.trailing_zeros()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.size {
            Ok(())
        } else {
            Err(Error::LeafOutOfBounds {
                index: i,
                size: self.size,
            })
        }
    }

    fn scaled_leaf(&self, i: usize, tau: f64) -> Result<i128> {
        if !(tau >= 0.0) || tau.is_infinite() {
            return Err(Error::NegativeMultiplier(tau));
        }
        let leaf = self.nodes[self.leaves + i];
        Ok(if tau == 0.0 || leaf == ZERO_WEIGHT {
            ZERO_WEIGHT
        } else {
            leaf + to_fixed(tau.log2())
        })
    }

    fn propagate(&mut self, i: usize) {
        let mut k = (self.leaves + i) / 2;
        while k >= 1 {
            self.nodes[k] = log_sum(self.nodes[2 * k], self.nodes[2 * k + 1]);
            k /= 2;
        }
    }

    /// Multiplies weight `i` by `tau` in `O(log m)`.
    pub fn mult(&mut self, i: usize, tau: f64) -> Result<()> {
        self.check_index(i)?;
        let new = self.scaled_leaf(i, tau)?;
        let old = std::mem::replace(&mut self.nodes[self.leaves + i], new);
        self.propagate(i);
        if self.nodes[1] == ZERO_WEIGHT {
            self.nodes[self.leaves + i] = old;
            self.propagate(i);
            return Err(Error::AllZeroWeights);
        }
        Ok(())
    }

    /// Applies several `mult` updates, re-deriving each touched ancestor once.
    ///
    /// Repeated indices compound. If an update would zero the last positive
    /// weight, the updates before it stay applied and the error is returned.
    pub fn mult_many(&mut self, updates: &[(usize, f64)]) -> Result<()> {
        if updates.iter().any(|&(_, tau)| tau == 0.0) {
            for &(i, tau) in updates {
                self.mult(i, tau)?;
            }
            return Ok(());
        }
        for &(i, _) in updates {
            self.check_index(i)?;
        }
        let mut dirty = std::mem::take(&mut self.dirty);
        dirty.clear();
        for &(i, tau) in updates {
            let new = match self.scaled_leaf(i, tau) {
                Ok(v) => v,
                Err(e) => {
                    self.refresh(&mut dirty);
                    self.dirty = dirty;
                    return Err(e);
                }
            };
            self.nodes[self.leaves + i] = new;
            if self.leaves > 1 {
                dirty.push((self.leaves + i) / 2);
            }
        }
        self.refresh(&mut dirty);
        self.dirty = dirty;
        Ok(())
    }

    // Recomputes the listed nodes and all their ancestors, level by level.
    fn refresh(&mut self, dirty: &mut Vec<usize>) {
        // Halving keeps a sorted list sorted, so one sort suffices.
        dirty.sort_unstable();
        dirty.dedup();
        while !dirty.is_empty() {
            for &k in dirty.iter() {
                self.nodes[k] = log_sum(self.nodes[2 * k], self.nodes[2 * k + 1]);
            }
            if dirty[0] <= 1 {
                dirty.clear();
                break;
            }
            for k in dirty.iter_mut() {
                *k /= 2;
            }
            dirty.dedup();
        }
    }

    /// Multiplies every weight by its factor and rebuilds in `O(m)`.
    pub fn mult_all(&mut self, factors: &[f64]) -> Result<()> {
        crate::matrix::check_len(self.size, factors.len())?;
        let mut next = Vec::with_capacity(self.size);
        for (i, &tau) in factors.iter().enumerate() {
            next.push(self.scaled_leaf(i, tau)?);
        }
        if next.iter().all(|&v| v == ZERO_WEIGHT) {
            return Err(Error::AllZeroWeights);
        }
        self.nodes[self.leaves..self.leaves + self.size].copy_from_slice(&next);
        self.rebuild();
        Ok(())
    }

    /// Draws index `i` with probability proportional to its weight.
    pub fn sample(&self, rng: &mut SeededRng) -> Result<usize> {
        if self.nodes[1] == ZERO_WEIGHT {
            return Err(Error::AllZeroWeights);
        }
        let mut k = 1;
        while k < self.leaves {
            let (left, right) = (self.nodes[2 * k], self.nodes[2 * k + 1]);
            k = if left == ZERO_WEIGHT {
                2 * k + 1
            } else if right == ZERO_WEIGHT {
                2 * k
            } else {
                let (heavy, light, gap) = if left >= right {
                    (2 * k, 2 * k + 1, left - right)
                } else {
                    (2 * k + 1, 2 * k, right - left)
                };
                if gap > DESCENT_CUTOFF {
                    heavy
                } else {
                    // P(light) = z / (y + z) = 1 / (1 + 2^gap).
                    let p_light = 1.0 / (1.0 + to_f64(gap).exp2());
                    if rng.uniform() < p_light {
                        light
                    } else {
                        heavy
                    }
                }
            };
        }
        Ok(k - self.leaves)
    }

    /// `log2` of the total weight.
    pub fn total_log2(&self) -> f64 {
        to_f64(self.nodes[1])
    }

    /// `log2` of weight `i`, or `None` for a zero weight.
    pub fn leaf_log2(&self, i: usize) -> Option<f64> {
        let v = self.nodes[self.leaves + i];
        (v != ZERO_WEIGHT).then(|| to_f64(v))
    }

    /// Normalized probability of index `i`.
    pub fn probability(&self, i: usize) -> f64 {
        let v = self.nodes[self.leaves + i];
        if v == ZERO_WEIGHT {
            0.0
        } else {
            to_f64(v - self.nodes[1]).exp2()
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.size).map(|i| self.probability(i)).collect()
    }

    /// Largest absolute gap, in log2 units, between a stored internal node and
    /// the log-sum of the leaves below it recomputed directly.
    pub fn max_node_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 1..self.leaves {
            let level = 63 - (k as u64).leading_zeros();
            let span = self.leaves >> level;
            let first = (k << (self.depth() - level)) - self.leaves;
            let logs: Vec<f64> = (first..first + span)
                .filter_map(|i| {
                    let v = self.nodes[self.leaves + i];
                    (v != ZERO_WEIGHT).then(|| to_f64(v))
                })
                .collect();
            let stored = self.nodes[k];
            if logs.is_empty() {
                assert_eq!(stored, ZERO_WEIGHT, "node {k} should carry zero weight");
                continue;
            }
            let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exact = top + logs.iter().map(|l| (l - top).exp2()).sum::<f64>().log2();
            worst = worst.max((to_f64(stored) - exact).abs());
        }
        worst
    }

    /// Largest absolute stored log, used to check the dynamic range.
    pub fn max_abs_log2(&self) -> f64 {
        self.nodes[1..]
            .iter()
            .filter(|&&v| v != ZERO_WEIGHT)
            .map(|&v| to_f64(v).abs())
            .fold(0.0, f64::max)
    }
}
