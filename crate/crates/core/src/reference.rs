//! Brute-force oracles for tests and acceptance runs.
//!
//! Everything here is exponential in `n` and meant for tiny instances only.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::{dot, SetSystemMatrix};
use crate::rng::SeededRng;

/// Largest grid (points) any grid search may visit.
pub const GRID_POINT_CAP: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub resolution: f64,
    pub max_dim: usize,
}

impl GridSpec {
    pub fn new(resolution: f64) -> Self {
        Self {
            resolution,
            max_dim: 6,
        }
    }

    /// Grid coordinates in `[-1, 1]`, always including both endpoints.
    fn axis(&self) -> Vec<f64> {
        let steps = (2.0 / self.resolution).round() as usize;
        (0..=steps).map(|k| -1.0 + 2.0 * k as f64 / steps as f64).collect()
    }

    fn check(&self, n: usize) -> Result<Vec<f64>> {
        if !(self.resolution > 0.0 && self.resolution <= 1.0) {
            return Err(Error::InvalidConfig(format!("grid resolution {}", self.resolution)));
        }
        let axis = self.axis();
        let points = (axis.len() as f64).powi(n as i32);
        if n > self.max_dim || points > GRID_POINT_CAP {
            return Err(Error::TooLarge(format!("{points:.3e} grid points in dimension {n}")));
        }
        Ok(axis)
    }
}

/// Calls `visit` on every point of `axis^n`.
fn for_each_grid_point(axis: &[f64], n: usize, mut visit: impl FnMut(&[f64])) {
    let mut idx = vec![0usize; n];
    let mut x = vec![axis[0]; n];
    loop {
        visit(&x);
        let mut k = 0;
        loop {
            if k == n {
                return;
            }
            idx[k] += 1;
            if idx[k] < axis.len() {
                x[k] = axis[idx[k]];
                break;
            }
            idx[k] = 0;
            x[k] = axis[0];
            k += 1;
        }
    }
}

/// Exact `min_{v ∈ {±1}^n} ‖Av‖_∞` with a minimizer.
pub fn brute_min_discrepancy(a: &SetSystemMatrix) -> Result<(f64, Vec<f64>)> {
    let n = a.cols();
    if n > 20 {
        return Err(Error::TooLarge(format!("2^{n} sign vectors")));
    }
    let mut best = (f64::INFINITY, vec![1.0; n]);
    for mask in 0u32..(1 << n) {
        let v: Vec<f64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        let d = a.discrepancy(&v)?;
        if d < best.0 {
            best = (d, v);
        }
    }
    Ok(best)
}

/// Whether `x` lies in `Γ_{A,C}` up to `slack`.
pub fn in_gamma(a: &SetSystemMatrix, c: f64, x: &[f64], slack: f64) -> Result<bool> {
    let radius = SolverConfig::gamma_radius(c, a.rows(), a.cols());
    Ok(x.iter().all(|v| v.abs() <= 1.0 + slack) && a.discrepancy(x)? <= radius + slack)
}

/// Best `⟨v, x⟩/√n` over grid points of `[-1, 1]^n` inside `Γ_{A,C}`, and
/// `‖v‖₁·resolution/√n`. The latter bounds the gap to the true supremum only
/// when no row constraint is active at the optimum.
pub fn grid_lp_max(a: &SetSystemMatrix, v: &[f64], c: f64, spec: &GridSpec) -> Result<(f64, f64)> {
    let n = a.cols();
    crate::matrix::check_len(n, v.len())?;
    let axis = spec.check(n)?;
    let radius = SolverConfig::gamma_radius(c, a.rows(), n);
    let root = (n as f64).sqrt();
    let mut best = f64::NEG_INFINITY;
    for_each_grid_point(&axis, n, |x| {
        let value = dot(v, x) / root;
        if value > best && a.discrepancy(x).unwrap() <= radius {
            best = value;
        }
    });
    let error = crate::matrix::norm1(v) * spec.resolution / root;
    Ok((best, error))
}

/// Grid minimum of `max_j (v' + v_j)ᵀx` over the scaled cube
/// `[-1/√n, 1/√n]^n` (the grid is laid on `[-1, 1]^n` and rescaled).
pub fn grid_minimax(v_prime: &[f64], rows: &[Vec<f64>], spec: &GridSpec) -> Result<f64> {
    let n = v_prime.len();
    let axis = spec.check(n)?;
    let r = (n as f64).sqrt().recip();
    let shifted: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| row.iter().zip(v_prime).map(|(a, b)| r * (a + b)).collect())
        .collect();
    let mut best = f64::INFINITY;
    for_each_grid_point(&axis, n, |x| {
        let value = shifted
            .iter()
            .map(|row| dot(row, x))
            .fold(f64::NEG_INFINITY, f64::max);
        best = best.min(value);
    });
    Ok(best)
}

/// Solves the square system `m y = b` by Gaussian elimination with partial
/// pivoting; `None` when singular.
fn solve_square(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let d = b.len();
    for col in 0..d {
        let pivot = (col..d).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..d {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..d {
                    m[row][k] -= f * m[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut y = vec![0.0; d];
    for row in (0..d).rev() {
        let tail: f64 = (row + 1..d).map(|k| m[row][k] * y[k]).sum();
        y[row] = (b[row] - tail) / m[row][row];
    }
    Some(y)
}

/// Advances `idx` to the next `k`-subset of `0..total` in lexicographic order.
fn next_subset(idx: &mut [usize], total: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < total - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `max cᵀy` subject to `G y ≤ h` by enumerating vertices. The feasible set
/// must be a nonempty pointed polyhedron on which the objective is bounded.
pub fn vertex_lp_max(c: &[f64], g: &[Vec<f64>], h: &[f64]) -> Result<(f64, Vec<f64>)> {
    let d = c.len();
    let total = g.len();
    if total < d {
        return Err(Error::InvalidConfig("fewer constraints than variables".into()));
    }
    let count: f64 = (0..d).map(|i| (total - i) as f64 / (i + 1) as f64).product();
    if count > 5e6 {
        return Err(Error::TooLarge(format!("{count:.3e} vertex candidates")));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let m = idx.iter().map(|&i| g[i].clone()).collect();
        let b = idx.iter().map(|&i| h[i]).collect();
        if let Some(y) = solve_square(m, b) {
            let feasible = g.iter().zip(h).all(|(row, &hi)| dot(row, &y) <= hi + 1e-9 * (1.0 + hi.abs()));
            if feasible {
                let value = dot(c, &y);
                if best.as_ref().is_none_or(|(b, _)| value > *b) {
                    best = Some((value, y));
                }
            }
        }
        if !next_subset(&mut idx, total) {
            break;
        }
    }
    best.ok_or(Error::NoFeasibleLevel)
}

/// Exact `sup_{x ∈ Γ_{A,C}} ⟨v, x⟩/√n` with a maximizer.
pub fn exact_lp_max(a: &SetSystemMatrix, v: &[f64], c: f64) -> Result<(f64, Vec<f64>)> {
    let n = a.cols();
    crate::matrix::check_len(n, v.len())?;
    let radius = SolverConfig::gamma_radius(c, a.rows(), n);
    let mut g = Vec::new();
    let mut h = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        g.push(e.clone());
        h.push(1.0);
        e[i] = -1.0;
        g.push(e);
        h.push(1.0);
    }
    for r in 0..a.rows() {
        let mut row = vec![0.0; n];
        let (cols, vals) = a.row(r);
        for (&j, &val) in cols.iter().zip(vals) {
            row[j] = val;
        }
        if row.iter().all(|&x| x == 0.0) {
            continue;
        }
        g.push(row.clone());
        h.push(radius);
        g.push(row.iter().map(|x| -x).collect());
        h.push(radius);
    }
    let root = (n as f64).sqrt();
    let objective: Vec<f64> = v.iter().map(|x| x / root).collect();
    vertex_lp_max(&objective, &g, &h)
}

/// Exact `min_{x ∈ [-1/√n, 1/√n]^n} max_j (v' + v_j)ᵀx` with a minimizer.
pub fn exact_minimax(v_prime: &[f64], rows: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let n = v_prime.len();
    if rows.is_empty() {
        return Err(Error::InvalidConfig("no constraints".into()));
    }
    let r = (n as f64).sqrt().recip();
    let mut g = Vec::new();
    let mut h = Vec::new();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n + 1];
            e[i] = sign;
            g.push(e);
            h.push(r);
        }
    }
    for row in rows {
        let mut constraint: Vec<f64> = row.iter().zip(v_prime).map(|(a, b)| a + b).collect();
        constraint.push(-1.0);
        g.push(constraint);
        h.push(0.0);
    }
    let mut objective = vec![0.0; n + 1];
    objective[n] = -1.0;
    let (value, y) = vertex_lp_max(&objective, &g, &h)?;
    Ok((-value, y[..n].to_vec()))
}

/// Exact inverse-transform sampler over explicit weights.
#[derive(Clone, Debug)]
pub struct NaiveSampler {
    cumulative: Vec<f64>,
}

impl NaiveSampler {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|w| !(**w >= 0.0) || w.is_infinite()) {
            return Err(Error::NegativeWeight(w));
        }
        let mut total = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                total += w;
                total
            })
            .collect();
        if !(total > 0.0) {
            return Err(Error::AllZeroWeights);
        }
        Ok(Self { cumulative })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total = *self.cumulative.last().unwrap();
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = (c - prev) / total;
                prev = c;
                p
            })
            .collect()
    }

    pub fn sample(&self, rng: &mut SeededRng) -> usize {
        let u = rng.uniform() * self.cumulative.last().unwrap();
        let i = self.cumulative.partition_point(|&c| c <= u);
        // Skip trailing zero-weight entries that share the final cumulative value.
        i.min(self.cumulative.len() - 1)
    }
}

pub fn naive_weighted_sample(weights: &[f64], rng: &mut SeededRng) -> Result<usize> {
    Ok(NaiveSampler::new(weights)?.sample(rng))
}

/// Exact mean and second moment of the single-sample estimator of `vᵀx`.
pub fn exact_estimator_moments(x: &[f64], v: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    for (&xi, &vi) in x.iter().zip(v) {
        if xi != 0.0 {
            let value = vi / xi;
            let p = xi * xi;
            mean += p * value;
            second += p * value * value;
        }
    }
    (mean, second)
}

/// Total-variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_discrepancy_examples() {
        assert_eq!(brute_min_discrepancy(&SetSystemMatrix::identity(3)).unwrap().0, 1.0);
        let row = SetSystemMatrix::from_sets(&[vec![0, 1]], 2).unwrap();
        assert_eq!(brute_min_discrepancy(&row).unwrap().0, 0.0);
        assert!(matches!(
            brute_min_discrepancy(&SetSystemMatrix::zeros(1, 21)),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn hadamard_fixture() {
        let h = [[1.0, 1.0, 1.0, 1.0], [1.0, -1.0, 1.0, -1.0], [1.0, 1.0, -1.0, -1.0], [1.0, -1.0, -1.0, 1.0]];
        let entries: Vec<_> = (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c, h[r][c])))
            .collect();
        let a = SetSystemMatrix::from_entries(&entries, 4, 4).unwrap();
        let (value, v) = brute_min_discrepancy(&a).unwrap();
        // The columns of a Hadamard matrix are orthogonal, so ‖Hv‖₂² = 16 and
        // some row must reach 2.
        assert_eq!(value, 2.0);
        assert_eq!(a.discrepancy(&v).unwrap(), 2.0);
    }

    #[test]
    fn grid_lp_examples() {
        let a = SetSystemMatrix::zeros(1, 1);
        let (value, _) = grid_lp_max(&a, &[1.0], 1.0, &GridSpec::new(0.5)).unwrap();
        assert_eq!(value, 1.0);
        let a = SetSystemMatrix::identity(2);
        assert_eq!(grid_lp_max(&a, &[0.0, 0.0], 1.0, &GridSpec::new(0.5)).unwrap().0, 0.0);
        assert!(grid_lp_max(&SetSystemMatrix::zeros(1, 7), &[0.0; 7], 1.0, &GridSpec::new(0.5)).is_err());
    }

    #[test]
    fn exact_lp_agrees_with_grid() {
        let mut rng = SeededRng::new(5);
        for _ in 0..10 {
            let entries: Vec<_> = (0..3)
                .flat_map(|r| (0..2).map(move |c| (r, c)))
                .map(|(r, c)| (r, c, rng.range(-1.0, 1.0)))
                .collect();
            let a = SetSystemMatrix::from_entries(&entries, 3, 2).unwrap();
            let v = [rng.gaussian(), rng.gaussian()];
            let c = rng.range(0.05, 0.5);
            let (exact, x) = exact_lp_max(&a, &v, c).unwrap();
            let (grid, _) = grid_lp_max(&a, &v, c, &GridSpec::new(1e-3)).unwrap();
            assert!(in_gamma(&a, c, &x, 1e-9).unwrap());
            // Row constraints can cut off the grid point nearest the optimum,
            // so the cube-only error bound does not apply here.
            assert!(grid <= exact + 1e-9 && exact <= grid + 1e-2, "{grid} {exact}");
        }
    }

    #[test]
    fn grid_lp_is_monotone_in_c() {
        let a = SetSystemMatrix::from_entries(&[(0, 0, 1.0), (0, 1, 1.0), (1, 1, -0.5)], 2, 2).unwrap();
        let v = [1.0, 0.7];
        let spec = GridSpec::new(0.01);
        let values: Vec<f64> = [0.05, 0.1, 0.3, 1.0]
            .iter()
            .map(|&c| grid_lp_max(&a, &v, c, &spec).unwrap().0)
            .collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn exact_minimax_agrees_with_grid() {
        let mut rng = SeededRng::new(9);
        for _ in 0..10 {
            let v_prime: Vec<f64> = (0..2).map(|_| rng.range(-0.35, 0.35)).collect();
            let rows: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..2).map(|_| rng.range(-0.35, 0.35)).collect())
                .collect();
            let (exact, _) = exact_minimax(&v_prime, &rows).unwrap();
            let grid = grid_minimax(&v_prime, &rows, &GridSpec::new(1e-3)).unwrap();
            assert!(exact <= grid + 1e-12 && grid <= exact + 2e-3, "{exact} {grid}");
        }
    }

    #[test]
    fn naive_sampler() {
        let s = NaiveSampler::new(&[1.0, 1.0]).unwrap();
        let mut rng = SeededRng::new(12);
        let draws = 1_000_000;
        let zeros = (0..draws).filter(|_| s.sample(&mut rng) == 0).count();
        assert!((zeros as f64 / draws as f64 - 0.5).abs() < 0.002);
        let s = NaiveSampler::new(&[0.0, 2.0, 0.0]).unwrap();
        assert!((0..1000).all(|_| s.sample(&mut rng) == 1));
        assert!(matches!(NaiveSampler::new(&[0.0]), Err(Error::AllZeroWeights)));
    }

    #[test]
    fn estimator_moment_examples() {
        assert_eq!(exact_estimator_moments(&[1.0, 0.0], &[0.3, 0.5]), (0.3, 0.09));
        assert_eq!(exact_estimator_moments(&[0.0, 0.0], &[0.3, 0.5]), (0.0, 0.0));
    }
}
