//! Sparse set-system matrices with both row-major and column-major adjacency.
//!
//! A set system `S_1, ..., S_m ⊆ [n]` is stored as its `m x n` incidence
//! matrix. More generally any matrix with every entry in `[-1, 1]` is
//! accepted, which is the setting the coloring pipeline works in
//! (`‖A‖_{1→∞} ≤ 1`).

use crate::error::{Error, Result};

/// Immutable sparse `m x n` matrix with entries in `[-1, 1]`.
///
/// Entries are kept twice: once grouped by row (CSR) and once grouped by
/// column (CSC), each list sorted by the minor index. Exact zeros are not
/// stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SetSystemMatrix {
    m: usize,
    n: usize,
    row_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    row_val: Vec<f64>,
    col_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    col_val: Vec<f64>,
}

/// Norms and column supports of a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixStats {
    /// `‖A‖_{1→∞}`, the largest absolute entry.
    pub one_to_inf: f64,
    /// `‖A‖_{1→2}`, the largest column ℓ₂ norm.
    pub one_to_two: f64,
    /// `|supp(Ae_i)|` for every column `i`.
    pub col_supports: Vec<usize>,
}

impl SetSystemMatrix {
    /// Builds a matrix from `(row, col, value)` triples.
    ///
    /// Duplicates are rejected rather than summed, and `|value| ≤ 1` is checked
    /// exactly.
    pub fn from_entries(entries: &[(usize, usize, f64)], m: usize, n: usize) -> Result<Self> {
        let mut sorted = Vec::with_capacity(entries.len());
        for &(row, col, value) in entries {
            if row >= m || col >= n {
                return Err(Error::IndexOutOfBounds { row, col, m, n });
            }
            // `!(x <= 1)` also rejects NaN.
            if !(value.abs() <= 1.0) {
                return Err(Error::EntryOutOfRange { row, col, value });
            }
            sorted.push((row, col, value));
        }
        sorted.sort_unstable_by_key(|&(r, c, _)| (r, c));
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::DuplicateEntry {
                    row: pair[0].0,
                    col: pair[0].1,
                });
            }
        }
        sorted.retain(|&(_, _, v)| v != 0.0);
        Ok(Self::from_sorted_unchecked(&sorted, m, n))
    }

    /// Builds the 0/1 incidence matrix of a set system; `sets[r]` lists the
    /// 0-based elements of set `r`.
    pub fn from_sets(sets: &[Vec<usize>], n: usize) -> Result<Self> {
        let entries: Vec<_> = sets
            .iter()
            .enumerate()
            .flat_map(|(r, s)| s.iter().map(move |&c| (r, c, 1.0)))
            .collect();
        Self::from_entries(&entries, sets.len(), n)
    }

    /// The `n x n` identity.
    pub fn identity(n: usize) -> Self {
        let entries: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_sorted_unchecked(&entries, n, n)
    }

    /// The `m x n` all-zero matrix.
    pub fn zeros(m: usize, n: usize) -> Self {
        Self::from_sorted_unchecked(&[], m, n)
    }

    // `entries` must be sorted by (row, col), in range, duplicate-free and nonzero.
    fn from_sorted_unchecked(entries: &[(usize, usize, f64)], m: usize, n: usize) -> Self {
        let nnz = entries.len();
        let mut row_ptr = vec![0usize; m + 1];
        let mut col_ptr = vec![0usize; n + 1];
        for &(r, c, _) in entries {
            row_ptr[r + 1] += 1;
            col_ptr[c + 1] += 1;
        }
        for i in 0..m {
            row_ptr[i + 1] += row_ptr[i];
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        let row_idx = entries.iter().map(|e| e.1).collect();
        let row_val = entries.iter().map(|e| e.2).collect();

        // Row-major input order makes each column's row list come out sorted.
        let mut col_idx = vec![0usize; nnz];
        let mut col_val = vec![0.0; nnz];
        let mut next = col_ptr.clone();
        for &(r, c, v) in entries {
            col_idx[next[c]] = r;
            col_val[next[c]] = v;
            next[c] += 1;
        }
        Self {
            m,
            n,
            row_ptr,
            row_idx,
            row_val,
            col_ptr,
            col_idx,
            col_val,
        }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Column indices and values of row `r`, sorted by column.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.row_idx[span.clone()], &self.row_val[span])
    }

    /// Row indices and values of column `c`, sorted by row.
    pub fn col(&self, c: usize) -> (&[usize], &[f64]) {
        let span = self.col_ptr[c]..self.col_ptr[c + 1];
        (&self.col_idx[span.clone()], &self.col_val[span])
    }

    pub fn col_support(&self, c: usize) -> usize {
        self.col_ptr[c + 1] - self.col_ptr[c]
    }

    pub fn col_norm2(&self, c: usize) -> f64 {
        self.col(c).1.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn row_norm2(&self, r: usize) -> f64 {
        self.row(r).1.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// All stored entries in row-major order.
    pub fn entries_by_row(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.m).flat_map(move |r| {
            let (idx, val) = self.row(r);
            idx.iter().zip(val).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// All stored entries in column-major order.
    pub fn entries_by_col(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |c| {
            let (idx, val) = self.col(c);
            idx.iter().zip(val).map(move |(&r, &v)| (r, c, v))
        })
    }

    pub fn stats(&self) -> MatrixStats {
        let one_to_inf = self.row_val.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let one_to_two = (0..self.n).map(|c| self.col_norm2(c)).fold(0.0, f64::max);
        let col_supports = (0..self.n).map(|c| self.col_support(c)).collect();
        MatrixStats {
            one_to_inf,
            one_to_two,
            col_supports,
        }
    }

    /// `Ax`, in `O(nnz + m)`.
    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        Ok((0..self.m)
            .map(|r| {
                let (idx, val) = self.row(r);
                idx.iter().zip(val).map(|(&c, &a)| a * x[c]).sum()
            })
            .collect())
    }

    /// `Aᵀy`, in `O(nnz + n)`.
    pub fn mat_transpose_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.m, y.len())?;
        Ok((0..self.n)
            .map(|c| {
                let (idx, val) = self.col(c);
                idx.iter().zip(val).map(|(&r, &a)| a * y[r]).sum()
            })
            .collect())
    }

    /// `‖Av‖_∞`.
    pub fn discrepancy(&self, v: &[f64]) -> Result<f64> {
        Ok(inf_norm(&self.mat_vec(v)?))
    }

    /// Restriction to the listed columns, renumbered `0..cols.len()`.
    pub fn select_columns(&self, cols: &[usize]) -> SetSystemMatrix {
        let mut entries = Vec::new();
        for (new_c, &c) in cols.iter().enumerate() {
            let (idx, val) = self.col(c);
            entries.extend(idx.iter().zip(val).map(|(&r, &v)| (r, new_c, v)));
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        Self::from_sorted_unchecked(&entries, self.m, cols.len())
    }

    /// `A·diag(scale)`; every scale must lie in `[-1, 1]`.
    pub fn scale_columns(&self, scale: &[f64]) -> Result<SetSystemMatrix> {
        check_len(self.n, scale.len())?;
        if let Some(&s) = scale.iter().find(|s| !(s.abs() <= 1.0)) {
            return Err(Error::InvalidConfig(format!("column scale {s} outside [-1, 1]")));
        }
        let entries: Vec<_> = self
            .entries_by_row()
            .map(|(r, c, v)| (r, c, v * scale[c]))
            .filter(|e| e.2 != 0.0)
            .collect();
        Ok(Self::from_sorted_unchecked(&entries, self.m, self.n))
    }

    /// `c·A` for `|c| ≤ 1`.
    pub fn scaled(&self, c: f64) -> SetSystemMatrix {
        assert!(c.abs() <= 1.0);
        if c == 0.0 {
            return Self::zeros(self.m, self.n);
        }
        let mut out = self.clone();
        out.row_val.iter_mut().for_each(|v| *v *= c);
        out.col_val.iter_mut().for_each(|v| *v *= c);
        out
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

/// A vector in `[-1, 1]^n` together with the set of coordinates already
/// fixed to `±1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColoringVector {
    values: Vec<f64>,
    fixed: Vec<bool>,
}

impl ColoringVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            fixed: vec![false; n],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !(v.abs() <= 1.0)) {
            return Err(Error::EntryOutOfRange {
                row: 0,
                col: i,
                value: v,
            });
        }
        let fixed = values.iter().map(|v| v.abs() == 1.0).collect();
        Ok(Self { values, fixed })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed[i]
    }

    /// Sets coordinate `i`; the value must lie in `[-1, 1]`.
    pub fn set(&mut self, i: usize, value: f64) {
        assert!(value.abs() <= 1.0, "coordinate {value} left [-1, 1]");
        self.values[i] = value;
        self.fixed[i] = value.abs() == 1.0;
    }

    pub fn fixed_count(&self) -> usize {
        self.fixed.iter().filter(|&&f| f).count()
    }

    pub fn unfixed(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.fixed[i]).collect()
    }

    pub fn is_full_coloring(&self) -> bool {
        self.fixed.iter().all(|&f| f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_matrix() {
        let a = SetSystemMatrix::from_entries(&[(0, 0, 1.0)], 1, 1).unwrap();
        assert_eq!((a.rows(), a.cols(), a.nnz()), (1, 1, 1));
    }

    #[test]
    fn set_encoding() {
        let a = SetSystemMatrix::from_sets(&[vec![0, 1]], 3).unwrap();
        assert_eq!(a.mat_vec(&[1.0, 10.0, 100.0]).unwrap(), vec![11.0]);
        assert_eq!(a.row(0).0, &[0, 1]);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(matches!(
            SetSystemMatrix::from_entries(&[(0, 0, 1.5)], 1, 1),
            Err(Error::EntryOutOfRange { .. })
        ));
        assert!(matches!(
            SetSystemMatrix::from_entries(&[(0, 0, f64::NAN)], 1, 1),
            Err(Error::EntryOutOfRange { .. })
        ));
        assert!(matches!(
            SetSystemMatrix::from_entries(&[(0, 0, 1.0), (0, 0, 0.5)], 1, 1),
            Err(Error::DuplicateEntry { row: 0, col: 0 })
        ));
        assert!(matches!(
            SetSystemMatrix::from_entries(&[(0, 3, 1.0)], 1, 3),
            Err(Error::IndexOutOfBounds { .. })
        ));
    }

    #[test]
    fn stats_examples() {
        let s = SetSystemMatrix::identity(3).stats();
        assert_eq!(s.one_to_inf, 1.0);
        assert_eq!(s.one_to_two, 1.0);
        assert_eq!(s.col_supports, vec![1, 1, 1]);

        let ones = SetSystemMatrix::from_sets(&[vec![0, 1], vec![0, 1]], 2).unwrap();
        assert!((ones.stats().one_to_two - 2f64.sqrt()).abs() < 1e-15);

        let z = SetSystemMatrix::zeros(2, 2).stats();
        assert_eq!((z.one_to_inf, z.one_to_two, z.col_supports), (0.0, 0.0, vec![0, 0]));
    }

    #[test]
    fn products() {
        let id = SetSystemMatrix::identity(2);
        assert_eq!(id.mat_vec(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(id.mat_transpose_vec(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        let z = SetSystemMatrix::zeros(3, 2);
        assert_eq!(z.mat_vec(&[4.0, -1.0]).unwrap(), vec![0.0; 3]);
        let row = SetSystemMatrix::from_sets(&[vec![0, 1]], 2).unwrap();
        assert_eq!(row.mat_vec(&[1.0, -1.0]).unwrap(), vec![0.0]);
        assert!(matches!(
            row.mat_vec(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(row.mat_transpose_vec(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn discrepancy_examples() {
        let id = SetSystemMatrix::identity(4);
        assert_eq!(id.discrepancy(&[1.0, -1.0, -1.0, 1.0]).unwrap(), 1.0);
        let all = SetSystemMatrix::from_sets(&[vec![0, 1, 2, 3]], 4).unwrap();
        assert_eq!(all.discrepancy(&[1.0, 1.0, -1.0, -1.0]).unwrap(), 0.0);
        let two = SetSystemMatrix::from_sets(&[vec![0, 1]], 2).unwrap();
        assert_eq!(two.discrepancy(&[1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn column_selection_and_scaling() {
        let a = SetSystemMatrix::from_entries(
            &[(0, 0, 1.0), (0, 2, -0.5), (1, 1, 1.0), (1, 2, 1.0)],
            2,
            3,
        )
        .unwrap();
        let sub = a.select_columns(&[2, 0]);
        assert_eq!(sub.cols(), 2);
        assert_eq!(sub.col(0), (&[0usize, 1][..], &[-0.5, 1.0][..]));
        assert_eq!(sub.row(0), (&[0usize, 1][..], &[-0.5, 1.0][..]));

        let scaled = a.scale_columns(&[0.5, 0.0, -1.0]).unwrap();
        assert_eq!(scaled.nnz(), 3);
        assert_eq!(scaled.mat_vec(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn coloring_vector_mask() {
        let mut v = ColoringVector::zeros(3);
        v.set(0, 1.0);
        v.set(1, -0.25);
        assert_eq!(v.fixed_count(), 1);
        assert_eq!(v.unfixed(), vec![1, 2]);
        v.set(1, -1.0);
        v.set(2, 1.0);
        assert!(v.is_full_coloring());
        assert!(ColoringVector::from_values(vec![0.0, 1.5]).is_err());
    }
}
