//! Compressed sparse row matrices and dense vector kernels.
//!
//! [`SparseMatrix`] is the exchange format between assembly, the discrete
//! differential operators, and the solvers. Construction goes through
//! [`SparseMatrix::from_triplets`], which sums duplicates deterministically so
//! assembled operators are bit-reproducible for a fixed cell order.

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

/// Sparse real matrix in CSR layout with sorted, duplicate-free entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    ///
    /// Triplets are sorted by `(row, col)` before accumulation, so the result
    /// does not depend on the scatter order of the assembly loop. Entries that
    /// sum to exactly zero are kept; incidence matrices rely on structural
    /// zeros staying in place.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&i| (triplets[i].0, triplets[i].1));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());

        for &i in &order {
            let (r, c, v) = triplets[i];
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
        }
        for i in 1..=nrows {
            row_ptr[i] += row_ptr[i - 1];
        }
        let mut m = Self { nrows, ncols, row_ptr, col_idx, values };
        m.merge_duplicates();
        m
    }

    fn merge_duplicates(&mut self) {
        let mut new_cols = Vec::with_capacity(self.col_idx.len());
        let mut new_vals = Vec::with_capacity(self.values.len());
        let mut new_ptr = vec![0usize; self.nrows + 1];
        for r in 0..self.nrows {
            let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut i = s;
            while i < e {
                let c = self.col_idx[i];
                let mut v = self.values[i];
                let mut j = i + 1;
                while j < e && self.col_idx[j] == c {
                    v += self.values[j];
                    j += 1;
                }
                new_cols.push(c);
                new_vals.push(v);
                i = j;
            }
            new_ptr[r + 1] = new_cols.len();
        }
        self.row_ptr = new_ptr;
        self.col_idx = new_cols;
        self.values = new_vals;
    }

    pub fn identity(n: usize) -> Self {
        let trips: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &trips)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over stored entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (r, self.col_idx[i], self.values[i]))
        })
    }

    /// Entries of row `r` as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (self.col_idx[i], self.values[i]))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    /// y = A x
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[i] * x[self.col_idx[i]];
            }
            y[r] = acc;
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.apply(x, &mut y);
        y
    }

    /// y = Aᵀ x
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        y.fill(0.0);
        for r in 0..self.nrows {
            let xr = x[r];
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[i]] += self.values[i] * xr;
            }
        }
    }

    pub fn apply_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        self.apply_transpose(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let trips: Vec<_> = self.iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &trips)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.nrows.min(self.ncols);
        (0..n).map(|i| self.get(i, i)).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = self.clone();
        for v in &mut m.values {
            *v *= s;
        }
        m
    }

    /// A + B, structural union.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let trips: Vec<_> = self.iter().chain(other.iter()).collect();
        Self::from_triplets(self.nrows, self.ncols, &trips)
    }

    /// Maximum absolute asymmetry `max |A_ij - A_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.transpose();
        self.iter()
            .map(|(r, c, v)| (v - t.get(r, c)).abs())
            .fold(0.0, f64::max)
    }

    /// Dense copy as a `faer` matrix.
    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// CSC copy for the sparse direct solvers.
    pub fn to_faer(&self) -> SparseColMat<usize, f64> {
        let trips: Vec<_> = self
            .iter()
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trips)
            .expect("valid triplets")
    }

    /// Aᵀ diag(w) A, assembled in triplet form.
    pub fn normal_product(&self, w: &[f64]) -> Self {
        assert_eq!(w.len(), self.nrows);
        let mut trips = Vec::new();
        for r in 0..self.nrows {
            let entries: Vec<_> = self.row(r).collect();
            for &(ci, vi) in &entries {
                for &(cj, vj) in &entries {
                    trips.push((ci, cj, vi * w[r] * vj));
                }
            }
        }
        Self::from_triplets(self.ncols, self.ncols, &trips)
    }
}

/// Chunked dot product; four accumulators so the loop vectorizes.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * i + l] * b[4 * i + l];
        }
    }
    let mut s = acc[0] + acc[1] + acc[2] + acc[3];
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 2.0), (0, 0, 0.5)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 1.5);
        assert_eq!(m.get(1, 1), 2.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn matvec_and_transpose() {
        let m = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, -1.0)]);
        assert_eq!(m.apply_vec(&[1.0, 2.0, 3.0]), vec![7.0, -2.0]);
        assert_eq!(m.apply_transpose_vec(&[1.0, 1.0]), vec![1.0, -1.0, 2.0]);
        assert_eq!(m.transpose().get(2, 0), 2.0);
    }

    #[test]
    fn normal_product_matches_explicit() {
        // D = [[1, 1], [0, 2]], w = (2, 3): DᵀWD = [[2,2],[2,14]]
        let d = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 2.0)]);
        let p = d.normal_product(&[2.0, 3.0]);
        assert_eq!(p.get(0, 0), 2.0);
        assert_eq!(p.get(0, 1), 2.0);
        assert_eq!(p.get(1, 0), 2.0);
        assert_eq!(p.get(1, 1), 14.0);
    }

    #[test]
    fn structural_zeros_survive() {
        let m = SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 0, -1.0), (0, 1, 5.0)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 0.0);
    }
}
