//! Nonnegative data matrix storage and the sparse kernels shared by all
//! solvers.
//!
//! The data matrix is stored row-compressed: term-document matrices are far
//! below 1% dense, while the factor matrices stay dense. Entries are kept in
//! ascending `(row, col)` order so every kernel sums in a fixed index order.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::kernels;

/// Sparse nonnegative matrix in compressed-row layout.
///
/// Invariants: all stored values are finite, nonnegative and nonzero;
/// column indices are strictly ascending within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from coordinate triplets. Duplicate coordinates are
    /// summed; entries that sum to exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::Shape(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Domain(format!("non-finite value at ({r}, {c})")));
            }
            if v < 0.0 {
                return Err(Error::Domain(format!("negative value {v} at ({r}, {c})")));
            }
            entries.push((r, c, v));
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut it = entries.into_iter().peekable();
        while let Some((r, c, mut v)) = it.next() {
            while let Some(&(r2, c2, v2)) = it.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if v != 0.0 {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(DataMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a matrix from a dense array, dropping exact zeros.
    pub fn from_dense(dense: &Array2<f64>) -> Result<Self> {
        let (rows, cols) = dense.dim();
        let triplets = dense
            .indexed_iter()
            .filter(|&(_, &v)| v != 0.0)
            .map(|((r, c), &v)| (r, c, v));
        Self::from_triplets(rows, cols, triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&col) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    /// Stored entries of one row in ascending column order.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// All stored entries in ascending `(row, col)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for (r, c, v) in self.iter() {
            out[[r, c]] = v;
        }
        out
    }

    /// Row sums `A·e`.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.rows];
        for (r, _, v) in self.iter() {
            sums[r] += v;
        }
        sums
    }

    /// `A · cᵀ` for a dense `c: K×N`, giving `M×K`.
    pub fn mul_ct(&self, c: &Array2<f64>) -> Array2<f64> {
        let (k, n) = c.dim();
        assert_eq!(n, self.cols, "mul_ct: column count {n} vs {}", self.cols);
        let mut out = Array2::zeros((self.rows, k));
        for (m, j, v) in self.iter() {
            for r in 0..k {
                out[[m, r]] += v * c[[r, j]];
            }
        }
        out
    }

    /// `bᵀ · A` for a dense `b: M×K`, giving `K×N`.
    pub fn tmul(&self, b: &Array2<f64>) -> Array2<f64> {
        let (m, k) = b.dim();
        assert_eq!(m, self.rows, "tmul: row count {m} vs {}", self.rows);
        let mut out = Array2::zeros((k, self.cols));
        for (i, j, v) in self.iter() {
            for r in 0..k {
                out[[r, j]] += b[[i, r]] * v;
            }
        }
        out
    }

    /// `½ ‖A − W·C‖²_F`, evaluated one row at a time in index order.
    pub fn half_residual_sq(&self, w: &Array2<f64>, c: &Array2<f64>) -> f64 {
        let (m, k) = w.dim();
        let (k2, n) = c.dim();
        assert_eq!(m, self.rows, "half_residual_sq: row count mismatch");
        assert_eq!(n, self.cols, "half_residual_sq: column count mismatch");
        assert_eq!(k, k2, "half_residual_sq: inner dimension mismatch");
        let mut total = 0.0;
        let mut buf = vec![0.0; n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for r in 0..k {
                    acc += w[[i, r]] * c[[r, j]];
                }
                buf[j] = acc;
            }
            for (j, v) in self.row(i) {
                buf[j] -= v;
            }
            for &d in buf.iter() {
                total += d * d;
            }
        }
        0.5 * total
    }

    /// Column rescaling `A ← A·D^{−1/2}` with `D = diag(AᵀA·e)`.
    ///
    /// Column `n` is divided by the square root of the inner product between
    /// column `n` and the sum of all columns. A zero column makes that
    /// weight vanish and is rejected.
    pub fn normalize_columns(&self) -> Result<DataMatrix> {
        let row_sums = self.row_sums();
        let mut weights = vec![0.0; self.cols];
        for (r, c, v) in self.iter() {
            weights[c] += v * row_sums[r];
        }
        for (n, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                return Err(Error::Degenerate(format!(
                    "column {n} is zero; its normalization weight vanishes"
                )));
            }
        }
        let scale: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
        let mut out = self.clone();
        let col_idx = &out.col_idx;
        for (k, v) in out.values.iter_mut().enumerate() {
            *v *= scale[col_idx[k]];
        }
        Ok(out)
    }
}

/// `½ ‖A − B·S·C‖²_F` for the tri-factor layout.
pub fn half_residual_sq_tri(
    a: &DataMatrix,
    b: &Array2<f64>,
    s: &Array2<f64>,
    c: &Array2<f64>,
) -> f64 {
    let w = kernels::matmul(b, s);
    a.half_residual_sq(&w, c)
}
