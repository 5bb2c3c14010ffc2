use alloc::vec;
use alloc::vec::Vec;

use super::DenseMatrix;
use crate::error::{invalid, Error, Result};

/// Compressed sparse row matrix with strictly increasing column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCsr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseCsr {
    /// Validates raw CSR arrays.
    pub fn new(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != rows + 1 || indptr[0] != 0 {
            return Err(invalid("row pointer must have rows+1 entries starting at 0"));
        }
        if indices.len() != values.len() || indptr[rows] != indices.len() {
            return Err(invalid("row pointer does not end at nnz"));
        }
        for r in 0..rows {
            if indptr[r] > indptr[r + 1] {
                return Err(invalid("row pointer must be nondecreasing"));
            }
            let cols_in_row = &indices[indptr[r]..indptr[r + 1]];
            if cols_in_row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("column indices must be strictly increasing within a row"));
            }
            if cols_in_row.last().is_some_and(|&c| c >= cols) {
                return Err(invalid("column index out of range"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("SparseCsr::new"));
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(invalid("triplet index out of range"));
            }
            sorted.push((r, c, v));
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Self::new(rows, cols, indptr, indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Keeps every nonzero entry of a dense matrix.
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut indptr = Vec::with_capacity(m.rows() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..m.rows() {
            for (c, &v) in m.row(r).iter().enumerate() {
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                out.set(r, c, v);
            }
        }
        out
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices of row `r`.
    #[inline]
    pub fn row_indices(&self, r: usize) -> &[usize] {
        &self.indices[self.indptr[r]..self.indptr[r + 1]]
    }

    #[inline]
    pub fn row_values(&self, r: usize) -> &[f64] {
        &self.values[self.indptr[r]..self.indptr[r + 1]]
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row_indices(r)
            .iter()
            .copied()
            .zip(self.row_values(r).iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        match self.row_indices(r).binary_search(&c) {
            Ok(pos) => self.row_values(r)[pos],
            Err(_) => 0.0,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| self.row(r).all(|(c, v)| self.get(c, r) == v))
    }

    /// Sparse-dense product `self * b`.
    pub fn spmm(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != b.rows() {
            return Err(Error::DimensionMismatch {
                op: "spmm",
                lhs: (self.rows, self.cols),
                rhs: b.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, b.cols());
        for r in 0..self.rows {
            let out_row = out.row_mut(r);
            for (c, v) in self.row(r) {
                for (o, &x) in out_row.iter_mut().zip(b.row(c)) {
                    *o += v * x;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * b` without building the transpose.
    pub fn tr_spmm(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != b.rows() {
            return Err(Error::DimensionMismatch {
                op: "tr_spmm",
                lhs: (self.rows, self.cols),
                rhs: b.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(self.cols, b.cols());
        for r in 0..self.rows {
            let b_row = b.row(r);
            for (c, v) in self.row(r) {
                for (o, &x) in out.row_mut(c).iter_mut().zip(b_row) {
                    *o += v * x;
                }
            }
        }
        Ok(out)
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.cols != x.len() {
            return Err(Error::DimensionMismatch {
                op: "spmv",
                lhs: (self.rows, self.cols),
                rhs: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect())
    }

    /// Sparse-sparse product (row-wise Gustavson accumulation).
    pub fn spgemm(&self, other: &SparseCsr) -> Result<SparseCsr> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "spgemm",
                lhs: (self.rows, self.cols),
                rhs: (other.rows, other.cols),
            });
        }
        let mut acc = vec![0.0f64; other.cols];
        let mut touched = vec![false; other.cols];
        let mut pattern: Vec<usize> = Vec::new();
        let mut indptr = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        pattern.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            pattern.sort_unstable();
            for &c in &pattern {
                indices.push(c);
                values.push(acc[c]);
                acc[c] = 0.0;
                touched[c] = false;
            }
            pattern.clear();
            indptr.push(indices.len());
        }
        Ok(SparseCsr {
            rows: self.rows,
            cols: other.cols,
            indptr,
            indices,
            values,
        })
    }

    /// `alpha * self + beta * other`, merging sparsity patterns.
    pub fn linear_combination(&self, alpha: f64, other: &SparseCsr, beta: f64) -> Result<SparseCsr> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                op: "linear_combination",
                lhs: (self.rows, self.cols),
                rhs: (other.rows, other.cols),
            });
        }
        let mut indptr = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        indptr.push(0);
        for r in 0..self.rows {
            let (ai, av) = (self.row_indices(r), self.row_values(r));
            let (bi, bv) = (other.row_indices(r), other.row_values(r));
            let (mut p, mut q) = (0, 0);
            while p < ai.len() || q < bi.len() {
                let take_a = q == bi.len() || (p < ai.len() && ai[p] <= bi[q]);
                let take_b = p == ai.len() || (q < bi.len() && bi[q] <= ai[p]);
                let (c, v) = match (take_a, take_b) {
                    (true, true) => {
                        let out = (ai[p], alpha * av[p] + beta * bv[q]);
                        p += 1;
                        q += 1;
                        out
                    }
                    (true, false) => {
                        let out = (ai[p], alpha * av[p]);
                        p += 1;
                        out
                    }
                    _ => {
                        let out = (bi[q], beta * bv[q]);
                        q += 1;
                        out
                    }
                };
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(SparseCsr {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices,
            values,
        })
    }

    /// `diag(left) * self * diag(right)`.
    pub fn scale_rows_cols(&self, left: &[f64], right: &[f64]) -> SparseCsr {
        debug_assert_eq!(left.len(), self.rows);
        debug_assert_eq!(right.len(), self.cols);
        let mut out = self.clone();
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out.values[k] = left[r] * self.values[k] * right[self.indices[k]];
            }
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.row_values(r).iter().sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spmm_is_neutral() {
        let b = DenseMatrix::from_rows(&[[1.0, -2.0], [0.5, 3.0], [4.0, 0.0]]).unwrap();
        assert_eq!(SparseCsr::identity(3).spmm(&b).unwrap(), b);
    }

    #[test]
    fn zero_spmm_is_zero() {
        let b = DenseMatrix::filled(3, 2, 7.0);
        assert_eq!(SparseCsr::zeros(3, 3).spmm(&b).unwrap(), DenseMatrix::zeros(3, 2));
    }

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = SparseCsr::from_triplets(2, 3, &[(1, 2, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 2, 0.5)])
            .unwrap();
        assert_eq!(m.indptr(), &[0, 1, 3]);
        assert_eq!(m.indices(), &[1, 0, 2]);
        assert_eq!(m.values(), &[2.0, 3.0, 1.5]);
    }

    #[test]
    fn rejects_unsorted_columns() {
        assert!(SparseCsr::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseCsr::new(1, 3, vec![0, 1], vec![3], vec![1.0]).is_err());
        assert!(SparseCsr::new(2, 3, vec![0, 1], vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn spmm_dimension_mismatch() {
        let err = SparseCsr::identity(3).spmm(&DenseMatrix::zeros(2, 2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { op: "spmm", .. }));
    }

    #[test]
    fn linear_combination_merges_patterns() {
        let a = SparseCsr::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let b = SparseCsr::from_triplets(2, 2, &[(0, 1, 1.0), (1, 1, 1.0)]).unwrap();
        let c = a.linear_combination(2.0, &b, 3.0).unwrap();
        assert_eq!(c.to_dense().data(), &[2.0, 3.0, 0.0, 7.0]);
    }
}
