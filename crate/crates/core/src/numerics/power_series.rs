//! Symmetrically normalized weighted sum of adjacency powers,
//! `M^{-1/2} (sum_n w_n A^n) M^{-1/2}`, applied without forming `A^n`.
//!
//! `M` is the diagonal of row sums of the weighted power sum. Those row sums
//! are `sum_n w_n (A^n 1)`, so only the vectors `A^n 1` are precomputed and the
//! weights may change freely between applications.

use alloc::format;
use alloc::vec::Vec;

use super::{DenseMatrix, SparseCsr};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone)]
pub struct PowerSeriesOperator {
    adjacency: SparseCsr,
    power_row_sums: Vec<Vec<f64>>,
}

/// Intermediates kept from a forward application for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct PowerSeriesCache {
    scale: Vec<f64>,
    normalizer: Vec<f64>,
    weighted_sum: DenseMatrix,
    terms: Vec<DenseMatrix>,
}

impl PowerSeriesOperator {
    pub fn new(adjacency: SparseCsr, max_power: usize) -> Result<Self> {
        if adjacency.rows() != adjacency.cols() {
            return Err(invalid("power series needs a square adjacency"));
        }
        let n = adjacency.rows();
        let mut power_row_sums = Vec::with_capacity(max_power + 1);
        let mut current = alloc::vec![1.0; n];
        power_row_sums.push(current.clone());
        for _ in 0..max_power {
            current = adjacency.spmv(&current)?;
            power_row_sums.push(current.clone());
        }
        Ok(Self {
            adjacency,
            power_row_sums,
        })
    }

    pub fn max_power(&self) -> usize {
        self.power_row_sums.len() - 1
    }

    pub fn size(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn adjacency(&self) -> &SparseCsr {
        &self.adjacency
    }

    fn check_weights(&self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.power_row_sums.len() {
            return Err(invalid(format!(
                "expected {} path weights, got {}",
                self.power_row_sums.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("path weights must be finite and strictly positive"));
        }
        Ok(())
    }

    /// Diagonal of `M`: row sums of `sum_n w_n A^n`.
    pub fn normalizer(&self, weights: &[f64]) -> Result<Vec<f64>> {
        self.check_weights(weights)?;
        let mut m = alloc::vec![0.0; self.size()];
        for (w, sums) in weights.iter().zip(&self.power_row_sums) {
            for (mi, s) in m.iter_mut().zip(sums) {
                *mi += w * s;
            }
        }
        if m.iter().any(|&v| v <= 0.0) {
            return Err(Error::Internal("zero row sum in path normalizer"));
        }
        Ok(m)
    }

    pub fn apply(&self, weights: &[f64], h: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(self.forward(weights, h)?.0)
    }

    pub(crate) fn forward(
        &self,
        weights: &[f64],
        h: &DenseMatrix,
    ) -> Result<(DenseMatrix, PowerSeriesCache)> {
        if h.rows() != self.size() {
            return Err(Error::DimensionMismatch {
                op: "power_series",
                lhs: (self.size(), self.size()),
                rhs: h.shape(),
            });
        }
        let normalizer = self.normalizer(weights)?;
        let scale: Vec<f64> = normalizer.iter().map(|&m| 1.0 / libm::sqrt(m)).collect();
        let mut term = scale_rows(h, &scale);
        let mut weighted_sum = term.scale(weights[0]);
        let mut terms = Vec::with_capacity(weights.len());
        for &w in &weights[1..] {
            let next = self.adjacency.spmm(&term)?;
            terms.push(term);
            weighted_sum.axpy(w, &next);
            term = next;
        }
        terms.push(term);
        let out = scale_rows(&weighted_sum, &scale);
        Ok((
            out,
            PowerSeriesCache {
                scale,
                normalizer,
                weighted_sum,
                terms,
            },
        ))
    }

    /// Returns gradients w.r.t. the input matrix and the path weights.
    pub(crate) fn backward(
        &self,
        weights: &[f64],
        h: &DenseMatrix,
        cache: &PowerSeriesCache,
        grad_out: &DenseMatrix,
    ) -> Result<(DenseMatrix, Vec<f64>)> {
        let grad_sum = scale_rows(grad_out, &cache.scale);
        let mut grad_weights: Vec<f64> = cache
            .terms
            .iter()
            .map(|t| super::dense::dot(grad_sum.data(), t.data()))
            .collect();

        // Horner: sum_n w_n (A^T)^n G
        let last = weights.len() - 1;
        let mut grad_term = grad_sum.scale(weights[last]);
        for n in (0..last).rev() {
            grad_term = self.adjacency.tr_spmm(&grad_term)?;
            grad_term.axpy(weights[n], &grad_sum);
        }

        let cols = h.cols();
        let mut grad_h = grad_term.clone();
        for i in 0..self.size() {
            let s = cache.scale[i];
            let mut grad_scale = 0.0;
            for c in 0..cols {
                grad_scale += grad_out.get(i, c) * cache.weighted_sum.get(i, c)
                    + grad_term.get(i, c) * h.get(i, c);
            }
            for v in grad_h.row_mut(i) {
                *v *= s;
            }
            let grad_norm = -0.5 * grad_scale * s / cache.normalizer[i];
            for (gw, sums) in grad_weights.iter_mut().zip(&self.power_row_sums) {
                *gw += grad_norm * sums[i];
            }
        }
        Ok((grad_h, grad_weights))
    }

    /// Materializes the operator as a sparse matrix.
    pub fn to_sparse(&self, weights: &[f64]) -> Result<SparseCsr> {
        let normalizer = self.normalizer(weights)?;
        let n = self.size();
        let mut power = SparseCsr::identity(n);
        let mut total = SparseCsr::zeros(n, n).linear_combination(0.0, &power, weights[0])?;
        for &w in &weights[1..] {
            power = power.spgemm(&self.adjacency)?;
            total = total.linear_combination(1.0, &power, w)?;
        }
        let scale: Vec<f64> = normalizer.iter().map(|&m| 1.0 / libm::sqrt(m)).collect();
        Ok(total.scale_rows_cols(&scale, &scale))
    }
}

fn scale_rows(m: &DenseMatrix, scale: &[f64]) -> DenseMatrix {
    let mut out = m.clone();
    for (r, &s) in scale.iter().enumerate() {
        for v in out.row_mut(r) {
            *v *= s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> SparseCsr {
        SparseCsr::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap()
    }

    #[test]
    fn zero_length_is_identity() {
        let op = PowerSeriesOperator::new(single_edge(), 0).unwrap();
        assert_eq!(op.to_sparse(&[1.0]).unwrap().to_dense(), DenseMatrix::identity(2));
    }

    #[test]
    fn single_edge_length_one_halves() {
        let op = PowerSeriesOperator::new(single_edge(), 1).unwrap();
        let dense = op.to_sparse(&[1.0, 1.0]).unwrap().to_dense();
        for &v in dense.data() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_positive_weights() {
        let op = PowerSeriesOperator::new(single_edge(), 1).unwrap();
        assert!(op.normalizer(&[0.0, 1.0]).is_err());
        assert!(op.normalizer(&[1.0]).is_err());
    }

    #[test]
    fn apply_matches_materialized_operator() {
        let a = SparseCsr::from_triplets(
            4,
            4,
            &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0), (2, 3, 1.0), (3, 2, 1.0)],
        )
        .unwrap();
        let op = PowerSeriesOperator::new(a, 3).unwrap();
        let w = [1.0, 0.7, 0.4, 0.2];
        let h = DenseMatrix::from_fn(4, 3, |r, c| libm::sin((r * 3 + c) as f64));
        let direct = op.apply(&w, &h).unwrap();
        let via_sparse = op.to_sparse(&w).unwrap().spmm(&h).unwrap();
        for (x, y) in direct.data().iter().zip(via_sparse.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
