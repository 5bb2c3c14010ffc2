use alloc::vec::Vec;

use super::Graph;
use crate::error::{invalid, Result};
use crate::numerics::{PowerSeriesOperator, SparseCsr};

/// `D~^{-1/2} (A + I) D~^{-1/2}` with `D~` the degree matrix of `A + I`.
pub fn normalized_gcn_operator(g: &Graph) -> SparseCsr {
    let n = g.num_nodes();
    let with_loops = g
        .adjacency()
        .linear_combination(1.0, &SparseCsr::identity(n), 1.0)
        .expect("adjacency is square");
    let scale: Vec<f64> = with_loops
        .row_sums()
        .into_iter()
        .map(|d| 1.0 / libm::sqrt(d))
        .collect();
    with_loops.scale_rows_cols(&scale, &scale)
}

/// Path aggregation operator `M^{-1/2} (sum_{n=0}^{L} w_n A^n) M^{-1/2}` with
/// `L = weights.len() - 1` and `M` the row sums of the weighted power sum.
pub fn pan_operator(g: &Graph, weights: &[f64]) -> Result<SparseCsr> {
    if weights.is_empty() {
        return Err(invalid("at least the zeroth path weight is required"));
    }
    path_propagator(g, weights.len() - 1)?.to_sparse(weights)
}

/// Operator that applies the path aggregation for arbitrary weights without
/// materializing adjacency powers.
pub fn path_propagator(g: &Graph, max_length: usize) -> Result<PowerSeriesOperator> {
    PowerSeriesOperator::new(g.adjacency().clone(), max_length)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::numerics::DenseMatrix;

    #[test]
    fn isolated_node_operator_is_one() {
        let g = unlabeled(&[], 1, 1);
        assert_eq!(normalized_gcn_operator(&g).to_dense().data(), &[1.0]);
    }

    #[test]
    fn single_edge_gcn_is_half() {
        let g = unlabeled(&[(0, 1)], 2, 1);
        let a = normalized_gcn_operator(&g).to_dense();
        assert!(a.data().iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn pan_zero_length_is_identity() {
        let g = path(4);
        assert_eq!(pan_operator(&g, &[1.0]).unwrap().to_dense(), DenseMatrix::identity(4));
    }

    #[test]
    fn pan_single_edge() {
        let g = unlabeled(&[(0, 1)], 2, 1);
        let p = pan_operator(&g, &[1.0, 1.0]).unwrap().to_dense();
        assert!(p.data().iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn pan_rejects_empty_weights() {
        assert!(pan_operator(&path(2), &[]).is_err());
    }
}
