use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, KHopExtractor};
use crate::numerics::{entropy, euclidean, softmax, DenseMatrix};
use crate::subnet::DualLogits;

/// `||s_edge,j - s_path,j||_2` for every node.
pub fn inconsistency(dual: &DualLogits) -> Vec<f64> {
    (0..dual.num_nodes())
        .map(|j| euclidean(dual.edge().row(j), dual.path().row(j)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    /// Ascending node ids.
    pub nodes: Vec<usize>,
    /// Distance of each candidate, aligned with `nodes`.
    pub distances: Vec<f64>,
}

impl CandidateSet {
    pub fn contains(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Unlabeled nodes whose distance strictly exceeds `gamma`.
pub fn candidates(distances: &[f64], gamma: f64, unlabeled: &[bool]) -> Result<CandidateSet> {
    if !(gamma >= 0.0) {
        return Err(invalid("gamma must be nonnegative"));
    }
    if distances.len() != unlabeled.len() {
        return Err(Error::DimensionMismatch {
            op: "candidates",
            lhs: (distances.len(), 1),
            rhs: (unlabeled.len(), 1),
        });
    }
    let (nodes, distances) = distances
        .iter()
        .enumerate()
        .filter(|&(j, &d)| unlabeled[j] && d > gamma)
        .map(|(j, &d)| (j, d))
        .unzip();
    Ok(CandidateSet { nodes, distances })
}

fn weighted_sum(logits: &DenseMatrix, members: &[usize], inverse_degree: &[f64]) -> Vec<f64> {
    let mut acc = alloc::vec![0.0; logits.cols()];
    for &m in members {
        let w = inverse_degree[m];
        for (a, &s) in acc.iter_mut().zip(logits.row(m)) {
            *a += w * s;
        }
    }
    acc
}

fn inverse_degrees(g: &Graph) -> Vec<f64> {
    let d = g.degrees();
    (0..g.num_nodes()).map(|i| d.inverse_weight(i)).collect()
}

/// `sum_{m in khop(center, K)} s_m / max(d_m, 1)`, including the center.
pub fn weighted_khop_logits(g: &Graph, logits: &DenseMatrix, center: usize, hops: usize) -> Result<Vec<f64>> {
    if logits.rows() != g.num_nodes() {
        return Err(Error::DimensionMismatch {
            op: "weighted_khop_logits",
            lhs: logits.shape(),
            rhs: (g.num_nodes(), logits.cols()),
        });
    }
    let mut members = Vec::new();
    KHopExtractor::new(g.num_nodes()).extract(g, center, hops, &mut members)?;
    Ok(weighted_sum(logits, &members, &inverse_degrees(g)))
}

/// Per node: entropy of the softmaxed weighted K-hop logits of the edge
/// subnetwork plus the same for the path subnetwork.
pub fn topo_uncertainty(g: &Graph, dual: &DualLogits, nodes: &[usize], hops: usize) -> Result<Vec<f64>> {
    if dual.num_nodes() != g.num_nodes() {
        return Err(Error::DimensionMismatch {
            op: "topo_uncertainty",
            lhs: (dual.num_nodes(), dual.num_classes()),
            rhs: (g.num_nodes(), dual.num_classes()),
        });
    }
    let inv = inverse_degrees(g);
    let mut extractor = KHopExtractor::new(g.num_nodes());
    let mut members = Vec::new();
    nodes
        .iter()
        .map(|&j| {
            extractor.extract(g, j, hops, &mut members)?;
            let edge = weighted_sum(dual.edge(), &members, &inv);
            let path = weighted_sum(dual.path(), &members, &inv);
            Ok(entropy(&softmax(&edge)) + entropy(&softmax(&path)))
        })
        .collect()
}

/// `D_j = sum_{i in S} d_i ||x_j^t - x_i^s|| / |S|` over labeled source nodes `S`,
/// with raw source degrees as weights.
pub fn domain_discrepancy(source: &Graph, target: &Graph, nodes: &[usize]) -> Result<Vec<f64>> {
    if source.num_features() != target.num_features() {
        return Err(Error::DimensionMismatch {
            op: "domain_discrepancy",
            lhs: source.features().shape(),
            rhs: target.features().shape(),
        });
    }
    let labeled = source.labeled_nodes();
    if labeled.is_empty() {
        return Err(Error::NoLabeledSource);
    }
    let degrees = source.degrees();
    nodes
        .iter()
        .map(|&j| {
            if j >= target.num_nodes() {
                return Err(Error::NodeOutOfRange {
                    node: j,
                    nodes: target.num_nodes(),
                });
            }
            let xj = target.features().row(j);
            let total: f64 = labeled
                .iter()
                .map(|&i| degrees.get(i) as f64 * euclidean(xj, source.features().row(i)))
                .sum();
            Ok(total / labeled.len() as f64)
        })
        .collect()
}
