//! Attributed undirected graphs, degree statistics, K-hop neighborhoods,
//! propagation operators and a synthetic two-domain generator.

mod khop;
mod operators;
mod synth;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, SparseCsr};

pub use khop::{khop, KHopExtractor, KHopSubgraph};
pub use operators::{normalized_gcn_operator, pan_operator, path_propagator};
pub use synth::{generate_shifted_pair, random_class_means, DomainShift, ShiftedPairParams};

/// Immutable attributed graph. Adjacency is symmetric, unweighted, and stores
/// no self-loops. Labels hold ground truth where known; `labeled` marks the
/// nodes whose labels may be used for supervision.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: SparseCsr,
    features: DenseMatrix,
    labels: Vec<Option<usize>>,
    labeled: Vec<bool>,
    num_classes: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are symmetrized, duplicates
    /// collapsed and self-loops dropped.
    pub fn from_edges(
        edges: &[(usize, usize)],
        features: DenseMatrix,
        labels: Vec<Option<usize>>,
        labeled: Vec<bool>,
        num_classes: usize,
    ) -> Result<Self> {
        let n = features.rows();
        let mut triplets = Vec::with_capacity(edges.len() * 2);
        for &(a, b) in edges {
            for node in [a, b] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, nodes: n });
                }
            }
            if a != b {
                triplets.push((a, b, 1.0));
                triplets.push((b, a, 1.0));
            }
        }
        let summed = SparseCsr::from_triplets(n, n, &triplets)?;
        let adjacency = SparseCsr::new(
            n,
            n,
            summed.indptr().to_vec(),
            summed.indices().to_vec(),
            alloc::vec![1.0; summed.nnz()],
        )?;
        Self::new(adjacency, features, labels, labeled, num_classes)
    }

    /// Validates prebuilt parts.
    pub fn new(
        adjacency: SparseCsr,
        features: DenseMatrix,
        labels: Vec<Option<usize>>,
        labeled: Vec<bool>,
        num_classes: usize,
    ) -> Result<Self> {
        let n = features.rows();
        if adjacency.rows() != n || adjacency.cols() != n {
            return Err(Error::InvalidGraph(format!(
                "adjacency is {}x{} but there are {n} feature rows",
                adjacency.rows(),
                adjacency.cols()
            )));
        }
        if labels.len() != n || labeled.len() != n {
            return Err(Error::InvalidGraph(format!(
                "{n} nodes but {} labels and {} mask entries",
                labels.len(),
                labeled.len()
            )));
        }
        if !adjacency.is_symmetric() {
            return Err(Error::InvalidGraph("adjacency is not symmetric".into()));
        }
        if (0..n).any(|i| adjacency.get(i, i) != 0.0) {
            return Err(Error::InvalidGraph("adjacency stores a self-loop".into()));
        }
        for (i, (label, &is_labeled)) in labels.iter().zip(&labeled).enumerate() {
            match label {
                Some(c) if *c >= num_classes => {
                    return Err(Error::InvalidGraph(format!(
                        "node {i} has class {c} but there are {num_classes} classes"
                    )))
                }
                None if is_labeled => {
                    return Err(Error::InvalidGraph(format!(
                        "node {i} is marked labeled but has no label"
                    )))
                }
                _ => {}
            }
        }
        Ok(Self {
            adjacency,
            features,
            labels,
            labeled,
            num_classes,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.adjacency.nnz() / 2
    }

    /// Undirected edges per node, the convention of the ArnetMiner statistics
    /// (e.g. 15,602 edges over 9,360 nodes reads as 1.667).
    pub fn edges_per_node(&self) -> f64 {
        if self.num_nodes() == 0 {
            0.0
        } else {
            self.num_edges() as f64 / self.num_nodes() as f64
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn adjacency(&self) -> &SparseCsr {
        &self.adjacency
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn labeled_mask(&self) -> &[bool] {
        &self.labeled
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        self.adjacency.row_indices(node)
    }

    /// Labels with unknown entries mapped to class 0; pair with a mask.
    pub fn label_indices(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.unwrap_or(0)).collect()
    }

    pub fn labeled_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&i| self.labeled[i]).collect()
    }

    pub fn unlabeled_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&i| !self.labeled[i]).collect()
    }

    pub fn unlabeled_mask(&self) -> Vec<bool> {
        self.labeled.iter().map(|&l| !l).collect()
    }

    pub fn degrees(&self) -> DegreeVector {
        DegreeVector(
            (0..self.num_nodes())
                .map(|i| self.neighbors(i).len())
                .collect(),
        )
    }

    /// Same graph with a different labeled mask.
    pub fn with_labeled_mask(&self, labeled: Vec<bool>) -> Result<Self> {
        Self::new(
            self.adjacency.clone(),
            self.features.clone(),
            self.labels.clone(),
            labeled,
            self.num_classes,
        )
    }

    /// Marks additional nodes as labeled. Each must carry a ground-truth label.
    pub fn with_annotations(&self, nodes: &[usize]) -> Result<Self> {
        let mut labeled = self.labeled.clone();
        for &node in nodes {
            if node >= self.num_nodes() {
                return Err(Error::NodeOutOfRange {
                    node,
                    nodes: self.num_nodes(),
                });
            }
            labeled[node] = true;
        }
        self.with_labeled_mask(labeled)
    }

    /// Same graph with every node unlabeled.
    pub fn without_supervision(&self) -> Self {
        let mut g = self.clone();
        g.labeled.iter_mut().for_each(|l| *l = false);
        g
    }

    /// Relabels nodes: old node `i` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_nodes();
        let mut seen = alloc::vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || core::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidGraph("not a permutation".into()));
        }
        let mut edges = Vec::with_capacity(self.num_edges());
        for i in 0..n {
            for &j in self.neighbors(i) {
                if i < j {
                    edges.push((perm[i], perm[j]));
                }
            }
        }
        let mut features = DenseMatrix::zeros(n, self.num_features());
        let mut labels = alloc::vec![None; n];
        let mut labeled = alloc::vec![false; n];
        for i in 0..n {
            features.row_mut(perm[i]).copy_from_slice(self.features.row(i));
            labels[perm[i]] = self.labels[i];
            labeled[perm[i]] = self.labeled[i];
        }
        Self::from_edges(&edges, features, labels, labeled, self.num_classes)
    }
}

/// Per-node neighbor counts on the graph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVector(Vec<usize>);

impl DegreeVector {
    pub fn get(&self, node: usize) -> usize {
        self.0[node]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// `1 / max(d, 1)`: isolated nodes are treated as degree one.
    pub fn inverse_weight(&self, node: usize) -> f64 {
        1.0 / self.0[node].max(1) as f64
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn unlabeled(edges: &[(usize, usize)], n: usize, features: usize) -> Graph {
        let x = DenseMatrix::from_fn(n, features, |r, c| ((r * 7 + c * 3) % 5) as f64 - 2.0);
        Graph::from_edges(edges, x, alloc::vec![None; n], alloc::vec![false; n], 2).unwrap()
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        unlabeled(&edges, n, 2)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use alloc::vec;

    #[test]
    fn duplicate_and_reversed_edges_collapse() {
        let g = Graph::from_edges(
            &[(0, 1), (0, 1), (1, 0), (1, 1)],
            DenseMatrix::zeros(2, 1),
            vec![None; 2],
            vec![false; 2],
            1,
        )
        .unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.degrees().as_slice(), &[1, 1]);
    }

    #[test]
    fn path_degrees() {
        assert_eq!(path(3).degrees().as_slice(), &[1, 2, 1]);
        assert_eq!(unlabeled(&[], 4, 1).degrees().as_slice(), &[0, 0, 0, 0]);
    }

    #[test]
    fn out_of_range_edge() {
        let err = Graph::from_edges(&[(0, 5)], DenseMatrix::zeros(3, 1), vec![None; 3], vec![false; 3], 1)
            .unwrap_err();
        assert_eq!(err, Error::NodeOutOfRange { node: 5, nodes: 3 });
    }

    #[test]
    fn labeled_node_needs_label() {
        let err = Graph::from_edges(&[], DenseMatrix::zeros(2, 1), vec![Some(0), None], vec![true, true], 1)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidGraph(_)));
        let err = Graph::from_edges(&[], DenseMatrix::zeros(1, 1), vec![Some(3)], vec![true], 2).unwrap_err();
        assert!(matches!(err, Error::InvalidGraph(_)));
    }

    #[test]
    fn asymmetric_adjacency_rejected() {
        let a = SparseCsr::from_triplets(2, 2, &[(0, 1, 1.0)]).unwrap();
        assert!(Graph::new(a, DenseMatrix::zeros(2, 1), vec![None; 2], vec![false; 2], 1).is_err());
    }

    #[test]
    fn clamped_inverse_degree() {
        let d = unlabeled(&[(0, 1), (0, 2)], 4, 1).degrees();
        assert_eq!(d.inverse_weight(0), 0.5);
        assert_eq!(d.inverse_weight(3), 1.0);
    }

    #[test]
    fn permutation_moves_rows_and_edges() {
        let g = path(3);
        let p = g.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.degrees().as_slice(), &[2, 1, 1]);
        assert_eq!(p.features().row(2), g.features().row(0));
        assert!(g.permuted(&[0, 0, 1]).is_err());
    }
}
