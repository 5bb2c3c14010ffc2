//! Timing of the topological-uncertainty scorer on growing random graphs.

use std::collections::BTreeSet;
use std::time::Instant;

use delta_core::graph::Graph;
use delta_core::numerics::DenseMatrix;
use delta_core::select::topo_uncertainty;
use delta_core::subnet::DualLogits;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    /// Edges per node; the edge count grows in proportion to the node count.
    pub edges_per_node: f64,
    pub classes: usize,
    pub hops: usize,
    /// Timed repetitions per size; the minimum is reported.
    pub reps: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![200, 400, 800],
            edges_per_node: 2.0,
            classes: 5,
            hops: 2,
            reps: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub nodes: usize,
    pub edges: usize,
    pub seconds: f64,
}

/// Uniform random simple graph with exactly `edges` undirected edges.
pub fn random_graph(nodes: usize, edges: usize, classes: usize, seed: u64) -> Result<Graph> {
    let max = nodes * nodes.saturating_sub(1) / 2;
    if edges > max {
        return Err(HarnessError::validation(format!("{edges} edges do not fit in {nodes} nodes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = BTreeSet::new();
    while set.len() < edges {
        let (a, b) = (rng.random_range(0..nodes), rng.random_range(0..nodes));
        if a != b {
            set.insert((a.min(b), a.max(b)));
        }
    }
    let list: Vec<(usize, usize)> = set.into_iter().collect();
    let features = DenseMatrix::zeros(nodes, 1);
    Ok(Graph::from_edges(&list, features, vec![None; nodes], vec![false; nodes], classes)?)
}

fn random_logits(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-3.0..3.0))
}

pub fn bench_uncertainty(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.reps == 0 || cfg.sizes.is_empty() || cfg.classes == 0 {
        return Err(HarnessError::validation("bench needs at least one size, one repetition and one class"));
    }
    if !(cfg.edges_per_node >= 0.0) {
        return Err(HarnessError::validation("edges_per_node must be nonnegative"));
    }
    cfg.sizes
        .iter()
        .map(|&nodes| {
            let edges = (cfg.edges_per_node * nodes as f64).round() as usize;
            let g = random_graph(nodes, edges, cfg.classes, cfg.seed ^ nodes as u64)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let dual = DualLogits::new(
                random_logits(nodes, cfg.classes, &mut rng),
                random_logits(nodes, cfg.classes, &mut rng),
            )?;
            let all: Vec<usize> = (0..nodes).collect();
            let mut best = f64::INFINITY;
            for _ in 0..cfg.reps {
                let start = Instant::now();
                let u = topo_uncertainty(&g, &dual, &all, cfg.hops)?;
                std::hint::black_box(u);
                best = best.min(start.elapsed().as_secs_f64());
            }
            Ok(BenchRow { nodes, edges, seconds: best })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_graph_has_requested_edges() {
        let g = random_graph(50, 100, 2, 1).unwrap();
        assert_eq!(g.num_edges(), 100);
        assert!(random_graph(3, 4, 2, 1).is_err());
    }
}
