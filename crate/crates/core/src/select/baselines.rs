use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::rank_top_k;
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::numerics::{entropy, euclidean, softmax, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum BaselineKind {
    Random,
    Degree,
    Density,
    Uncertainty,
}

/// Whatever a baseline may need; logits and embeddings come from the edge subnetwork.
#[derive(Debug, Clone, Copy)]
pub struct BaselineInputs<'a> {
    pub target: &'a Graph,
    pub edge_logits: Option<&'a DenseMatrix>,
    pub edge_embeddings: Option<&'a DenseMatrix>,
}

pub fn baseline_select(kind: BaselineKind, inputs: BaselineInputs<'_>, k: usize, seed: u64) -> Result<Vec<usize>> {
    let g = inputs.target;
    let pool = g.unlabeled_nodes();
    if k == 0 {
        return Err(invalid("budget k must be at least 1"));
    }
    if k > pool.len() {
        return Err(Error::BudgetExceedsPool {
            budget: k,
            pool: pool.len(),
        });
    }
    let check_rows = |m: &DenseMatrix| -> Result<()> {
        if m.rows() != g.num_nodes() {
            return Err(Error::DimensionMismatch {
                op: "baseline_select",
                lhs: m.shape(),
                rhs: (g.num_nodes(), m.cols()),
            });
        }
        Ok(())
    };
    let scored: Vec<(usize, f64)> = match kind {
        BaselineKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            return Ok(sample(&mut rng, pool.len(), k).into_iter().map(|i| pool[i]).collect());
        }
        BaselineKind::Degree => {
            let d = g.degrees();
            pool.iter().map(|&n| (n, d.get(n) as f64)).collect()
        }
        BaselineKind::Uncertainty => {
            let logits = inputs
                .edge_logits
                .ok_or_else(|| invalid("uncertainty baseline needs edge-subnetwork logits"))?;
            check_rows(logits)?;
            pool.iter()
                .map(|&n| (n, entropy(&softmax(logits.row(n)))))
                .collect()
        }
        BaselineKind::Density => {
            let emb = inputs
                .edge_embeddings
                .ok_or_else(|| invalid("density baseline needs edge-subnetwork embeddings"))?;
            check_rows(emb)?;
            let clusters = kmeans(emb, g.num_classes().min(emb.rows()), 50, seed)?;
            pool.iter()
                .map(|&n| {
                    let c = clusters.assignments[n];
                    let dist = euclidean(emb.row(n), clusters.centroids.row(c));
                    (n, 1.0 / (1.0 + dist))
                })
                .collect()
        }
    };
    Ok(rank_top_k(&scored, k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: DenseMatrix,
    pub assignments: Vec<usize>,
}

/// Lloyd iterations from `clusters` distinct seeded initial points. An
/// emptied cluster keeps its previous centroid.
pub fn kmeans(points: &DenseMatrix, clusters: usize, iterations: usize, seed: u64) -> Result<KMeans> {
    if clusters == 0 || clusters > points.rows() {
        return Err(invalid("cluster count must lie in 1..=number of points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init: Vec<usize> = sample(&mut rng, points.rows(), clusters).into_vec();
    let mut centroids = points.select_rows(&init);
    let mut assignments = alloc::vec![0usize; points.rows()];
    for _ in 0..iterations {
        let mut changed = false;
        for (i, slot) in assignments.iter_mut().enumerate() {
            let best = nearest(points.row(i), &centroids);
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        let mut sums = DenseMatrix::zeros(clusters, points.cols());
        let mut counts = alloc::vec![0usize; clusters];
        for (i, &c) in assignments.iter().enumerate() {
            counts[c] += 1;
            for (s, &x) in sums.row_mut(c).iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }
        for c in 0..clusters {
            if counts[c] > 0 {
                for (dst, &s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s / counts[c] as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(KMeans {
        centroids,
        assignments,
    })
}

fn nearest(x: &[f64], centroids: &DenseMatrix) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for c in 0..centroids.rows() {
        let d = euclidean(x, centroids.row(c));
        if d < best_dist {
            best_dist = d;
            best = c;
        }
    }
    best
}
