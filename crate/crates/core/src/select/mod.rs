//! One-shot annotation selection on the target graph.
//!
//! Candidates are the unlabeled nodes where the two subnetworks disagree by
//! more than `gamma` (Euclidean distance between logit rows). Each candidate
//! is scored by a topological uncertainty `U` (entropies of degree-weighted
//! K-hop logit sums from both subnetworks) plus a domain discrepancy `D`
//! (degree-weighted feature distance to the labeled source nodes), and the
//! top `k` by `U + D` are returned.

mod baselines;
mod scores;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::subnet::DualLogits;

pub use baselines::{baseline_select, kmeans, BaselineInputs, BaselineKind, KMeans};
pub use scores::{
    candidates, domain_discrepancy, inconsistency, topo_uncertainty, weighted_khop_logits,
    CandidateSet,
};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelectConfig {
    /// Consistency threshold; candidates satisfy `distance > gamma`.
    pub gamma: f64,
    /// Hop radius of the neighborhoods aggregated for `U`.
    pub hops: usize,
    /// Annotation budget `k`.
    pub budget: usize,
    /// Min-max normalize `U` and `D` over the ranked set before summing.
    /// Off by default, which ranks by the raw sum.
    pub normalize: bool,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            gamma: 0.3,
            hops: 2,
            budget: 25,
            normalize: false,
        }
    }
}

impl SelectConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(invalid("budget k must be at least 1"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(invalid(format!("gamma must be finite and nonnegative, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Scores of one ranked node.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreRow {
    pub node: usize,
    /// Cross-subnetwork logit distance.
    pub distance: f64,
    /// Topological uncertainty, nats.
    pub uncertainty: f64,
    /// Domain discrepancy, feature-distance units.
    pub discrepancy: f64,
    /// Ranking score; `uncertainty + discrepancy` unless normalized.
    pub composite: f64,
    /// `false` for nodes scored only because the candidate set was smaller than the budget.
    pub candidate: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn get(&self, node: usize) -> Option<&ScoreRow> {
        self.rows.iter().find(|r| r.node == node)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Exactly `budget` distinct unlabeled target nodes, best first.
    pub selected: Vec<usize>,
    pub candidate_count: usize,
    pub table: ScoreTable,
}

/// Sorts by descending score with ascending node id breaking ties and keeps `k`.
pub fn rank_top_k(scored: &[(usize, f64)], k: usize) -> Vec<usize> {
    let mut order: Vec<(usize, f64)> = scored.to_vec();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    order.into_iter().take(k).map(|(n, _)| n).collect()
}

fn min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return alloc::vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

fn score_rows(
    source: &Graph,
    target: &Graph,
    dual: &DualLogits,
    distances: &[f64],
    nodes: &[usize],
    cfg: &SelectConfig,
    candidate: bool,
) -> Result<Vec<ScoreRow>> {
    if nodes.is_empty() {
        return Ok(Vec::new());
    }
    let u = topo_uncertainty(target, dual, nodes, cfg.hops)?;
    let d = domain_discrepancy(source, target, nodes)?;
    let (u_rank, d_rank) = if cfg.normalize {
        (min_max(&u), min_max(&d))
    } else {
        (u.clone(), d.clone())
    };
    Ok(nodes
        .iter()
        .enumerate()
        .map(|(i, &node)| ScoreRow {
            node,
            distance: distances[node],
            uncertainty: u[i],
            discrepancy: d[i],
            composite: u_rank[i] + d_rank[i],
            candidate,
        })
        .collect())
}

/// Ranks candidates by `U + D` and returns the top `budget` nodes. When fewer
/// than `budget` candidates pass the threshold, the remaining slots are
/// filled by scoring every other unlabeled node the same way.
pub fn select(source: &Graph, target: &Graph, dual: &DualLogits, cfg: &SelectConfig) -> Result<Selection> {
    cfg.validate()?;
    if dual.num_nodes() != target.num_nodes() {
        return Err(Error::DimensionMismatch {
            op: "select",
            lhs: (dual.num_nodes(), dual.num_classes()),
            rhs: (target.num_nodes(), target.num_classes()),
        });
    }
    let pool = target.unlabeled_nodes();
    if cfg.budget > pool.len() {
        return Err(Error::BudgetExceedsPool {
            budget: cfg.budget,
            pool: pool.len(),
        });
    }
    let distances = inconsistency(dual);
    let set = candidates(&distances, cfg.gamma, &target.unlabeled_mask())?;

    let mut rows = score_rows(source, target, dual, &distances, &set.nodes, cfg, true)?;
    let ranked: Vec<(usize, f64)> = rows.iter().map(|r| (r.node, r.composite)).collect();
    let mut selected = rank_top_k(&ranked, cfg.budget);

    if selected.len() < cfg.budget {
        let rest: Vec<usize> = pool.into_iter().filter(|n| !set.contains(*n)).collect();
        let extra = score_rows(source, target, dual, &distances, &rest, cfg, false)?;
        let ranked: Vec<(usize, f64)> = extra.iter().map(|r| (r.node, r.composite)).collect();
        selected.extend(rank_top_k(&ranked, cfg.budget - selected.len()));
        rows.extend(extra);
    }

    Ok(Selection {
        selected,
        candidate_count: set.nodes.len(),
        table: ScoreTable { rows },
    })
}
