//! End-to-end runs: train both subnetworks, pick annotations, retrain the
//! edge subnetwork with them and score it on the rest of the target graph.

use std::time::Instant;

use delta_core::graph::{generate_shifted_pair, Graph};
use delta_core::metrics::{macro_micro_f1, F1Scores};
use delta_core::numerics::DenseMatrix;
use delta_core::select::{baseline_select, select, BaselineInputs, SelectConfig, Selection};
use delta_core::subnet::{
    forward_edge, target_logits, train_dual, train_subnet, DualLogits, DualModel, EdgeSubnet, TrainConfig,
};

use crate::config::{DataSource, ExperimentSpec, Strategy};
use crate::error::{HarnessError, Result};
use crate::io::load_graph;
use crate::report::{EvalReport, SeedResult, SelectionReport};

/// Source and target graphs for one seed.
pub fn load_data(data: &DataSource, seed: u64) -> Result<(Graph, Graph)> {
    match data {
        DataSource::Synthetic(s) => Ok(generate_shifted_pair(&s.params(seed))?),
        DataSource::Files { source, target, classes } => {
            Ok((load_graph(source, *classes)?, load_graph(target, *classes)?))
        }
    }
}

/// Everything selection needs, computed once per seed.
#[derive(Debug, Clone)]
pub struct Trained {
    pub seed: u64,
    pub source: Graph,
    pub target: Graph,
    pub model: DualModel,
    pub logits: DualLogits,
    pub edge_embeddings: DenseMatrix,
}

pub fn seeded(train: &TrainConfig, seed: u64) -> TrainConfig {
    TrainConfig { seed, ..train.clone() }
}

impl Trained {
    pub fn new(source: Graph, target: Graph, train: &TrainConfig, seed: u64) -> Result<Self> {
        let model = train_dual(&source, &target, &seeded(train, seed))?;
        Self::from_model(source, target, model, seed)
    }

    pub fn from_model(source: Graph, target: Graph, model: DualModel, seed: u64) -> Result<Self> {
        let logits = target_logits(&model, &target)?;
        let (edge_embeddings, _) = forward_edge(&model.edge.net, &target)?;
        Ok(Self {
            seed,
            source,
            target,
            model,
            logits,
            edge_embeddings,
        })
    }
}

/// Annotation set for one strategy, with the score table when it is DELTA.
pub fn choose(t: &Trained, strategy: Strategy, cfg: &SelectConfig) -> Result<SelectionReport> {
    cfg.validate()?;
    let (selected, detail): (Vec<usize>, Option<Selection>) = match strategy.baseline() {
        None => {
            let s = select(&t.source, &t.target, &t.logits, cfg)?;
            (s.selected.clone(), Some(s))
        }
        Some(kind) => {
            let inputs = BaselineInputs {
                target: &t.target,
                edge_logits: Some(t.logits.edge()),
                edge_embeddings: Some(&t.edge_embeddings),
            };
            (baseline_select(kind, inputs, cfg.budget, t.seed)?, None)
        }
    };
    Ok(SelectionReport {
        strategy,
        seed: t.seed,
        config: cfg.clone(),
        candidate_count: detail.as_ref().map_or(0, |s| s.candidate_count),
        scores: detail.map(|s| s.table.rows).unwrap_or_default(),
        selected,
    })
}

/// Retrains the edge subnetwork from its seeded initialization with the
/// annotated target nodes added to the supervision, then scores it on the
/// target nodes that are still unlabeled and carry a ground-truth label.
pub fn retrain_and_evaluate(
    source: &Graph,
    target: &Graph,
    selected: &[usize],
    train: &TrainConfig,
    seed: u64,
) -> Result<F1Scores> {
    if let Some(&n) = selected.iter().find(|&&n| target.labels().get(n).is_none_or(|l| l.is_none())) {
        return Err(HarnessError::validation(format!("selected node {n} has no ground-truth label")));
    }
    let annotated = target.with_annotations(selected)?;
    let cfg = seeded(train, seed);
    let fresh = EdgeSubnet::init(source.num_features(), source.num_classes(), &cfg);
    let trained = train_subnet(fresh, source, &annotated, &cfg, delta_core::subnet::EDGE_STREAM)?;
    evaluate(&trained.net, &annotated)
}

/// Macro/Micro-F1 of the edge subnetwork on unlabeled nodes with known truth.
pub fn evaluate(net: &EdgeSubnet, target: &Graph) -> Result<F1Scores> {
    let (_, logits) = forward_edge(net, target)?;
    let predictions = logits.row_argmax();
    let mask: Vec<bool> = (0..target.num_nodes())
        .map(|i| !target.labeled_mask()[i] && target.labels()[i].is_some())
        .collect();
    Ok(macro_micro_f1(&predictions, &target.label_indices(), &mask, target.num_classes())?)
}

/// One strategy and selection config evaluated against shared training.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub strategy: Strategy,
    pub select: SelectConfig,
}

fn run_seed(spec: &ExperimentSpec, variants: &[Variant], seed: u64) -> Result<Vec<SeedResult>> {
    let (source, target) = load_data(&spec.data, seed)?;
    let trained = Trained::new(source, target, &spec.train, seed)?;
    variants
        .iter()
        .map(|v| {
            let start = Instant::now();
            let report = choose(&trained, v.strategy, &v.select)?;
            let selection_seconds = start.elapsed().as_secs_f64();
            let scores = retrain_and_evaluate(&trained.source, &trained.target, &report.selected, &spec.train, seed)?;
            Ok(SeedResult {
                seed,
                macro_f1: scores.macro_f1,
                micro_f1: scores.micro_f1,
                selection_seconds,
                selected: report.selected,
            })
        })
        .collect()
}

/// Runs several variants, training the dual model once per seed. Seeds run
/// on separate threads; reports list seeds in order.
pub fn run_variants(spec: &ExperimentSpec, variants: &[Variant]) -> Result<Vec<EvalReport>> {
    spec.validate()?;
    for v in variants {
        v.select.validate()?;
    }
    let seeds = spec.seed_list();
    let per_seed: Vec<Result<Vec<SeedResult>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| scope.spawn(move || run_seed(spec, variants, seed).map_err(|e| e.with_seed(seed))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    });
    let mut columns: Vec<Vec<SeedResult>> = vec![Vec::with_capacity(seeds.len()); variants.len()];
    for results in per_seed {
        for (column, r) in columns.iter_mut().zip(results?) {
            column.push(r);
        }
    }
    Ok(variants
        .iter()
        .zip(columns)
        .map(|(v, rows)| EvalReport::new(v.strategy, spec.train.clone(), v.select.clone(), rows))
        .collect())
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<EvalReport> {
    let variant = Variant {
        strategy: spec.strategy,
        select: spec.select.clone(),
    };
    let mut reports = run_variants(spec, &[variant])?;
    Ok(reports.remove(0))
}
