use alloc::vec::Vec;

use super::adam::Adam;
use super::network::{forward_eval, EDGE_STREAM, PATH_STREAM};
use super::{EdgeSubnet, PathSubnet, Subnetwork, TrainConfig};
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::numerics::{dropout_mask, DenseMatrix, DropoutKey, GradTape, Var};

/// Source and target graphs with their propagation structures prebuilt.
pub struct TrainingData<'g, P> {
    source: &'g Graph,
    target: &'g Graph,
    source_propagator: P,
    target_propagator: P,
    source_labels: Vec<usize>,
    target_labels: Vec<usize>,
}

impl<'g, P> TrainingData<'g, P> {
    pub fn new<N: Subnetwork<Propagator = P>>(net: &N, source: &'g Graph, target: &'g Graph) -> Result<Self> {
        if source.num_features() != target.num_features() {
            return Err(invalid("source and target feature widths differ"));
        }
        if source.num_classes() != target.num_classes() {
            return Err(invalid("source and target class counts differ"));
        }
        if source.labeled_nodes().is_empty() {
            return Err(Error::NoLabeledSource);
        }
        Ok(Self {
            source,
            target,
            source_propagator: net.propagator(source)?,
            target_propagator: net.propagator(target)?,
            source_labels: source.label_indices(),
            target_labels: target.label_indices(),
        })
    }
}

/// Options for one evaluation of the training objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSettings {
    /// Dropout site key; `None` evaluates without dropout. The layer field is
    /// offset per domain so source and target draw different masks.
    pub dropout: Option<DropoutKey>,
    /// Whether the adversarial domain term is recorded at all.
    pub adversarial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossBreakdown {
    pub supervised: f64,
    pub adversarial: f64,
    /// `supervised + lambda * adversarial`.
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRow {
    pub epoch: usize,
    pub supervised: f64,
    pub adversarial: f64,
    pub total: f64,
}

/// Evaluates the objective and returns gradients aligned with `net.parameters()`.
///
/// Supervised loss is the mean cross-entropy over all labeled nodes of both
/// graphs pooled together. The adversarial term is
/// `BCE(D(z_s), 1) + BCE(D(z_t), 0)`; the discriminator descends it while the
/// extractor receives its gradient reversed and scaled by lambda.
pub fn evaluate_objective<N: Subnetwork>(
    net: &N,
    data: &TrainingData<'_, N::Propagator>,
    settings: ObjectiveSettings,
) -> Result<(LossBreakdown, Vec<DenseMatrix>)> {
    let mut tape = GradTape::new();
    let params: Vec<Var> = net
        .parameters()
        .into_iter()
        .map(|p| tape.parameter(p.clone()))
        .collect();
    let disc = *params.last().expect("discriminator parameter");

    let (emb_s, logits_s) = record_domain(
        net,
        &mut tape,
        &params,
        data.source,
        &data.source_propagator,
        settings.dropout,
        0,
    )?;
    let (emb_t, logits_t) = record_domain(
        net,
        &mut tape,
        &params,
        data.target,
        &data.target_propagator,
        settings.dropout,
        1,
    )?;

    let mut supervised = tape.cross_entropy(logits_s, &data.source_labels, data.source.labeled_mask())?;
    let n_s = count(data.source.labeled_mask());
    let n_t = count(data.target.labeled_mask());
    if n_t > 0 {
        let target_ce = tape.cross_entropy(logits_t, &data.target_labels, data.target.labeled_mask())?;
        let total = (n_s + n_t) as f64;
        let source_part = tape.scale(supervised, n_s as f64 / total);
        let target_part = tape.scale(target_ce, n_t as f64 / total);
        supervised = tape.add(source_part, target_part)?;
    }

    let lambda = net.reversal_scale();
    let (root, adversarial) = if settings.adversarial {
        let rev_s = tape.reverse_gradient(emb_s, lambda);
        let rev_t = tape.reverse_gradient(emb_t, lambda);
        let dom_s = tape.matmul(rev_s, disc)?;
        let dom_t = tape.matmul(rev_t, disc)?;
        let bce_s = tape.binary_cross_entropy(dom_s, 1.0)?;
        let bce_t = tape.binary_cross_entropy(dom_t, 0.0)?;
        let adversarial = tape.add(bce_s, bce_t)?;
        (tape.add(supervised, adversarial)?, tape.scalar(adversarial))
    } else {
        (supervised, 0.0)
    };

    let sup = tape.scalar(supervised);
    let losses = LossBreakdown {
        supervised: sup,
        adversarial,
        total: sup + lambda * adversarial,
    };
    let mut grads = tape.backward(root)?;
    Ok((losses, params.into_iter().map(|p| grads.take(p)).collect()))
}

fn count(mask: &[bool]) -> usize {
    mask.iter().filter(|&&m| m).count()
}

fn record_domain<'a, N: Subnetwork>(
    net: &N,
    tape: &mut GradTape<'a>,
    params: &[Var],
    graph: &Graph,
    propagator: &'a N::Propagator,
    dropout: Option<DropoutKey>,
    domain: u32,
) -> Result<(Var, Var)> {
    let mask = match dropout {
        Some(key) if net.dropout_rate() > 0.0 => Some(dropout_mask(
            graph.num_nodes(),
            net.hidden_width(),
            net.dropout_rate(),
            DropoutKey {
                layer: key.layer + domain,
                ..key
            },
        )?),
        _ => None,
    };
    let x = tape.constant(graph.features().clone());
    net.record(tape, params, propagator, x, mask)
}

/// A trained network with its per-epoch loss trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedSubnet<N> {
    pub net: N,
    pub trace: Vec<TraceRow>,
}

/// Full-batch Adam training for `cfg.epochs` steps.
pub fn train_subnet<N: Subnetwork>(
    mut net: N,
    source: &Graph,
    target: &Graph,
    cfg: &TrainConfig,
    stream: u64,
) -> Result<TrainedSubnet<N>> {
    cfg.validate()?;
    let data = TrainingData::new(&net, source, target)?;
    let shapes: Vec<(usize, usize)> = net.parameters().iter().map(|p| p.shape()).collect();
    let decays = net.decays();
    let mut adam = Adam::new(cfg.learning_rate, cfg.weight_decay, &shapes);
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let settings = ObjectiveSettings {
            dropout: Some(DropoutKey {
                seed: cfg.seed,
                epoch: epoch as u32,
                layer: (stream as u32) << 8,
            }),
            adversarial: true,
        };
        let (losses, grads) = match evaluate_objective(&net, &data, settings) {
            Err(Error::NonFinite(_)) => {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    supervised: f64::NAN,
                    adversarial: f64::NAN,
                })
            }
            other => other?,
        };
        if !(losses.total.is_finite() && losses.supervised.is_finite()) {
            return Err(Error::NonFiniteLoss {
                epoch,
                supervised: losses.supervised,
                adversarial: losses.adversarial,
            });
        }
        trace.push(TraceRow {
            epoch,
            supervised: losses.supervised,
            adversarial: losses.adversarial,
            total: losses.total,
        });
        adam.step(net.parameters_mut(), &grads, &decays);
    }
    Ok(TrainedSubnet { net, trace })
}

/// Both subnetworks after independent training.
#[derive(Debug, Clone, PartialEq)]
pub struct DualModel {
    pub edge: TrainedSubnet<EdgeSubnet>,
    pub path: TrainedSubnet<PathSubnet>,
}

/// Trains the edge-oriented and the path-oriented subnetwork from fresh
/// seeded initializations.
pub fn train_dual(source: &Graph, target: &Graph, cfg: &TrainConfig) -> Result<DualModel> {
    let (f, c) = (source.num_features(), source.num_classes());
    let edge = train_subnet(EdgeSubnet::init(f, c, cfg), source, target, cfg, EDGE_STREAM)?;
    let path = train_subnet(PathSubnet::init(f, c, cfg), source, target, cfg, PATH_STREAM)?;
    Ok(DualModel { edge, path })
}

/// Per-node logits from the two subnetworks on the same graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DualLogits {
    edge: DenseMatrix,
    path: DenseMatrix,
}

impl DualLogits {
    pub fn new(edge: DenseMatrix, path: DenseMatrix) -> Result<Self> {
        if edge.shape() != path.shape() {
            return Err(Error::DimensionMismatch {
                op: "DualLogits",
                lhs: edge.shape(),
                rhs: path.shape(),
            });
        }
        Ok(Self { edge, path })
    }

    pub fn edge(&self) -> &DenseMatrix {
        &self.edge
    }

    pub fn path(&self) -> &DenseMatrix {
        &self.path
    }

    pub fn num_nodes(&self) -> usize {
        self.edge.rows()
    }

    pub fn num_classes(&self) -> usize {
        self.edge.cols()
    }

    /// Reorders rows: old row `i` becomes row `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut edge = self.edge.clone();
        let mut path = self.path.clone();
        for (i, &p) in perm.iter().enumerate() {
            edge.row_mut(p).copy_from_slice(self.edge.row(i));
            path.row_mut(p).copy_from_slice(self.path.row(i));
        }
        Self { edge, path }
    }
}

/// Evaluation-mode logits of both subnetworks on `target`.
pub fn target_logits(model: &DualModel, target: &Graph) -> Result<DualLogits> {
    let (_, edge) = forward_eval(&model.edge.net, target)?;
    let (_, path) = forward_eval(&model.path.net, target)?;
    DualLogits::new(edge, path)
}
