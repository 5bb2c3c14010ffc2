use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TrainConfig;
use crate::error::Result;
use crate::graph::{normalized_gcn_operator, path_propagator, Graph};
use crate::numerics::{DenseMatrix, GradTape, PowerSeriesOperator, SparseCsr, Var};

/// Linear domain classifier on node embeddings. Its input passes through a
/// gradient-reversal layer scaled by `reversal_scale`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Discriminator {
    /// `out x 1`.
    pub weights: DenseMatrix,
    pub reversal_scale: f64,
}

/// Two-layer GCN: `H = relu(Â X W0)`, `Z = Â H W1`, logits `Z β`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeSubnet {
    pub layer0: DenseMatrix,
    pub layer1: DenseMatrix,
    pub classifier: DenseMatrix,
    pub discriminator: Discriminator,
    pub dropout: f64,
}

/// Two-layer path-aggregation network: `H = relu(P X W0)`, `Z = relu(P H W1)`,
/// logits `Z β`, where `P` is built from the learnable path energies.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathSubnet {
    pub layer0: DenseMatrix,
    pub layer1: DenseMatrix,
    pub classifier: DenseMatrix,
    /// `1 x (L+1)` path energies `E_0..E_L`.
    pub energies: DenseMatrix,
    pub temperature: f64,
    pub discriminator: Discriminator,
    pub dropout: f64,
}

/// Shared surface the training loop drives.
pub trait Subnetwork: Clone {
    /// Graph-dependent propagation structure, built once per graph.
    type Propagator;

    fn propagator(&self, g: &Graph) -> Result<Self::Propagator>;

    /// Trainable matrices in a fixed order; the discriminator is last.
    fn parameters(&self) -> Vec<&DenseMatrix>;

    fn parameters_mut(&mut self) -> Vec<&mut DenseMatrix>;

    /// Which parameters take weight decay, aligned with `parameters`.
    fn decays(&self) -> Vec<bool>;

    fn dropout_rate(&self) -> f64;

    fn reversal_scale(&self) -> f64;

    /// Records the feature extractor and classifier on `tape`. `params` are
    /// the tape handles of `parameters()`, in order. Returns `(embeddings, logits)`.
    fn record<'a>(
        &self,
        tape: &mut GradTape<'a>,
        params: &[Var],
        propagator: &'a Self::Propagator,
        features: Var,
        dropout_mask: Option<DenseMatrix>,
    ) -> Result<(Var, Var)>;

    /// Width of the first hidden layer, where dropout is applied.
    fn hidden_width(&self) -> usize;
}

fn glorot(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let limit = libm::sqrt(6.0 / (rows + cols) as f64);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-limit..limit))
}

fn init_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random-stream id of the edge-oriented subnetwork (initialization and dropout).
pub const EDGE_STREAM: u64 = 1;
/// Random-stream id of the path-oriented subnetwork.
pub const PATH_STREAM: u64 = 2;

impl Discriminator {
    fn init(rng: &mut ChaCha8Rng, width: usize, reversal_scale: f64) -> Self {
        Self {
            weights: glorot(rng, width, 1),
            reversal_scale,
        }
    }
}

impl EdgeSubnet {
    /// Glorot-uniform initialization keyed by `cfg.seed`.
    pub fn init(features: usize, classes: usize, cfg: &TrainConfig) -> Self {
        let mut rng = init_rng(cfg.seed, EDGE_STREAM);
        Self {
            layer0: glorot(&mut rng, features, cfg.hidden),
            layer1: glorot(&mut rng, cfg.hidden, cfg.out),
            classifier: glorot(&mut rng, cfg.out, classes),
            discriminator: Discriminator::init(&mut rng, cfg.out, cfg.lambda),
            dropout: cfg.dropout,
        }
    }
}

impl PathSubnet {
    /// Glorot-uniform weights; path energies start at zero (uniform path weights).
    pub fn init(features: usize, classes: usize, cfg: &TrainConfig) -> Self {
        let mut rng = init_rng(cfg.seed, PATH_STREAM);
        Self {
            layer0: glorot(&mut rng, features, cfg.hidden),
            layer1: glorot(&mut rng, cfg.hidden, cfg.out),
            classifier: glorot(&mut rng, cfg.out, classes),
            energies: DenseMatrix::zeros(1, cfg.path_length + 1),
            temperature: cfg.temperature,
            discriminator: Discriminator::init(&mut rng, cfg.out, cfg.lambda),
            dropout: cfg.dropout,
        }
    }

    pub fn path_length(&self) -> usize {
        self.energies.cols() - 1
    }

    /// Realized path weights `exp(-E_n / T)`.
    pub fn path_weights(&self) -> Vec<f64> {
        self.energies
            .data()
            .iter()
            .map(|&e| libm::exp(-e / self.temperature))
            .collect()
    }
}

impl Subnetwork for EdgeSubnet {
    type Propagator = SparseCsr;

    fn propagator(&self, g: &Graph) -> Result<SparseCsr> {
        Ok(normalized_gcn_operator(g))
    }

    fn parameters(&self) -> Vec<&DenseMatrix> {
        alloc::vec![
            &self.layer0,
            &self.layer1,
            &self.classifier,
            &self.discriminator.weights
        ]
    }

    fn parameters_mut(&mut self) -> Vec<&mut DenseMatrix> {
        alloc::vec![
            &mut self.layer0,
            &mut self.layer1,
            &mut self.classifier,
            &mut self.discriminator.weights
        ]
    }

    fn decays(&self) -> Vec<bool> {
        alloc::vec![true; 4]
    }

    fn dropout_rate(&self) -> f64 {
        self.dropout
    }

    fn reversal_scale(&self) -> f64 {
        self.discriminator.reversal_scale
    }

    fn hidden_width(&self) -> usize {
        self.layer0.cols()
    }

    fn record<'a>(
        &self,
        tape: &mut GradTape<'a>,
        params: &[Var],
        propagator: &'a SparseCsr,
        features: Var,
        dropout_mask: Option<DenseMatrix>,
    ) -> Result<(Var, Var)> {
        let projected = tape.matmul(features, params[0])?;
        let aggregated = tape.spmm(propagator, projected)?;
        let mut hidden = tape.relu(aggregated);
        if let Some(mask) = dropout_mask {
            hidden = tape.mask(hidden, mask)?;
        }
        let projected = tape.matmul(hidden, params[1])?;
        let embeddings = tape.spmm(propagator, projected)?;
        let logits = tape.matmul(embeddings, params[2])?;
        Ok((embeddings, logits))
    }
}

impl Subnetwork for PathSubnet {
    type Propagator = PowerSeriesOperator;

    fn propagator(&self, g: &Graph) -> Result<PowerSeriesOperator> {
        path_propagator(g, self.path_length())
    }

    fn parameters(&self) -> Vec<&DenseMatrix> {
        alloc::vec![
            &self.layer0,
            &self.layer1,
            &self.classifier,
            &self.energies,
            &self.discriminator.weights
        ]
    }

    fn parameters_mut(&mut self) -> Vec<&mut DenseMatrix> {
        alloc::vec![
            &mut self.layer0,
            &mut self.layer1,
            &mut self.classifier,
            &mut self.energies,
            &mut self.discriminator.weights
        ]
    }

    fn decays(&self) -> Vec<bool> {
        alloc::vec![true, true, true, false, true]
    }

    fn dropout_rate(&self) -> f64 {
        self.dropout
    }

    fn reversal_scale(&self) -> f64 {
        self.discriminator.reversal_scale
    }

    fn hidden_width(&self) -> usize {
        self.layer0.cols()
    }

    fn record<'a>(
        &self,
        tape: &mut GradTape<'a>,
        params: &[Var],
        propagator: &'a PowerSeriesOperator,
        features: Var,
        dropout_mask: Option<DenseMatrix>,
    ) -> Result<(Var, Var)> {
        let energies = params[3];
        let projected = tape.matmul(features, params[0])?;
        let aggregated = tape.path_aggregate(propagator, energies, self.temperature, projected)?;
        let mut hidden = tape.relu(aggregated);
        if let Some(mask) = dropout_mask {
            hidden = tape.mask(hidden, mask)?;
        }
        let projected = tape.matmul(hidden, params[1])?;
        let aggregated = tape.path_aggregate(propagator, energies, self.temperature, projected)?;
        let embeddings = tape.relu(aggregated);
        let logits = tape.matmul(embeddings, params[2])?;
        Ok((embeddings, logits))
    }
}

/// Evaluation-mode forward pass (no dropout). Returns `(embeddings, logits)`.
pub(crate) fn forward_eval<N: Subnetwork>(net: &N, g: &Graph) -> Result<(DenseMatrix, DenseMatrix)> {
    let propagator = net.propagator(g)?;
    let mut tape = GradTape::new();
    let params: Vec<Var> = net
        .parameters()
        .into_iter()
        .map(|p| tape.parameter(p.clone()))
        .collect();
    let x = tape.constant(g.features().clone());
    let (emb, logits) = net.record(&mut tape, &params, &propagator, x, None)?;
    Ok((tape.value(emb).clone(), tape.value(logits).clone()))
}

pub fn forward_edge(net: &EdgeSubnet, g: &Graph) -> Result<(DenseMatrix, DenseMatrix)> {
    forward_eval(net, g)
}

pub fn forward_path(net: &PathSubnet, g: &Graph) -> Result<(DenseMatrix, DenseMatrix)> {
    forward_eval(net, g)
}
