//! Machine-readable outputs: evaluation and selection reports, loss traces
//! and model checkpoints.

use std::fmt::Write as _;
use std::path::Path;

use delta_core::select::{ScoreRow, SelectConfig};
use delta_core::subnet::{DualModel, EdgeSubnet, PathSubnet, TraceRow, TrainConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::Strategy;
use crate::error::{HarnessError, Result};
use crate::io::{read_to_string, write_atomic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub macro_f1: f64,
    pub micro_f1: f64,
    /// Wall-clock seconds spent choosing the annotation set.
    pub selection_seconds: f64,
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub strategy: Strategy,
    pub train: TrainConfig,
    pub select: SelectConfig,
    pub seeds: Vec<SeedResult>,
    pub macro_f1: Summary,
    pub micro_f1: Summary,
}

impl EvalReport {
    pub fn new(strategy: Strategy, train: TrainConfig, select: SelectConfig, seeds: Vec<SeedResult>) -> Self {
        let macros: Vec<f64> = seeds.iter().map(|s| s.macro_f1).collect();
        let micros: Vec<f64> = seeds.iter().map(|s| s.micro_f1).collect();
        Self {
            strategy,
            train,
            select,
            macro_f1: Summary::of(&macros),
            micro_f1: Summary::of(&micros),
            seeds,
        }
    }

    /// The same report with every timing field zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.seeds.iter_mut().for_each(|s| s.selection_seconds = 0.0);
        r
    }

    pub fn total_selection_seconds(&self) -> f64 {
        self.seeds.iter().map(|s| s.selection_seconds).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub strategy: Strategy,
    pub seed: u64,
    pub config: SelectConfig,
    /// Number of nodes passing the consistency threshold; zero for baselines.
    pub candidate_count: usize,
    /// Every scored node; empty for baselines.
    pub scores: Vec<ScoreRow>,
    /// Chosen nodes, best first.
    pub selected: Vec<usize>,
}

pub const CHECKPOINT_FORMAT: &str = "delta-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Trained parameters of both subnetworks with the config that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub train: TrainConfig,
    pub num_features: usize,
    pub num_classes: usize,
    pub edge: EdgeSubnet,
    pub path: PathSubnet,
}

impl Checkpoint {
    pub fn new(train: TrainConfig, num_features: usize, num_classes: usize, model: &DualModel) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_owned(),
            version: CHECKPOINT_VERSION,
            train,
            num_features,
            num_classes,
            edge: model.edge.net.clone(),
            path: model.path.net.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ck: Self = load_json(path)?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(HarnessError::validation(format!(
                "{}: unsupported checkpoint {} v{}, expected {CHECKPOINT_FORMAT} v{CHECKPOINT_VERSION}",
                path.display(),
                ck.format,
                ck.version
            )));
        }
        Ok(ck)
    }

    pub fn model(&self) -> DualModel {
        use delta_core::subnet::TrainedSubnet;
        DualModel {
            edge: TrainedSubnet { net: self.edge.clone(), trace: Vec::new() },
            path: TrainedSubnet { net: self.path.clone(), trace: Vec::new() },
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn from_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| HarnessError::Json { path: path.to_owned(), source })
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value).as_bytes())
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(path, &read_to_string(path)?)
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("epoch,L_Sup,L_DA,total\n");
    for r in trace {
        let _ = writeln!(out, "{},{:?},{:?},{:?}", r.epoch, r.supervised, r.adversarial, r.total);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_matches_hand_values() {
        let s = Summary::of(&[0.2, 0.4, 0.6]);
        assert!((s.mean - 0.4).abs() < 1e-15);
        assert!((s.std - (0.08f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(Summary::of(&[0.5]).std, 0.0);
    }

    #[test]
    fn eval_report_round_trips() {
        let seeds = vec![
            SeedResult { seed: 3, macro_f1: 0.1 + 0.2, micro_f1: 1.0 / 3.0, selection_seconds: 1e-7, selected: vec![4, 1] },
            SeedResult { seed: 4, macro_f1: 0.7, micro_f1: 0.71, selection_seconds: 0.25, selected: vec![0, 9] },
        ];
        let r = EvalReport::new(Strategy::Delta, TrainConfig::default(), SelectConfig::default(), seeds);
        let back: EvalReport = from_json(Path::new("r"), &to_json(&r)).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.without_timing().total_selection_seconds(), 0.0);
    }

    #[test]
    fn trace_header() {
        let csv = trace_csv(&[TraceRow { epoch: 0, supervised: 1.5, adversarial: 0.25, total: 1.75 }]);
        assert_eq!(csv, "epoch,L_Sup,L_DA,total\n0,1.5,0.25,1.75\n");
    }
}
