//! Experiment configuration.
//!
//! The config file is flat TOML: `key = value` lines, no tables. Every key
//! is optional and overrides the corresponding default; unknown keys are
//! rejected.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `strategy` | `"delta"` | `delta`, `random`, `degree`, `density` or `uncertainty` |
//! | `seeds` | 5 | number of consecutive seeds, starting at `seed` |
//! | `seed` | 0 | first seed |
//! | `out` | `"out"` | output directory |
//! | `epochs`, `learning_rate`, `weight_decay`, `hidden`, `out_dim`, `dropout`, `lambda`, `path_length`, `temperature` | desk scale | training |
//! | `gamma`, `hops`, `budget`, `normalize` | 0.3, 2, 25, false | selection |
//! | `classes`, `nodes_per_class`, `features`, `p_intra`, `p_inter`, `mean_scale`, `shift_scale`, `shifted_classes`, `noise`, `source_label_fraction` | see [`SynthConfig`] | synthetic pair |
//! | `source_edges`, `source_features`, `source_labels`, `source_mask` and the `target_` counterparts | unset | load graphs from files instead; needs `classes` |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use delta_core::graph::{random_class_means, DomainShift, ShiftedPairParams};
use delta_core::numerics::DenseMatrix;
use delta_core::select::{BaselineKind, SelectConfig};
use delta_core::subnet::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::io::GraphFiles;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Delta,
    Random,
    Degree,
    Density,
    Uncertainty,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Delta,
        Strategy::Random,
        Strategy::Degree,
        Strategy::Density,
        Strategy::Uncertainty,
    ];

    pub fn baseline(self) -> Option<BaselineKind> {
        match self {
            Strategy::Delta => None,
            Strategy::Random => Some(BaselineKind::Random),
            Strategy::Degree => Some(BaselineKind::Degree),
            Strategy::Density => Some(BaselineKind::Density),
            Strategy::Uncertainty => Some(BaselineKind::Uncertainty),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Delta => "delta",
            Strategy::Random => "random",
            Strategy::Degree => "degree",
            Strategy::Density => "density",
            Strategy::Uncertainty => "uncertainty",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::validation(format!("unknown strategy `{s}`")))
    }
}

/// Parameters of the synthetic shifted block-model pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub classes: usize,
    pub nodes_per_class: usize,
    pub features: usize,
    pub p_intra: f64,
    pub p_inter: f64,
    /// Standard deviation of the source class-mean entries.
    pub mean_scale: f64,
    /// Standard deviation of the target mean offsets of shifted classes.
    pub shift_scale: f64,
    /// How many classes (the first ones) move between domains; the rest keep their means.
    pub shifted_classes: usize,
    pub noise: f64,
    pub source_label_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: 5,
            nodes_per_class: 120,
            features: 32,
            p_intra: 0.05,
            p_inter: 0.005,
            mean_scale: 0.4,
            shift_scale: 1.0,
            shifted_classes: 2,
            noise: 1.0,
            source_label_fraction: 0.05,
        }
    }
}

impl SynthConfig {
    /// Generator input for one seed; means and offsets are drawn from the seed too.
    /// Offsets are projected off the span of the class means, so a shifted
    /// class moves away from every source class instead of onto another one.
    pub fn params(&self, seed: u64) -> ShiftedPairParams {
        let means = random_class_means(self.classes, self.features, self.mean_scale, seed);
        let mut shift = random_class_means(self.classes, self.features, self.shift_scale, seed ^ 0x5eed_5eed);
        let basis = orthonormal_rows(&means);
        for c in 0..self.classes {
            let row = shift.row_mut(c);
            if c >= self.shifted_classes {
                row.fill(0.0);
                continue;
            }
            for b in &basis {
                let dot: f64 = row.iter().zip(b).map(|(x, y)| x * y).sum();
                row.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        ShiftedPairParams {
            class_sizes: vec![self.nodes_per_class; self.classes],
            p_intra: self.p_intra,
            p_inter: self.p_inter,
            class_means: means,
            shift: DomainShift::PerClass(shift),
            noise: self.noise,
            source_label_fraction: self.source_label_fraction,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.classes < 2 || self.nodes_per_class == 0 || self.features == 0 {
            return Err(HarnessError::validation(
                "synthetic data needs classes >= 2, nodes_per_class >= 1 and features >= 1",
            ));
        }
        for (name, v) in [("p_intra", self.p_intra), ("p_inter", self.p_inter)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(HarnessError::validation(format!("{name} = {v} is not a probability")));
            }
        }
        for (name, v) in [
            ("mean_scale", self.mean_scale),
            ("shift_scale", self.shift_scale),
            ("noise", self.noise),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(HarnessError::validation(format!("{name} must be finite and nonnegative")));
            }
        }
        if !(self.source_label_fraction > 0.0 && self.source_label_fraction <= 1.0) {
            return Err(HarnessError::validation("source_label_fraction must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Gram-Schmidt basis of the row space.
fn orthonormal_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for r in 0..m.rows() {
        let mut v = m.row(r).to_vec();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic(SynthConfig),
    Files {
        source: GraphFiles,
        target: GraphFiles,
        classes: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub data: DataSource,
    pub train: TrainConfig,
    pub select: SelectConfig,
    pub strategy: Strategy,
    pub seeds: usize,
    pub base_seed: u64,
    pub out: PathBuf,
}

/// Training defaults for desk-scale runs.
pub fn desk_train_config() -> TrainConfig {
    TrainConfig {
        hidden: 64,
        out: 32,
        ..TrainConfig::default()
    }
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            data: DataSource::Synthetic(SynthConfig::default()),
            train: desk_train_config(),
            select: SelectConfig::default(),
            strategy: Strategy::Delta,
            seeds: 5,
            base_seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentSpec {
    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|i| self.base_seed.wrapping_add(i)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(HarnessError::validation("seeds must be at least 1"));
        }
        self.train.validate()?;
        self.select.validate()?;
        match &self.data {
            DataSource::Synthetic(s) => s.validate(),
            DataSource::Files { classes, .. } if *classes < 1 => {
                Err(HarnessError::validation("classes must be at least 1"))
            }
            DataSource::Files { .. } => Ok(()),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = crate::io::read_to_string(path)?;
        let file: ConfigFile = toml::from_str(&text).map_err(|e| HarnessError::Config {
            path: path.to_owned(),
            message: e.message().to_owned(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        file.apply(Self::default(), base)
            .map_err(|message| HarnessError::Config {
                path: path.to_owned(),
                message,
            })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| HarnessError::validation(e.message()))?;
        file.apply(Self::default(), Path::new("")).map_err(HarnessError::Validation)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    strategy: Option<String>,
    seeds: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,

    epochs: Option<usize>,
    learning_rate: Option<f64>,
    weight_decay: Option<f64>,
    hidden: Option<usize>,
    out_dim: Option<usize>,
    dropout: Option<f64>,
    lambda: Option<f64>,
    path_length: Option<usize>,
    temperature: Option<f64>,

    gamma: Option<f64>,
    hops: Option<usize>,
    budget: Option<usize>,
    normalize: Option<bool>,

    classes: Option<usize>,
    nodes_per_class: Option<usize>,
    features: Option<usize>,
    p_intra: Option<f64>,
    p_inter: Option<f64>,
    mean_scale: Option<f64>,
    shift_scale: Option<f64>,
    shifted_classes: Option<usize>,
    noise: Option<f64>,
    source_label_fraction: Option<f64>,

    source_edges: Option<PathBuf>,
    source_features: Option<PathBuf>,
    source_labels: Option<PathBuf>,
    source_mask: Option<PathBuf>,
    target_edges: Option<PathBuf>,
    target_features: Option<PathBuf>,
    target_labels: Option<PathBuf>,
    target_mask: Option<PathBuf>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl ConfigFile {
    fn apply(self, mut spec: ExperimentSpec, base: &Path) -> std::result::Result<ExperimentSpec, String> {
        if let Some(s) = &self.strategy {
            spec.strategy = s.parse().map_err(|e: HarnessError| e.to_string())?;
        }
        set(&mut spec.seeds, self.seeds);
        set(&mut spec.base_seed, self.seed);
        set(&mut spec.out, self.out.map(|p| base.join(p)));

        let t = &mut spec.train;
        set(&mut t.epochs, self.epochs);
        set(&mut t.learning_rate, self.learning_rate);
        set(&mut t.weight_decay, self.weight_decay);
        set(&mut t.hidden, self.hidden);
        set(&mut t.out, self.out_dim);
        set(&mut t.dropout, self.dropout);
        set(&mut t.lambda, self.lambda);
        set(&mut t.path_length, self.path_length);
        set(&mut t.temperature, self.temperature);

        let s = &mut spec.select;
        set(&mut s.gamma, self.gamma);
        set(&mut s.hops, self.hops);
        set(&mut s.budget, self.budget);
        set(&mut s.normalize, self.normalize);

        let files = [
            &self.source_edges,
            &self.source_features,
            &self.source_labels,
            &self.source_mask,
            &self.target_edges,
            &self.target_features,
            &self.target_labels,
            &self.target_mask,
        ];
        let given = files.iter().filter(|f| f.is_some()).count();
        if given == 0 {
            let mut synth = SynthConfig::default();
            set(&mut synth.classes, self.classes);
            set(&mut synth.nodes_per_class, self.nodes_per_class);
            set(&mut synth.features, self.features);
            set(&mut synth.p_intra, self.p_intra);
            set(&mut synth.p_inter, self.p_inter);
            set(&mut synth.mean_scale, self.mean_scale);
            set(&mut synth.shift_scale, self.shift_scale);
            set(&mut synth.shifted_classes, self.shifted_classes);
            set(&mut synth.noise, self.noise);
            set(&mut synth.source_label_fraction, self.source_label_fraction);
            spec.data = DataSource::Synthetic(synth);
            return Ok(spec);
        }
        if given != files.len() {
            return Err("graph files need all of source_/target_ edges, features, labels and mask".into());
        }
        let synthetic_keys = [
            self.nodes_per_class.is_some(),
            self.features.is_some(),
            self.p_intra.is_some(),
            self.p_inter.is_some(),
            self.mean_scale.is_some(),
            self.shift_scale.is_some(),
            self.shifted_classes.is_some(),
            self.noise.is_some(),
            self.source_label_fraction.is_some(),
        ];
        if synthetic_keys.iter().any(|&k| k) {
            return Err("synthetic generator keys cannot be combined with graph files".into());
        }
        let classes = self.classes.ok_or("graph files need `classes`")?;
        let path = |p: Option<PathBuf>| base.join(p.expect("checked above"));
        spec.data = DataSource::Files {
            source: GraphFiles {
                edges: path(self.source_edges),
                features: path(self.source_features),
                labels: path(self.source_labels),
                mask: path(self.source_mask),
            },
            target: GraphFiles {
                edges: path(self.target_edges),
                features: path(self.target_features),
                labels: path(self.target_labels),
                mask: path(self.target_mask),
            },
            classes,
        };
        Ok(spec)
    }
}
