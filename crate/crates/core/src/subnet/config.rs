use alloc::format;

use crate::error::{invalid, Result};

/// Training tunables shared by both subnetworks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Decoupled (AdamW-style) weight decay.
    pub weight_decay: f64,
    pub hidden: usize,
    pub out: usize,
    pub dropout: f64,
    /// Weight of the adversarial term; also the gradient-reversal scale.
    pub lambda: f64,
    /// Longest path length aggregated by the path subnetwork.
    pub path_length: usize,
    /// Temperature of the path weights `exp(-E_n / T)`.
    pub temperature: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 1e-3,
            weight_decay: 1e-4,
            hidden: 512,
            out: 256,
            dropout: 0.1,
            lambda: 1.0,
            path_length: 3,
            temperature: 1.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.out == 0 {
            return Err(invalid("hidden and out sizes must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(invalid(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("weight_decay", self.weight_decay),
            ("lambda", self.lambda),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(invalid("temperature must be positive"));
        }
        Ok(())
    }
}
