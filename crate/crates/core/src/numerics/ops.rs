//! Elementwise activations, stochastic masks and the two loss heads.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DenseMatrix;
use crate::error::{invalid, Error, Result};

pub fn relu(m: &DenseMatrix) -> DenseMatrix {
    m.map(|v| v.max(0.0))
}

/// Identifies one dropout site. The mask is a pure function of the key, so
/// replaying an epoch reproduces it bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropoutKey {
    pub seed: u64,
    pub epoch: u32,
    pub layer: u32,
}

impl DropoutKey {
    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((self.epoch as u64) << 32) | self.layer as u64);
        rng
    }
}

/// Per-entry multipliers: 0 for dropped entries, `1/(1-p)` for survivors.
pub fn dropout_mask(rows: usize, cols: usize, p: f64, key: DropoutKey) -> Result<DenseMatrix> {
    if !(0.0..1.0).contains(&p) {
        return Err(invalid(format!("dropout probability {p} outside [0, 1)")));
    }
    if p == 0.0 {
        return Ok(DenseMatrix::filled(rows, cols, 1.0));
    }
    let keep = 1.0 / (1.0 - p);
    let mut rng = key.rng();
    Ok(DenseMatrix::from_fn(rows, cols, |_, _| {
        if rng.random::<f64>() < p {
            0.0
        } else {
            keep
        }
    }))
}

pub fn dropout(m: &DenseMatrix, p: f64, key: DropoutKey) -> Result<DenseMatrix> {
    let mask = dropout_mask(m.rows(), m.cols(), p, key)?;
    Ok(hadamard(m, &mask))
}

pub(crate) fn hadamard(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    debug_assert_eq!(a.shape(), b.shape());
    let mut out = a.clone();
    for (x, y) in out.data_mut().iter_mut().zip(b.data()) {
        *x *= y;
    }
    out
}

/// Numerically stable softmax of one vector.
pub fn softmax(v: &[f64]) -> Vec<f64> {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = v.iter().map(|&x| libm::exp(x - max)).collect();
    let total: f64 = out.iter().sum();
    for o in &mut out {
        *o /= total;
    }
    out
}

/// Shannon entropy in nats; `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * libm::log(x))
        .sum::<f64>()
}

pub fn row_softmax(m: &DenseMatrix) -> DenseMatrix {
    let mut out = m.clone();
    for r in 0..m.rows() {
        let s = softmax(m.row(r));
        out.row_mut(r).copy_from_slice(&s);
    }
    out
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + libm::log(v.iter().map(|&x| libm::exp(x - max)).sum::<f64>())
}

/// Mean negative log-likelihood over masked rows, with its gradient w.r.t. the logits.
pub fn softmax_cross_entropy(
    logits: &DenseMatrix,
    labels: &[usize],
    mask: &[bool],
) -> Result<(f64, DenseMatrix)> {
    if labels.len() != logits.rows() || mask.len() != logits.rows() {
        return Err(Error::DimensionMismatch {
            op: "softmax_cross_entropy",
            lhs: logits.shape(),
            rhs: (labels.len(), mask.len()),
        });
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::NoSupervisedRows);
    }
    let mut grad = DenseMatrix::zeros(logits.rows(), logits.cols());
    let mut total = 0.0;
    for r in (0..logits.rows()).filter(|&r| mask[r]) {
        let label = labels[r];
        if label >= logits.cols() {
            return Err(invalid(format!(
                "class index {label} out of range for {} classes",
                logits.cols()
            )));
        }
        let row = logits.row(r);
        total += log_sum_exp(row) - row[label];
        let probs = softmax(row);
        let g = grad.row_mut(r);
        for (c, p) in probs.into_iter().enumerate() {
            g[c] = (p - if c == label { 1.0 } else { 0.0 }) / count as f64;
        }
    }
    Ok((total / count as f64, grad))
}

/// Mean binary cross-entropy of a column of logits against a constant target.
pub fn sigmoid_binary_cross_entropy(logits: &DenseMatrix, target: f64) -> Result<(f64, DenseMatrix)> {
    if logits.cols() != 1 || logits.rows() == 0 {
        return Err(Error::DimensionMismatch {
            op: "sigmoid_binary_cross_entropy",
            lhs: logits.shape(),
            rhs: (logits.rows().max(1), 1),
        });
    }
    let n = logits.rows() as f64;
    let mut loss = 0.0;
    let grad = logits.map(|x| (sigmoid(x) - target) / n);
    for &x in logits.data() {
        loss += x.max(0.0) - target * x + libm::log1p(libm::exp(-x.abs()));
    }
    Ok((loss / n, grad))
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}
