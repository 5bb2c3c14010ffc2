//! Single-label multiclass F1 scores.

use alloc::vec;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct F1Scores {
    pub macro_f1: f64,
    pub micro_f1: f64,
}

/// Macro-F1 averages per-class F1 over all `num_classes` classes, counting a
/// class with no true positives (including one absent from both sides) as 0.
/// Micro-F1 equals accuracy for single-label predictions.
pub fn macro_micro_f1(predictions: &[usize], truths: &[usize], mask: &[bool], num_classes: usize) -> Result<F1Scores> {
    if predictions.len() != truths.len() || truths.len() != mask.len() {
        return Err(Error::DimensionMismatch {
            op: "macro_micro_f1",
            lhs: (predictions.len(), truths.len()),
            rhs: (mask.len(), 1),
        });
    }
    let mut tp = vec![0usize; num_classes];
    let mut predicted = vec![0usize; num_classes];
    let mut actual = vec![0usize; num_classes];
    let mut total = 0usize;
    for i in (0..mask.len()).filter(|&i| mask[i]) {
        let (p, t) = (predictions[i], truths[i]);
        if p >= num_classes || t >= num_classes {
            return Err(invalid("class index out of range"));
        }
        predicted[p] += 1;
        actual[t] += 1;
        if p == t {
            tp[p] += 1;
        }
        total += 1;
    }
    if total == 0 {
        return Err(invalid("evaluation mask is empty"));
    }
    let per_class_sum: f64 = (0..num_classes)
        .map(|c| {
            let denom = predicted[c] + actual[c];
            if tp[c] == 0 || denom == 0 {
                0.0
            } else {
                2.0 * tp[c] as f64 / denom as f64
            }
        })
        .sum();
    Ok(F1Scores {
        macro_f1: per_class_sum / num_classes as f64,
        micro_f1: tp.iter().sum::<usize>() as f64 / total as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let y = [0, 1, 2, 1];
        let s = macro_micro_f1(&y, &y, &[true; 4], 3).unwrap();
        assert_eq!((s.macro_f1, s.micro_f1), (1.0, 1.0));
    }

    #[test]
    fn hand_computed_two_class() {
        let s = macro_micro_f1(&[0, 1, 1, 1], &[0, 0, 1, 1], &[true; 4], 2).unwrap();
        assert!((s.macro_f1 - (2.0 / 3.0 + 0.8) / 2.0).abs() < 1e-15);
        assert!((s.macro_f1 - 0.7333).abs() < 1e-4);
        assert_eq!(s.micro_f1, 0.75);
    }

    #[test]
    fn absent_class_counts_as_zero() {
        let s = macro_micro_f1(&[0, 1], &[0, 1], &[true, true], 3).unwrap();
        assert!((s.macro_f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn masked_out_rows_ignored() {
        let s = macro_micro_f1(&[0, 0], &[0, 1], &[true, false], 2).unwrap();
        assert_eq!(s.micro_f1, 1.0);
    }

    #[test]
    fn empty_mask() {
        assert!(macro_micro_f1(&[0], &[0], &[false], 2).is_err());
    }
}
