use delta_core::metrics::macro_micro_f1;
use proptest::prelude::*;

/// Scores from an explicit confusion matrix, via precision and recall.
fn confusion_oracle(pred: &[usize], truth: &[usize], mask: &[bool], c: usize) -> (f64, f64) {
    let mut m = vec![vec![0u32; c]; c];
    for i in 0..pred.len() {
        if mask[i] {
            m[truth[i]][pred[i]] += 1;
        }
    }
    let total: u32 = m.iter().flatten().sum();
    let diag: u32 = (0..c).map(|k| m[k][k]).sum();
    let mut f1_sum = 0.0;
    for k in 0..c {
        let tp = m[k][k] as f64;
        let col: f64 = (0..c).map(|r| m[r][k] as f64).sum();
        let row: f64 = m[k].iter().map(|&v| v as f64).sum();
        if tp > 0.0 {
            let (p, r) = (tp / col, tp / row);
            f1_sum += 2.0 * p * r / (p + r);
        }
    }
    (f1_sum / c as f64, diag as f64 / total as f64)
}

#[test]
fn hand_computed_confusion() {
    // truth 0 0 0 1 1 2, pred 0 0 1 1 2 2
    let s = macro_micro_f1(&[0, 0, 1, 1, 2, 2], &[0, 0, 0, 1, 1, 2], &[true; 6], 3).unwrap();
    let f1 = [0.8, 0.5, 2.0 / 3.0];
    assert!((s.macro_f1 - f1.iter().sum::<f64>() / 3.0).abs() < 1e-12);
    assert!((s.micro_f1 - 4.0 / 6.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn matches_confusion_matrix(
        rows in prop::collection::vec((0usize..4, 0usize..4, any::<bool>()), 1..60)
    ) {
        let mut rows = rows;
        rows[0].2 = true;
        let pred: Vec<usize> = rows.iter().map(|r| r.0).collect();
        let truth: Vec<usize> = rows.iter().map(|r| r.1).collect();
        let mask: Vec<bool> = rows.iter().map(|r| r.2).collect();
        let s = macro_micro_f1(&pred, &truth, &mask, 4).unwrap();
        let (macro_f1, micro_f1) = confusion_oracle(&pred, &truth, &mask, 4);
        prop_assert!((s.macro_f1 - macro_f1).abs() < 1e-12);
        prop_assert!((s.micro_f1 - micro_f1).abs() < 1e-12);
    }
}
