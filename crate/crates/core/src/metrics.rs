//! Imbalance-aware macro-averaged evaluation: F1, AUC-ROC and AUCPR.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-label metric triple. AUC fields are `None` when the label's truth
/// column is single-class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub f1: f64,
    pub auc_roc: Option<f64>,
    pub auc_pr: Option<f64>,
}

/// Evaluation report over all labels. Macro values are means over labels
/// not listed in `skipped_labels` (F1 is never skipped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub macro_f: f64,
    pub macro_auc_roc: f64,
    pub macro_aucpr: f64,
    pub per_label: Vec<LabelMetrics>,
    pub skipped_labels: Vec<usize>,
}

/// F1 = 2TP / (2TP + FP + FN); 0 when the denominator is 0.
pub fn f1(pred: &[u8], truth: &[u8]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!(
            "prediction length {} != truth length {}",
            pred.len(),
            truth.len()
        )));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fne = 0usize;
    for (&p, &t) in pred.iter().zip(truth.iter()) {
        match (p, t) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 1) => fne += 1,
            _ => {}
        }
    }
    let denom = 2 * tp + fp + fne;
    if denom == 0 {
        Ok(0.0)
    } else {
        Ok(2.0 * tp as f64 / denom as f64)
    }
}

/// AUC-ROC as the probability that a random positive outscores a random
/// negative, ties counted half, computed via midranks. `None` when the
/// truth column is single-class.
pub fn auc_roc(scores: &[f64], truth: &[u8]) -> Result<Option<f64>> {
    check_lengths(scores, truth)?;
    let positives = truth.iter().filter(|&&t| t == 1).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Midranks over groups of tied scores.
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + 1 + end) as f64 / 2.0; // ranks are 1-based
        for &i in &order[start..end] {
            if truth[i] == 1 {
                rank_sum_pos += midrank;
            }
        }
        start = end;
    }
    let p = positives as f64;
    let auc = (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * negatives as f64);
    Ok(Some(auc))
}

/// Area under the precision-recall step curve, computed by a descending
/// score sweep: sum over recall increments of the precision at that point.
/// `None` when the truth column is single-class.
pub fn auc_pr(scores: &[f64], truth: &[u8]) -> Result<Option<f64>> {
    check_lengths(scores, truth)?;
    let positives = truth.iter().filter(|&&t| t == 1).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));

    let p = positives as f64;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    let mut start = 0;
    while start < order.len() {
        // Tied scores enter the predicted-positive set together.
        let mut end = start;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        for &i in &order[start..end] {
            if truth[i] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        let recall = tp as f64 / p;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        start = end;
    }
    Ok(Some(area))
}

/// Per-label metrics plus macro averages. Labels with single-class truth
/// are excluded from the AUC macros but kept for macro-F.
pub fn evaluate(
    scores: &Array2<f64>,
    preds: &Array2<u8>,
    truth: &Array2<u8>,
) -> Result<MetricsReport> {
    let q = truth.ncols();
    if q == 0 {
        return Err(Error::Shape("no labels to evaluate".into()));
    }
    if scores.dim() != truth.dim() || preds.dim() != truth.dim() {
        return Err(Error::Shape("score/pred/truth shapes disagree".into()));
    }
    let mut per_label = Vec::with_capacity(q);
    let mut skipped_labels = Vec::new();
    for j in 0..q {
        let s: Vec<f64> = scores.column(j).to_vec();
        let p: Vec<u8> = preds.column(j).to_vec();
        let t: Vec<u8> = truth.column(j).to_vec();
        let roc = auc_roc(&s, &t)?;
        let pr = auc_pr(&s, &t)?;
        if roc.is_none() {
            skipped_labels.push(j);
        }
        per_label.push(LabelMetrics {
            f1: f1(&p, &t)?,
            auc_roc: roc,
            auc_pr: pr,
        });
    }
    let macro_f = per_label.iter().map(|m| m.f1).sum::<f64>() / q as f64;
    let kept = q - skipped_labels.len();
    let (macro_auc_roc, macro_aucpr) = if kept == 0 {
        (0.0, 0.0)
    } else {
        (
            per_label.iter().filter_map(|m| m.auc_roc).sum::<f64>() / kept as f64,
            per_label.iter().filter_map(|m| m.auc_pr).sum::<f64>() / kept as f64,
        )
    };
    Ok(MetricsReport {
        macro_f,
        macro_auc_roc,
        macro_aucpr,
        per_label,
        skipped_labels,
    })
}

fn check_lengths(scores: &[f64], truth: &[u8]) -> Result<()> {
    if scores.len() != truth.len() {
        return Err(Error::Shape(format!(
            "score length {} != truth length {}",
            scores.len(),
            truth.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn f1_examples() {
        assert_eq!(f1(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(f1(&[0, 0], &[0, 0]).unwrap(), 0.0);
        // TP=1, FP=1, FN=1
        assert_eq!(f1(&[1, 1, 0], &[1, 0, 1]).unwrap(), 0.5);
        assert!(f1(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn auc_roc_examples() {
        assert_eq!(
            auc_roc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(),
            Some(1.0)
        );
        assert_eq!(auc_roc(&[0.5, 0.5, 0.5], &[0, 1, 0]).unwrap(), Some(0.5));
        // 4 positive-negative pairs, 3 wins
        assert_eq!(
            auc_roc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap(),
            Some(0.75)
        );
        assert_eq!(auc_roc(&[0.3, 0.7], &[1, 1]).unwrap(), None);
        assert_eq!(auc_roc(&[0.3, 0.7], &[0, 0]).unwrap(), None);
    }

    #[test]
    fn auc_pr_examples() {
        assert_eq!(
            auc_pr(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(),
            Some(1.0)
        );
        // descending sweep: 0.5*1.0 + 0.5*(2/3)
        assert_abs_diff_eq!(
            auc_pr(&[0.8, 0.6, 0.4, 0.2], &[1, 0, 1, 0]).unwrap().unwrap(),
            5.0 / 6.0,
            epsilon = 1e-15
        );
        assert_eq!(auc_pr(&[0.3, 0.7], &[1, 1]).unwrap(), None);
    }

    #[test]
    fn evaluate_perfect_predictions() {
        let scores = array![[0.9, 0.1], [0.8, 0.7], [0.2, 0.6], [0.1, 0.2]];
        let truth = array![[1, 0], [1, 1], [0, 1], [0, 0]];
        let report = evaluate(&scores, &truth.clone(), &truth).unwrap();
        assert_eq!(report.macro_f, 1.0);
        assert_eq!(report.macro_auc_roc, 1.0);
        assert_eq!(report.macro_aucpr, 1.0);
        assert!(report.skipped_labels.is_empty());
    }

    #[test]
    fn evaluate_skips_single_class_labels_for_auc_only() {
        let scores = array![[0.9, 0.4], [0.8, 0.3], [0.2, 0.2]];
        let preds = array![[1, 1], [1, 1], [0, 1]];
        let truth = array![[1, 1], [1, 1], [0, 1]];
        let report = evaluate(&scores, &preds, &truth).unwrap();
        assert_eq!(report.skipped_labels, vec![1]);
        assert_eq!(report.per_label[1].auc_roc, None);
        assert_eq!(report.per_label[1].f1, 1.0);
        // AUC macros average the single kept label
        assert_eq!(report.macro_auc_roc, 1.0);
        // macro-F keeps both labels
        assert_eq!(report.macro_f, 1.0);
    }

    #[test]
    fn evaluate_rejects_empty_or_mismatched() {
        let empty = ndarray::Array2::<u8>::zeros((2, 0));
        let scores = ndarray::Array2::<f64>::zeros((2, 0));
        assert!(evaluate(&scores, &empty, &empty).is_err());
        let scores = array![[0.1], [0.2]];
        let truth = array![[1], [0], [1]];
        assert!(evaluate(&scores, &truth.clone(), &truth).is_err());
    }

    /// Pairwise-counting oracle for AUC-ROC.
    fn roc_oracle(scores: &[f64], truth: &[u8]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &t) in truth.iter().enumerate() {
            if t != 1 {
                continue;
            }
            for (m, &u) in truth.iter().enumerate() {
                if u != 0 {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[m] {
                    wins += 1.0;
                } else if scores[i] == scores[m] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    proptest! {
        #[test]
        fn roc_matches_pairwise_counting(
            scores in proptest::collection::vec(0u8..6, 4..40),
            bits in proptest::collection::vec(0u8..2, 40),
        ) {
            let n = scores.len();
            let truth = &bits[..n];
            let scores: Vec<f64> = scores.iter().map(|&s| s as f64 / 5.0).collect();
            prop_assume!(truth.iter().any(|&t| t == 1) && truth.iter().any(|&t| t == 0));
            let got = auc_roc(&scores, truth).unwrap().unwrap();
            prop_assert!((got - roc_oracle(&scores, truth)).abs() < 1e-12);
        }

        #[test]
        fn roc_invariant_under_increasing_transforms(
            scores in proptest::collection::vec(0.0f64..1.0, 4..30),
            bits in proptest::collection::vec(0u8..2, 30),
        ) {
            let n = scores.len();
            let truth = &bits[..n];
            prop_assume!(truth.iter().any(|&t| t == 1) && truth.iter().any(|&t| t == 0));
            let base = auc_roc(&scores, truth).unwrap().unwrap();
            let squashed: Vec<f64> = scores.iter().map(|&s| (3.0 * s + 1.0).exp()).collect();
            let transformed = auc_roc(&squashed, truth).unwrap().unwrap();
            prop_assert!((base - transformed).abs() < 1e-12);
        }

        #[test]
        fn roc_of_negated_scores_complements(
            raw in proptest::collection::vec(0u32..1_000_000, 4..30),
            bits in proptest::collection::vec(0u8..2, 30),
        ) {
            let n = raw.len();
            let truth = &bits[..n];
            prop_assume!(truth.iter().any(|&t| t == 1) && truth.iter().any(|&t| t == 0));
            let mut distinct = raw.clone();
            distinct.sort_unstable();
            distinct.dedup();
            prop_assume!(distinct.len() == n); // no ties
            let scores: Vec<f64> = raw.iter().map(|&s| s as f64).collect();
            let negated: Vec<f64> = scores.iter().map(|&s| -s).collect();
            let a = auc_roc(&scores, truth).unwrap().unwrap();
            let b = auc_roc(&negated, truth).unwrap().unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn pr_of_perfect_and_reversed_rankings(
            positives in 1usize..8,
            negatives in 1usize..8,
        ) {
            let n = positives + negatives;
            // perfect: positives outrank all negatives
            let scores: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
            let truth: Vec<u8> = (0..n).map(|i| u8::from(i < positives)).collect();
            let perfect = auc_pr(&scores, &truth).unwrap().unwrap();
            prop_assert!((perfect - 1.0).abs() < 1e-12);
            // reversed-perfect: analytic value of the step sweep, summed
            // over the recall increments of the trailing positives
            let reversed: Vec<u8> = (0..n).map(|i| u8::from(i >= negatives)).collect();
            let got = auc_pr(&scores, &reversed).unwrap().unwrap();
            let expected: f64 = (1..=positives)
                .map(|t| (1.0 / positives as f64) * (t as f64 / (negatives + t) as f64))
                .sum();
            prop_assert!((got - expected).abs() < 1e-12);
        }
    }
}
