//! Binary-classification metrics over pooled predictions.

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::EvalError;

/// One scored sample: the truth, the posterior, and the thresholded label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub sample_id: String,
    pub true_label: Label,
    pub p_abnormal: f64,
    pub predicted: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn from_predictions(preds: &[Prediction]) -> Self {
        let mut counts = ConfusionCounts {
            tp: 0,
            fp: 0,
            fn_: 0,
            tn: 0,
        };
        for p in preds {
            match (p.true_label.is_positive(), p.predicted.is_positive()) {
                (true, true) => counts.tp += 1,
                (false, true) => counts.fp += 1,
                (true, false) => counts.fn_ += 1,
                (false, false) => counts.tn += 1,
            }
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub accuracy: f64,
    pub counts: ConfusionCounts,
}

/// Pair-counting (Mann-Whitney) AUC; ties count one half.
pub fn roc_auc(preds: &[Prediction]) -> Result<f64, EvalError> {
    let positives: Vec<f64> = preds
        .iter()
        .filter(|p| p.true_label.is_positive())
        .map(|p| p.p_abnormal)
        .collect();
    let negatives: Vec<f64> = preds
        .iter()
        .filter(|p| !p.true_label.is_positive())
        .map(|p| p.p_abnormal)
        .collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(EvalError::UndefinedAuc);
    }
    let mut score = 0.0;
    for &p in &positives {
        for &n in &negatives {
            if p > n {
                score += 1.0;
            } else if p == n {
                score += 0.5;
            }
        }
    }
    Ok(score / (positives.len() * negatives.len()) as f64)
}

/// Precision, recall, F1, AUC, and accuracy from pooled predictions.
///
/// Precision is defined as 0 (with a warning) when nothing was predicted
/// positive, so degenerate runs still render.
pub fn compute_metrics(preds: &[Prediction]) -> Result<MetricsReport, EvalError> {
    if preds.is_empty() {
        return Err(EvalError::EmptyPredictions);
    }
    let counts = ConfusionCounts::from_predictions(preds);
    let precision = if counts.tp + counts.fp == 0 {
        log::warn!("no positive predictions; reporting precision = 0");
        0.0
    } else {
        counts.tp as f64 / (counts.tp + counts.fp) as f64
    };
    let recall = if counts.tp + counts.fn_ == 0 {
        0.0
    } else {
        counts.tp as f64 / (counts.tp + counts.fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let accuracy = (counts.tp + counts.tn) as f64 / counts.total() as f64;
    let auc = roc_auc(preds)?;
    Ok(MetricsReport {
        precision,
        recall,
        f1,
        auc,
        accuracy,
        counts,
    })
}

/// Render a fraction as a percentage with one decimal, Table-style.
pub fn percent(value: f64) -> f64 {
    (value * 1000.0).round() / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn pred(id: &str, truth: Label, score: f64) -> Prediction {
        Prediction {
            sample_id: id.to_string(),
            true_label: truth,
            p_abnormal: score,
            predicted: if score > 0.5 { Label::Positive } else { Label::Negative },
        }
    }

    fn preds_from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Vec<Prediction> {
        let mut preds = Vec::new();
        for i in 0..tp {
            preds.push(pred(&format!("tp{i}"), Label::Positive, 0.9));
        }
        for i in 0..fp {
            preds.push(pred(&format!("fp{i}"), Label::Negative, 0.9));
        }
        for i in 0..fn_ {
            preds.push(pred(&format!("fn{i}"), Label::Positive, 0.1));
        }
        for i in 0..tn {
            preds.push(pred(&format!("tn{i}"), Label::Negative, 0.1));
        }
        preds
    }

    #[test]
    fn gpt4o_row_confusion() {
        let preds = preds_from_counts(21, 13, 20, 93);
        let report = compute_metrics(&preds).unwrap();
        assert_eq!(percent(report.precision), 61.8);
        assert_eq!(percent(report.recall), 51.2);
        assert_eq!(percent(report.f1), 56.0);
        assert_eq!(percent(report.accuracy), 77.6);
    }

    #[test]
    fn all_correct_is_all_ones() {
        let preds = preds_from_counts(10, 0, 0, 20);
        let report = compute_metrics(&preds).unwrap();
        assert_eq!(report.precision, 1.0);
        assert_eq!(report.recall, 1.0);
        assert_eq!(report.f1, 1.0);
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.auc, 1.0);
    }

    #[test]
    fn no_positive_predictions_uses_zero_convention() {
        let preds = preds_from_counts(0, 0, 5, 10);
        let report = compute_metrics(&preds).unwrap();
        assert_eq!(report.precision, 0.0);
        assert_eq!(report.recall, 0.0);
        assert_eq!(report.f1, 0.0);
    }

    #[test]
    fn auc_hand_case() {
        let preds = vec![
            pred("p1", Label::Positive, 0.9),
            pred("p2", Label::Positive, 0.4),
            pred("n1", Label::Negative, 0.8),
            pred("n2", Label::Negative, 0.2),
        ];
        assert_eq!(roc_auc(&preds).unwrap(), 0.75);
    }

    #[test]
    fn auc_all_ties_is_half() {
        let preds = vec![
            pred("p1", Label::Positive, 0.5),
            pred("n1", Label::Negative, 0.5),
            pred("n2", Label::Negative, 0.5),
        ];
        assert_eq!(roc_auc(&preds).unwrap(), 0.5);
    }

    #[test]
    fn auc_perfect_separation_is_one() {
        let preds = vec![
            pred("p1", Label::Positive, 0.9),
            pred("p2", Label::Positive, 0.7),
            pred("n1", Label::Negative, 0.3),
        ];
        assert_eq!(roc_auc(&preds).unwrap(), 1.0);
    }

    #[test]
    fn auc_single_class_is_error() {
        let preds = vec![pred("p1", Label::Positive, 0.9)];
        assert!(matches!(roc_auc(&preds), Err(EvalError::UndefinedAuc)));
    }

    #[test]
    fn empty_predictions_error() {
        assert!(matches!(
            compute_metrics(&[]),
            Err(EvalError::EmptyPredictions)
        ));
    }

    /// Tie-aware trapezoidal ROC integration, the independent oracle for
    /// the pair-counting implementation.
    pub(crate) fn trapezoidal_auc(preds: &[Prediction]) -> f64 {
        let n_pos = preds.iter().filter(|p| p.true_label.is_positive()).count() as f64;
        let n_neg = preds.len() as f64 - n_pos;
        let mut scored: Vec<(f64, bool)> = preds
            .iter()
            .map(|p| (p.p_abnormal, p.true_label.is_positive()))
            .collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut auc = 0.0;
        let mut tp = 0.0;
        let mut fp = 0.0;
        let mut prev_tp = 0.0;
        let mut prev_fp = 0.0;
        let mut i = 0;
        while i < scored.len() {
            let score = scored[i].0;
            // Consume the whole tie group at once.
            while i < scored.len() && scored[i].0 == score {
                if scored[i].1 {
                    tp += 1.0;
                } else {
                    fp += 1.0;
                }
                i += 1;
            }
            auc += (fp - prev_fp) / n_neg * (tp + prev_tp) / (2.0 * n_pos);
            prev_tp = tp;
            prev_fp = fp;
        }
        auc
    }

    #[test]
    fn pair_counting_matches_trapezoidal_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..1000 {
            let n = rng.gen_range(2..60);
            let mut preds: Vec<Prediction> = (0..n)
                .map(|i| {
                    // Coarse grid to force score ties regularly.
                    let score = rng.gen_range(0..10) as f64 / 10.0;
                    pred(
                        &format!("s{i}"),
                        if rng.gen_bool(0.4) { Label::Positive } else { Label::Negative },
                        score,
                    )
                })
                .collect();
            preds[0].true_label = Label::Positive;
            preds[1].true_label = Label::Negative;
            let pair = roc_auc(&preds).unwrap();
            let trap = trapezoidal_auc(&preds);
            assert!(
                (pair - trap).abs() < 1e-12,
                "pair {pair} vs trapezoid {trap}"
            );
        }
    }

    #[test]
    fn flipping_false_negative_never_hurts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let mut preds = preds_from_counts(
                rng.gen_range(1..10),
                rng.gen_range(0..10),
                rng.gen_range(1..10),
                rng.gen_range(1..10),
            );
            let before = compute_metrics(&preds).unwrap();
            let fn_idx = preds
                .iter()
                .position(|p| p.true_label.is_positive() && !p.predicted.is_positive())
                .unwrap();
            preds[fn_idx].predicted = Label::Positive;
            preds[fn_idx].p_abnormal = 0.9;
            let after = compute_metrics(&preds).unwrap();
            assert!(after.recall >= before.recall);
            assert!(after.f1 >= before.f1);
            assert!(after.accuracy >= before.accuracy);
        }
    }

    proptest! {
        // Brute-force oracle: recount the confusion directly and recompute
        // every metric from first principles.
        #[test]
        fn metrics_match_brute_force(
            labels in proptest::collection::vec((any::<bool>(), any::<bool>()), 2..80)
        ) {
            prop_assume!(labels.iter().any(|(t, _)| *t) && labels.iter().any(|(t, _)| !*t));
            let preds: Vec<Prediction> = labels
                .iter()
                .enumerate()
                .map(|(i, (truth, predicted))| Prediction {
                    sample_id: format!("s{i}"),
                    true_label: if *truth { Label::Positive } else { Label::Negative },
                    p_abnormal: if *predicted { 0.8 } else { 0.2 },
                    predicted: if *predicted { Label::Positive } else { Label::Negative },
                })
                .collect();
            let report = compute_metrics(&preds).unwrap();
            let tp = labels.iter().filter(|(t, p)| *t && *p).count();
            let fp = labels.iter().filter(|(t, p)| !*t && *p).count();
            let fn_ = labels.iter().filter(|(t, p)| *t && !*p).count();
            let tn = labels.iter().filter(|(t, p)| !*t && !*p).count();
            prop_assert_eq!(report.counts, ConfusionCounts { tp, fp, fn_, tn });
            prop_assert_eq!(report.counts.total(), preds.len());
            let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
            let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
            prop_assert!((report.precision - precision).abs() < 1e-12);
            prop_assert!((report.recall - recall).abs() < 1e-12);
            let f1 = if precision + recall == 0.0 { 0.0 } else {
                2.0 * precision * recall / (precision + recall)
            };
            prop_assert!((report.f1 - f1).abs() < 1e-12);
            prop_assert!((report.accuracy - (tp + tn) as f64 / preds.len() as f64).abs() < 1e-12);
        }
    }
}
