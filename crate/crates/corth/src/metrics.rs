//! Confusion-matrix scores for parent-recovery decisions. The divide-by-zero
//! conventions match the benchmark tables: degenerate score ratios count 0/0
//! as a perfect 1 and x/0 as 0, while fall-out (lower is better) flips both.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Elementwise tally of a decision vector against the ground truth.
pub fn confusion(pred: &[bool], truth: &[bool]) -> Result<ConfusionCounts> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "decision vector",
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    let mut c = ConfusionCounts {
        true_pos: 0,
        false_pos: 0,
        true_neg: 0,
        false_neg: 0,
    };
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => c.true_pos += 1,
            (true, false) => c.false_pos += 1,
            (false, false) => c.true_neg += 1,
            (false, true) => c.false_neg += 1,
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub tpr: f64,
    pub fpr: f64,
    pub csi: f64,
    pub acc: f64,
    pub f1: f64,
    pub mcc: f64,
}

impl MetricsReport {
    /// Placeholder for runs that produced no decision vector at all.
    pub fn nan() -> Self {
        Self {
            tpr: f64::NAN,
            fpr: f64::NAN,
            csi: f64::NAN,
            acc: f64::NAN,
            f1: f64::NAN,
            mcc: f64::NAN,
        }
    }
}

/// Score ratio (higher is better): 0/0 counts as a perfect 1, x/0 as 0.
fn score_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        num / den
    }
}

/// Fall-out ratio (lower is better): conventions flip to 0/0 -> 0, x/0 -> 1.
fn fallout_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        num / den
    }
}

pub fn metrics(c: ConfusionCounts) -> MetricsReport {
    let tp = c.true_pos as f64;
    let fp = c.false_pos as f64;
    let tn = c.true_neg as f64;
    let missed = c.false_neg as f64;
    // Whenever the MCC denominator vanishes, one of tp/fp or tn/missed pairs
    // is all-zero, forcing the numerator to 0 as well; the blanket 0/0 -> 1
    // rule therefore covers every degenerate MCC.
    let mcc_den = ((tp + fp) * (tp + missed) * (tn + fp) * (tn + missed)).sqrt();
    MetricsReport {
        tpr: score_div(tp, tp + missed),
        fpr: fallout_div(fp, fp + tn),
        csi: score_div(tp, tp + missed + fp),
        acc: score_div(tp + tn, c.total() as f64),
        f1: score_div(2.0 * tp, 2.0 * tp + fp + missed),
        mcc: score_div(tp * tn - fp * missed, mcc_den),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(tp: usize, fp: usize, tn: usize, missed: usize) -> ConfusionCounts {
        ConfusionCounts {
            true_pos: tp,
            false_pos: fp,
            true_neg: tn,
            false_neg: missed,
        }
    }

    #[test]
    fn confusion_tallies_elementwise() {
        let c = confusion(&[true, false, true], &[true, false, true]).unwrap();
        assert_eq!(c, counts(2, 0, 1, 0));
        let c = confusion(&[true, true, false, false], &[true, false, true, false]).unwrap();
        assert_eq!(c, counts(1, 1, 1, 1));
        let c = confusion(&[false; 5], &[false; 5]).unwrap();
        assert_eq!(c, counts(0, 0, 5, 0));
        assert!(confusion(&[true], &[true, false]).is_err());
    }

    #[test]
    fn hand_evaluated_oracle() {
        let m = metrics(counts(2, 1, 6, 1));
        let tol = 1e-15;
        assert!((m.tpr - 2.0 / 3.0).abs() < tol);
        assert!((m.fpr - 1.0 / 7.0).abs() < tol);
        assert!((m.csi - 0.5).abs() < tol);
        assert!((m.acc - 0.8).abs() < tol);
        assert!((m.f1 - 2.0 / 3.0).abs() < tol);
        assert!((m.mcc - 11.0 / 21.0).abs() < tol);
    }

    #[test]
    fn perfect_prediction_scores_one() {
        let m = metrics(confusion(&[true, false, true], &[true, false, true]).unwrap());
        assert_eq!(
            (m.tpr, m.fpr, m.csi, m.acc, m.f1, m.mcc),
            (1.0, 0.0, 1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn all_negative_agreement_uses_degenerate_rules() {
        let m = metrics(counts(0, 0, 7, 0));
        assert_eq!(
            (m.tpr, m.fpr, m.csi, m.acc, m.f1, m.mcc),
            (1.0, 0.0, 1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn all_positive_prediction_on_all_negative_truth() {
        // fp = d, everything else 0: scores bottom out, fall-out pegs at 1.
        let m = metrics(counts(0, 4, 0, 0));
        assert_eq!(m.tpr, 1.0); // 0/0
        assert_eq!(m.fpr, 1.0); // 4/4
        assert_eq!(m.csi, 0.0);
        assert_eq!(m.acc, 0.0);
        assert_eq!(m.f1, 0.0);
        assert_eq!(m.mcc, 1.0); // degenerate 0/0
    }

    #[test]
    fn complement_prediction_gives_mcc_minus_one() {
        let truth = [true, true, false, false, true];
        let pred: Vec<bool> = truth.iter().map(|&t| !t).collect();
        let m = metrics(confusion(&pred, &truth).unwrap());
        assert_eq!(m.mcc, -1.0);
        assert_eq!(m.acc, 0.0);
    }

    #[test]
    fn report_serializes_with_flat_keys() {
        let m = metrics(counts(2, 1, 6, 1));
        let v: serde_json::Value = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        let obj = v.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(keys, vec!["acc", "csi", "f1", "fpr", "mcc", "tpr"]);
        assert!(obj.values().all(|v| v.is_number()));
    }

    proptest! {
        #[test]
        fn outputs_finite_and_in_range(
            tp in 0usize..1000,
            fp in 0usize..1000,
            tn in 0usize..1000,
            missed in 0usize..1000,
        ) {
            let m = metrics(counts(tp, fp, tn, missed));
            for v in [m.tpr, m.fpr, m.csi, m.acc, m.f1] {
                prop_assert!(v.is_finite() && (0.0..=1.0).contains(&v));
            }
            prop_assert!(m.mcc.is_finite() && (-1.0..=1.0).contains(&m.mcc));
            if tp + fp + tn + missed > 0 {
                let acc = (tp + tn) as f64 / (tp + fp + tn + missed) as f64;
                prop_assert_eq!(m.acc, acc);
            }
        }

        #[test]
        fn label_swap_preserves_accuracy_and_swaps_rates(
            (pred, truth) in proptest::collection::vec(any::<(bool, bool)>(), 1..32)
                .prop_map(|v| v.into_iter().unzip::<_, _, Vec<bool>, Vec<bool>>())
        ) {
            let m = metrics(confusion(&pred, &truth).unwrap());
            let flip = |v: &[bool]| v.iter().map(|&b| !b).collect::<Vec<bool>>();
            let s = metrics(confusion(&flip(&pred), &flip(&truth)).unwrap());
            prop_assert_eq!(m.acc, s.acc);
            // Swapping labels turns the true-positive rate into the
            // true-negative rate and vice versa.
            let c = confusion(&pred, &truth).unwrap();
            let tnr = score_div(c.true_neg as f64, (c.true_neg + c.false_pos) as f64);
            prop_assert_eq!(s.tpr, tnr);
            if pred == truth {
                prop_assert_eq!(m.mcc, 1.0);
            } else {
                let nondegenerate = (c.true_pos + c.false_pos) > 0
                    && (c.true_pos + c.false_neg) > 0
                    && (c.true_neg + c.false_pos) > 0
                    && (c.true_neg + c.false_neg) > 0;
                if nondegenerate {
                    prop_assert!(m.mcc < 1.0);
                }
            }
        }
    }
}
