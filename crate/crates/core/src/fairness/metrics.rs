use serde::{Deserialize, Serialize};

use super::Notion;
use crate::data::Dataset;
use crate::model::{sigmoid, ModelParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl Confusion {
    fn add(&mut self, label: u8, predicted: bool) {
        match (label == 1, predicted) {
            (true, true) => self.true_pos += 1,
            (true, false) => self.false_neg += 1,
            (false, true) => self.false_pos += 1,
            (false, false) => self.true_neg += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn fnr(&self) -> Option<f64> {
        ratio(self.false_neg, self.false_neg + self.true_pos)
    }

    pub fn fpr(&self) -> Option<f64> {
        ratio(self.false_pos, self.false_pos + self.true_neg)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Confusion counts per group plus the pooled totals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupConfusion {
    pub groups: Vec<Confusion>,
    pub overall: Confusion,
}

impl GroupConfusion {
    pub fn tally(data: &Dataset, predictions: &[bool]) -> Self {
        let mut groups = vec![Confusion::default(); data.num_groups()];
        let mut overall = Confusion::default();
        for (s, &p) in data.samples().iter().zip(predictions) {
            groups[s.group].add(s.label, p);
            overall.add(s.label, p);
        }
        GroupConfusion { groups, overall }
    }
}

/// Accuracy, error rates and violations of one model on one dataset.
/// Serialises as a flat object; undefined values become `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub accuracy: f64,
    pub fnr: Option<f64>,
    pub fpr: Option<f64>,
    pub fnr_by_group: Vec<Option<f64>>,
    pub fpr_by_group: Vec<Option<f64>>,
    pub delta_eopp: Option<f64>,
    pub delta_eo: Option<f64>,
    pub delta_ap: Option<f64>,
}

impl FairnessReport {
    pub fn from_confusion(c: &GroupConfusion) -> Self {
        let o = &c.overall;
        let accuracy = (o.true_pos + o.true_neg) as f64 / o.total() as f64;
        let fnr = o.fnr();
        let fpr = o.fpr();
        let fnr_by_group: Vec<Option<f64>> = c.groups.iter().map(Confusion::fnr).collect();
        let fpr_by_group: Vec<Option<f64>> = c.groups.iter().map(Confusion::fpr).collect();
        let fnr_gap = max_gap(&fnr_by_group, fnr);
        let fpr_gap = max_gap(&fpr_by_group, fpr);
        let (delta_eo, delta_ap) = match (fpr_gap, fnr_gap) {
            (Some(a), Some(b)) => (Some(a.max(b)), Some(a + b)),
            _ => (None, None),
        };
        FairnessReport {
            accuracy,
            fnr,
            fpr,
            fnr_by_group,
            fpr_by_group,
            delta_eopp: fnr_gap,
            delta_eo,
            delta_ap,
        }
    }
}

/// `max_a (rate_a - overall)`, undefined if any term is.
fn max_gap(by_group: &[Option<f64>], overall: Option<f64>) -> Option<f64> {
    let overall = overall?;
    by_group
        .iter()
        .map(|r| r.map(|r| r - overall))
        .try_fold(f64::NEG_INFINITY, |acc, gap| gap.map(|g| acc.max(g)))
}

/// Scores `data` with hard predictions `1[p >= threshold]`.
pub fn evaluate(params: &ModelParams, data: &Dataset, threshold: f64) -> Result<FairnessReport> {
    if data.feature_dim() != params.arch().input_dim() {
        return Err(Error::DimensionMismatch {
            expected: params.arch().input_dim(),
            actual: data.feature_dim(),
        });
    }
    let predictions: Vec<bool> = data
        .samples()
        .iter()
        .map(|s| sigmoid(params.logit(&s.features)) >= threshold)
        .collect();
    Ok(evaluate_predictions(data, &predictions))
}

/// # Panics
///
/// If `predictions.len() != data.len()`.
pub fn evaluate_predictions(data: &Dataset, predictions: &[bool]) -> FairnessReport {
    assert_eq!(predictions.len(), data.len(), "one prediction per sample");
    FairnessReport::from_confusion(&GroupConfusion::tally(data, predictions))
}

pub fn violation(report: &FairnessReport, notion: Notion) -> Option<f64> {
    match notion {
        Notion::EOpp => report.delta_eopp,
        Notion::EO => report.delta_eo,
        Notion::AP => report.delta_ap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;
    use proptest::prelude::*;

    /// Builds samples with explicit per-group confusion counts.
    fn constructed(cells: &[(usize, Confusion)]) -> (Dataset, Vec<bool>) {
        let mut samples = Vec::new();
        let mut preds = Vec::new();
        let num_groups = cells.iter().map(|(g, _)| g + 1).max().unwrap();
        for &(g, c) in cells {
            for (n, label, pred) in [
                (c.true_pos, 1, true),
                (c.false_neg, 1, false),
                (c.false_pos, 0, true),
                (c.true_neg, 0, false),
            ] {
                for _ in 0..n {
                    samples.push(Sample {
                        features: vec![0.0],
                        label,
                        group: g,
                    });
                    preds.push(pred);
                }
            }
        }
        (Dataset::new(samples, 1, num_groups).unwrap(), preds)
    }

    #[test]
    fn hand_case_forty_samples() {
        // Group 0: 10 positives (2 FN), 10 negatives (1 FP) -> FNR .2, FPR .1
        // Group 1: 10 positives (4 FN), 10 negatives (3 FP) -> FNR .4, FPR .3
        // Overall FNR 6/20 = .3, FPR 4/20 = .2
        let (d, p) = constructed(&[
            (
                0,
                Confusion {
                    true_pos: 8,
                    false_neg: 2,
                    false_pos: 1,
                    true_neg: 9,
                },
            ),
            (
                1,
                Confusion {
                    true_pos: 6,
                    false_neg: 4,
                    false_pos: 3,
                    true_neg: 7,
                },
            ),
        ]);
        assert_eq!(d.len(), 40);
        let r = evaluate_predictions(&d, &p);
        assert_eq!(r.fnr, Some(0.3));
        assert_eq!(r.fpr, Some(0.2));
        assert_eq!(r.fnr_by_group, vec![Some(0.2), Some(0.4)]);
        assert_eq!(r.fpr_by_group, vec![Some(0.1), Some(0.3)]);
        let close = |a: Option<f64>, b: f64| (a.unwrap() - b).abs() < 1e-12;
        assert!(close(r.delta_eopp, 0.1));
        assert!(close(r.delta_eo, 0.1));
        assert!(close(r.delta_ap, 0.2));
        assert!(close(violation(&r, Notion::AP), 0.2));
        assert_eq!(r.accuracy, 30.0 / 40.0);
    }

    #[test]
    fn perfect_classifier_has_zero_deltas() {
        let (d, p) = constructed(&[
            (
                0,
                Confusion {
                    true_pos: 3,
                    true_neg: 5,
                    ..Default::default()
                },
            ),
            (
                1,
                Confusion {
                    true_pos: 4,
                    true_neg: 2,
                    ..Default::default()
                },
            ),
        ]);
        let r = evaluate_predictions(&d, &p);
        for n in Notion::ALL {
            assert_eq!(violation(&r, n), Some(0.0));
        }
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn missing_positives_make_eopp_undefined() {
        let (d, p) = constructed(&[
            (
                0,
                Confusion {
                    true_pos: 3,
                    false_neg: 1,
                    true_neg: 5,
                    ..Default::default()
                },
            ),
            (
                1,
                Confusion {
                    false_pos: 1,
                    true_neg: 2,
                    ..Default::default()
                },
            ),
        ]);
        let r = evaluate_predictions(&d, &p);
        assert_eq!(r.fnr_by_group[1], None);
        assert_eq!(r.delta_eopp, None);
        assert_eq!(r.delta_eo, None);
        assert_eq!(violation(&r, Notion::EOpp), None);
        assert_eq!(r.accuracy, 10.0 / 12.0);
    }

    #[test]
    fn report_json_uses_null() {
        let (d, p) = constructed(&[
            (
                0,
                Confusion {
                    true_pos: 1,
                    true_neg: 1,
                    ..Default::default()
                },
            ),
            (
                1,
                Confusion {
                    true_neg: 1,
                    ..Default::default()
                },
            ),
        ]);
        let json = serde_json::to_value(evaluate_predictions(&d, &p)).unwrap();
        assert!(json["delta_eopp"].is_null());
        assert_eq!(json["accuracy"], 1.0);
        assert!(json.get("fnr_by_group").is_some());
    }

    #[test]
    fn evaluate_thresholds_probabilities() {
        use crate::model::Architecture;
        let params =
            ModelParams::new(Architecture::Linear { input_dim: 1 }, vec![1.0, 0.0]).unwrap();
        let d = Dataset::new(
            vec![
                Sample {
                    features: vec![0.0],
                    label: 1,
                    group: 0,
                },
                Sample {
                    features: vec![-1.0],
                    label: 1,
                    group: 1,
                },
            ],
            1,
            2,
        )
        .unwrap();
        // p(0) = 0.5 counts as positive at threshold 0.5.
        let r = evaluate(&params, &d, 0.5).unwrap();
        assert_eq!(r.fnr_by_group, vec![Some(0.0), Some(1.0)]);
        let r = evaluate(&params, &d, 0.6).unwrap();
        assert_eq!(r.fnr_by_group, vec![Some(1.0), Some(1.0)]);
    }

    fn arb_case() -> impl Strategy<Value = (Vec<(u8, usize, bool)>, usize)> {
        (2usize..4).prop_flat_map(|s| {
            (
                proptest::collection::vec((0u8..2, 0..s, any::<bool>()), 1..50),
                Just(s),
            )
        })
    }

    proptest! {
        #[test]
        fn eo_never_exceeds_ap_and_order_is_irrelevant((rows, s) in arb_case(), rot in 0usize..50) {
            let samples: Vec<Sample> = rows.iter().map(|&(y, g, _)| Sample { features: vec![0.0], label: y, group: g }).collect();
            let preds: Vec<bool> = rows.iter().map(|r| r.2).collect();
            let d = Dataset::new(samples.clone(), 1, s).unwrap();
            let r = evaluate_predictions(&d, &preds);
            if let (Some(eo), Some(ap)) = (r.delta_eo, r.delta_ap) {
                prop_assert!(eo <= ap + 1e-15);
            }
            let k = rot % samples.len();
            let mut s2 = samples.clone();
            s2.rotate_left(k);
            let mut p2 = preds.clone();
            p2.rotate_left(k);
            let r2 = evaluate_predictions(&Dataset::new(s2, 1, s).unwrap(), &p2);
            prop_assert_eq!(r, r2);
        }

        #[test]
        fn relabeling_groups_keeps_deltas((rows, s) in arb_case(), shift in 1usize..3) {
            let perm = |g: usize| (g + shift) % s;
            let samples: Vec<Sample> = rows.iter().map(|&(y, g, _)| Sample { features: vec![0.0], label: y, group: g }).collect();
            let relabeled: Vec<Sample> = samples.iter().map(|x| Sample { group: perm(x.group), ..x.clone() }).collect();
            let preds: Vec<bool> = rows.iter().map(|r| r.2).collect();
            let a = evaluate_predictions(&Dataset::new(samples, 1, s).unwrap(), &preds);
            let b = evaluate_predictions(&Dataset::new(relabeled, 1, s).unwrap(), &preds);
            prop_assert_eq!(a.delta_eopp, b.delta_eopp);
            prop_assert_eq!(a.delta_eo, b.delta_eo);
            prop_assert_eq!(a.delta_ap, b.delta_ap);
            for g in 0..s {
                prop_assert_eq!(a.fnr_by_group[g], b.fnr_by_group[perm(g)]);
                prop_assert_eq!(a.fpr_by_group[g], b.fpr_by_group[perm(g)]);
            }
        }
    }
}
