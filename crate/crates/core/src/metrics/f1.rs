//! Per-condition binary F1 over label vectors.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::LabeledStudy;
use crate::error::{Error, Result};
use crate::report::{Condition, LabelValue, LabelVector};

/// Most frequent positive conditions, used for Positive F1-5 unless chosen from data.
pub const POSITIVE_FIVE: [Condition; 5] = [
    Condition::Atelectasis,
    Condition::Cardiomegaly,
    Condition::Consolidation,
    Condition::Edema,
    Condition::PleuralEffusion,
];

/// Conditions used for Negative F1-5.
pub const NEGATIVE_FIVE: [Condition; 5] = [
    Condition::Pneumothorax,
    Condition::Pneumonia,
    Condition::Edema,
    Condition::PleuralEffusion,
    Condition::Consolidation,
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    #[default]
    Macro,
    Micro,
}

impl FromStr for Averaging {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "macro" => Ok(Averaging::Macro),
            "micro" => Ok(Averaging::Micro),
            other => Err(format!("unknown averaging mode {other:?} (expected macro or micro)")),
        }
    }
}

impl fmt::Display for Averaging {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Averaging::Macro => "macro",
            Averaging::Micro => "micro",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn precision(&self) -> f64 {
        safe_div(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        safe_div(self.tp, self.tp + self.fn_)
    }

    /// 2PR / (P + R), or 0 when P + R = 0.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Reference-side count of the positive class.
    pub fn support(&self) -> u64 {
        self.tp + self.fn_
    }
}

fn safe_div(n: u64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionScore {
    pub condition: Condition,
    #[serde(flatten)]
    pub confusion: Confusion,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F1Score {
    pub averaging: Averaging,
    pub score: f64,
    pub per_condition: Vec<ConditionScore>,
}

/// Pairs predictions with references by study id, in reference order.
pub fn align<'a>(
    pred: &'a [LabeledStudy],
    reference: &'a [LabeledStudy],
) -> Result<Vec<(&'a LabelVector, &'a LabelVector)>> {
    if pred.len() != reference.len() {
        return Err(Error::Misaligned(format!(
            "{} predictions for {} references",
            pred.len(),
            reference.len()
        )));
    }
    let by_id: HashMap<&str, &LabelVector> = pred.iter().map(|s| (s.study_id.as_str(), &s.labels)).collect();
    reference
        .iter()
        .map(|r| {
            by_id
                .get(r.study_id.as_str())
                .map(|p| (*p, &r.labels))
                .ok_or_else(|| Error::Misaligned(format!("no prediction for study_id {:?}", r.study_id)))
        })
        .collect()
}

/// F1 where the positive class is `label == target`.
pub fn class_f1(
    pairs: &[(&LabelVector, &LabelVector)],
    conditions: &[Condition],
    target: LabelValue,
    averaging: Averaging,
) -> Result<F1Score> {
    if let Some(c) = conditions.iter().find(|c| c.is_no_finding()) {
        return Err(Error::InvalidCondition(c.name().into()));
    }
    let per_condition: Vec<ConditionScore> = conditions
        .iter()
        .map(|&c| {
            let mut m = Confusion::default();
            for (p, r) in pairs {
                match (p.get(c) == target, r.get(c) == target) {
                    (true, true) => m.tp += 1,
                    (true, false) => m.fp += 1,
                    (false, true) => m.fn_ += 1,
                    (false, false) => {}
                }
            }
            ConditionScore {
                condition: c,
                confusion: m,
                support: m.support(),
                precision: m.precision(),
                recall: m.recall(),
                f1: m.f1(),
            }
        })
        .collect();
    let score = match averaging {
        _ if per_condition.is_empty() => 0.0,
        Averaging::Macro => per_condition.iter().map(|s| s.f1).sum::<f64>() / per_condition.len() as f64,
        Averaging::Micro => {
            let total = per_condition.iter().fold(Confusion::default(), |acc, s| Confusion {
                tp: acc.tp + s.confusion.tp,
                fp: acc.fp + s.confusion.fp,
                fn_: acc.fn_ + s.confusion.fn_,
            });
            total.f1()
        }
    };
    Ok(F1Score {
        averaging,
        score,
        per_condition,
    })
}

pub fn positive_f1(
    pred: &[LabeledStudy],
    reference: &[LabeledStudy],
    conditions: &[Condition],
    averaging: Averaging,
) -> Result<F1Score> {
    class_f1(&align(pred, reference)?, conditions, LabelValue::Positive, averaging)
}

pub fn negative_f1(
    pred: &[LabeledStudy],
    reference: &[LabeledStudy],
    conditions: &[Condition],
    averaging: Averaging,
) -> Result<F1Score> {
    class_f1(&align(pred, reference)?, conditions, LabelValue::Negative, averaging)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Condition::*;
    use LabelValue::*;

    fn study(id: &str, pairs: &[(Condition, LabelValue)]) -> LabeledStudy {
        LabeledStudy {
            study_id: id.into(),
            labels: pairs.iter().fold(LabelVector::new(), |v, &(c, l)| v.with(c, l)),
        }
    }

    fn all_findings() -> Vec<Condition> {
        Condition::findings().collect()
    }

    #[test]
    fn identity_is_one() {
        let refs: Vec<LabeledStudy> = Condition::findings()
            .enumerate()
            .map(|(i, c)| study(&format!("s{i}"), &[(c, Positive)]))
            .collect();
        let s = positive_f1(&refs, &refs, &all_findings(), Averaging::Macro).unwrap();
        assert_eq!(s.score, 1.0);
    }

    #[test]
    fn empty_predictions_score_zero() {
        let refs = vec![study("a", &[(Edema, Positive)]), study("b", &[(Edema, Negative)])];
        let preds = vec![study("a", &[]), study("b", &[])];
        assert_eq!(
            positive_f1(&preds, &refs, &[Edema], Averaging::Macro).unwrap().score,
            0.0
        );
        assert_eq!(
            negative_f1(&preds, &refs, &[Edema], Averaging::Macro).unwrap().score,
            0.0
        );
    }

    #[test]
    fn planted_confusion_two_thirds() {
        // TP=2, FP=1, FN=1 on Edema
        let refs = vec![
            study("1", &[(Edema, Positive)]),
            study("2", &[(Edema, Positive)]),
            study("3", &[(Edema, Positive)]),
            study("4", &[]),
        ];
        let preds = vec![
            study("1", &[(Edema, Positive)]),
            study("2", &[(Edema, Positive)]),
            study("3", &[(Edema, Negative)]),
            study("4", &[(Edema, Positive)]),
        ];
        let s = positive_f1(&preds, &refs, &[Edema], Averaging::Macro).unwrap();
        assert!((s.score - 2.0 / 3.0).abs() < 1e-15);
        let c = &s.per_condition[0];
        assert_eq!((c.confusion.tp, c.confusion.fp, c.confusion.fn_), (2, 1, 1));
    }

    #[test]
    fn negative_planted_tp1_fn1() {
        let refs = vec![
            study("1", &[(Pneumonia, Negative)]),
            study("2", &[(Pneumonia, Negative)]),
        ];
        let preds = vec![study("1", &[(Pneumonia, Negative)]), study("2", &[])];
        let s = negative_f1(&preds, &refs, &[Pneumonia], Averaging::Macro).unwrap();
        assert!((s.score - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn macro_counts_empty_support_as_zero_micro_pools() {
        let refs = vec![study("1", &[(Edema, Positive)])];
        let s = positive_f1(&refs, &refs, &[Edema, Fracture], Averaging::Macro).unwrap();
        assert_eq!(s.score, 0.5);
        assert_eq!(s.per_condition[1].support, 0);
        let s = positive_f1(&refs, &refs, &[Edema, Fracture], Averaging::Micro).unwrap();
        assert_eq!(s.score, 1.0);
    }

    #[test]
    fn misalignment_and_no_finding_rejected() {
        let refs = vec![study("1", &[])];
        let preds = vec![study("2", &[])];
        assert!(matches!(
            positive_f1(&preds, &refs, &[Edema], Averaging::Macro),
            Err(Error::Misaligned(_))
        ));
        assert!(matches!(
            positive_f1(&refs, &[], &[Edema], Averaging::Macro),
            Err(Error::Misaligned(_))
        ));
        assert!(matches!(
            positive_f1(&refs, &refs, &[NoFinding], Averaging::Macro),
            Err(Error::InvalidCondition(_))
        ));
    }

    fn label_value() -> impl Strategy<Value = LabelValue> {
        prop_oneof![Just(Positive), Just(Negative), Just(Uncertain), Just(NotMentioned)]
    }

    fn corpus() -> impl Strategy<Value = Vec<[LabelValue; 13]>> {
        proptest::collection::vec(proptest::array::uniform13(label_value()), 1..20)
    }

    fn to_studies(rows: &[[LabelValue; 13]]) -> Vec<LabeledStudy> {
        rows.iter()
            .enumerate()
            .map(|(i, row)| LabeledStudy {
                study_id: format!("s{i}"),
                labels: Condition::findings()
                    .zip(row.iter())
                    .fold(LabelVector::new(), |v, (c, &l)| v.with(c, l)),
            })
            .collect()
    }

    fn swap_pos_unc(v: LabelValue) -> LabelValue {
        match v {
            Positive => Uncertain,
            Uncertain => Positive,
            o => o,
        }
    }

    proptest! {
        #[test]
        fn scores_in_unit_interval(p in corpus(), r in corpus(), micro in any::<bool>()) {
            let n = p.len().min(r.len());
            let (p, r) = (to_studies(&p[..n]), to_studies(&r[..n]));
            let avg = if micro { Averaging::Micro } else { Averaging::Macro };
            for s in [positive_f1(&p, &r, &all_findings(), avg).unwrap(), negative_f1(&p, &r, &all_findings(), avg).unwrap()] {
                prop_assert!((0.0..=1.0).contains(&s.score));
            }
        }

        #[test]
        fn negative_f1_ignores_positive_uncertain_swaps(p in corpus(), r in corpus()) {
            let n = p.len().min(r.len());
            let (p, r) = (&p[..n], &r[..n]);
            let p2: Vec<[LabelValue; 13]> = p.iter().map(|row| row.map(swap_pos_unc)).collect();
            let r2: Vec<[LabelValue; 13]> = r.iter().map(|row| row.map(swap_pos_unc)).collect();
            let a = negative_f1(&to_studies(p), &to_studies(r), &all_findings(), Averaging::Macro).unwrap();
            let b = negative_f1(&to_studies(&p2), &to_studies(&r2), &all_findings(), Averaging::Macro).unwrap();
            prop_assert_eq!(a.score, b.score);
        }

        #[test]
        fn identity_with_support_is_one(r in corpus()) {
            let r = to_studies(&r);
            let s = positive_f1(&r, &r, &all_findings(), Averaging::Micro).unwrap();
            let any_pos = r.iter().any(|s| !s.labels.positives().is_empty());
            prop_assert_eq!(s.score, if any_pos { 1.0 } else { 0.0 });
        }
    }
}
