//! Label-based F1, BLEU-2 and keyword hallucination metrics.

mod bleu;
mod f1;
mod hallucination;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bleu::{bleu2, corpus_bleu, BleuScore};
pub use f1::{
    align, class_f1, negative_f1, positive_f1, Averaging, ConditionScore, Confusion, F1Score, NEGATIVE_FIVE,
    POSITIVE_FIVE,
};
pub use hallucination::{
    hallucination_rate, stem_matches, Category, CategoryRate, HallucinationReport, KeywordCatalog,
};

use crate::corpus::LabeledStudy;
use crate::error::{Error, Result};
use crate::labeler::{label_report, Lexicon};
use crate::report::{Condition, LabelValue, Report};

/// How the Positive F1-5 condition set is chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositiveFive {
    #[default]
    Fixed,
    /// Five most frequent positive conditions in the reference labels,
    /// ties broken by canonical order.
    FromReference,
}

impl FromStr for PositiveFive {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(PositiveFive::Fixed),
            "from-reference" => Ok(PositiveFive::FromReference),
            other => Err(format!(
                "unknown positive-five mode {other:?} (expected fixed or from-reference)"
            )),
        }
    }
}

impl fmt::Display for PositiveFive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PositiveFive::Fixed => "fixed",
            PositiveFive::FromReference => "from-reference",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MetricsOptions {
    pub averaging: Averaging,
    pub positive_five: PositiveFive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Support {
    pub condition: Condition,
    pub positive: u64,
    pub negative: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub reports: usize,
    pub averaging: Averaging,
    pub positive_five: Vec<Condition>,
    pub negative_five: Vec<Condition>,
    pub pos_f1: F1Score,
    pub pos_f1_5: F1Score,
    pub neg_f1: F1Score,
    pub neg_f1_5: F1Score,
    pub bleu2: f64,
    pub clean_bleu2: f64,
    pub hallucination: HallucinationReport,
    pub support: Vec<Support>,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "model,pos_f1,pos_f1_5,bleu2,clean_bleu2,neg_f1,neg_f1_5,hallucination";

    /// One row in the column order of [`Self::CSV_HEADER`], three decimals.
    pub fn csv_row(&self, model: &str) -> String {
        format!(
            "{model},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}",
            self.pos_f1.score,
            self.pos_f1_5.score,
            self.bleu2,
            self.clean_bleu2,
            self.neg_f1.score,
            self.neg_f1_5.score,
            self.hallucination.rate
        )
    }
}

/// Most frequent positive finding conditions in `labels`.
pub fn top_positive_conditions(labels: &[LabeledStudy], k: usize) -> Vec<Condition> {
    let mut counts: Vec<(Condition, usize)> = Condition::findings()
        .map(|c| {
            (
                c,
                labels
                    .iter()
                    .filter(|s| s.labels.get(c) == LabelValue::Positive)
                    .count(),
            )
        })
        .collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    counts.into_iter().take(k).map(|(c, _)| c).collect()
}

fn label_impressions(reports: &[&Report], lexicon: &Lexicon) -> Vec<LabeledStudy> {
    reports
        .iter()
        .map(|r| LabeledStudy {
            study_id: r.study_id.clone(),
            labels: label_report(&r.impression, lexicon),
        })
        .collect()
}

fn order_like<'a>(reference: &[Report], other: &'a [Report], what: &str) -> Result<Vec<&'a Report>> {
    if other.len() != reference.len() {
        return Err(Error::Misaligned(format!(
            "{} {what} reports for {} references",
            other.len(),
            reference.len()
        )));
    }
    let by_id: HashMap<&str, &Report> = other.iter().map(|r| (r.study_id.as_str(), r)).collect();
    reference
        .iter()
        .map(|r| {
            by_id
                .get(r.study_id.as_str())
                .copied()
                .ok_or_else(|| Error::Misaligned(format!("no {what} report for study_id {:?}", r.study_id)))
        })
        .collect()
}

/// Labels all three corpora and scores the generated impressions. F1 and
/// BLEU-2 compare against the original references; Clean BLEU-2 against the
/// cleaned ones.
pub fn evaluate_generation(
    generated: &[Report],
    reference_original: &[Report],
    reference_clean: &[Report],
    lexicon: &Lexicon,
    catalog: &KeywordCatalog,
    options: MetricsOptions,
) -> Result<MetricsReport> {
    let gen = order_like(reference_original, generated, "generated")?;
    let clean = order_like(reference_original, reference_clean, "clean reference")?;
    let orig: Vec<&Report> = reference_original.iter().collect();

    let pred_labels = label_impressions(&gen, lexicon);
    let ref_labels = label_impressions(&orig, lexicon);
    let pairs = align(&pred_labels, &ref_labels)?;

    let findings: Vec<Condition> = Condition::findings().collect();
    let positive_five = match options.positive_five {
        PositiveFive::Fixed => POSITIVE_FIVE.to_vec(),
        PositiveFive::FromReference => top_positive_conditions(&ref_labels, 5),
    };
    let avg = options.averaging;

    let gen_text: Vec<&str> = gen.iter().map(|r| r.impression.as_str()).collect();
    let orig_text: Vec<&str> = orig.iter().map(|r| r.impression.as_str()).collect();
    let clean_text: Vec<&str> = clean.iter().map(|r| r.impression.as_str()).collect();

    let support = findings
        .iter()
        .map(|&c| Support {
            condition: c,
            positive: ref_labels
                .iter()
                .filter(|s| s.labels.get(c) == LabelValue::Positive)
                .count() as u64,
            negative: ref_labels
                .iter()
                .filter(|s| s.labels.get(c) == LabelValue::Negative)
                .count() as u64,
        })
        .collect();

    Ok(MetricsReport {
        reports: orig.len(),
        averaging: avg,
        pos_f1: class_f1(&pairs, &findings, LabelValue::Positive, avg)?,
        pos_f1_5: class_f1(&pairs, &positive_five, LabelValue::Positive, avg)?,
        neg_f1: class_f1(&pairs, &findings, LabelValue::Negative, avg)?,
        neg_f1_5: class_f1(&pairs, &NEGATIVE_FIVE, LabelValue::Negative, avg)?,
        positive_five,
        negative_five: NEGATIVE_FIVE.to_vec(),
        bleu2: bleu2(&gen_text, &orig_text)?,
        clean_bleu2: bleu2(&gen_text, &clean_text)?,
        hallucination: hallucination_rate(&gen_text, catalog),
        support,
    })
}
