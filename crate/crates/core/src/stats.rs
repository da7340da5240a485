//! Corpus statistics: mention summaries, indication-conditioned negative
//! rates, the 2×2 χ² independence test, and split-shift comparison.

pub mod gamma;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::labeler::{indication_mentions, Lexicon};
use crate::report::{Condition, LabelValue, LabelVector, Report};

pub type MentionSets = HashMap<String, BTreeSet<Condition>>;

/// Indication mention sets for every report, keyed by study id.
pub fn mention_sets(reports: &[Report], lexicon: &Lexicon) -> MentionSets {
    reports
        .iter()
        .map(|r| (r.study_id.clone(), indication_mentions(&r.indication, lexicon)))
        .collect()
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn lookup<'a>(
    id: &str,
    labels: &'a HashMap<String, LabelVector>,
    mentions: &'a MentionSets,
) -> Result<(&'a LabelVector, &'a BTreeSet<Condition>)> {
    let l = labels.get(id).ok_or_else(|| Error::MissingLabels(id.to_string()))?;
    let m = mentions
        .get(id)
        .ok_or_else(|| Error::Misaligned(format!("no indication mention set for study_id {id:?}")))?;
    Ok((l, m))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConditionCounts {
    /// Reports where the condition is labeled negative.
    pub negative_mentions: u64,
    /// Reports whose indication mentions the condition.
    pub indication_mentions: u64,
    /// Of those, reports with at least one negative mention of any condition.
    pub indication_reports_with_negative: u64,
}

/// Integer counts behind a corpus summary. All ratios are derived from these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusSummary {
    pub report_count: u64,
    pub no_finding_reports: u64,
    pub positive_mentions: u64,
    pub negative_mentions: u64,
    pub positive_mentions_non_no_finding: u64,
    pub negative_mentions_non_no_finding: u64,
    pub per_condition: [ConditionCounts; Condition::COUNT],
}

impl Default for CorpusSummary {
    fn default() -> Self {
        Self {
            report_count: 0,
            no_finding_reports: 0,
            positive_mentions: 0,
            negative_mentions: 0,
            positive_mentions_non_no_finding: 0,
            negative_mentions_non_no_finding: 0,
            per_condition: [ConditionCounts::default(); Condition::COUNT],
        }
    }
}

impl CorpusSummary {
    /// Counts for a single report.
    pub fn of_report(labels: &LabelVector, mentions: &BTreeSet<Condition>) -> Self {
        let no_finding = labels.get(Condition::NoFinding) == LabelValue::Positive;
        let count = |value| Condition::findings().filter(|&c| labels.get(c) == value).count() as u64;
        let pos = count(LabelValue::Positive);
        let neg = count(LabelValue::Negative);
        let mut per_condition = [ConditionCounts::default(); Condition::COUNT];
        for c in Condition::ALL {
            let slot = &mut per_condition[c.index()];
            slot.negative_mentions = u64::from(labels.get(c) == LabelValue::Negative);
            if mentions.contains(&c) {
                slot.indication_mentions = 1;
                slot.indication_reports_with_negative = u64::from(neg > 0);
            }
        }
        Self {
            report_count: 1,
            no_finding_reports: u64::from(no_finding),
            positive_mentions: pos,
            negative_mentions: neg,
            positive_mentions_non_no_finding: if no_finding { 0 } else { pos },
            negative_mentions_non_no_finding: if no_finding { 0 } else { neg },
            per_condition,
        }
    }

    /// Associative, commutative combination of partial counts.
    pub fn merge(mut self, other: &CorpusSummary) -> Self {
        self.report_count += other.report_count;
        self.no_finding_reports += other.no_finding_reports;
        self.positive_mentions += other.positive_mentions;
        self.negative_mentions += other.negative_mentions;
        self.positive_mentions_non_no_finding += other.positive_mentions_non_no_finding;
        self.negative_mentions_non_no_finding += other.negative_mentions_non_no_finding;
        for (a, b) in self.per_condition.iter_mut().zip(other.per_condition.iter()) {
            a.negative_mentions += b.negative_mentions;
            a.indication_mentions += b.indication_mentions;
            a.indication_reports_with_negative += b.indication_reports_with_negative;
        }
        self
    }

    pub fn non_no_finding_reports(&self) -> u64 {
        self.report_count - self.no_finding_reports
    }

    pub fn pct_no_finding(&self) -> Option<f64> {
        ratio(self.no_finding_reports, self.report_count).map(|r| 100.0 * r)
    }

    pub fn avg_positive_mentions(&self) -> Option<f64> {
        ratio(self.positive_mentions, self.report_count)
    }

    pub fn avg_positive_mentions_non_no_finding(&self) -> Option<f64> {
        ratio(self.positive_mentions_non_no_finding, self.non_no_finding_reports())
    }

    pub fn avg_negative_mentions(&self) -> Option<f64> {
        ratio(self.negative_mentions, self.report_count)
    }

    pub fn avg_negative_mentions_non_no_finding(&self) -> Option<f64> {
        ratio(self.negative_mentions_non_no_finding, self.non_no_finding_reports())
    }

    pub fn pct_negative_given_indication(&self, condition: Condition) -> Option<f64> {
        let c = &self.per_condition[condition.index()];
        ratio(c.indication_reports_with_negative, c.indication_mentions).map(|r| 100.0 * r)
    }

    /// Derived ratio fields, in output order.
    pub fn ratio_fields(&self) -> Vec<(String, Option<f64>)> {
        let mut out = vec![
            ("pct_no_finding".to_string(), self.pct_no_finding()),
            ("avg_positive_mentions".into(), self.avg_positive_mentions()),
            (
                "avg_positive_mentions_non_no_finding".into(),
                self.avg_positive_mentions_non_no_finding(),
            ),
            ("avg_negative_mentions".into(), self.avg_negative_mentions()),
            (
                "avg_negative_mentions_non_no_finding".into(),
                self.avg_negative_mentions_non_no_finding(),
            ),
        ];
        for c in Condition::ALL {
            out.push((
                format!("pct_negative_given_indication:{}", c.name()),
                self.pct_negative_given_indication(c),
            ));
        }
        out
    }

    fn count_fields(&self) -> Vec<(String, u64)> {
        let mut out = vec![
            ("report_count".to_string(), self.report_count),
            ("no_finding_reports".into(), self.no_finding_reports),
            ("positive_mentions".into(), self.positive_mentions),
            ("negative_mentions".into(), self.negative_mentions),
            (
                "positive_mentions_non_no_finding".into(),
                self.positive_mentions_non_no_finding,
            ),
            (
                "negative_mentions_non_no_finding".into(),
                self.negative_mentions_non_no_finding,
            ),
        ];
        for c in Condition::ALL {
            let cc = &self.per_condition[c.index()];
            out.push((format!("negative_mentions:{}", c.name()), cc.negative_mentions));
            out.push((format!("indication_mentions:{}", c.name()), cc.indication_mentions));
            out.push((
                format!("indication_reports_with_negative:{}", c.name()),
                cc.indication_reports_with_negative,
            ));
        }
        out
    }

    /// Long-form `field,value` CSV. Undefined ratios are written as `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("field,value\n");
        for (k, v) in self.count_fields() {
            let _ = writeln!(out, "{k},{v}");
        }
        for (k, v) in self.ratio_fields() {
            let _ = writeln!(out, "{k},{}", fmt_opt(v));
        }
        out
    }

    /// Reads the counts back from [`CorpusSummary::to_csv`] output; ratio rows are ignored.
    pub fn from_csv(text: &str, path: &Path) -> Result<CorpusSummary> {
        let mut values: HashMap<String, u64> = HashMap::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(',').ok_or_else(|| Error::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                field: "<row>".into(),
                message: "expected field,value".into(),
            })?;
            if let Ok(n) = v.trim().parse::<u64>() {
                values.insert(k.trim().to_string(), n);
            }
        }
        let mut s = CorpusSummary::default();
        let get = |k: &str| {
            values.get(k).copied().ok_or_else(|| Error::Malformed {
                path: path.to_path_buf(),
                line: 0,
                field: k.to_string(),
                message: "missing summary field".into(),
            })
        };
        s.report_count = get("report_count")?;
        s.no_finding_reports = get("no_finding_reports")?;
        s.positive_mentions = get("positive_mentions")?;
        s.negative_mentions = get("negative_mentions")?;
        s.positive_mentions_non_no_finding = get("positive_mentions_non_no_finding")?;
        s.negative_mentions_non_no_finding = get("negative_mentions_non_no_finding")?;
        for c in Condition::ALL {
            let cc = &mut s.per_condition[c.index()];
            cc.negative_mentions = get(&format!("negative_mentions:{}", c.name()))?;
            cc.indication_mentions = get(&format!("indication_mentions:{}", c.name()))?;
            cc.indication_reports_with_negative = get(&format!("indication_reports_with_negative:{}", c.name()))?;
        }
        Ok(s)
    }

    /// Fixed-width table for terminals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<52}{:>12}", "#Reports", self.report_count);
        let rows = [
            ("% No Finding", self.pct_no_finding()),
            ("avg. #positive mentions", self.avg_positive_mentions()),
            (
                "avg. #positive mentions (not No Finding)",
                self.avg_positive_mentions_non_no_finding(),
            ),
            ("avg. #negative mentions", self.avg_negative_mentions()),
            (
                "avg. #negative mentions (not No Finding)",
                self.avg_negative_mentions_non_no_finding(),
            ),
        ];
        for (name, v) in rows {
            let _ = writeln!(out, "{name:<52}{:>12}", fmt_fixed(v, 3));
        }
        let _ = writeln!(
            out,
            "\n{:<28}{:>10}{:>12}{:>14}",
            "Condition", "#neg", "#in-ind.", "%neg|in-ind."
        );
        for c in Condition::ALL {
            let cc = &self.per_condition[c.index()];
            let _ = writeln!(
                out,
                "{:<28}{:>10}{:>12}{:>14}",
                c.name(),
                cc.negative_mentions,
                cc.indication_mentions,
                fmt_fixed(self.pct_negative_given_indication(c), 1)
            );
        }
        out
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

fn fmt_fixed(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.digits$}"))
}

/// Summarizes a labeled corpus. `labels` and `mentions` must cover every report.
pub fn summarize(
    reports: &[Report],
    labels: &HashMap<String, LabelVector>,
    mentions: &MentionSets,
) -> Result<CorpusSummary> {
    reports.iter().try_fold(CorpusSummary::default(), |acc, r| {
        let (l, m) = lookup(&r.study_id, labels, mentions)?;
        Ok(acc.merge(&CorpusSummary::of_report(l, m)))
    })
}

/// Rows: condition in / not in the indication. Columns: negative / not mentioned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ContingencyTable2x2 {
    /// negative, in indication
    pub a: u64,
    /// not mentioned, in indication
    pub b: u64,
    /// negative, not in indication
    pub c: u64,
    /// not mentioned, not in indication
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Self { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalRates {
    pub condition: Condition,
    /// P(negative | in indication); `None` when no such report exists.
    pub p_in: Option<f64>,
    /// P(negative | not in indication).
    pub p_out: Option<f64>,
    pub table: ContingencyTable2x2,
}

/// Negative-mention rates conditioned on the indication, over reports where
/// the condition is negative or not mentioned.
pub fn conditional_negative_rates(
    reports: &[Report],
    labels: &HashMap<String, LabelVector>,
    mentions: &MentionSets,
    condition: Condition,
) -> Result<ConditionalRates> {
    if condition.is_no_finding() {
        return Err(Error::InvalidCondition(condition.name().into()));
    }
    let mut t = ContingencyTable2x2::default();
    for r in reports {
        let (l, m) = lookup(&r.study_id, labels, mentions)?;
        let in_indication = m.contains(&condition);
        match (l.get(condition), in_indication) {
            (LabelValue::Negative, true) => t.a += 1,
            (LabelValue::NotMentioned, true) => t.b += 1,
            (LabelValue::Negative, false) => t.c += 1,
            (LabelValue::NotMentioned, false) => t.d += 1,
            _ => {}
        }
    }
    Ok(ConditionalRates {
        condition,
        p_in: ratio(t.a, t.a + t.b),
        p_out: ratio(t.c, t.c + t.d),
        table: t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub p_value: f64,
}

/// Pearson χ² test of independence on a 2×2 table (1 degree of freedom,
/// no continuity correction).
pub fn chi_square_test(table: &ContingencyTable2x2) -> Result<ChiSquare> {
    let cells = [[table.a, table.b], [table.c, table.d]].map(|row| row.map(|v| v as f64));
    let rows = [cells[0][0] + cells[0][1], cells[1][0] + cells[1][1]];
    let cols = [cells[0][0] + cells[1][0], cells[0][1] + cells[1][1]];
    if rows.iter().chain(cols.iter()).any(|&m| m == 0.0) {
        return Err(Error::DegenerateTable);
    }
    let n = rows[0] + rows[1];
    let mut statistic = 0.0;
    for (i, row) in cells.iter().enumerate() {
        for (j, &observed) in row.iter().enumerate() {
            let expected = rows[i] * cols[j] / n;
            statistic += (observed - expected).powi(2) / expected;
        }
    }
    Ok(ChiSquare {
        statistic,
        p_value: gamma::chi_square_sf(statistic, 1.0),
    })
}

/// Significance marker used in output tables.
pub fn significance_stars(p_value: f64) -> &'static str {
    if p_value < 0.001 {
        "***"
    } else if p_value < 0.01 {
        "**"
    } else if p_value < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldShift {
    pub field: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// b − a
    pub abs_delta: Option<f64>,
    /// (b − a) / a
    pub rel_delta: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftReport {
    pub threshold: f64,
    pub fields: Vec<FieldShift>,
}

impl ShiftReport {
    pub fn flagged(&self) -> impl Iterator<Item = &FieldShift> {
        self.fields.iter().filter(|f| f.flagged)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("field,a,b,abs_delta,rel_delta,flagged\n");
        for f in &self.fields {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                f.field,
                fmt_opt(f.a),
                fmt_opt(f.b),
                fmt_opt(f.abs_delta),
                fmt_opt(f.rel_delta),
                f.flagged
            );
        }
        out
    }
}

pub const DEFAULT_SHIFT_THRESHOLD: f64 = 0.25;

/// Compares the ratio fields of two summaries. A field is flagged when its
/// relative change exceeds `threshold`, or when it moves away from zero.
pub fn shift_report(a: &CorpusSummary, b: &CorpusSummary, threshold: f64) -> ShiftReport {
    let fields = a
        .ratio_fields()
        .into_iter()
        .zip(b.ratio_fields())
        .map(|((field, va), (_, vb))| {
            let (abs_delta, rel_delta, flagged) = match (va, vb) {
                (Some(x), Some(y)) => {
                    let d = y - x;
                    if x == 0.0 {
                        (Some(d), None, d != 0.0)
                    } else {
                        let r = d / x;
                        (Some(d), Some(r), r.abs() > threshold)
                    }
                }
                _ => (None, None, false),
            };
            FieldShift {
                field,
                a: va,
                b: vb,
                abs_delta,
                rel_delta,
                flagged,
            }
        })
        .collect();
    ShiftReport { threshold, fields }
}
