//! Seven-rule sentence cleaning with a label-preservation guard.
//!
//! Each rule runs only when one of its cue stems occurs in the sentence. A
//! rule's change is kept only if the sentence's fourteen labels are unchanged;
//! a deletion is kept only if the sentence had no labeled mention at all.

mod pattern;
mod remote;
mod rules;

use serde::{Serialize, Serializer};

pub use pattern::PatternBackend;
pub use remote::RemoteBackend;
pub use rules::{all_rules, rule, ActionKind, CleaningRule, REMOVED, RULES};

use crate::error::{Error, Result};
use crate::labeler::{label_sentence, Lexicon};
use crate::metrics::{bleu2, class_f1, Averaging, F1Score};
use crate::report::{normalize_text, segment_sentences, Condition, LabelValue, Report};

/// Failure reported by a rewrite backend.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{0}")]
pub struct BackendError(pub String);

/// Produces a rewritten sentence, or the token `REMOVED`, for one rule.
pub trait RewriteBackend: Sync {
    fn name(&self) -> &str;
    fn rewrite(&self, rule: &CleaningRule, sentence: &str) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cleaned {
    Kept(String),
    Removed,
}

impl Cleaned {
    /// Interprets backend output: empty text or any `REMOVED` token means deletion.
    pub fn from_output(raw: &str) -> Cleaned {
        let text = normalize_text(raw);
        if text.is_empty() || text.split(|c: char| !c.is_alphanumeric()).any(|t| t == REMOVED) {
            Cleaned::Removed
        } else {
            Cleaned::Kept(text)
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Cleaned::Kept(s) => s,
            Cleaned::Removed => REMOVED,
        }
    }

    pub fn is_removed(&self) -> bool {
        matches!(self, Cleaned::Removed)
    }
}

impl Serialize for Cleaned {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Applies one rule. Removed input passes through; a sentence without any
/// cue of the rule is returned without calling the backend.
pub fn apply_rule(sentence: &Cleaned, rule: &CleaningRule, backend: &dyn RewriteBackend) -> Result<Cleaned> {
    let text = match sentence {
        Cleaned::Removed => return Ok(Cleaned::Removed),
        Cleaned::Kept(t) => t,
    };
    if !rule.triggered(text) {
        return Ok(sentence.clone());
    }
    backend
        .rewrite(rule, text)
        .map(|out| Cleaned::from_output(&out))
        .map_err(|e| Error::Backend {
            rule_id: rule.id,
            sentence_index: None,
            message: e.0,
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepOutcome {
    /// Sentence was already removed by an earlier rule.
    PassThrough,
    NotTriggered,
    Unchanged,
    Accepted,
    DiscardedLabelChange,
    DiscardedLabeledRemoval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleStep {
    pub rule_id: u8,
    pub outcome: StepOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Cleaned>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceTrace {
    pub sentence_index: usize,
    pub original: String,
    pub steps: Vec<RuleStep>,
    pub result: Cleaned,
}

fn ordered(rules: &[CleaningRule]) -> Vec<&CleaningRule> {
    let mut v: Vec<&CleaningRule> = rules.iter().collect();
    v.sort_by_key(|r| r.id);
    v
}

/// Folds the rules over one sentence in ascending id order, recording each
/// rule's outcome and guard decision. The bare token `REMOVED` is treated as
/// an already removed sentence.
pub fn clean_sentence_traced(
    sentence: &str,
    rules: &[CleaningRule],
    backend: &dyn RewriteBackend,
    lexicon: &Lexicon,
) -> Result<SentenceTrace> {
    let original = normalize_text(sentence);
    let mut current = if original == REMOVED {
        Cleaned::Removed
    } else {
        Cleaned::Kept(original.clone())
    };
    let mut steps = Vec::with_capacity(rules.len());
    for rule in ordered(rules) {
        let step = match &current {
            Cleaned::Removed => RuleStep {
                rule_id: rule.id,
                outcome: StepOutcome::PassThrough,
                candidate: None,
            },
            Cleaned::Kept(text) if !rule.triggered(text) => RuleStep {
                rule_id: rule.id,
                outcome: StepOutcome::NotTriggered,
                candidate: None,
            },
            Cleaned::Kept(text) => {
                let candidate = apply_rule(&current, rule, backend)?;
                let outcome = if candidate == current {
                    StepOutcome::Unchanged
                } else {
                    let before = label_sentence(text, lexicon);
                    match &candidate {
                        Cleaned::Removed if before.is_empty() => StepOutcome::Accepted,
                        Cleaned::Removed => StepOutcome::DiscardedLabeledRemoval,
                        Cleaned::Kept(t) if label_sentence(t, lexicon) == before => StepOutcome::Accepted,
                        Cleaned::Kept(_) => StepOutcome::DiscardedLabelChange,
                    }
                };
                if outcome == StepOutcome::Accepted {
                    current = candidate.clone();
                }
                RuleStep {
                    rule_id: rule.id,
                    outcome,
                    candidate: (outcome != StepOutcome::Unchanged).then_some(candidate),
                }
            }
        };
        steps.push(step);
    }
    Ok(SentenceTrace {
        sentence_index: 0,
        original,
        steps,
        result: current,
    })
}

pub fn clean_sentence(
    sentence: &str,
    rules: &[CleaningRule],
    backend: &dyn RewriteBackend,
    lexicon: &Lexicon,
) -> Result<Cleaned> {
    Ok(clean_sentence_traced(sentence, rules, backend, lexicon)?.result)
}

fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_lowercase() => c.to_uppercase().chain(chars).collect(),
        _ => s.to_string(),
    }
}

/// Rejoins kept sentences with single spaces. Every sentence but the last is
/// given terminal punctuation and a leading capital so that segmenting the
/// result yields the same sentences.
pub fn join_sentences<S: AsRef<str>>(sentences: &[S]) -> String {
    let kept: Vec<&str> = sentences.iter().map(AsRef::as_ref).filter(|s| !s.is_empty()).collect();
    let n = kept.len();
    kept.iter()
        .enumerate()
        .map(|(i, s)| {
            let s = if i > 0 { capitalize_first(s) } else { s.to_string() };
            if i + 1 < n && !s.ends_with(['.', '!', '?']) {
                s + "."
            } else {
                s
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Cleans the impression sentence by sentence; other fields are unchanged.
pub fn clean_report_traced(
    report: &Report,
    rules: &[CleaningRule],
    backend: &dyn RewriteBackend,
    lexicon: &Lexicon,
) -> Result<(Report, Vec<SentenceTrace>)> {
    let mut traces = Vec::new();
    for s in segment_sentences(&report.impression) {
        let mut t = clean_sentence_traced(&s.text, rules, backend, lexicon).map_err(|e| match e {
            Error::Backend { rule_id, message, .. } => Error::Backend {
                rule_id,
                sentence_index: Some(s.index),
                message,
            },
            other => other,
        })?;
        t.sentence_index = s.index;
        traces.push(t);
    }
    let kept: Vec<&str> = traces
        .iter()
        .filter_map(|t| match &t.result {
            Cleaned::Kept(s) => Some(s.as_str()),
            Cleaned::Removed => None,
        })
        .collect();
    let cleaned = Report {
        impression: join_sentences(&kept),
        ..report.clone()
    };
    Ok((cleaned, traces))
}

pub fn clean_report(
    report: &Report,
    rules: &[CleaningRule],
    backend: &dyn RewriteBackend,
    lexicon: &Lexicon,
) -> Result<Report> {
    Ok(clean_report_traced(report, rules, backend, lexicon)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRecord {
    pub study_id: String,
    #[serde(flatten)]
    pub trace: SentenceTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanedCorpus {
    pub reports: Vec<Report>,
    pub audit: Vec<AuditRecord>,
}

/// Cleans every report on up to `jobs` threads. Output order matches input
/// order; the first failing report aborts the whole run.
pub fn clean_corpus(
    reports: &[Report],
    rules: &[CleaningRule],
    backend: &dyn RewriteBackend,
    lexicon: &Lexicon,
    jobs: usize,
) -> Result<CleanedCorpus> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<(Report, Vec<SentenceTrace>)> = pool.install(|| {
        reports
            .par_iter()
            .map(|r| clean_report_traced(r, rules, backend, lexicon))
            .collect::<Result<_>>()
    })?;
    let mut out = CleanedCorpus {
        reports: Vec::with_capacity(results.len()),
        audit: Vec::new(),
    };
    for (report, traces) in results {
        out.audit.extend(traces.into_iter().map(|trace| AuditRecord {
            study_id: report.study_id.clone(),
            trace,
        }));
        out.reports.push(report);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CleaningEvaluation {
    pub sentences: usize,
    pub pos_f1: F1Score,
    pub neg_f1: F1Score,
    pub em_accuracy: f64,
    pub bleu2: f64,
}

/// Sentence-level evaluation. F1 compares labels of the machine output with
/// labels of the originals, pooled over the thirteen finding conditions; EM
/// compares machine and manual text after whitespace normalization; BLEU-2
/// is machine against manual.
pub fn evaluate_cleaning<M: AsRef<str>, H: AsRef<str>, O: AsRef<str>>(
    machine: &[M],
    manual: &[H],
    originals: &[O],
    lexicon: &Lexicon,
) -> Result<CleaningEvaluation> {
    if machine.len() != manual.len() || machine.len() != originals.len() {
        return Err(Error::Misaligned(format!(
            "{} machine, {} manual and {} original sentences",
            machine.len(),
            manual.len(),
            originals.len()
        )));
    }
    let label = |s: &str| {
        if normalize_text(s) == REMOVED {
            crate::report::LabelVector::new()
        } else {
            label_sentence(s, lexicon)
        }
    };
    let pred: Vec<_> = machine.iter().map(|s| label(s.as_ref())).collect();
    let reference: Vec<_> = originals.iter().map(|s| label(s.as_ref())).collect();
    let pairs: Vec<_> = pred.iter().zip(&reference).collect();
    let findings: Vec<Condition> = Condition::findings().collect();
    let exact = machine
        .iter()
        .zip(manual)
        .filter(|(m, h)| normalize_text(m.as_ref()) == normalize_text(h.as_ref()))
        .count();
    let n = machine.len();
    Ok(CleaningEvaluation {
        sentences: n,
        pos_f1: class_f1(&pairs, &findings, LabelValue::Positive, Averaging::Micro)?,
        neg_f1: class_f1(&pairs, &findings, LabelValue::Negative, Averaging::Micro)?,
        em_accuracy: if n == 0 { 0.0 } else { exact as f64 / n as f64 },
        bleu2: bleu2(machine, manual)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// (rule id, original, cleaned) from the rule table and the main-text examples.
    pub(crate) const PAIRS: [(u8, &str, &str); 11] = [
        (
            1,
            "In comparison with the study of ___, there are slightly improved lung volumes.",
            "There are slightly improved lung volumes.",
        ),
        (
            1,
            "In comparison with the study of, there are slightly improved lung volumes.",
            "There are slightly improved lung volumes.",
        ),
        (
            2,
            "These findings were communicated via the radiology critical results dashboard at 12:57 p.m.",
            "REMOVED",
        ),
        (
            3,
            "Recommend advising patient to avoid palpating the area to avoid irritating it.",
            "REMOVED",
        ),
        (
            4,
            "Small lateral pneumothorax is present in this patient status post right first rib resection.",
            "Small lateral pneumothorax is present in this patient",
        ),
        (
            4,
            "Lateral view raises concern for pneumonia at the left lung base",
            "Concern for pneumonia at the left lung base",
        ),
        (5, "New large right pneumothorax", "Large right pneumothorax"),
        (
            5,
            "Mild interval increase in loculated right pleural effusion",
            "Loculated right pleural effusion.",
        ),
        (
            6,
            "Small right pleural effusion probably unchanged since",
            "Small right pleural effusion",
        ),
        (
            6,
            "Mild pulmonary edema appears slightly improved",
            "Mild pulmonary edema",
        ),
        (
            7,
            "Resolved opacities in the left mid lung.",
            "No opacities in the left mid lung.",
        ),
    ];

    fn pattern() -> PatternBackend {
        PatternBackend::default()
    }

    #[test]
    fn every_example_pair_single_rule_and_composed() {
        let lex = Lexicon::builtin();
        for (id, orig, want) in PAIRS {
            let got = apply_rule(&Cleaned::Kept(orig.into()), rule(id).unwrap(), &pattern()).unwrap();
            assert_eq!(got.as_str(), want, "rule {id} on {orig:?}");
            let got = clean_sentence(orig, &RULES, &pattern(), &lex).unwrap();
            assert_eq!(got.as_str(), want, "composed on {orig:?}");
        }
    }

    #[test]
    fn untriggered_rule_skips_backend() {
        struct Panics;
        impl RewriteBackend for Panics {
            fn name(&self) -> &str {
                "panics"
            }
            fn rewrite(&self, _: &CleaningRule, _: &str) -> Result<String, BackendError> {
                panic!("backend must not be called")
            }
        }
        let s = Cleaned::Kept("No pneumothorax.".into());
        assert_eq!(apply_rule(&s, rule(2).unwrap(), &Panics).unwrap(), s);
        assert_eq!(
            apply_rule(&Cleaned::Removed, rule(1).unwrap(), &Panics).unwrap(),
            Cleaned::Removed
        );
    }

    struct Flip;
    impl RewriteBackend for Flip {
        fn name(&self) -> &str {
            "flip"
        }
        fn rewrite(&self, _: &CleaningRule, s: &str) -> Result<String, BackendError> {
            Ok(s.replace("No pneumonia", "Pneumonia"))
        }
    }

    #[test]
    fn guard_discards_label_flip() {
        let lex = Lexicon::builtin();
        let t = clean_sentence_traced("No pneumonia compared to prior.", &RULES, &Flip, &lex).unwrap();
        assert_eq!(t.result.as_str(), "No pneumonia compared to prior.");
        assert_eq!(t.steps[0].outcome, StepOutcome::DiscardedLabelChange);
    }

    #[test]
    fn guard_blocks_deleting_labeled_sentence() {
        struct Delete;
        impl RewriteBackend for Delete {
            fn name(&self) -> &str {
                "delete"
            }
            fn rewrite(&self, _: &CleaningRule, _: &str) -> Result<String, BackendError> {
                Ok("REMOVED".into())
            }
        }
        let lex = Lexicon::builtin();
        let t = clean_sentence_traced("Recommend CT for the pneumothorax.", &RULES, &Delete, &lex).unwrap();
        assert_eq!(t.result.as_str(), "Recommend CT for the pneumothorax.");
        assert!(t
            .steps
            .iter()
            .any(|s| s.outcome == StepOutcome::DiscardedLabeledRemoval));
        let t = clean_sentence_traced("Recommend follow-up.", &RULES, &Delete, &lex).unwrap();
        assert!(t.result.is_removed());
    }

    #[test]
    fn backend_errors_carry_rule_and_sentence() {
        struct Fails;
        impl RewriteBackend for Fails {
            fn name(&self) -> &str {
                "fails"
            }
            fn rewrite(&self, _: &CleaningRule, _: &str) -> Result<String, BackendError> {
                Err(BackendError("boom".into()))
            }
        }
        let r = Report::new("s1", "", "No edema. Recommend CT.");
        match clean_report(&r, &RULES, &Fails, &Lexicon::builtin()) {
            Err(Error::Backend {
                rule_id: 3,
                sentence_index: Some(1),
                ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn table_one_report() {
        let r = Report::new(
            "t1",
            "An ___-year-old woman with previous aspiration pneumonia and a history of congestive heart failure (CHF).",
            "PA and lateral chest compared to ___: Lungs are hyperinflated, due to airway obstruction or emphysema. On the lateral view, aside from a granuloma, there is no pneumonia. The heart size is normal, no pulmonary edema related to CHF. Right pleural effusion is tiny status post pleural tube removal compared to large pleural effusions seen on prior chest radiographs. There are no findings to suggest intrathoracic malignancy. An urgent CT thorax is suggested given the rapid growth of granuloma. These findings were communicated to Dr. ___ at 4:00 p.m. by phone.",
        );
        let lex = Lexicon::builtin();
        let c = clean_report(&r, &RULES, &pattern(), &lex).unwrap();
        assert_eq!(c.indication, r.indication);
        let imp = &c.impression;
        for gone in [
            "PA and lateral",
            "compared to",
            "lateral view",
            "suggested",
            "communicated",
            "prior chest",
        ] {
            assert!(!imp.contains(gone), "{gone:?} still in {imp:?}");
        }
        assert!(imp.starts_with("Lungs are hyperinflated"));
        assert!(imp.contains("There are no findings to suggest intrathoracic malignancy."));
        assert_eq!(
            crate::labeler::label_report(imp, &lex),
            crate::labeler::label_report(&r.impression, &lex)
        );
    }

    #[test]
    fn communication_only_report_empties() {
        let r = Report::new(
            "c",
            "",
            "Findings were discussed with Dr. ___ by phone. These results were communicated to the team.",
        );
        assert_eq!(
            clean_report(&r, &RULES, &pattern(), &Lexicon::builtin())
                .unwrap()
                .impression,
            ""
        );
    }

    #[test]
    fn clean_report_is_a_fixpoint_on_clean_text() {
        let r = Report::new(
            "c",
            "Cough.",
            "Small right pleural effusion. No pneumothorax. Large right pneumothorax",
        );
        assert_eq!(clean_report(&r, &RULES, &pattern(), &Lexicon::builtin()).unwrap(), r);
    }

    #[test]
    fn evaluation_counts() {
        let lex = Lexicon::builtin();
        let orig = ["New edema.", "No pneumothorax.", "Recommend CT.", "Effusion unchanged."];
        let machine = ["Edema.", "No pneumothorax.", "REMOVED", "Effusion."];
        let manual = ["Edema.", "No pneumothorax.", "REMOVED", "Effusion is present."];
        let e = evaluate_cleaning(&machine, &manual, &orig, &lex).unwrap();
        assert_eq!(e.em_accuracy, 0.75);
        assert_eq!(e.pos_f1.score, 1.0);
        assert_eq!(e.neg_f1.score, 1.0);
        let e = evaluate_cleaning(&manual, &manual, &orig, &lex).unwrap();
        assert_eq!((e.em_accuracy, e.bleu2), (1.0, 1.0));
        assert!(evaluate_cleaning(&machine[..2], &manual, &orig, &lex).is_err());
    }

    #[test]
    fn corpus_cleaning_is_order_preserving_and_audited() {
        let reports: Vec<Report> = (0..40)
            .map(|i| {
                Report::new(
                    format!("s{i:02}"),
                    "",
                    format!("New edema number {i}. Recommend follow-up."),
                )
            })
            .collect();
        let lex = Lexicon::builtin();
        let out = clean_corpus(&reports, &RULES, &pattern(), &lex, 4).unwrap();
        assert_eq!(out.reports.len(), 40);
        for (i, r) in out.reports.iter().enumerate() {
            assert_eq!(r.study_id, format!("s{i:02}"));
            assert_eq!(r.impression, format!("Edema number {i}."));
        }
        assert_eq!(out.audit.len(), 80);
        let line = serde_json::to_string(&out.audit[1]).unwrap();
        assert!(line.contains("\"result\":\"REMOVED\""), "{line}");
    }

    struct Counting<'a>(&'a AtomicUsize);
    impl RewriteBackend for Counting<'_> {
        fn name(&self) -> &str {
            "counting"
        }
        fn rewrite(&self, r: &CleaningRule, s: &str) -> Result<String, BackendError> {
            self.0.fetch_add(1, Ordering::Relaxed);
            PatternBackend::default().rewrite(r, s)
        }
    }

    #[test]
    fn gating_limits_backend_calls() {
        let n = AtomicUsize::new(0);
        let lex = Lexicon::builtin();
        clean_sentence("No pneumothorax.", &RULES, &Counting(&n), &lex).unwrap();
        assert_eq!(n.load(Ordering::Relaxed), 0);
        clean_sentence("Recommend CT.", &RULES, &Counting(&n), &lex).unwrap();
        assert_eq!(n.load(Ordering::Relaxed), 1);
    }

    fn clause() -> impl Strategy<Value = String> {
        prop::sample::select(vec![
            "New large right pneumothorax",
            "No pneumothorax.",
            "Small right pleural effusion probably unchanged since",
            "Resolved opacities in the left mid lung.",
            "Recommend CT.",
            "Lateral view raises concern for pneumonia at the left lung base",
            "Compared to ___, the heart size is normal.",
            "These findings were communicated to Dr. ___ at 4:00 p.m. by phone.",
            "Mild pulmonary edema appears slightly improved",
            "The patient is status post CABG.",
            "Cardiomegaly is stable.",
            "Increased opacity in the right lower lobe may reflect atelectasis.",
            "There is no consolidation",
            "Persistent left basilar atelectasis.",
            "Interval increase in moderate left pleural effusion.",
            "PA and lateral views of the chest were obtained.",
        ])
        .prop_map(String::from)
    }

    proptest! {
        #[test]
        fn pattern_cleaning_is_idempotent(s in clause()) {
            let lex = Lexicon::builtin();
            let once = clean_sentence(&s, &RULES, &pattern(), &lex).unwrap();
            let twice = clean_sentence(once.as_str(), &RULES, &pattern(), &lex).unwrap();
            if !once.is_removed() {
                prop_assert_eq!(once, twice);
            }
        }

        #[test]
        fn guard_holds_under_random_corruption(s in clause(), seed in any::<u64>()) {
            struct Corrupt(u64);
            impl RewriteBackend for Corrupt {
                fn name(&self) -> &str { "corrupt" }
                fn rewrite(&self, _: &CleaningRule, s: &str) -> Result<String, BackendError> {
                    Ok(match self.0 % 4 {
                        0 => "REMOVED".into(),
                        1 => s.replace("No ", "").replace("no ", ""),
                        2 => format!("No {s}"),
                        _ => format!("{s} Possible pneumonia."),
                    })
                }
            }
            let lex = Lexicon::builtin();
            let before = label_sentence(&s, &lex);
            let out = clean_sentence(&s, &RULES, &Corrupt(seed), &lex).unwrap();
            match out {
                Cleaned::Removed => prop_assert!(before.is_empty()),
                Cleaned::Kept(t) => prop_assert_eq!(label_sentence(&t, &lex), before),
            }
        }

        #[test]
        fn report_labels_survive_cleaning(parts in proptest::collection::vec(clause(), 1..6)) {
            let lex = Lexicon::builtin();
            let text = parts.iter().map(|p| if p.ends_with('.') { p.clone() } else { format!("{p}.") }).collect::<Vec<_>>().join(" ");
            let r = Report::new("p", "", text);
            let c = clean_report(&r, &RULES, &pattern(), &lex).unwrap();
            prop_assert_eq!(
                crate::labeler::label_report(&c.impression, &lex),
                crate::labeler::label_report(&r.impression, &lex)
            );
            prop_assert!(!c.impression.contains(REMOVED));
        }

        #[test]
        fn cue_disjoint_rules_commute(s in clause()) {
            // rules 2 and 3 share no cue stems
            let lex = Lexicon::builtin();
            let a = [rule(2).unwrap().clone()];
            let b = [rule(3).unwrap().clone()];
            let ab = clean_sentence(clean_sentence(&s, &a, &pattern(), &lex).unwrap().as_str(), &b, &pattern(), &lex).unwrap();
            let ba = clean_sentence(clean_sentence(&s, &b, &pattern(), &lex).unwrap().as_str(), &a, &pattern(), &lex).unwrap();
            prop_assert_eq!(ab, ba);
        }
    }
}
