//! Deterministic lexicon labeler.
//!
//! A sentence is tokenized into lowercase alphanumeric runs (with `?` kept as
//! its own token). Each condition phrase match is then classified by the cues
//! that end within the scope window before it: uncertainty beats negation, and
//! a phrase with neither is positive. Within a sentence, and across the
//! sentences of a report, matches aggregate with the precedence
//! positive > uncertain > negative > not mentioned.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::report::{normalize_text, segment_sentences, Condition, LabelValue, LabelVector};

pub(crate) const BUILTIN_LEXICON: &str = include_str!("../data/lexicon.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    version: String,
    scope_window: usize,
    negation: CueSection,
    uncertainty: CueSection,
    #[serde(default)]
    scope: ScopeSection,
    condition: HashMap<String, PhraseSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CueSection {
    cues: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScopeSection {
    #[serde(default)]
    terminators: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhraseSection {
    phrases: Vec<String>,
}

type Tokens = Vec<String>;

/// Phrase and cue tables for the labeler. Immutable once loaded.
#[derive(Debug, Clone)]
pub struct Lexicon {
    version: String,
    fingerprint: String,
    scope_window: usize,
    negation: Vec<Tokens>,
    uncertainty: Vec<Tokens>,
    terminators: HashSet<String>,
    phrases: Vec<Vec<Tokens>>,
    /// First token of a phrase -> (condition, full phrase).
    by_first_token: HashMap<String, Vec<(Condition, Tokens)>>,
}

/// Tokens used by the labeler: lowercase alphanumeric runs plus `?`.
pub fn label_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if c == '?' {
                out.push("?".to_string());
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_entries(kind: &str, entries: &[String]) -> Result<Vec<Tokens>> {
    entries
        .iter()
        .map(|e| {
            if e.chars().any(char::is_uppercase) {
                return Err(Error::Lexicon(format!("{kind} entry {e:?} must be lowercase")));
            }
            let toks = label_tokens(e);
            if toks.is_empty() {
                return Err(Error::Lexicon(format!("{kind} entry {e:?} has no tokens")));
            }
            Ok(toks)
        })
        .collect()
}

impl Lexicon {
    /// The lexicon shipped with the crate.
    pub fn builtin() -> Lexicon {
        Self::from_toml_str(BUILTIN_LEXICON).expect("built-in lexicon is valid")
    }

    pub fn load(path: &Path) -> Result<Lexicon> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Lexicon(m) => Error::Lexicon(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Lexicon> {
        let file: LexiconFile = toml::from_str(text).map_err(|e| Error::Lexicon(e.to_string()))?;
        if file.version.trim().is_empty() {
            return Err(Error::Lexicon("version must not be empty".into()));
        }
        if file.scope_window < 1 {
            return Err(Error::Lexicon("scope_window must be at least 1".into()));
        }
        let mut phrases: Vec<Vec<Tokens>> = vec![Vec::new(); Condition::COUNT];
        for (name, section) in &file.condition {
            let condition: Condition = name
                .parse()
                .ok()
                .filter(|c: &Condition| c.name() == name)
                .ok_or_else(|| Error::Lexicon(format!("unknown condition section {name:?}")))?;
            phrases[condition.index()] = parse_entries(name, &section.phrases)?;
        }
        for c in Condition::ALL {
            if phrases[c.index()].is_empty() {
                return Err(Error::Lexicon(format!("condition {:?} has no phrases", c.name())));
            }
        }
        let negation = parse_entries("negation cue", &file.negation.cues)?;
        let uncertainty = parse_entries("uncertainty cue", &file.uncertainty.cues)?;
        let terminators = parse_entries("scope terminator", &file.scope.terminators)?;
        if let Some(t) = terminators.iter().find(|t| t.len() != 1) {
            return Err(Error::Lexicon(format!(
                "scope terminator {:?} must be a single token",
                t.join(" ")
            )));
        }

        let mut by_first_token: HashMap<String, Vec<(Condition, Tokens)>> = HashMap::new();
        for c in Condition::ALL {
            for p in &phrases[c.index()] {
                by_first_token.entry(p[0].clone()).or_default().push((c, p.clone()));
            }
        }

        let mut hasher = Sha256::new();
        let mut feed = |tag: &str, items: &[Tokens]| {
            hasher.update(tag.as_bytes());
            for t in items {
                hasher.update(t.join(" ").as_bytes());
                hasher.update(b"\n");
            }
        };
        feed("negation", &negation);
        feed("uncertainty", &uncertainty);
        feed("terminators", &terminators);
        for c in Condition::ALL {
            feed(c.name(), &phrases[c.index()]);
        }
        hasher.update(file.scope_window.to_le_bytes());
        let digest = hasher.finalize();
        let short: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();

        Ok(Lexicon {
            fingerprint: format!("{}+{short}", file.version.trim()),
            version: file.version.trim().to_string(),
            scope_window: file.scope_window,
            negation,
            uncertainty,
            terminators: terminators.into_iter().map(|mut t| t.remove(0)).collect(),
            phrases,
            by_first_token,
        })
    }

    /// Declared version string from the lexicon file.
    pub fn version(&self) -> &str {
        &self.version
    }

    /// Declared version plus a digest of the lexicon content.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn scope_window(&self) -> usize {
        self.scope_window
    }

    pub fn phrases(&self, condition: Condition) -> &[Tokens] {
        &self.phrases[condition.index()]
    }

    /// True when the text contains a phrase of any condition other than No Finding.
    pub fn mentions_any_condition(&self, text: &str) -> bool {
        let tokens = label_tokens(text);
        self.phrase_matches(&tokens).iter().any(|(c, _)| !c.is_no_finding())
    }

    /// (condition, start token) for every phrase occurrence.
    fn phrase_matches(&self, tokens: &[String]) -> Vec<(Condition, usize)> {
        let mut out = Vec::new();
        for (i, t) in tokens.iter().enumerate() {
            if let Some(cands) = self.by_first_token.get(t) {
                for (c, phrase) in cands {
                    if tokens[i..].starts_with(phrase) {
                        out.push((*c, i));
                    }
                }
            }
        }
        out
    }

    fn cue_in_scope(&self, cues: &[Tokens], tokens: &[String], phrase_start: usize) -> bool {
        let lo = phrase_start.saturating_sub(self.scope_window);
        for end in lo..=phrase_start {
            if tokens[end..phrase_start].iter().any(|t| self.terminators.contains(t)) {
                continue;
            }
            if cues.iter().any(|cue| tokens[..end].ends_with(cue)) {
                return true;
            }
        }
        false
    }

    /// Labels without the No Finding exclusion; the flag reports whether a
    /// No Finding phrase matched.
    fn raw_labels(&self, sentence: &str) -> (LabelVector, bool) {
        let tokens = label_tokens(sentence);
        let mut labels = LabelVector::new();
        let mut no_finding = false;
        for (c, start) in self.phrase_matches(&tokens) {
            if c.is_no_finding() {
                no_finding = true;
                continue;
            }
            let value = if self.cue_in_scope(&self.uncertainty, &tokens, start) {
                LabelValue::Uncertain
            } else if self.cue_in_scope(&self.negation, &tokens, start) {
                LabelValue::Negative
            } else {
                LabelValue::Positive
            };
            labels.set(c, labels.get(c).max_precedence(value));
        }
        (labels, no_finding)
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::builtin()
    }
}

fn resolve_no_finding(mut labels: LabelVector, no_finding_matched: bool) -> LabelVector {
    let competing = labels
        .iter()
        .any(|(c, v)| !c.is_no_finding() && matches!(v, LabelValue::Positive | LabelValue::Uncertain));
    let nf = if no_finding_matched && !competing {
        LabelValue::Positive
    } else {
        LabelValue::NotMentioned
    };
    labels.set(Condition::NoFinding, nf);
    labels
}

/// Labels a single sentence.
pub fn label_sentence(sentence: &str, lexicon: &Lexicon) -> LabelVector {
    let (labels, nf) = lexicon.raw_labels(&normalize_text(sentence));
    resolve_no_finding(labels, nf)
}

/// Labels a whole text: per-sentence labels aggregated by precedence, with
/// No Finding positive only if its phrase matched and nothing else is
/// positive or uncertain.
pub fn label_report(text: &str, lexicon: &Lexicon) -> LabelVector {
    let mut labels = LabelVector::new();
    let mut nf = false;
    for s in segment_sentences(text) {
        let (sentence_labels, sentence_nf) = lexicon.raw_labels(&s.text);
        nf |= sentence_nf;
        for (c, v) in sentence_labels.iter() {
            labels.set(c, labels.get(c).max_precedence(v));
        }
    }
    resolve_no_finding(labels, nf)
}

/// Conditions mentioned (positive, negative or uncertain) in an indication.
/// No Finding is never included.
pub fn indication_mentions(indication: &str, lexicon: &Lexicon) -> BTreeSet<Condition> {
    label_report(indication, lexicon)
        .iter()
        .filter(|(c, v)| !c.is_no_finding() && v.is_mention())
        .map(|(c, _)| c)
        .collect()
}
