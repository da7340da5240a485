//! Core report types, text normalization and sentence segmentation.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// One of the fourteen labeled conditions, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Condition {
    Atelectasis,
    Cardiomegaly,
    Consolidation,
    Edema,
    EnlargedCardiomediastinum,
    Fracture,
    LungLesion,
    LungOpacity,
    PleuralEffusion,
    PleuralOther,
    Pneumonia,
    Pneumothorax,
    SupportDevices,
    NoFinding,
}

impl Condition {
    pub const COUNT: usize = 14;

    pub const ALL: [Condition; Condition::COUNT] = [
        Condition::Atelectasis,
        Condition::Cardiomegaly,
        Condition::Consolidation,
        Condition::Edema,
        Condition::EnlargedCardiomediastinum,
        Condition::Fracture,
        Condition::LungLesion,
        Condition::LungOpacity,
        Condition::PleuralEffusion,
        Condition::PleuralOther,
        Condition::Pneumonia,
        Condition::Pneumothorax,
        Condition::SupportDevices,
        Condition::NoFinding,
    ];

    /// Every condition except No Finding.
    pub fn findings() -> impl Iterator<Item = Condition> {
        Self::ALL.into_iter().filter(|c| !c.is_no_finding())
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Condition::Atelectasis => "Atelectasis",
            Condition::Cardiomegaly => "Cardiomegaly",
            Condition::Consolidation => "Consolidation",
            Condition::Edema => "Edema",
            Condition::EnlargedCardiomediastinum => "Enlarged Cardiomediastinum",
            Condition::Fracture => "Fracture",
            Condition::LungLesion => "Lung Lesion",
            Condition::LungOpacity => "Lung Opacity",
            Condition::PleuralEffusion => "Pleural Effusion",
            Condition::PleuralOther => "Pleural Other",
            Condition::Pneumonia => "Pneumonia",
            Condition::Pneumothorax => "Pneumothorax",
            Condition::SupportDevices => "Support Devices",
            Condition::NoFinding => "No Finding",
        }
    }

    /// No Finding only ever takes `Positive` or `NotMentioned`.
    pub fn is_no_finding(self) -> bool {
        self == Condition::NoFinding
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = String;

    /// Accepts the canonical name in any case, with spaces, underscores or hyphens.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        Condition::ALL
            .into_iter()
            .find(|c| c.name().replace(' ', "").to_lowercase() == key)
            .ok_or_else(|| format!("unknown condition {s:?}"))
    }
}

impl TryFrom<String> for Condition {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Condition> for String {
    fn from(c: Condition) -> String {
        c.name().to_string()
    }
}

/// Four-valued mention status of a condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelValue {
    Positive,
    Negative,
    Uncertain,
    #[default]
    NotMentioned,
}

impl LabelValue {
    /// Rank used when aggregating mentions: positive > uncertain > negative > not mentioned.
    pub fn precedence(self) -> u8 {
        match self {
            LabelValue::Positive => 3,
            LabelValue::Uncertain => 2,
            LabelValue::Negative => 1,
            LabelValue::NotMentioned => 0,
        }
    }

    /// The higher-precedence of two values.
    pub fn max_precedence(self, other: LabelValue) -> LabelValue {
        if other.precedence() > self.precedence() {
            other
        } else {
            self
        }
    }

    pub fn is_mention(self) -> bool {
        self != LabelValue::NotMentioned
    }

    /// CSV cell: `1.0`, `0.0`, `-1.0` or empty.
    pub fn as_csv(self) -> &'static str {
        match self {
            LabelValue::Positive => "1.0",
            LabelValue::Negative => "0.0",
            LabelValue::Uncertain => "-1.0",
            LabelValue::NotMentioned => "",
        }
    }

    pub fn from_csv(cell: &str) -> Option<LabelValue> {
        let cell = cell.trim();
        if cell.is_empty() {
            return Some(LabelValue::NotMentioned);
        }
        let v: f64 = cell.parse().ok()?;
        if v == 1.0 {
            Some(LabelValue::Positive)
        } else if v == 0.0 {
            Some(LabelValue::Negative)
        } else if v == -1.0 {
            Some(LabelValue::Uncertain)
        } else {
            None
        }
    }
}

/// Per-condition labels for one text unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LabelVector([LabelValue; Condition::COUNT]);

impl LabelVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from values in canonical order, rejecting a No Finding
    /// value other than positive or not mentioned.
    pub fn from_values(values: [LabelValue; Condition::COUNT]) -> Result<Self, String> {
        let nf = values[Condition::NoFinding.index()];
        if matches!(nf, LabelValue::Negative | LabelValue::Uncertain) {
            return Err(format!("No Finding cannot be {nf:?}"));
        }
        Ok(Self(values))
    }

    pub fn get(&self, condition: Condition) -> LabelValue {
        self.0[condition.index()]
    }

    /// Sets a label. Negative or uncertain No Finding is coerced to not mentioned.
    pub fn set(&mut self, condition: Condition, value: LabelValue) {
        let value = if condition.is_no_finding() && !matches!(value, LabelValue::Positive) {
            LabelValue::NotMentioned
        } else {
            value
        };
        self.0[condition.index()] = value;
    }

    pub fn with(mut self, condition: Condition, value: LabelValue) -> Self {
        self.set(condition, value);
        self
    }

    pub fn values(&self) -> &[LabelValue; Condition::COUNT] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = (Condition, LabelValue)> + '_ {
        Condition::ALL.into_iter().zip(self.0.iter().copied())
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|v| !v.is_mention())
    }

    /// Conditions labeled with `value`, in canonical order.
    pub fn with_value(&self, value: LabelValue) -> Vec<Condition> {
        self.iter().filter(|&(_, v)| v == value).map(|(c, _)| c).collect()
    }

    pub fn positives(&self) -> Vec<Condition> {
        self.with_value(LabelValue::Positive)
    }
}

/// One study: identity plus the indication and impression sections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub study_id: String,
    #[serde(default)]
    pub indication: String,
    pub impression: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub findings: Option<String>,
}

impl Report {
    pub fn new(study_id: impl Into<String>, indication: impl Into<String>, impression: impl Into<String>) -> Self {
        Self {
            study_id: study_id.into(),
            indication: indication.into(),
            impression: impression.into(),
            findings: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub index: usize,
}

/// Lowercase alphanumeric runs; everything else separates tokens.
pub fn word_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

static UNDERSCORES: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"_{3,}").unwrap());

/// Collapses whitespace runs, trims, and canonicalizes de-identification
/// underscore runs to `___`. Idempotent.
pub fn normalize_text(raw: &str) -> String {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    UNDERSCORES.replace_all(&collapsed, "___").into_owned()
}

const ABBREVIATIONS: [&str; 6] = ["dr.", "a.m.", "p.m.", "e.g.", "i.e.", "vs."];

fn is_protected_period(word: &str) -> bool {
    let word = word.trim_start_matches(|c: char| !c.is_alphanumeric());
    let lower = word.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // Initials such as "J."
    let mut chars = word.chars();
    matches!(
        (chars.next(), chars.next(), chars.next()),
        (Some(c), Some('.'), None) if c.is_uppercase()
    )
}

/// Splits text into sentences on `.`, `!` or `?` followed by a space and an
/// uppercase letter or digit. The text is normalized first.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    let text = normalize_text(text);
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for i in 0..chars.len() {
        let (pos, c) = chars[i];
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let (Some(&(space_pos, ' ')), Some(&(_, next))) = (chars.get(i + 1), chars.get(i + 2)) else {
            continue;
        };
        if !(next.is_uppercase() || next.is_ascii_digit()) {
            continue;
        }
        let end = pos + c.len_utf8();
        let word_start = text[start..end].rfind(' ').map_or(start, |p| start + p + 1);
        if c == '.' && is_protected_period(&text[word_start..end]) {
            continue;
        }
        out.push(Sentence {
            text: text[start..end].to_string(),
            index: out.len(),
        });
        start = space_pos + 1;
    }
    if start < text.len() {
        out.push(Sentence {
            text: text[start..].to_string(),
            index: out.len(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_text("No  acute process. "), "No acute process.");
        assert_eq!(normalize_text("Compared to ____:"), "Compared to ___:");
        assert_eq!(normalize_text(""), "");
        assert_eq!(normalize_text("a\t\n b __ c _____"), "a b __ c ___");
    }

    #[test]
    fn segment_examples() {
        let s = segment_sentences("There is no pneumonia. The heart size is normal.");
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].text, "The heart size is normal.");
        assert_eq!(s[1].index, 1);

        let s = segment_sentences("Communicated to Dr. ___ at 4:00 p.m. by phone.");
        assert_eq!(s.len(), 1);

        assert_eq!(segment_sentences("No edema").len(), 1);
        assert!(segment_sentences("").is_empty());
    }

    #[test]
    fn abbreviations_and_initials_do_not_split() {
        assert_eq!(segment_sentences("Seen by Dr. Smith today.").len(), 1);
        assert_eq!(segment_sentences("Called at 4 p.m. The team agreed.").len(), 1);
        assert_eq!(segment_sentences("Discussed with J. Smith at noon.").len(), 1);
        assert_eq!(segment_sentences("Edema vs. Pneumonia is likely.").len(), 1);
        assert_eq!(segment_sentences("Small effusion. 2 tubes are seen.").len(), 2);
        assert_eq!(segment_sentences("Is there edema? No edema!").len(), 2);
        assert_eq!(segment_sentences("Normal. lowercase continues.").len(), 1);
    }

    #[test]
    fn condition_order_and_names() {
        for (i, c) in Condition::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(c.name().parse::<Condition>().unwrap(), *c);
        }
        assert_eq!("pleural_effusion".parse::<Condition>(), Ok(Condition::PleuralEffusion));
        assert!("Pleura".parse::<Condition>().is_err());
        assert_eq!(Condition::findings().count(), 13);
    }

    #[test]
    fn label_csv_cells() {
        for v in [
            LabelValue::Positive,
            LabelValue::Negative,
            LabelValue::Uncertain,
            LabelValue::NotMentioned,
        ] {
            assert_eq!(LabelValue::from_csv(v.as_csv()), Some(v));
        }
        assert_eq!(LabelValue::from_csv("1"), Some(LabelValue::Positive));
        assert_eq!(LabelValue::from_csv("-2"), None);
    }

    #[test]
    fn no_finding_only_positive_or_missing() {
        let mut values = [LabelValue::NotMentioned; Condition::COUNT];
        values[Condition::NoFinding.index()] = LabelValue::Negative;
        assert!(LabelVector::from_values(values).is_err());
        let v = LabelVector::new().with(Condition::NoFinding, LabelValue::Uncertain);
        assert_eq!(v.get(Condition::NoFinding), LabelValue::NotMentioned);
    }

    fn messy_text() -> impl Strategy<Value = String> {
        proptest::collection::vec(
            prop_oneof![
                Just("No".to_string()),
                Just("edema.".to_string()),
                Just("Dr.".to_string()),
                Just("p.m.".to_string()),
                Just("J.".to_string()),
                Just("____".to_string()),
                Just("4:00".to_string()),
                Just("Pneumonia?".to_string()),
                Just("the".to_string()),
                Just("2".to_string()),
                Just("Heart!".to_string()),
            ],
            0..25,
        )
        .prop_flat_map(|words| {
            let n = words.len();
            (
                Just(words),
                proptest::collection::vec(prop_oneof![Just(" "), Just("  "), Just("\t"), Just(" \n ")], n),
            )
        })
        .prop_map(|(words, seps)| {
            words
                .iter()
                .zip(seps)
                .map(|(w, s)| format!("{s}{w}"))
                .collect::<String>()
        })
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(text in messy_text()) {
            let once = normalize_text(&text);
            prop_assert_eq!(normalize_text(&once), once);
        }

        #[test]
        fn segmentation_partitions_the_text(text in messy_text()) {
            let normalized = normalize_text(&text);
            let sentences = segment_sentences(&text);
            for (i, s) in sentences.iter().enumerate() {
                prop_assert_eq!(s.index, i);
                prop_assert!(!s.text.is_empty());
                prop_assert_eq!(normalize_text(&s.text), s.text.clone());
            }
            let joined = sentences.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
            prop_assert_eq!(joined, normalized);
        }
    }
}
