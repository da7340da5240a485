//! Offline rewrite backend built from per-rule phrase productions.

use std::sync::LazyLock;

use regex::Regex;

use super::rules::{CleaningRule, REMOVED};
use super::{BackendError, RewriteBackend};
use crate::labeler::Lexicon;
use crate::report::normalize_text;

fn re(pattern: &str) -> Regex {
    Regex::new(pattern).expect("static pattern compiles")
}

static R1_WHOLE: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)^(?:comparison|compared)\b[^,:;]*[.:]?$"));
static R1_LEADING: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?i)^(?:(?:as|when)\s+)?(?:compared\s+(?:to|with)|in\s+comparison\s+(?:to|with)|comparison\s+(?:is\s+made\s+)?(?:to|with)|relative\s+to)\b[^,:;]*[,:;]\s*",
    )
});
static R1_DEID: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?i)\s*\b(?:compared\s+(?:to|with)|in\s+comparison\s+(?:to|with))\s+(?:the\s+)?(?:(?:prior|previous)\s+)?(?:(?:study|exam|examination|radiograph|film)\s+)?(?:(?:of|from|dated|on)\s+)?___\s*[:;,]?",
    )
});
static R1_TRAILING: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i),?\s+(?:(?:as|when)\s+)?(?:compared\s+(?:to|with)|in\s+comparison\s+(?:to|with))\b[^.;]*")
});

static R2_COMMUNICATION: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?i)\b(?:communicat\w*|notified|discussed\s+(?:with|by)|paged|telephon\w*|by\s+phone|relayed|conveyed|called\s+(?:to|by)|were\s+called|critical\s+results?)\b",
    )
});

static R3_RECOMMENDATION: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?i)\brecommend\w*|\b(?:is|are|would\s+be|may\s+be|could\s+be)\s+(?:suggested|advised)\b|\bsuggest(?:s|ed)?\s+(?:that|a|an|further|follow|repeat|correlation|clinical|dedicated|ct|mri)\b|\bshould\s+be\b|\badvis(?:e|ed|ing)\b",
    )
});

static R4_STATUS_WHOLE: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^(?:the\s+)?(?:patient\s+(?:is\s+)?)?status\s+post\b"));
static R4_STATUS_TAIL: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)\s*,?\s*\bstatus\s+post\b.*$"));
static R4_VIEW_LEAD: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?i)^(?:(?:on|in)\s+)?(?:the\s+)?(?:single\s+)?(?:portable\s+)?(?:(?:upright|supine|semi-upright)\s+)?(?:pa|ap|frontal|lateral)(?:\s+(?:and|&)\s+(?:pa|ap|frontal|lateral))?(?:\s+(?:upright|supine|semi-upright|portable))?\s+(?:views?|radiographs?|images?|chest(?:\s+(?:radiographs?|x-rays?|films?))?)(?:\s+of\s+the\s+chest)?(?:\s+(?:raises?|shows?|demonstrates?|reveals?|(?:was|were)\s+(?:obtained|provided|reviewed)))?\s*[:,.]?\s*",
    )
});
static R4_VIEW_INLINE: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i),?\s*\b(?:on|in)\s+the\s+(?:pa|ap|frontal|lateral)\s+views?\b,?"));

static R5_INCREASE_IN: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?i)^(?:(?:mild|mildly|slight|slightly|minimal|minimally|moderate|moderately|marked|markedly|significant|significantly)\s+)?(?:interval\s+)?(?:increase|increased|worsening|progression)\s+(?:in|of)\s+(?:the\s+)?(?:size\s+of\s+(?:the\s+)?)?(.+?)\.?$",
    )
});
static R5_TAIL: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?i)\s+(?:has|have|is|are)\s+(?:(?:slightly|mildly|markedly|further)\s+)?(?:increased|worsened|enlarged|progressed|new)(?:\s+in\s+size)?(?:\s+(?:since|from|compared)\b.*?)?(\.?)$",
    )
});
static R5_ADJECTIVE: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i)\b(?:new|newly\s+(?:developed|appeared|apparent|seen)|increased|increasing|worsened|worsening|worse)\s+")
});

static R6_TAIL: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?i)\s*,?\s+(?:(?:is|are|has|have|been|appears?|remains?|seems?|probably|likely|overall|essentially|slightly|mildly|minimally|somewhat|largely|grossly)\s+)*(?:unchanged|improved|improving|stable|persistent|similar)\b.*$",
    )
});
static R6_PERSISTS: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)\s+(?:persists?|remains?)\s*(\.?)$"));
static R6_LEAD: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?i)^(?:(?:overall|essentially|grossly|slightly|partially|mildly)\s+)?(?:unchanged|stable|persistent|persisting|improved|improving|similar)(?:\s+(?:and|or)\s+(?:unchanged|stable|persistent|improved|improving))?\s+(?:appearance\s+of\s+(?:the\s+)?)?",
    )
});

static R7_RESOLVED: LazyLock<Regex> = LazyLock::new(|| {
    re(
        r"(?i)^(?:(?:interval|complete|near-complete|nearly\s+complete|near)\s+)*(?:resolved|resolution\s+of|disappearance\s+of|clearing\s+of)\s+(?:the\s+)?(?:(?:previously\s+(?:seen|noted|described)|prior|previous)\s+)?(.+)$",
    )
});

static SPACE_BEFORE_PUNCT: LazyLock<Regex> = LazyLock::new(|| re(r"\s+([,.;:!?])"));
static LEADING_PUNCT: LazyLock<Regex> = LazyLock::new(|| re(r"^[\s,;:.]+"));
static COMMA_BEFORE_STOP: LazyLock<Regex> = LazyLock::new(|| re(r",+\s*([.;:!?])"));
static TRAILING_COMMA: LazyLock<Regex> = LazyLock::new(|| re(r"[,;:]+\s*$"));

fn starts_upper(s: &str) -> bool {
    s.chars().find(|c| c.is_alphabetic()).is_some_and(char::is_uppercase)
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Whitespace and punctuation cleanup after a production; restores an
/// initial capital when the input had one.
fn tidy(original: &str, candidate: &str) -> String {
    let s = normalize_text(candidate);
    let s = SPACE_BEFORE_PUNCT.replace_all(&s, "$1");
    let s = LEADING_PUNCT.replace(&s, "");
    let s = COMMA_BEFORE_STOP.replace_all(&s, "$1");
    let s = TRAILING_COMMA.replace(&s, "");
    let s = s.trim();
    if !s.chars().any(char::is_alphanumeric) {
        return String::new();
    }
    if starts_upper(original) {
        capitalize(s)
    } else {
        s.to_string()
    }
}

fn ensure_period_like(original: &str, s: String) -> String {
    if original.trim_end().ends_with('.') && !s.is_empty() && !s.ends_with(['.', '!', '?']) {
        s + "."
    } else {
        s
    }
}

/// Regex productions per rule. Rules 5 to 7 only rewrite sentences that
/// mention a condition, which also leaves changes to organs alone.
#[derive(Debug, Clone, Default)]
pub struct PatternBackend {
    lexicon: Lexicon,
}

impl PatternBackend {
    pub fn new(lexicon: Lexicon) -> Self {
        Self { lexicon }
    }

    fn rewrite_text(&self, rule_id: u8, s: &str) -> String {
        match rule_id {
            1 => {
                if R1_WHOLE.is_match(s) {
                    return String::new();
                }
                let t = R1_LEADING.replace(s, "");
                let t = R1_DEID.replace_all(&t, " ");
                let t = R1_TRAILING.replace_all(&t, "");
                tidy(s, &t)
            }
            2 if R2_COMMUNICATION.is_match(s) => String::new(),
            3 if R3_RECOMMENDATION.is_match(s) => String::new(),
            4 => {
                if R4_STATUS_WHOLE.is_match(s) {
                    return String::new();
                }
                let t = R4_STATUS_TAIL.replace(s, "");
                let t = R4_VIEW_LEAD.replace(&t, "");
                let t = R4_VIEW_INLINE.replace_all(&t, "");
                tidy(s, &t)
            }
            5 if self.lexicon.mentions_any_condition(s) => {
                if let Some(c) = R5_INCREASE_IN.captures(s) {
                    return tidy(s, &format!("{}.", capitalize(&c[1])));
                }
                let t = R5_TAIL.replace(s, "$1");
                let t = R5_ADJECTIVE.replace_all(&t, "");
                tidy(s, &t)
            }
            6 if self.lexicon.mentions_any_condition(s) => {
                let t = R6_LEAD.replace(s, "");
                let t = R6_TAIL.replace(&t, "");
                let t = R6_PERSISTS.replace(&t, "$1");
                ensure_period_like(s, tidy(s, &t))
            }
            7 if self.lexicon.mentions_any_condition(s) => match R7_RESOLVED.captures(s) {
                Some(c) => {
                    let no = if starts_upper(s) { "No" } else { "no" };
                    tidy(s, &format!("{no} {}", &c[1]))
                }
                None => s.to_string(),
            },
            _ => s.to_string(),
        }
    }
}

impl RewriteBackend for PatternBackend {
    fn name(&self) -> &str {
        "pattern"
    }

    fn rewrite(&self, rule: &CleaningRule, sentence: &str) -> Result<String, BackendError> {
        let out = self.rewrite_text(rule.id, sentence);
        Ok(if out.is_empty() { REMOVED.to_string() } else { out })
    }
}

#[cfg(test)]
mod tests {
    use super::super::rules::RULES;
    use super::*;

    fn run(rule_id: u8, s: &str) -> String {
        PatternBackend::default()
            .rewrite(&RULES[rule_id as usize - 1], s)
            .unwrap()
    }

    #[test]
    fn comparison_productions() {
        assert_eq!(
            run(1, "PA and lateral chest compared to ___: Lungs are hyperinflated."),
            "PA and lateral chest Lungs are hyperinflated."
        );
        assert_eq!(
            run(
                1,
                "Right pleural effusion is tiny compared to large pleural effusions seen on prior chest radiographs."
            ),
            "Right pleural effusion is tiny."
        );
        assert_eq!(run(1, "Comparison to ___."), REMOVED);
        assert_eq!(
            run(1, "Compared to the prior study, there is no pneumothorax."),
            "There is no pneumothorax."
        );
    }

    #[test]
    fn recommendation_needs_a_recommendation() {
        assert_eq!(
            run(3, "There are no findings to suggest intrathoracic malignancy."),
            "There are no findings to suggest intrathoracic malignancy."
        );
        assert_eq!(
            run(
                3,
                "An urgent CT thorax is suggested given the rapid growth of granuloma."
            ),
            REMOVED
        );
        assert_eq!(run(3, "Follow-up radiographs should be obtained."), REMOVED);
    }

    #[test]
    fn view_productions() {
        assert_eq!(
            run(4, "On the lateral view, aside from a granuloma, there is no pneumonia."),
            "Aside from a granuloma, there is no pneumonia."
        );
        assert_eq!(run(4, "A nodule is seen on the lateral view."), "A nodule is seen.");
        assert_eq!(run(4, "PA and lateral chest radiographs were obtained."), REMOVED);
        assert_eq!(run(4, "The patient is status post CABG."), REMOVED);
        assert_eq!(run(4, "Small lateral pneumothorax."), "Small lateral pneumothorax.");
    }

    #[test]
    fn change_rules_skip_organs() {
        assert_eq!(
            run(5, "The heart has increased since ___."),
            "The heart has increased since ___."
        );
        assert_eq!(
            run(5, "Left pleural effusion has increased in size."),
            "Left pleural effusion."
        );
        assert_eq!(
            run(6, "Persistent right upper lobe opacity."),
            "Right upper lobe opacity."
        );
        assert_eq!(
            run(6, "Right pleural effusion is unchanged."),
            "Right pleural effusion."
        );
        assert_eq!(run(6, "Lung volumes are stable."), "Lung volumes are stable.");
        assert_eq!(
            run(7, "Interval resolution of the left pleural effusion."),
            "No left pleural effusion."
        );
    }
}
