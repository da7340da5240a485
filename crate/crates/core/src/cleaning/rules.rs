//! The seven cleaning rules: names, prompt templates, trigger cues and examples.

use serde::Serialize;

use crate::metrics::stem_matches;
use crate::report::word_tokens;

/// Literal token a backend returns for a deleted sentence.
pub const REMOVED: &str = "REMOVED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    RemoveSentence,
    RemovePhrase,
    RewritePositive,
    RewriteNegative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CleaningRule {
    pub id: u8,
    pub name: &'static str,
    pub prompt_template: &'static str,
    /// Lowercase stems; a rule only runs when one of them occurs in the sentence.
    pub cues: &'static [&'static str],
    pub action: ActionKind,
    /// Few-shot (original, cleaned) pairs appended to the prompt.
    pub examples: &'static [(&'static str, &'static str)],
}

impl CleaningRule {
    /// True when any word of `sentence` matches a cue stem.
    pub fn triggered(&self, sentence: &str) -> bool {
        let tokens = word_tokens(sentence);
        tokens.iter().any(|t| self.cues.iter().any(|c| stem_matches(t, c)))
    }

    /// Full prompt: template, few-shot examples, then the query.
    pub fn prompt(&self, sentence: &str) -> String {
        let examples: Vec<String> = self
            .examples
            .iter()
            .map(|(o, c)| format!("Original:\n{o}\nNew:\n{c}"))
            .collect();
        format!(
            "{}\n\n{}\n\nOriginal:\n{sentence}\nNew:\n",
            self.prompt_template,
            examples.join("\n\n")
        )
    }
}

pub static RULES: [CleaningRule; 7] = [
    CleaningRule {
        id: 1,
        name: "Remove comparison to prior studies",
        prompt_template: "You will be given a sentence from a chest X-ray report. Remove ALL sentences that contain comparisons to the past, and rewrite sentences minimally to preserve meaning. If a sentence contains the word \"compare\", remove it. If a sentence is empty after cleaning, replace it with the token \"REMOVED\". If a sentence contains \"REMOVED\", do not change it.",
        cues: &["compar", "prior", "previous", "earlier"],
        action: ActionKind::RemovePhrase,
        examples: &[(
            "In comparison with the study of ___, there are slightly improved lung volumes.",
            "There are slightly improved lung volumes.",
        )],
    },
    CleaningRule {
        id: 2,
        name: "Remove communication information",
        prompt_template: "You will be given a sentence from a chest X-ray report. Remove ALL sentences that contain information about communication between medical professionals, such as between doctors or nurses. If a sentence is empty after cleaning, replace it with the token \"REMOVED\". If a sentence contains \"REMOVED\", do not change it.",
        cues: &[
            "commun", "notif", "discuss", "paged", "phone", "telephon", "relay", "convey", "called",
            "critical",
        ],
        action: ActionKind::RemoveSentence,
        examples: &[(
            "These findings were communicated via the radiology critical results dashboard at 12:57 p.m.",
            REMOVED,
        )],
    },
    CleaningRule {
        id: 3,
        name: "Remove doctor recommendations",
        prompt_template: "You will be given a sentence from a chest X-ray report. Remove ALL sentences that mention medical recommendations from doctors. Remove sentences that contain \"recommend\". If a sentence is empty after cleaning, replace it with the token \"REMOVED\". If a sentence contains \"REMOVED\", do not change it.",
        cues: &["recommend", "suggest", "should", "advis"],
        action: ActionKind::RemoveSentence,
        examples: &[(
            "Recommend advising patient to avoid palpating the area to avoid irritating it.",
            REMOVED,
        )],
    },
    CleaningRule {
        id: 4,
        name: "Remove previous treatment and image view",
        prompt_template: "You will be given a sentence from a chest X-ray report. Remove ALL sentences that mention the chest X-ray view (e.g. AP, PA, lateral) or \"status post\". Rewrite sentences minimally to preserve meaning. If a sentence is empty after cleaning, replace it with the token \"REMOVED\". If a sentence is empty or contains \"REMOVED\", do not change it.",
        cues: &["status", "ap", "pa", "lateral", "view", "frontal", "portable"],
        action: ActionKind::RemovePhrase,
        examples: &[
            (
                "Small lateral pneumothorax is present in this patient status post right first rib resection.",
                "Small lateral pneumothorax is present in this patient",
            ),
            (
                "Lateral view raises concern for pneumonia at the left lung base",
                "Concern for pneumonia at the left lung base",
            ),
        ],
    },
    CleaningRule {
        id: 5,
        name: "Rewrite new/increased conditions into positive",
        prompt_template: "You will be given a sentence from a chest X-ray report. Remove all instances of \"new\", \"increase\", \"greater\", \"worsen\", etc. and rewrite the sentence to preserve meaning. If the sentence mentions changes to an organ (e.g. lung, heart), do not rewrite it. If a sentence contains \"REMOVED\", do not change it.",
        cues: &["new", "newly", "increas", "greater", "worse"],
        action: ActionKind::RewritePositive,
        examples: &[
            ("New large right pneumothorax", "Large right pneumothorax"),
            (
                "Mild interval increase in loculated right pleural effusion",
                "Loculated right pleural effusion.",
            ),
        ],
    },
    CleaningRule {
        id: 6,
        name: "Rewrite unchanged/partially-improved conditions into positive",
        prompt_template: "You will be given a sentence from a chest X-ray report. If a sentence mentions that a positive medical condition is unchanged or improved (but still positive), remove words related to \"unchanged\" or \"improve\" and rewrite the sentence to only say the condition. Otherwise, keep it the same. If a sentence contains \"REMOVED\", do not change it.",
        cues: &["unchanged", "improv", "stable", "persist", "similar", "remain"],
        action: ActionKind::RewritePositive,
        examples: &[
            ("Small right pleural effusion probably unchanged since", "Small right pleural effusion"),
            ("Mild pulmonary edema appears slightly improved", "Mild pulmonary edema"),
        ],
    },
    CleaningRule {
        id: 7,
        name: "Rewrite resolved conditions into negative",
        prompt_template: "You will be given a sentence from a chest X-ray report. If the sentence mentions the resolution or disappearance of a condition, rewrite it to simply say the condition is negative. Otherwise, keep the sentence the same. If a sentence is empty or contains \"REMOVED\", do not change it.",
        cues: &["resol", "disappear", "clear"],
        action: ActionKind::RewriteNegative,
        examples: &[(
            "Resolved opacities in the left mid lung.",
            "No opacities in the left mid lung.",
        )],
    },
];

/// All rules in ascending id order.
pub fn all_rules() -> &'static [CleaningRule] {
    &RULES
}

pub fn rule(id: u8) -> Option<&'static CleaningRule> {
    RULES.iter().find(|r| r.id == id)
}
