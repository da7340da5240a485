//! Corpus-level BLEU with a single reference per hypothesis.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::word_tokens;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BleuScore {
    pub score: f64,
    /// Modified n-gram precisions, n = 1..=max_n.
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    pub hypothesis_length: usize,
    pub reference_length: usize,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus BLEU with uniform weights over 1..=max_n grams. Tokens are
/// lowercase alphanumeric runs. Any zero precision, or an empty hypothesis
/// corpus, scores 0.
pub fn corpus_bleu<H: AsRef<str>, R: AsRef<str>>(
    hypotheses: &[H],
    references: &[R],
    max_n: usize,
) -> Result<BleuScore> {
    if hypotheses.len() != references.len() {
        return Err(Error::Misaligned(format!(
            "{} hypotheses for {} references",
            hypotheses.len(),
            references.len()
        )));
    }
    let mut matched = vec![0usize; max_n];
    let mut total = vec![0usize; max_n];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (h, r) in hypotheses.iter().zip(references) {
        let h = word_tokens(h.as_ref());
        let r = word_tokens(r.as_ref());
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=max_n {
            let hc = ngram_counts(&h, n);
            let rc = ngram_counts(&r, n);
            for (gram, count) in hc {
                matched[n - 1] += count.min(rc.get(gram).copied().unwrap_or(0));
                total[n - 1] += count;
            }
        }
    }
    let precisions: Vec<f64> = matched
        .iter()
        .zip(&total)
        .map(|(&m, &t)| if t == 0 { 0.0 } else { m as f64 / t as f64 })
        .collect();
    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    let score = if hyp_len == 0 || precisions.contains(&0.0) {
        0.0
    } else {
        let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / max_n as f64;
        brevity_penalty * log_mean.exp()
    };
    Ok(BleuScore {
        score,
        precisions,
        brevity_penalty,
        hypothesis_length: hyp_len,
        reference_length: ref_len,
    })
}

/// BLEU-2 score only.
pub fn bleu2<H: AsRef<str>, R: AsRef<str>>(hypotheses: &[H], references: &[R]) -> Result<f64> {
    Ok(corpus_bleu(hypotheses, references, 2)?.score)
}
