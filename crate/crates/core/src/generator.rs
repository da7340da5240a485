//! Label-set retrieval with indication-driven negative sentences, and the
//! instruction prompt for an external generation model.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cleaning::join_sentences;
use crate::corpus::{reports_to_jsonl, write_atomic, LabeledStudy};
use crate::error::{Error, Result};
use crate::labeler::{indication_mentions, label_report, label_sentence, Lexicon};
use crate::report::{segment_sentences, Condition, LabelValue, Report};

const INDEX_FORMAT: u32 = 1;

/// A canonical positive-condition set.
pub type LabelSet = BTreeSet<Condition>;

/// `|`-joined names in canonical order; the empty set is the empty string.
pub fn label_set_key(set: &LabelSet) -> String {
    set.iter().map(|c| c.name()).collect::<Vec<_>>().join("|")
}

pub fn parse_label_set_key(key: &str) -> Result<LabelSet> {
    if key.is_empty() {
        return Ok(LabelSet::new());
    }
    key.split('|')
        .map(|n| n.parse::<Condition>().map_err(Error::InvalidCondition))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PooledSentence {
    pub text: String,
    pub study_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalIndex {
    format: u32,
    corpus_id: String,
    lexicon: String,
    report_count: usize,
    by_label_set: BTreeMap<String, Vec<String>>,
    impressions: BTreeMap<String, String>,
    negative_pool: BTreeMap<Condition, Vec<PooledSentence>>,
}

/// First 16 hex characters of SHA-256 over the corpus in JSONL form.
pub fn corpus_id(reports: &[Report]) -> String {
    let digest = Sha256::digest(reports_to_jsonl(reports).as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn positive_set(text: &str, lexicon: &Lexicon) -> LabelSet {
    label_report(text, lexicon).positives().into_iter().collect()
}

/// Condition whose only mention in `sentence` is a negative one.
fn sole_negative(sentence: &str, lexicon: &Lexicon) -> Option<Condition> {
    let labels = label_sentence(sentence, lexicon);
    let mut mentions = labels.iter().filter(|(_, v)| v.is_mention());
    match (mentions.next(), mentions.next()) {
        (Some((c, LabelValue::Negative)), None) => Some(c),
        _ => None,
    }
}

impl RetrievalIndex {
    /// Indexes every report under its positive set and pools each sentence
    /// that is a lone negative mention.
    pub fn build(corpus: &[Report], lexicon: &Lexicon) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut by_label_set: BTreeMap<String, Vec<&Report>> = BTreeMap::new();
        let mut pool: BTreeMap<Condition, Vec<PooledSentence>> =
            Condition::findings().map(|c| (c, Vec::new())).collect();
        for r in corpus {
            by_label_set
                .entry(label_set_key(&positive_set(&r.impression, lexicon)))
                .or_default()
                .push(r);
            for s in segment_sentences(&r.impression) {
                if let Some(c) = sole_negative(&s.text, lexicon) {
                    pool.entry(c).or_default().push(PooledSentence {
                        text: s.text,
                        study_id: r.study_id.clone(),
                    });
                }
            }
        }
        let by_label_set = by_label_set
            .into_iter()
            .map(|(k, mut rs)| {
                rs.sort_by(|a, b| {
                    a.impression
                        .len()
                        .cmp(&b.impression.len())
                        .then_with(|| a.study_id.cmp(&b.study_id))
                });
                (k, rs.into_iter().map(|r| r.study_id.clone()).collect())
            })
            .collect();
        for sentences in pool.values_mut() {
            sentences.sort_by(|a, b| {
                a.text
                    .len()
                    .cmp(&b.text.len())
                    .then_with(|| a.study_id.cmp(&b.study_id))
                    .then_with(|| a.text.cmp(&b.text))
            });
            let mut seen = BTreeSet::new();
            sentences.retain(|s| seen.insert(s.text.clone()));
        }
        Ok(Self {
            format: INDEX_FORMAT,
            corpus_id: corpus_id(corpus),
            lexicon: lexicon.fingerprint().to_string(),
            report_count: corpus.len(),
            by_label_set,
            impressions: corpus
                .iter()
                .map(|r| (r.study_id.clone(), r.impression.clone()))
                .collect(),
            negative_pool: pool,
        })
    }

    pub fn corpus_id(&self) -> &str {
        &self.corpus_id
    }

    pub fn lexicon_fingerprint(&self) -> &str {
        &self.lexicon
    }

    pub fn report_count(&self) -> usize {
        self.report_count
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.by_label_set.keys().map(String::as_str)
    }

    /// Study ids under an exact positive set, in retrieval order.
    pub fn studies(&self, set: &LabelSet) -> &[String] {
        self.by_label_set.get(&label_set_key(set)).map_or(&[], Vec::as_slice)
    }

    pub fn impression(&self, study_id: &str) -> Option<&str> {
        self.impressions.get(study_id).map(String::as_str)
    }

    pub fn pool(&self, condition: Condition) -> &[PooledSentence] {
        self.negative_pool.get(&condition).map_or(&[], Vec::as_slice)
    }

    /// Finding conditions without any pooled negative sentence.
    pub fn empty_pools(&self) -> Vec<Condition> {
        Condition::findings().filter(|c| self.pool(*c).is_empty()).collect()
    }

    fn check_lexicon(&self, lexicon: &Lexicon) -> Result<()> {
        if self.lexicon != lexicon.fingerprint() {
            return Err(Error::LexiconMismatch {
                expected: lexicon.fingerprint().to_string(),
                found: self.lexicon.clone(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("index serializes") + "\n"
    }

    pub fn from_json(text: &str, lexicon: &Lexicon) -> Result<Self> {
        let index: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid index file: {e}")))?;
        if index.format != INDEX_FORMAT {
            return Err(Error::Config(format!(
                "index format {} is not supported (expected {INDEX_FORMAT})",
                index.format
            )));
        }
        index.check_lexicon(lexicon)?;
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }

    pub fn load(path: &Path, lexicon: &Lexicon) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, lexicon)
    }

    /// Exact key if present, else the key with the highest Jaccard overlap,
    /// then the smallest symmetric difference, then the smallest key.
    fn select_key(&self, wanted: &LabelSet) -> Option<(LabelSet, bool)> {
        let exact = label_set_key(wanted);
        if self.by_label_set.contains_key(&exact) {
            return Some((wanted.clone(), true));
        }
        let candidates: Vec<LabelSet> = self
            .by_label_set
            .keys()
            .filter_map(|k| parse_label_set_key(k).ok())
            .collect();
        candidates
            .into_iter()
            .min_by(|a, b| compare_fallback(wanted, a, b))
            .map(|k| (k, false))
    }
}

fn overlap(wanted: &LabelSet, key: &LabelSet) -> (usize, usize, usize) {
    let inter = wanted.intersection(key).count();
    let union = wanted.union(key).count();
    (inter, union, union - inter)
}

/// Orders candidate keys best first.
fn compare_fallback(wanted: &LabelSet, a: &LabelSet, b: &LabelSet) -> Ordering {
    let (ia, ua, da) = overlap(wanted, a);
    let (ib, ub, db) = overlap(wanted, b);
    // Jaccard of two empty sets is 1
    let (ja, jua) = if ua == 0 { (1, 1) } else { (ia, ua) };
    let (jb, jub) = if ub == 0 { (1, 1) } else { (ib, ub) };
    (jb * jua)
        .cmp(&(ja * jub))
        .then(da.cmp(&db))
        .then_with(|| a.iter().cmp(b.iter()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub study_id: String,
    pub indication: String,
    pub predicted_positives: LabelSet,
}

impl GenerationRequest {
    pub fn new(study_id: impl Into<String>, indication: impl Into<String>, positives: LabelSet) -> Result<Self> {
        let study_id = study_id.into();
        if positives.contains(&Condition::NoFinding) && positives.len() > 1 {
            return Err(Error::InvalidRequest {
                study_id,
                message: "No Finding must be the only predicted positive".into(),
            });
        }
        Ok(Self {
            study_id,
            indication: indication.into(),
            predicted_positives: positives,
        })
    }
}

/// Pairs predicted labels (positive cells) with indications from `reports`.
pub fn requests_from(predictions: &[LabeledStudy], reports: &[Report]) -> Result<Vec<GenerationRequest>> {
    let indications: HashMap<&str, &str> = reports
        .iter()
        .map(|r| (r.study_id.as_str(), r.indication.as_str()))
        .collect();
    predictions
        .iter()
        .map(|p| {
            let indication = indications
                .get(p.study_id.as_str())
                .ok_or_else(|| Error::InvalidRequest {
                    study_id: p.study_id.clone(),
                    message: "no report with this study_id to take the indication from".into(),
                })?;
            GenerationRequest::new(
                p.study_id.clone(),
                *indication,
                p.labels.positives().into_iter().collect(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeChoice {
    pub condition: Condition,
    pub sentence: String,
    pub source_study_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generated {
    pub study_id: String,
    pub text: String,
    pub retrieved_study_id: String,
    pub retrieved_key: String,
    pub exact_key: bool,
    pub negatives: Vec<NegativeChoice>,
    /// Indication conditions left uncovered because their pool is empty.
    pub empty_pool: Vec<Condition>,
}

impl Generated {
    pub fn to_report(&self, indication: &str) -> Report {
        Report::new(self.study_id.clone(), indication, self.text.clone())
    }
}

/// Retrieves the first report for the predicted positive set and appends one
/// pooled negative sentence per indication condition not predicted positive.
pub fn generate_retrieval(request: &GenerationRequest, index: &RetrievalIndex, lexicon: &Lexicon) -> Result<Generated> {
    index.check_lexicon(lexicon)?;
    let (key, exact) = index
        .select_key(&request.predicted_positives)
        .ok_or(Error::EmptyIndex)?;
    let retrieved_study_id = index.studies(&key).first().ok_or(Error::EmptyIndex)?.clone();
    let impression = index.impression(&retrieved_study_id).ok_or(Error::EmptyIndex)?;

    let mut negatives = Vec::new();
    let mut empty_pool = Vec::new();
    for c in indication_mentions(&request.indication, lexicon) {
        if c.is_no_finding() || request.predicted_positives.contains(&c) {
            continue;
        }
        match index.pool(c).first() {
            Some(s) => negatives.push(NegativeChoice {
                condition: c,
                sentence: s.text.clone(),
                source_study_id: s.study_id.clone(),
            }),
            None => empty_pool.push(c),
        }
    }
    let mut parts: Vec<&str> = vec![impression];
    parts.extend(negatives.iter().map(|n| n.sentence.as_str()));
    Ok(Generated {
        study_id: request.study_id.clone(),
        text: join_sentences(&parts),
        retrieved_study_id,
        retrieved_key: label_set_key(&key),
        exact_key: exact,
        negatives,
        empty_pool,
    })
}

/// Runs [`generate_retrieval`] for every request on up to `jobs` threads,
/// keeping input order.
pub fn generate_all(
    requests: &[GenerationRequest],
    index: &RetrievalIndex,
    lexicon: &Lexicon,
    jobs: usize,
) -> Result<Vec<Generated>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        requests
            .par_iter()
            .map(|r| generate_retrieval(r, index, lexicon))
            .collect()
    })
}

const PROMPT_TEMPLATE: &str = "Below is an instruction that describes a task, paired with an input that provides further context.\nWrite a response that appropriately completes the request.\n\n### Instruction:\nWrite a radiology report responding to the indication. Include all given positive labels.\n\n### Input:\nIndication: [insert indication]\nPositive labels: [insert positive labels in English]\n\n### Response:\n";

/// Condition names joined by ", " in canonical order; an empty set or No
/// Finding renders as "no finding".
pub fn positive_labels_text(positives: &LabelSet) -> String {
    if positives.is_empty() || positives.contains(&Condition::NoFinding) {
        return "no finding".into();
    }
    positives.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
}

pub fn build_generation_prompt(request: &GenerationRequest) -> String {
    PROMPT_TEMPLATE
        .replace("[insert indication]", &request.indication)
        .replace(
            "[insert positive labels in English]",
            &positive_labels_text(&request.predicted_positives),
        )
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    study_id: &'a str,
    prompt: &'a str,
    temperature: f64,
}

#[derive(Deserialize)]
struct CompletionResponse {
    completion: String,
}

/// HTTP completion endpoint: POST `{study_id, prompt, temperature: 0}`,
/// response `{completion}`. Requests are never retried.
#[derive(Debug, Clone)]
pub struct RemoteGenerator {
    endpoint: String,
    token: Option<String>,
    agent: ureq::Agent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemoteGeneration {
    pub study_id: String,
    pub text: String,
    pub prompt: String,
    pub latency_ms: u128,
}

impl RemoteGenerator {
    pub fn new(endpoint: impl Into<String>, token: Option<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into(),
            token,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

pub fn generate_remote(request: &GenerationRequest, generator: &RemoteGenerator) -> Result<RemoteGeneration> {
    let prompt = build_generation_prompt(request);
    let fail = |message: String| Error::Remote {
        endpoint: generator.endpoint.clone(),
        request_id: request.study_id.clone(),
        message,
    };
    let started = Instant::now();
    let mut req = generator.agent.post(&generator.endpoint);
    if let Some(t) = &generator.token {
        req = req.set("Authorization", &format!("Bearer {t}"));
    }
    let resp = req
        .send_json(CompletionRequest {
            study_id: &request.study_id,
            prompt: &prompt,
            temperature: 0.0,
        })
        .map_err(|e| match e {
            ureq::Error::Status(code, _) => fail(format!("HTTP status {code}")),
            ureq::Error::Transport(t) => fail(t.to_string()),
        })?;
    let body: CompletionResponse = resp.into_json().map_err(|e| fail(format!("bad response body: {e}")))?;
    Ok(RemoteGeneration {
        study_id: request.study_id.clone(),
        text: crate::report::normalize_text(&body.completion),
        prompt,
        latency_ms: started.elapsed().as_millis(),
    })
}
