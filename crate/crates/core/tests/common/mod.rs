#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radprag::{Condition, LabelValue, Report};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One surface phrase per finding condition, all recognized by the built-in lexicon.
pub const PHRASES: [(Condition, &str); 13] = [
    (Condition::EnlargedCardiomediastinum, "widened mediastinum"),
    (Condition::Cardiomegaly, "cardiomegaly"),
    (Condition::LungOpacity, "opacity"),
    (Condition::LungLesion, "nodule"),
    (Condition::Edema, "pulmonary edema"),
    (Condition::Consolidation, "consolidation"),
    (Condition::Pneumonia, "pneumonia"),
    (Condition::Atelectasis, "atelectasis"),
    (Condition::Pneumothorax, "pneumothorax"),
    (Condition::PleuralEffusion, "pleural effusion"),
    (Condition::PleuralOther, "pleural thickening"),
    (Condition::Fracture, "fracture"),
    (Condition::SupportDevices, "tube"),
];

pub const NO_FINDING_SENTENCE: &str = "No acute cardiopulmonary process.";

pub fn phrase(c: Condition) -> &'static str {
    PHRASES
        .iter()
        .find(|(k, _)| *k == c)
        .map(|(_, p)| *p)
        .expect("finding condition")
}

fn capitalized(s: &str) -> String {
    let mut ch = s.chars();
    match ch.next() {
        Some(f) => f.to_uppercase().chain(ch).collect(),
        None => String::new(),
    }
}

pub fn positive_sentence(c: Condition) -> String {
    format!("{} is present.", capitalized(phrase(c)))
}

pub fn negative_sentence(c: Condition) -> String {
    format!("No {}.", phrase(c))
}

pub fn uncertain_sentence(c: Condition) -> String {
    format!("Possible {}.", phrase(c))
}

/// A report together with the labels and indication mentions it was built from.
#[derive(Debug, Clone)]
pub struct Planted {
    pub report: Report,
    pub labels: BTreeMap<Condition, LabelValue>,
    pub indication: BTreeSet<Condition>,
}

impl Planted {
    pub fn label(&self, c: Condition) -> LabelValue {
        self.labels.get(&c).copied().unwrap_or(LabelValue::NotMentioned)
    }
}

pub fn indication_text(conds: &BTreeSet<Condition>) -> String {
    conds
        .iter()
        .map(|&c| format!("{}?", capitalized(phrase(c))))
        .collect::<Vec<_>>()
        .join(" ")
}

fn findings() -> Vec<Condition> {
    PHRASES.iter().map(|(c, _)| *c).collect()
}

/// Free-form labeled corpus: each finding is independently positive,
/// negative, uncertain or absent; indications mention 0..=2 findings.
pub fn random_corpus(n: usize, seed: u64) -> Vec<Planted> {
    let mut r = rng(seed);
    let all = findings();
    (0..n)
        .map(|i| {
            let mut labels = BTreeMap::new();
            let mut sentences = Vec::new();
            for &c in &all {
                let v = match r.gen_range(0..20) {
                    0 => LabelValue::Positive,
                    1 | 2 => LabelValue::Negative,
                    3 => LabelValue::Uncertain,
                    _ => continue,
                };
                sentences.push(match v {
                    LabelValue::Positive => positive_sentence(c),
                    LabelValue::Negative => negative_sentence(c),
                    _ => uncertain_sentence(c),
                });
                labels.insert(c, v);
            }
            let competing = labels
                .values()
                .any(|v| matches!(v, LabelValue::Positive | LabelValue::Uncertain));
            if r.gen_bool(0.4) {
                sentences.push(NO_FINDING_SENTENCE.to_string());
                if !competing {
                    labels.insert(Condition::NoFinding, LabelValue::Positive);
                }
            }
            sentences.shuffle(&mut r);
            let k = r.gen_range(0..=2);
            let indication: BTreeSet<Condition> = all.choose_multiple(&mut r, k).copied().collect();
            Planted {
                report: Report::new(format!("r{i:04}"), indication_text(&indication), sentences.join(" ")),
                labels,
                indication,
            }
        })
        .collect()
}

/// The positive sets used by [`retrieval_corpus`].
pub fn retrieval_label_sets() -> Vec<BTreeSet<Condition>> {
    use Condition::*;
    let sets: [&[Condition]; 12] = [
        &[NoFinding],
        &[Cardiomegaly],
        &[PleuralEffusion],
        &[Atelectasis],
        &[Edema, PleuralEffusion],
        &[Cardiomegaly, Edema],
        &[Consolidation],
        &[LungOpacity, Pneumonia],
        &[SupportDevices],
        &[SupportDevices, Pneumothorax],
        &[LungLesion],
        &[Fracture, PleuralOther],
    ];
    sets.iter().map(|s| s.iter().copied().collect()).collect()
}

/// Cleaned-style corpus: impressions state the positive set and then one
/// negative sentence for every indication condition that is not positive.
/// The first report of every positive set has an empty indication.
pub fn retrieval_corpus(n: usize, seed: u64) -> Vec<Planted> {
    let mut r = rng(seed);
    let sets = retrieval_label_sets();
    let all = findings();
    (0..n)
        .map(|i| {
            let positives = &sets[i % sets.len()];
            let indication: BTreeSet<Condition> = if i < sets.len() {
                BTreeSet::new()
            } else {
                let k = r.gen_range(1..=3);
                all.choose_multiple(&mut r, k).copied().collect()
            };
            let mut labels = BTreeMap::new();
            let mut sentences = Vec::new();
            for &c in positives {
                labels.insert(c, LabelValue::Positive);
                sentences.push(if c == Condition::NoFinding {
                    NO_FINDING_SENTENCE.to_string()
                } else {
                    positive_sentence(c)
                });
            }
            for &c in &indication {
                if !positives.contains(&c) {
                    labels.insert(c, LabelValue::Negative);
                    sentences.push(negative_sentence(c));
                }
            }
            Planted {
                report: Report::new(format!("s{i:04}"), indication_text(&indication), sentences.join(" ")),
                labels,
                indication,
            }
        })
        .collect()
}

/// Headers (lowercased names) and body of one received request.
pub type Seen = (Vec<(String, String)>, String);

/// Minimal HTTP/1.1 server answering `count` POST requests with `respond(n, body)`,
/// where `n` counts requests from zero. Returns the base URL and a handle
/// yielding the request bodies received.
pub struct MockServer {
    pub url: String,
    pub hits: Arc<AtomicUsize>,
    handle: Option<JoinHandle<Vec<Seen>>>,
}

impl MockServer {
    pub fn start<F>(count: usize, respond: F) -> MockServer
    where
        F: Fn(usize, &str) -> (u16, String) + Send + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        let handle = std::thread::spawn(move || {
            let mut seen = Vec::new();
            for n in 0..count {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream);
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let mut headers = Vec::new();
                let mut length = 0usize;
                loop {
                    line.clear();
                    reader.read_line(&mut line).unwrap();
                    let l = line.trim_end();
                    if l.is_empty() {
                        break;
                    }
                    if let Some((k, v)) = l.split_once(':') {
                        let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_string());
                        if k == "content-length" {
                            length = v.parse().unwrap();
                        }
                        headers.push((k, v));
                    }
                }
                let mut body = vec![0; length];
                reader.read_exact(&mut body).unwrap();
                let body = String::from_utf8(body).unwrap();
                counter.fetch_add(1, Ordering::SeqCst);
                let (status, reply) = respond(n, &body);
                let mut stream = reader.into_inner();
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                    reply.len()
                )
                .unwrap();
                stream.flush().unwrap();
                seen.push((headers, body));
            }
            seen
        });
        MockServer {
            url,
            hits,
            handle: Some(handle),
        }
    }

    /// Waits for all expected requests and returns their headers and bodies.
    pub fn finish(mut self) -> Vec<Seen> {
        self.handle.take().unwrap().join().unwrap()
    }
}
