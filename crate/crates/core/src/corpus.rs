//! Corpus I/O: `report-jsonl` and `label-csv`.
//!
//! Readers stream line by line and keep record order. Writers go through
//! [`write_atomic`], so a failed run never leaves a partial file behind.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::report::{Condition, LabelValue, LabelVector, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    ReportJsonl,
    LabelCsv,
}

impl FromStr for CorpusFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "report-jsonl" => Ok(CorpusFormat::ReportJsonl),
            "label-csv" => Ok(CorpusFormat::LabelCsv),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::ReportJsonl => "report-jsonl",
            CorpusFormat::LabelCsv => "label-csv",
        })
    }
}

/// Labels for one study.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledStudy {
    pub study_id: String,
    pub labels: LabelVector,
}

/// Writes `bytes` to a temp file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn malformed(path: &Path, line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn string_field(
    obj: &serde_json::Map<String, Value>,
    key: &str,
    required: bool,
    path: &Path,
    line: usize,
) -> Result<Option<String>> {
    match obj.get(key) {
        None | Some(Value::Null) if required => Err(malformed(path, line, key, "missing required field")),
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(malformed(path, line, key, "expected a string")),
    }
}

/// Parses one `report-jsonl` line. `line` is 1-based and used in errors.
pub fn parse_report_line(text: &str, path: &Path, line: usize) -> Result<Report> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| malformed(path, line, "<record>", format!("invalid JSON: {e}")))?;
    let Value::Object(obj) = value else {
        return Err(malformed(path, line, "<record>", "expected a JSON object"));
    };
    let study_id = string_field(&obj, "study_id", true, path, line)?.unwrap_or_default();
    if study_id.is_empty() {
        return Err(malformed(path, line, "study_id", "must not be empty"));
    }
    Ok(Report {
        study_id,
        indication: string_field(&obj, "indication", false, path, line)?.unwrap_or_default(),
        impression: string_field(&obj, "impression", true, path, line)?.unwrap_or_default(),
        findings: string_field(&obj, "findings", false, path, line)?,
    })
}

/// Reads a `report-jsonl` file. Blank lines are skipped; duplicate ids are rejected.
pub fn read_reports(path: &Path) -> Result<Vec<Report>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let report = parse_report_line(&line, path, i + 1)?;
        if !seen.insert(report.study_id.clone()) {
            return Err(Error::DuplicateStudy(report.study_id));
        }
        out.push(report);
    }
    Ok(out)
}

pub fn reports_to_jsonl(reports: &[Report]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).expect("reports always serialize"));
        out.push('\n');
    }
    out
}

pub fn write_reports(reports: &[Report], path: &Path) -> Result<()> {
    write_atomic(path, reports_to_jsonl(reports).as_bytes())
}

pub fn label_csv_header() -> Vec<&'static str> {
    std::iter::once("study_id")
        .chain(Condition::ALL.iter().map(|c| c.name()))
        .collect()
}

pub fn labels_to_csv(studies: &[LabeledStudy]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(label_csv_header()).expect("in-memory write");
    for s in studies {
        let row = std::iter::once(s.study_id.as_str()).chain(s.labels.values().iter().map(|v| v.as_csv()));
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn write_labels(studies: &[LabeledStudy], path: &Path) -> Result<()> {
    write_atomic(path, labels_to_csv(studies).as_bytes())
}

fn check_header(header: &csv::StringRecord) -> Result<()> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names.first() != Some(&"study_id") {
        return Err(Error::Misaligned("label-csv header must start with study_id".into()));
    }
    for name in &names[1..] {
        if !Condition::ALL.iter().any(|c| c.name() == *name) {
            return Err(Error::UnknownConditionColumn(name.to_string()));
        }
    }
    for c in Condition::ALL {
        if !names[1..].contains(&c.name()) {
            return Err(Error::MissingConditionColumn(c.name().to_string()));
        }
    }
    if names[1..] != label_csv_header()[1..] {
        return Err(Error::Misaligned(
            "label-csv condition columns are not in canonical order".into(),
        ));
    }
    Ok(())
}

/// Parses `label-csv` text; `path` is used only for error messages.
pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<LabeledStudy>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| malformed(path, 1, "<header>", e.to_string()))?
        .clone();
    check_header(&header)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| malformed(path, line, "<row>", e.to_string()))?;
        if record.len() != header.len() {
            return Err(malformed(
                path,
                line,
                "<row>",
                format!("expected {} columns, found {}", header.len(), record.len()),
            ));
        }
        let study_id = record[0].trim().to_string();
        if study_id.is_empty() {
            return Err(malformed(path, line, "study_id", "must not be empty"));
        }
        let mut values = [LabelValue::NotMentioned; Condition::COUNT];
        for c in Condition::ALL {
            let cell = &record[c.index() + 1];
            values[c.index()] = LabelValue::from_csv(cell)
                .ok_or_else(|| malformed(path, line, c.name(), format!("invalid label value {cell:?}")))?;
        }
        let labels =
            LabelVector::from_values(values).map_err(|m| malformed(path, line, Condition::NoFinding.name(), m))?;
        if !seen.insert(study_id.clone()) {
            return Err(Error::DuplicateStudy(study_id));
        }
        out.push(LabeledStudy { study_id, labels });
    }
    Ok(out)
}

pub fn read_labels(path: &Path) -> Result<Vec<LabeledStudy>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text, path)
}

/// Indexes labels by study id.
pub fn label_map(studies: &[LabeledStudy]) -> HashMap<String, LabelVector> {
    studies.iter().map(|s| (s.study_id.clone(), s.labels)).collect()
}
