//! The `radprag` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cleaning::{self, CleaningRule, PatternBackend, RemoteBackend, RewriteBackend};
use crate::config::Config;
use crate::corpus::{self, LabeledStudy};
use crate::error::{Error, Result};
use crate::generator::{self, GenerationRequest, RemoteGenerator, RetrievalIndex};
use crate::labeler::{label_report, Lexicon};
use crate::metrics::{evaluate_generation, Averaging, KeywordCatalog, MetricsOptions, MetricsReport, PositiveFive};
use crate::report::{Condition, Report};
use crate::stats::{self, ContingencyTable2x2, CorpusSummary};

const AFTER_HELP: &str = "\
Configuration precedence (lowest to highest): built-in defaults, the TOML file
given by --config, RADPRAG_* environment variables, command-line flags.

Environment variables:
  RADPRAG_LEXICON, RADPRAG_CATALOG, RADPRAG_OUT_DIR, RADPRAG_JOBS,
  RADPRAG_SHIFT_THRESHOLD, RADPRAG_F1_AVERAGING, RADPRAG_POSITIVE_FIVE,
  RADPRAG_CLEAN_ENDPOINT, RADPRAG_CLEAN_TOKEN, RADPRAG_CLEAN_TIMEOUT_SECS,
  RADPRAG_CLEAN_RETRIES, RADPRAG_CLEAN_IN_FLIGHT, and the same five with
  RADPRAG_GEN_ for the generation endpoint.

Exit status: 0 success, 1 input or usage error, 2 remote endpoint failure.";

#[derive(Debug, Parser)]
#[command(name = "radprag", version, about = "Pragmatic radiology-report toolkit", after_help = AFTER_HELP)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Labeler lexicon (TOML); defaults to the built-in lexicon.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Hallucination keyword catalog (TOML); defaults to the built-in catalog.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// Directory for relative output paths.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Recorded in the run configuration; results do not depend on it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for local processing.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Label report impressions and write a label CSV.
    Label {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Corpus summary statistics.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        /// Label CSV; impressions are labeled on the fly when omitted.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Indication-conditioned negative-mention rates with a χ² test.
    Chi2(Chi2Args),
    /// Compare two summary CSVs written by `stats`.
    Shift {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clean report impressions.
    Clean {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = BackendKind::Pattern)]
        backend: BackendKind,
        /// Per-sentence audit log (JSONL).
        #[arg(long)]
        audit: Option<PathBuf>,
        /// Comma-separated rule ids; all seven by default.
        #[arg(long, value_delimiter = ',')]
        rules: Vec<u8>,
        /// Remote rewriting endpoint (overrides configuration).
        #[arg(long)]
        endpoint: Option<String>,
    },
    /// Sentence-level cleaning evaluation; inputs hold one sentence per line.
    CleanEval {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        manual: PathBuf,
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a retrieval index from a cleaned corpus.
    Index {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate reports from predicted positives and indications.
    Generate {
        /// Label CSV; cells equal to 1.0 mark predicted positives.
        #[arg(long)]
        requests: PathBuf,
        /// Report JSONL supplying the indication of each study.
        #[arg(long)]
        reports: PathBuf,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = GenerateMode::Retrieval)]
        mode: GenerateMode,
        /// Generation audit log (JSONL).
        #[arg(long)]
        audit: Option<PathBuf>,
        /// Ablation: ignore indications when choosing negative sentences.
        #[arg(long)]
        no_indication: bool,
        /// Remote generation endpoint (overrides configuration).
        #[arg(long)]
        endpoint: Option<String>,
    },
    /// Score generated reports against original and cleaned references.
    Evaluate {
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        ref_original: PathBuf,
        #[arg(long)]
        ref_clean: PathBuf,
        /// MetricsReport JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a one-row results CSV.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value = "generated")]
        model: String,
        #[arg(long)]
        averaging: Option<Averaging>,
        #[arg(long)]
        positive_five: Option<PositiveFive>,
    },
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["condition", "all", "table"])))]
struct Chi2Args {
    #[arg(long = "in", required_unless_present = "table")]
    input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    labels: Option<PathBuf>,
    #[arg(long)]
    condition: Option<Condition>,
    #[arg(long)]
    all: bool,
    /// A literal table a,b,c,d.
    #[arg(long, value_delimiter = ',')]
    table: Option<Vec<u64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendKind {
    Pattern,
    Remote,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenerateMode {
    Retrieval,
    Remote,
}

impl clap::builder::ValueParserFactory for Condition {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Condition>())
    }
}

impl clap::builder::ValueParserFactory for Averaging {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Averaging>())
    }
}

impl clap::builder::ValueParserFactory for PositiveFive {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<PositiveFive>())
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_remote() {
                2
            } else {
                1
            }
        }
    }
}

struct Ctx {
    cfg: Config,
    command: &'static str,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    command: &'a str,
    config: serde_json::Value,
}

impl Ctx {
    fn lexicon(&self) -> Result<Lexicon> {
        match &self.cfg.lexicon {
            Some(p) => Lexicon::load(p),
            None => Ok(Lexicon::builtin()),
        }
    }

    fn catalog(&self) -> Result<KeywordCatalog> {
        match &self.cfg.catalog {
            Some(p) => KeywordCatalog::load(p),
            None => Ok(KeywordCatalog::builtin()),
        }
    }

    fn write(&self, path: &Path, content: &str) -> Result<PathBuf> {
        let path = self.cfg.output_path(path);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        corpus::write_atomic(&path, content.as_bytes())?;
        Ok(path)
    }

    /// Writes a primary output plus `<path>.config.json` with the resolved configuration.
    fn write_primary(&self, path: &Path, content: &str) -> Result<()> {
        let written = self.write(path, content)?;
        let record = RunRecord {
            command: self.command,
            config: serde_json::from_str(&self.cfg.redacted_json()).expect("config is JSON"),
        };
        let mut sidecar = written.into_os_string();
        sidecar.push(".config.json");
        let json = serde_json::to_string_pretty(&record).expect("record serializes") + "\n";
        corpus::write_atomic(Path::new(&sidecar), json.as_bytes())
    }

    /// Writes to `out` when given, otherwise prints.
    fn emit(&self, out: Option<&Path>, content: &str) -> Result<()> {
        match out {
            Some(p) => self.write_primary(p, content),
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Label { .. } => "label",
        Command::Stats { .. } => "stats",
        Command::Chi2(_) => "chi2",
        Command::Shift { .. } => "shift",
        Command::Clean { .. } => "clean",
        Command::CleanEval { .. } => "clean-eval",
        Command::Index { .. } => "index",
        Command::Generate { .. } => "generate",
        Command::Evaluate { .. } => "evaluate",
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = Config::resolve(cli.config.as_deref())?;
    if let Some(p) = cli.lexicon {
        cfg.lexicon = Some(p);
    }
    if let Some(p) = cli.catalog {
        cfg.catalog = Some(p);
    }
    if let Some(p) = cli.out_dir {
        cfg.out_dir = Some(p);
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    match &cli.command {
        Command::Shift { threshold: Some(t), .. } => cfg.shift_threshold = *t,
        Command::Clean { endpoint: Some(e), .. } => cfg.clean.endpoint = Some(e.clone()),
        Command::Generate { endpoint: Some(e), .. } => cfg.generate.endpoint = Some(e.clone()),
        Command::Evaluate {
            averaging,
            positive_five,
            ..
        } => {
            if let Some(a) = averaging {
                cfg.f1_averaging = *a;
            }
            if let Some(p) = positive_five {
                cfg.positive_five = *p;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    let ctx = Ctx {
        cfg,
        command: command_name(&cli.command),
    };
    match cli.command {
        Command::Label { input, out } => cmd_label(&ctx, &input, &out),
        Command::Stats { input, labels, out } => cmd_stats(&ctx, &input, labels.as_deref(), out.as_deref()),
        Command::Chi2(args) => cmd_chi2(&ctx, args),
        Command::Shift { a, b, out, .. } => cmd_shift(&ctx, &a, &b, out.as_deref()),
        Command::Clean {
            input,
            out,
            backend,
            audit,
            rules,
            ..
        } => cmd_clean(&ctx, &input, &out, backend, audit.as_deref(), &rules),
        Command::CleanEval {
            machine,
            manual,
            original,
            out,
        } => cmd_clean_eval(&ctx, &machine, &manual, &original, out.as_deref()),
        Command::Index { input, out } => cmd_index(&ctx, &input, &out),
        Command::Generate {
            requests,
            reports,
            index,
            out,
            mode,
            audit,
            no_indication,
            ..
        } => cmd_generate(
            &ctx,
            &requests,
            &reports,
            index.as_deref(),
            &out,
            mode,
            audit.as_deref(),
            no_indication,
        ),
        Command::Evaluate {
            generated,
            ref_original,
            ref_clean,
            out,
            table,
            model,
            ..
        } => cmd_evaluate(
            &ctx,
            &generated,
            &ref_original,
            &ref_clean,
            out.as_deref(),
            table.as_deref(),
            &model,
        ),
    }
}

fn label_all(reports: &[Report], lexicon: &Lexicon) -> Vec<LabeledStudy> {
    reports
        .iter()
        .map(|r| LabeledStudy {
            study_id: r.study_id.clone(),
            labels: label_report(&r.impression, lexicon),
        })
        .collect()
}

fn cmd_label(ctx: &Ctx, input: &Path, out: &Path) -> Result<()> {
    let lexicon = ctx.lexicon()?;
    let reports = corpus::read_reports(input)?;
    let labeled = label_all(&reports, &lexicon);
    ctx.write_primary(out, &corpus::labels_to_csv(&labeled))?;
    eprintln!(
        "labeled {} reports with lexicon {}",
        labeled.len(),
        lexicon.fingerprint()
    );
    Ok(())
}

/// Reports, their label map (read or computed) and indication mention sets.
fn load_labeled(
    ctx: &Ctx,
    input: &Path,
    labels: Option<&Path>,
) -> Result<(
    Vec<Report>,
    std::collections::HashMap<String, crate::LabelVector>,
    stats::MentionSets,
)> {
    let lexicon = ctx.lexicon()?;
    let reports = corpus::read_reports(input)?;
    let label_map = match labels {
        Some(p) => corpus::label_map(&corpus::read_labels(p)?),
        None => corpus::label_map(&label_all(&reports, &lexicon)),
    };
    let mentions = stats::mention_sets(&reports, &lexicon);
    Ok((reports, label_map, mentions))
}

fn cmd_stats(ctx: &Ctx, input: &Path, labels: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let (reports, label_map, mentions) = load_labeled(ctx, input, labels)?;
    let summary = stats::summarize(&reports, &label_map, &mentions)?;
    if out.is_some() {
        eprint!("{}", summary.to_table());
    }
    ctx.emit(out, &summary.to_csv())
}

const CHI2_HEADER: &str = "condition,a,b,c,d,p_in,p_out,statistic,p_value,significance\n";

fn chi2_row(
    out: &mut String,
    name: &str,
    t: &ContingencyTable2x2,
    p_in: Option<f64>,
    p_out: Option<f64>,
    strict: bool,
) -> Result<()> {
    let (stat, p, stars) = match stats::chi_square_test(t) {
        Ok(c) => (
            format!("{}", c.statistic),
            format!("{}", c.p_value),
            stats::significance_stars(c.p_value),
        ),
        Err(e) if strict => return Err(e),
        Err(_) => ("NA".into(), "NA".into(), ""),
    };
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x}"));
    let _ = writeln!(
        out,
        "{name},{},{},{},{},{},{},{stat},{p},{stars}",
        t.a,
        t.b,
        t.c,
        t.d,
        opt(p_in),
        opt(p_out)
    );
    Ok(())
}

fn cmd_chi2(ctx: &Ctx, args: Chi2Args) -> Result<()> {
    let mut out = String::from(CHI2_HEADER);
    if let Some(cells) = &args.table {
        if cells.len() != 4 {
            return Err(Error::Config(format!(
                "--table needs four counts a,b,c,d, got {}",
                cells.len()
            )));
        }
        let t = ContingencyTable2x2::new(cells[0], cells[1], cells[2], cells[3]);
        let rate = |n: u64, d: u64| (d > 0).then(|| n as f64 / d as f64);
        chi2_row(&mut out, "table", &t, rate(t.a, t.a + t.b), rate(t.c, t.c + t.d), true)?;
        return ctx.emit(args.out.as_deref(), &out);
    }
    let input = args.input.as_deref().expect("clap requires --in without --table");
    let (reports, label_map, mentions) = load_labeled(ctx, input, args.labels.as_deref())?;
    let conditions: Vec<Condition> = match args.condition {
        Some(c) => vec![c],
        None => Condition::findings().collect(),
    };
    let strict = args.condition.is_some();
    for c in conditions {
        let r = stats::conditional_negative_rates(&reports, &label_map, &mentions, c)?;
        chi2_row(&mut out, c.name(), &r.table, r.p_in, r.p_out, strict)?;
    }
    ctx.emit(args.out.as_deref(), &out)
}

fn read_summary(path: &Path) -> Result<CorpusSummary> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    CorpusSummary::from_csv(&text, path)
}

fn cmd_shift(ctx: &Ctx, a: &Path, b: &Path, out: Option<&Path>) -> Result<()> {
    let report = stats::shift_report(&read_summary(a)?, &read_summary(b)?, ctx.cfg.shift_threshold);
    for f in report.flagged() {
        eprintln!("shift: {} moved beyond {}", f.field, report.threshold);
    }
    ctx.emit(out, &report.to_csv())
}

fn selected_rules(ids: &[u8]) -> Result<Vec<CleaningRule>> {
    if ids.is_empty() {
        return Ok(cleaning::all_rules().to_vec());
    }
    let mut rules = Vec::new();
    for &id in ids {
        let r =
            cleaning::rule(id).ok_or_else(|| Error::Config(format!("unknown cleaning rule {id} (expected 1..7)")))?;
        if !rules.contains(r) {
            rules.push(r.clone());
        }
    }
    rules.sort_by_key(|r| r.id);
    Ok(rules)
}

fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| serde_json::to_string(i).expect("record serializes") + "\n")
        .collect()
}

fn cmd_clean(
    ctx: &Ctx,
    input: &Path,
    out: &Path,
    backend: BackendKind,
    audit: Option<&Path>,
    rule_ids: &[u8],
) -> Result<()> {
    let lexicon = ctx.lexicon()?;
    let reports = corpus::read_reports(input)?;
    let rules = selected_rules(rule_ids)?;
    let (backend, jobs): (Box<dyn RewriteBackend>, usize) = match backend {
        BackendKind::Pattern => (Box::new(PatternBackend::new(lexicon.clone())), ctx.cfg.jobs),
        BackendKind::Remote => {
            let r = &ctx.cfg.clean;
            let endpoint = r.require_endpoint("cleaning")?;
            (
                Box::new(RemoteBackend::new(endpoint, r.token.clone(), r.timeout(), r.retries)),
                r.in_flight,
            )
        }
    };
    let cleaned = cleaning::clean_corpus(&reports, &rules, backend.as_ref(), &lexicon, jobs)?;
    ctx.write_primary(out, &corpus::reports_to_jsonl(&cleaned.reports))?;
    if let Some(a) = audit {
        ctx.write(a, &to_jsonl(&cleaned.audit))?;
    }
    let removed = cleaned.audit.iter().filter(|r| r.trace.result.is_removed()).count();
    eprintln!(
        "cleaned {} reports ({} sentences, {} removed) with the {} backend",
        cleaned.reports.len(),
        cleaned.audit.len(),
        removed,
        backend.name()
    );
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn cmd_clean_eval(ctx: &Ctx, machine: &Path, manual: &Path, original: &Path, out: Option<&Path>) -> Result<()> {
    let lexicon = ctx.lexicon()?;
    let e = cleaning::evaluate_cleaning(
        &read_lines(machine)?,
        &read_lines(manual)?,
        &read_lines(original)?,
        &lexicon,
    )?;
    let json = serde_json::to_string_pretty(&e).expect("evaluation serializes") + "\n";
    ctx.emit(out, &json)
}

fn cmd_index(ctx: &Ctx, input: &Path, out: &Path) -> Result<()> {
    let lexicon = ctx.lexicon()?;
    let reports = corpus::read_reports(input)?;
    let index = RetrievalIndex::build(&reports, &lexicon)?;
    let empty = index.empty_pools();
    if !empty.is_empty() {
        let names: Vec<&str> = empty.iter().map(|c| c.name()).collect();
        eprintln!("warning: no negative sentences for {}", names.join(", "));
    }
    ctx.write_primary(out, &index.to_json())?;
    eprintln!(
        "indexed {} reports under {} label sets",
        index.report_count(),
        index.keys().count()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    ctx: &Ctx,
    requests: &Path,
    reports: &Path,
    index: Option<&Path>,
    out: &Path,
    mode: GenerateMode,
    audit: Option<&Path>,
    no_indication: bool,
) -> Result<()> {
    let lexicon = ctx.lexicon()?;
    let source = corpus::read_reports(reports)?;
    let reqs = generator::requests_from(&corpus::read_labels(requests)?, &source)?;
    let effective: Vec<GenerationRequest> = reqs
        .iter()
        .map(|r| GenerationRequest {
            indication: if no_indication {
                String::new()
            } else {
                r.indication.clone()
            },
            ..r.clone()
        })
        .collect();
    let (outputs, audit_lines): (Vec<Report>, String) = match mode {
        GenerateMode::Retrieval => {
            let path = index.ok_or_else(|| Error::Config("--index is required in retrieval mode".into()))?;
            let idx = RetrievalIndex::load(path, &lexicon)?;
            let generated = generator::generate_all(&effective, &idx, &lexicon, ctx.cfg.jobs)?;
            let reports = generated
                .iter()
                .zip(&reqs)
                .map(|(g, r)| g.to_report(&r.indication))
                .collect();
            (reports, to_jsonl(&generated))
        }
        GenerateMode::Remote => {
            use rayon::prelude::*;
            let r = &ctx.cfg.generate;
            let client = RemoteGenerator::new(r.require_endpoint("generation")?, r.token.clone(), r.timeout());
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(r.in_flight)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            let generated: Vec<_> = pool.install(|| {
                effective
                    .par_iter()
                    .map(|q| generator::generate_remote(q, &client))
                    .collect::<Result<_>>()
            })?;
            let reports = generated
                .iter()
                .zip(&reqs)
                .map(|(g, q)| Report::new(g.study_id.clone(), q.indication.clone(), g.text.clone()))
                .collect();
            (reports, to_jsonl(&generated))
        }
    };
    ctx.write_primary(out, &corpus::reports_to_jsonl(&outputs))?;
    if let Some(a) = audit {
        ctx.write(a, &audit_lines)?;
    }
    eprintln!("generated {} reports", outputs.len());
    Ok(())
}

fn cmd_evaluate(
    ctx: &Ctx,
    generated: &Path,
    ref_original: &Path,
    ref_clean: &Path,
    out: Option<&Path>,
    table: Option<&Path>,
    model: &str,
) -> Result<()> {
    let lexicon = ctx.lexicon()?;
    let catalog = ctx.catalog()?;
    let options = MetricsOptions {
        averaging: ctx.cfg.f1_averaging,
        positive_five: ctx.cfg.positive_five,
    };
    let m: MetricsReport = evaluate_generation(
        &corpus::read_reports(generated)?,
        &corpus::read_reports(ref_original)?,
        &corpus::read_reports(ref_clean)?,
        &lexicon,
        &catalog,
        options,
    )?;
    let row = format!("{}\n{}\n", MetricsReport::CSV_HEADER, m.csv_row(model));
    if let Some(t) = table {
        ctx.write(t, &row)?;
    }
    let names: Vec<&str> = m.positive_five.iter().map(|c| c.name()).collect();
    eprintln!("positive F1-5 conditions: {}", names.join(", "));
    match out {
        Some(p) => {
            eprint!("{row}");
            ctx.write_primary(
                p,
                &(serde_json::to_string_pretty(&m).expect("report serializes") + "\n"),
            )
        }
        None => {
            print!("{row}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(["radprag", "frobnicate"]), 1);
        assert_eq!(run(["radprag"]), 1);
        assert_eq!(run(["radprag", "--help"]), 0);
    }

    #[test]
    fn chi2_literal_table() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t.csv");
        let code = run([
            "radprag",
            "chi2",
            "--table",
            "20,10,10,20",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with(CHI2_HEADER));
        assert!(text.contains("table,20,10,10,20,"));
        assert!(dir.path().join("t.csv.config.json").exists());
        assert_eq!(run(["radprag", "chi2", "--table", "0,0,1,1"]), 1);
    }
}
