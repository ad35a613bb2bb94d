//! Command-line front end: `annotate`, `bench`, `report`, `record`.
//!
//! Exit status: 0 success, 1 quality failure (annotate only: the checker
//! never passed), 2 infrastructure or usage failure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Once};

use chrono::Utc;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::checker::{category_histogram, scan_generic_placeholders, Category, Mypy, PlaceholderHit, TypeChecker};
use crate::config::RunConfig;
use crate::corpus::{load_corpus, load_ground_truth, write_file, GroundTruthRecord, RunHeader, RunStore, SourceSnippet};
use crate::error::{Error, Result};
use crate::eval::{compute_metrics, extract_annotations, AnnotationRecord, MetricsOptions, MetricsReport};
use crate::llm::{prompt_digest, HttpTransport, LlmGateway, RecordingTransport, ScriptedTransport, TransportMode};
use crate::pipeline::{efficiency_stats, Annotator, EfficiencyStats, PipelineResult, PipelineStatus};
use crate::prompt::PromptSet;

pub const CONFIG_ECHO_FILE: &str = "config.toml";
pub const TRUTH_COPY_FILE: &str = "truth.json";
pub const ANNOTATIONS_FILE: &str = "annotations.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Parser)]
#[command(name = "typeloop", version, about = "Annotate Python with types from a language model, checked by mypy")]
pub struct Cli {
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the API key.
    #[arg(long, global = true)]
    pub api_key_env: Option<String>,
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    #[arg(long, global = true)]
    pub max_output_tokens: Option<u32>,
    #[arg(long, global = true)]
    pub max_repairs: Option<usize>,
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    /// live, replay or record.
    #[arg(long, global = true, value_parser = parse_transport)]
    pub transport: Option<TransportMode>,
    #[arg(long, global = true)]
    pub transcript: Option<PathBuf>,
    /// mypy executable.
    #[arg(long, global = true)]
    pub mypy: Option<PathBuf>,
    /// Checker timeout in seconds.
    #[arg(long, global = true)]
    pub checker_timeout: Option<f64>,
    #[arg(long, global = true)]
    pub filter_nontype_errors: bool,
    #[arg(long, global = true)]
    pub equate_optional: bool,
    /// Directory with replacement templates and examples.
    #[arg(long, global = true)]
    pub prompts: Option<PathBuf>,
}

fn parse_transport(s: &str) -> std::result::Result<TransportMode, String> {
    match s {
        "live" => Ok(TransportMode::Live),
        "replay" => Ok(TransportMode::Replay),
        "record" => Ok(TransportMode::Record),
        _ => Err(format!("unknown transport {s:?} (expected live, replay or record)")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Annotate one file.
    Annotate {
        file: PathBuf,
        /// Write the annotated code here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dump every iteration (prompt kind, reply, check) to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Annotate a corpus and score it against ground truth.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Run directory.
        #[arg(long)]
        out: PathBuf,
        /// Replace an existing run in `out`.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        sample: Sampling,
    },
    /// Recompute metrics and statistics for a finished run.
    Report { run_dir: PathBuf },
    /// Annotate a corpus while saving every model exchange to a transcript.
    Record {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
        /// Take replies from a JSON script (snippet id → replies) instead
        /// of the endpoint.
        #[arg(long)]
        script: Option<PathBuf>,
        #[command(flatten)]
        sample: Sampling,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Sampling {
    /// Annotate a random subset of this many snippets.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

static STOP: AtomicBool = AtomicBool::new(false);

/// Makes Ctrl-C stop scheduling new snippets; finished results stay on disk.
pub fn install_interrupt_handler() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        if let Err(e) = ctrlc::set_handler(|| {
            if STOP.swap(true, Ordering::SeqCst) {
                std::process::exit(130);
            }
            eprintln!("interrupted; finishing in-flight snippets (press again to abort)");
        }) {
            tracing::warn!("cannot install interrupt handler: {e}");
        }
    });
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Annotate { file, out: dest, trace } => {
            let config = load_config(cli.config.as_deref(), &cli.overrides)?;
            cmd_annotate(file, &config, dest.as_deref(), *trace, cli.json, out, err)
        }
        Command::Bench {
            corpus,
            truth,
            out: run_dir,
            force,
            sample,
        } => {
            let config = load_config(cli.config.as_deref(), &cli.overrides)?;
            let analysis = cmd_bench(corpus, truth, &config, run_dir, *force, sample)?;
            emit(&analysis, cli.json, out)?;
            Ok(0)
        }
        Command::Report { run_dir } => {
            let analysis = cmd_report(run_dir, cli.overrides.equate_optional)?;
            emit(&analysis, cli.json, out)?;
            Ok(0)
        }
        Command::Record {
            corpus,
            transcript,
            out: run_dir,
            force,
            script,
            sample,
        } => {
            let mut overrides = cli.overrides.clone();
            overrides.transport = Some(TransportMode::Record);
            overrides.transcript = Some(transcript.clone());
            let config = load_config(cli.config.as_deref(), &overrides)?;
            let analysis = cmd_record(corpus, &config, run_dir, *force, script.as_deref(), sample)?;
            emit(&analysis, cli.json, out)?;
            Ok(0)
        }
    }
}

fn emit(analysis: &RunAnalysis, json: bool, out: &mut dyn Write) -> Result<()> {
    let text = if json {
        serde_json::to_string_pretty(analysis).expect("analysis serializes") + "\n"
    } else {
        analysis.to_text()
    };
    out.write_all(text.as_bytes()).map_err(|e| Error::io("writing output", e))
}

/// Config file (or defaults), then command-line overrides, then validation.
pub fn load_config(path: Option<&Path>, ov: &Overrides) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let llm = &mut cfg.llm;
    if let Some(v) = &ov.model {
        llm.model_id = v.clone();
    }
    if let Some(v) = &ov.endpoint {
        llm.endpoint_url = v.clone();
    }
    if let Some(v) = &ov.api_key_env {
        llm.api_key_env = v.clone();
    }
    if let Some(v) = ov.temperature {
        llm.temperature = v;
    }
    if let Some(v) = ov.max_output_tokens {
        llm.max_output_tokens = Some(v);
    }
    if let Some(v) = ov.transport {
        llm.transport = v;
    }
    if let Some(v) = &ov.transcript {
        llm.transcript = Some(v.clone());
    }
    if let Some(v) = ov.max_repairs {
        cfg.loop_settings.max_repair_iterations = v;
    }
    if let Some(v) = ov.parallelism {
        cfg.loop_settings.parallelism = v;
    }
    if ov.filter_nontype_errors {
        cfg.loop_settings.filter_nontype_errors = true;
    }
    if let Some(v) = &ov.mypy {
        cfg.checker.executable = v.clone();
    }
    if let Some(v) = ov.checker_timeout {
        cfg.checker.timeout = std::time::Duration::try_from_secs_f64(v)
            .map_err(|e| Error::Config(format!("checker timeout {v}: {e}")))?;
    }
    if ov.equate_optional {
        cfg.metrics.equate_optional = true;
    }
    if let Some(v) = &ov.prompts {
        cfg.prompts.dir = Some(v.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prompt_set(cfg: &RunConfig) -> Result<PromptSet> {
    match &cfg.prompts.dir {
        Some(dir) => PromptSet::load(dir),
        None => Ok(PromptSet::builtin()),
    }
}

fn checker(cfg: &RunConfig) -> Result<(Arc<dyn TypeChecker>, String)> {
    let mypy = Mypy::new(cfg.checker.clone())?;
    let version = mypy.version()?;
    Ok((Arc::new(mypy), version))
}

pub fn cmd_annotate(
    file: &Path,
    cfg: &RunConfig,
    dest: Option<&Path>,
    trace: bool,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let code = fs::read_to_string(file).map_err(|e| Error::io(format!("reading {}", file.display()), e))?;
    let id = file.file_name().map_or_else(|| "input.py".into(), |n| n.to_string_lossy().into_owned());
    let snippet = SourceSnippet::new(id.clone(), id, code);
    let (checker, _) = checker(cfg)?;
    let annotator = Annotator::new(LlmGateway::from_config(&cfg.llm)?, checker, prompt_set(cfg)?, cfg.loop_config());
    let result = annotator.annotate_snippet(&snippet);

    let io = |e| Error::io("writing output", e);
    if trace {
        let history = serde_json::to_string_pretty(&result.history).expect("history serializes");
        writeln!(err, "{history}").map_err(io)?;
    }
    let mut final_code = result.final_code.clone();
    if !final_code.ends_with('\n') {
        final_code.push('\n');
    }
    match dest {
        Some(path) => write_file(path, final_code.as_bytes())?,
        None if json => {}
        None => out.write_all(final_code.as_bytes()).map_err(io)?,
    }
    if json {
        let doc = serde_json::to_string_pretty(&result).expect("result serializes");
        writeln!(out, "{doc}").map_err(io)?;
    }
    Ok(match result.status {
        PipelineStatus::Consistent => 0,
        PipelineStatus::Inconsistent => {
            let remaining = result.final_check().map_or(0, |c| c.errors().count());
            writeln!(
                err,
                "warning: mypy still reports {remaining} error(s) after {} repair round(s); emitted the last candidate",
                result.repair_iterations_used
            )
            .map_err(io)?;
            1
        }
        other => {
            writeln!(
                err,
                "error: {other:?}: {}",
                result.error.as_deref().unwrap_or("no candidate produced")
            )
            .map_err(io)?;
            2
        }
    })
}

fn load_snippets(corpus: &Path, sampling: &Sampling) -> Result<Vec<SourceSnippet>> {
    let snippets = load_corpus(corpus)?;
    if snippets.is_empty() {
        return Err(Error::Usage(format!("empty corpus: no .py files under {}", corpus.display())));
    }
    Ok(match sampling.sample {
        Some(n) if n < snippets.len() => sample(snippets, n, sampling.seed),
        _ => snippets,
    })
}

/// A reproducible subset of `n` snippets, kept in corpus order.
pub fn sample(snippets: Vec<SourceSnippet>, n: usize, seed: u64) -> Vec<SourceSnippet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: BTreeSet<usize> = rand::seq::index::sample(&mut rng, snippets.len(), n).into_iter().collect();
    snippets
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| chosen.contains(&i).then_some(s))
        .collect()
}

fn run_id(snippets: &[SourceSnippet], cfg: &RunConfig) -> String {
    let now = Utc::now();
    let ids: Vec<&str> = snippets.iter().map(|s| s.id.as_str()).collect();
    let seed = format!("{}|{}|{}", now.to_rfc3339(), cfg.llm.model_id, ids.join("\n"));
    format!("{}-{}", now.format("%Y%m%dT%H%M%SZ"), &prompt_digest(&seed)[..8])
}

fn start_run(
    snippets: &[SourceSnippet],
    cfg: &RunConfig,
    run_dir: &Path,
    force: bool,
    checker_version: String,
) -> Result<RunStore> {
    let header = RunHeader {
        run_id: run_id(snippets, cfg),
        created_at: Utc::now(),
        checker_version,
        model_id: cfg.llm.model_id.clone(),
        snippet_ids: snippets.iter().map(|s| s.id.clone()).collect(),
    };
    let store = RunStore::create(run_dir, header, force)?;
    write_file(&run_dir.join(CONFIG_ECHO_FILE), cfg.to_toml().as_bytes())?;
    Ok(store)
}

fn finish_run(annotator: &Annotator, snippets: &[SourceSnippet], store: &RunStore) -> Result<()> {
    annotator.annotate_corpus(snippets, store, Some(&STOP))?;
    let missing = store.missing();
    if !missing.is_empty() {
        return Err(Error::Usage(format!(
            "run stopped early; {} of {} results saved in {}",
            store.len(),
            store.header().snippet_ids.len(),
            store.dir().display()
        )));
    }
    Ok(())
}

pub fn cmd_bench(
    corpus: &Path,
    truth_path: &Path,
    cfg: &RunConfig,
    run_dir: &Path,
    force: bool,
    sampling: &Sampling,
) -> Result<RunAnalysis> {
    let snippets = load_snippets(corpus, sampling)?;
    let truth = load_ground_truth(truth_path)?;
    let prompts = prompt_set(cfg)?;
    let gateway = LlmGateway::from_config(&cfg.llm)?;
    let (checker, version) = checker(cfg)?;

    let store = start_run(&snippets, cfg, run_dir, force, version)?;
    let truth_json = serde_json::to_string_pretty(&truth_file(&truth)).expect("truth serializes");
    write_file(&run_dir.join(TRUTH_COPY_FILE), truth_json.as_bytes())?;
    let annotator = Annotator::new(gateway, checker, prompts, cfg.loop_config());
    finish_run(&annotator, &snippets, &store)?;

    let analysis = analyze(&store, Some(&truth), cfg.metrics)?;
    write_outputs(run_dir, &analysis)?;
    Ok(analysis)
}

pub fn cmd_record(
    corpus: &Path,
    cfg: &RunConfig,
    run_dir: &Path,
    force: bool,
    script: Option<&Path>,
    sampling: &Sampling,
) -> Result<RunAnalysis> {
    let snippets = load_snippets(corpus, sampling)?;
    let transcript = cfg
        .llm
        .transcript
        .as_deref()
        .ok_or_else(|| Error::Config("record needs a transcript path".into()))?;
    let inner: Box<dyn crate::llm::Transport> = match script {
        Some(path) => Box::new(ScriptedTransport::load(path)?),
        None => Box::new(HttpTransport::new(&cfg.llm)),
    };
    let gateway = LlmGateway::new(Box::new(RecordingTransport::new(inner, transcript)?), &cfg.llm);
    let (checker, version) = checker(cfg)?;
    let store = start_run(&snippets, cfg, run_dir, force, version)?;
    let annotator = Annotator::new(gateway, checker, prompt_set(cfg)?, cfg.loop_config());
    finish_run(&annotator, &snippets, &store)?;
    let analysis = analyze(&store, None, cfg.metrics)?;
    write_outputs(run_dir, &analysis)?;
    Ok(analysis)
}

/// Pure over the run directory: reads files, never calls the model or mypy.
pub fn cmd_report(run_dir: &Path, equate_optional: bool) -> Result<RunAnalysis> {
    let store = RunStore::open(run_dir)?;
    let missing = store.missing();
    if !missing.is_empty() {
        return Err(Error::Usage(format!(
            "incomplete run in {}: no result for {}",
            run_dir.display(),
            missing.join(", ")
        )));
    }
    let mut opts = match fs::read_to_string(run_dir.join(CONFIG_ECHO_FILE)) {
        Ok(text) => RunConfig::from_toml(&text)?.metrics,
        Err(_) => MetricsOptions::default(),
    };
    opts.equate_optional |= equate_optional;
    let truth_path = run_dir.join(TRUTH_COPY_FILE);
    let truth = if truth_path.exists() {
        Some(load_ground_truth(&truth_path)?)
    } else {
        None
    };
    analyze(&store, truth.as_ref(), opts)
}

#[derive(Serialize)]
struct TruthEntry<'a> {
    owner: &'a str,
    kind: crate::eval::SlotKind,
    name: &'a str,
    #[serde(rename = "type")]
    ty: Option<&'a str>,
}

fn truth_file(truth: &BTreeMap<String, GroundTruthRecord>) -> BTreeMap<&str, Vec<TruthEntry<'_>>> {
    truth
        .iter()
        .map(|(id, r)| {
            let entries = r
                .slots
                .iter()
                .map(|s| TruthEntry {
                    owner: &s.owner,
                    kind: s.kind,
                    name: &s.name,
                    ty: s.label.as_ref().map(|l| l.raw.as_str()),
                })
                .collect();
            (id.as_str(), entries)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaceholderReport {
    pub total: usize,
    pub snippets: usize,
    pub hits: BTreeMap<String, Vec<PlaceholderHit>>,
}

/// Everything `report` prints, derived from a run directory alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunAnalysis {
    pub model_id: String,
    pub checker_version: String,
    pub snippets: usize,
    pub status_counts: BTreeMap<PipelineStatus, usize>,
    pub efficiency: EfficiencyStats,
    pub metrics: Option<MetricsReport>,
    /// Error categories in the final check of runs that never passed.
    pub failure_categories: BTreeMap<Category, usize>,
    pub any_placeholders: PlaceholderReport,
    #[serde(skip)]
    pub annotations: BTreeMap<String, AnnotationRecord>,
}

/// Annotations from every result that produced a candidate. Candidates that
/// no longer parse yield no record.
pub fn collect_predictions(results: &[PipelineResult]) -> BTreeMap<String, AnnotationRecord> {
    results
        .iter()
        .filter(|r| !r.history.is_empty())
        .filter_map(|r| match extract_annotations(&r.final_code, &r.snippet_id) {
            Ok(rec) => Some((r.snippet_id.clone(), rec)),
            Err(e) => {
                tracing::debug!(snippet = %r.snippet_id, "final code unreadable: {e}");
                None
            }
        })
        .collect()
}

pub fn analyze(
    store: &RunStore,
    truth: Option<&BTreeMap<String, GroundTruthRecord>>,
    opts: MetricsOptions,
) -> Result<RunAnalysis> {
    let mut results = store.results();
    results.sort_by(|a, b| a.snippet_id.cmp(&b.snippet_id));
    let efficiency = efficiency_stats(&results)?;
    let annotations = collect_predictions(&results);

    let metrics = match truth {
        Some(truth) => {
            let in_run: BTreeSet<&str> = store.header().snippet_ids.iter().map(String::as_str).collect();
            let scoped: BTreeMap<String, GroundTruthRecord> = truth
                .iter()
                .filter(|(id, _)| in_run.contains(id.as_str()))
                .map(|(id, r)| (id.clone(), r.clone()))
                .collect();
            if scoped.len() < truth.len() {
                tracing::info!("{} labelled snippets are not part of this run", truth.len() - scoped.len());
            }
            if scoped.is_empty() {
                return Err(Error::Usage("no snippet in this run has ground-truth labels".into()));
            }
            Some(compute_metrics(&annotations, &scoped, &results, opts)?)
        }
        None => None,
    };

    let failing = results
        .iter()
        .filter(|r| r.status == PipelineStatus::Inconsistent)
        .filter_map(PipelineResult::final_check);
    let failure_categories = category_histogram(failing);

    let mut hits = BTreeMap::new();
    for r in results.iter().filter(|r| !r.history.is_empty()) {
        if let Ok(found) = scan_generic_placeholders(&r.final_code) {
            if !found.is_empty() {
                hits.insert(r.snippet_id.clone(), found);
            }
        }
    }
    let any_placeholders = PlaceholderReport {
        total: hits.values().map(Vec::len).sum(),
        snippets: hits.len(),
        hits,
    };

    let mut status_counts = BTreeMap::new();
    for r in &results {
        *status_counts.entry(r.status).or_insert(0) += 1;
    }
    Ok(RunAnalysis {
        model_id: store.header().model_id.clone(),
        checker_version: store.header().checker_version.clone(),
        snippets: results.len(),
        status_counts,
        efficiency,
        metrics,
        failure_categories,
        any_placeholders,
        annotations,
    })
}

fn write_outputs(run_dir: &Path, analysis: &RunAnalysis) -> Result<()> {
    let mut lines = String::new();
    for rec in analysis.annotations.values() {
        lines.push_str(&serde_json::to_string(rec).expect("annotations serialize"));
        lines.push('\n');
    }
    write_file(&run_dir.join(ANNOTATIONS_FILE), lines.as_bytes())?;
    if let Some(m) = &analysis.metrics {
        let doc = serde_json::to_string_pretty(m).expect("metrics serialize") + "\n";
        write_file(&run_dir.join(METRICS_FILE), doc.as_bytes())?;
    }
    write_file(&run_dir.join(SUMMARY_FILE), analysis.to_text().as_bytes())
}

impl RunAnalysis {
    pub fn to_text(&self) -> String {
        let e = &self.efficiency;
        let mut s = String::new();
        let _ = writeln!(s, "model: {}   checker: {}", self.model_id, self.checker_version);
        let counts: Vec<String> = self.status_counts.iter().map(|(k, v)| format!("{k:?} {v}")).collect();
        let _ = writeln!(s, "snippets: {} ({})", self.snippets, counts.join(", "));
        let _ = writeln!(
            s,
            "consistency rate:   {:.1}% ({}/{})",
            100.0 * e.consistency_rate,
            e.consistent,
            e.consistent + e.inconsistent
        );
        let _ = writeln!(s, "mean repairs:       {:.3} (converged runs)", e.mean_repairs_among_converged);
        let first = e.first_attempt_rate_among_converged;
        let _ = writeln!(
            s,
            "first-attempt rate: {:.1}% ({}/{})",
            100.0 * first,
            (first * e.consistent as f64).round() as usize,
            e.consistent
        );
        match &self.metrics {
            Some(m) => {
                let _ = writeln!(s);
                let _ = writeln!(s, "{}", m.to_table(&self.model_id));
            }
            None => {
                let _ = writeln!(s, "no ground truth for this run; accuracy not scored");
            }
        }
        let _ = writeln!(s);
        if self.failure_categories.is_empty() {
            let _ = writeln!(s, "error categories in unresolved runs: none");
        } else {
            let _ = writeln!(s, "error categories in unresolved runs:");
            for (cat, n) in &self.failure_categories {
                let _ = writeln!(s, "  {cat:<16} {n}");
            }
        }
        let _ = writeln!(
            s,
            "Any placeholders: {} in {} snippet(s)",
            self.any_placeholders.total, self.any_placeholders.snippets
        );
        for (id, hits) in &self.any_placeholders.hits {
            for h in hits {
                let _ = writeln!(s, "  {id}:{}: {} -> {}", h.line, h.slot, h.annotation);
            }
        }
        s
    }
}
