//! The generate–check–repair loop.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::checker::{CheckReport, TypeChecker};
use crate::corpus::{RunStore, SourceSnippet};
use crate::cst::{parse_to_cst, DEFAULT_CST_BYTE_BUDGET};
use crate::error::{Error, Result};
use crate::llm::{LlmConfig, LlmGateway, LlmResponse};
use crate::prompt::{PromptKind, PromptSet};

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    /// Repair prompts allowed after the initial generation.
    pub max_repair_iterations: usize,
    pub llm: LlmConfig,
    /// Feed only annotation-type diagnostics back to the model. The pass/fail
    /// verdict always uses the full check.
    pub filter_nontype_errors: bool,
    pub cst_byte_budget: usize,
    /// Corpus workers; 0 means one per processor.
    pub parallelism: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            max_repair_iterations: 10,
            llm: LlmConfig::default(),
            filter_nontype_errors: false,
            cst_byte_budget: DEFAULT_CST_BYTE_BUDGET,
            parallelism: 0,
        }
    }
}

impl LoopConfig {
    fn workers(&self, jobs: usize) -> usize {
        let wanted = match self.parallelism {
            0 => thread::available_parallelism()
                .map_or(1, |n| n.get())
                .min(self.llm.max_in_flight.max(1)),
            n => n,
        };
        wanted.clamp(1, jobs.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 0 is the initial generation.
    pub index: usize,
    pub prompt_kind: PromptKind,
    pub response: LlmResponse,
    pub check: CheckReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PipelineStatus {
    Consistent,
    Inconsistent,
    ProviderError,
    ParseFailed,
    /// A reply contained no code.
    ExtractionFailed,
    /// The checker could not be run.
    CheckerError,
}

impl PipelineStatus {
    pub const ALL: [PipelineStatus; 6] = [
        PipelineStatus::Consistent,
        PipelineStatus::Inconsistent,
        PipelineStatus::ProviderError,
        PipelineStatus::ParseFailed,
        PipelineStatus::ExtractionFailed,
        PipelineStatus::CheckerError,
    ];

    /// Whether the loop ran to a checker verdict.
    pub fn is_checker_outcome(self) -> bool {
        matches!(self, PipelineStatus::Consistent | PipelineStatus::Inconsistent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub snippet_id: String,
    pub status: PipelineStatus,
    pub repair_iterations_used: usize,
    /// Last candidate, or the original code when no candidate was produced.
    pub final_code: String,
    pub history: Vec<IterationRecord>,
    pub wall_time: Duration,
    /// What went wrong, for the failure statuses that are not checker verdicts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PipelineResult {
    pub fn final_check(&self) -> Option<&CheckReport> {
        self.history.last().map(|r| &r.check)
    }
}

/// Runs the loop for single snippets or whole corpora.
pub struct Annotator {
    gateway: LlmGateway,
    checker: Arc<dyn TypeChecker>,
    prompts: PromptSet,
    config: LoopConfig,
}

impl Annotator {
    pub fn new(gateway: LlmGateway, checker: Arc<dyn TypeChecker>, prompts: PromptSet, config: LoopConfig) -> Self {
        Annotator {
            gateway,
            checker,
            prompts,
            config,
        }
    }

    pub fn config(&self) -> &LoopConfig {
        &self.config
    }

    pub fn checker(&self) -> &dyn TypeChecker {
        self.checker.as_ref()
    }

    pub fn annotate_snippet(&self, snippet: &SourceSnippet) -> PipelineResult {
        let start = Instant::now();
        let mut run = LoopRun {
            snippet,
            history: Vec::new(),
            last_code: None,
        };
        let status = self.drive(&mut run);
        let (status, error) = match status {
            Ok(s) => (s, None),
            Err((s, e)) => {
                tracing::warn!(snippet = %snippet.id, ?s, "{e}");
                (s, Some(e.to_string()))
            }
        };
        PipelineResult {
            snippet_id: snippet.id.clone(),
            status,
            repair_iterations_used: run.history.len().saturating_sub(1),
            final_code: run.last_code.unwrap_or_else(|| snippet.code.clone()),
            history: run.history,
            wall_time: start.elapsed(),
            error,
        }
    }

    fn drive(&self, run: &mut LoopRun<'_>) -> std::result::Result<PipelineStatus, (PipelineStatus, Error)> {
        use PipelineStatus::*;
        let snippet = run.snippet;
        let cst = parse_to_cst(snippet, self.config.cst_byte_budget).map_err(|e| (ParseFailed, e))?;
        let mut prompt = self.prompts.initial_prompt(snippet, &cst).map_err(|e| (ParseFailed, e))?;
        loop {
            let response = self
                .gateway
                .complete(&prompt, &self.config.llm)
                .map_err(|e| (ProviderError, e))?;
            if response.extracted_code.trim().is_empty() {
                return Err((
                    ExtractionFailed,
                    Error::Provider(format!("reply to prompt {} contained no code", prompt.iteration)),
                ));
            }
            let check = self.checker.check(&response.extracted_code).map_err(|e| (CheckerError, e))?;
            let passed = check.passed;
            let index = run.history.len();
            run.last_code = Some(response.extracted_code.clone());
            run.history.push(IterationRecord {
                index,
                prompt_kind: prompt.kind,
                response,
                check,
            });
            if passed {
                return Ok(Consistent);
            }
            if index >= self.config.max_repair_iterations {
                return Ok(Inconsistent);
            }
            let last = run.history.last().expect("just pushed");
            let feedback = last.check.feedback(self.config.filter_nontype_errors);
            prompt = self
                .prompts
                .repair_prompt(&snippet.id, &last.response.extracted_code, &feedback, index + 1)
                .map_err(|e| (CheckerError, e))?;
        }
    }

    /// Annotates every snippet on a worker pool, persisting each result as
    /// soon as it is produced. Setting `stop` lets in-flight snippets finish
    /// and skips the rest.
    pub fn annotate_corpus(&self, snippets: &[SourceSnippet], store: &RunStore, stop: Option<&AtomicBool>) -> Result<()> {
        if let Some(s) = snippets.iter().find(|s| store.contains(&s.id)) {
            return Err(Error::Conflict(format!("run already has a result for {:?}", s.id)));
        }
        let next = AtomicUsize::new(0);
        let failure: Mutex<Option<Error>> = Mutex::new(None);
        let halted = AtomicBool::new(false);
        let workers = self.config.workers(snippets.len());
        thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    if halted.load(Ordering::SeqCst) || stop.is_some_and(|s| s.load(Ordering::SeqCst)) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(snippet) = snippets.get(i) else { break };
                    let result = self.annotate_snippet(snippet);
                    tracing::info!(snippet = %snippet.id, status = ?result.status, repairs = result.repair_iterations_used, "done");
                    if let Err(e) = store.persist(&result) {
                        halted.store(true, Ordering::SeqCst);
                        failure.lock().unwrap_or_else(|p| p.into_inner()).get_or_insert(e);
                        break;
                    }
                });
            }
        });
        match failure.into_inner().unwrap_or_else(|p| p.into_inner()) {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

struct LoopRun<'a> {
    snippet: &'a SourceSnippet,
    history: Vec<IterationRecord>,
    last_code: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyStats {
    /// Mean repair rounds over Consistent results.
    pub mean_repairs_among_converged: f64,
    /// Share of Consistent results that needed no repair.
    pub first_attempt_rate_among_converged: f64,
    /// Consistent / (Consistent + Inconsistent).
    pub consistency_rate: f64,
    pub total: usize,
    pub consistent: usize,
    pub inconsistent: usize,
    pub provider_errors: usize,
    pub parse_failures: usize,
    pub extraction_failures: usize,
    pub checker_errors: usize,
}

pub fn efficiency_stats(results: &[PipelineResult]) -> Result<EfficiencyStats> {
    if results.is_empty() {
        return Err(Error::Usage("no results to summarize".into()));
    }
    let count = |s: PipelineStatus| results.iter().filter(|r| r.status == s).count();
    let converged: Vec<&PipelineResult> = results
        .iter()
        .filter(|r| r.status == PipelineStatus::Consistent)
        .collect();
    let consistent = converged.len();
    let inconsistent = count(PipelineStatus::Inconsistent);
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(EfficiencyStats {
        mean_repairs_among_converged: div(converged.iter().map(|r| r.repair_iterations_used).sum(), consistent),
        first_attempt_rate_among_converged: div(
            converged.iter().filter(|r| r.repair_iterations_used == 0).count(),
            consistent,
        ),
        consistency_rate: div(consistent, consistent + inconsistent),
        total: results.len(),
        consistent,
        inconsistent,
        provider_errors: count(PipelineStatus::ProviderError),
        parse_failures: count(PipelineStatus::ParseFailed),
        extraction_failures: count(PipelineStatus::ExtractionFailed),
        checker_errors: count(PipelineStatus::CheckerError),
    })
}
