use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{AnnotationRecord, NormalizeOptions, SlotKind, TypeLabel};
use crate::corpus::GroundTruthRecord;
use crate::error::{Error, Result};
use crate::pipeline::PipelineResult;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsOptions {
    /// Treat `Union[X, None]` and `Optional[X]` as the same type.
    #[serde(default)]
    pub equate_optional: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindBreakdown {
    pub exact: usize,
    pub base: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Micro-averaged over scored slots.
    pub exact_match_rate: f64,
    pub base_match_rate: f64,
    pub slots_scored: usize,
    pub slots_exact: usize,
    pub slots_base: usize,
    pub slots_missing_prediction: usize,
    pub per_kind: BTreeMap<SlotKind, KindBreakdown>,
    /// Snippets whose final code could not be read for annotations.
    pub excluded_snippets: usize,
    pub snippets_scored: usize,
    /// Mean of per-snippet rates over snippets with at least one scored slot.
    pub snippet_mean_exact: f64,
    pub snippet_mean_base: f64,
    pub equate_optional: bool,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores predictions against ground truth slot by slot.
///
/// Every truth slot with an expected type counts toward the denominator,
/// whether or not the snippet passed the checker. A truth snippet with no
/// prediction is excluded if it appears in `results` (its final code could
/// not be read) and is an accounting error otherwise.
pub fn compute_metrics(
    predictions: &BTreeMap<String, AnnotationRecord>,
    truth: &BTreeMap<String, GroundTruthRecord>,
    results: &[PipelineResult],
    opts: MetricsOptions,
) -> Result<MetricsReport> {
    if truth.is_empty() {
        return Err(Error::Usage("ground truth is empty".into()));
    }
    let ran: HashSet<&str> = results.iter().map(|r| r.snippet_id.as_str()).collect();
    let norm = NormalizeOptions {
        equate_optional: opts.equate_optional,
    };
    let relabel = |l: &TypeLabel| TypeLabel::with_options(l.raw.clone(), norm);

    let mut report = MetricsReport {
        exact_match_rate: 0.0,
        base_match_rate: 0.0,
        slots_scored: 0,
        slots_exact: 0,
        slots_base: 0,
        slots_missing_prediction: 0,
        per_kind: BTreeMap::new(),
        excluded_snippets: 0,
        snippets_scored: 0,
        snippet_mean_exact: 0.0,
        snippet_mean_base: 0.0,
        equate_optional: opts.equate_optional,
    };
    let mut missing_ids = Vec::new();
    let (mut exact_sum, mut base_sum) = (0.0, 0.0);

    for (id, record) in truth {
        let Some(pred) = predictions.get(id) else {
            if ran.contains(id.as_str()) {
                report.excluded_snippets += 1;
            } else {
                missing_ids.push(id.clone());
            }
            continue;
        };
        let (mut n, mut ex, mut ba) = (0usize, 0usize, 0usize);
        for slot in &record.slots {
            let Some(expected) = slot.label.as_ref().map(relabel) else { continue };
            let kind = report.per_kind.entry(slot.kind).or_default();
            kind.count += 1;
            n += 1;
            match pred.get(&slot.key()).and_then(|p| p.label.as_ref()).map(relabel) {
                Some(got) => {
                    if got.normalized == expected.normalized {
                        kind.exact += 1;
                        ex += 1;
                    }
                    if got.base == expected.base {
                        kind.base += 1;
                        ba += 1;
                    }
                }
                None => report.slots_missing_prediction += 1,
            }
        }
        report.slots_scored += n;
        report.slots_exact += ex;
        report.slots_base += ba;
        if n > 0 {
            report.snippets_scored += 1;
            exact_sum += ratio(ex, n);
            base_sum += ratio(ba, n);
        }
    }

    if !missing_ids.is_empty() {
        return Err(Error::Accounting(format!(
            "snippets in ground truth with neither prediction nor result: {}",
            missing_ids.join(", ")
        )));
    }

    report.exact_match_rate = ratio(report.slots_exact, report.slots_scored);
    report.base_match_rate = ratio(report.slots_base, report.slots_scored);
    if report.snippets_scored > 0 {
        report.snippet_mean_exact = exact_sum / report.snippets_scored as f64;
        report.snippet_mean_base = base_sum / report.snippets_scored as f64;
    }
    Ok(report)
}

impl MetricsReport {
    /// Two-column exact/base table with a per-kind breakdown.
    pub fn to_table(&self, model: &str) -> String {
        let mut out = String::new();
        let labels: Vec<String> = self.per_kind.iter().map(|(kind, b)| format!("  {kind} ({})", b.count)).collect();
        let width = labels.iter().map(String::len).fold(model.len().max(12), usize::max);
        let _ = writeln!(out, "{:<width$}  {:>11}  {:>15}", "Model", "Exact Match", "Base-Type Match");
        let _ = writeln!(
            out,
            "{:<width$}  {:>11.1}  {:>15.1}",
            model,
            100.0 * self.exact_match_rate,
            100.0 * self.base_match_rate
        );
        for (label, b) in labels.iter().zip(self.per_kind.values()) {
            let _ = writeln!(
                out,
                "{:<width$}  {:>11.1}  {:>15.1}",
                label,
                100.0 * ratio(b.exact, b.count),
                100.0 * ratio(b.base, b.count)
            );
        }
        let _ = writeln!(
            out,
            "slots scored: {}, missing predictions: {}, excluded snippets: {}",
            self.slots_scored, self.slots_missing_prediction, self.excluded_snippets
        );
        let _ = writeln!(
            out,
            "per-snippet mean: exact {:.1}, base {:.1} over {} snippets",
            100.0 * self.snippet_mean_exact,
            100.0 * self.snippet_mean_base,
            self.snippets_scored
        );
        let _ = write!(out, "optional/union equated: {}", self.equate_optional);
        out
    }
}
