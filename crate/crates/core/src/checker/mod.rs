//! Static checker integration: diagnostics, failure taxonomy, and the
//! generic-placeholder scan.

mod mypy;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub use mypy::{Mypy, MypyConfig, CHECKED_FILE_NAME, MYPY_FLAGS};

use crate::error::Result;
use crate::eval::collect_slots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Note,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    AnnotationType,
    StrFormat,
    MissingReturn,
    NameUndefined,
    RelativeImport,
    Redefinition,
    Syntax,
    Other,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::AnnotationType,
        Category::StrFormat,
        Category::MissingReturn,
        Category::NameUndefined,
        Category::RelativeImport,
        Category::Redefinition,
        Category::Syntax,
        Category::Other,
    ];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: String,
    pub line: usize,
    pub severity: Severity,
    pub message: String,
    /// Bracketed error code, without brackets.
    pub code: Option<String>,
    pub category: Category,
}

impl Diagnostic {
    /// The diagnostic in the checker's own line format.
    pub fn to_line(&self) -> String {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Note => "note",
        };
        match &self.code {
            Some(c) => format!("{}:{}: {sev}: {}  [{c}]", self.file, self.line, self.message),
            None => format!("{}:{}: {sev}: {}", self.file, self.line, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub raw_output: String,
    pub exit_code: i32,
    pub duration: Duration,
    #[serde(default)]
    pub timed_out: bool,
}

impl CheckReport {
    /// Builds a report whose diagnostics are exactly what the parser reads
    /// from `raw_output`.
    pub fn from_output(raw_output: String, exit_code: i32, duration: Duration, timed_out: bool) -> Self {
        CheckReport {
            passed: exit_code == 0,
            diagnostics: parse_diagnostics(&raw_output),
            raw_output,
            exit_code,
            duration,
            timed_out,
        }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    /// Error text for a repair prompt. With `only_type_errors`, keeps just
    /// annotation-type diagnostics, falling back to the full output when
    /// nothing would remain.
    pub fn feedback(&self, only_type_errors: bool) -> String {
        let text = if only_type_errors {
            self.diagnostics
                .iter()
                .filter(|d| d.category == Category::AnnotationType)
                .map(Diagnostic::to_line)
                .collect::<Vec<_>>()
                .join("\n")
        } else {
            String::new()
        };
        if !text.is_empty() {
            return text;
        }
        if self.raw_output.trim().is_empty() {
            format!("mypy exited with status {} and printed nothing", self.exit_code)
        } else {
            self.raw_output.clone()
        }
    }
}

/// Anything that can type-check a candidate module.
pub trait TypeChecker: Send + Sync {
    fn check(&self, code: &str) -> Result<CheckReport>;

    /// Version string recorded in run headers.
    fn version(&self) -> Result<String>;
}

static DIAG_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?P<file>[^\s:][^:]*):(?P<line>\d+)(?::\d+)?: (?P<sev>error|note|warning): (?P<msg>.*)$").unwrap()
});
static CODE_SUFFIX: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?P<msg>.*?)\s+\[(?P<code>[A-Za-z0-9_-]+)\]$").unwrap());

/// Parses diagnostics and counts the lines that were skipped.
pub fn parse_diagnostics_counted(raw_output: &str) -> (Vec<Diagnostic>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    for line in raw_output.lines() {
        let line = line.trim_end();
        let Some(c) = DIAG_LINE.captures(line) else {
            if !line.trim().is_empty() {
                skipped += 1;
            }
            continue;
        };
        let msg = c["msg"].trim_end();
        let (message, code) = match CODE_SUFFIX.captures(msg) {
            Some(cc) => (cc["msg"].to_string(), Some(cc["code"].to_string())),
            None => (msg.to_string(), None),
        };
        let severity = if &c["sev"] == "note" { Severity::Note } else { Severity::Error };
        let category = classify_parts(code.as_deref(), &message);
        out.push(Diagnostic {
            file: c["file"].to_string(),
            line: c["line"].parse::<usize>().unwrap_or(1).max(1),
            severity,
            message,
            code,
            category,
        });
    }
    (out, skipped)
}

pub fn parse_diagnostics(raw_output: &str) -> Vec<Diagnostic> {
    parse_diagnostics_counted(raw_output).0
}

pub fn classify(diagnostic: &Diagnostic) -> Category {
    classify_parts(diagnostic.code.as_deref(), &diagnostic.message)
}

fn classify_parts(code: Option<&str>, message: &str) -> Category {
    match code {
        Some("str-format") => return Category::StrFormat,
        Some("return") => return Category::MissingReturn,
        Some("name-defined") => return Category::NameUndefined,
        Some("no-redef") => return Category::Redefinition,
        Some("syntax") => return Category::Syntax,
        _ => {}
    }
    if message.contains("relative import") {
        return Category::RelativeImport;
    }
    if message.starts_with("invalid syntax") {
        return Category::Syntax;
    }
    match code {
        Some("assignment" | "arg-type" | "return-value") => Category::AnnotationType,
        _ => Category::Other,
    }
}

/// Error-severity diagnostic counts per category.
pub fn category_histogram<'a>(reports: impl IntoIterator<Item = &'a CheckReport>) -> BTreeMap<Category, usize> {
    let mut hist = BTreeMap::new();
    for r in reports {
        for d in r.errors() {
            *hist.entry(d.category).or_insert(0) += 1;
        }
    }
    hist
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceholderHit {
    pub line: usize,
    pub slot: String,
    pub annotation: String,
}

/// Finds annotations that are `Any` or built only from `Any`, such as
/// `Dict[Any, Any]`.
pub fn scan_generic_placeholders(code: &str) -> Result<Vec<PlaceholderHit>> {
    Ok(collect_slots(code)?
        .into_iter()
        .filter_map(|l| {
            let label = l.slot.label.as_ref()?;
            is_any_placeholder(&label.normalized).then(|| PlaceholderHit {
                line: l.line,
                slot: l.slot.describe(),
                annotation: label.raw.clone(),
            })
        })
        .collect())
}

fn is_any_placeholder(normalized: &str) -> bool {
    if normalized == "Any" {
        return true;
    }
    let (Some(open), true) = (normalized.find('['), normalized.ends_with(']')) else {
        return false;
    };
    let args = split_top_level(&normalized[open + 1..normalized.len() - 1]);
    let mut any_seen = false;
    for a in args {
        if is_any_placeholder(a) {
            any_seen = true;
        } else if a != "..." {
            return false;
        }
    }
    any_seen
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}
