//! Initial and repair prompt assembly.
//!
//! Templates are plain text with `{name}` placeholders. Substitution is a
//! single pass over the template, so braces inside spliced code are never
//! reinterpreted. A prompt directory may override any of the files below;
//! missing files fall back to the bundled copies.
//!
//! | file                          | role                                   |
//! |-------------------------------|----------------------------------------|
//! | `initial.txt`                 | initial template                       |
//! | `repair.txt`                  | repair template                        |
//! | `examples/initial_input.py`   | one-shot input for the initial prompt  |
//! | `examples/initial_output.py`  | its annotated output                   |
//! | `examples/repair_input.py`    | one-shot failing code for repair       |
//! | `examples/repair_errors.txt`  | checker output for that code           |
//! | `examples/repair_output.py`   | corrected code                         |

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::SourceSnippet;
use crate::cst::{parse_to_cst, CstDump, DEFAULT_CST_BYTE_BUDGET};
use crate::error::{Error, Result};
use crate::python;

const INITIAL_TEMPLATE: &str = include_str!("../templates/initial.txt");
const REPAIR_TEMPLATE: &str = include_str!("../templates/repair.txt");
const INITIAL_INPUT: &str = include_str!("../templates/examples/initial_input.py");
const INITIAL_OUTPUT: &str = include_str!("../templates/examples/initial_output.py");
const REPAIR_INPUT: &str = include_str!("../templates/examples/repair_input.py");
const REPAIR_ERRORS: &str = include_str!("../templates/examples/repair_errors.txt");
const REPAIR_OUTPUT: &str = include_str!("../templates/examples/repair_output.py");

const INITIAL_SLOTS: &[&str] = &["example_code", "example_cst", "example_output", "code", "cst"];
const REPAIR_SLOTS: &[&str] = &["example_code", "example_error", "example_output", "code", "errors"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromptKind {
    Initial,
    Repair,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPayload {
    pub kind: PromptKind,
    pub body: String,
    pub snippet_id: String,
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotExample {
    pub example_code: String,
    pub example_cst: String,
    /// Empty for initial-prompt examples.
    pub example_error: String,
    pub example_output: String,
}

impl FewShotExample {
    /// Builds an initial-prompt example; the CST is rendered from the code.
    pub fn initial(code: &str, output: &str) -> Result<Self> {
        let snippet = SourceSnippet::new("<example>", "<example>", code);
        let cst = parse_to_cst(&snippet, DEFAULT_CST_BYTE_BUDGET)?;
        python::parse(output)?;
        Ok(FewShotExample {
            example_code: code.to_string(),
            example_cst: cst.text,
            example_error: String::new(),
            example_output: output.to_string(),
        })
    }

    pub fn repair(code: &str, error: &str, output: &str) -> Result<Self> {
        python::parse(output)?;
        Ok(FewShotExample {
            example_code: code.to_string(),
            example_cst: String::new(),
            example_error: error.to_string(),
            example_output: output.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    kind: PromptKind,
    segments: Vec<Segment>,
}

impl Template {
    /// Parses template text, requiring exactly the placeholders of `kind`.
    pub fn parse(kind: PromptKind, text: &str) -> Result<Self> {
        let text = text.trim_end_matches(['\n', '\r']);
        let mut segments = Vec::new();
        let mut rest = text;
        while let Some(open) = rest.find('{') {
            let Some(len) = rest[open + 1..].find('}') else { break };
            let name = &rest[open + 1..open + 1 + len];
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_lowercase() || c == '_') {
                return Err(Error::Config(format!("{kind:?} template: bad placeholder {{{name}}}")));
            }
            segments.push(Segment::Text(rest[..open].to_string()));
            segments.push(Segment::Slot(name.to_string()));
            rest = &rest[open + len + 2..];
        }
        segments.push(Segment::Text(rest.to_string()));

        let expected = match kind {
            PromptKind::Initial => INITIAL_SLOTS,
            PromptKind::Repair => REPAIR_SLOTS,
        };
        for want in expected {
            if !segments.iter().any(|s| matches!(s, Segment::Slot(n) if n == want)) {
                return Err(Error::Config(format!("{kind:?} template lacks {{{want}}}")));
            }
        }
        for seg in &segments {
            if let Segment::Slot(n) = seg {
                if !expected.contains(&n.as_str()) {
                    return Err(Error::Config(format!("{kind:?} template has unknown placeholder {{{n}}}")));
                }
            }
        }
        Ok(Template { kind, segments })
    }

    pub fn kind(&self) -> PromptKind {
        self.kind
    }

    /// The fixed text pieces between placeholders, in order.
    pub fn literal_parts(&self) -> Vec<&str> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Text(t) => Some(t.as_str()),
                Segment::Slot(_) => None,
            })
            .collect()
    }

    fn render(&self, values: &[(&str, &str)]) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Slot(name) => {
                    let value = values
                        .iter()
                        .find(|(k, _)| k == name)
                        .map(|(_, v)| *v)
                        .expect("placeholder set validated at parse time");
                    out.push_str(value.trim_end_matches(['\n', '\r']));
                }
            }
        }
        out
    }
}

pub fn build_initial_prompt(
    template: &Template,
    snippet: &SourceSnippet,
    cst: &CstDump,
    example: &FewShotExample,
) -> Result<PromptPayload> {
    if template.kind != PromptKind::Initial {
        return Err(Error::Usage("initial prompt needs the initial template".into()));
    }
    if cst.snippet_id != snippet.id {
        return Err(Error::Usage(format!(
            "CST belongs to {:?}, not {:?}",
            cst.snippet_id, snippet.id
        )));
    }
    if example.example_code.trim().is_empty()
        || example.example_cst.trim().is_empty()
        || example.example_output.trim().is_empty()
    {
        return Err(Error::Usage("initial prompt requires a complete one-shot example".into()));
    }
    let body = template.render(&[
        ("example_code", &example.example_code),
        ("example_cst", &example.example_cst),
        ("example_output", &example.example_output),
        ("code", &snippet.code),
        ("cst", &cst.text),
    ]);
    Ok(PromptPayload {
        kind: PromptKind::Initial,
        body,
        snippet_id: snippet.id.clone(),
        iteration: 0,
    })
}

pub fn build_repair_prompt(
    template: &Template,
    snippet_id: &str,
    annotated_code: &str,
    checker_output: &str,
    example: &FewShotExample,
    iteration: usize,
) -> Result<PromptPayload> {
    if template.kind != PromptKind::Repair {
        return Err(Error::Usage("repair prompt needs the repair template".into()));
    }
    if iteration == 0 {
        return Err(Error::Usage("repair iterations start at 1".into()));
    }
    if checker_output.trim().is_empty() {
        return Err(Error::Usage("repair prompt requires checker errors".into()));
    }
    if example.example_code.trim().is_empty()
        || example.example_error.trim().is_empty()
        || example.example_output.trim().is_empty()
    {
        return Err(Error::Usage("repair prompt requires a complete one-shot example".into()));
    }
    let body = template.render(&[
        ("example_code", &example.example_code),
        ("example_error", &example.example_error),
        ("example_output", &example.example_output),
        ("code", annotated_code),
        ("errors", checker_output),
    ]);
    Ok(PromptPayload {
        kind: PromptKind::Repair,
        body,
        snippet_id: snippet_id.to_string(),
        iteration,
    })
}

/// Both templates and both one-shot examples.
#[derive(Debug, Clone)]
pub struct PromptSet {
    pub initial: Template,
    pub repair: Template,
    pub initial_example: FewShotExample,
    pub repair_example: FewShotExample,
}

impl PromptSet {
    pub fn builtin() -> Self {
        Self::from_texts(&BUILTIN_FILES.map(|(_, t)| t.to_string())).expect("bundled prompts are valid")
    }

    /// Loads from `dir`, using the bundled copy for any absent file.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut texts = BUILTIN_FILES.map(|(_, t)| t.to_string());
        for (i, (name, _)) in BUILTIN_FILES.iter().enumerate() {
            let path = dir.join(name);
            if path.exists() {
                texts[i] = fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            }
        }
        Self::from_texts(&texts)
    }

    fn from_texts(t: &[String; 7]) -> Result<Self> {
        Ok(PromptSet {
            initial: Template::parse(PromptKind::Initial, &t[0])?,
            repair: Template::parse(PromptKind::Repair, &t[1])?,
            initial_example: FewShotExample::initial(&t[2], &t[3])?,
            repair_example: FewShotExample::repair(&t[4], &t[5], &t[6])?,
        })
    }

    pub fn initial_prompt(&self, snippet: &SourceSnippet, cst: &CstDump) -> Result<PromptPayload> {
        build_initial_prompt(&self.initial, snippet, cst, &self.initial_example)
    }

    pub fn repair_prompt(&self, snippet_id: &str, code: &str, errors: &str, iteration: usize) -> Result<PromptPayload> {
        build_repair_prompt(&self.repair, snippet_id, code, errors, &self.repair_example, iteration)
    }
}

const BUILTIN_FILES: [(&str, &str); 7] = [
    ("initial.txt", INITIAL_TEMPLATE),
    ("repair.txt", REPAIR_TEMPLATE),
    ("examples/initial_input.py", INITIAL_INPUT),
    ("examples/initial_output.py", INITIAL_OUTPUT),
    ("examples/repair_input.py", REPAIR_INPUT),
    ("examples/repair_errors.txt", REPAIR_ERRORS),
    ("examples/repair_output.py", REPAIR_OUTPUT),
];
