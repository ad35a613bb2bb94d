#![allow(dead_code)]

pub mod typegen;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use typeloop::checker::{Mypy, MypyConfig, TypeChecker};
use typeloop::corpus::SourceSnippet;
use typeloop::llm::{LlmGateway, ScriptedTransport, Transport};
use typeloop::pipeline::{Annotator, LoopConfig};
use typeloop::prompt::PromptSet;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

/// A working mypy, or `None` when the executable is absent.
pub fn mypy() -> Option<Arc<Mypy>> {
    let m = Mypy::new(MypyConfig::default()).ok()?;
    m.version().ok()?;
    Some(Arc::new(m))
}

pub fn script(entries: &[(&str, &[&str])]) -> ScriptedTransport {
    let map: BTreeMap<String, Vec<String>> = entries
        .iter()
        .map(|(id, replies)| (id.to_string(), replies.iter().map(|r| format!("```python\n{r}\n```")).collect()))
        .collect();
    ScriptedTransport::new(map)
}

pub fn annotator(transport: impl Transport + 'static, checker: Arc<dyn TypeChecker>) -> Annotator {
    let config = LoopConfig::default();
    let gateway = LlmGateway::new(Box::new(transport), &config.llm);
    Annotator::new(gateway, checker, PromptSet::builtin(), config)
}

pub fn snippet(id: &str, code: &str) -> SourceSnippet {
    SourceSnippet::new(id, id, code)
}
