//! Run the annotate loop offline: record a scripted model into a
//! transcript, then rerun the same snippet from the transcript alone.
//! Needs mypy on PATH.

use std::collections::BTreeMap;
use std::sync::Arc;

use typeloop::checker::{Mypy, MypyConfig};
use typeloop::corpus::SourceSnippet;
use typeloop::llm::{LlmGateway, RecordingTransport, ReplayTransport, ScriptedTransport, Transport};
use typeloop::pipeline::{Annotator, LoopConfig};
use typeloop::prompt::PromptSet;

fn annotate(transport: Box<dyn Transport>, checker: Arc<Mypy>, snippet: &SourceSnippet) {
    let config = LoopConfig::default();
    let gateway = LlmGateway::new(transport, &config.llm);
    let result = Annotator::new(gateway, checker, PromptSet::builtin(), config).annotate_snippet(snippet);
    println!("{:?} after {} repair(s)", result.status, result.repair_iterations_used);
    for it in &result.history {
        println!("  #{} {:?}: {} error(s)", it.index, it.prompt_kind, it.check.errors().count());
    }
    println!("{}", result.final_code);
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let snippet = SourceSnippet::new("scale.py", "scale.py", "def scale(v, k):\n    return [x * k for x in v]\n");
    let replies = vec![
        "```python\ndef scale(v: list[float], k: float) -> float:\n    return [x * k for x in v]\n```".to_string(),
        "Fixed:\n```python\ndef scale(v: list[float], k: float) -> list[float]:\n    return [x * k for x in v]\n```".to_string(),
    ];
    let scripted = ScriptedTransport::new(BTreeMap::from([(snippet.id.clone(), replies)]));

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("transcript.jsonl");
    let checker = Arc::new(Mypy::new(MypyConfig::default())?);

    println!("-- recording");
    annotate(Box::new(RecordingTransport::new(Box::new(scripted), &path)?), checker.clone(), &snippet);
    println!("-- replaying");
    annotate(Box::new(ReplayTransport::load(&path)?), checker, &snippet);
    Ok(())
}
