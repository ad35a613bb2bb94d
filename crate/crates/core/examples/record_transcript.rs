//! Append a prompt/response pair to a transcript, then read it back.

use std::time::Duration;

use typeloop::llm::{prompt_digest, record_transcript, LlmResponse, Transcript};
use typeloop::prompt::{PromptKind, PromptPayload};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("transcript.jsonl");

    let prompt = PromptPayload {
        kind: PromptKind::Initial,
        body: "annotate: def f(x): return x".into(),
        snippet_id: "f.py".into(),
        iteration: 0,
    };
    let response = LlmResponse {
        raw_text: "```python\ndef f(x: int) -> int: return x\n```".into(),
        extracted_code: "def f(x: int) -> int: return x".into(),
        prompt_id: prompt_digest(&prompt.body),
        latency: Duration::from_millis(420),
        token_usage: None,
    };
    record_transcript(&prompt, &response, &path)?;
    // a second identical exchange is not duplicated
    record_transcript(&prompt, &response, &path)?;

    let transcript = Transcript::load(&path)?;
    println!("{} entries in {}", transcript.len(), path.display());
    println!("{:?}", transcript.get(&prompt_digest(&prompt.body)));
    Ok(())
}
