use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde_json::{json, Value};

use super::{prompt_digest, LlmConfig, TokenUsage, Transcript};
use crate::error::{Error, Result};
use crate::prompt::PromptPayload;

/// Raw model output for one prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub usage: Option<TokenUsage>,
}

#[derive(Debug)]
pub enum TransportError {
    /// Worth another attempt; `retry_after` is the server's hint, if any.
    Retryable {
        message: String,
        retry_after: Option<Duration>,
    },
    Fatal(Error),
}

impl From<Error> for TransportError {
    fn from(e: Error) -> Self {
        TransportError::Fatal(e)
    }
}

pub trait Transport: Send + Sync {
    fn send(&self, prompt: &PromptPayload, config: &LlmConfig) -> Result<Completion, TransportError>;
    fn name(&self) -> &'static str;
    /// Live transports are subject to rate limiting.
    fn is_live(&self) -> bool {
        false
    }
}

/// OpenAI-compatible chat-completions endpoint.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(config: &LlmConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.request_timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        HttpTransport { agent }
    }
}

/// Request body: the prompt is sent as a single user message.
pub fn chat_request(prompt: &PromptPayload, config: &LlmConfig) -> Value {
    let mut body = json!({
        "model": config.model_id,
        "temperature": config.temperature,
        "messages": [{"role": "user", "content": prompt.body}],
    });
    if let Some(n) = config.max_output_tokens {
        body["max_tokens"] = json!(n);
    }
    body
}

fn parse_chat_response(text: &str) -> Result<Completion> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Provider(format!("malformed response body: {e}")))?;
    let content = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Provider("response has no choices[0].message.content".into()))?;
    let usage = v.get("usage").and_then(|u| {
        Some(TokenUsage {
            prompt_tokens: u.get("prompt_tokens")?.as_u64()?,
            completion_tokens: u.get("completion_tokens")?.as_u64()?,
        })
    });
    Ok(Completion {
        text: content.to_string(),
        usage,
    })
}

fn retryable_status(status: u16) -> bool {
    matches!(status, 408 | 409 | 429) || (500..600).contains(&status)
}

impl Transport for HttpTransport {
    fn send(&self, prompt: &PromptPayload, config: &LlmConfig) -> Result<Completion, TransportError> {
        let body = chat_request(prompt, config).to_string();
        let mut req = self.agent.post(&config.endpoint_url).header("Content-Type", "application/json");
        if let Ok(key) = std::env::var(&config.api_key_env) {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = match req.send(body) {
            Ok(r) => r,
            Err(e) => {
                let message = format!("request to {} failed: {e}", config.endpoint_url);
                return Err(match e {
                    ureq::Error::Timeout(_)
                    | ureq::Error::Io(_)
                    | ureq::Error::ConnectionFailed
                    | ureq::Error::HostNotFound
                    | ureq::Error::Protocol(_)
                    | ureq::Error::BodyStalled => TransportError::Retryable {
                        message,
                        retry_after: None,
                    },
                    _ => TransportError::Fatal(Error::Provider(message)),
                });
            }
        };
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<f64>().ok())
            .and_then(|s| Duration::try_from_secs_f64(s).ok());
        let text = resp.body_mut().read_to_string().map_err(|e| TransportError::Retryable {
            message: format!("reading response body: {e}"),
            retry_after: None,
        })?;
        if (200..300).contains(&status) {
            return Ok(parse_chat_response(&text)?);
        }
        let snippet: String = text.chars().take(300).collect();
        let message = format!("HTTP {status}: {snippet}");
        if retryable_status(status) {
            Err(TransportError::Retryable { message, retry_after })
        } else {
            Err(TransportError::Fatal(Error::Provider(message)))
        }
    }

    fn name(&self) -> &'static str {
        "http"
    }

    fn is_live(&self) -> bool {
        true
    }
}

/// Serves responses from a transcript; unknown prompts are errors.
#[derive(Debug)]
pub struct ReplayTransport {
    transcript: Transcript,
}

impl ReplayTransport {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::Config(format!("transcript {} does not exist", path.display())));
        }
        Ok(ReplayTransport {
            transcript: Transcript::load(path)?,
        })
    }

    pub fn from_transcript(transcript: Transcript) -> Self {
        ReplayTransport { transcript }
    }
}

impl Transport for ReplayTransport {
    fn send(&self, prompt: &PromptPayload, _config: &LlmConfig) -> Result<Completion, TransportError> {
        let digest = prompt_digest(&prompt.body);
        match self.transcript.get(&digest) {
            Some(text) => Ok(Completion {
                text: text.to_string(),
                usage: None,
            }),
            None => Err(TransportError::Fatal(Error::ReplayMiss { digest })),
        }
    }

    fn name(&self) -> &'static str {
        "replay"
    }
}

/// Forwards to an inner transport and appends each exchange to a transcript.
pub struct RecordingTransport {
    inner: Box<dyn Transport>,
    transcript: Mutex<Transcript>,
}

impl RecordingTransport {
    pub fn new(inner: Box<dyn Transport>, path: &Path) -> Result<Self> {
        Ok(RecordingTransport {
            inner,
            transcript: Mutex::new(Transcript::load(path)?),
        })
    }
}

impl Transport for RecordingTransport {
    fn send(&self, prompt: &PromptPayload, config: &LlmConfig) -> Result<Completion, TransportError> {
        let completion = self.inner.send(prompt, config)?;
        self.transcript
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .record(&prompt_digest(&prompt.body), &completion.text)?;
        Ok(completion)
    }

    fn name(&self) -> &'static str {
        "record"
    }

    fn is_live(&self) -> bool {
        self.inner.is_live()
    }
}

/// Canned replies per snippet, indexed by loop iteration. Iterations past
/// the end reuse the last reply.
#[derive(Debug, Clone, Default)]
pub struct ScriptedTransport {
    script: BTreeMap<String, Vec<String>>,
}

impl ScriptedTransport {
    pub fn new(script: BTreeMap<String, Vec<String>>) -> Self {
        ScriptedTransport { script }
    }

    /// Reads a JSON object mapping snippet id to a list of replies.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let script = serde_json::from_str(&text).map_err(|e| Error::json(path, &e))?;
        Ok(ScriptedTransport { script })
    }
}

impl Transport for ScriptedTransport {
    fn send(&self, prompt: &PromptPayload, _config: &LlmConfig) -> Result<Completion, TransportError> {
        let replies = self
            .script
            .get(&prompt.snippet_id)
            .filter(|r| !r.is_empty())
            .ok_or_else(|| Error::Provider(format!("no scripted reply for {}", prompt.snippet_id)))?;
        let text = replies[prompt.iteration.min(replies.len() - 1)].clone();
        Ok(Completion { text, usage: None })
    }

    fn name(&self) -> &'static str {
        "scripted"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::PromptKind;

    fn payload(id: &str, iteration: usize) -> PromptPayload {
        PromptPayload {
            kind: PromptKind::Initial,
            body: format!("{id}:{iteration}"),
            snippet_id: id.into(),
            iteration,
        }
    }

    #[test]
    fn request_body_shape() {
        let mut cfg = LlmConfig::default();
        let body = chat_request(&payload("a", 0), &cfg);
        assert_eq!(body["messages"].as_array().unwrap().len(), 1);
        assert_eq!(body["messages"][0]["role"], "user");
        assert_eq!(body["temperature"], 0.7);
        assert!(body.get("max_tokens").is_none());
        cfg.max_output_tokens = Some(512);
        assert_eq!(chat_request(&payload("a", 0), &cfg)["max_tokens"], 512);
    }

    #[test]
    fn parses_chat_response() {
        let c = parse_chat_response(
            r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}],"usage":{"prompt_tokens":3,"completion_tokens":1}}"#,
        )
        .unwrap();
        assert_eq!(c.text, "hi");
        assert_eq!(c.usage.unwrap().completion_tokens, 1);
        assert!(parse_chat_response("{}").is_err());
    }

    #[test]
    fn status_classes() {
        for s in [408, 409, 429, 500, 503] {
            assert!(retryable_status(s), "{s}");
        }
        for s in [400, 401, 403, 404, 422] {
            assert!(!retryable_status(s), "{s}");
        }
    }

    #[test]
    fn scripted_repeats_last_reply() {
        let t = ScriptedTransport::new(BTreeMap::from([("a".to_string(), vec!["one".into(), "two".into()])]));
        let cfg = LlmConfig::default();
        assert_eq!(t.send(&payload("a", 0), &cfg).unwrap().text, "one");
        assert_eq!(t.send(&payload("a", 5), &cfg).unwrap().text, "two");
        assert!(t.send(&payload("b", 0), &cfg).is_err());
    }

    #[test]
    fn record_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let inner = ScriptedTransport::new(BTreeMap::from([("a".to_string(), vec!["r0".into(), "r1".into()])]));
        let cfg = LlmConfig::default();
        let rec = RecordingTransport::new(Box::new(inner), &path).unwrap();
        rec.send(&payload("a", 0), &cfg).unwrap();
        rec.send(&payload("a", 1), &cfg).unwrap();
        let replay = ReplayTransport::load(&path).unwrap();
        assert_eq!(replay.send(&payload("a", 1), &cfg).unwrap().text, "r1");
        match replay.send(&payload("a", 2), &cfg) {
            Err(TransportError::Fatal(Error::ReplayMiss { digest })) => assert_eq!(digest, prompt_digest("a:2")),
            other => panic!("{other:?}"),
        }
    }
}
