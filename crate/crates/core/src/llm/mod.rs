//! Completion gateway over live HTTP and recorded transcripts.

mod limit;
mod transcript;
mod transport;

use std::path::PathBuf;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use limit::RateLimiter;
pub use transcript::{record_transcript, Transcript, TranscriptEntry};
pub use transport::{Completion, HttpTransport, RecordingTransport, ReplayTransport, ScriptedTransport, Transport, TransportError};

use crate::error::{Error, Result};
use crate::prompt::PromptPayload;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportMode {
    #[default]
    Live,
    Replay,
    /// Live calls, with every exchange appended to the transcript.
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub model_id: String,
    pub temperature: f64,
    /// Omitted from requests when unset.
    pub max_output_tokens: Option<u32>,
    pub endpoint_url: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    #[serde(with = "crate::config::secs")]
    pub request_timeout: Duration,
    pub max_retries: u32,
    #[serde(with = "crate::config::secs")]
    pub retry_base_delay: Duration,
    pub max_in_flight: usize,
    pub requests_per_minute: Option<u32>,
    pub transport: TransportMode,
    pub transcript: Option<PathBuf>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            model_id: "gpt-4o-mini".into(),
            temperature: 0.7,
            max_output_tokens: None,
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            request_timeout: Duration::from_secs(120),
            max_retries: 3,
            retry_base_delay: Duration::from_secs(1),
            max_in_flight: 4,
            requests_per_minute: None,
            transport: TransportMode::Live,
            transcript: None,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::Config(format!("temperature {} outside [0, 2]", self.temperature)));
        }
        if self.max_output_tokens == Some(0) {
            return Err(Error::Config("max_output_tokens must be at least 1".into()));
        }
        if self.max_in_flight == 0 {
            return Err(Error::Config("max_in_flight must be at least 1".into()));
        }
        if self.requests_per_minute == Some(0) {
            return Err(Error::Config("requests_per_minute must be at least 1".into()));
        }
        if self.transport != TransportMode::Live && self.transcript.is_none() {
            return Err(Error::Config(format!("{:?} transport needs a transcript path", self.transport)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub raw_text: String,
    pub extracted_code: String,
    /// Digest of the prompt body.
    pub prompt_id: String,
    pub latency: Duration,
    pub token_usage: Option<TokenUsage>,
}

/// Hex SHA-256 of a prompt body; the replay key.
pub fn prompt_digest(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

pub struct LlmGateway {
    transport: Box<dyn Transport>,
    limiter: RateLimiter,
}

impl std::fmt::Debug for LlmGateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmGateway").field("transport", &self.transport.name()).finish()
    }
}

impl LlmGateway {
    pub fn new(transport: Box<dyn Transport>, config: &LlmConfig) -> Self {
        LlmGateway {
            transport,
            limiter: RateLimiter::new(config.max_in_flight, config.requests_per_minute),
        }
    }

    /// Builds the transport named by `config.transport`.
    pub fn from_config(config: &LlmConfig) -> Result<Self> {
        config.validate()?;
        let transport: Box<dyn Transport> = match config.transport {
            TransportMode::Live => Box::new(HttpTransport::new(config)),
            TransportMode::Replay => Box::new(ReplayTransport::load(config.transcript.as_ref().expect("validated"))?),
            TransportMode::Record => Box::new(RecordingTransport::new(
                Box::new(HttpTransport::new(config)),
                config.transcript.as_ref().expect("validated"),
            )?),
        };
        Ok(Self::new(transport, config))
    }

    pub fn transport_name(&self) -> &'static str {
        self.transport.name()
    }

    /// Sends one prompt, retrying transient failures with exponential
    /// backoff. Non-retryable failures surface immediately.
    pub fn complete(&self, prompt: &PromptPayload, config: &LlmConfig) -> Result<LlmResponse> {
        let start = Instant::now();
        let mut attempt = 0;
        let completion = loop {
            let outcome = if self.transport.is_live() {
                let _permit = self.limiter.acquire();
                self.transport.send(prompt, config)
            } else {
                self.transport.send(prompt, config)
            };
            match outcome {
                Ok(c) => break c,
                Err(TransportError::Fatal(e)) => return Err(e),
                Err(TransportError::Retryable { message, retry_after }) => {
                    if attempt >= config.max_retries {
                        return Err(Error::Provider(format!(
                            "giving up after {} attempts: {message}",
                            attempt + 1
                        )));
                    }
                    let backoff = config.retry_base_delay.saturating_mul(1 << attempt.min(16));
                    let delay = retry_after.map_or(backoff, |r| r.max(backoff));
                    tracing::warn!(attempt, ?delay, %message, "retrying completion");
                    thread::sleep(delay);
                    attempt += 1;
                }
            }
        };
        Ok(LlmResponse {
            extracted_code: extract_code(&completion.text),
            raw_text: completion.text,
            prompt_id: prompt_digest(&prompt.body),
            latency: start.elapsed(),
            token_usage: completion.usage,
        })
    }
}

/// Pulls code out of a model reply.
///
/// With fenced blocks present, returns their contents joined by newlines
/// (fences, language tags, and surrounding prose dropped; an unterminated
/// final fence runs to the end). Otherwise returns the reply without its
/// leading and trailing blank lines.
pub fn extract_code(raw_text: &str) -> String {
    let mut blocks: Vec<Vec<&str>> = Vec::new();
    let mut open: Option<Vec<&str>> = None;
    for line in raw_text.lines() {
        let fence = line.trim_start().starts_with("```");
        match (&mut open, fence) {
            (None, true) => open = Some(Vec::new()),
            (None, false) => {}
            (Some(_), true) => blocks.push(open.take().expect("open block")),
            (Some(block), false) => block.push(line),
        }
    }
    if let Some(block) = open {
        blocks.push(block);
    }
    if blocks.is_empty() {
        return trim_blank_lines(raw_text);
    }
    let joined = blocks
        .iter()
        .map(|b| trim_blank_lines(&b.join("\n")))
        .filter(|b| !b.is_empty())
        .collect::<Vec<_>>()
        .join("\n");
    trim_blank_lines(&joined)
}

fn trim_blank_lines(text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines.iter().position(|l| !l.trim().is_empty());
    let Some(start) = start else { return String::new() };
    let end = lines.iter().rposition(|l| !l.trim().is_empty()).expect("non-blank exists");
    lines[start..=end].join("\n")
}
