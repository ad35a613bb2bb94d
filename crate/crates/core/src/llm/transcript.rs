use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{prompt_digest, LlmResponse};
use crate::error::{Error, Result};
use crate::prompt::PromptPayload;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub prompt_digest: String,
    pub response_text: String,
}

/// Line-delimited prompt-digest → response log.
#[derive(Debug)]
pub struct Transcript {
    path: PathBuf,
    entries: HashMap<String, String>,
    order: Vec<String>,
}

impl Transcript {
    /// Loads `path`; a missing file is an empty transcript.
    pub fn load(path: &Path) -> Result<Self> {
        let mut t = Transcript {
            path: path.to_path_buf(),
            entries: HashMap::new(),
            order: Vec::new(),
        };
        let text = match fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(t),
            Err(e) => return Err(Error::io(format!("reading {}", path.display()), e)),
        };
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranscriptEntry = serde_json::from_str(line).map_err(|e| Error::Format {
                path: path.to_path_buf(),
                line: i + 1,
                column: e.column(),
                message: e.to_string(),
            })?;
            t.insert(entry)?;
        }
        Ok(t)
    }

    fn insert(&mut self, entry: TranscriptEntry) -> Result<bool> {
        match self.entries.get(&entry.prompt_digest) {
            Some(existing) if *existing == entry.response_text => Ok(false),
            Some(_) => Err(Error::Conflict(format!(
                "{}: digest {} already recorded with a different response",
                self.path.display(),
                entry.prompt_digest
            ))),
            None => {
                self.order.push(entry.prompt_digest.clone());
                self.entries.insert(entry.prompt_digest, entry.response_text);
                Ok(true)
            }
        }
    }

    pub fn get(&self, digest: &str) -> Option<&str> {
        self.entries.get(digest).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn digests(&self) -> &[String] {
        &self.order
    }

    /// Appends an entry unless the identical pair is already present.
    /// Returns whether anything was written.
    pub fn record(&mut self, digest: &str, response_text: &str) -> Result<bool> {
        let entry = TranscriptEntry {
            prompt_digest: digest.to_string(),
            response_text: response_text.to_string(),
        };
        if !self.insert(entry.clone())? {
            return Ok(false);
        }
        if let Some(parent) = self.path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
        }
        let mut line = serde_json::to_string(&entry).expect("entry serializes");
        line.push('\n');
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .and_then(|mut f| f.write_all(line.as_bytes()).and_then(|_| f.sync_data()))
            .map_err(|e| Error::io(format!("appending to {}", self.path.display()), e))?;
        Ok(true)
    }
}

/// Appends the exchange to the transcript at `path`, keyed by the digest of
/// the prompt body. Recording the same pair twice is a no-op.
pub fn record_transcript(prompt: &PromptPayload, response: &LlmResponse, path: &Path) -> Result<()> {
    let mut t = Transcript::load(path)?;
    t.record(&prompt_digest(&prompt.body), &response.raw_text)?;
    Ok(())
}
