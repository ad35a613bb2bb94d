//! Run configuration (TOML).
//!
//! ```toml
//! [loop]
//! max_repair_iterations = 10
//! filter_nontype_errors = false
//! cst_byte_budget = 32768
//! parallelism = 0            # 0 = one worker per processor
//!
//! [llm]
//! model_id = "gpt-4o-mini"
//! endpoint_url = "https://api.openai.com/v1/chat/completions"
//! api_key_env = "OPENAI_API_KEY"
//! temperature = 0.7
//! # max_output_tokens = 4096  # omitted = no limit
//! request_timeout = 120.0    # seconds
//! max_retries = 3
//! retry_base_delay = 1.0
//! max_in_flight = 4
//! # requests_per_minute = 60
//! transport = "live"         # live | replay | record
//! # transcript = "transcripts/run.jsonl"
//!
//! [checker]
//! executable = "mypy"
//! timeout = 60.0
//! max_concurrent = 4
//!
//! [metrics]
//! equate_optional = false
//!
//! [prompts]
//! # dir = "prompts"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::checker::MypyConfig;
use crate::cst::DEFAULT_CST_BYTE_BUDGET;
use crate::error::{Error, Result};
use crate::eval::MetricsOptions;
use crate::llm::LlmConfig;
use crate::pipeline::LoopConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopSettings {
    pub max_repair_iterations: usize,
    pub filter_nontype_errors: bool,
    pub cst_byte_budget: usize,
    pub parallelism: usize,
}

impl Default for LoopSettings {
    fn default() -> Self {
        LoopSettings {
            max_repair_iterations: 10,
            filter_nontype_errors: false,
            cst_byte_budget: DEFAULT_CST_BYTE_BUDGET,
            parallelism: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptSettings {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "loop")]
    pub loop_settings: LoopSettings,
    pub llm: LlmConfig,
    pub checker: MypyConfig,
    pub metrics: MetricsOptions,
    pub prompts: PromptSettings,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.llm.validate()?;
        if self.checker.max_concurrent == 0 {
            return Err(Error::Config("checker.max_concurrent must be at least 1".into()));
        }
        Ok(())
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            max_repair_iterations: self.loop_settings.max_repair_iterations,
            llm: self.llm.clone(),
            filter_nontype_errors: self.loop_settings.filter_nontype_errors,
            cst_byte_budget: self.loop_settings.cst_byte_budget,
            parallelism: self.loop_settings.parallelism,
        }
    }
}

/// Serde helper: durations as fractional seconds.
pub(crate) mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}
