//! Few-shot synthetic data generation.
//!
//! A generation run repeatedly samples class-balanced demonstrations from
//! the natural training data, renders them into a prompt asking for a batch
//! of new labeled code-mixed sentences, sends it to a chat-completion
//! endpoint and parses the reply until the target size is reached.

mod demos;
mod endpoint;
mod http;
mod mock;
mod parse;
mod prompt;
mod runner;
mod zero_shot;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{LangPair, SentenceRecord, Sentiment};

pub use demos::sample_demonstrations;
pub use endpoint::{
    send_with_retries, ChatEndpoint, ChatExchange, ChatMessage, ChatRequest, ChatResponse, EndpointError,
    ExchangeStatus, RetryPolicy, Role, TokenUsage,
};
pub use http::OpenAiCompatibleClient;
pub use mock::MockEndpoint;
pub use parse::{parse_generation, parse_label_reply, ParsedBatch, DELIMITER};
pub use prompt::{
    build_prompt, build_zero_shot_prompt, BuiltPrompt, TokenCounter, WhitespaceEstimate, DEFAULT_INSTRUCTION,
};
pub use runner::{run_generation, run_generation_with};
pub use zero_shot::{zero_shot_predict, ZeroShotOutcome, ZeroShotPrediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoFormat {
    /// `<text> ||| <label>`, one per line.
    #[default]
    Delimited,
}

/// Few-shot prompt recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptSpec {
    /// Instruction text; `{lang}` is replaced by the language pair name.
    pub instruction: String,
    /// Number of demonstrations per prompt.
    pub shots: usize,
    /// Sentences requested per prompt.
    pub batch_size: usize,
    pub lang_pair: LangPair,
    pub demo_format: DemoFormat,
}

impl Default for PromptSpec {
    fn default() -> Self {
        Self {
            instruction: DEFAULT_INSTRUCTION.to_string(),
            shots: 15,
            batch_size: 50,
            lang_pair: LangPair::EsEn,
            demo_format: DemoFormat::Delimited,
        }
    }
}

impl PromptSpec {
    pub fn validate(&self) -> Result<(), GenerationError> {
        if self.batch_size == 0 {
            return Err(GenerationError::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub model_id: String,
    pub temperature: f64,
    pub max_retries: u32,
    /// Maximum in-flight requests.
    pub parallelism: usize,
    pub request_timeout_secs: f64,
    pub retry_base_delay_ms: u64,
    pub retry_max_delay_ms: u64,
    /// Rejected-line fraction above which the run stops.
    pub reject_ceiling: f64,
    /// Number of most recent requests the ceiling is evaluated over.
    pub reject_window: usize,
    /// Where partial results are written when a run aborts.
    pub partial_path: Option<PathBuf>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            model_id: "gpt-4-1106-preview".to_string(),
            temperature: 0.6,
            max_retries: 5,
            parallelism: 4,
            request_timeout_secs: 120.0,
            retry_base_delay_ms: 500,
            retry_max_delay_ms: 30_000,
            reject_ceiling: 0.5,
            reject_window: 10,
            partial_path: None,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GenerationError> {
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(GenerationError::Config("temperature must be >= 0".into()));
        }
        if self.parallelism == 0 {
            return Err(GenerationError::Config("parallelism must be at least 1".into()));
        }
        if self.reject_window == 0 {
            return Err(GenerationError::Config("reject_window must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.reject_ceiling) {
            return Err(GenerationError::Config("reject_ceiling must be in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            base_delay: std::time::Duration::from_millis(self.retry_base_delay_ms),
            max_delay: std::time::Duration::from_millis(self.retry_max_delay_ms),
        }
    }
}

/// State of a batched generation run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationJob {
    pub target_size: usize,
    pub produced: usize,
    pub requests_sent: usize,
    pub rejected_lines: usize,
    /// Lines missing from replies that returned fewer than `batch_size`.
    pub shortfall_lines: usize,
    pub token_usage: TokenUsage,
    pub seed: u64,
}

impl GenerationJob {
    pub fn new(target_size: usize, seed: u64) -> Self {
        Self {
            target_size,
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("not enough {class} demonstrations: need {needed}, have {available}")]
    InsufficientDemonstrations {
        class: Sentiment,
        needed: usize,
        available: usize,
    },
    #[error("request {request_index} failed after {attempts} attempts: {reason}; {} records kept", partial.len())]
    Aborted {
        request_index: usize,
        attempts: u32,
        reason: String,
        partial: Vec<SentenceRecord>,
    },
    #[error("zero-shot request for {record_id} failed: {reason}; {} predictions kept", partial.len())]
    ZeroShotAborted {
        record_id: String,
        reason: String,
        partial: Vec<ZeroShotPrediction>,
    },
    #[error("rejected-line rate {rate:.2} over the last {window} requests exceeds the ceiling")]
    DegenerateOutput { rate: f64, window: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot persist partial results to {path}: {source}")]
    Persist {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
