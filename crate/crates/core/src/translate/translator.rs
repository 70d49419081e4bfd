use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("translation failed: {0}")]
    Failed(String),
    #[error("cannot read dictionary {path}: {reason}")]
    Dictionary { path: String, reason: String },
    #[error("translation service error: {0}")]
    Service(String),
}

/// Any machine-translation backend.
pub trait Translator: Send + Sync {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, TranslateError>;
}

/// Word-by-word lookup table. Unknown words pass through unchanged unless
/// the translator is strict.
#[derive(Debug, Clone, Default)]
pub struct DictionaryTranslator {
    words: HashMap<String, String>,
    strict: bool,
}

impl DictionaryTranslator {
    pub fn new(words: HashMap<String, String>) -> Self {
        let words = words.into_iter().map(|(k, v)| (k.to_lowercase(), v)).collect();
        Self { words, strict: false }
    }

    /// Reads `source<TAB>target` lines; blank lines and `#` comments are skipped.
    pub fn from_tsv(path: &Path) -> Result<Self, TranslateError> {
        let err = |reason: String| TranslateError::Dictionary {
            path: path.display().to_string(),
            reason,
        };
        let raw = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut words = HashMap::new();
        for (i, line) in raw.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (src, dst) = line
                .split_once('\t')
                .ok_or_else(|| err(format!("line {} has no tab", i + 1)))?;
            words.insert(src.trim().to_string(), dst.trim().to_string());
        }
        Ok(Self::new(words))
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Translator for DictionaryTranslator {
    fn translate(&self, text: &str, _source: &str, _target: &str) -> Result<String, TranslateError> {
        let mut out = Vec::new();
        for token in text.split_whitespace() {
            let core = token.trim_matches(|c: char| !c.is_alphanumeric());
            match self.words.get(&core.to_lowercase()) {
                Some(t) if !core.is_empty() => out.push(token.replacen(core, t, 1)),
                _ if self.strict && !core.is_empty() => {
                    return Err(TranslateError::Failed(format!("no entry for {core:?}")))
                }
                _ => out.push(token.to_string()),
            }
        }
        Ok(out.join(" "))
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    text: &'a str,
    source: &'a str,
    target: &'a str,
}

#[derive(Deserialize)]
struct WireResponse {
    translation: String,
}

/// Client for a JSON translation service: POST `{text, source, target}`,
/// reply `{translation}`.
pub struct HttpTranslator {
    url: String,
    agent: ureq::Agent,
}

impl HttpTranslator {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { url: url.into(), agent }
    }
}

impl Translator for HttpTranslator {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, TranslateError> {
        let mut response = self
            .agent
            .post(&self.url)
            .send_json(WireRequest { text, source, target })
            .map_err(|e| TranslateError::Service(e.to_string()))?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(TranslateError::Service(format!("HTTP {status}")));
        }
        let wire: WireResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| TranslateError::Service(e.to_string()))?;
        Ok(wire.translation)
    }
}
