//! Labeled code-mixed sentence corpora: loading, cleaning, label filtering,
//! resplitting and summary statistics.

mod clean;
mod io;
mod split;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clean::{clean_text, preprocess, Cleaned, PreprocessOptions};
pub use io::{load_dataset, read_delimited_rows, rows_into_records, write_dataset, DatasetFormat, LoadOptions, RawRow};
pub use split::{filter_labels, resplit, stats, CorpusStats, DatasetSplit, FilterReport, RawLabeled};

/// Meta key holding the label exactly as it appeared in the source file.
pub const META_RAW_LABEL: &str = "raw_label";
/// Meta key holding `<file>:<line>` for imported rows.
pub const META_SOURCE_LINE: &str = "source_line";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    MalformedRow { path: PathBuf, line: usize, reason: String },
    #[error("duplicate id {id:?} in {path}")]
    DuplicateId { path: PathBuf, id: String },
    #[error("requested {requested} records but only {available} are available")]
    InsufficientData { requested: usize, available: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("the allowed label set is empty")]
    EmptyAllowedSet,
}

/// The three sentiment classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
        }
    }

    /// Lowercase + trim, then exact match against the class names.
    pub fn from_raw(raw: &str) -> Option<Self> {
        normalize_label(raw).parse().ok()
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sentiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(Sentiment::Positive),
            "negative" => Ok(Sentiment::Negative),
            "neutral" => Ok(Sentiment::Neutral),
            other => Err(format!("unknown sentiment label {other:?}")),
        }
    }
}

pub fn normalize_label(raw: &str) -> String {
    raw.trim().to_lowercase()
}

/// Language pair of a code-mixed record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum LangPair {
    EsEn,
    MlEn,
    Other(String),
}

impl LangPair {
    pub fn tag(&self) -> &str {
        match self {
            LangPair::EsEn => "es-en",
            LangPair::MlEn => "ml-en",
            LangPair::Other(tag) => tag,
        }
    }

    /// Human-readable name used in prompts.
    pub fn display_name(&self) -> String {
        match self {
            LangPair::EsEn => "Spanish-English".to_string(),
            LangPair::MlEn => "Malayalam-English".to_string(),
            LangPair::Other(tag) => tag.clone(),
        }
    }

    /// Source and target language codes (`es-en` -> `("es", "en")`).
    pub fn languages(&self) -> (String, String) {
        match self.tag().split_once('-') {
            Some((a, b)) => (a.to_string(), b.to_string()),
            None => (self.tag().to_string(), String::new()),
        }
    }
}

impl From<String> for LangPair {
    fn from(s: String) -> Self {
        match s.as_str() {
            "es-en" => LangPair::EsEn,
            "ml-en" => LangPair::MlEn,
            _ => LangPair::Other(s),
        }
    }
}

impl From<LangPair> for String {
    fn from(l: LangPair) -> Self {
        l.tag().to_string()
    }
}

impl FromStr for LangPair {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(LangPair::from(s.to_string()))
    }
}

impl fmt::Display for LangPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Where a record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Natural,
    SyntheticLlm,
    SyntheticMt,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Natural => "natural",
            Provenance::SyntheticLlm => "synthetic-llm",
            Provenance::SyntheticMt => "synthetic-mt",
        }
    }

    pub fn is_synthetic(self) -> bool {
        !matches!(self, Provenance::Natural)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One labeled sentence. Field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceRecord {
    pub id: String,
    pub text: String,
    pub label: Sentiment,
    pub lang_pair: LangPair,
    pub provenance: Provenance,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl SentenceRecord {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        label: Sentiment,
        lang_pair: LangPair,
        provenance: Provenance,
    ) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label,
            lang_pair,
            provenance,
            meta: BTreeMap::new(),
        }
    }

    pub fn natural(id: impl Into<String>, text: impl Into<String>, label: Sentiment) -> Self {
        Self::new(id, text, label, LangPair::EsEn, Provenance::Natural)
    }

    /// Number of whitespace-separated tokens.
    pub fn word_count(&self) -> usize {
        self.text.split_whitespace().count()
    }
}
