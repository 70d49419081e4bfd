//! Blinded human evaluation of natural and synthetic sentences.
//!
//! Provenance lives only in [`AnnotationItem`], which stays on the server.
//! Everything an annotator receives is built from [`ItemView`] and friends,
//! which have no field for it.

mod aggregate;
mod server;
mod session;
mod store;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Provenance, Sentiment};

pub use aggregate::{aggregate, AggregateReport, GroupStats, PairAgreement};
pub use server::{router, serve, ServerConfig};
pub use session::{build_session, Annotator, Session};
pub use store::{
    recompute_from_export, AuditEntry, CompletionSummary, ExportLine, NextItem, Progress, SessionStore, SubmitOutcome,
};

#[derive(Debug, Error)]
pub enum HumanEvalError {
    #[error("{provenance} pool has {available} records, session needs {needed}")]
    InsufficientPool {
        provenance: &'static str,
        needed: usize,
        available: usize,
    },
    #[error("a correction label is required when disagreeing")]
    CorrectionRequired,
    #[error("a correction label is only allowed when disagreeing")]
    CorrectionNotAllowed,
    #[error("{0} not found")]
    NotFound(String),
    #[error("invalid or missing token")]
    Unauthorized,
    #[error("session has no judgments")]
    EmptySession,
    #[error("session {0} already exists")]
    SessionExists(String),
    #[error("invalid session: {0}")]
    Invalid(String),
    #[error("storage error on {path}: {reason}")]
    Storage { path: String, reason: String },
}

impl HumanEvalError {
    /// Stable machine-readable code used in HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            HumanEvalError::InsufficientPool { .. } => "insufficient_pool",
            HumanEvalError::CorrectionRequired => "correction_required",
            HumanEvalError::CorrectionNotAllowed => "correction_not_allowed",
            HumanEvalError::NotFound(_) => "not_found",
            HumanEvalError::Unauthorized => "unauthorized",
            HumanEvalError::EmptySession => "empty_session",
            HumanEvalError::SessionExists(_) => "session_exists",
            HumanEvalError::Invalid(_) => "invalid",
            HumanEvalError::Storage { .. } => "storage",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Naturalness {
    Natural,
    Strange,
    Unnatural,
}

impl Naturalness {
    /// Strange and unnatural count as one bucket.
    pub fn is_natural(self) -> bool {
        self == Naturalness::Natural
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelAgreement {
    Agree,
    Disagree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OriginGuess {
    Human,
    Machine,
}

/// Server-side item record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationItem {
    pub item_id: String,
    pub source_id: String,
    pub text: String,
    pub label: Sentiment,
    pub provenance: Provenance,
    /// 1-based position in the annotation order.
    pub position: usize,
}

/// What an annotator sees of an item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemView {
    pub item_id: String,
    pub text: String,
    pub label: Sentiment,
    pub position: usize,
    pub total: usize,
}

impl From<&AnnotationItem> for ItemView {
    fn from(item: &AnnotationItem) -> Self {
        ItemView {
            item_id: item.item_id.clone(),
            text: item.text.clone(),
            label: item.label,
            position: item.position,
            total: 0,
        }
    }
}

/// A judgment as submitted by the client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgmentInput {
    pub item_id: String,
    pub naturalness: Naturalness,
    pub label_agree: LabelAgreement,
    #[serde(default)]
    pub correction: Option<Sentiment>,
    pub origin_guess: OriginGuess,
    #[serde(default)]
    pub comment: Option<String>,
}

impl JudgmentInput {
    pub fn validate(&self) -> Result<(), HumanEvalError> {
        match (self.label_agree, self.correction) {
            (LabelAgreement::Disagree, None) => Err(HumanEvalError::CorrectionRequired),
            (LabelAgreement::Agree, Some(_)) => Err(HumanEvalError::CorrectionNotAllowed),
            _ => Ok(()),
        }
    }
}

/// A stored judgment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub annotator_id: String,
    #[serde(flatten)]
    pub input: JudgmentInput,
    pub timestamp: chrono::DateTime<chrono::Utc>,
}
