//! Data augmentation toolkit for code-mixed sentiment analysis.
//!
//! The crate covers the whole experimental loop: corpus cleaning and
//! resplitting, few-shot synthetic data generation against a chat-completion
//! endpoint, random-translation augmentation, staged fine-tuning plans driven
//! through a file-based trainer protocol, evaluation metrics, blinded human
//! evaluation sessions, and cost models for annotation versus generation.

pub mod corpus;
pub mod cost;
pub mod emoji;
pub mod generation;
pub mod humaneval;
pub mod metrics;
pub mod schedule;
pub mod seed;
pub mod translate;

pub use corpus::{LangPair, Provenance, SentenceRecord, Sentiment};
