//! Gradual fine-tuning: stage plans, per-stage training sets and the
//! file-based protocol used to drive an external trainer.

mod materialize;
mod plan;
mod protocol;
mod run;
mod trainer;

use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::CorpusError;

pub use materialize::{materialize_stage, natural_subset, synthetic_order, StageSet};
pub use plan::{gradual_plan, single_stage_plan, BaseHparams, PlanOptions, TrainingPlan, TrainingStage};
pub use protocol::{
    read_predictions, write_predictions, PredictionLine, StageManifest, StageResultFile, PROTOCOL_VERSION,
};
pub use run::{run_plan, PlanData, StageOutcome, TrainerResult};
pub use trainer::{CommandTrainer, MockTrainer, Trainer};

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("synthetic pool has {available} records, plan needs {needed}")]
    InsufficientSynthetic { needed: usize, available: usize },
    #[error("natural pool has {available} records, plan needs {needed}")]
    InsufficientNatural { needed: usize, available: usize },
    #[error("invalid plan: {0}")]
    Config(String),
    #[error("stage index {index} out of range (plan has {stages} stages)")]
    StageOutOfRange { index: usize, stages: usize },
    #[error("stage {index} failed: {reason}")]
    StageFailed {
        index: usize,
        reason: String,
        partial: Vec<StageOutcome>,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ScheduleError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| ScheduleError::Io { path, source }
    }
}
