use std::fs;
use std::path::Path;
use std::process::Command;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Serialize;

use super::protocol::{write_predictions, PredictionLine, StageManifest, StageResultFile};
use super::{BaseHparams, TrainingStage};
use crate::corpus::{load_dataset, DatasetFormat, LoadOptions, Sentiment};
use crate::seed;

/// Executes one stage manifest. On success the trainer has written the
/// result file named in the manifest.
pub trait Trainer: Send + Sync {
    fn id(&self) -> String;
    fn run_stage(&self, manifest_path: &Path, manifest: &StageManifest) -> Result<(), String>;
}

/// Runs an external program with the manifest path appended to `args`.
#[derive(Debug, Clone)]
pub struct CommandTrainer {
    pub program: String,
    pub args: Vec<String>,
}

impl CommandTrainer {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            program: program.into(),
            args,
        }
    }
}

impl Trainer for CommandTrainer {
    fn id(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn run_stage(&self, manifest_path: &Path, _manifest: &StageManifest) -> Result<(), String> {
        let output = Command::new(&self.program)
            .args(&self.args)
            .arg(manifest_path)
            .output()
            .map_err(|e| format!("cannot start {}: {e}", self.program))?;
        if output.status.success() {
            return Ok(());
        }
        let stderr = String::from_utf8_lossy(&output.stderr);
        let tail: Vec<&str> = stderr.lines().rev().take(5).collect();
        Err(format!(
            "trainer exited with {}: {}",
            output.status,
            tail.into_iter().rev().collect::<Vec<_>>().join(" | ")
        ))
    }
}

/// In-process trainer whose scores are a hash of the plan and the data.
///
/// The stage score is `0.3 + 0.6 * h / 2^64`, where `h` is the stable hash
/// of the canonical JSON of the stage, the plan fingerprint and the
/// content fingerprints of the train and validation files. Test
/// predictions are correct with probability equal to that score.
#[derive(Debug, Clone, Default)]
pub struct MockTrainer {
    fail_at_stage: Option<usize>,
}

#[derive(Serialize)]
struct Canonical<'a> {
    plan: &'a str,
    model_id: &'a str,
    stage: &'a TrainingStage,
    hparams: &'a BaseHparams,
    seed: u64,
    train: String,
    val: String,
}

impl MockTrainer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Makes stage `index` (1-based) exit with an error.
    pub fn failing_at(index: usize) -> Self {
        Self {
            fail_at_stage: Some(index),
        }
    }

    fn file_fingerprint(path: &Path) -> Result<String, String> {
        fs::read(path)
            .map(|bytes| seed::fingerprint(&bytes))
            .map_err(|e| format!("cannot read {}: {e}", path.display()))
    }

    /// Score and hash for a manifest, without side effects.
    pub fn score(manifest: &StageManifest) -> Result<(f64, u64), String> {
        let canonical = Canonical {
            plan: &manifest.plan_fingerprint,
            model_id: &manifest.model_id,
            stage: &manifest.stage,
            hparams: &manifest.hparams,
            seed: manifest.seed,
            train: Self::file_fingerprint(&manifest.train_path)?,
            val: Self::file_fingerprint(&manifest.val_path)?,
        };
        let bytes = serde_json::to_vec(&canonical).expect("canonical form serializes");
        let h = seed::stable_hash(&bytes);
        Ok((0.3 + 0.6 * (h as f64 / 2f64.powi(64)), h))
    }
}

impl Trainer for MockTrainer {
    fn id(&self) -> String {
        "mock".into()
    }

    fn run_stage(&self, _manifest_path: &Path, manifest: &StageManifest) -> Result<(), String> {
        if self.fail_at_stage == Some(manifest.stage.index) {
            return Err(format!("injected failure at stage {}", manifest.stage.index));
        }
        let (score, h) = Self::score(manifest)?;
        fs::write(&manifest.checkpoint_out, format!("mock checkpoint {h:016x}\n")).map_err(|e| e.to_string())?;

        let mut predictions_path = None;
        if let (Some(test), Some(out)) = (&manifest.test_path, &manifest.predictions_path) {
            let records = load_dataset(test, DatasetFormat::CanonicalJsonl, &LoadOptions::default())
                .map_err(|e| e.to_string())?;
            let lines: Vec<PredictionLine> = records
                .iter()
                .map(|r| {
                    let mut rng = seed::rng(seed::mix(h, seed::stable_hash(r.id.as_bytes())));
                    let label = if rng.random_bool(score) {
                        r.label
                    } else {
                        let others: Vec<Sentiment> = Sentiment::ALL.into_iter().filter(|s| *s != r.label).collect();
                        *others.choose(&mut rng).expect("three classes")
                    };
                    PredictionLine {
                        id: r.id.clone(),
                        label: Some(label),
                    }
                })
                .collect();
            write_predictions(out, &lines).map_err(|e| e.to_string())?;
            predictions_path = Some(out.clone());
        }

        StageResultFile {
            val_weighted_f1: Some(score),
            train_loss: None,
            checkpoint_out: manifest.checkpoint_out.clone(),
            predictions_path,
        }
        .write(&manifest.result_path)
        .map_err(|e| e.to_string())
    }
}
