//! Files exchanged with a trainer process.
//!
//! For every stage the orchestrator writes a [`StageManifest`] as JSON and
//! runs the trainer with the manifest path as its last argument. The
//! trainer writes a [`StageResultFile`] to `result_path` and exits with 0.
//! When `predictions_path` is set it also writes one [`PredictionLine`] per
//! test record.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BaseHparams, ScheduleError, TrainingStage};
use crate::corpus::Sentiment;
use crate::metrics::Predicted;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageManifest {
    pub protocol_version: u32,
    pub model_id: String,
    pub stage: TrainingStage,
    pub stage_count: usize,
    pub hparams: BaseHparams,
    /// Seed for trainer-side randomness (initialization, dropout, batching).
    pub seed: u64,
    /// Hash of the full plan, shared by all stages of one run.
    pub plan_fingerprint: String,
    pub train_path: PathBuf,
    pub val_path: PathBuf,
    pub test_path: Option<PathBuf>,
    /// Absent for the first stage.
    pub checkpoint_in: Option<PathBuf>,
    pub checkpoint_out: PathBuf,
    pub result_path: PathBuf,
    pub predictions_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageResultFile {
    pub val_weighted_f1: Option<f64>,
    #[serde(default)]
    pub train_loss: Option<f64>,
    pub checkpoint_out: PathBuf,
    #[serde(default)]
    pub predictions_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionLine {
    pub id: String,
    /// `null` when the model produced no usable label.
    pub label: Option<Sentiment>,
}

impl PredictionLine {
    pub fn prediction(&self) -> Predicted<Sentiment> {
        self.label.map_or(Predicted::Invalid, Predicted::Label)
    }
}

impl StageManifest {
    pub fn write(&self, path: &Path) -> Result<(), ScheduleError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, json).map_err(ScheduleError::io(path))
    }

    pub fn read(path: &Path) -> Result<Self, ScheduleError> {
        let raw = fs::read_to_string(path).map_err(ScheduleError::io(path))?;
        serde_json::from_str(&raw).map_err(|e| ScheduleError::Config(format!("{}: {e}", path.display())))
    }
}

impl StageResultFile {
    pub fn write(&self, path: &Path) -> Result<(), ScheduleError> {
        let json = serde_json::to_string_pretty(self).expect("result serializes");
        fs::write(path, json).map_err(ScheduleError::io(path))
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let raw = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let result: Self =
            serde_json::from_str(&raw).map_err(|e| format!("malformed result {}: {e}", path.display()))?;
        if let Some(f1) = result.val_weighted_f1 {
            if !(0.0..=1.0).contains(&f1) {
                return Err(format!("val_weighted_f1 {f1} is outside [0, 1]"));
            }
        }
        Ok(result)
    }
}

pub fn write_predictions(path: &Path, lines: &[PredictionLine]) -> Result<(), ScheduleError> {
    let mut buf = Vec::new();
    for line in lines {
        serde_json::to_writer(&mut buf, line).expect("prediction serializes");
        buf.push(b'\n');
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(ScheduleError::io(parent))?;
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&buf))
        .map_err(ScheduleError::io(path))
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionLine>, String> {
    let raw = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("{}:{}: {e}", path.display(), i + 1)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn result_file_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        fs::write(&path, r#"{"val_weighted_f1": 0.7, "checkpoint_out": "ck"}"#).unwrap();
        let r = StageResultFile::read(&path).unwrap();
        assert_eq!(r.val_weighted_f1, Some(0.7));
        assert_eq!(r.train_loss, None);
        fs::write(&path, r#"{"val_weighted_f1": 1.7, "checkpoint_out": "ck"}"#).unwrap();
        assert!(StageResultFile::read(&path).is_err());
        fs::write(&path, "not json").unwrap();
        assert!(StageResultFile::read(&path).is_err());
    }

    #[test]
    fn predictions_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let lines = vec![
            PredictionLine {
                id: "a".into(),
                label: Some(Sentiment::Negative),
            },
            PredictionLine {
                id: "b".into(),
                label: None,
            },
        ];
        write_predictions(&path, &lines).unwrap();
        assert_eq!(read_predictions(&path).unwrap(), lines);
        assert_eq!(lines[1].prediction(), Predicted::Invalid);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(r#"{"id":"a","label":"negative"}"#), "{text}");
    }
}
