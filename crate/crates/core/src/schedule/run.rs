use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::materialize::materialize_stage;
use super::protocol::{read_predictions, StageManifest, StageResultFile, PROTOCOL_VERSION};
use super::{ScheduleError, Trainer, TrainingPlan};
use crate::corpus::{write_dataset, SentenceRecord, Sentiment};
use crate::metrics::{classification_report, EvalReport, Predicted};
use crate::seed;

/// Record pools a plan draws from.
#[derive(Debug, Clone, Copy)]
pub struct PlanData<'a> {
    pub natural: &'a [SentenceRecord],
    pub synthetic: &'a [SentenceRecord],
    pub val: &'a [SentenceRecord],
    pub test: Option<&'a [SentenceRecord]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub index: usize,
    pub train_size: usize,
    pub train_loss: Option<f64>,
    pub val_weighted_f1: Option<f64>,
    pub checkpoint_out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerResult {
    pub per_stage: Vec<StageOutcome>,
    /// Test-set report from the last stage's predictions, if it wrote any.
    #[serde(rename = "final")]
    pub final_report: Option<EvalReport>,
    /// Not written to the result file, which must be reproducible.
    #[serde(skip)]
    pub wall_time_secs: f64,
    pub trainer_id: String,
    pub plan_fingerprint: String,
}

impl TrainerResult {
    pub fn final_val_f1(&self) -> Option<f64> {
        self.per_stage.last().and_then(|s| s.val_weighted_f1)
    }
}

#[derive(Serialize)]
struct PartialResults<'a> {
    failed_stage: usize,
    reason: &'a str,
    completed: &'a [StageOutcome],
}

pub(crate) fn plan_fingerprint(plan: &TrainingPlan) -> String {
    seed::fingerprint(&serde_json::to_vec(plan).expect("plan serializes"))
}

/// Runs every stage in order under `work_dir`, passing each stage the
/// checkpoint written by the one before.
///
/// Layout: `val.jsonl`, `test.jsonl`, then `stage-<k>/` holding
/// `train.jsonl`, `manifest.json`, `result.json` and the checkpoint. On a
/// failure the completed stages are written to `partial_results.json`; on
/// success the whole result goes to `trainer_result.json`.
pub fn run_plan(
    plan: &TrainingPlan,
    trainer: &dyn Trainer,
    data: PlanData<'_>,
    work_dir: &Path,
) -> Result<TrainerResult, ScheduleError> {
    plan.validate()?;
    let started = Instant::now();
    fs::create_dir_all(work_dir).map_err(ScheduleError::io(work_dir))?;
    let fingerprint = plan_fingerprint(plan);

    let val_path = work_dir.join("val.jsonl");
    write_dataset(&val_path, data.val)?;
    let test_path = match data.test {
        Some(test) => {
            let path = work_dir.join("test.jsonl");
            write_dataset(&path, test)?;
            Some(path)
        }
        None => None,
    };

    let stage_dir = |k: usize| work_dir.join(format!("stage-{k}"));
    let train_sizes: Vec<usize> = plan
        .stages
        .par_iter()
        .map(|stage| {
            let set = materialize_stage(plan, stage.index, data.natural, data.synthetic)?;
            let dir = stage_dir(stage.index);
            fs::create_dir_all(&dir).map_err(ScheduleError::io(&dir))?;
            set.write(&dir.join("train.jsonl"))?;
            Ok(set.records.len())
        })
        .collect::<Result<_, ScheduleError>>()?;

    let mut per_stage: Vec<StageOutcome> = Vec::with_capacity(plan.stages.len());
    let mut checkpoint_in: Option<PathBuf> = None;
    let mut last_predictions: Option<PathBuf> = None;
    for (stage, train_size) in plan.stages.iter().zip(train_sizes) {
        let dir = stage_dir(stage.index);
        let is_last = stage.index == plan.stages.len();
        let manifest = StageManifest {
            protocol_version: PROTOCOL_VERSION,
            model_id: plan.model_id.clone(),
            stage: stage.clone(),
            stage_count: plan.stages.len(),
            hparams: plan.base_hparams.clone(),
            seed: plan.shuffle_seed.wrapping_add(stage.index as u64),
            plan_fingerprint: fingerprint.clone(),
            train_path: dir.join("train.jsonl"),
            val_path: val_path.clone(),
            test_path: test_path.clone().filter(|_| is_last),
            checkpoint_in: checkpoint_in.clone(),
            checkpoint_out: dir.join("checkpoint"),
            result_path: dir.join("result.json"),
            predictions_path: test_path
                .as_ref()
                .filter(|_| is_last)
                .map(|_| dir.join("predictions.jsonl")),
        };
        let manifest_path = dir.join("manifest.json");
        manifest.write(&manifest_path)?;
        info!(
            "stage {}/{}: {} train records, lr {:e}",
            stage.index,
            plan.stages.len(),
            train_size,
            stage.learning_rate
        );

        let result = trainer
            .run_stage(&manifest_path, &manifest)
            .and_then(|()| StageResultFile::read(&manifest.result_path));
        let result = match result {
            Ok(r) => r,
            Err(reason) => {
                let partial = work_dir.join("partial_results.json");
                let body = PartialResults {
                    failed_stage: stage.index,
                    reason: &reason,
                    completed: &per_stage,
                };
                fs::write(&partial, serde_json::to_string_pretty(&body).expect("serializes"))
                    .map_err(ScheduleError::io(&partial))?;
                return Err(ScheduleError::StageFailed {
                    index: stage.index,
                    reason,
                    partial: per_stage,
                });
            }
        };
        checkpoint_in = Some(result.checkpoint_out.clone());
        last_predictions = result.predictions_path.clone();
        per_stage.push(StageOutcome {
            index: stage.index,
            train_size,
            train_loss: result.train_loss,
            val_weighted_f1: result.val_weighted_f1,
            checkpoint_out: result.checkpoint_out,
        });
    }

    let final_report = match (data.test, last_predictions) {
        (Some(test), Some(path)) => {
            Some(
                score_predictions(test, &path).map_err(|reason| ScheduleError::StageFailed {
                    index: plan.stages.len(),
                    reason,
                    partial: per_stage.clone(),
                })?,
            )
        }
        _ => None,
    };
    let wall_time_secs = started.elapsed().as_secs_f64();
    info!("plan finished in {wall_time_secs:.2}s");
    let result = TrainerResult {
        per_stage,
        final_report,
        wall_time_secs,
        trainer_id: trainer.id(),
        plan_fingerprint: fingerprint,
    };
    let out = work_dir.join("trainer_result.json");
    fs::write(&out, serde_json::to_string_pretty(&result).expect("serializes")).map_err(ScheduleError::io(&out))?;
    Ok(result)
}

/// Test records without a prediction count as invalid.
fn score_predictions(test: &[SentenceRecord], path: &Path) -> Result<EvalReport, String> {
    let lines = read_predictions(path)?;
    let by_id: HashMap<&str, Predicted<Sentiment>> = lines.iter().map(|l| (l.id.as_str(), l.prediction())).collect();
    let missing = test.iter().filter(|r| !by_id.contains_key(r.id.as_str())).count();
    if missing > 0 {
        warn!("{missing} test records have no prediction");
    }
    let y_true: Vec<Sentiment> = test.iter().map(|r| r.label).collect();
    let y_pred: Vec<Predicted<Sentiment>> = test
        .iter()
        .map(|r| by_id.get(r.id.as_str()).copied().unwrap_or(Predicted::Invalid))
        .collect();
    classification_report(&y_true, &y_pred, &Sentiment::ALL).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Provenance;
    use crate::schedule::{gradual_plan, MockTrainer, PlanOptions};

    fn pool(prefix: &str, n: usize, provenance: Provenance) -> Vec<SentenceRecord> {
        (0..n)
            .map(|i| {
                let mut r = SentenceRecord::natural(
                    format!("{prefix}{i}"),
                    format!("{prefix} text {i}"),
                    Sentiment::ALL[i % 3],
                );
                r.provenance = provenance;
                r
            })
            .collect()
    }

    struct Pools {
        natural: Vec<SentenceRecord>,
        synthetic: Vec<SentenceRecord>,
        val: Vec<SentenceRecord>,
        test: Vec<SentenceRecord>,
    }

    impl Pools {
        fn new() -> Self {
            Self {
                natural: pool("n", 40, Provenance::Natural),
                synthetic: pool("s", 60, Provenance::SyntheticLlm),
                val: pool("v", 15, Provenance::Natural),
                test: pool("t", 30, Provenance::Natural),
            }
        }

        fn data(&self) -> PlanData<'_> {
            PlanData {
                natural: &self.natural,
                synthetic: &self.synthetic,
                val: &self.val,
                test: Some(&self.test),
            }
        }
    }

    fn small_plan() -> TrainingPlan {
        let options = PlanOptions {
            synth_sizes: vec![50, 25, 15, 5, 0],
            seed: 3,
            ..PlanOptions::default()
        };
        gradual_plan(40, 60, &options).unwrap()
    }

    #[test]
    fn mock_run_is_deterministic() {
        let pools = Pools::new();
        let a_dir = tempfile::tempdir().unwrap();
        let b_dir = tempfile::tempdir().unwrap();
        let a = run_plan(&small_plan(), &MockTrainer::new(), pools.data(), a_dir.path()).unwrap();
        let b = run_plan(&small_plan(), &MockTrainer::new(), pools.data(), b_dir.path()).unwrap();
        assert_eq!(a.per_stage.len(), 5);
        let scores = |r: &TrainerResult| {
            r.per_stage
                .iter()
                .map(|s| s.val_weighted_f1.unwrap().to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(scores(&a), scores(&b));
        assert!(a
            .per_stage
            .iter()
            .all(|s| (0.3..=0.9).contains(&s.val_weighted_f1.unwrap())));
        assert_eq!(a.final_report, b.final_report);
        assert_eq!(a.final_report.as_ref().unwrap().total, 30);
        assert!(a_dir.path().join("trainer_result.json").exists());
        let sizes: Vec<_> = a.per_stage.iter().map(|s| s.train_size).collect();
        assert_eq!(sizes, vec![90, 65, 55, 45, 40]);
    }

    #[test]
    fn checkpoints_chain_between_stages() {
        let pools = Pools::new();
        let dir = tempfile::tempdir().unwrap();
        run_plan(&small_plan(), &MockTrainer::new(), pools.data(), dir.path()).unwrap();
        let m1 = StageManifest::read(&dir.path().join("stage-1/manifest.json")).unwrap();
        let m2 = StageManifest::read(&dir.path().join("stage-2/manifest.json")).unwrap();
        assert_eq!(m1.checkpoint_in, None);
        assert_eq!(m2.checkpoint_in, Some(m1.checkpoint_out));
        assert!(m1.test_path.is_none());
        let m5 = StageManifest::read(&dir.path().join("stage-5/manifest.json")).unwrap();
        assert!(m5.test_path.is_some() && m5.predictions_path.is_some());
    }

    #[test]
    fn different_data_changes_the_score() {
        let pools = Pools::new();
        let mut other = Pools::new();
        other.val.pop();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let a = run_plan(&small_plan(), &MockTrainer::new(), pools.data(), d1.path()).unwrap();
        let b = run_plan(&small_plan(), &MockTrainer::new(), other.data(), d2.path()).unwrap();
        assert_ne!(a.final_val_f1(), b.final_val_f1());
    }

    #[test]
    fn failure_at_stage_three_keeps_two() {
        let pools = Pools::new();
        let dir = tempfile::tempdir().unwrap();
        let err = run_plan(&small_plan(), &MockTrainer::failing_at(3), pools.data(), dir.path()).unwrap_err();
        match err {
            ScheduleError::StageFailed { index, partial, .. } => {
                assert_eq!(index, 3);
                assert_eq!(partial.len(), 2);
            }
            other => panic!("unexpected {other}"),
        }
        let saved: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("partial_results.json")).unwrap()).unwrap();
        assert_eq!(saved["failed_stage"], 3);
        assert_eq!(saved["completed"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn empty_plan_is_rejected() {
        let pools = Pools::new();
        let dir = tempfile::tempdir().unwrap();
        let mut plan = small_plan();
        plan.stages.clear();
        assert!(matches!(
            run_plan(&plan, &MockTrainer::new(), pools.data(), dir.path()),
            Err(ScheduleError::Config(_))
        ));
    }
}
