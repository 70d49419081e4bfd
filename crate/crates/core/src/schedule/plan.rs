use log::warn;
use serde::{Deserialize, Serialize};

use super::ScheduleError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingStage {
    /// 1-based position in the plan.
    pub index: usize,
    pub natural_size: usize,
    pub synthetic_size: usize,
    pub epochs: u32,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaseHparams {
    pub max_seq_len: usize,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub base_lr: f64,
    pub epsilon: f64,
}

impl Default for BaseHparams {
    fn default() -> Self {
        Self {
            max_seq_len: 40,
            batch_size: 32,
            weight_decay: 0.01,
            base_lr: 5e-5,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingPlan {
    pub stages: Vec<TrainingStage>,
    pub base_hparams: BaseHparams,
    pub natural_seed: u64,
    pub synthetic_seed: u64,
    /// Stage `k` shuffles its training file with `shuffle_seed + k`.
    pub shuffle_seed: u64,
    pub model_id: String,
}

/// Knobs for [`gradual_plan`]; defaults are the five-stage schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanOptions {
    pub synth_sizes: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub epochs: u32,
    /// Shrink stage sizes to the available pool instead of failing.
    pub clamp: bool,
    pub base_hparams: BaseHparams,
    pub seed: u64,
    pub model_id: String,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            synth_sizes: vec![50_000, 25_000, 15_000, 5_000, 0],
            learning_rates: vec![1e-6, 2e-6, 2e-6, 4e-6, 2e-6],
            epochs: 3,
            clamp: false,
            base_hparams: BaseHparams::default(),
            seed: 0,
            model_id: "cardiffnlp/twitter-xlm-roberta-base".into(),
        }
    }
}

impl TrainingPlan {
    pub fn is_gradual(&self) -> bool {
        self.stages.len() > 1
    }

    /// Checks every plan invariant; run before any trainer call.
    pub fn validate(&self) -> Result<(), ScheduleError> {
        let cfg = |msg: String| Err(ScheduleError::Config(msg));
        let Some(first) = self.stages.first() else {
            return cfg("plan has no stages".into());
        };
        for (i, stage) in self.stages.iter().enumerate() {
            if stage.index != i + 1 {
                return cfg(format!("stage {} has index {}", i + 1, stage.index));
            }
            if stage.epochs == 0 {
                return cfg(format!("stage {} has zero epochs", stage.index));
            }
            if !(stage.learning_rate > 0.0 && stage.learning_rate.is_finite()) {
                return cfg(format!("stage {} learning rate must be positive", stage.index));
            }
            if stage.natural_size != first.natural_size {
                return cfg(format!("stage {} changes the natural size", stage.index));
            }
        }
        for pair in self.stages.windows(2) {
            if pair[1].synthetic_size > pair[0].synthetic_size {
                return cfg(format!(
                    "synthetic size grows from stage {} to {}",
                    pair[0].index, pair[1].index
                ));
            }
        }
        if self.is_gradual() && self.stages.last().is_some_and(|s| s.synthetic_size != 0) {
            return cfg("the final stage of a gradual plan must use no synthetic data".into());
        }
        let hp = &self.base_hparams;
        if hp.max_seq_len == 0 || hp.batch_size == 0 {
            return cfg("max_seq_len and batch_size must be positive".into());
        }
        Ok(())
    }

    pub fn max_synthetic(&self) -> usize {
        self.stages.iter().map(|s| s.synthetic_size).max().unwrap_or(0)
    }

    pub fn natural_size(&self) -> usize {
        self.stages.first().map_or(0, |s| s.natural_size)
    }
}

/// Builds one stage per entry of `options.synth_sizes`. A single entry
/// yields a one-stage plan, which may keep synthetic data to the end.
pub fn gradual_plan(
    natural_n: usize,
    synthetic_pool: usize,
    options: &PlanOptions,
) -> Result<TrainingPlan, ScheduleError> {
    if options.synth_sizes.len() != options.learning_rates.len() {
        return Err(ScheduleError::Config(format!(
            "{} synthetic sizes but {} learning rates",
            options.synth_sizes.len(),
            options.learning_rates.len()
        )));
    }
    let needed = options.synth_sizes.iter().copied().max().unwrap_or(0);
    let mut sizes = options.synth_sizes.clone();
    if needed > synthetic_pool {
        if !options.clamp {
            return Err(ScheduleError::InsufficientSynthetic {
                needed,
                available: synthetic_pool,
            });
        }
        warn!("clamping synthetic stage sizes to the pool of {synthetic_pool} records");
        sizes.iter_mut().for_each(|s| *s = (*s).min(synthetic_pool));
    }
    let stages = sizes
        .iter()
        .zip(&options.learning_rates)
        .enumerate()
        .map(|(i, (&synthetic_size, &learning_rate))| TrainingStage {
            index: i + 1,
            natural_size: natural_n,
            synthetic_size,
            epochs: options.epochs,
            learning_rate,
        })
        .collect();
    let plan = TrainingPlan {
        stages,
        base_hparams: options.base_hparams.clone(),
        natural_seed: crate::seed::mix(options.seed, 1),
        synthetic_seed: crate::seed::mix(options.seed, 2),
        shuffle_seed: options.seed,
        model_id: options.model_id.clone(),
    };
    plan.validate()?;
    Ok(plan)
}

/// One stage at the base learning rate.
pub fn single_stage_plan(
    natural_n: usize,
    synthetic_size: usize,
    synthetic_pool: usize,
    options: &PlanOptions,
) -> Result<TrainingPlan, ScheduleError> {
    let options = PlanOptions {
        synth_sizes: vec![synthetic_size],
        learning_rates: vec![options.base_hparams.base_lr],
        ..options.clone()
    };
    gradual_plan(natural_n, synthetic_pool, &options)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_matches_published_schedule() {
        let plan = gradual_plan(12_194, 50_000, &PlanOptions::default()).unwrap();
        let sizes: Vec<_> = plan.stages.iter().map(|s| s.synthetic_size).collect();
        let lrs: Vec<_> = plan.stages.iter().map(|s| s.learning_rate).collect();
        assert_eq!(sizes, vec![50_000, 25_000, 15_000, 5_000, 0]);
        assert_eq!(lrs, vec![1e-6, 2e-6, 2e-6, 4e-6, 2e-6]);
        assert!(plan.stages.iter().all(|s| s.epochs == 3 && s.natural_size == 12_194));
        assert_eq!(
            plan.stages.iter().map(|s| s.index).collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 5]
        );
        assert_eq!(plan.base_hparams.max_seq_len, 40);
        assert_eq!(plan.base_hparams.batch_size, 32);
    }

    #[test]
    fn one_stage_plan() {
        let options = PlanOptions {
            synth_sizes: vec![15_000],
            learning_rates: vec![5e-5],
            ..PlanOptions::default()
        };
        let plan = gradual_plan(4_000, 20_000, &options).unwrap();
        assert_eq!(plan.stages.len(), 1);
        assert_eq!(plan.stages[0].synthetic_size, 15_000);
        let same = single_stage_plan(4_000, 15_000, 20_000, &PlanOptions::default()).unwrap();
        assert_eq!(same, plan);
    }

    #[test]
    fn pool_too_small() {
        let err = gradual_plan(100, 10_000, &PlanOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            ScheduleError::InsufficientSynthetic {
                needed: 50_000,
                available: 10_000
            }
        ));
        let clamped = gradual_plan(
            100,
            10_000,
            &PlanOptions {
                clamp: true,
                ..PlanOptions::default()
            },
        )
        .unwrap();
        let sizes: Vec<_> = clamped.stages.iter().map(|s| s.synthetic_size).collect();
        assert_eq!(sizes, vec![10_000, 10_000, 10_000, 5_000, 0]);
    }

    #[test]
    fn mismatched_lists() {
        let options = PlanOptions {
            learning_rates: vec![1e-6],
            ..PlanOptions::default()
        };
        assert!(matches!(
            gradual_plan(1, 50_000, &options),
            Err(ScheduleError::Config(_))
        ));
    }

    #[test]
    fn invariants_are_enforced() {
        let options = PlanOptions {
            synth_sizes: vec![10, 20, 0],
            learning_rates: vec![1e-6; 3],
            ..PlanOptions::default()
        };
        assert!(gradual_plan(5, 100, &options).is_err());
        let options = PlanOptions {
            synth_sizes: vec![20, 10],
            learning_rates: vec![1e-6; 2],
            ..PlanOptions::default()
        };
        assert!(
            gradual_plan(5, 100, &options).is_err(),
            "final stage must be natural-only"
        );
        let options = PlanOptions {
            synth_sizes: vec![],
            learning_rates: vec![],
            ..PlanOptions::default()
        };
        assert!(matches!(gradual_plan(5, 100, &options), Err(ScheduleError::Config(_))));
    }
}
