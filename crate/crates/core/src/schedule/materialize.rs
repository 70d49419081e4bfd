use std::path::Path;

use rand::seq::SliceRandom;

use super::{ScheduleError, TrainingPlan};
use crate::corpus::{write_dataset, SentenceRecord};
use crate::seed;

/// Training records of one stage, already shuffled.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSet {
    pub index: usize,
    pub records: Vec<SentenceRecord>,
    pub natural_count: usize,
    pub synthetic_count: usize,
}

impl StageSet {
    pub fn write(&self, path: &Path) -> Result<(), ScheduleError> {
        Ok(write_dataset(path, &self.records)?)
    }
}

fn seeded_order(len: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut seed::rng(seed));
    order
}

/// The natural records every stage trains on.
pub fn natural_subset<'a>(
    plan: &TrainingPlan,
    natural: &'a [SentenceRecord],
) -> Result<Vec<&'a SentenceRecord>, ScheduleError> {
    let needed = plan.natural_size();
    if needed > natural.len() {
        return Err(ScheduleError::InsufficientNatural {
            needed,
            available: natural.len(),
        });
    }
    Ok(seeded_order(natural.len(), plan.natural_seed)
        .into_iter()
        .take(needed)
        .map(|i| &natural[i])
        .collect())
}

/// The synthetic pool in plan order; stage `k` takes a prefix of it, so
/// smaller stages are subsets of larger ones.
pub fn synthetic_order<'a>(
    plan: &TrainingPlan,
    synthetic: &'a [SentenceRecord],
) -> Result<Vec<&'a SentenceRecord>, ScheduleError> {
    let needed = plan.max_synthetic();
    if needed > synthetic.len() {
        return Err(ScheduleError::InsufficientSynthetic {
            needed,
            available: synthetic.len(),
        });
    }
    Ok(seeded_order(synthetic.len(), plan.synthetic_seed)
        .into_iter()
        .map(|i| &synthetic[i])
        .collect())
}

/// Assembles the training set of stage `stage_index` (1-based).
pub fn materialize_stage(
    plan: &TrainingPlan,
    stage_index: usize,
    natural: &[SentenceRecord],
    synthetic: &[SentenceRecord],
) -> Result<StageSet, ScheduleError> {
    let stage = stage_index
        .checked_sub(1)
        .and_then(|i| plan.stages.get(i))
        .ok_or(ScheduleError::StageOutOfRange {
            index: stage_index,
            stages: plan.stages.len(),
        })?;
    let nat = natural_subset(plan, natural)?;
    let syn = synthetic_order(plan, synthetic)?;
    let mut records: Vec<SentenceRecord> = nat
        .into_iter()
        .chain(syn.into_iter().take(stage.synthetic_size))
        .cloned()
        .collect();
    records.shuffle(&mut seed::rng(plan.shuffle_seed.wrapping_add(stage.index as u64)));
    Ok(StageSet {
        index: stage.index,
        records,
        natural_count: stage.natural_size,
        synthetic_count: stage.synthetic_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Provenance, Sentiment};
    use crate::schedule::{gradual_plan, PlanOptions};
    use std::collections::HashSet;

    fn pool(prefix: &str, n: usize, provenance: Provenance) -> Vec<SentenceRecord> {
        (0..n)
            .map(|i| {
                let mut r = SentenceRecord::natural(format!("{prefix}{i}"), format!("text {i}"), Sentiment::ALL[i % 3]);
                r.provenance = provenance;
                r
            })
            .collect()
    }

    fn plan() -> TrainingPlan {
        let options = PlanOptions {
            synth_sizes: vec![50, 25, 0],
            learning_rates: vec![1e-6, 2e-6, 2e-6],
            seed: 17,
            ..PlanOptions::default()
        };
        gradual_plan(20, 60, &options).unwrap()
    }

    fn ids(set: &StageSet, provenance: Provenance) -> HashSet<String> {
        set.records
            .iter()
            .filter(|r| r.provenance == provenance)
            .map(|r| r.id.clone())
            .collect()
    }

    #[test]
    fn stages_are_nested_and_natural_is_fixed() {
        let natural = pool("n", 30, Provenance::Natural);
        let synthetic = pool("s", 60, Provenance::SyntheticLlm);
        let plan = plan();
        let sets: Vec<_> = (1..=3)
            .map(|k| materialize_stage(&plan, k, &natural, &synthetic).unwrap())
            .collect();
        let syn: Vec<_> = sets.iter().map(|s| ids(s, Provenance::SyntheticLlm)).collect();
        assert_eq!(syn.iter().map(HashSet::len).collect::<Vec<_>>(), vec![50, 25, 0]);
        assert!(syn[1].is_subset(&syn[0]));
        let nat: Vec<_> = sets.iter().map(|s| ids(s, Provenance::Natural)).collect();
        assert_eq!(nat[0].len(), 20);
        assert!(nat.iter().all(|n| *n == nat[0]));
        assert_eq!(sets[2].records.len(), 20);
    }

    #[test]
    fn materialization_is_deterministic() {
        let natural = pool("n", 30, Provenance::Natural);
        let synthetic = pool("s", 60, Provenance::SyntheticLlm);
        let a = materialize_stage(&plan(), 1, &natural, &synthetic).unwrap();
        let b = materialize_stage(&plan(), 1, &natural, &synthetic).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_range() {
        let natural = pool("n", 30, Provenance::Natural);
        let synthetic = pool("s", 60, Provenance::SyntheticLlm);
        for k in [0, 4] {
            assert!(matches!(
                materialize_stage(&plan(), k, &natural, &synthetic),
                Err(ScheduleError::StageOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn small_pools() {
        let natural = pool("n", 10, Provenance::Natural);
        let synthetic = pool("s", 60, Provenance::SyntheticLlm);
        assert!(matches!(
            materialize_stage(&plan(), 1, &natural, &synthetic),
            Err(ScheduleError::InsufficientNatural {
                needed: 20,
                available: 10
            })
        ));
    }
}
