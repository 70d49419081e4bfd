use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AnnotationItem, HumanEvalError};
use crate::corpus::SentenceRecord;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotator {
    pub id: String,
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub items: Vec<AnnotationItem>,
    pub annotators: Vec<Annotator>,
    pub admin_token: String,
    pub seed: u64,
    pub n_each: usize,
}

impl Session {
    pub fn annotator_for_token(&self, token: &str) -> Option<&Annotator> {
        self.annotators.iter().find(|a| a.token == token)
    }

    pub fn item(&self, item_id: &str) -> Option<&AnnotationItem> {
        self.items.iter().find(|i| i.item_id == item_id)
    }
}

fn new_token() -> String {
    let mut rng = rand::rng();
    (0..16).map(|_| format!("{:02x}", rng.random::<u8>())).collect()
}

/// Samples `n_each` records from each pool and shuffles them into one
/// order shared by every annotator. Item ids are positional so they carry
/// no hint of the source.
pub fn build_session(
    id: &str,
    natural_pool: &[SentenceRecord],
    synthetic_pool: &[SentenceRecord],
    n_each: usize,
    seed: u64,
    annotators: &[String],
) -> Result<Session, HumanEvalError> {
    if n_each == 0 {
        return Err(HumanEvalError::Invalid("n_each must be positive".into()));
    }
    if annotators.is_empty() {
        return Err(HumanEvalError::Invalid("at least one annotator is required".into()));
    }
    let unique: HashSet<_> = annotators.iter().collect();
    if unique.len() != annotators.len() {
        return Err(HumanEvalError::Invalid("annotator ids must be unique".into()));
    }
    if natural_pool.iter().any(|r| r.provenance.is_synthetic()) {
        return Err(HumanEvalError::Invalid(
            "natural pool contains synthetic records".into(),
        ));
    }
    if synthetic_pool.iter().any(|r| !r.provenance.is_synthetic()) {
        return Err(HumanEvalError::Invalid(
            "synthetic pool contains natural records".into(),
        ));
    }
    for (name, pool) in [("natural", natural_pool), ("synthetic", synthetic_pool)] {
        if pool.len() < n_each {
            return Err(HumanEvalError::InsufficientPool {
                provenance: name,
                needed: n_each,
                available: pool.len(),
            });
        }
    }

    let mut rng = seed::rng(seed);
    let mut picked: Vec<&SentenceRecord> = natural_pool.choose_multiple(&mut rng, n_each).collect();
    picked.extend(synthetic_pool.choose_multiple(&mut rng, n_each));
    picked.shuffle(&mut rng);

    let items = picked
        .into_iter()
        .enumerate()
        .map(|(i, r)| AnnotationItem {
            item_id: format!("item-{:04}", i + 1),
            source_id: r.id.clone(),
            text: r.text.clone(),
            label: r.label,
            provenance: r.provenance,
            position: i + 1,
        })
        .collect();
    Ok(Session {
        id: id.to_string(),
        items,
        annotators: annotators
            .iter()
            .map(|a| Annotator {
                id: a.clone(),
                token: new_token(),
            })
            .collect(),
        admin_token: new_token(),
        seed,
        n_each,
    })
}
