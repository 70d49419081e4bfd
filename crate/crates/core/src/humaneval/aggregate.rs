use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{AnnotationItem, HumanEvalError, Judgment, LabelAgreement, OriginGuess};
use crate::corpus::Provenance;
use crate::metrics::{cohens_kappa, MetricsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub items: usize,
    pub judgments: usize,
    pub natural: usize,
    pub label_agree: usize,
    pub guessed_human: usize,
    /// Percentages over judgments; `None` when the group has none.
    pub percent_natural: Option<f64>,
    pub percent_label_agree: Option<f64>,
    pub percent_guessed_human: Option<f64>,
}

/// Agreement between two annotators over the items both judged. A kappa
/// is `None` when it is undefined (both annotators constant and equal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAgreement {
    pub annotator_a: String,
    pub annotator_b: String,
    pub shared_items: usize,
    pub naturalness: Option<f64>,
    pub label_agree: Option<f64>,
    pub origin_guess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub groups: BTreeMap<Provenance, GroupStats>,
    pub pairs: Vec<PairAgreement>,
    pub total_items: usize,
    pub total_judgments: usize,
    pub judgments_per_annotator: BTreeMap<String, usize>,
}

impl AggregateReport {
    /// Percentage-point difference in `percent_natural` between two groups.
    pub fn naturalness_gap(&self, minuend: Provenance, subtrahend: Provenance) -> Option<f64> {
        let a = self.groups.get(&minuend)?.percent_natural?;
        let b = self.groups.get(&subtrahend)?.percent_natural?;
        Some(a - b)
    }
}

fn percent(part: usize, whole: usize) -> Option<f64> {
    (whole > 0).then(|| 100.0 * part as f64 / whole as f64)
}

fn kappa<L: Ord>(a: &[L], b: &[L]) -> Option<f64> {
    match cohens_kappa(a, b) {
        Ok(k) => Some(k),
        Err(MetricsError::DegenerateAgreement | MetricsError::Empty) => None,
        Err(e) => unreachable!("kappa inputs are aligned: {e}"),
    }
}

/// Summarizes judgments per hidden provenance group and per annotator
/// pair. Naturalness is binary here: `strange` and `unnatural` share one
/// bucket.
pub fn aggregate(
    items: &[AnnotationItem],
    annotators: &[String],
    judgments: &[Judgment],
) -> Result<AggregateReport, HumanEvalError> {
    if judgments.is_empty() {
        return Err(HumanEvalError::EmptySession);
    }
    let by_id: HashMap<&str, &AnnotationItem> = items.iter().map(|i| (i.item_id.as_str(), i)).collect();

    let mut groups: BTreeMap<Provenance, GroupStats> = BTreeMap::new();
    for item in items {
        groups
            .entry(item.provenance)
            .or_insert_with(|| GroupStats {
                items: 0,
                judgments: 0,
                natural: 0,
                label_agree: 0,
                guessed_human: 0,
                percent_natural: None,
                percent_label_agree: None,
                percent_guessed_human: None,
            })
            .items += 1;
    }
    let mut per_annotator: BTreeMap<String, usize> = annotators.iter().map(|a| (a.clone(), 0)).collect();
    for j in judgments {
        let item = by_id
            .get(j.input.item_id.as_str())
            .ok_or_else(|| HumanEvalError::NotFound(format!("item {}", j.input.item_id)))?;
        let g = groups.get_mut(&item.provenance).expect("group exists for every item");
        g.judgments += 1;
        g.natural += usize::from(j.input.naturalness.is_natural());
        g.label_agree += usize::from(j.input.label_agree == LabelAgreement::Agree);
        g.guessed_human += usize::from(j.input.origin_guess == OriginGuess::Human);
        *per_annotator.entry(j.annotator_id.clone()).or_insert(0) += 1;
    }
    for g in groups.values_mut() {
        g.percent_natural = percent(g.natural, g.judgments);
        g.percent_label_agree = percent(g.label_agree, g.judgments);
        g.percent_guessed_human = percent(g.guessed_human, g.judgments);
    }

    let mut by_annotator: HashMap<&str, HashMap<&str, &Judgment>> = HashMap::new();
    for j in judgments {
        by_annotator
            .entry(j.annotator_id.as_str())
            .or_default()
            .insert(j.input.item_id.as_str(), j);
    }
    let mut pairs = Vec::new();
    for (i, a) in annotators.iter().enumerate() {
        for b in &annotators[i + 1..] {
            let empty = HashMap::new();
            let ja = by_annotator.get(a.as_str()).unwrap_or(&empty);
            let jb = by_annotator.get(b.as_str()).unwrap_or(&empty);
            let shared: Vec<(&Judgment, &Judgment)> = items
                .iter()
                .filter_map(|it| Some((*ja.get(it.item_id.as_str())?, *jb.get(it.item_id.as_str())?)))
                .collect();
            let column = |f: &dyn Fn(&Judgment) -> u8| -> (Vec<u8>, Vec<u8>) {
                shared.iter().map(|(x, y)| (f(x), f(y))).unzip()
            };
            let (na, nb) = column(&|j| u8::from(j.input.naturalness.is_natural()));
            let (la, lb) = column(&|j| j.input.label_agree as u8);
            let (oa, ob) = column(&|j| j.input.origin_guess as u8);
            pairs.push(PairAgreement {
                annotator_a: a.clone(),
                annotator_b: b.clone(),
                shared_items: shared.len(),
                naturalness: kappa(&na, &nb),
                label_agree: kappa(&la, &lb),
                origin_guess: kappa(&oa, &ob),
            });
        }
    }

    Ok(AggregateReport {
        groups,
        pairs,
        total_items: items.len(),
        total_judgments: judgments.len(),
        judgments_per_annotator: per_annotator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentiment;
    use crate::humaneval::{JudgmentInput, Naturalness};

    fn items(n_nat: usize, n_syn: usize) -> Vec<AnnotationItem> {
        (0..n_nat + n_syn)
            .map(|i| AnnotationItem {
                item_id: format!("item-{i}"),
                source_id: format!("src-{i}"),
                text: format!("text {i}"),
                label: Sentiment::Positive,
                provenance: if i < n_nat {
                    Provenance::Natural
                } else {
                    Provenance::SyntheticLlm
                },
                position: i + 1,
            })
            .collect()
    }

    fn judge(annotator: &str, item: usize, nat: Naturalness, agree: bool, human: bool) -> Judgment {
        Judgment {
            annotator_id: annotator.into(),
            input: JudgmentInput {
                item_id: format!("item-{item}"),
                naturalness: nat,
                label_agree: if agree {
                    LabelAgreement::Agree
                } else {
                    LabelAgreement::Disagree
                },
                correction: (!agree).then_some(Sentiment::Negative),
                origin_guess: if human {
                    OriginGuess::Human
                } else {
                    OriginGuess::Machine
                },
                comment: None,
            },
            timestamp: chrono::DateTime::UNIX_EPOCH,
        }
    }

    #[test]
    fn strange_and_unnatural_share_a_bucket() {
        let items = items(2, 2);
        let js = vec![
            judge("a", 0, Naturalness::Natural, true, true),
            judge("a", 1, Naturalness::Strange, true, false),
            judge("a", 2, Naturalness::Unnatural, false, false),
            judge("a", 3, Naturalness::Natural, true, true),
        ];
        let r = aggregate(&items, &["a".into()], &js).unwrap();
        let nat = &r.groups[&Provenance::Natural];
        let syn = &r.groups[&Provenance::SyntheticLlm];
        assert_eq!(nat.percent_natural, Some(50.0));
        assert_eq!(syn.percent_natural, Some(50.0));
        assert_eq!(syn.percent_label_agree, Some(50.0));
        assert_eq!(nat.percent_guessed_human, Some(50.0));
        assert_eq!(nat.items + syn.items, 4);
        assert!(r.pairs.is_empty());
    }

    #[test]
    fn all_synthetic_natural() {
        let items = items(1, 3);
        let js: Vec<_> = (1..4)
            .map(|i| judge("a", i, Naturalness::Natural, true, true))
            .collect();
        let r = aggregate(&items, &["a".into()], &js).unwrap();
        assert_eq!(r.groups[&Provenance::SyntheticLlm].percent_natural, Some(100.0));
        assert_eq!(r.groups[&Provenance::Natural].percent_natural, None);
    }

    #[test]
    fn perfect_agreement_gives_unit_kappa() {
        let items = items(3, 3);
        let pattern = [
            (Naturalness::Natural, true, true),
            (Naturalness::Strange, false, false),
            (Naturalness::Natural, false, true),
            (Naturalness::Unnatural, true, false),
            (Naturalness::Natural, true, false),
            (Naturalness::Strange, true, true),
        ];
        let mut js = Vec::new();
        for who in ["a", "b"] {
            for (i, &(n, agree, human)) in pattern.iter().enumerate() {
                js.push(judge(who, i, n, agree, human));
            }
        }
        let r = aggregate(&items, &["a".into(), "b".into()], &js).unwrap();
        let p = &r.pairs[0];
        assert_eq!(p.shared_items, 6);
        assert_eq!(
            (p.naturalness, p.label_agree, p.origin_guess),
            (Some(1.0), Some(1.0), Some(1.0))
        );
        assert_eq!(r.judgments_per_annotator["b"], 6);
    }

    #[test]
    fn empty() {
        assert!(matches!(
            aggregate(&items(1, 1), &[], &[]),
            Err(HumanEvalError::EmptySession)
        ));
    }
}
