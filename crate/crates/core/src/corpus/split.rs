use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::io::label_key;
use super::{CorpusError, SentenceRecord, Sentiment, META_RAW_LABEL};
use crate::seed;

/// Anything carrying the label string exactly as it was read from disk.
pub trait RawLabeled {
    fn raw_label(&self) -> &str;
}

impl RawLabeled for SentenceRecord {
    /// Falls back to the normalized label for records without import meta.
    fn raw_label(&self) -> &str {
        self.meta
            .get(META_RAW_LABEL)
            .map(String::as_str)
            .unwrap_or_else(|| self.label.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub kept: usize,
    /// Removal count per normalized raw label.
    pub removed: BTreeMap<String, usize>,
}

/// Keeps items whose raw label (lowercased, trimmed) is in `allowed`.
pub fn filter_labels<T: RawLabeled>(
    items: Vec<T>,
    allowed: &BTreeSet<String>,
) -> Result<(Vec<T>, FilterReport), CorpusError> {
    if allowed.is_empty() {
        return Err(CorpusError::EmptyAllowedSet);
    }
    let allowed: BTreeSet<String> = allowed.iter().map(|l| label_key(l)).collect();
    let mut report = FilterReport::default();
    let had_items = !items.is_empty();
    let kept: Vec<T> = items
        .into_iter()
        .filter(|item| {
            let key = label_key(item.raw_label());
            if allowed.contains(&key) {
                true
            } else {
                *report.removed.entry(key).or_default() += 1;
                false
            }
        })
        .collect();
    report.kept = kept.len();
    if had_items && kept.is_empty() {
        warn!("label filter removed every record");
    }
    Ok((kept, report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<SentenceRecord>,
    pub val: Vec<SentenceRecord>,
    pub test: Vec<SentenceRecord>,
    pub split_seed: u64,
}

/// Seeded shuffle followed by contiguous train/val/test assignment.
pub fn resplit(
    records: &[SentenceRecord],
    sizes: (usize, usize, usize),
    seed: u64,
) -> Result<DatasetSplit, CorpusError> {
    let (train_n, val_n, test_n) = sizes;
    let requested = train_n + val_n + test_n;
    if requested > records.len() {
        return Err(CorpusError::InsufficientData {
            requested,
            available: records.len(),
        });
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut seed::rng(seed));
    let take = |range: std::ops::Range<usize>| -> Vec<SentenceRecord> {
        order[range].iter().map(|&i| records[i].clone()).collect()
    };
    Ok(DatasetSplit {
        train: take(0..train_n),
        val: take(train_n..train_n + val_n),
        test: take(train_n + val_n..requested),
        split_seed: seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub count: usize,
    /// Mean whitespace-token length.
    pub mean_len: f64,
    /// Population standard deviation of the token length.
    pub std_len: f64,
    pub class_counts: BTreeMap<Sentiment, usize>,
}

pub fn stats(records: &[SentenceRecord]) -> Result<CorpusStats, CorpusError> {
    if records.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let n = records.len() as f64;
    let lengths: Vec<f64> = records.iter().map(|r| r.word_count() as f64).collect();
    let mean = lengths.iter().sum::<f64>() / n;
    let var = lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
    let mut class_counts = BTreeMap::new();
    for r in records {
        *class_counts.entry(r.label).or_insert(0) += 1;
    }
    Ok(CorpusStats {
        count: records.len(),
        mean_len: mean,
        std_len: var.sqrt(),
        class_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn rec(id: &str, text: &str, label: Sentiment) -> SentenceRecord {
        SentenceRecord::natural(id, text, label)
    }

    fn with_raw(id: &str, raw: &str) -> SentenceRecord {
        let mut r = rec(id, "x", Sentiment::Neutral);
        r.meta.insert(META_RAW_LABEL.into(), raw.into());
        r
    }

    fn allowed() -> BTreeSet<String> {
        ["positive", "negative", "neutral"].map(String::from).into()
    }

    #[test]
    fn unknown_raw_label_removed() {
        let (kept, report) =
            filter_labels(vec![with_raw("a", "unknown"), with_raw("b", "positive")], &allowed()).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "b");
        assert_eq!(report.removed["unknown"], 1);
    }

    #[test]
    fn total_removal_is_empty_not_error() {
        let (kept, report) = filter_labels(
            vec![with_raw("a", "not-malayalam"), with_raw("b", "unknown_state")],
            &allowed(),
        )
        .unwrap();
        assert!(kept.is_empty());
        assert_eq!(report.removed.values().sum::<usize>(), 2);
    }

    #[test]
    fn empty_allow_set_rejected() {
        assert!(matches!(
            filter_labels(vec![with_raw("a", "x")], &BTreeSet::new()),
            Err(CorpusError::EmptyAllowedSet)
        ));
    }

    #[test]
    fn two_point_stats() {
        let s = stats(&[
            rec("1", "a b", Sentiment::Positive),
            rec("2", "a b c d", Sentiment::Negative),
        ])
        .unwrap();
        assert_eq!(s.mean_len, 3.0);
        assert_eq!(s.std_len, 1.0);
        assert_eq!(s.class_counts.values().sum::<usize>(), 2);
    }

    #[test]
    fn single_sentence_has_zero_std() {
        let s = stats(&[rec("1", "uno dos tres", Sentiment::Neutral)]).unwrap();
        assert_eq!(s.std_len, 0.0);
        assert_eq!(s.mean_len, 3.0);
    }

    #[test]
    fn empty_stats_is_error() {
        assert!(matches!(stats(&[]), Err(CorpusError::EmptyCorpus)));
    }

    fn corpus(n: usize) -> Vec<SentenceRecord> {
        (0..n)
            .map(|i| rec(&format!("r{i}"), "hola there", Sentiment::ALL[i % 3]))
            .collect()
    }

    #[test]
    fn overcommitted_split() {
        assert!(matches!(
            resplit(&corpus(10), (5, 5, 5), 1),
            Err(CorpusError::InsufficientData {
                requested: 15,
                available: 10
            })
        ));
    }

    #[test]
    fn malayalam_sized_split() {
        let records = corpus(5_600);
        let split = resplit(&records, (3_452, 1_000, 1_000), 42).unwrap();
        assert_eq!(
            (split.train.len(), split.val.len(), split.test.len()),
            (3_452, 1_000, 1_000)
        );
    }

    #[test]
    fn same_seed_same_split() {
        let records = corpus(50);
        let a = serde_json::to_string(&resplit(&records, (30, 10, 10), 9).unwrap()).unwrap();
        let b = serde_json::to_string(&resplit(&records, (30, 10, 10), 9).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = serde_json::to_string(&resplit(&records, (30, 10, 10), 10).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn filter_then_resplit_preserves_ids(
            raws in prop::collection::vec(prop::sample::select(vec!["positive", "Negative ", "unknown", "neutral", "not-malayalam"]), 0..60),
            seed in any::<u64>(),
        ) {
            let items: Vec<_> = raws.iter().enumerate().map(|(i, r)| with_raw(&format!("id{i}"), r)).collect();
            let (kept, report) = filter_labels(items, &allowed()).unwrap();
            prop_assert_eq!(report.kept + report.removed.values().sum::<usize>(), raws.len());
            let n = kept.len();
            let split = resplit(&kept, (n / 2, n / 4, n - n / 2 - n / 4), seed).unwrap();
            let mut all: Vec<String> = split.train.iter().chain(&split.val).chain(&split.test).map(|r| r.id.clone()).collect();
            let distinct: HashSet<_> = all.iter().cloned().collect();
            prop_assert_eq!(distinct.len(), all.len());
            all.sort();
            let mut expected: Vec<String> = kept.iter().map(|r| r.id.clone()).collect();
            expected.sort();
            prop_assert_eq!(all, expected);
        }

        #[test]
        fn stats_concat_is_weighted(
            a in prop::collection::vec(1usize..30, 1..20),
            b in prop::collection::vec(1usize..30, 1..20),
        ) {
            let mk = |lens: &[usize], tag: &str| -> Vec<SentenceRecord> {
                lens.iter().enumerate().map(|(i, &l)| rec(&format!("{tag}{i}"), &vec!["w"; l].join(" "), Sentiment::ALL[i % 3])).collect()
            };
            let (ra, rb) = (mk(&a, "a"), mk(&b, "b"));
            let sa = stats(&ra).unwrap();
            let sb = stats(&rb).unwrap();
            let all: Vec<_> = ra.iter().chain(&rb).cloned().collect();
            let s = stats(&all).unwrap();
            prop_assert_eq!(s.count, sa.count + sb.count);
            let weighted = (sa.mean_len * sa.count as f64 + sb.mean_len * sb.count as f64) / s.count as f64;
            prop_assert!((s.mean_len - weighted).abs() < 1e-9);
            prop_assert!(s.mean_len >= 1.0);
            prop_assert_eq!(s.class_counts.values().sum::<usize>(), s.count);
        }
    }
}
