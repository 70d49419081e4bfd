use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed;

/// How translated tokens are grouped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpanMode {
    /// One to three contiguous, non-adjacent spans.
    #[default]
    Contiguous,
    /// Independently chosen tokens; adjacent picks merge into one span.
    PerToken,
}

const MAX_SPANS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanPlan {
    pub sentence_id: String,
    /// Half-open token ranges, sorted and non-overlapping.
    pub spans: Vec<(usize, usize)>,
    pub ratio: f64,
    pub seed: u64,
}

impl SpanPlan {
    pub fn translated_tokens(&self) -> usize {
        self.spans.iter().map(|(s, e)| e - s).sum()
    }
}

/// Chooses `round(ratio * n_tokens)` tokens to translate.
pub fn plan_spans(id: &str, n_tokens: usize, ratio: f64, seed: u64, mode: SpanMode) -> SpanPlan {
    let k = ((ratio.clamp(0.0, 1.0) * n_tokens as f64).round() as usize).min(n_tokens);
    let mut rng = seed::rng(seed);
    let spans = match mode {
        _ if k == 0 => Vec::new(),
        _ if k == n_tokens => vec![(0, n_tokens)],
        SpanMode::Contiguous => contiguous(&mut rng, n_tokens, k),
        SpanMode::PerToken => {
            let mut picks = index::sample(&mut rng, n_tokens, k).into_vec();
            picks.sort_unstable();
            merge(&picks)
        }
    };
    SpanPlan {
        sentence_id: id.to_string(),
        spans,
        ratio,
        seed,
    }
}

fn contiguous(rng: &mut impl Rng, n: usize, k: usize) -> Vec<(usize, usize)> {
    let free = n - k;
    // interior gaps need at least one untranslated token each
    let max_spans = MAX_SPANS.min(k).min(free + 1);
    let s = rng.random_range(1..=max_spans);
    let lengths = compose(rng, k, s);
    // distribute the untranslated tokens over s + 1 gaps, interior ones >= 1
    let extra = free - (s - 1);
    let mut gaps = vec![0usize; s + 1];
    for _ in 0..extra {
        gaps[rng.random_range(0..=s)] += 1;
    }
    for g in gaps.iter_mut().take(s).skip(1) {
        *g += 1;
    }
    let mut spans = Vec::with_capacity(s);
    let mut pos = 0;
    for (len, gap) in lengths.into_iter().zip(gaps) {
        pos += gap;
        spans.push((pos, pos + len));
        pos += len;
    }
    spans
}

/// Random composition of `total` into `parts` positive integers.
fn compose(rng: &mut impl Rng, total: usize, parts: usize) -> Vec<usize> {
    let mut cuts = index::sample(rng, total - 1, parts - 1).into_vec();
    cuts.iter_mut().for_each(|c| *c += 1);
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(parts);
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(total - prev);
    out
}

fn merge(sorted: &[usize]) -> Vec<(usize, usize)> {
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for &i in sorted {
        match spans.last_mut() {
            Some((_, end)) if *end == i => *end += 1,
            _ => spans.push((i, i + 1)),
        }
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints() {
        assert!(plan_spans("x", 6, 0.0, 1, SpanMode::Contiguous).spans.is_empty());
        assert_eq!(plan_spans("x", 6, 1.0, 1, SpanMode::Contiguous).spans, vec![(0, 6)]);
        assert!(plan_spans("x", 0, 0.5, 1, SpanMode::Contiguous).spans.is_empty());
    }

    #[test]
    fn per_token_merges_neighbours() {
        assert_eq!(merge(&[0, 1, 3, 5, 6, 7]), vec![(0, 2), (3, 4), (5, 8)]);
    }

    proptest! {
        #[test]
        fn spans_are_well_formed(
            n in 0usize..40,
            ratio in 0.0f64..=1.0,
            seed in any::<u64>(),
            per_token in any::<bool>(),
        ) {
            let mode = if per_token { SpanMode::PerToken } else { SpanMode::Contiguous };
            let plan = plan_spans("p", n, ratio, seed, mode);
            let k = (ratio * n as f64).round() as usize;
            prop_assert_eq!(plan.translated_tokens(), k);
            for w in plan.spans.windows(2) {
                prop_assert!(w[0].1 < w[1].0, "spans must not touch: {:?}", plan.spans);
            }
            for &(s, e) in &plan.spans {
                prop_assert!(s < e && e <= n);
            }
            if mode == SpanMode::Contiguous {
                prop_assert!(plan.spans.len() <= MAX_SPANS);
            }
            prop_assert_eq!(plan_spans("p", n, ratio, seed, mode), plan);
        }
    }
}
