//! Random-translation augmentation: turn monolingual labeled sentences into
//! synthetic code-mixed ones by machine-translating randomly chosen spans.

mod plan;
mod translator;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{stats, CorpusStats, Provenance, SentenceRecord};
use crate::seed;

pub use plan::{plan_spans, SpanMode, SpanPlan};
pub use translator::{DictionaryTranslator, HttpTranslator, TranslateError, Translator};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("input corpus is empty")]
    EmptyCorpus,
    #[error("ratio {0} is outside [0, 1]")]
    InvalidRatio(f64),
    #[error("translation failed for {id}: {source}")]
    Translation {
        id: String,
        #[source]
        source: TranslateError,
    },
}

/// Per-sentence translated-fraction distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RatioDistribution {
    Fixed { ratio: f64 },
    Uniform { low: f64, high: f64 },
}

impl Default for RatioDistribution {
    fn default() -> Self {
        RatioDistribution::Uniform { low: 0.2, high: 0.8 }
    }
}

impl RatioDistribution {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            RatioDistribution::Fixed { ratio } => ratio,
            RatioDistribution::Uniform { low, high } if high > low => rng.random_range(low..=high),
            RatioDistribution::Uniform { low, .. } => low,
        }
    }

    fn validate(&self) -> Result<(), AugmentError> {
        let (a, b) = match *self {
            RatioDistribution::Fixed { ratio } => (ratio, ratio),
            RatioDistribution::Uniform { low, high } => (low, high),
        };
        for r in [a, b] {
            if !(0.0..=1.0).contains(&r) {
                return Err(AugmentError::InvalidRatio(r));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub ratio: RatioDistribution,
    pub span_mode: SpanMode,
    pub source_lang: String,
    pub target_lang: String,
    /// Worker threads for corpus conversion; 0 uses the rayon default.
    pub workers: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            ratio: RatioDistribution::default(),
            span_mode: SpanMode::Contiguous,
            source_lang: "en".into(),
            target_lang: "es".into(),
            workers: 0,
        }
    }
}

/// Translates the planned spans of one record. Label and lineage are kept,
/// provenance becomes `synthetic-mt`.
pub fn random_translate(
    record: &SentenceRecord,
    ratio: f64,
    seed: u64,
    mode: SpanMode,
    (src, dst): (&str, &str),
    mt: &dyn Translator,
) -> Result<SentenceRecord, AugmentError> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(AugmentError::InvalidRatio(ratio));
    }
    let tokens: Vec<&str> = record.text.split_whitespace().collect();
    let plan = plan_spans(&record.id, tokens.len(), ratio, seed, mode);
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    let mut cursor = 0;
    for &(start, end) in &plan.spans {
        out.extend(tokens[cursor..start].iter().map(|t| t.to_string()));
        let span = tokens[start..end].join(" ");
        let translated = mt
            .translate(&span, src, dst)
            .map_err(|source| AugmentError::Translation {
                id: record.id.clone(),
                source,
            })?;
        out.push(translated.trim().to_string());
        cursor = end;
    }
    out.extend(tokens[cursor..].iter().map(|t| t.to_string()));

    let mut result = record.clone();
    result.id = format!("{}~mt", record.id);
    result.text = out.into_iter().filter(|t| !t.is_empty()).collect::<Vec<_>>().join(" ");
    result.provenance = Provenance::SyntheticMt;
    result.meta.insert("source_id".into(), record.id.clone());
    result.meta.insert("mt_ratio".into(), format!("{ratio:.4}"));
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionReport {
    pub converted: usize,
    pub skipped: Vec<String>,
    /// Length statistics of the converted corpus.
    pub stats: Option<CorpusStats>,
}

/// Converts every record, in input order. Records whose translation fails
/// are skipped and listed in the report.
pub fn convert_corpus(
    monolingual: &[SentenceRecord],
    config: &AugmentConfig,
    seed: u64,
    mt: &dyn Translator,
) -> Result<(Vec<SentenceRecord>, ConversionReport), AugmentError> {
    if monolingual.is_empty() {
        return Err(AugmentError::EmptyCorpus);
    }
    config.ratio.validate()?;
    let convert = || -> Vec<Result<SentenceRecord, AugmentError>> {
        monolingual
            .par_iter()
            .enumerate()
            .map(|(i, record)| {
                let record_seed = seed::mix(seed, i as u64);
                let ratio = config.ratio.sample(&mut seed::rng(record_seed));
                random_translate(
                    record,
                    ratio,
                    record_seed,
                    config.span_mode,
                    (&config.source_lang, &config.target_lang),
                    mt,
                )
            })
            .collect()
    };
    let results = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map(|pool| pool.install(convert))
            .unwrap_or_else(|_| convert())
    } else {
        convert()
    };

    let mut out = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for result in results {
        match result {
            Ok(r) => out.push(r),
            Err(AugmentError::Translation { id, source }) => {
                log::warn!("skipping {id}: {source}");
                skipped.push(id);
            }
            Err(e) => return Err(e),
        }
    }
    let report = ConversionReport {
        converted: out.len(),
        skipped,
        stats: stats(&out).ok(),
    };
    Ok((out, report))
}
