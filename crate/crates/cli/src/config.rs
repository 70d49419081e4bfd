//! The run configuration file.
//!
//! Every section has defaults, so an empty file is a valid configuration.
//! Unknown keys are rejected at parse time and value ranges are checked by
//! [`RunConfig::validate`], which reports offending fields by dotted path.

use std::collections::BTreeMap;
use std::fmt;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use mixaug_core::cost::{AnnotationCostModel, LlmCostModel};
use mixaug_core::generation::{GenerationConfig, PromptSpec, DEFAULT_INSTRUCTION};
use mixaug_core::schedule::{BaseHparams, PlanOptions};
use mixaug_core::seed;
use mixaug_core::translate::{AugmentConfig, RatioDistribution};
use mixaug_core::LangPair;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root seed; every stochastic component derives its own stream from it.
    pub seed: u64,
    pub lang_pair: LangPair,
    pub paths: PathsConfig,
    pub data: DataConfig,
    pub endpoint: EndpointConfig,
    pub generation: GenerationSection,
    pub augment: AugmentConfig,
    pub translator: TranslatorConfig,
    pub plan: PlanSection,
    pub trainer: TrainerConfig,
    pub humaneval: HumanEvalSection,
    pub cost: CostSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            lang_pair: LangPair::EsEn,
            paths: PathsConfig::default(),
            data: DataConfig::default(),
            endpoint: EndpointConfig::default(),
            generation: GenerationSection::default(),
            augment: AugmentConfig::default(),
            translator: TranslatorConfig::default(),
            plan: PlanSection::default(),
            trainer: TrainerConfig::default(),
            humaneval: HumanEvalSection::default(),
            cost: CostSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Labeled natural dataset (`.tsv`/`.txt` delimited or canonical `.jsonl`).
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Language tag -> word list, one word per line.
    pub lexicons: BTreeMap<String, PathBuf>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            input: None,
            output_dir: PathBuf::from("runs"),
            lexicons: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Raw labels kept before label mapping; empty keeps everything.
    pub allowed_labels: Vec<String>,
    /// Train/val/test sizes for resplitting.
    pub split: Option<[usize; 3]>,
    pub drop_hashtag_tokens: bool,
    pub skip_bad_rows: bool,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            allowed_labels: vec!["positive".into(), "negative".into(), "neutral".into()],
            split: None,
            drop_hashtag_tokens: false,
            skip_bad_rows: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    pub url: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    /// Use the deterministic in-process endpoint.
    pub mock: bool,
    /// Fraction of mock reply lines replaced by malformed ones.
    pub mock_malformed_rate: f64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self {
            url: "https://api.openai.com/v1/chat/completions".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            mock: false,
            mock_malformed_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSection {
    /// Number of synthetic sentences to produce.
    pub target: usize,
    /// Demonstrations per prompt.
    pub shots: usize,
    /// Sentences requested per prompt.
    pub batch_size: usize,
    pub instruction: String,
    pub model_id: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub parallelism: usize,
    pub request_timeout_secs: f64,
    pub retry_base_delay_ms: u64,
    pub retry_max_delay_ms: u64,
    pub reject_ceiling: f64,
    pub reject_window: usize,
}

impl Default for GenerationSection {
    fn default() -> Self {
        let client = GenerationConfig::default();
        let prompt = PromptSpec::default();
        Self {
            target: 50_000,
            shots: prompt.shots,
            batch_size: prompt.batch_size,
            instruction: DEFAULT_INSTRUCTION.to_string(),
            model_id: client.model_id,
            temperature: client.temperature,
            max_retries: client.max_retries,
            parallelism: client.parallelism,
            request_timeout_secs: client.request_timeout_secs,
            retry_base_delay_ms: client.retry_base_delay_ms,
            retry_max_delay_ms: client.retry_max_delay_ms,
            reject_ceiling: client.reject_ceiling,
            reject_window: client.reject_window,
        }
    }
}

impl GenerationSection {
    pub fn prompt_spec(&self, lang_pair: &LangPair) -> PromptSpec {
        PromptSpec {
            instruction: self.instruction.clone(),
            shots: self.shots,
            batch_size: self.batch_size,
            lang_pair: lang_pair.clone(),
            ..PromptSpec::default()
        }
    }

    pub fn client_config(&self, partial_path: Option<PathBuf>) -> GenerationConfig {
        GenerationConfig {
            model_id: self.model_id.clone(),
            temperature: self.temperature,
            max_retries: self.max_retries,
            parallelism: self.parallelism,
            request_timeout_secs: self.request_timeout_secs,
            retry_base_delay_ms: self.retry_base_delay_ms,
            retry_max_delay_ms: self.retry_max_delay_ms,
            reject_ceiling: self.reject_ceiling,
            reject_window: self.reject_window,
            partial_path,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TranslatorConfig {
    /// Tab-separated `word<TAB>translation` dictionary.
    pub dictionary: Option<PathBuf>,
    /// URL of an HTTP translation service.
    pub service_url: Option<String>,
    pub timeout_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSection {
    pub synth_sizes: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub epochs: u32,
    pub clamp: bool,
    pub model_id: String,
    pub base_hparams: BaseHparams,
}

impl Default for PlanSection {
    fn default() -> Self {
        let d = PlanOptions::default();
        Self {
            synth_sizes: d.synth_sizes,
            learning_rates: d.learning_rates,
            epochs: d.epochs,
            clamp: d.clamp,
            model_id: d.model_id,
            base_hparams: d.base_hparams,
        }
    }
}

impl PlanSection {
    pub fn options(&self, seed: u64) -> PlanOptions {
        PlanOptions {
            synth_sizes: self.synth_sizes.clone(),
            learning_rates: self.learning_rates.clone(),
            epochs: self.epochs,
            clamp: self.clamp,
            base_hparams: self.base_hparams.clone(),
            seed,
            model_id: self.model_id.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    /// External trainer program and leading arguments; the stage manifest
    /// path is appended. Empty selects the built-in mock trainer.
    pub command: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumanEvalSection {
    pub data_dir: PathBuf,
    pub bind: String,
    pub static_dir: Option<PathBuf>,
    /// Items drawn from each of the natural and synthetic pools.
    pub n_each: usize,
    pub annotators: Vec<String>,
}

impl Default for HumanEvalSection {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("humaneval"),
            bind: "127.0.0.1:8080".into(),
            static_dir: None,
            n_each: 50,
            annotators: vec!["annotator-1".into(), "annotator-2".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    pub mturk: AnnotationCostModel,
    pub llm: LlmCostModel,
}

impl Default for CostSection {
    fn default() -> Self {
        Self {
            // size of the annotated Spanish-English corpus
            mturk: AnnotationCostModel {
                n_sentences: 18_789,
                ..AnnotationCostModel::default()
            },
            llm: LlmCostModel::default(),
        }
    }
}

/// Named random streams derived from the root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stream {
    Split = 1,
    Generation = 2,
    MockEndpoint = 3,
    Plan = 4,
    Translate = 5,
    HumanEval = 6,
}

impl Stream {
    pub const ALL: [Stream; 6] = [
        Stream::Split,
        Stream::Generation,
        Stream::MockEndpoint,
        Stream::Plan,
        Stream::Translate,
        Stream::HumanEval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stream::Split => "split",
            Stream::Generation => "generation",
            Stream::MockEndpoint => "mock_endpoint",
            Stream::Plan => "plan",
            Stream::Translate => "translate",
            Stream::HumanEval => "humaneval",
        }
    }
}

/// One invalid field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssues(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigIssues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for issue in &self.0 {
            writeln!(f, "  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigIssues {}

impl RunConfig {
    /// Reads a TOML config file. A `.json` file is taken to be a run
    /// manifest and its resolved configuration is reused.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let raw =
            std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") {
            let mut value: serde_json::Value =
                serde_json::from_str(&raw).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            let config = value
                .get_mut("config")
                .map(serde_json::Value::take)
                .ok_or_else(|| anyhow::anyhow!("{} is not a run manifest", path.display()))?;
            return serde_json::from_value(config).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()));
        }
        Self::parse(&raw).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }

    pub fn parse(raw: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(raw)
    }

    pub fn stream_seed(&self, stream: Stream) -> u64 {
        seed::mix(self.seed, stream as u64)
    }

    pub fn stream_seeds(&self) -> BTreeMap<&'static str, u64> {
        Stream::ALL.iter().map(|s| (s.name(), self.stream_seed(*s))).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigIssues> {
        let mut issues = Vec::new();
        let mut bad = |field: &str, message: String| {
            issues.push(ConfigIssue {
                field: field.to_string(),
                message,
            })
        };

        if let Some([train, _, _]) = self.data.split {
            if train == 0 {
                bad("data.split", "the training split must not be empty".into());
            }
        }
        if self.endpoint.url.trim().is_empty() {
            bad("endpoint.url", "must not be empty".into());
        }
        if self.endpoint.api_key_env.trim().is_empty() {
            bad("endpoint.api_key_env", "must name an environment variable".into());
        }
        if !(0.0..=1.0).contains(&self.endpoint.mock_malformed_rate) {
            bad("endpoint.mock_malformed_rate", "must be in [0, 1]".into());
        }

        let g = &self.generation;
        if g.target == 0 {
            bad("generation.target", "must be at least 1".into());
        }
        if g.batch_size == 0 {
            bad("generation.batch_size", "must be at least 1".into());
        }
        if g.temperature.is_nan() || g.temperature < 0.0 {
            bad("generation.temperature", "must be >= 0".into());
        }
        if g.parallelism == 0 {
            bad("generation.parallelism", "must be at least 1".into());
        }
        if g.reject_window == 0 {
            bad("generation.reject_window", "must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&g.reject_ceiling) {
            bad("generation.reject_ceiling", "must be in [0, 1]".into());
        }
        if g.request_timeout_secs.is_nan() || g.request_timeout_secs <= 0.0 {
            bad("generation.request_timeout_secs", "must be positive".into());
        }

        match self.augment.ratio {
            RatioDistribution::Fixed { ratio } if !(0.0..=1.0).contains(&ratio) => {
                bad("augment.ratio.ratio", "must be in [0, 1]".into())
            }
            RatioDistribution::Uniform { low, high }
                if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&high) || low > high =>
            {
                bad("augment.ratio", "needs 0 <= low <= high <= 1".into())
            }
            _ => {}
        }
        if self.translator.dictionary.is_some() && self.translator.service_url.is_some() {
            bad("translator", "set either dictionary or service_url, not both".into());
        }

        let p = &self.plan;
        if p.synth_sizes.is_empty() {
            bad("plan.synth_sizes", "must list at least one stage".into());
        }
        if p.synth_sizes.len() != p.learning_rates.len() {
            bad(
                "plan.learning_rates",
                format!(
                    "has {} entries but plan.synth_sizes has {}",
                    p.learning_rates.len(),
                    p.synth_sizes.len()
                ),
            );
        }
        if p.synth_sizes.windows(2).any(|w| w[1] > w[0]) {
            bad("plan.synth_sizes", "must be non-increasing".into());
        }
        if p.synth_sizes.len() > 1 && p.synth_sizes.last() != Some(&0) {
            bad(
                "plan.synth_sizes",
                "the last stage of a gradual plan must have no synthetic data".into(),
            );
        }
        if p.learning_rates.iter().any(|lr| lr.is_nan() || *lr <= 0.0) {
            bad("plan.learning_rates", "must all be positive".into());
        }
        if p.epochs == 0 {
            bad("plan.epochs", "must be at least 1".into());
        }
        if p.model_id.trim().is_empty() {
            bad("plan.model_id", "must not be empty".into());
        }

        let h = &self.humaneval;
        if h.bind.parse::<SocketAddr>().is_err() {
            bad("humaneval.bind", format!("{:?} is not a socket address", h.bind));
        }
        if h.n_each == 0 {
            bad("humaneval.n_each", "must be at least 1".into());
        }
        if h.annotators.is_empty() {
            bad("humaneval.annotators", "must list at least one annotator".into());
        }

        let m = &self.cost.mturk;
        if m.annotated_per_hit == 0 || m.annotated_per_hit > m.per_hit {
            bad(
                "cost.mturk.annotated_per_hit",
                "must be between 1 and cost.mturk.per_hit".into(),
            );
        }
        if !(0.0..1.0).contains(&m.rejection_rate) {
            bad("cost.mturk.rejection_rate", "must be in [0, 1)".into());
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigIssues(issues))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("[generation]\nbatchsize = 10\n").unwrap_err();
        assert!(err.to_string().contains("batchsize"), "{err}");
        assert!(RunConfig::parse("colour = 1").is_err());
    }

    #[test]
    fn issues_carry_field_paths() {
        let raw = "[generation]\nbatch_size = 0\n[plan]\nsynth_sizes = [10, 5]\nlearning_rates = [1e-6]\n";
        let issues = RunConfig::parse(raw).unwrap().validate().unwrap_err();
        let fields: Vec<_> = issues.0.iter().map(|i| i.field.as_str()).collect();
        assert!(fields.contains(&"generation.batch_size"));
        assert!(fields.contains(&"plan.learning_rates"));
        assert!(fields.contains(&"plan.synth_sizes"));
    }

    #[test]
    fn streams_are_distinct() {
        let config = RunConfig::default();
        let mut seeds: Vec<_> = config.stream_seeds().into_values().collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), Stream::ALL.len());
    }
}
