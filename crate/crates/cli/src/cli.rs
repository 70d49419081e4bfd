use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "mixaug",
    version,
    about = "Synthetic data augmentation for code-mixed sentiment analysis"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Root seed for every stochastic component.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Use the deterministic mock endpoint and the mock trainer.
    #[arg(long, global = true)]
    pub mock: bool,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a labeled dataset and optionally resplit it.
    Preprocess(PreprocessArgs),
    /// Print corpus and code-mixing statistics.
    Stats(StatsArgs),
    /// Generate synthetic sentences from few-shot prompts.
    Generate(GenerateArgs),
    /// Augment monolingual sentences by random span translation.
    Translate(TranslateArgs),
    /// Build a training plan.
    Plan(PlanArgs),
    /// Run a training plan through a trainer.
    Train(TrainArgs),
    /// Score predictions, or classify zero-shot with the endpoint.
    Evaluate(EvaluateArgs),
    /// Compare a baseline and an augmented run.
    Compare(CompareArgs),
    /// Blinded human evaluation sessions.
    #[command(subcommand)]
    Humaneval(HumanevalCommand),
    /// Annotation versus generation cost.
    #[command(subcommand)]
    Cost(CostCommand),
    /// Preprocess, generate, plan, train, evaluate and compare in one go.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PreprocessArgs {
    /// Dataset to clean; defaults to paths.input.
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    /// Output directory; defaults to paths.output_dir.
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
    /// Train,val,test sizes, e.g. 200,50,50.
    #[arg(long, value_delimiter = ',')]
    pub split: Option<Vec<usize>>,
    /// Raw labels to keep, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub allowed_labels: Option<Vec<String>>,
    /// Remove whole hashtag and mention tokens.
    #[arg(long)]
    pub drop_hashtags: bool,
    /// Skip malformed rows instead of failing.
    #[arg(long)]
    pub skip_bad_rows: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    /// Canonical dataset file.
    pub input: PathBuf,
    /// Language lexicon as LANG=FILE; repeatable. Defaults to paths.lexicons.
    #[arg(long = "lexicon", value_name = "LANG=FILE")]
    pub lexicons: Vec<String>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// Natural training data used for demonstrations.
    #[arg(short, long)]
    pub train: PathBuf,
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub model: Option<String>,
    /// Malformed-line rate of the mock endpoint.
    #[arg(long)]
    pub malformed_rate: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct TranslateArgs {
    /// Monolingual canonical dataset.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
    /// Word dictionary, `word<TAB>translation` per line.
    #[arg(long, conflicts_with = "service")]
    pub dictionary: Option<PathBuf>,
    /// HTTP translation service URL.
    #[arg(long)]
    pub service: Option<String>,
    /// Translate this fixed fraction of each sentence.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Span layout: contiguous or per-token.
    #[arg(long)]
    pub span_mode: Option<String>,
    #[arg(long)]
    pub source_lang: Option<String>,
    #[arg(long)]
    pub target_lang: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct PlanArgs {
    /// Natural training records available.
    #[arg(long)]
    pub natural: usize,
    /// Synthetic records available.
    #[arg(long, default_value_t = 0)]
    pub synthetic_pool: usize,
    /// Build a one-stage plan with this many synthetic records.
    #[arg(long)]
    pub single_stage: Option<usize>,
    /// Shrink stage sizes to the pool instead of failing.
    #[arg(long)]
    pub clamp: bool,
    /// Write the plan here instead of standard output.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub plan: PathBuf,
    /// Natural training data.
    #[arg(long)]
    pub natural: PathBuf,
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    #[arg(long)]
    pub val: PathBuf,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
    /// External trainer command; overrides trainer.command.
    #[arg(long, num_args = 1.., allow_hyphen_values = true)]
    pub trainer: Option<Vec<String>>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Gold-labeled canonical dataset.
    #[arg(long)]
    pub gold: PathBuf,
    /// Predictions, one `{"id", "label"}` object per line.
    #[arg(long, required_unless_present = "zero_shot")]
    pub predictions: Option<PathBuf>,
    /// Classify the gold texts with the endpoint instead.
    #[arg(long, conflicts_with = "predictions")]
    pub zero_shot: bool,
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Baseline report (any JSON with weighted_f1).
    pub baseline: Option<PathBuf>,
    /// Augmented report.
    pub augmented: Option<PathBuf>,
    #[arg(long, conflicts_with = "baseline")]
    pub baseline_f1: Option<f64>,
    #[arg(long, conflicts_with = "augmented")]
    pub augmented_f1: Option<f64>,
    /// Row label.
    #[arg(long, default_value = "run")]
    pub name: String,
    /// Also write comparison files into this directory.
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum HumanevalCommand {
    /// Sample a blinded session from natural and synthetic pools.
    Create(HumanevalCreateArgs),
    /// Serve the annotation API and static assets.
    Serve(HumanevalServeArgs),
    /// Export a session as line-delimited JSON.
    Export(HumanevalExportArgs),
    /// Aggregate judgments into percentages and agreement.
    Report(HumanevalReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct HumanevalCreateArgs {
    #[arg(long)]
    pub session: String,
    #[arg(long)]
    pub natural: PathBuf,
    #[arg(long)]
    pub synthetic: PathBuf,
    #[arg(long)]
    pub n_each: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub annotators: Option<Vec<String>>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct HumanevalServeArgs {
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub bind: Option<String>,
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct HumanevalExportArgs {
    #[arg(long)]
    pub session: String,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct HumanevalReportArgs {
    #[arg(long, required_unless_present = "from_export")]
    pub session: Option<String>,
    /// Recompute from an export file instead of the live store.
    #[arg(long)]
    pub from_export: Option<PathBuf>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CostCommand {
    /// Crowd annotation cost from HIT arithmetic.
    Mturk(MturkArgs),
    /// Generation cost from token arithmetic.
    Llm(LlmArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct MturkArgs {
    #[arg(long)]
    pub sentences: Option<u64>,
    #[arg(long)]
    pub per_hit: Option<u64>,
    #[arg(long)]
    pub annotated_per_hit: Option<u64>,
    #[arg(long)]
    pub price_per_hit: Option<f64>,
    #[arg(long)]
    pub rejection_rate: Option<f64>,
    #[arg(long)]
    pub annotators_per_item: Option<u64>,
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LlmArgs {
    #[arg(long)]
    pub instruction_tokens: Option<f64>,
    #[arg(long)]
    pub demos: Option<u64>,
    #[arg(long)]
    pub demo_tokens: Option<f64>,
    #[arg(long)]
    pub out_examples: Option<u64>,
    #[arg(long)]
    pub out_tokens: Option<f64>,
    #[arg(long)]
    pub requests: Option<u64>,
    /// Price per million input tokens.
    #[arg(long)]
    pub price_in: Option<f64>,
    /// Price per million output tokens.
    #[arg(long)]
    pub price_out: Option<f64>,
    /// Price the measured usage of a generation report instead.
    #[arg(long)]
    pub usage: Option<PathBuf>,
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PipelineArgs {
    /// Natural dataset; defaults to paths.input, then the bundled fixture.
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
}
