use std::path::{Path, PathBuf};

use mixaug_core::corpus::write_dataset;
use mixaug_core::cost::{llm_cost_from_usage, LlmCost};
use mixaug_core::generation::{run_generation, GenerationError, GenerationJob};
use mixaug_core::SentenceRecord;
use serde::{Deserialize, Serialize};

use super::{load_records, Ctx};
use crate::cli::GenerateArgs;
use crate::config::{RunConfig, Stream};
use crate::failure::{CmdResult, Failure};
use crate::manifest::{write_json, ManifestBuilder};

/// Written as `generation.json` next to the synthetic data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationReport {
    pub job: GenerationJob,
    pub model_id: String,
    /// Measured usage priced at the configured rates.
    pub cost: LlmCost,
}

pub fn configure(config: &mut RunConfig, args: &GenerateArgs) -> CmdResult<()> {
    let g = &mut config.generation;
    if let Some(v) = args.target {
        g.target = v;
    }
    if let Some(v) = args.batch_size {
        g.batch_size = v;
    }
    if let Some(v) = args.shots {
        g.shots = v;
    }
    if let Some(v) = args.temperature {
        g.temperature = v;
    }
    if let Some(v) = &args.model {
        g.model_id = v.clone();
    }
    if let Some(v) = args.malformed_rate {
        config.endpoint.mock_malformed_rate = v;
    }
    Ok(())
}

fn classify(e: GenerationError) -> Failure {
    match e {
        GenerationError::InsufficientDemonstrations { .. } | GenerationError::Config(_) => {
            Failure::Validation(e.into())
        }
        other => Failure::Runtime(other.into()),
    }
}

pub struct Generated {
    pub records: Vec<SentenceRecord>,
    pub report: GenerationReport,
    pub outputs: Vec<(String, PathBuf)>,
}

pub fn generate(ctx: &Ctx, train: &[SentenceRecord], out_dir: &Path) -> CmdResult<Generated> {
    let cfg = &ctx.config;
    let endpoint = ctx.endpoint()?;
    let spec = cfg.generation.prompt_spec(&cfg.lang_pair);
    let client = cfg
        .generation
        .client_config(Some(out_dir.join("synthetic.partial.jsonl")));
    let mut job = GenerationJob::new(cfg.generation.target, ctx.seed(Stream::Generation));
    let records = run_generation(&mut job, &spec, &client, train, endpoint.as_ref()).map_err(classify)?;

    let llm = &cfg.cost.llm;
    let cost = llm_cost_from_usage(
        job.token_usage.input_tokens,
        job.token_usage.output_tokens,
        job.requests_sent as u64,
        llm.price_in,
        llm.price_out,
    );
    let report = GenerationReport {
        job,
        model_id: client.model_id.clone(),
        cost,
    };
    let data_path = out_dir.join("synthetic.jsonl");
    write_dataset(&data_path, &records)?;
    let report_path = out_dir.join("generation.json");
    write_json(&report_path, &report)?;
    log::info!(
        "generated {} sentences in {} requests ({} rejected lines)",
        report.job.produced,
        report.job.requests_sent,
        report.job.rejected_lines
    );
    Ok(Generated {
        records,
        report,
        outputs: vec![
            ("synthetic".to_string(), data_path),
            ("generation_report".to_string(), report_path),
        ],
    })
}

pub fn run(ctx: &Ctx, args: &GenerateArgs) -> CmdResult<()> {
    let train = load_records(ctx, &args.train, "training data")?;
    let out_dir = ctx.out_dir(&args.out_dir);
    let generated = generate(ctx, &train, &out_dir)?;
    let mut manifest = ManifestBuilder::new("generate", args, &ctx.config, ctx.mocks, &out_dir);
    manifest.input("train", &args.train)?;
    for (name, path) in &generated.outputs {
        manifest.output(name, path)?;
    }
    manifest.write()?;
    println!("{}", generated.outputs[0].1.display());
    Ok(())
}
