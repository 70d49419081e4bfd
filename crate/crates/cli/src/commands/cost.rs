use std::fs;

use mixaug_core::cost::{
    llm_cost, llm_cost_from_usage, mturk_cost, render_llm, render_mturk, AnnotationCost, AnnotationCostModel, LlmCost,
    LlmCostModel,
};
use serde::Serialize;

use super::generate::GenerationReport;
use super::{require_file, Ctx};
use crate::cli::{LlmArgs, MturkArgs};
use crate::config::RunConfig;
use crate::failure::{invalid, CmdResult, ResultExt};
use crate::manifest::{write_json, write_text, ManifestBuilder};

#[derive(Serialize)]
struct MturkOutput<'a> {
    model: &'a AnnotationCostModel,
    cost: &'a AnnotationCost,
}

#[derive(Serialize)]
struct LlmOutput<'a> {
    /// `closed-form` or `measured`.
    mode: &'a str,
    model: &'a LlmCostModel,
    cost: &'a LlmCost,
    cents: Cents,
}

#[derive(Serialize)]
struct Cents {
    input: i64,
    output: i64,
    total: i64,
}

pub fn configure_mturk(config: &mut RunConfig, args: &MturkArgs) -> CmdResult<()> {
    let m = &mut config.cost.mturk;
    if let Some(v) = args.sentences {
        m.n_sentences = v;
    }
    if let Some(v) = args.per_hit {
        m.per_hit = v;
    }
    if let Some(v) = args.annotated_per_hit {
        m.annotated_per_hit = v;
    }
    if let Some(v) = args.price_per_hit {
        m.price_per_hit = v;
    }
    if let Some(v) = args.rejection_rate {
        m.rejection_rate = v;
    }
    if let Some(v) = args.annotators_per_item {
        m.annotators_per_item = v;
    }
    Ok(())
}

pub fn mturk(ctx: &Ctx, args: &MturkArgs) -> CmdResult<()> {
    let model = &ctx.config.cost.mturk;
    let cost = mturk_cost(model).invalid()?;
    let text = render_mturk(model, &cost);
    if let Some(dir) = &args.out_dir {
        let json = dir.join("mturk_cost.json");
        write_json(&json, &MturkOutput { model, cost: &cost })?;
        let txt = dir.join("mturk_cost.txt");
        write_text(&txt, &text)?;
        let mut manifest = ManifestBuilder::new("cost mturk", args, &ctx.config, ctx.mocks, dir);
        manifest.output("cost", &json)?;
        manifest.output("cost_text", &txt)?;
        manifest.write()?;
    }
    print!("{text}");
    Ok(())
}

pub fn configure_llm(config: &mut RunConfig, args: &LlmArgs) -> CmdResult<()> {
    let m = &mut config.cost.llm;
    if let Some(v) = args.instruction_tokens {
        m.instruction_tokens = v;
    }
    if let Some(v) = args.demos {
        m.demos = v;
    }
    if let Some(v) = args.demo_tokens {
        m.demo_tokens_avg = v;
    }
    if let Some(v) = args.out_examples {
        m.out_examples = v;
    }
    if let Some(v) = args.out_tokens {
        m.out_tokens_avg = v;
    }
    if let Some(v) = args.requests {
        m.requests = v;
    }
    if let Some(v) = args.price_in {
        m.price_in = v;
    }
    if let Some(v) = args.price_out {
        m.price_out = v;
    }
    Ok(())
}

pub fn llm(ctx: &Ctx, args: &LlmArgs) -> CmdResult<()> {
    let model = &ctx.config.cost.llm;
    let (mode, cost) = match &args.usage {
        Some(path) => {
            require_file(path, "generation report")?;
            let raw = fs::read_to_string(path).invalid()?;
            let report: GenerationReport = serde_json::from_str(&raw)
                .map_err(|e| invalid(format!("{} is not a generation report: {e}", path.display())))?;
            let usage = report.job.token_usage;
            let cost = llm_cost_from_usage(
                usage.input_tokens,
                usage.output_tokens,
                report.job.requests_sent as u64,
                model.price_in,
                model.price_out,
            );
            ("measured", cost)
        }
        None => ("closed-form", llm_cost(model).invalid()?),
    };
    if !(cost.total.is_finite()) {
        return Err(invalid("cost is not finite"));
    }
    let text = render_llm(&cost);
    if let Some(dir) = &args.out_dir {
        let json = dir.join("llm_cost.json");
        let cents = Cents {
            input: LlmCost::cents(cost.input_cost),
            output: LlmCost::cents(cost.output_cost),
            total: LlmCost::cents(cost.total),
        };
        write_json(
            &json,
            &LlmOutput {
                mode,
                model,
                cost: &cost,
                cents,
            },
        )?;
        let txt = dir.join("llm_cost.txt");
        write_text(&txt, &text)?;
        let mut manifest = ManifestBuilder::new("cost llm", args, &ctx.config, ctx.mocks, dir);
        if let Some(path) = &args.usage {
            manifest.input("usage", path)?;
        }
        manifest.output("cost", &json)?;
        manifest.output("cost_text", &txt)?;
        manifest.write()?;
    }
    print!("{text}");
    Ok(())
}
