use std::path::{Path, PathBuf};

use mixaug_core::metrics::render_comparison;

use super::{data, evaluate, generate, load_lexicons, train, Ctx};
use crate::cli::PipelineArgs;
use crate::config::RunConfig;
use crate::failure::{invalid, CmdResult, Failure};
use crate::fixtures;
use crate::manifest::{write_json, write_text, ManifestBuilder};

pub fn configure(config: &mut RunConfig, args: &PipelineArgs) -> CmdResult<()> {
    if let Some(input) = &args.input {
        config.paths.input = Some(input.clone());
    }
    if config.data.split.is_none() {
        return Err(invalid(
            "data.split: the pipeline needs train/val/test sizes (e.g. split = [200, 50, 50])",
        ));
    }
    Ok(())
}

/// Unpacks the bundled fixture and lexicons into `dir`.
fn unpack_fixture(dir: &Path) -> CmdResult<(PathBuf, Vec<(String, PathBuf)>)> {
    let input = dir.join("es_en_300.tsv");
    write_text(&input, fixtures::ES_EN_300)?;
    let mut lexicons = Vec::new();
    for (lang, text) in [("en", fixtures::LEXICON_EN), ("es", fixtures::LEXICON_ES)] {
        let path = dir.join(format!("lexicon_{lang}.txt"));
        write_text(&path, text)?;
        lexicons.push((lang.to_string(), path));
    }
    Ok((input, lexicons))
}

pub fn run(ctx: &Ctx, args: &PipelineArgs) -> CmdResult<()> {
    let out_dir = ctx.out_dir(&args.out_dir);
    let mut outputs: Vec<(String, PathBuf)> = Vec::new();

    let (input, lexicon_paths) = match &ctx.config.paths.input {
        Some(path) => (path.clone(), ctx.config.paths.lexicons.clone().into_iter().collect()),
        None => {
            let (input, lexicons) = unpack_fixture(&out_dir.join("input"))?;
            outputs.push(("fixture".into(), input.clone()));
            (input, lexicons)
        }
    };

    let prepared = data::prepare(ctx, &input, &out_dir.join("data"))?;
    outputs.extend(prepared.outputs.iter().map(|(n, p)| (format!("data.{n}"), p.clone())));
    let split = prepared.split.expect("configure requires a split");

    let lexicons = load_lexicons(
        lexicon_paths
            .iter()
            .map(|(k, v): &(String, PathBuf)| (k.clone(), v.as_path())),
    )?;
    let stats = data::compute_stats(&split.train, &lexicons)?;
    let stats_path = out_dir.join("data/stats.json");
    write_json(&stats_path, &stats)?;
    outputs.push(("data.stats".into(), stats_path));

    let generated = generate::generate(ctx, &split.train, &out_dir.join("synthetic"))?;
    outputs.extend(
        generated
            .outputs
            .iter()
            .map(|(n, p)| (format!("synthetic.{n}"), p.clone())),
    );

    let natural_n = split.train.len();
    let baseline_plan = train::single_plan(ctx, natural_n, 0, 0)?;
    let augmented_plan = train::augmented_plan(ctx, natural_n, generated.records.len())?;
    let mut reports = Vec::new();
    for (name, plan, synthetic) in [
        ("baseline", &baseline_plan, &[][..]),
        ("augmented", &augmented_plan, &generated.records[..]),
    ] {
        let plan_path = out_dir.join(format!("plans/{name}.json"));
        write_json(&plan_path, plan)?;
        outputs.push((format!("plans.{name}"), plan_path));

        let trained = train::train(
            ctx,
            plan,
            train::TrainInputs {
                natural: &split.train,
                synthetic,
                val: &split.val,
                test: Some(&split.test),
            },
            &out_dir.join(format!("train/{name}")),
        )?;
        outputs.extend(
            trained
                .outputs
                .iter()
                .map(|(n, p)| (format!("train.{name}.{n}"), p.clone())),
        );
        let report = trained
            .result
            .final_report
            .ok_or_else(|| Failure::Runtime(anyhow::anyhow!("the {name} run produced no test predictions")))?;
        for (n, p) in evaluate::write_report(&out_dir.join("reports"), name, &report)? {
            outputs.push((format!("reports.{n}"), p));
        }
        reports.push(report);
    }

    let row_name = format!("{} {}", ctx.config.lang_pair, ctx.config.plan.model_id);
    let row = super::compare::comparison(&row_name, reports[0].weighted_f1, reports[1].weighted_f1)?;
    let rows = [row];
    for (n, p) in super::compare::write_comparison(&out_dir.join("reports"), &rows)? {
        outputs.push((format!("reports.{n}"), p));
    }

    let mut manifest = ManifestBuilder::new("pipeline", args, &ctx.config, ctx.mocks, &out_dir);
    if ctx.config.paths.input.is_some() {
        manifest.input("dataset", &input)?;
    }
    for (name, path) in &outputs {
        manifest.output(name, path)?;
    }
    manifest.write()?;
    print!("{}", render_comparison(&rows));
    Ok(())
}
