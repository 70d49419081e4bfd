use std::fs;
use std::path::{Path, PathBuf};

use mixaug_core::metrics::render_report;
use mixaug_core::schedule::{
    gradual_plan, run_plan, single_stage_plan, PlanData, ScheduleError, TrainerResult, TrainingPlan,
};
use mixaug_core::SentenceRecord;

use super::{load_records, require_file, Ctx};
use crate::cli::{PlanArgs, TrainArgs};
use crate::config::{RunConfig, Stream};
use crate::failure::{invalid, CmdResult, Failure, ResultExt};
use crate::manifest::{write_json, write_text, ManifestBuilder};

fn classify(e: ScheduleError) -> Failure {
    match e {
        ScheduleError::InsufficientSynthetic { .. }
        | ScheduleError::InsufficientNatural { .. }
        | ScheduleError::Config(_)
        | ScheduleError::StageOutOfRange { .. } => Failure::Validation(e.into()),
        other => Failure::Runtime(other.into()),
    }
}

pub fn configure_plan(config: &mut RunConfig, args: &PlanArgs) -> CmdResult<()> {
    config.plan.clamp |= args.clamp;
    Ok(())
}

/// The gradual plan from the configuration.
pub fn augmented_plan(ctx: &Ctx, natural_n: usize, pool: usize) -> CmdResult<TrainingPlan> {
    let options = ctx.config.plan.options(ctx.seed(Stream::Plan));
    gradual_plan(natural_n, pool, &options).map_err(classify)
}

/// One stage over natural data plus `synthetic` synthetic records.
pub fn single_plan(ctx: &Ctx, natural_n: usize, synthetic: usize, pool: usize) -> CmdResult<TrainingPlan> {
    let options = ctx.config.plan.options(ctx.seed(Stream::Plan));
    single_stage_plan(natural_n, synthetic, pool, &options).map_err(classify)
}

pub fn run_plan_command(ctx: &Ctx, args: &PlanArgs) -> CmdResult<()> {
    let plan = match args.single_stage {
        Some(synthetic) => single_plan(ctx, args.natural, synthetic, args.synthetic_pool)?,
        None => augmented_plan(ctx, args.natural, args.synthetic_pool)?,
    };
    let text = serde_json::to_string_pretty(&plan).expect("plan serializes");
    match &args.out {
        Some(out) => {
            write_text(out, &format!("{text}\n"))?;
            let mut manifest = ManifestBuilder::beside("plan", args, &ctx.config, ctx.mocks, out);
            manifest.output("plan", out)?;
            manifest.write()?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

pub fn read_plan(path: &Path) -> CmdResult<TrainingPlan> {
    require_file(path, "plan")?;
    let raw = fs::read_to_string(path).invalid()?;
    let plan: TrainingPlan =
        serde_json::from_str(&raw).map_err(|e| invalid(format!("{} is not a training plan: {e}", path.display())))?;
    plan.validate().map_err(classify)?;
    Ok(plan)
}

pub struct Trained {
    pub result: TrainerResult,
    pub outputs: Vec<(String, PathBuf)>,
}

pub struct TrainInputs<'a> {
    pub natural: &'a [SentenceRecord],
    pub synthetic: &'a [SentenceRecord],
    pub val: &'a [SentenceRecord],
    pub test: Option<&'a [SentenceRecord]>,
}

/// Runs `plan` with the configured trainer in `work_dir` and writes the
/// final test report when the last stage produced predictions.
pub fn train(ctx: &Ctx, plan: &TrainingPlan, inputs: TrainInputs<'_>, work_dir: &Path) -> CmdResult<Trained> {
    let trainer = ctx.trainer();
    let data = PlanData {
        natural: inputs.natural,
        synthetic: inputs.synthetic,
        val: inputs.val,
        test: inputs.test,
    };
    let result = run_plan(plan, trainer.as_ref(), data, work_dir).map_err(classify)?;
    let mut outputs = vec![("trainer_result".to_string(), work_dir.join("trainer_result.json"))];
    if let Some(report) = &result.final_report {
        let json = work_dir.join("report.json");
        write_json(&json, report)?;
        let text = work_dir.join("report.txt");
        write_text(&text, &render_report(report))?;
        outputs.push(("report".to_string(), json));
        outputs.push(("report_text".to_string(), text));
    }
    Ok(Trained { result, outputs })
}

pub fn configure_train(config: &mut RunConfig, args: &TrainArgs) -> CmdResult<()> {
    if let Some(cmd) = &args.trainer {
        if cmd.is_empty() {
            return Err(invalid("--trainer needs a program"));
        }
        config.trainer.command = cmd.clone();
    }
    Ok(())
}

pub fn run_train(ctx: &Ctx, args: &TrainArgs) -> CmdResult<()> {
    let plan = read_plan(&args.plan)?;
    let natural = load_records(ctx, &args.natural, "natural training data")?;
    let synthetic = match &args.synthetic {
        Some(path) => load_records(ctx, path, "synthetic data")?,
        None => Vec::new(),
    };
    let val = load_records(ctx, &args.val, "validation data")?;
    let test = match &args.test {
        Some(path) => Some(load_records(ctx, path, "test data")?),
        None => None,
    };
    let out_dir = ctx.out_dir(&args.out_dir);
    let trained = train(
        ctx,
        &plan,
        TrainInputs {
            natural: &natural,
            synthetic: &synthetic,
            val: &val,
            test: test.as_deref(),
        },
        &out_dir,
    )?;

    let mut manifest = ManifestBuilder::new("train", args, &ctx.config, ctx.mocks, &out_dir);
    manifest.input("plan", &args.plan)?;
    manifest.input("natural", &args.natural)?;
    if let Some(path) = &args.synthetic {
        manifest.input("synthetic", path)?;
    }
    manifest.input("val", &args.val)?;
    if let Some(path) = &args.test {
        manifest.input("test", path)?;
    }
    for (name, path) in &trained.outputs {
        manifest.output(name, path)?;
    }
    manifest.write()?;
    for stage in &trained.result.per_stage {
        let f1 = stage
            .val_weighted_f1
            .map_or_else(|| "-".to_string(), |f| format!("{f:.4}"));
        println!("stage {} train={} val_f1={f1}", stage.index, stage.train_size);
    }
    if let Some(report) = &trained.result.final_report {
        print!("{}", render_report(report));
    }
    Ok(())
}
