use std::collections::HashMap;
use std::path::{Path, PathBuf};

use mixaug_core::generation::{zero_shot_predict, GenerationError};
use mixaug_core::metrics::{classification_report, render_report, EvalReport, Predicted};
use mixaug_core::schedule::{read_predictions, write_predictions, PredictionLine};
use mixaug_core::{SentenceRecord, Sentiment};

use super::{load_records, require_file, Ctx};
use crate::cli::EvaluateArgs;
use crate::failure::{invalid, CmdResult, Failure};
use crate::manifest::{write_json, write_text, ManifestBuilder};

/// Scores `predictions` against `gold`. Gold records without a prediction
/// count as invalid.
pub fn score(gold: &[SentenceRecord], predictions: &[PredictionLine]) -> CmdResult<EvalReport> {
    let by_id: HashMap<&str, Predicted<Sentiment>> =
        predictions.iter().map(|p| (p.id.as_str(), p.prediction())).collect();
    let missing = gold.iter().filter(|r| !by_id.contains_key(r.id.as_str())).count();
    if missing > 0 {
        log::warn!("{missing} gold records have no prediction");
    }
    let y_true: Vec<Sentiment> = gold.iter().map(|r| r.label).collect();
    let y_pred: Vec<Predicted<Sentiment>> = gold
        .iter()
        .map(|r| by_id.get(r.id.as_str()).cloned().unwrap_or(Predicted::Invalid))
        .collect();
    classification_report(&y_true, &y_pred, &Sentiment::ALL).map_err(invalid)
}

/// Writes `report.json` and `report.txt` under `dir` with the given stem.
pub fn write_report(dir: &Path, stem: &str, report: &EvalReport) -> CmdResult<Vec<(String, PathBuf)>> {
    let json = dir.join(format!("{stem}.json"));
    write_json(&json, report)?;
    let text = dir.join(format!("{stem}.txt"));
    write_text(&text, &render_report(report))?;
    Ok(vec![(stem.to_string(), json), (format!("{stem}_text"), text)])
}

pub fn run(ctx: &Ctx, args: &EvaluateArgs) -> CmdResult<()> {
    let gold = load_records(ctx, &args.gold, "gold dataset")?;
    let out_dir = ctx.out_dir(&args.out_dir);
    let mut outputs = Vec::new();
    let predictions = if args.zero_shot {
        let endpoint = ctx.endpoint()?;
        let client = ctx.config.generation.client_config(None);
        let outcome = zero_shot_predict(&gold, &client, endpoint.as_ref()).map_err(|e| match e {
            GenerationError::Config(_) => Failure::Validation(e.into()),
            other => Failure::Runtime(other.into()),
        })?;
        if outcome.invalid > 0 {
            log::warn!("{} replies did not name a single label", outcome.invalid);
        }
        let lines: Vec<PredictionLine> = outcome
            .predictions
            .iter()
            .map(|p| PredictionLine {
                id: p.id.clone(),
                label: p.prediction.label().copied(),
            })
            .collect();
        let path = out_dir.join("predictions.jsonl");
        write_predictions(&path, &lines)?;
        outputs.push(("predictions".to_string(), path));
        lines
    } else {
        let path = args.predictions.as_ref().expect("clap requires predictions");
        require_file(path, "predictions")?;
        read_predictions(path).map_err(invalid)?
    };

    let report = score(&gold, &predictions)?;
    outputs.extend(write_report(&out_dir, "report", &report)?);
    let mut manifest = ManifestBuilder::new("evaluate", args, &ctx.config, ctx.mocks, &out_dir);
    manifest.input("gold", &args.gold)?;
    if let Some(path) = &args.predictions {
        manifest.input("predictions", path)?;
    }
    for (name, path) in &outputs {
        manifest.output(name, path)?;
    }
    manifest.write()?;
    print!("{}", render_report(&report));
    Ok(())
}
