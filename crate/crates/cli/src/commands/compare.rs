use std::fs;
use std::path::{Path, PathBuf};

use mixaug_core::metrics::{render_comparison, ComparisonRow};
use serde_json::Value;

use super::{require_file, Ctx};
use crate::cli::CompareArgs;
use crate::failure::{invalid, CmdResult, ResultExt};
use crate::manifest::{write_json, write_text, ManifestBuilder};

/// Reads `weighted_f1` from an evaluation report, or from the `final`
/// section of a trainer result.
pub fn read_weighted_f1(path: &Path) -> CmdResult<f64> {
    require_file(path, "report")?;
    let raw = fs::read_to_string(path).invalid()?;
    let value: Value =
        serde_json::from_str(&raw).map_err(|e| invalid(format!("{} is not JSON: {e}", path.display())))?;
    value
        .get("weighted_f1")
        .or_else(|| value.get("final").and_then(|f| f.get("weighted_f1")))
        .and_then(Value::as_f64)
        .ok_or_else(|| invalid(format!("{} has no weighted_f1", path.display())))
}

pub fn comparison(name: &str, baseline: f64, augmented: f64) -> CmdResult<ComparisonRow> {
    ComparisonRow::new(name, baseline, augmented).map_err(invalid)
}

/// Writes `comparison.json` and `comparison.txt` into `dir`.
pub fn write_comparison(dir: &Path, rows: &[ComparisonRow]) -> CmdResult<Vec<(String, PathBuf)>> {
    let json = dir.join("comparison.json");
    write_json(&json, &rows)?;
    let text = dir.join("comparison.txt");
    write_text(&text, &render_comparison(rows))?;
    Ok(vec![
        ("comparison".to_string(), json),
        ("comparison_text".to_string(), text),
    ])
}

fn side(file: &Option<PathBuf>, value: Option<f64>, what: &str) -> CmdResult<f64> {
    match (file, value) {
        (Some(path), _) => read_weighted_f1(path),
        (None, Some(v)) => Ok(v),
        (None, None) => Err(invalid(format!("missing {what}: pass a report file or --{what}-f1"))),
    }
}

pub fn run(ctx: &Ctx, args: &CompareArgs) -> CmdResult<()> {
    let baseline = side(&args.baseline, args.baseline_f1, "baseline")?;
    let augmented = side(&args.augmented, args.augmented_f1, "augmented")?;
    let row = comparison(&args.name, baseline, augmented)?;
    let rows = [row];
    if let Some(dir) = &args.out_dir {
        let outputs = write_comparison(dir, &rows)?;
        let mut manifest = ManifestBuilder::new("compare", args, &ctx.config, ctx.mocks, dir);
        for (name, path) in [("baseline", &args.baseline), ("augmented", &args.augmented)] {
            if let Some(path) = path {
                manifest.input(name, path)?;
            }
        }
        for (name, path) in &outputs {
            manifest.output(name, path)?;
        }
        manifest.write()?;
    }
    print!("{}", render_comparison(&rows));
    Ok(())
}
