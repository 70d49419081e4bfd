use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mixaug_core::corpus::{
    filter_labels, load_dataset, preprocess, read_delimited_rows, resplit, rows_into_records, stats, write_dataset,
    Cleaned, CorpusStats, DatasetFormat, DatasetSplit, FilterReport, LoadOptions, PreprocessOptions,
};
use mixaug_core::emoji::EmojiTable;
use mixaug_core::metrics::{cm_stats, CMPatternStats};
use mixaug_core::SentenceRecord;
use serde::Serialize;

use super::{load_lexicons, load_records, parse_lexicon_flag, require_file, Ctx};
use crate::cli::{PreprocessArgs, StatsArgs};
use crate::config::{RunConfig, Stream};
use crate::failure::{invalid, CmdResult, ResultExt};
use crate::manifest::{write_json, ManifestBuilder};

#[derive(Debug, Serialize)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct PreprocessReport {
    pub loaded: usize,
    pub label_filter: Option<FilterReport>,
    /// Records whose text was empty after cleaning.
    pub dropped_empty: Vec<String>,
    pub kept: usize,
    pub stats: Option<CorpusStats>,
    pub split: Option<SplitSizes>,
}

pub struct Prepared {
    pub records: Vec<SentenceRecord>,
    pub split: Option<DatasetSplit>,
    pub outputs: Vec<(String, PathBuf)>,
}

pub fn configure(config: &mut RunConfig, args: &PreprocessArgs) -> CmdResult<()> {
    if let Some(split) = &args.split {
        let [train, val, test] = split[..] else {
            return Err(invalid("--split takes three sizes: train,val,test"));
        };
        config.data.split = Some([train, val, test]);
    }
    if let Some(labels) = &args.allowed_labels {
        config.data.allowed_labels = labels.clone();
    }
    config.data.drop_hashtag_tokens |= args.drop_hashtags;
    config.data.skip_bad_rows |= args.skip_bad_rows;
    if let Some(input) = &args.input {
        config.paths.input = Some(input.clone());
    }
    Ok(())
}

/// Loads, label-filters and cleans `input`, then resplits it when the
/// configuration asks for it. Files go to `out_dir`.
pub fn prepare(ctx: &Ctx, input: &Path, out_dir: &Path) -> CmdResult<Prepared> {
    require_file(input, "input dataset")?;
    let data = &ctx.config.data;
    let allowed = ctx.allowed_labels();
    let (loaded, records, label_filter) = match DatasetFormat::from_path(input) {
        DatasetFormat::DelimitedText => {
            let rows = read_delimited_rows(input, data.skip_bad_rows).invalid()?;
            let loaded = rows.len();
            let (rows, report) = match &allowed {
                Some(allowed) => {
                    let (kept, report) = filter_labels(rows, allowed).invalid()?;
                    (kept, Some(report))
                }
                None => (rows, None),
            };
            let records = rows_into_records(input, rows, &ctx.config.lang_pair, data.skip_bad_rows).invalid()?;
            (loaded, records, report)
        }
        DatasetFormat::CanonicalJsonl => {
            let options = LoadOptions {
                allowed_raw_labels: None,
                ..ctx.load_options()
            };
            let records = load_dataset(input, DatasetFormat::CanonicalJsonl, &options).invalid()?;
            let loaded = records.len();
            match &allowed {
                Some(allowed) => {
                    let (kept, report) = filter_labels(records, allowed).invalid()?;
                    (loaded, kept, Some(report))
                }
                None => (loaded, records, None),
            }
        }
    };

    let options = PreprocessOptions {
        emoji: EmojiTable::bundled(),
        drop_hashtag_tokens: data.drop_hashtag_tokens,
    };
    let mut kept = Vec::with_capacity(records.len());
    let mut dropped_empty = Vec::new();
    for record in records {
        match preprocess(record, &options) {
            Cleaned::Kept(r) => kept.push(r),
            Cleaned::Dropped { id } => dropped_empty.push(id),
        }
    }
    if kept.is_empty() {
        return Err(invalid(format!("{} has no usable records", input.display())));
    }

    let mut outputs = Vec::new();
    let clean_path = out_dir.join("clean.jsonl");
    write_dataset(&clean_path, &kept)?;
    outputs.push(("clean".to_string(), clean_path));

    let split = match data.split {
        Some([train, val, test]) => {
            let seed = ctx.seed(Stream::Split);
            let split = resplit(&kept, (train, val, test), seed).invalid()?;
            for (name, part) in [("train", &split.train), ("val", &split.val), ("test", &split.test)] {
                let path = out_dir.join(format!("{name}.jsonl"));
                write_dataset(&path, part)?;
                outputs.push((name.to_string(), path));
            }
            Some(split)
        }
        None => None,
    };

    let report = PreprocessReport {
        loaded,
        label_filter,
        dropped_empty,
        kept: kept.len(),
        stats: stats(&kept).ok(),
        split: split.as_ref().map(|s| SplitSizes {
            train: s.train.len(),
            val: s.val.len(),
            test: s.test.len(),
            seed: s.split_seed,
        }),
    };
    let report_path = out_dir.join("preprocess_report.json");
    write_json(&report_path, &report)?;
    outputs.push(("preprocess_report".to_string(), report_path));
    log::info!(
        "preprocessed {}: {} loaded, {} kept",
        input.display(),
        report.loaded,
        report.kept
    );
    Ok(Prepared {
        records: kept,
        split,
        outputs,
    })
}

pub fn run_preprocess(ctx: &Ctx, args: &PreprocessArgs) -> CmdResult<()> {
    let input = ctx
        .config
        .paths
        .input
        .clone()
        .ok_or_else(|| invalid("no input dataset: pass --input or set paths.input"))?;
    let out_dir = ctx.out_dir(&args.out_dir);
    let prepared = prepare(ctx, &input, &out_dir)?;
    let mut manifest = ManifestBuilder::new("preprocess", args, &ctx.config, ctx.mocks, &out_dir);
    manifest.input("dataset", &input)?;
    for (name, path) in &prepared.outputs {
        manifest.output(name, path)?;
    }
    manifest.write()?;
    println!("{}", out_dir.display());
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct StatsReport {
    pub corpus: CorpusStats,
    pub codemix: Option<CMPatternStats>,
}

pub fn compute_stats(records: &[SentenceRecord], lexicons: &mixaug_core::metrics::Lexicons) -> CmdResult<StatsReport> {
    let corpus = stats(records).invalid()?;
    let codemix = if lexicons.is_empty() {
        None
    } else {
        Some(cm_stats(records, lexicons).invalid()?)
    };
    Ok(StatsReport { corpus, codemix })
}

pub fn render_stats(report: &StatsReport) -> String {
    let mut out = String::new();
    let c = &report.corpus;
    let _ = writeln!(out, "sentences            {:>10}", c.count);
    let _ = writeln!(out, "mean length          {:>10.2}", c.mean_len);
    let _ = writeln!(out, "std length           {:>10.2}", c.std_len);
    for (label, n) in &c.class_counts {
        let _ = writeln!(out, "{:<20} {:>10}", label.as_str(), n);
    }
    if let Some(cm) = &report.codemix {
        let _ = writeln!(out, "switch points/sent   {:>10.2}", cm.switch_points_per_sentence);
        for (lang, ratio) in &cm.lang_token_ratio {
            let _ = writeln!(out, "{:<20} {:>10.3}", format!("{lang} token ratio"), ratio);
        }
        let dominant = cm.dominant_language.as_deref().unwrap_or("-");
        let _ = writeln!(out, "dominant language    {dominant:>10}");
    }
    out
}

pub fn run_stats(ctx: &Ctx, args: &StatsArgs) -> CmdResult<()> {
    let records = load_records(ctx, &args.input, "dataset")?;
    let specs: Vec<(String, PathBuf)> = if args.lexicons.is_empty() {
        ctx.config
            .paths
            .lexicons
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    } else {
        args.lexicons
            .iter()
            .map(|s| parse_lexicon_flag(s))
            .collect::<CmdResult<_>>()?
    };
    let lexicons = load_lexicons(specs.iter().map(|(k, v)| (k.clone(), v.as_path())))?;
    let report = compute_stats(&records, &lexicons)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializes"));
    } else {
        print!("{}", render_stats(&report));
    }
    Ok(())
}
