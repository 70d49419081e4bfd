use std::time::Duration;

use mixaug_core::corpus::write_dataset;
use mixaug_core::translate::{
    convert_corpus, AugmentError, DictionaryTranslator, HttpTranslator, RatioDistribution, SpanMode, Translator,
};

use super::{load_records, require_file, Ctx};
use crate::cli::TranslateArgs;
use crate::config::{RunConfig, Stream};
use crate::failure::{invalid, CmdResult, Failure, ResultExt};
use crate::manifest::{write_json, ManifestBuilder};

pub fn configure(config: &mut RunConfig, args: &TranslateArgs) -> CmdResult<()> {
    let a = &mut config.augment;
    if let Some(ratio) = args.ratio {
        a.ratio = RatioDistribution::Fixed { ratio };
    }
    if let Some(mode) = &args.span_mode {
        a.span_mode = serde_json::from_value::<SpanMode>(serde_json::Value::String(mode.clone()))
            .map_err(|_| invalid(format!("--span-mode must be contiguous or per-token, got {mode:?}")))?;
    }
    if let Some(lang) = &args.source_lang {
        a.source_lang = lang.clone();
    }
    if let Some(lang) = &args.target_lang {
        a.target_lang = lang.clone();
    }
    let t = &mut config.translator;
    if let Some(dict) = &args.dictionary {
        t.dictionary = Some(dict.clone());
        t.service_url = None;
    }
    if let Some(url) = &args.service {
        t.service_url = Some(url.clone());
        t.dictionary = None;
    }
    Ok(())
}

fn translator(ctx: &Ctx) -> CmdResult<Box<dyn Translator>> {
    let t = &ctx.config.translator;
    if let Some(path) = &t.dictionary {
        require_file(path, "dictionary")?;
        return Ok(Box::new(DictionaryTranslator::from_tsv(path).invalid()?));
    }
    if let Some(url) = &t.service_url {
        let timeout = Duration::from_secs_f64(t.timeout_secs.unwrap_or(30.0));
        return Ok(Box::new(HttpTranslator::new(url.clone(), timeout)));
    }
    Err(invalid(
        "no translator: pass --dictionary or --service, or set translator.dictionary or translator.service_url",
    ))
}

pub fn run(ctx: &Ctx, args: &TranslateArgs) -> CmdResult<()> {
    let records = load_records(ctx, &args.input, "input dataset")?;
    let mt = translator(ctx)?;
    let (converted, report) = convert_corpus(&records, &ctx.config.augment, ctx.seed(Stream::Translate), mt.as_ref())
        .map_err(|e| match e {
        AugmentError::EmptyCorpus | AugmentError::InvalidRatio(_) => Failure::Validation(e.into()),
        other => Failure::Runtime(other.into()),
    })?;
    if !report.skipped.is_empty() {
        log::warn!("{} records could not be translated", report.skipped.len());
    }

    let out_dir = ctx.out_dir(&args.out_dir);
    let data_path = out_dir.join("translated.jsonl");
    write_dataset(&data_path, &converted)?;
    let report_path = out_dir.join("translate_report.json");
    write_json(&report_path, &report)?;

    let mut manifest = ManifestBuilder::new("translate", args, &ctx.config, ctx.mocks, &out_dir);
    manifest.input("monolingual", &args.input)?;
    if let Some(dict) = &ctx.config.translator.dictionary {
        manifest.input("dictionary", dict)?;
    }
    manifest.output("translated", &data_path)?;
    manifest.output("translate_report", &report_path)?;
    manifest.write()?;
    println!("{}", data_path.display());
    Ok(())
}
