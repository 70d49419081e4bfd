pub mod compare;
pub mod cost;
pub mod data;
pub mod evaluate;
pub mod generate;
pub mod humaneval;
pub mod pipeline;
pub mod train;
pub mod translate;

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use mixaug_core::corpus::{load_dataset, DatasetFormat, LoadOptions};
use mixaug_core::generation::{ChatEndpoint, MockEndpoint, OpenAiCompatibleClient};
use mixaug_core::metrics::Lexicons;
use mixaug_core::schedule::{CommandTrainer, MockTrainer, Trainer};
use mixaug_core::SentenceRecord;

use crate::config::{RunConfig, Stream};
use crate::failure::{invalid, CmdResult, ResultExt};
use crate::manifest::Mocks;

/// Resolved configuration plus what is mocked for this run.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub config: RunConfig,
    pub mocks: Mocks,
}

impl Ctx {
    pub fn new(config: RunConfig, mock: bool) -> Self {
        let mocks = Mocks {
            endpoint: mock || config.endpoint.mock,
            trainer: mock || config.trainer.command.is_empty(),
        };
        Self { config, mocks }
    }

    pub fn seed(&self, stream: Stream) -> u64 {
        self.config.stream_seed(stream)
    }

    pub fn out_dir(&self, flag: &Option<PathBuf>) -> PathBuf {
        flag.clone().unwrap_or_else(|| self.config.paths.output_dir.clone())
    }

    /// The chat endpoint. Without mocking, the API key must be present in
    /// the configured environment variable.
    pub fn endpoint(&self) -> CmdResult<Box<dyn ChatEndpoint>> {
        let cfg = &self.config;
        if self.mocks.endpoint {
            return Ok(Box::new(
                MockEndpoint::new(self.seed(Stream::MockEndpoint))
                    .with_malformed_rate(cfg.endpoint.mock_malformed_rate)
                    .with_lang_pair(cfg.lang_pair.clone()),
            ));
        }
        let var = &cfg.endpoint.api_key_env;
        let key = std::env::var(var)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| {
                invalid(format!(
                    "environment variable {var} is not set. Export your API key as {var}, \
                 set endpoint.api_key_env to the variable that holds it, \
                 or pass --mock to use the offline mock endpoint"
                ))
            })?;
        Ok(Box::new(OpenAiCompatibleClient::new(
            cfg.endpoint.url.clone(),
            Some(key),
            Duration::from_secs_f64(cfg.generation.request_timeout_secs),
        )))
    }

    pub fn trainer(&self) -> Box<dyn Trainer> {
        match self.config.trainer.command.split_first() {
            Some((program, args)) if !self.mocks.trainer => {
                Box::new(CommandTrainer::new(program.clone(), args.to_vec()))
            }
            _ => Box::new(MockTrainer::new()),
        }
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            skip_bad_rows: self.config.data.skip_bad_rows,
            lang_pair: self.config.lang_pair.clone(),
            allowed_raw_labels: self.allowed_labels(),
        }
    }

    pub fn allowed_labels(&self) -> Option<BTreeSet<String>> {
        let labels = &self.config.data.allowed_labels;
        (!labels.is_empty()).then(|| labels.iter().cloned().collect())
    }
}

pub fn require_file(path: &Path, what: &str) -> CmdResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(invalid(format!("{what} {} does not exist", path.display())))
    }
}

/// Loads a dataset in either supported format.
pub fn load_records(ctx: &Ctx, path: &Path, what: &str) -> CmdResult<Vec<SentenceRecord>> {
    require_file(path, what)?;
    load_dataset(path, DatasetFormat::from_path(path), &ctx.load_options()).invalid()
}

/// Reads `LANG=FILE` lexicon specs; each file lists one word per line.
pub fn load_lexicons<'a>(specs: impl IntoIterator<Item = (String, &'a Path)>) -> CmdResult<Lexicons> {
    let mut lexicons = Lexicons::new();
    for (lang, path) in specs {
        require_file(path, "lexicon")?;
        let raw = fs::read_to_string(path).invalid()?;
        let words: HashSet<String> = raw
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        lexicons.insert(lang, words);
    }
    Ok(lexicons)
}

pub fn parse_lexicon_flag(spec: &str) -> CmdResult<(String, PathBuf)> {
    match spec.split_once('=') {
        Some((lang, path)) if !lang.is_empty() && !path.is_empty() => Ok((lang.to_string(), PathBuf::from(path))),
        _ => Err(invalid(format!("--lexicon expects LANG=FILE, got {spec:?}"))),
    }
}
