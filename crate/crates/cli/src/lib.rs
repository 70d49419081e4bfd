//! The `mixaug` command line.
//!
//! Each subcommand resolves the run configuration (file, then flags),
//! validates it, runs one workflow step from `mixaug-core` and writes a
//! manifest beside its outputs. Exit codes: 0 success, 1 invalid
//! configuration or input, 2 failure while running.

pub mod cli;
pub mod commands;
pub mod config;
pub mod failure;
pub mod fixtures;
pub mod manifest;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command, CostCommand, HumanevalCommand};
use commands::{compare, cost, data, evaluate, generate, humaneval, pipeline, train, translate, Ctx};
use config::RunConfig;
use failure::{CmdResult, Failure, ResultExt};

/// Parses `args` and runs the selected subcommand.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();

    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
    }
}

/// The configuration file, or the bundled fixture configuration for a
/// pipeline run that has no input of its own.
fn base_config(cli: &Cli) -> CmdResult<RunConfig> {
    if let Some(path) = &cli.config {
        return RunConfig::load(path).invalid();
    }
    if let Command::Pipeline(args) = &cli.command {
        if args.input.is_none() {
            log::info!("no config or input given; using the bundled fixture");
            return RunConfig::parse(fixtures::PIPELINE_CONFIG).invalid();
        }
    }
    Ok(RunConfig::default())
}

fn resolve(cli: &Cli) -> CmdResult<Ctx> {
    let mut config = base_config(cli)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match &cli.command {
        Command::Preprocess(a) => data::configure(&mut config, a)?,
        Command::Generate(a) => generate::configure(&mut config, a)?,
        Command::Translate(a) => translate::configure(&mut config, a)?,
        Command::Plan(a) => train::configure_plan(&mut config, a)?,
        Command::Train(a) => train::configure_train(&mut config, a)?,
        Command::Humaneval(HumanevalCommand::Create(a)) => humaneval::configure_create(&mut config, a)?,
        Command::Humaneval(HumanevalCommand::Serve(a)) => humaneval::configure_serve(&mut config, a)?,
        Command::Cost(CostCommand::Mturk(a)) => cost::configure_mturk(&mut config, a)?,
        Command::Cost(CostCommand::Llm(a)) => cost::configure_llm(&mut config, a)?,
        Command::Pipeline(a) => pipeline::configure(&mut config, a)?,
        _ => {}
    }
    config.validate().map_err(|e| Failure::Validation(e.into()))?;
    Ok(Ctx::new(config, cli.mock))
}

fn dispatch(cli: &Cli) -> CmdResult<()> {
    let ctx = resolve(cli)?;
    match &cli.command {
        Command::Preprocess(a) => data::run_preprocess(&ctx, a),
        Command::Stats(a) => data::run_stats(&ctx, a),
        Command::Generate(a) => generate::run(&ctx, a),
        Command::Translate(a) => translate::run(&ctx, a),
        Command::Plan(a) => train::run_plan_command(&ctx, a),
        Command::Train(a) => train::run_train(&ctx, a),
        Command::Evaluate(a) => evaluate::run(&ctx, a),
        Command::Compare(a) => compare::run(&ctx, a),
        Command::Humaneval(HumanevalCommand::Create(a)) => humaneval::create(&ctx, a),
        Command::Humaneval(HumanevalCommand::Serve(_)) => humaneval::serve_sessions(&ctx),
        Command::Humaneval(HumanevalCommand::Export(a)) => humaneval::export(&ctx, a),
        Command::Humaneval(HumanevalCommand::Report(a)) => humaneval::report(&ctx, a),
        Command::Cost(CostCommand::Mturk(a)) => cost::mturk(&ctx, a),
        Command::Cost(CostCommand::Llm(a)) => cost::llm(&ctx, a),
        Command::Pipeline(a) => pipeline::run(&ctx, a),
    }
}
