use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::PathBuf;

use mixaug_core::humaneval::{
    build_session, recompute_from_export, serve, AggregateReport, HumanEvalError, ServerConfig, SessionStore,
};
use serde::Serialize;

use super::{load_records, require_file, Ctx};
use crate::cli::{HumanevalCreateArgs, HumanevalExportArgs, HumanevalReportArgs, HumanevalServeArgs};
use crate::config::{RunConfig, Stream};
use crate::failure::{invalid, CmdResult, Failure, ResultExt};
use crate::manifest::{write_json, write_text, ManifestBuilder};

fn classify(e: HumanEvalError) -> Failure {
    match e {
        HumanEvalError::Storage { .. } => Failure::Runtime(e.into()),
        other => Failure::Validation(other.into()),
    }
}

fn data_dir(ctx: &Ctx, flag: &Option<PathBuf>) -> PathBuf {
    flag.clone().unwrap_or_else(|| ctx.config.humaneval.data_dir.clone())
}

pub fn configure_create(config: &mut RunConfig, args: &HumanevalCreateArgs) -> CmdResult<()> {
    if let Some(n) = args.n_each {
        config.humaneval.n_each = n;
    }
    if let Some(a) = &args.annotators {
        config.humaneval.annotators = a.clone();
    }
    if let Some(d) = &args.data_dir {
        config.humaneval.data_dir = d.clone();
    }
    Ok(())
}

#[derive(Serialize)]
struct Credentials<'a> {
    session: &'a str,
    admin_token: &'a str,
    annotators: Vec<AnnotatorCredential<'a>>,
}

#[derive(Serialize)]
struct AnnotatorCredential<'a> {
    id: &'a str,
    token: &'a str,
}

/// Creates a session and prints its access tokens.
pub fn create(ctx: &Ctx, args: &HumanevalCreateArgs) -> CmdResult<()> {
    let h = &ctx.config.humaneval;
    let natural = load_records(ctx, &args.natural, "natural pool")?;
    let synthetic = load_records(ctx, &args.synthetic, "synthetic pool")?;
    let session = build_session(
        &args.session,
        &natural,
        &synthetic,
        h.n_each,
        ctx.seed(Stream::HumanEval),
        &h.annotators,
    )
    .map_err(classify)?;
    let store = SessionStore::open(&h.data_dir).map_err(classify)?;
    store.create(session.clone()).map_err(classify)?;

    let session_dir = h.data_dir.join(&session.id);
    let mut manifest = ManifestBuilder::new("humaneval create", args, &ctx.config, ctx.mocks, &session_dir);
    manifest.input("natural", &args.natural)?;
    manifest.input("synthetic", &args.synthetic)?;
    manifest.output("session", &session_dir.join("session.json"))?;
    manifest.write()?;

    let credentials = Credentials {
        session: &session.id,
        admin_token: &session.admin_token,
        annotators: session
            .annotators
            .iter()
            .map(|a| AnnotatorCredential {
                id: &a.id,
                token: &a.token,
            })
            .collect(),
    };
    println!("{}", serde_json::to_string_pretty(&credentials).expect("serializes"));
    Ok(())
}

pub fn configure_serve(config: &mut RunConfig, args: &HumanevalServeArgs) -> CmdResult<()> {
    if let Some(d) = &args.data_dir {
        config.humaneval.data_dir = d.clone();
    }
    if let Some(b) = &args.bind {
        config.humaneval.bind = b.clone();
    }
    if let Some(s) = &args.static_dir {
        config.humaneval.static_dir = Some(s.clone());
    }
    Ok(())
}

pub fn serve_sessions(ctx: &Ctx) -> CmdResult<()> {
    let h = &ctx.config.humaneval;
    let bind: SocketAddr = h.bind.parse().invalid()?;
    if let Some(dir) = &h.static_dir {
        if !dir.is_dir() {
            return Err(invalid(format!("static directory {} does not exist", dir.display())));
        }
    }
    let config = ServerConfig {
        bind,
        data_dir: h.data_dir.clone(),
        static_dir: h.static_dir.clone(),
    };
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .runtime("cannot start the async runtime")?;
    runtime
        .block_on(serve(config))
        .runtime(format!("server on {bind} failed"))
}

pub fn export(ctx: &Ctx, args: &HumanevalExportArgs) -> CmdResult<()> {
    let store = SessionStore::open(data_dir(ctx, &args.data_dir)).map_err(classify)?;
    let count = store.export(&args.session, &args.out).map_err(classify)?;
    let mut manifest = ManifestBuilder::beside("humaneval export", args, &ctx.config, ctx.mocks, &args.out);
    manifest.output("export", &args.out)?;
    manifest.write()?;
    log::info!("exported {count} lines to {}", args.out.display());
    Ok(())
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |p| format!("{p:.1}%"))
}

fn kappa(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |k| format!("{k:.3}"))
}

pub fn render_aggregate(report: &AggregateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:>6} {:>9} {:>9} {:>12} {:>14}",
        "group", "items", "judgments", "natural", "label agree", "guessed human"
    );
    for (provenance, g) in &report.groups {
        let _ = writeln!(
            out,
            "{:<14} {:>6} {:>9} {:>9} {:>12} {:>14}",
            provenance.as_str(),
            g.items,
            g.judgments,
            pct(g.percent_natural),
            pct(g.percent_label_agree),
            pct(g.percent_guessed_human)
        );
    }
    for pair in &report.pairs {
        let _ = writeln!(
            out,
            "kappa {} vs {} over {} items: naturalness {}, label {}, origin {}",
            pair.annotator_a,
            pair.annotator_b,
            pair.shared_items,
            kappa(pair.naturalness),
            kappa(pair.label_agree),
            kappa(pair.origin_guess)
        );
    }
    out
}

pub fn report(ctx: &Ctx, args: &HumanevalReportArgs) -> CmdResult<()> {
    let aggregate = match (&args.from_export, &args.session) {
        (Some(path), _) => {
            require_file(path, "export")?;
            recompute_from_export(path).map_err(classify)?
        }
        (None, Some(session)) => {
            let store = SessionStore::open(data_dir(ctx, &args.data_dir)).map_err(classify)?;
            store.report(session).map_err(classify)?
        }
        (None, None) => return Err(invalid("pass --session or --from-export")),
    };
    if let Some(dir) = &args.out_dir {
        let json = dir.join("humaneval_report.json");
        write_json(&json, &aggregate)?;
        let text = dir.join("humaneval_report.txt");
        write_text(&text, &render_aggregate(&aggregate))?;
        let mut manifest = ManifestBuilder::new("humaneval report", args, &ctx.config, ctx.mocks, dir);
        if let Some(path) = &args.from_export {
            manifest.input("export", path)?;
        }
        manifest.output("report", &json)?;
        manifest.output("report_text", &text)?;
        manifest.write()?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&aggregate).expect("serializes"));
    } else {
        print!("{}", render_aggregate(&aggregate));
    }
    Ok(())
}
