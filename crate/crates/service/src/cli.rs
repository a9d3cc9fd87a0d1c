use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use clap::builder::BoolishValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use tablecheck_clients::{Endpoints, LiveTransport, DEFAULT_PER_HOST_LIMIT, DEFAULT_TIMEOUT};
use tablecheck_core::appraisal::{Adjustment, AppraisalReport, Whitelist};
use tablecheck_core::enrich::DetectorRegistry;
use tablecheck_core::ThresholdConfig;

use crate::bundle::import_bundle;
use crate::engine::{Engine, External};
use crate::render::render_text;
use crate::store::Store;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tablecheck", version, about = "Appraise captured comparison tables before reusing them")]
pub struct Cli {
    /// Store directory.
    #[arg(long, global = true, env = "TABLECHECK_STORE", default_value = "tablecheck-store")]
    pub store: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate, enrich and store a table bundle; prints the table id.
    Import {
        bundle: PathBuf,
        /// Detector registry to use instead of the built-in one.
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Print the appraisal report of a stored table.
    Appraise {
        table_id: String,
        #[command(flatten)]
        opts: ReportOpts,
        /// Trusted domains, one per line, replacing the consumer's list.
        #[arg(long)]
        whitelist: Option<PathBuf>,
    },
    /// Change a consumer's settings and print the recomputed report.
    Adjust {
        table_id: String,
        #[command(flatten)]
        opts: ReportOpts,
        #[command(flatten)]
        action: AdjustAction,
    },
    /// Detector registry tools.
    Detectors {
        #[command(subcommand)]
        command: DetectorCommand,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "TABLECHECK_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        #[arg(long, env = "TABLECHECK_OFFLINE", value_parser = BoolishValueParser::new())]
        offline: bool,
    },
}

#[derive(Debug, Args)]
pub struct ReportOpts {
    /// Reference time (RFC 3339); defaults to the current time.
    #[arg(long, value_parser = parse_now)]
    pub now: Option<DateTime<Utc>>,
    /// Use the fixtures stored with the table instead of live services.
    #[arg(long, env = "TABLECHECK_OFFLINE", value_parser = BoolishValueParser::new())]
    pub offline: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Consumer whose whitelist, dismissals and thresholds apply.
    #[arg(long)]
    pub consumer: Option<String>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct AdjustAction {
    #[arg(long, value_name = "DOMAIN")]
    pub add_trusted: Option<String>,
    #[arg(long, value_name = "DOMAIN")]
    pub remove_trusted: Option<String>,
    #[arg(long, value_name = "ISSUE_ID")]
    pub dismiss: Option<String>,
    #[arg(long, value_name = "ISSUE_ID")]
    pub reopen: Option<String>,
    /// FIELD=VALUE, e.g. diversity_min_domains=3.
    #[arg(long, value_name = "FIELD=VALUE", value_parser = parse_setting)]
    pub set: Option<(String, i64)>,
}

impl AdjustAction {
    fn into_adjustment(self) -> Adjustment {
        if let Some(domain) = self.add_trusted {
            Adjustment::AddTrusted { domain }
        } else if let Some(domain) = self.remove_trusted {
            Adjustment::RemoveTrusted { domain }
        } else if let Some(issue_id) = self.dismiss {
            Adjustment::Dismiss { issue_id }
        } else if let Some(issue_id) = self.reopen {
            Adjustment::Reopen { issue_id }
        } else {
            let (field, value) = self.set.expect("clap requires one action");
            Adjustment::SetThreshold { field, value }
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum DetectorCommand {
    /// Check a registry file; exits 1 and names each problem if invalid.
    Validate { registry: PathBuf },
    /// List the built-in detectors.
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

fn parse_now(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s).map(|d| d.with_timezone(&Utc)).map_err(|e| e.to_string())
}

fn parse_setting(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or("expected FIELD=VALUE")?;
    Ok((k.trim().to_string(), v.trim().parse().map_err(|e| format!("{v:?}: {e}"))?))
}

/// Trusted domains from a text file: one per line, `#` starts a comment.
pub fn read_whitelist_file(path: &std::path::Path) -> Result<Whitelist, String> {
    let raw = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let entries = raw.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty());
    Whitelist::from_entries(entries).map_err(|e| format!("{}: {e}", path.display()))
}

fn external(offline: bool) -> Result<External, String> {
    if offline {
        return Ok(External::Offline);
    }
    let transport = LiveTransport::new(DEFAULT_TIMEOUT, DEFAULT_PER_HOST_LIMIT).map_err(|e| e.to_string())?;
    let endpoints = Endpoints::from_env().map_err(|e| format!("bad endpoint URL: {e}"))?;
    Ok(External::Live { transport: Arc::new(transport), endpoints: Box::new(endpoints) })
}

fn print_report(out: &mut dyn Write, report: &AppraisalReport, format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => out.write_all(report.to_json().as_bytes()),
        Format::Text => out.write_all(render_text(report).as_bytes()),
    }
}

struct Failure(i32, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_VALIDATION, e.to_string())
    }
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().expect("tokio runtime")
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Import { bundle, registry } => {
            let registry = match registry {
                Some(p) => DetectorRegistry::load(&p)?,
                None => DetectorRegistry::default_registry(),
            };
            let store = Store::open(&cli.store)?;
            let outcome = import_bundle(&store, &bundle, &registry, &ThresholdConfig::default())?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            writeln!(out, "{}", outcome.table_id)?;
        }
        Command::Appraise { table_id, opts, whitelist } => {
            let engine = Engine::new(Store::open(&cli.store)?, external(opts.offline)?);
            let mut consumer = match &opts.consumer {
                Some(id) => engine.consumer(id)?,
                None => Default::default(),
            };
            if let Some(path) = whitelist {
                consumer.whitelist = read_whitelist_file(&path)?;
            }
            let now = opts.now.unwrap_or_else(Utc::now);
            let report = runtime().block_on(engine.report(&table_id, &consumer, now))?;
            print_report(out, &report, opts.format)?;
        }
        Command::Adjust { table_id, opts, action } => {
            let Some(consumer) = opts.consumer.as_deref() else {
                return Err(Failure(EXIT_USAGE, "adjust requires --consumer".into()));
            };
            let engine = Engine::new(Store::open(&cli.store)?, external(opts.offline)?);
            let now = opts.now.unwrap_or_else(Utc::now);
            let adjustment = action.into_adjustment();
            let (_, report) = runtime().block_on(engine.adjust(consumer, &table_id, &adjustment, now))?;
            print_report(out, &report, opts.format)?;
        }
        Command::Detectors { command: DetectorCommand::Validate { registry } } => {
            let r = DetectorRegistry::load(&registry)?;
            writeln!(out, "{}: {} detectors, ok", registry.display(), r.detectors().len())?;
        }
        Command::Detectors { command: DetectorCommand::List } => {
            for d in DetectorRegistry::default_registry().detectors() {
                writeln!(out, "{}\t{:?}\t{}", d.name, d.category, d.keywords.join(", "))?;
            }
        }
        Command::Serve { port, bind, offline } => {
            let engine = Arc::new(Engine::new(Store::open(&cli.store)?, external(offline)?));
            runtime().block_on(async move {
                let listener = tokio::net::TcpListener::bind((bind.as_str(), port)).await?;
                tracing::info!(addr = %listener.local_addr()?, "listening");
                axum::serve(listener, crate::api::router(engine)).await
            })?;
        }
    }
    Ok(())
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
