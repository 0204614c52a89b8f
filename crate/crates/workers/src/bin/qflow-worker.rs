//! Runs one or more handlers against a remote broker.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::Parser;
use qflow_core::qaoa::QaoaConfig;
use qflow_workers::client::HttpClient;
use qflow_workers::harness::{run_worker, WorkerOptions};
use qflow_workers::{catalog, config, Settings};
use serde::Deserialize;
use tokio::sync::watch;

#[derive(Debug, Parser)]
#[command(name = "qflow-worker", about = "Pull jobs from a qflow broker and run their handlers")]
struct Args {
    /// TOML config file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Broker base URL.
    #[arg(long)]
    broker: Option<String>,
    /// Job types to serve, comma separated, or `all`.
    #[arg(long, value_delimiter = ',')]
    types: Vec<String>,
    /// Worker id prefix; the job type is appended.
    #[arg(long)]
    worker_id: Option<String>,
    #[arg(long)]
    max_concurrent: Option<usize>,
    /// List the built-in job types and exit.
    #[arg(long)]
    list: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    broker: Option<String>,
    worker_id: Option<String>,
    job_types: Vec<String>,
    max_concurrent: Option<usize>,
    lock_ms: Option<u64>,
    poll_ms: Option<u64>,
    default_shots: Option<u64>,
    devices: Option<PathBuf>,
    decision_tables: Option<PathBuf>,
    references: Option<PathBuf>,
    qaoa: Option<QaoaConfig>,
}

fn settings(cfg: &FileConfig) -> anyhow::Result<Settings> {
    let mut s = config::load_settings(
        cfg.devices.as_deref(),
        cfg.decision_tables.as_deref(),
        cfg.references.as_deref(),
    )?;
    if let Some(q) = &cfg.qaoa {
        q.validate()?;
        s.qaoa = q.clone();
    }
    if let Some(n) = cfg.default_shots {
        s.default_shots = n;
    }
    Ok(s)
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let args = Args::parse();
    let cfg: FileConfig = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => FileConfig::default(),
    };
    let bindings = catalog(Arc::new(settings(&cfg)?));
    if args.list {
        for b in &bindings {
            println!("{}", b.job_type);
        }
        return Ok(());
    }

    let types = if args.types.is_empty() { cfg.job_types.clone() } else { args.types.clone() };
    let selected: Vec<_> = if types.iter().any(|t| t == "all") {
        bindings
    } else {
        let mut out = Vec::new();
        for t in &types {
            match bindings.iter().find(|b| &b.job_type == t) {
                Some(b) => out.push(b.clone()),
                None => bail!("unknown job type '{t}' (see --list)"),
            }
        }
        out
    };
    if selected.is_empty() {
        bail!("no job types selected; pass --types or set job_types in the config");
    }

    let broker = args
        .broker
        .or(cfg.broker.clone())
        .unwrap_or_else(|| "http://127.0.0.1:8080".into());
    let prefix = args.worker_id.or(cfg.worker_id.clone()).unwrap_or_else(|| {
        format!("worker-{}", std::process::id())
    });
    let client = Arc::new(HttpClient::new(broker));
    let (stop, stopped) = watch::channel(false);
    let mut tasks = tokio::task::JoinSet::new();
    for b in selected {
        let mut opts = WorkerOptions::new(format!("{prefix}/{}", b.job_type));
        opts.max_concurrent = args.max_concurrent.or(cfg.max_concurrent).unwrap_or(1);
        if let Some(ms) = cfg.lock_ms {
            opts.lock_ms = ms;
        }
        if let Some(ms) = cfg.poll_ms {
            opts.poll_ms = ms;
        }
        tasks.spawn(run_worker(client.clone(), b, opts, stopped.clone()));
    }
    tokio::select! {
        _ = tokio::signal::ctrl_c() => tracing::info!("shutting down"),
        Some(r) = tasks.join_next() => {
            r??;
        }
    }
    stop.send_replace(true);
    while let Some(r) = tasks.join_next().await {
        r??;
    }
    Ok(())
}
