//! `qflow`: run the service, or talk to a running one.
//!
//! Exit codes: 0 success, 1 error, 3 result requested before completion.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qflow::{Server, ServerConfig, Setup};
use serde_json::Value;

const STILL_RUNNING: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "qflow", about = "Quantum workflow orchestration service and client")]
struct Cli {
    /// Base URL of a running service.
    #[arg(long, global = true, default_value = "http://127.0.0.1:8080")]
    url: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Start engine, broker and gateway.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Submit a problem request; prints the instance id.
    Submit {
        #[arg(long)]
        file: PathBuf,
    },
    /// Print an instance snapshot.
    Status { id: String },
    /// Print the solution of a completed instance.
    Result { id: String },
    /// Deploy a process definition; prints the new version.
    Deploy {
        #[arg(long)]
        definition: PathBuf,
    },
    /// Inspect the device registry.
    Devices {
        #[command(subcommand)]
        action: DevicesAction,
    },
}

#[derive(Debug, Subcommand)]
enum DevicesAction {
    List,
}

#[derive(Debug)]
enum Failure {
    StillRunning,
    Other(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Other(e.into())
    }
}

struct Api {
    base: String,
    http: reqwest::Client,
}

impl Api {
    fn new(base: &str) -> Self {
        Self {
            base: base.trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    async fn call(&self, req: reqwest::RequestBuilder) -> Result<(u16, Value), Failure> {
        let resp = req.send().await.map_err(|e| anyhow::anyhow!("cannot reach {}: {e}", self.base))?;
        let status = resp.status().as_u16();
        let body: Value = resp.json().await.unwrap_or(Value::Null);
        if (200..300).contains(&status) {
            return Ok((status, body));
        }
        let message = body
            .get("error")
            .and_then(Value::as_str)
            .map(str::to_string)
            .unwrap_or_else(|| format!("HTTP {status}"));
        if status == 409 && message == "still running" {
            return Err(Failure::StillRunning);
        }
        Err(Failure::Other(anyhow::anyhow!("{message} (HTTP {status})")))
    }

    async fn get(&self, path: &str) -> Result<Value, Failure> {
        Ok(self.call(self.http.get(format!("{}{path}", self.base))).await?.1)
    }

    async fn post(&self, path: &str, body: String) -> Result<Value, Failure> {
        let req = self
            .http
            .post(format!("{}{path}", self.base))
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body);
        Ok(self.call(req).await?.1)
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Other(anyhow::anyhow!("cannot read {}: {e}", path.display())))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON value serializes"));
}

async fn serve(config: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = match &config {
        Some(p) => ServerConfig::load(p)?,
        None => ServerConfig::default(),
    };
    let server = Server::start(Setup::from_config(&cfg)?).await?;
    eprintln!("qflow listening on {}", server.url());
    tokio::signal::ctrl_c().await?;
    tracing::info!("shutting down");
    server.shutdown().await;
    Ok(())
}

async fn run(cli: Cli) -> Result<(), Failure> {
    let api = Api::new(&cli.url);
    match cli.command {
        Command::Serve { config } => serve(config).await?,
        Command::Submit { file } => {
            let body = api.post("/problems", read(&file)?).await?;
            let id = body
                .get("instance_id")
                .and_then(Value::as_str)
                .ok_or_else(|| anyhow::anyhow!("response lacks instance_id"))?;
            println!("{id}");
        }
        Command::Status { id } => print_json(&api.get(&format!("/instances/{id}")).await?),
        Command::Result { id } => print_json(&api.get(&format!("/instances/{id}/result")).await?),
        Command::Deploy { definition } => {
            let body = api.post("/definitions", read(&definition)?).await?;
            println!("{}", body.get("version").cloned().unwrap_or(Value::Null));
        }
        Command::Devices { action: DevicesAction::List } => print_json(&api.get("/devices").await?),
    }
    Ok(())
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    match run(Cli::parse()).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::StillRunning) => {
            eprintln!("still running");
            ExitCode::from(STILL_RUNNING)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
