use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use qflow_core::decisions::DecisionRegistry;
use qflow_engine::{Clock, Engine, SystemClock};
use qflow_workers::client::{JobClient, LocalClient};
use qflow_workers::harness::{run_worker, WorkerOptions};
use qflow_workers::{catalog, config, Settings};
use tokio::sync::watch;
use tokio::task::JoinSet;

use crate::api::{router, AppState};
use crate::{builtin, BrokerConfig, ServeError, ServerConfig};

/// Everything needed to start a server, resolved from files or built in
/// code.
pub struct Setup {
    pub listen: SocketAddr,
    pub journal: Option<PathBuf>,
    pub clock: Arc<dyn Clock>,
    pub decisions: DecisionRegistry,
    pub settings: Settings,
    pub embedded_workers: Vec<String>,
    pub broker: BrokerConfig,
}

impl Setup {
    /// In-memory server on an ephemeral port with built-in tables and no
    /// embedded workers.
    pub fn ephemeral() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 0)),
            journal: None,
            clock: Arc::new(SystemClock),
            decisions: DecisionRegistry::with_defaults(),
            settings: Settings::default(),
            embedded_workers: Vec::new(),
            broker: BrokerConfig::default(),
        }
    }

    pub fn from_config(cfg: &ServerConfig) -> Result<Self, ServeError> {
        let mut settings = config::load_settings(
            cfg.devices.as_deref(),
            cfg.decision_tables.as_deref(),
            cfg.references.as_deref(),
        )?;
        settings.qaoa = cfg.qaoa.clone();
        settings.default_shots = cfg.default_shots;
        let mut decisions = DecisionRegistry::with_defaults();
        if let Some(p) = &cfg.decision_tables {
            for t in config::load_tables(p)? {
                decisions.insert(t).map_err(|e| ServeError::Config(e.to_string()))?;
            }
        }
        Ok(Self {
            listen: cfg.listen,
            journal: cfg.journal.clone(),
            clock: Arc::new(SystemClock),
            decisions,
            settings,
            embedded_workers: cfg.embedded_workers.clone(),
            broker: cfg.broker.clone(),
        })
    }
}

/// A running service. Dropping it without [`Server::shutdown`] aborts the
/// listener and embedded workers.
pub struct Server {
    addr: SocketAddr,
    engine: Arc<Engine>,
    stop: watch::Sender<bool>,
    tasks: JoinSet<()>,
}

impl Server {
    pub async fn start(setup: Setup) -> Result<Self, ServeError> {
        let engine = Arc::new(match &setup.journal {
            Some(path) => {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                Engine::open(path, setup.clock.clone(), setup.decisions)?
            }
            None => Engine::new(setup.clock.clone(), setup.decisions),
        });
        for def in builtin::definitions() {
            if engine.read(|s| s.definition(&def.id, None).is_none()) {
                let id = def.id.clone();
                let version = engine.deploy(def)?;
                tracing::info!(%id, version, "deployed built-in definition");
            }
        }

        let state = AppState {
            engine: engine.clone(),
            devices: Arc::new(setup.settings.devices.clone()),
            lock_ms: setup.broker.lock_ms,
            poll_bound: Duration::from_millis(setup.broker.poll_ms),
        };
        let listener = tokio::net::TcpListener::bind(setup.listen).await?;
        let addr = listener.local_addr()?;
        let (stop, stopped) = watch::channel(false);
        let mut tasks = JoinSet::new();

        let mut shutdown = stopped.clone();
        tasks.spawn(async move {
            let serve = axum::serve(listener, router(state)).with_graceful_shutdown(async move {
                let _ = shutdown.wait_for(|s| *s).await;
            });
            if let Err(e) = serve.await {
                tracing::error!(error = %e, "listener failed");
            }
        });

        let bindings = catalog(Arc::new(setup.settings));
        let all = setup.embedded_workers.iter().any(|t| t == "all");
        for t in &setup.embedded_workers {
            if t != "all" && !bindings.iter().any(|b| &b.job_type == t) {
                return Err(ServeError::Config(format!("unknown embedded worker type '{t}'")));
            }
        }
        let client: Arc<dyn JobClient> = Arc::new(LocalClient::new(engine.clone()));
        for b in bindings
            .into_iter()
            .filter(|b| all || setup.embedded_workers.contains(&b.job_type))
        {
            let mut opts = WorkerOptions::new(format!("embedded/{}", b.job_type));
            opts.max_concurrent = setup.broker.worker_concurrency;
            opts.lock_ms = setup.broker.lock_ms;
            opts.poll_ms = setup.broker.poll_ms;
            let job_type = b.job_type.clone();
            let worker = run_worker(client.clone(), b, opts, stopped.clone());
            tasks.spawn(async move {
                if let Err(e) = worker.await {
                    tracing::error!(%job_type, error = %e, "embedded worker stopped");
                }
            });
        }
        tracing::info!(%addr, "listening");
        Ok(Self {
            addr,
            engine,
            stop,
            tasks,
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    /// Stops accepting requests and lets embedded workers drain.
    pub async fn shutdown(mut self) {
        self.stop.send_replace(true);
        while self.tasks.join_next().await.is_some() {}
    }
}
