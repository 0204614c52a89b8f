//! TOML configuration of `qflow serve`.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! journal = "../data/qflow.journal"    # omit to keep state in memory
//! devices = "devices.json"
//! decision_tables = "decision-tables.json"
//! references = "references.json"
//! default_shots = 1000
//! embedded_workers = ["all"]           # job types run inside the server
//!
//! [broker]
//! lock_ms = 30000
//! poll_ms = 10000
//! worker_concurrency = 1
//!
//! [qaoa]
//! layers = 2
//! max_evals = 400
//! ```
//!
//! Relative paths resolve against the directory of the config file.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use qflow_core::qaoa::QaoaConfig;
use qflow_engine::{DEFAULT_LOCK_MS, DEFAULT_POLL_MS};
use qflow_workers::DEFAULT_SHOTS;
use serde::{Deserialize, Serialize};

use crate::ServeError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrokerConfig {
    /// Lock duration when an activation names none.
    pub lock_ms: u64,
    /// Upper bound on one long-poll.
    pub poll_ms: u64,
    /// In-flight jobs per embedded worker.
    pub worker_concurrency: usize,
}

impl Default for BrokerConfig {
    fn default() -> Self {
        Self {
            lock_ms: DEFAULT_LOCK_MS,
            poll_ms: DEFAULT_POLL_MS,
            worker_concurrency: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    pub journal: Option<PathBuf>,
    pub devices: Option<PathBuf>,
    pub decision_tables: Option<PathBuf>,
    pub references: Option<PathBuf>,
    pub default_shots: u64,
    /// Job types served in-process; `"all"` selects every built-in type.
    pub embedded_workers: Vec<String>,
    pub broker: BrokerConfig,
    pub qaoa: QaoaConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            journal: None,
            devices: None,
            decision_tables: None,
            references: None,
            default_shots: DEFAULT_SHOTS,
            embedded_workers: Vec::new(),
            broker: BrokerConfig::default(),
            qaoa: QaoaConfig::default(),
        }
    }
}

impl ServerConfig {
    pub fn parse(text: &str) -> Result<Self, ServeError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ServeError::Config(e.to_string()))?;
        cfg.qaoa
            .validate()
            .map_err(|e| ServeError::Config(e.to_string()))?;
        if cfg.broker.worker_concurrency == 0 {
            return Err(ServeError::Config("broker.worker_concurrency must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ServeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServeError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        for p in [
            &mut self.journal,
            &mut self.devices,
            &mut self.decision_tables,
            &mut self.references,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ServerConfig::parse("").unwrap(), ServerConfig::default());
    }

    #[test]
    fn sections_override_defaults() {
        let cfg = ServerConfig::parse(
            "embedded_workers = [\"all\"]\n[broker]\nlock_ms = 500\n[qaoa]\nlayers = 1\n",
        )
        .unwrap();
        assert_eq!(cfg.broker.lock_ms, 500);
        assert_eq!(cfg.broker.poll_ms, DEFAULT_POLL_MS);
        assert_eq!(cfg.qaoa.layers, 1);
        assert_eq!(cfg.qaoa.max_evals, 400);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(ServerConfig::parse("[qaoa]\nlayers = 0\n").is_err());
        assert!(ServerConfig::parse("bogus = 1\n").is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let mut cfg = ServerConfig::parse("devices = \"devices.json\"\njournal = \"/var/q.log\"\n").unwrap();
        cfg.resolve_paths(Path::new("/etc/qflow"));
        assert_eq!(cfg.devices.unwrap(), Path::new("/etc/qflow/devices.json"));
        assert_eq!(cfg.journal.unwrap(), Path::new("/var/q.log"));
    }

    #[test]
    fn shipped_config_parses() {
        let cfg = ServerConfig::parse(include_str!("../../../config/qflow.toml")).unwrap();
        assert_eq!(cfg.embedded_workers, ["all"]);
        assert_eq!(cfg.qaoa, QaoaConfig::default());
    }
}
