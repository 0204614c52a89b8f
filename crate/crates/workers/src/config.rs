//! Loading of the JSON data files shared by workers and the server.

use std::path::Path;

use qflow_core::decisions::{DecisionTable, DEVICE_TABLE_ID};
use qflow_core::DeviceDescriptor;
use serde::de::DeserializeOwned;

use crate::{ReferenceStore, Settings};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Device registry file: a JSON array of device descriptors.
pub fn load_devices(path: &Path) -> Result<Vec<DeviceDescriptor>, ConfigError> {
    let devices: Vec<DeviceDescriptor> = read_json(path)?;
    if devices.is_empty() {
        return Err(ConfigError::Invalid(format!("{}: empty device registry", path.display())));
    }
    for d in &devices {
        d.validate().map_err(ConfigError::Invalid)?;
    }
    Ok(devices)
}

/// Decision table file: a JSON array of tables, each validated.
pub fn load_tables(path: &Path) -> Result<Vec<DecisionTable>, ConfigError> {
    let tables: Vec<DecisionTable> = read_json(path)?;
    for t in &tables {
        t.validate()
            .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
    }
    Ok(tables)
}

pub fn find_device_table(tables: &[DecisionTable]) -> Option<DecisionTable> {
    tables.iter().find(|t| t.id == DEVICE_TABLE_ID).cloned()
}

pub fn load_references(path: &Path) -> Result<ReferenceStore, ConfigError> {
    read_json(path)
}

/// Built-in settings with each given file replacing its part.
pub fn load_settings(
    devices: Option<&Path>,
    decision_tables: Option<&Path>,
    references: Option<&Path>,
) -> Result<Settings, ConfigError> {
    let mut s = Settings::default();
    if let Some(p) = devices {
        s.devices = load_devices(p)?;
    }
    if let Some(p) = decision_tables {
        if let Some(t) = find_device_table(&load_tables(p)?) {
            s.device_table = t;
        }
    }
    if let Some(p) = references {
        s.references = load_references(p)?;
    }
    Ok(s)
}
