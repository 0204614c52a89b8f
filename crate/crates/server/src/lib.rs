//! The qflow service: process engine, job broker and request gateway behind
//! one HTTP listener.
//!
//! Workers reach the broker through the routes in [`qflow_engine::wire`];
//! clients submit problems and read results through the gateway routes in
//! [`api`]. Both share one [`Engine`](qflow_engine::Engine).

pub mod api;
pub mod builtin;
pub mod config;
mod server;

use thiserror::Error;

pub use config::{BrokerConfig, ServerConfig};
pub use server::{Server, Setup};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] qflow_engine::EngineError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<qflow_workers::config::ConfigError> for ServeError {
    fn from(e: qflow_workers::config::ConfigError) -> Self {
        ServeError::Config(e.to_string())
    }
}
