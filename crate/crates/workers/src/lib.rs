//! Task-handling services.
//!
//! Each job type maps to one stateless handler: a function from the job's
//! variables (plus static [`Settings`]) to output variables. The
//! [`harness`] registers a handler with the broker, pulls jobs and reports
//! results through a [`client::JobClient`].

pub mod client;
pub mod config;
pub mod harness;
pub mod pipeline;
pub mod shared;
pub mod strategy;
mod settings;
mod vars;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use pipeline::Domain;
pub use settings::{Agent, Container, ReferenceStore, Settings, DEFAULT_SHOTS};
pub use vars::Variables;

pub const DEVICE_SELECTION: &str = "quantum_device-selection";
pub const CIRCUIT_EXECUTION: &str = "quantum_circuit-execution";
pub const CLASSICAL_SOLVER: &str = "classical_solver";
pub const INPUT_AGGREGATION: &str = "strategy_input-aggregation";
pub const OUTPUT_AGGREGATION: &str = "strategy_output-aggregation";

/// Pipeline stages whose job type is `<domain prefix>_<stage>`.
pub const DOMAIN_STAGES: [&str; 4] = [
    "problem-mapping",
    "circuit-generation",
    "circuit-refinement",
    "solution-mapping",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct HandlerError {
    pub message: String,
    /// Whether another attempt could succeed. Bad input never does.
    pub retryable: bool,
}

impl HandlerError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            retryable: false,
        }
    }

    pub fn retryable(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            retryable: true,
        }
    }
}

type HandlerFn = dyn Fn(&Settings, &Variables) -> Result<Variables, HandlerError> + Send + Sync;

/// A job type bound to its handler and settings.
#[derive(Clone)]
pub struct Binding {
    pub job_type: String,
    settings: Arc<Settings>,
    handler: Arc<HandlerFn>,
}

impl fmt::Debug for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Binding").field("job_type", &self.job_type).finish()
    }
}

impl Binding {
    pub fn new(
        job_type: impl Into<String>,
        settings: Arc<Settings>,
        handler: impl Fn(&Settings, &Variables) -> Result<Variables, HandlerError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            job_type: job_type.into(),
            settings,
            handler: Arc::new(handler),
        }
    }

    pub fn handle(&self, vars: &Variables) -> Result<Variables, HandlerError> {
        (self.handler)(&self.settings, vars)
    }
}

/// Every built-in binding, in pipeline order per domain.
pub fn catalog(settings: Arc<Settings>) -> Vec<Binding> {
    let mut out = vec![
        Binding::new(INPUT_AGGREGATION, settings.clone(), strategy::input_aggregation),
        Binding::new(CLASSICAL_SOLVER, settings.clone(), strategy::classical_solver),
        Binding::new(OUTPUT_AGGREGATION, settings.clone(), strategy::output_aggregation),
        Binding::new(DEVICE_SELECTION, settings.clone(), shared::device_selection),
        Binding::new(CIRCUIT_EXECUTION, settings.clone(), shared::circuit_execution),
    ];
    for domain in [Domain::Scheduling, Domain::Knapsack] {
        let stages: [(&str, fn(Domain, &Settings, &Variables) -> Result<Variables, HandlerError>); 4] = [
            ("problem-mapping", pipeline::problem_mapping),
            ("circuit-generation", pipeline::circuit_generation),
            ("circuit-refinement", pipeline::circuit_refinement),
            ("solution-mapping", pipeline::solution_mapping),
        ];
        for (stage, f) in stages {
            out.push(Binding::new(
                format!("{}_{stage}", domain.prefix()),
                settings.clone(),
                move |s: &Settings, v: &Variables| f(domain, s, v),
            ));
        }
    }
    out
}

/// The binding for `job_type`, if it is built in.
pub fn binding(settings: Arc<Settings>, job_type: &str) -> Option<Binding> {
    catalog(settings).into_iter().find(|b| b.job_type == job_type)
}
