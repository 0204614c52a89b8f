//! Process engine and job broker.
//!
//! Process definitions are straight-line task lists. Service tasks become
//! jobs that workers pull by type under a time-limited lock; business-rule
//! tasks are evaluated inline against decision tables; call activities run
//! a child instance and copy its declared outputs back.
//!
//! All state changes go through [`state::EngineState::apply`], which is a
//! pure function of the current state, a command and its timestamp. The
//! [`Engine`] wrapper serializes calls, journals accepted commands and wakes
//! long-polling workers.

mod clock;
pub mod definition;
mod engine;
pub mod instance;
pub mod job;
pub mod journal;
pub mod state;
pub mod wire;

use thiserror::Error;

pub use clock::{Clock, MockClock, SystemClock};
pub use definition::{ProcessDefinition, TaskDef, TaskKind};
pub use engine::Engine;
pub use instance::{HistoryEntry, InstanceStatus, ParentRef, ProcessInstance, TaskOutcome};
pub use job::{Job, JobStatus, WorkerRegistration, DEFAULT_LOCK_MS, DEFAULT_POLL_MS, DEFAULT_RETRIES};
pub use state::{Command, EngineState, Reply};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid definition: {0}")]
    InvalidDefinition(String),
    #[error("unknown definition '{0}'")]
    UnknownDefinition(String),
    #[error("unknown instance '{0}'")]
    UnknownInstance(String),
    #[error("unknown job '{0}'")]
    UnknownJob(String),
    #[error("duplicate job id '{0}'")]
    DuplicateJob(String),
    #[error("unregistered worker '{worker_id}' for job type '{job_type}'")]
    UnregisteredWorker { worker_id: String, job_type: String },
    #[error("lock lost on job '{0}'")]
    LockLost(String),
    #[error("job '{job_id}' is already {}", status.as_str())]
    JobClosed { job_id: String, status: JobStatus },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("journal error: {0}")]
    Journal(String),
    #[error("journal replay failed at line {line}: {message}")]
    Replay { line: usize, message: String },
}
