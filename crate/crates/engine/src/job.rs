use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const DEFAULT_RETRIES: u32 = 3;
pub const DEFAULT_LOCK_MS: u64 = 30_000;
pub const DEFAULT_POLL_MS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobStatus {
    Queued,
    Locked,
    Completed,
    FailedTerminal,
}

impl JobStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            JobStatus::Queued => "queued",
            JobStatus::Locked => "locked",
            JobStatus::Completed => "completed",
            JobStatus::FailedTerminal => "failed-terminal",
        }
    }

    pub fn is_absorbing(self) -> bool {
        matches!(self, JobStatus::Completed | JobStatus::FailedTerminal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: String,
    pub job_type: String,
    /// Owning instance; `None` for jobs published directly to the broker.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_id: Option<String>,
    /// Snapshot of the instance variables at publish time.
    pub payload: Map<String, Value>,
    pub retries: u32,
    pub status: JobStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock_owner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock_deadline_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_error: Option<String>,
    /// Number of times the job has been handed to a worker.
    #[serde(default)]
    pub deliveries: u32,
}

/// Sole registration per (worker, job type).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerRegistration {
    pub worker_id: String,
    pub job_type: String,
    pub max_concurrent: usize,
}
