//! JSON bodies of the broker HTTP protocol.
//!
//! | route                       | request                 | response            |
//! |-----------------------------|-------------------------|---------------------|
//! | `POST /workers`             | [`RegisterWorker`]      | `204`               |
//! | `POST /jobs/activate`       | [`ActivateJobs`]        | [`ActivatedJobs`]   |
//! | `POST /jobs/{id}/complete`  | [`CompleteJob`]         | `204`               |
//! | `POST /jobs/{id}/fail`      | [`FailJob`]             | [`FailAck`]         |
//!
//! Errors are `{"error": "..."}` with 400 (bad request), 404 (unknown job or
//! unregistered worker) or 409 (lock lost, job already closed).

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::job::Job;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterWorker {
    pub worker_id: String,
    pub job_type: String,
    #[serde(default = "one")]
    pub max_concurrent: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivateJobs {
    pub worker_id: String,
    pub job_type: String,
    #[serde(default = "one")]
    pub max_jobs: usize,
    /// Defaults to the broker's lock duration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock_ms: Option<u64>,
    /// Long-poll wait; capped by the broker's poll bound. `0` returns at once.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivatedJob {
    pub id: String,
    pub job_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_id: Option<String>,
    pub retries: u32,
    pub deadline_ms: u64,
    pub variables: Map<String, Value>,
}

impl From<Job> for ActivatedJob {
    fn from(job: Job) -> Self {
        Self {
            id: job.id,
            job_type: job.job_type,
            instance_id: job.instance_id,
            task_id: job.task_id,
            retries: job.retries,
            deadline_ms: job.lock_deadline_ms.unwrap_or_default(),
            variables: job.payload,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivatedJobs {
    pub jobs: Vec<ActivatedJob>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteJob {
    pub worker_id: String,
    #[serde(default)]
    pub variables: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailJob {
    pub worker_id: String,
    pub message: String,
    /// `false` skips the remaining retries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retryable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailAck {
    pub requeued: bool,
    pub retries: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
