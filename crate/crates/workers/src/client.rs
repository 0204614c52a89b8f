//! Broker access for workers: over HTTP, or directly against an in-process
//! engine.

use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use qflow_engine::wire::{ActivateJobs, ActivatedJob, CompleteJob, ErrorBody, FailAck, FailJob, RegisterWorker};
use qflow_engine::{Engine, EngineError, WorkerRegistration, DEFAULT_POLL_MS};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClientError {
    /// The job's lock expired or moved to another worker; drop the result.
    #[error("lock lost: {0}")]
    LockLost(String),
    #[error("rejected ({status}): {message}")]
    Rejected { status: u16, message: String },
    #[error("transport error: {0}")]
    Transport(String),
}

#[async_trait]
pub trait JobClient: Send + Sync {
    async fn register(&self, req: &RegisterWorker) -> Result<(), ClientError>;
    async fn activate(&self, req: &ActivateJobs) -> Result<Vec<ActivatedJob>, ClientError>;
    async fn complete(&self, job_id: &str, req: &CompleteJob) -> Result<(), ClientError>;
    async fn fail(&self, job_id: &str, req: &FailJob) -> Result<FailAck, ClientError>;
}

/// HTTP status an engine error maps to on the wire.
pub fn status_of(e: &EngineError) -> u16 {
    match e {
        EngineError::UnknownDefinition(_)
        | EngineError::UnknownInstance(_)
        | EngineError::UnknownJob(_)
        | EngineError::UnregisteredWorker { .. } => 404,
        EngineError::LockLost(_) | EngineError::JobClosed { .. } | EngineError::DuplicateJob(_) => 409,
        EngineError::InvalidDefinition(_) | EngineError::InvalidRequest(_) => 400,
        EngineError::Journal(_) | EngineError::Replay { .. } => 500,
    }
}

impl From<EngineError> for ClientError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::LockLost(_) | EngineError::JobClosed { .. } => ClientError::LockLost(e.to_string()),
            other => ClientError::Rejected {
                status: status_of(&other),
                message: other.to_string(),
            },
        }
    }
}

/// Calls an engine living in the same process.
#[derive(Clone)]
pub struct LocalClient {
    engine: Arc<Engine>,
    poll_bound: Duration,
}

impl LocalClient {
    pub fn new(engine: Arc<Engine>) -> Self {
        Self {
            engine,
            poll_bound: Duration::from_millis(DEFAULT_POLL_MS),
        }
    }
}

#[async_trait]
impl JobClient for LocalClient {
    async fn register(&self, req: &RegisterWorker) -> Result<(), ClientError> {
        Ok(self.engine.register_worker(WorkerRegistration {
            worker_id: req.worker_id.clone(),
            job_type: req.job_type.clone(),
            max_concurrent: req.max_concurrent,
        })?)
    }

    async fn activate(&self, req: &ActivateJobs) -> Result<Vec<ActivatedJob>, ClientError> {
        let wait = Duration::from_millis(req.timeout_ms.unwrap_or(0)).min(self.poll_bound);
        let jobs = self
            .engine
            .activate_wait(&req.worker_id, &req.job_type, req.max_jobs, req.lock_ms, wait)
            .await?;
        Ok(jobs.into_iter().map(ActivatedJob::from).collect())
    }

    async fn complete(&self, job_id: &str, req: &CompleteJob) -> Result<(), ClientError> {
        Ok(self
            .engine
            .complete(Some(&req.worker_id), job_id, req.variables.clone())?)
    }

    async fn fail(&self, job_id: &str, req: &FailJob) -> Result<FailAck, ClientError> {
        let (requeued, retries) = self.engine.fail(
            Some(&req.worker_id),
            job_id,
            &req.message,
            req.retryable.unwrap_or(true),
        )?;
        Ok(FailAck { requeued, retries })
    }
}

/// Speaks the broker's HTTP protocol.
#[derive(Clone)]
pub struct HttpClient {
    base: String,
    http: reqwest::Client,
}

impl HttpClient {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base: base_url.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    async fn post<B: serde::Serialize + Sync>(&self, path: &str, body: &B) -> Result<reqwest::Response, ClientError> {
        let resp = self
            .http
            .post(format!("{}{path}", self.base))
            .json(body)
            .send()
            .await
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if resp.status().is_success() {
            return Ok(resp);
        }
        let message = match resp.json::<ErrorBody>().await {
            Ok(b) => b.error,
            Err(_) => format!("HTTP {status}"),
        };
        Err(if status == 409 {
            ClientError::LockLost(message)
        } else {
            ClientError::Rejected { status, message }
        })
    }
}

#[async_trait]
impl JobClient for HttpClient {
    async fn register(&self, req: &RegisterWorker) -> Result<(), ClientError> {
        self.post("/workers", req).await.map(drop)
    }

    async fn activate(&self, req: &ActivateJobs) -> Result<Vec<ActivatedJob>, ClientError> {
        let resp = self.post("/jobs/activate", req).await?;
        let body: qflow_engine::wire::ActivatedJobs =
            resp.json().await.map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(body.jobs)
    }

    async fn complete(&self, job_id: &str, req: &CompleteJob) -> Result<(), ClientError> {
        self.post(&format!("/jobs/{job_id}/complete"), req).await.map(drop)
    }

    async fn fail(&self, job_id: &str, req: &FailJob) -> Result<FailAck, ClientError> {
        let resp = self.post(&format!("/jobs/{job_id}/fail"), req).await?;
        resp.json().await.map_err(|e| ClientError::Transport(e.to_string()))
    }
}
