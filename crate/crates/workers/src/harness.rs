//! Registration, polling loop and graceful shutdown shared by all workers.

use std::sync::Arc;
use std::time::Duration;

use qflow_engine::wire::{ActivateJobs, ActivatedJob, CompleteJob, FailJob, RegisterWorker};
use qflow_engine::{DEFAULT_LOCK_MS, DEFAULT_POLL_MS};
use tokio::sync::watch;
use tokio::task::JoinSet;

use crate::client::{ClientError, JobClient};
use crate::Binding;

const RETRY_BACKOFF: Duration = Duration::from_millis(500);

#[derive(Debug, Clone)]
pub struct WorkerOptions {
    pub worker_id: String,
    /// Jobs in flight at once; also sent as the registration limit.
    pub max_concurrent: usize,
    pub lock_ms: u64,
    pub poll_ms: u64,
}

impl WorkerOptions {
    pub fn new(worker_id: impl Into<String>) -> Self {
        Self {
            worker_id: worker_id.into(),
            max_concurrent: 1,
            lock_ms: DEFAULT_LOCK_MS,
            poll_ms: DEFAULT_POLL_MS,
        }
    }
}

/// Outcome counts of one worker run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkerStats {
    pub completed: u64,
    pub failed: u64,
    pub lost: u64,
}

enum Outcome {
    Completed,
    Failed,
    Lost,
}

async fn process(client: Arc<dyn JobClient>, binding: Binding, worker_id: String, job: ActivatedJob) -> Outcome {
    let vars = job.variables;
    let result = tokio::task::spawn_blocking(move || binding.handle(&vars))
        .await
        .unwrap_or_else(|e| Err(crate::HandlerError::retryable(format!("handler panicked: {e}"))));
    let reported = match result {
        Ok(variables) => client
            .complete(&job.id, &CompleteJob { worker_id, variables })
            .await
            .map(|_| Outcome::Completed),
        Err(e) => {
            tracing::warn!(job = %job.id, error = %e, "job failed");
            client
                .fail(
                    &job.id,
                    &FailJob {
                        worker_id,
                        message: e.message,
                        retryable: Some(e.retryable),
                    },
                )
                .await
                .map(|_| Outcome::Failed)
        }
    };
    match reported {
        Ok(o) => o,
        Err(ClientError::LockLost(m)) => {
            tracing::warn!(job = %job.id, reason = %m, "result discarded");
            Outcome::Lost
        }
        Err(e) => {
            tracing::error!(job = %job.id, error = %e, "could not report result");
            Outcome::Lost
        }
    }
}

/// Serves `binding` until `shutdown` turns true, then drains jobs in flight.
pub async fn run_worker(
    client: Arc<dyn JobClient>,
    binding: Binding,
    opts: WorkerOptions,
    mut shutdown: watch::Receiver<bool>,
) -> Result<WorkerStats, ClientError> {
    let max = opts.max_concurrent.max(1);
    client
        .register(&RegisterWorker {
            worker_id: opts.worker_id.clone(),
            job_type: binding.job_type.clone(),
            max_concurrent: max,
        })
        .await?;
    tracing::info!(worker = %opts.worker_id, job_type = %binding.job_type, "registered");

    let mut stats = WorkerStats::default();
    let tally = |o: Outcome, stats: &mut WorkerStats| match o {
        Outcome::Completed => stats.completed += 1,
        Outcome::Failed => stats.failed += 1,
        Outcome::Lost => stats.lost += 1,
    };
    let mut running: JoinSet<Outcome> = JoinSet::new();
    while !*shutdown.borrow() {
        while let Some(done) = running.try_join_next() {
            tally(done.unwrap_or(Outcome::Lost), &mut stats);
        }
        let free = max - running.len();
        if free == 0 {
            tokio::select! {
                Some(done) = running.join_next() => tally(done.unwrap_or(Outcome::Lost), &mut stats),
                _ = shutdown.changed() => {}
            }
            continue;
        }
        let req = ActivateJobs {
            worker_id: opts.worker_id.clone(),
            job_type: binding.job_type.clone(),
            max_jobs: free,
            lock_ms: Some(opts.lock_ms),
            timeout_ms: Some(opts.poll_ms),
        };
        let jobs = tokio::select! {
            r = client.activate(&req) => r,
            _ = shutdown.changed() => continue,
        };
        match jobs {
            Ok(jobs) => {
                for job in jobs {
                    tracing::debug!(job = %job.id, "activated");
                    running.spawn(process(client.clone(), binding.clone(), opts.worker_id.clone(), job));
                }
            }
            Err(e) => {
                tracing::warn!(error = %e, "activation failed");
                tokio::select! {
                    _ = tokio::time::sleep(RETRY_BACKOFF) => {}
                    _ = shutdown.changed() => {}
                }
            }
        }
    }
    while let Some(done) = running.join_next().await {
        tally(done.unwrap_or(Outcome::Lost), &mut stats);
    }
    tracing::info!(worker = %opts.worker_id, ?stats, "stopped");
    Ok(stats)
}
