use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use parking_lot::Mutex;
use qflow_core::decisions::DecisionRegistry;
use serde_json::{Map, Value};
use tokio::sync::Notify;

use crate::clock::Clock;
use crate::definition::ProcessDefinition;
use crate::instance::ProcessInstance;
use crate::job::{Job, WorkerRegistration, DEFAULT_LOCK_MS};
use crate::journal::{Journal, Record};
use crate::state::{Command, EngineState, Reply};
use crate::EngineError;

/// Upper bound on one long-poll sleep, so expired locks are noticed even
/// when nothing else happens.
const POLL_TICK: Duration = Duration::from_millis(100);

struct Inner {
    state: EngineState,
    journal: Option<Journal>,
}

/// Thread-safe engine and broker. Every mutation is serialized through one
/// lock and, when a journal is attached, written to it before returning.
pub struct Engine {
    inner: Mutex<Inner>,
    clock: Arc<dyn Clock>,
    notify: Notify,
}

impl Engine {
    pub fn new(clock: Arc<dyn Clock>, decisions: DecisionRegistry) -> Self {
        Self {
            inner: Mutex::new(Inner {
                state: EngineState::new(decisions),
                journal: None,
            }),
            clock,
            notify: Notify::new(),
        }
    }

    /// Replays the journal at `path` and keeps appending to it.
    pub fn open(
        path: impl AsRef<Path>,
        clock: Arc<dyn Clock>,
        decisions: DecisionRegistry,
    ) -> Result<Self, EngineError> {
        let (journal, records) = Journal::open(path)?;
        let mut state = EngineState::new(decisions);
        for (i, r) in records.iter().enumerate() {
            state.apply(r.at_ms, &r.command).map_err(|e| EngineError::Replay {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        state.expire_locks(clock.now_ms());
        tracing::info!(path = %journal.path().display(), records = records.len(), "journal replayed");
        Ok(Self {
            inner: Mutex::new(Inner {
                state,
                journal: Some(journal),
            }),
            clock,
            notify: Notify::new(),
        })
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn execute(&self, command: Command) -> Result<Reply, EngineError> {
        let at = self.clock.now_ms();
        let mut inner = self.inner.lock();
        let reply = inner.state.apply(at, &command)?;
        let idle = matches!(&reply, Reply::Activated(jobs) if jobs.is_empty());
        if !idle {
            if let Some(j) = inner.journal.as_mut() {
                j.append(&Record {
                    at_ms: at,
                    command,
                })?;
            }
            drop(inner);
            self.notify.notify_waiters();
        }
        Ok(reply)
    }

    /// Applies lock expiry up to now. Commands do this implicitly; call it
    /// before reading job state that must reflect expired locks.
    pub fn sweep(&self) {
        let at = self.clock.now_ms();
        self.inner.lock().state.expire_locks(at);
    }

    /// Read access to the current state.
    pub fn read<R>(&self, f: impl FnOnce(&EngineState) -> R) -> R {
        f(&self.inner.lock().state)
    }

    pub fn deploy(&self, definition: ProcessDefinition) -> Result<u32, EngineError> {
        match self.execute(Command::Deploy { definition })? {
            Reply::Deployed { version, .. } => Ok(version),
            other => unreachable!("deploy replied {other:?}"),
        }
    }

    pub fn create_instance(
        &self,
        definition_id: &str,
        variables: Map<String, Value>,
    ) -> Result<String, EngineError> {
        match self.execute(Command::CreateInstance {
            definition_id: definition_id.to_string(),
            variables,
        })? {
            Reply::Created { instance_id } => Ok(instance_id),
            other => unreachable!("create replied {other:?}"),
        }
    }

    pub fn publish(
        &self,
        job_id: &str,
        job_type: &str,
        payload: Map<String, Value>,
        retries: Option<u32>,
    ) -> Result<(), EngineError> {
        self.execute(Command::Publish {
            job_id: job_id.to_string(),
            job_type: job_type.to_string(),
            payload,
            retries,
        })
        .map(drop)
    }

    pub fn register_worker(&self, registration: WorkerRegistration) -> Result<(), EngineError> {
        self.execute(Command::RegisterWorker { registration }).map(drop)
    }

    /// Non-blocking activation.
    pub fn activate(
        &self,
        worker_id: &str,
        job_type: &str,
        max_jobs: usize,
        lock_ms: Option<u64>,
    ) -> Result<Vec<Job>, EngineError> {
        match self.execute(Command::Activate {
            worker_id: worker_id.to_string(),
            job_type: job_type.to_string(),
            max_jobs,
            lock_ms: lock_ms.unwrap_or(DEFAULT_LOCK_MS),
        })? {
            Reply::Activated(jobs) => Ok(jobs),
            other => unreachable!("activate replied {other:?}"),
        }
    }

    /// Activation that waits up to `timeout` for work to appear. Always
    /// returns, possibly with an empty list.
    pub async fn activate_wait(
        &self,
        worker_id: &str,
        job_type: &str,
        max_jobs: usize,
        lock_ms: Option<u64>,
        timeout: Duration,
    ) -> Result<Vec<Job>, EngineError> {
        let until = tokio::time::Instant::now() + timeout;
        loop {
            let notified = self.notify.notified();
            tokio::pin!(notified);
            notified.as_mut().enable();
            let jobs = self.activate(worker_id, job_type, max_jobs, lock_ms)?;
            let now = tokio::time::Instant::now();
            if !jobs.is_empty() || now >= until {
                return Ok(jobs);
            }
            let _ = tokio::time::timeout((until - now).min(POLL_TICK), notified).await;
        }
    }

    pub fn complete(
        &self,
        worker_id: Option<&str>,
        job_id: &str,
        variables: Map<String, Value>,
    ) -> Result<(), EngineError> {
        self.execute(Command::Complete {
            worker_id: worker_id.map(str::to_string),
            job_id: job_id.to_string(),
            variables,
        })
        .map(drop)
    }

    /// Returns `(requeued, retries left)`.
    pub fn fail(
        &self,
        worker_id: Option<&str>,
        job_id: &str,
        message: &str,
        retryable: bool,
    ) -> Result<(bool, u32), EngineError> {
        match self.execute(Command::Fail {
            worker_id: worker_id.map(str::to_string),
            job_id: job_id.to_string(),
            message: message.to_string(),
            retryable,
        })? {
            Reply::Failed { requeued, retries } => Ok((requeued, retries)),
            other => unreachable!("fail replied {other:?}"),
        }
    }

    pub fn instance(&self, id: &str) -> Option<ProcessInstance> {
        self.read(|s| s.instance(id).cloned())
    }

    pub fn job(&self, id: &str) -> Option<Job> {
        self.read(|s| s.job(id).cloned())
    }
}
