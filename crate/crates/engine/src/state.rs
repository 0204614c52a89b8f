//! The deterministic core: every mutation is a [`Command`] applied at a
//! recorded time, so replaying a journal rebuilds identical state.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use qflow_core::decisions::DecisionRegistry;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::definition::{variable_reference, ProcessDefinition, TaskKind};
use crate::instance::{HistoryEntry, InstanceStatus, ParentRef, ProcessInstance, TaskOutcome};
use crate::job::{Job, JobStatus, WorkerRegistration, DEFAULT_RETRIES};
use crate::EngineError;

pub const LOCK_EXPIRED: &str = "lock expired";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Deploy {
        definition: ProcessDefinition,
    },
    CreateInstance {
        definition_id: String,
        #[serde(default)]
        variables: Map<String, Value>,
    },
    Publish {
        job_id: String,
        job_type: String,
        #[serde(default)]
        payload: Map<String, Value>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        retries: Option<u32>,
    },
    RegisterWorker {
        registration: WorkerRegistration,
    },
    Activate {
        worker_id: String,
        job_type: String,
        max_jobs: usize,
        lock_ms: u64,
    },
    /// `worker_id: None` completes on behalf of the engine itself and skips
    /// the ownership check, but still requires a live lock.
    Complete {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        worker_id: Option<String>,
        job_id: String,
        #[serde(default)]
        variables: Map<String, Value>,
    },
    Fail {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        worker_id: Option<String>,
        job_id: String,
        message: String,
        #[serde(default = "retryable_default")]
        retryable: bool,
    },
}

fn retryable_default() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    Deployed { id: String, version: u32 },
    Created { instance_id: String },
    Published { job_id: String },
    Registered,
    Activated(Vec<Job>),
    Completed,
    Failed { requeued: bool, retries: u32 },
}

#[derive(Debug)]
pub struct EngineState {
    definitions: BTreeMap<String, Vec<Arc<ProcessDefinition>>>,
    instances: BTreeMap<String, ProcessInstance>,
    jobs: BTreeMap<String, Job>,
    queues: BTreeMap<String, VecDeque<String>>,
    /// Live locks ordered by deadline.
    locks: BTreeSet<(u64, String)>,
    workers: BTreeMap<(String, String), WorkerRegistration>,
    decisions: DecisionRegistry,
    next_instance: u64,
    next_job: u64,
}

impl EngineState {
    pub fn new(decisions: DecisionRegistry) -> Self {
        Self {
            definitions: BTreeMap::new(),
            instances: BTreeMap::new(),
            jobs: BTreeMap::new(),
            queues: BTreeMap::new(),
            locks: BTreeSet::new(),
            workers: BTreeMap::new(),
            decisions,
            next_instance: 0,
            next_job: 0,
        }
    }

    pub fn decisions(&self) -> &DecisionRegistry {
        &self.decisions
    }

    pub fn instance(&self, id: &str) -> Option<&ProcessInstance> {
        self.instances.get(id)
    }

    pub fn instances(&self) -> impl Iterator<Item = &ProcessInstance> {
        self.instances.values()
    }

    pub fn job(&self, id: &str) -> Option<&Job> {
        self.jobs.get(id)
    }

    pub fn jobs(&self) -> impl Iterator<Item = &Job> {
        self.jobs.values()
    }

    /// Latest version when `version` is `None`.
    pub fn definition(&self, id: &str, version: Option<u32>) -> Option<&ProcessDefinition> {
        let versions = self.definitions.get(id)?;
        match version {
            None => versions.last(),
            Some(v) => versions.get((v as usize).checked_sub(1)?),
        }
        .map(Arc::as_ref)
    }

    /// Latest version of every deployed definition.
    pub fn definitions(&self) -> impl Iterator<Item = &ProcessDefinition> {
        self.definitions.values().filter_map(|v| v.last().map(Arc::as_ref))
    }

    pub fn queued(&self, job_type: &str) -> usize {
        self.queues.get(job_type).map_or(0, VecDeque::len)
    }

    /// Earliest live lock deadline, if any.
    pub fn next_deadline(&self) -> Option<u64> {
        self.locks.first().map(|(d, _)| *d)
    }

    pub fn apply(&mut self, at: u64, cmd: &Command) -> Result<Reply, EngineError> {
        self.expire_locks(at);
        match cmd {
            Command::Deploy { definition } => self.deploy(definition),
            Command::CreateInstance {
                definition_id,
                variables,
            } => self.create_instance(at, definition_id, variables.clone()),
            Command::Publish {
                job_id,
                job_type,
                payload,
                retries,
            } => self.publish(job_id, job_type, payload, *retries),
            Command::RegisterWorker { registration } => self.register(registration),
            Command::Activate {
                worker_id,
                job_type,
                max_jobs,
                lock_ms,
            } => self.activate(at, worker_id, job_type, *max_jobs, *lock_ms),
            Command::Complete {
                worker_id,
                job_id,
                variables,
            } => self.complete(at, worker_id.as_deref(), job_id, variables),
            Command::Fail {
                worker_id,
                job_id,
                message,
                retryable,
            } => self.fail(at, worker_id.as_deref(), job_id, message, *retryable),
        }
    }

    fn deploy(&mut self, def: &ProcessDefinition) -> Result<Reply, EngineError> {
        def.validate()?;
        let versions = self.definitions.entry(def.id.clone()).or_default();
        let version = versions.len() as u32 + 1;
        versions.push(Arc::new(ProcessDefinition {
            version,
            ..def.clone()
        }));
        Ok(Reply::Deployed {
            id: def.id.clone(),
            version,
        })
    }

    fn create_instance(
        &mut self,
        at: u64,
        definition_id: &str,
        variables: Map<String, Value>,
    ) -> Result<Reply, EngineError> {
        let def = self
            .definitions
            .get(definition_id)
            .and_then(|v| v.last())
            .cloned()
            .ok_or_else(|| EngineError::UnknownDefinition(definition_id.to_string()))?;
        let id = self.spawn(at, &def, variables, None);
        self.run(at, vec![id.clone()]);
        Ok(Reply::Created { instance_id: id })
    }

    fn spawn(
        &mut self,
        at: u64,
        def: &ProcessDefinition,
        variables: Map<String, Value>,
        parent: Option<ParentRef>,
    ) -> String {
        self.next_instance += 1;
        let id = format!("inst-{}", self.next_instance);
        self.instances.insert(
            id.clone(),
            ProcessInstance {
                id: id.clone(),
                definition_id: def.id.clone(),
                version: def.version,
                status: InstanceStatus::Running,
                cursor: 0,
                current_task: def.tasks.first().map(|t| t.id.clone()),
                variables,
                history: Vec::new(),
                parent,
                incident: None,
                created_ms: at,
            },
        );
        id
    }

    fn fresh_job_id(&mut self) -> String {
        loop {
            self.next_job += 1;
            let id = format!("job-{}", self.next_job);
            if !self.jobs.contains_key(&id) {
                return id;
            }
        }
    }

    fn enqueue(&mut self, job: Job) {
        self.queues
            .entry(job.job_type.clone())
            .or_default()
            .push_back(job.id.clone());
        self.jobs.insert(job.id.clone(), job);
    }

    /// Drives instances forward until each waits on a job or child, or ends.
    fn run(&mut self, at: u64, mut work: Vec<String>) {
        while let Some(id) = work.pop() {
            let Some(inst) = self.instances.get(&id) else {
                continue;
            };
            if inst.status.is_terminal() {
                continue;
            }
            let def = self.definitions[&inst.definition_id][inst.version as usize - 1].clone();
            let mut waiting = false;
            while let Some(task) = def.tasks.get(self.instances[&id].cursor) {
                let inst = self.instances.get_mut(&id).expect("instance exists");
                inst.current_task = Some(task.id.clone());
                if task.optional {
                    let flag = task.flag.as_deref().unwrap_or_default();
                    if inst.variables.get(flag) == Some(&Value::Bool(false)) {
                        inst.cursor += 1;
                        continue;
                    }
                }
                match &task.kind {
                    TaskKind::Service { job_type } => {
                        let job_id = self.fresh_job_id();
                        let inst = self.instances.get_mut(&id).expect("instance exists");
                        inst.history.push(HistoryEntry {
                            task_id: task.id.clone(),
                            job_id: Some(job_id.clone()),
                            child_instance: None,
                            started_ms: at,
                            finished_ms: None,
                            outcome: None,
                        });
                        let job = Job {
                            id: job_id,
                            job_type: job_type.clone(),
                            instance_id: Some(id.clone()),
                            task_id: Some(task.id.clone()),
                            payload: inst.variables.clone(),
                            retries: DEFAULT_RETRIES,
                            status: JobStatus::Queued,
                            lock_owner: None,
                            lock_deadline_ms: None,
                            last_error: None,
                            deliveries: 0,
                        };
                        self.enqueue(job);
                        waiting = true;
                        break;
                    }
                    TaskKind::BusinessRule { decision_id } => {
                        inst.history.push(HistoryEntry {
                            task_id: task.id.clone(),
                            job_id: None,
                            child_instance: None,
                            started_ms: at,
                            finished_ms: None,
                            outcome: None,
                        });
                        match self.decisions.evaluate(decision_id, &inst.variables) {
                            Ok(out) => {
                                inst.variables.extend(out);
                                close_entry(inst, at, TaskOutcome::Completed);
                                inst.cursor += 1;
                            }
                            Err(e) => {
                                let msg = format!("decision '{decision_id}' failed: {e}");
                                self.incident(at, &id, msg);
                                waiting = true;
                                break;
                            }
                        }
                    }
                    TaskKind::CallActivity { target, .. } => {
                        let resolved = match variable_reference(target) {
                            Some(var) => inst.variables.get(var).and_then(Value::as_str).map(str::to_string),
                            None => Some(target.clone()),
                        };
                        let child_def = resolved
                            .as_deref()
                            .and_then(|t| self.definitions.get(t))
                            .and_then(|v| v.last())
                            .cloned();
                        let Some(child_def) = child_def else {
                            let shown = resolved.unwrap_or_else(|| target.clone());
                            self.incident(at, &id, format!("unknown definition '{shown}'"));
                            waiting = true;
                            break;
                        };
                        let vars = inst.variables.clone();
                        let parent = ParentRef {
                            instance_id: id.clone(),
                            task_id: task.id.clone(),
                        };
                        let child = self.spawn(at, &child_def, vars, Some(parent));
                        let inst = self.instances.get_mut(&id).expect("instance exists");
                        inst.history.push(HistoryEntry {
                            task_id: task.id.clone(),
                            job_id: None,
                            child_instance: Some(child.clone()),
                            started_ms: at,
                            finished_ms: None,
                            outcome: None,
                        });
                        work.push(child);
                        waiting = true;
                        break;
                    }
                }
            }
            if !waiting {
                if let Some(parent) = self.finish(at, &id) {
                    work.push(parent);
                }
            }
        }
    }

    /// Marks `id` completed and resumes its parent, returning the parent id.
    fn finish(&mut self, at: u64, id: &str) -> Option<String> {
        let inst = self.instances.get_mut(id).expect("instance exists");
        inst.status = InstanceStatus::Completed;
        inst.current_task = None;
        let parent = inst.parent.clone()?;
        let child_vars = inst.variables.clone();
        let parent_inst = self.instances.get_mut(&parent.instance_id)?;
        if parent_inst.status.is_terminal() {
            return None;
        }
        let def = &self.definitions[&parent_inst.definition_id][parent_inst.version as usize - 1];
        if let Some(TaskKind::CallActivity { outputs, .. }) =
            def.tasks.get(parent_inst.cursor).map(|t| &t.kind)
        {
            for name in outputs {
                if let Some(v) = child_vars.get(name) {
                    parent_inst.variables.insert(name.clone(), v.clone());
                }
            }
        }
        close_entry(parent_inst, at, TaskOutcome::Completed);
        parent_inst.cursor += 1;
        Some(parent.instance_id)
    }

    /// Puts `id` into an incident and propagates a wrapping incident upward.
    fn incident(&mut self, at: u64, id: &str, message: String) {
        let mut current = id.to_string();
        let mut message = message;
        loop {
            let Some(inst) = self.instances.get_mut(&current) else {
                return;
            };
            if inst.status.is_terminal() {
                return;
            }
            tracing::warn!(instance = %current, %message, "incident");
            inst.status = InstanceStatus::FailedIncident;
            close_entry(inst, at, TaskOutcome::Failed);
            inst.incident = Some(message.clone());
            match inst.parent.clone() {
                Some(p) => {
                    message = format!("sub-process '{current}' failed: {message}");
                    current = p.instance_id;
                }
                None => return,
            }
        }
    }

    fn publish(
        &mut self,
        job_id: &str,
        job_type: &str,
        payload: &Map<String, Value>,
        retries: Option<u32>,
    ) -> Result<Reply, EngineError> {
        if self.jobs.contains_key(job_id) {
            return Err(EngineError::DuplicateJob(job_id.to_string()));
        }
        if job_id.is_empty() || job_type.is_empty() {
            return Err(EngineError::InvalidRequest("job id and type must be nonempty".into()));
        }
        self.enqueue(Job {
            id: job_id.to_string(),
            job_type: job_type.to_string(),
            instance_id: None,
            task_id: None,
            payload: payload.clone(),
            retries: retries.unwrap_or(DEFAULT_RETRIES),
            status: JobStatus::Queued,
            lock_owner: None,
            lock_deadline_ms: None,
            last_error: None,
            deliveries: 0,
        });
        Ok(Reply::Published {
            job_id: job_id.to_string(),
        })
    }

    fn register(&mut self, reg: &WorkerRegistration) -> Result<Reply, EngineError> {
        if reg.worker_id.is_empty() || reg.job_type.is_empty() || reg.max_concurrent == 0 {
            return Err(EngineError::InvalidRequest(
                "registration needs a worker id, a job type and max_concurrent >= 1".into(),
            ));
        }
        self.workers
            .insert((reg.worker_id.clone(), reg.job_type.clone()), reg.clone());
        Ok(Reply::Registered)
    }

    fn activate(
        &mut self,
        at: u64,
        worker_id: &str,
        job_type: &str,
        max_jobs: usize,
        lock_ms: u64,
    ) -> Result<Reply, EngineError> {
        let reg = self
            .workers
            .get(&(worker_id.to_string(), job_type.to_string()))
            .ok_or_else(|| EngineError::UnregisteredWorker {
                worker_id: worker_id.to_string(),
                job_type: job_type.to_string(),
            })?;
        let in_flight = self
            .locks
            .iter()
            .filter(|(_, j)| {
                let job = &self.jobs[j];
                job.job_type == job_type && job.lock_owner.as_deref() == Some(worker_id)
            })
            .count();
        let take = max_jobs.min(reg.max_concurrent.saturating_sub(in_flight));
        let deadline = at.saturating_add(lock_ms);
        let mut out = Vec::new();
        let Some(queue) = self.queues.get_mut(job_type) else {
            return Ok(Reply::Activated(out));
        };
        while out.len() < take {
            let Some(id) = queue.pop_front() else { break };
            let job = self.jobs.get_mut(&id).expect("queued job exists");
            debug_assert_eq!(job.status, JobStatus::Queued);
            job.status = JobStatus::Locked;
            job.lock_owner = Some(worker_id.to_string());
            job.lock_deadline_ms = Some(deadline);
            job.deliveries += 1;
            self.locks.insert((deadline, id));
            out.push(job.clone());
        }
        Ok(Reply::Activated(out))
    }

    /// Checks that `job_id` holds a live lock owned by `worker_id`.
    fn check_lock(&self, worker_id: Option<&str>, job_id: &str) -> Result<(), EngineError> {
        let job = self
            .jobs
            .get(job_id)
            .ok_or_else(|| EngineError::UnknownJob(job_id.to_string()))?;
        match job.status {
            JobStatus::Locked => {}
            JobStatus::Queued => return Err(EngineError::LockLost(job_id.to_string())),
            status => {
                return Err(EngineError::JobClosed {
                    job_id: job_id.to_string(),
                    status,
                })
            }
        }
        if let Some(w) = worker_id {
            if job.lock_owner.as_deref() != Some(w) {
                return Err(EngineError::LockLost(job_id.to_string()));
            }
        }
        Ok(())
    }

    fn unlock(&mut self, job_id: &str) -> &mut Job {
        let job = self.jobs.get_mut(job_id).expect("job exists");
        if let Some(d) = job.lock_deadline_ms.take() {
            self.locks.remove(&(d, job_id.to_string()));
        }
        job.lock_owner = None;
        job
    }

    fn complete(
        &mut self,
        at: u64,
        worker_id: Option<&str>,
        job_id: &str,
        variables: &Map<String, Value>,
    ) -> Result<Reply, EngineError> {
        self.check_lock(worker_id, job_id)?;
        let job = self.unlock(job_id);
        job.status = JobStatus::Completed;
        let instance_id = job.instance_id.clone();
        if let Some(iid) = instance_id {
            let inst = self.instances.get_mut(&iid).expect("job instance exists");
            if inst.status == InstanceStatus::Running {
                inst.variables
                    .extend(variables.iter().map(|(k, v)| (k.clone(), v.clone())));
                close_entry(inst, at, TaskOutcome::Completed);
                inst.cursor += 1;
                self.run(at, vec![iid]);
            }
        }
        Ok(Reply::Completed)
    }

    fn fail(
        &mut self,
        at: u64,
        worker_id: Option<&str>,
        job_id: &str,
        message: &str,
        retryable: bool,
    ) -> Result<Reply, EngineError> {
        self.check_lock(worker_id, job_id)?;
        Ok(self.fail_locked(at, job_id, message, retryable))
    }

    fn fail_locked(&mut self, at: u64, job_id: &str, message: &str, retryable: bool) -> Reply {
        let job = self.unlock(job_id);
        job.last_error = Some(message.to_string());
        if retryable && job.retries > 0 {
            job.retries -= 1;
            job.status = JobStatus::Queued;
            let retries = job.retries;
            let (ty, id) = (job.job_type.clone(), job.id.clone());
            self.queues.entry(ty).or_default().push_back(id);
            return Reply::Failed {
                requeued: true,
                retries,
            };
        }
        job.status = JobStatus::FailedTerminal;
        let retries = job.retries;
        if let Some(iid) = job.instance_id.clone() {
            self.incident(at, &iid, message.to_string());
        }
        Reply::Failed {
            requeued: false,
            retries,
        }
    }

    /// Requeues every job whose lock deadline is at or before `at`. Each
    /// expiry is stamped with its own deadline so that the result does not
    /// depend on when the sweep runs.
    pub fn expire_locks(&mut self, at: u64) {
        while let Some((deadline, id)) = self.locks.first().cloned() {
            if deadline > at {
                break;
            }
            tracing::debug!(job = %id, "lock expired");
            self.fail_locked(deadline, &id, LOCK_EXPIRED, true);
        }
    }
}

fn close_entry(inst: &mut ProcessInstance, at: u64, outcome: TaskOutcome) {
    if let Some(entry) = inst.history.last_mut() {
        if entry.outcome.is_none() {
            entry.finished_ms = Some(at);
            entry.outcome = Some(outcome);
        }
    }
}
