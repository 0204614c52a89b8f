//! HTTP routes.
//!
//! | route                          | success                          | errors        |
//! |--------------------------------|----------------------------------|---------------|
//! | `GET /health`                  | `200 {"status": "ok"}`           |               |
//! | `POST /problems`               | `202 {"instance_id"}`            | 400           |
//! | `GET /instances/{id}`          | `200` [`Snapshot`]               | 404           |
//! | `GET /instances/{id}/result`   | `200` solution                   | 404, 409      |
//! | `GET /definitions`             | `200` every deployed version     |               |
//! | `POST /definitions`            | `201 {"id", "version"}`          | 400           |
//! | `GET /devices`                 | `200` device registry            |               |
//!
//! Broker routes are documented in [`qflow_engine::wire`]. Every error body
//! is `{"error": "..."}`.

use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use qflow_core::DeviceDescriptor;
use qflow_engine::wire::{ActivateJobs, ActivatedJob, ActivatedJobs, CompleteJob, ErrorBody, FailAck, FailJob, RegisterWorker};
use qflow_engine::{Engine, EngineError, InstanceStatus, ProcessDefinition, ProcessInstance, WorkerRegistration};
use qflow_workers::client::status_of;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::builtin::STRATEGY_PROCESS;

/// Problem kinds the gateway accepts.
pub const KINDS: [&str; 2] = ["schedule", "knapsack"];

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub devices: Arc<Vec<DeviceDescriptor>>,
    pub lock_ms: u64,
    pub poll_bound: Duration,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let status = StatusCode::from_u16(status_of(&e)).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed JSON: {e}")))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/workers", post(register_worker))
        .route("/jobs/activate", post(activate))
        .route("/jobs/{id}/complete", post(complete))
        .route("/jobs/{id}/fail", post(fail))
        .route("/problems", post(submit))
        .route("/instances/{id}", get(status))
        .route("/instances/{id}/result", get(result))
        .route("/definitions", get(list_definitions).post(deploy))
        .route("/devices", get(devices))
        .with_state(state)
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn register_worker(State(s): State<AppState>, body: Bytes) -> ApiResult<StatusCode> {
    let req: RegisterWorker = parse(&body)?;
    s.engine.register_worker(WorkerRegistration {
        worker_id: req.worker_id,
        job_type: req.job_type,
        max_concurrent: req.max_concurrent,
    })?;
    Ok(StatusCode::NO_CONTENT)
}

async fn activate(State(s): State<AppState>, body: Bytes) -> ApiResult<Json<ActivatedJobs>> {
    let req: ActivateJobs = parse(&body)?;
    let wait = Duration::from_millis(req.timeout_ms.unwrap_or(0)).min(s.poll_bound);
    let jobs = s
        .engine
        .activate_wait(
            &req.worker_id,
            &req.job_type,
            req.max_jobs,
            Some(req.lock_ms.unwrap_or(s.lock_ms)),
            wait,
        )
        .await?;
    Ok(Json(ActivatedJobs {
        jobs: jobs.into_iter().map(ActivatedJob::from).collect(),
    }))
}

async fn complete(State(s): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<StatusCode> {
    let req: CompleteJob = parse(&body)?;
    s.engine.complete(Some(&req.worker_id), &id, req.variables)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn fail(State(s): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<FailAck>> {
    let req: FailJob = parse(&body)?;
    let (requeued, retries) = s.engine.fail(
        Some(&req.worker_id),
        &id,
        &req.message,
        req.retryable.unwrap_or(true),
    )?;
    Ok(Json(FailAck { requeued, retries }))
}

/// Checks the envelope of a problem request; the payload itself is
/// validated by input aggregation.
pub fn validate_request(body: &Value) -> Result<Map<String, Value>, String> {
    let obj = body.as_object().ok_or("request must be a JSON object")?;
    match obj.get("kind") {
        Some(Value::String(k)) if KINDS.contains(&k.as_str()) => {}
        Some(Value::String(k)) => return Err(format!("unknown kind '{k}'")),
        Some(_) => return Err("kind must be a string".into()),
        None => return Err("missing field 'kind'".into()),
    }
    if !obj.get("payload").is_some_and(Value::is_object) {
        return Err("missing object field 'payload'".into());
    }
    if obj.get("options").is_some_and(|o| !o.is_object()) {
        return Err("options must be an object".into());
    }
    Ok(obj.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submitted {
    pub instance_id: String,
}

async fn submit(State(s): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<Submitted>)> {
    let value: Value = parse(&body)?;
    let variables = validate_request(&value).map_err(ApiError::bad_request)?;
    let instance_id = s.engine.create_instance(STRATEGY_PROCESS, variables)?;
    tracing::info!(%instance_id, "problem submitted");
    Ok((StatusCode::ACCEPTED, Json(Submitted { instance_id })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildRef {
    pub instance_id: String,
    pub definition_id: String,
    pub status: InstanceStatus,
}

/// An instance together with the sub-processes it started.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    #[serde(flatten)]
    pub instance: ProcessInstance,
    pub children: Vec<ChildRef>,
}

pub fn snapshot(engine: &Engine, id: &str) -> Option<Snapshot> {
    engine.read(|s| {
        let instance = s.instance(id)?.clone();
        let children = s
            .instances()
            .filter(|i| i.parent.as_ref().is_some_and(|p| p.instance_id == id))
            .map(|i| ChildRef {
                instance_id: i.id.clone(),
                definition_id: i.definition_id.clone(),
                status: i.status,
            })
            .collect();
        Some(Snapshot { instance, children })
    })
}

async fn status(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Snapshot>> {
    snapshot(&s.engine, &id)
        .map(Json)
        .ok_or_else(|| EngineError::UnknownInstance(id).into())
}

async fn result(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let instance = s
        .engine
        .instance(&id)
        .ok_or_else(|| ApiError::from(EngineError::UnknownInstance(id.clone())))?;
    match instance.status {
        InstanceStatus::Running => Err(ApiError::new(StatusCode::CONFLICT, "still running")),
        InstanceStatus::FailedIncident => Err(ApiError::new(
            StatusCode::CONFLICT,
            format!("failed: {}", instance.incident.unwrap_or_default()),
        )),
        InstanceStatus::Completed => instance
            .variables
            .get("solution")
            .cloned()
            .map(Json)
            .ok_or_else(|| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "completed without a solution")),
    }
}

async fn list_definitions(State(s): State<AppState>) -> Json<Vec<ProcessDefinition>> {
    Json(s.engine.read(|st| st.definitions().cloned().collect()))
}

async fn deploy(State(s): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<Value>)> {
    let definition: ProcessDefinition = parse(&body)?;
    let id = definition.id.clone();
    let version = s.engine.deploy(definition)?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "version": version }))))
}

async fn devices(State(s): State<AppState>) -> Json<Vec<DeviceDescriptor>> {
    Json(s.devices.as_ref().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_envelope() {
        let ok = json!({"kind": "schedule", "payload": {"num_shifts": 2, "num_agents": 2}});
        assert!(validate_request(&ok).is_ok());
        let cases = [
            (json!([1]), "JSON object"),
            (json!({"payload": {}}), "missing field 'kind'"),
            (json!({"kind": "tsp", "payload": {}}), "unknown kind 'tsp'"),
            (json!({"kind": "knapsack"}), "payload"),
            (json!({"kind": "knapsack", "payload": {}, "options": 3}), "options"),
        ];
        for (body, needle) in cases {
            let err = validate_request(&body).unwrap_err();
            assert!(err.contains(needle), "{err}");
        }
    }
}
