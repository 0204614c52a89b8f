use std::sync::Arc;
use std::time::Duration;

use qflow_core::decisions::DecisionRegistry;
use qflow_engine::wire::{ActivateJobs, CompleteJob};
use qflow_engine::{Engine, InstanceStatus, ProcessDefinition, SystemClock, TaskDef};
use qflow_workers::client::{ClientError, JobClient, LocalClient};
use qflow_workers::harness::{run_worker, WorkerOptions};
use qflow_workers::{catalog, Binding, HandlerError, Settings};
use serde_json::{json, Map};
use tokio::sync::watch;

fn engine() -> Arc<Engine> {
    Arc::new(Engine::new(Arc::new(SystemClock), DecisionRegistry::with_defaults()))
}

async fn wait_for(e: &Engine, id: &str) -> InstanceStatus {
    for _ in 0..500 {
        let s = e.instance(id).unwrap().status;
        if s.is_terminal() {
            return s;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    panic!("instance {id} did not finish");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn workers_drive_a_classical_instance_to_completion() {
    let e = engine();
    e.deploy(ProcessDefinition::new(
        "classical",
        vec![
            TaskDef::service("input-aggregation", "strategy_input-aggregation"),
            TaskDef::service("solve", "classical_solver"),
        ],
    ))
    .unwrap();
    let client: Arc<dyn JobClient> = Arc::new(LocalClient::new(e.clone()));
    let (stop, rx) = watch::channel(false);
    let mut handles = Vec::new();
    for b in catalog(Arc::new(Settings::default())) {
        let mut opts = WorkerOptions::new(format!("w/{}", b.job_type));
        opts.poll_ms = 50;
        handles.push(tokio::spawn(run_worker(client.clone(), b, opts, rx.clone())));
    }
    let vars = json!({"kind": "knapsack", "payload": {"values": [6, 10, 12], "weights": [1, 2, 3], "capacity": 5}});
    let id = e.create_instance("classical", vars.as_object().unwrap().clone()).unwrap();
    assert_eq!(wait_for(&e, &id).await, InstanceStatus::Completed);
    assert_eq!(e.instance(&id).unwrap().variables["solution"]["total_value"], 22);
    stop.send_replace(true);
    let mut completed = 0;
    for h in handles {
        completed += h.await.unwrap().unwrap().completed;
    }
    assert_eq!(completed, 2);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn invalid_input_raises_incident_without_retries() {
    let e = engine();
    e.deploy(ProcessDefinition::new("p", vec![TaskDef::service("solve", "classical_solver")])).unwrap();
    let client: Arc<dyn JobClient> = Arc::new(LocalClient::new(e.clone()));
    let (stop, rx) = watch::channel(false);
    let b = catalog(Arc::new(Settings::default())).into_iter().find(|b| b.job_type == "classical_solver").unwrap();
    let mut opts = WorkerOptions::new("w");
    opts.poll_ms = 50;
    let h = tokio::spawn(run_worker(client, b, opts, rx));
    let vars = json!({"problem": {"kind": "schedule", "num_shifts": 7, "num_agents": 3}});
    let id = e.create_instance("p", vars.as_object().unwrap().clone()).unwrap();
    assert_eq!(wait_for(&e, &id).await, InstanceStatus::FailedIncident);
    assert!(e.instance(&id).unwrap().incident.unwrap().starts_with("cap exceeded"));
    stop.send_replace(true);
    let stats = h.await.unwrap().unwrap();
    assert_eq!((stats.completed, stats.failed), (0, 1));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn transient_failures_are_retried() {
    let e = engine();
    e.deploy(ProcessDefinition::new("p", vec![TaskDef::service("flaky", "flaky")])).unwrap();
    let client: Arc<dyn JobClient> = Arc::new(LocalClient::new(e.clone()));
    let attempts = Arc::new(std::sync::atomic::AtomicU32::new(0));
    let counter = attempts.clone();
    let b = Binding::new("flaky", Arc::new(Settings::default()), move |_, _| {
        if counter.fetch_add(1, std::sync::atomic::Ordering::SeqCst) < 2 {
            Err(HandlerError::retryable("simulator OOM"))
        } else {
            Ok(Map::new())
        }
    });
    let (stop, rx) = watch::channel(false);
    let mut opts = WorkerOptions::new("w");
    opts.poll_ms = 50;
    let h = tokio::spawn(run_worker(client, b, opts, rx));
    let id = e.create_instance("p", Map::new()).unwrap();
    assert_eq!(wait_for(&e, &id).await, InstanceStatus::Completed);
    stop.send_replace(true);
    h.await.unwrap().unwrap();
    let job = e.instance(&id).unwrap().history[0].job_id.clone().unwrap();
    assert_eq!(e.job(&job).unwrap().retries, 1);
}

#[tokio::test]
async fn local_client_reports_lost_locks() {
    let e = engine();
    e.publish("j", "t", Map::new(), None).unwrap();
    let c = LocalClient::new(e.clone());
    c.register(&qflow_engine::wire::RegisterWorker { worker_id: "a".into(), job_type: "t".into(), max_concurrent: 1 })
        .await
        .unwrap();
    let jobs = c
        .activate(&ActivateJobs { worker_id: "a".into(), job_type: "t".into(), max_jobs: 1, lock_ms: Some(1), timeout_ms: Some(0) })
        .await
        .unwrap();
    assert_eq!(jobs.len(), 1);
    tokio::time::sleep(Duration::from_millis(5)).await;
    let err = c.complete("j", &CompleteJob { worker_id: "a".into(), variables: Map::new() }).await.unwrap_err();
    assert!(matches!(err, ClientError::LockLost(_)), "{err:?}");
}
