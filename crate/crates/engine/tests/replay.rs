//! Journal replay and randomized broker properties.

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use qflow_core::decisions::DecisionRegistry;
use qflow_engine::{
    Engine, InstanceStatus, Job, JobStatus, MockClock, ProcessDefinition, ProcessInstance, TaskDef,
    WorkerRegistration,
};
use serde_json::{json, Map};

fn snapshot(e: &Engine) -> (Vec<ProcessInstance>, Vec<Job>) {
    e.read(|s| (s.instances().cloned().collect(), s.jobs().cloned().collect()))
}

fn pipeline() -> ProcessDefinition {
    ProcessDefinition::new(
        "p",
        vec![
            TaskDef::service("a", "ta"),
            TaskDef::service("b", "tb").optional_on("run_b"),
            TaskDef::service("c", "ta"),
        ],
    )
}

#[derive(Debug, Clone)]
enum Op {
    Create(bool),
    Activate { worker: usize, ty: usize, max: usize, lock: u64 },
    Complete { worker: usize, pick: usize },
    Fail { worker: usize, pick: usize, retryable: bool },
    Tick(u64),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        any::<bool>().prop_map(Op::Create),
        (0..3usize, 0..2usize, 1..4usize, 1..50u64).prop_map(|(worker, ty, max, lock)| Op::Activate { worker, ty, max, lock }),
        (0..3usize, any::<usize>()).prop_map(|(worker, pick)| Op::Complete { worker, pick }),
        (0..3usize, any::<usize>(), any::<bool>()).prop_map(|(worker, pick, retryable)| Op::Fail { worker, pick, retryable }),
        (1..40u64).prop_map(Op::Tick),
    ]
}

const WORKERS: [&str; 3] = ["w0", "w1", "w2"];
const TYPES: [&str; 2] = ["ta", "tb"];

/// Runs `ops`, checking lock exclusivity and single completion per job.
fn drive(e: &Engine, clock: &MockClock, ops: &[Op]) -> Result<(), TestCaseError> {
    let mut held: BTreeMap<String, (usize, u64)> = BTreeMap::new();
    let mut completions: BTreeMap<String, usize> = BTreeMap::new();
    for op in ops {
        match *op {
            Op::Create(run_b) => {
                let vars = json!({"run_b": run_b}).as_object().unwrap().clone();
                e.create_instance("p", vars).unwrap();
            }
            Op::Activate { worker, ty, max, lock } => {
                let now = clock.now();
                for j in e.activate(WORKERS[worker], TYPES[ty], max, Some(lock)).unwrap() {
                    if let Some(&(_, deadline)) = held.get(&j.id) {
                        prop_assert!(deadline <= now, "job {} locked twice", j.id);
                    }
                    held.insert(j.id.clone(), (worker, now + lock));
                }
            }
            Op::Complete { worker, pick } => {
                let ids: Vec<_> = held.keys().cloned().collect();
                if ids.is_empty() {
                    continue;
                }
                let id = &ids[pick % ids.len()];
                if e.complete(Some(WORKERS[worker]), id, Map::new()).is_ok() {
                    let (owner, deadline) = held[id];
                    prop_assert_eq!(owner, worker);
                    prop_assert!(clock.now() < deadline);
                    *completions.entry(id.clone()).or_default() += 1;
                    held.remove(id);
                }
            }
            Op::Fail { worker, pick, retryable } => {
                let ids: Vec<_> = held.keys().cloned().collect();
                if ids.is_empty() {
                    continue;
                }
                let id = &ids[pick % ids.len()];
                if e.fail(Some(WORKERS[worker]), id, "boom", retryable).is_ok() {
                    held.remove(id);
                }
            }
            Op::Tick(ms) => clock.advance(ms),
        }
    }
    prop_assert!(completions.values().all(|&n| n == 1));
    Ok(())
}

trait Now {
    fn now(&self) -> u64;
}

impl Now for MockClock {
    fn now(&self) -> u64 {
        qflow_engine::Clock::now_ms(self)
    }
}

fn setup(e: &Engine) {
    e.deploy(pipeline()).unwrap();
    for w in WORKERS {
        for t in TYPES {
            e.register_worker(WorkerRegistration { worker_id: w.into(), job_type: t.into(), max_concurrent: 2 })
                .unwrap();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn replay_rebuilds_identical_state(ops in proptest::collection::vec(op(), 1..80)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.jsonl");
        let clock = Arc::new(MockClock::new(0));
        let e = Engine::open(&path, clock.clone(), DecisionRegistry::with_defaults()).unwrap();
        setup(&e);
        drive(&e, &clock, &ops)?;
        e.sweep();
        let before = snapshot(&e);
        drop(e);

        let replayed = Engine::open(&path, clock.clone(), DecisionRegistry::with_defaults()).unwrap();
        prop_assert_eq!(snapshot(&replayed), before);
    }

    #[test]
    fn histories_follow_definition_order(ops in proptest::collection::vec(op(), 1..120)) {
        let clock = Arc::new(MockClock::new(0));
        let e = Engine::new(clock.clone(), DecisionRegistry::with_defaults());
        setup(&e);
        drive(&e, &clock, &ops)?;
        let (instances, jobs) = snapshot(&e);
        for inst in instances {
            let seq = inst.task_sequence();
            let run_b = inst.variables["run_b"] == json!(true);
            let full: Vec<&str> = if run_b { vec!["a", "b", "c"] } else { vec!["a", "c"] };
            prop_assert!(full.starts_with(&seq), "{seq:?}");
            if inst.status == InstanceStatus::Completed {
                prop_assert_eq!(seq, full);
                prop_assert_eq!(inst.cursor, 3);
            }
        }
        for j in jobs {
            prop_assert_eq!(j.status == JobStatus::Locked, j.lock_owner.is_some());
            prop_assert!(j.retries <= 3);
        }
    }
}

#[test]
fn reopened_engine_continues_from_journal() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.jsonl");
    let clock = Arc::new(MockClock::new(0));
    let e = Engine::open(&path, clock.clone(), DecisionRegistry::with_defaults()).unwrap();
    setup(&e);
    let id = e.create_instance("p", json!({"run_b": false}).as_object().unwrap().clone()).unwrap();
    let job = e.activate("w0", "ta", 1, None).unwrap().remove(0);
    drop(e);

    let e = Engine::open(&path, clock, DecisionRegistry::with_defaults()).unwrap();
    e.complete(Some("w0"), &job.id, Map::new()).unwrap();
    assert_eq!(e.instance(&id).unwrap().current_task.as_deref(), Some("c"));
    assert_eq!(e.create_instance("p", Map::new()).unwrap(), "inst-2");
    let lines = std::fs::read_to_string(&path).unwrap().lines().count();
    assert_eq!(lines, 1 + 6 + 1 + 1 + 1 + 1);
}

#[test]
fn corrupt_journal_is_reported_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    std::fs::write(&path, "{\"at_ms\":0,\"command\":{\"command\":\"deploy\"}}\n").unwrap();
    let err = Engine::open(&path, Arc::new(MockClock::new(0)), DecisionRegistry::with_defaults()).err().unwrap();
    assert!(err.to_string().contains("line 1"), "{err}");
}
