//! Handlers of the strategy process: request intake, the classical solver
//! and the optional output join.

use qflow_core::classical;
use qflow_core::domain::SolutionAnswer;
use qflow_core::{DomainSolution, ProblemInstance};
use serde_json::{json, Map, Value};

use crate::vars::{optional, output, required, to_value, Variables};
use crate::{HandlerError, Settings};

fn unknown_reference(kind: &str, id: &str) -> HandlerError {
    HandlerError::invalid(format!("unknown reference: {kind} '{id}'"))
}

/// Fills a scheduling payload from the agent ids it references.
fn enrich_schedule(s: &Settings, payload: &mut Map<String, Value>) -> Result<Option<Value>, HandlerError> {
    let Some(ids) = payload.get("agent_ids").and_then(Value::as_array).cloned() else {
        return Ok(None);
    };
    let mut names = Vec::new();
    for id in &ids {
        let id = id.as_str().ok_or_else(|| HandlerError::invalid("agent_ids must be strings"))?;
        let agent = s.references.agents.get(id).ok_or_else(|| unknown_reference("agent", id))?;
        names.push(json!(agent.name));
    }
    payload.entry("num_agents").or_insert(json!(ids.len()));
    Ok(Some(json!({ "agent_names": names })))
}

/// Fills a knapsack payload's values and weights from container manifests.
fn enrich_knapsack(s: &Settings, payload: &mut Map<String, Value>) -> Result<Option<Value>, HandlerError> {
    let Some(ids) = payload.get("container_ids").and_then(Value::as_array).cloned() else {
        return Ok(None);
    };
    let mut names = Vec::new();
    let mut values = Vec::new();
    let mut weights = Vec::new();
    for id in &ids {
        let id = id.as_str().ok_or_else(|| HandlerError::invalid("container_ids must be strings"))?;
        let c = s.references.containers.get(id).ok_or_else(|| unknown_reference("container", id))?;
        names.push(json!(c.name));
        values.push(json!(c.value));
        weights.push(json!(c.weight));
    }
    payload.entry("values").or_insert(Value::Array(values));
    payload.entry("weights").or_insert(Value::Array(weights));
    Ok(Some(json!({ "container_names": names })))
}

/// `strategy_input-aggregation`: validates the raw `{kind, payload, options}`
/// request and flattens it into process variables.
pub fn input_aggregation(s: &Settings, vars: &Variables) -> Result<Variables, HandlerError> {
    let kind: String = required(vars, "kind")?;
    let mut payload: Map<String, Value> = required(vars, "payload")?;
    let options: Map<String, Value> = optional(vars, "options")?.unwrap_or_default();
    let references = match kind.as_str() {
        "schedule" => enrich_schedule(s, &mut payload)?,
        "knapsack" => enrich_knapsack(s, &mut payload)?,
        other => return Err(HandlerError::invalid(format!("unknown kind '{other}'"))),
    };
    payload.insert("kind".into(), json!(kind));
    let problem: ProblemInstance = serde_json::from_value(Value::Object(payload))
        .map_err(|e| HandlerError::invalid(format!("invalid payload: {e}")))?;
    problem
        .validate(usize::MAX)
        .map_err(|e| HandlerError::invalid(e.to_string()))?;

    let mut qaoa: Map<String, Value> = optional(&options, "qaoa")?.unwrap_or_default();
    if let Some(layers) = options.get("layers") {
        qaoa.insert("layers".into(), layers.clone());
    }
    let mut out = output([
        ("problem", to_value(&problem)),
        ("kind", json!(kind)),
        ("num_variables", json!(problem.num_variables())),
        ("shots", json!(optional::<u64>(&options, "shots")?.unwrap_or(s.default_shots))),
        ("decode_mode", options.get("decode_mode").cloned().unwrap_or(json!("best_sampled"))),
        ("qaoa", Value::Object(qaoa)),
        ("refine", json!(optional::<bool>(&options, "refine")?.unwrap_or(true))),
        (
            "aggregate_output",
            json!(optional::<bool>(&options, "aggregate_output")?.unwrap_or(true)),
        ),
    ]);
    for key in ["seed", "parameters"] {
        if let Some(v) = options.get(key) {
            out.insert(key.into(), v.clone());
        }
    }
    if let Some(r) = references {
        out.insert("references".into(), r);
    }
    Ok(out)
}

/// `classical_solver`: exact brute force or dynamic programming.
pub fn classical_solver(_: &Settings, vars: &Variables) -> Result<Variables, HandlerError> {
    let problem: ProblemInstance = required(vars, "problem")?;
    let solution = classical::solve(&problem).map_err(|e| HandlerError::invalid(e.to_string()))?;
    Ok(output([("solution", to_value(&solution))]))
}

fn name_of<'a>(names: Option<&'a Vec<Value>>, index: usize) -> Option<&'a str> {
    names?.get(index.checked_sub(1)?)?.as_str()
}

/// `strategy_output-aggregation`: joins the solution with display names.
pub fn output_aggregation(_: &Settings, vars: &Variables) -> Result<Variables, HandlerError> {
    let solution: DomainSolution = required(vars, "solution")?;
    let references = vars.get("references");
    let list = |key: &str| references.and_then(|r| r.get(key)).and_then(Value::as_array);
    let detail = match &solution.answer {
        SolutionAnswer::Schedule { assignments } => {
            let names = list("agent_names");
            json!({
                "shifts": assignments.iter().map(|a| json!({
                    "shift": a.shift,
                    "agent": a.agent,
                    "agent_name": name_of(names, a.agent),
                })).collect::<Vec<_>>()
            })
        }
        SolutionAnswer::Knapsack { items, total_value, total_weight } => {
            let names = list("container_names");
            json!({
                "items": items.iter().map(|&i| json!({
                    "item": i,
                    "container_name": name_of(names, i),
                })).collect::<Vec<_>>(),
                "total_value": total_value,
                "total_weight": total_weight,
            })
        }
    };
    Ok(output([(
        "report",
        json!({
            "kind": solution.kind(),
            "status": solution.status,
            "strategy": vars.get("strategy"),
            "detail": detail,
        }),
    )]))
}
