//! Domain-specific pipeline handlers: problem mapping, circuit generation,
//! refinement and solution mapping.

use qflow_core::encoders::{
    build_constraint_graph, decode_knapsack, decode_schedule, knapsack_to_qubo, maxcut_to_ising,
    qubo_to_ising, DecodeMode, EncodingMetadata,
};
use qflow_core::qaoa::{build_qaoa_circuit, refine, QaoaConfig};
use qflow_core::{qasm, IsingModel, MeasurementCounts, ProblemInstance, MAX_SIMULATOR_QUBITS};
use serde_json::{json, Value};

use crate::vars::{optional, output, required, to_value, Variables};
use crate::{HandlerError, Settings};

/// Which problem kind a pipeline's handlers accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Scheduling,
    Knapsack,
}

impl Domain {
    /// Job-type prefix, e.g. `scheduling_qaoa`.
    pub fn prefix(self) -> &'static str {
        match self {
            Domain::Scheduling => "scheduling_qaoa",
            Domain::Knapsack => "knapsack_qaoa",
        }
    }

    pub fn kind(self) -> &'static str {
        match self {
            Domain::Scheduling => "schedule",
            Domain::Knapsack => "knapsack",
        }
    }
}

fn problem(vars: &Variables, domain: Domain) -> Result<ProblemInstance, HandlerError> {
    let p: ProblemInstance = required(vars, "problem")?;
    if p.kind() != domain.kind() {
        return Err(HandlerError::invalid(format!(
            "kind mismatch: {} handler received a {} problem",
            domain.prefix(),
            p.kind()
        )));
    }
    Ok(p)
}

/// Worker QAOA defaults overlaid with the `qaoa` variable.
pub(crate) fn qaoa_config(s: &Settings, vars: &Variables) -> Result<QaoaConfig, HandlerError> {
    let mut merged = to_value(&s.qaoa);
    if let Some(Value::Object(over)) = vars.get("qaoa") {
        let base = merged.as_object_mut().expect("config is an object");
        base.extend(over.iter().map(|(k, v)| (k.clone(), v.clone())));
    }
    let cfg: QaoaConfig = serde_json::from_value(merged)
        .map_err(|e| HandlerError::invalid(format!("invalid variable 'qaoa': {e}")))?;
    cfg.validate().map_err(|e| HandlerError::invalid(e.to_string()))?;
    Ok(cfg)
}

/// `<prefix>_problem-mapping`: domain instance to Ising model.
pub fn problem_mapping(domain: Domain, _: &Settings, vars: &Variables) -> Result<Variables, HandlerError> {
    let p = problem(vars, domain)?;
    p.validate(usize::MAX)
        .map_err(|e| HandlerError::invalid(e.to_string()))?;
    let (ising, meta) = match &p {
        ProblemInstance::Schedule(s) => maxcut_to_ising(&build_constraint_graph(s)),
        ProblemInstance::Knapsack(k) => {
            let (qubo, meta) = knapsack_to_qubo(k);
            (qubo_to_ising(&qubo), meta)
        }
    };
    Ok(output([
        ("ising_model", to_value(&ising)),
        ("encoding_metadata", to_value(&meta)),
    ]))
}

/// `<prefix>_circuit-generation`: parametrized QAOA ansatz as QASM.
pub fn circuit_generation(_: Domain, s: &Settings, vars: &Variables) -> Result<Variables, HandlerError> {
    let ising: IsingModel = required(vars, "ising_model")?;
    let cfg = qaoa_config(s, vars)?;
    if ising.n > MAX_SIMULATOR_QUBITS {
        return Err(HandlerError::invalid(format!(
            "qubit cap exceeded: {} qubits requested, simulator holds {MAX_SIMULATOR_QUBITS}",
            ising.n
        )));
    }
    let circuit = build_qaoa_circuit(&ising, cfg.layers).map_err(|e| HandlerError::invalid(e.to_string()))?;
    let text = qasm::emit(&circuit).map_err(|e| HandlerError::invalid(e.to_string()))?;
    Ok(output([
        ("circuit_qasm", json!(text)),
        ("num_qubits", json!(circuit.num_qubits)),
        ("num_parameters", json!(circuit.parameters.len())),
    ]))
}

/// `<prefix>_circuit-refinement`: optimise the angles and emit the bound,
/// measured circuit.
pub fn circuit_refinement(_: Domain, s: &Settings, vars: &Variables) -> Result<Variables, HandlerError> {
    let text: String = required(vars, "circuit_qasm")?;
    let circuit = qasm::parse(&text).map_err(|e| HandlerError::invalid(e.to_string()))?;
    let ising: IsingModel = required(vars, "ising_model")?;
    let cfg = qaoa_config(s, vars)?;
    let trace = refine(&circuit, &ising, &cfg).map_err(|e| HandlerError::invalid(e.to_string()))?;
    let binding = circuit
        .binding(&trace.best_parameters)
        .map_err(|e| HandlerError::invalid(e.to_string()))?;
    let mut bound = circuit
        .bind(&binding)
        .map_err(|e| HandlerError::invalid(e.to_string()))?;
    bound.measured = true;
    let bound_text = qasm::emit(&bound).map_err(|e| HandlerError::invalid(e.to_string()))?;
    let first = trace.evaluations.first().map(|e| e.value);
    Ok(output([
        ("bound_circuit_qasm", json!(bound_text)),
        ("best_expectation", json!(trace.best_expectation)),
        ("best_parameters", json!(trace.best_parameters)),
        (
            "trace_summary",
            json!({
                "evaluations": trace.evaluations.len(),
                "restarts": cfg.restarts,
                "fixed_start_expectation": first,
                "best_expectation": trace.best_expectation,
                "best_parameters": trace.best_parameters,
            }),
        ),
    ]))
}

/// `<prefix>_solution-mapping`: counts back to a domain answer.
pub fn solution_mapping(domain: Domain, _: &Settings, vars: &Variables) -> Result<Variables, HandlerError> {
    let counts: MeasurementCounts = required(vars, "counts")?;
    let meta: EncodingMetadata = required(vars, "encoding_metadata")?;
    let p = problem(vars, domain)?;
    let mode = optional::<DecodeMode>(vars, "decode_mode")?.unwrap_or_default();
    let mut solution = match &p {
        ProblemInstance::Schedule(s) => decode_schedule(&counts, &meta, s, mode),
        ProblemInstance::Knapsack(k) => decode_knapsack(&counts, &meta, k, mode),
    }
    .map_err(|e| HandlerError::invalid(e.to_string()))?;
    solution.diagnostics.refinement_trace_len = vars
        .get("trace_summary")
        .and_then(|t| t.get("evaluations"))
        .and_then(Value::as_u64)
        .unwrap_or(0) as usize;
    Ok(output([("solution", to_value(&solution))]))
}
