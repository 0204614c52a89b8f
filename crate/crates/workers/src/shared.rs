//! Handlers reused unchanged by every domain pipeline. They see only qubit
//! counts, circuits and devices.

use qflow_core::decisions::select_device;
use qflow_core::qaoa::{sample, simulate};
use qflow_core::qasm;
use serde_json::json;

use crate::vars::{optional, output, required, to_value, Variables};
use crate::{HandlerError, Settings};

/// `quantum_device-selection`: first registry device the table accepts.
pub fn device_selection(s: &Settings, vars: &Variables) -> Result<Variables, HandlerError> {
    let required_qubits: usize = required(vars, "num_qubits")?;
    let shots = optional::<u64>(vars, "shots")?.unwrap_or(s.default_shots);
    let device = select_device(&s.device_table, &s.devices, required_qubits, shots)
        .map_err(|e| HandlerError::invalid(e.to_string()))?;
    Ok(output([("device_id", json!(device.id))]))
}

/// `quantum_circuit-execution`: simulate and sample on the selected device.
///
/// Uses `bound_circuit_qasm` when present. Otherwise `circuit_qasm` is bound
/// from the `parameters` variable, which is how runs without refinement
/// supply their angles.
pub fn circuit_execution(s: &Settings, vars: &Variables) -> Result<Variables, HandlerError> {
    let device_id: String = required(vars, "device_id")?;
    let device = s
        .devices
        .iter()
        .find(|d| d.id == device_id)
        .ok_or_else(|| HandlerError::invalid(format!("unknown device '{device_id}'")))?;
    if !device.available {
        return Err(HandlerError::retryable(format!("device '{device_id}' is unavailable")));
    }
    let mut circuit = match optional::<String>(vars, "bound_circuit_qasm")? {
        Some(text) => qasm::parse(&text),
        None => qasm::parse(&required::<String>(vars, "circuit_qasm")?),
    }
    .map_err(|e| HandlerError::invalid(e.to_string()))?;
    if !circuit.is_bound() {
        let values: Vec<f64> = match optional(vars, "parameters")? {
            Some(v) => v,
            None => {
                let first = circuit.parameters.first().cloned().unwrap_or_default();
                return Err(HandlerError::invalid(format!("unbound parameter '{first}'")));
            }
        };
        let binding = circuit
            .binding(&values)
            .map_err(|e| HandlerError::invalid(e.to_string()))?;
        circuit = circuit
            .bind(&binding)
            .map_err(|e| HandlerError::invalid(e.to_string()))?;
    }
    if circuit.num_qubits > device.max_qubits {
        return Err(HandlerError::invalid(format!(
            "device '{device_id}' has {} qubits, circuit needs {}",
            device.max_qubits, circuit.num_qubits
        )));
    }
    let shots = optional::<u64>(vars, "shots")?.unwrap_or(s.default_shots);
    if shots == 0 {
        return Err(HandlerError::invalid("shots must be positive"));
    }
    let seed = optional::<u64>(vars, "seed")?.or(device.seed).unwrap_or(0);
    let state = simulate(&circuit, &Default::default()).map_err(|e| HandlerError::invalid(e.to_string()))?;
    let counts = sample(&state, shots, seed);
    Ok(output([("counts", to_value(&counts)), ("shots", json!(shots))]))
}
