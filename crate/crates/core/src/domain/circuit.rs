use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rotation angle of an `rx`/`rz` gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    /// A bound literal in radians.
    Value(f64),
    /// `scale * parameter`, resolved at simulation time.
    Param { param: String, scale: f64 },
}

impl Angle {
    pub fn param(name: impl Into<String>, scale: f64) -> Self {
        Angle::Param {
            param: name.into(),
            scale,
        }
    }

    pub fn resolve(&self, binding: &BTreeMap<String, f64>) -> Result<f64, CircuitError> {
        match self {
            Angle::Value(v) => Ok(*v),
            Angle::Param { param, scale } => binding
                .get(param)
                .map(|v| scale * v)
                .ok_or_else(|| CircuitError::UnboundParameter(param.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Gate {
    H { qubit: usize },
    Rx { qubit: usize, angle: Angle },
    Rz { qubit: usize, angle: Angle },
    Cx { control: usize, target: usize },
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H { .. } => "h",
            Gate::Rx { .. } => "rx",
            Gate::Rz { .. } => "rz",
            Gate::Cx { .. } => "cx",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H { qubit } | Gate::Rx { qubit, .. } | Gate::Rz { qubit, .. } => vec![qubit],
            Gate::Cx { control, target } => vec![control, target],
        }
    }

    pub fn angle(&self) -> Option<&Angle> {
        match self {
            Gate::Rx { angle, .. } | Gate::Rz { angle, .. } => Some(angle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("cx needs two distinct operands, got {0} twice")]
    RepeatedOperand(usize),
    #[error("undeclared parameter '{0}'")]
    UndeclaredParameter(String),
    #[error("duplicate parameter '{0}'")]
    DuplicateParameter(String),
    #[error("unbound parameter '{0}'")]
    UnboundParameter(String),
    #[error("parameter mismatch: expected {expected} values, got {actual}")]
    ParameterCount { expected: usize, actual: usize },
}

/// Ordered gate list over `num_qubits` qubits with declared free parameters.
///
/// `measured` flags a final circuit whose emission ends with a measurement of
/// every qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumCircuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub parameters: Vec<String>,
    #[serde(default)]
    pub measured: bool,
}

impl QuantumCircuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
            parameters: Vec::new(),
            measured: false,
        }
    }

    pub fn declare_parameter(&mut self, name: impl Into<String>) -> Result<(), CircuitError> {
        let name = name.into();
        if self.parameters.contains(&name) {
            return Err(CircuitError::DuplicateParameter(name));
        }
        self.parameters.push(name);
        Ok(())
    }

    /// Appends `gate` after checking operands and parameter references.
    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        self.check_gate(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    fn check_gate(&self, gate: &Gate) -> Result<(), CircuitError> {
        for q in gate.qubits() {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if let Gate::Cx { control, target } = *gate {
            if control == target {
                return Err(CircuitError::RepeatedOperand(control));
            }
        }
        if let Some(Angle::Param { param, .. }) = gate.angle() {
            if !self.parameters.contains(param) {
                return Err(CircuitError::UndeclaredParameter(param.clone()));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        self.gates.iter().try_for_each(|g| self.check_gate(g))
    }

    pub fn is_bound(&self) -> bool {
        self.gates
            .iter()
            .all(|g| !matches!(g.angle(), Some(Angle::Param { .. })))
    }

    /// Builds a name-to-value binding from values in `parameters` order.
    pub fn binding(&self, values: &[f64]) -> Result<BTreeMap<String, f64>, CircuitError> {
        if values.len() != self.parameters.len() {
            return Err(CircuitError::ParameterCount {
                expected: self.parameters.len(),
                actual: values.len(),
            });
        }
        Ok(self.parameters.iter().cloned().zip(values.iter().copied()).collect())
    }

    /// Copy with every parameter reference replaced by its bound literal.
    pub fn bind(&self, binding: &BTreeMap<String, f64>) -> Result<Self, CircuitError> {
        let gates = self
            .gates
            .iter()
            .map(|g| {
                Ok(match g {
                    Gate::Rx { qubit, angle } => Gate::Rx {
                        qubit: *qubit,
                        angle: Angle::Value(angle.resolve(binding)?),
                    },
                    Gate::Rz { qubit, angle } => Gate::Rz {
                        qubit: *qubit,
                        angle: Angle::Value(angle.resolve(binding)?),
                    },
                    other => other.clone(),
                })
            })
            .collect::<Result<Vec<_>, CircuitError>>()?;
        Ok(Self {
            num_qubits: self.num_qubits,
            gates,
            parameters: Vec::new(),
            measured: self.measured,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_rejects_bad_operands() {
        let mut c = QuantumCircuit::new(2);
        assert_eq!(
            c.push(Gate::H { qubit: 2 }),
            Err(CircuitError::QubitOutOfRange { qubit: 2, num_qubits: 2 })
        );
        assert_eq!(
            c.push(Gate::Cx { control: 1, target: 1 }),
            Err(CircuitError::RepeatedOperand(1))
        );
        assert_eq!(
            c.push(Gate::Rz { qubit: 0, angle: Angle::param("gamma_1", 1.0) }),
            Err(CircuitError::UndeclaredParameter("gamma_1".into()))
        );
    }

    #[test]
    fn bind_resolves_scaled_parameters() {
        let mut c = QuantumCircuit::new(1);
        c.declare_parameter("beta_1").unwrap();
        c.push(Gate::Rx { qubit: 0, angle: Angle::param("beta_1", 2.0) }).unwrap();
        assert!(!c.is_bound());
        let bound = c.bind(&c.binding(&[0.25]).unwrap()).unwrap();
        assert!(bound.is_bound());
        assert_eq!(bound.gates[0], Gate::Rx { qubit: 0, angle: Angle::Value(0.5) });
        assert_eq!(
            c.bind(&BTreeMap::new()),
            Err(CircuitError::UnboundParameter("beta_1".into()))
        );
    }
}
