use crate::domain::{Angle, Gate, IsingModel, QuantumCircuit};

use super::SimError;
use crate::MAX_SIMULATOR_QUBITS;

/// `gamma_1..gamma_p` followed by `beta_1..beta_p`.
pub fn parameter_names(layers: usize) -> Vec<String> {
    (1..=layers)
        .map(|l| format!("gamma_{l}"))
        .chain((1..=layers).map(|l| format!("beta_{l}")))
        .collect()
}

/// Standard QAOA ansatz for `model` with `layers` cost/mixer rounds.
///
/// Each coupling `J_uv` becomes `CX(u,v) RZ(2γJ)(v) CX(u,v)`, each field
/// `h_i` becomes `RZ(2γh)(i)`, and the mixer is `RX(2β)` on every qubit.
pub fn build_qaoa_circuit(model: &IsingModel, layers: usize) -> Result<QuantumCircuit, SimError> {
    assert!(layers >= 1, "QAOA needs at least one layer");
    if model.n > MAX_SIMULATOR_QUBITS {
        return Err(SimError::TooManyQubits {
            requested: model.n,
            max: MAX_SIMULATOR_QUBITS,
        });
    }
    let mut c = QuantumCircuit::new(model.n);
    for name in parameter_names(layers) {
        c.declare_parameter(name)?;
    }
    for q in 0..model.n {
        c.push(Gate::H { qubit: q })?;
    }
    for l in 1..=layers {
        let gamma = format!("gamma_{l}");
        let beta = format!("beta_{l}");
        for (&(u, v), &j) in model.j.iter().filter(|(_, &j)| j != 0.0) {
            c.push(Gate::Cx { control: u, target: v })?;
            c.push(Gate::Rz {
                qubit: v,
                angle: Angle::param(&gamma, 2.0 * j),
            })?;
            c.push(Gate::Cx { control: u, target: v })?;
        }
        for (&i, &h) in model.h.iter().filter(|(_, &h)| h != 0.0) {
            c.push(Gate::Rz {
                qubit: i,
                angle: Angle::param(&gamma, 2.0 * h),
            })?;
        }
        for q in 0..model.n {
            c.push(Gate::Rx {
                qubit: q,
                angle: Angle::param(&beta, 2.0),
            })?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SchedulingProblem;
    use crate::encoders::{build_constraint_graph, maxcut_to_ising};

    #[test]
    fn smallest_ansatz() {
        let mut m = IsingModel::new(1);
        m.add_field(0, 1.0);
        let c = build_qaoa_circuit(&m, 1).unwrap();
        assert_eq!(c.parameters, vec!["gamma_1", "beta_1"]);
        assert_eq!(
            c.gates,
            vec![
                Gate::H { qubit: 0 },
                Gate::Rz { qubit: 0, angle: Angle::param("gamma_1", 2.0) },
                Gate::Rx { qubit: 0, angle: Angle::param("beta_1", 2.0) },
            ]
        );
    }

    #[test]
    fn single_edge_ansatz() {
        let mut m = IsingModel::new(2);
        m.add_coupling(0, 1, 0.5);
        m.offset = -0.5;
        let c = build_qaoa_circuit(&m, 1).unwrap();
        assert_eq!(
            c.gates,
            vec![
                Gate::H { qubit: 0 },
                Gate::H { qubit: 1 },
                Gate::Cx { control: 0, target: 1 },
                Gate::Rz { qubit: 1, angle: Angle::param("gamma_1", 1.0) },
                Gate::Cx { control: 0, target: 1 },
                Gate::Rx { qubit: 0, angle: Angle::param("beta_1", 2.0) },
                Gate::Rx { qubit: 1, angle: Angle::param("beta_1", 2.0) },
            ]
        );
    }

    #[test]
    fn scheduling_gate_count() {
        let (m, _) = maxcut_to_ising(&build_constraint_graph(&SchedulingProblem::new(5, 2)));
        let c = build_qaoa_circuit(&m, 2).unwrap();
        assert_eq!(c.gates.len(), 108);
        assert_eq!(c.parameters, vec!["gamma_1", "gamma_2", "beta_1", "beta_2"]);
    }

    #[test]
    fn oversized_model_is_rejected() {
        assert!(matches!(
            build_qaoa_circuit(&IsingModel::new(30), 1),
            Err(SimError::TooManyQubits { requested: 30, .. })
        ));
    }
}
