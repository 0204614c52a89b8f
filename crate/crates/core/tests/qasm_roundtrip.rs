//! OpenQASM emission and parsing are mutual inverses.

use proptest::prelude::*;
use qflow_core::domain::{Angle, Gate, QuantumCircuit};
use qflow_core::encoders::{build_constraint_graph, maxcut_to_ising};
use qflow_core::qaoa::build_qaoa_circuit;
use qflow_core::qasm::{emit, parse, QasmError};
use qflow_core::SchedulingProblem;

const PARAMS: [&str; 4] = ["gamma_1", "gamma_2", "beta_1", "beta_2"];

fn angle_strategy() -> impl Strategy<Value = Angle> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(Angle::Value),
        (-1e3f64..1e3).prop_map(Angle::Value),
        (0..PARAMS.len(), -4.0f64..4.0).prop_map(|(i, s)| Angle::param(PARAMS[i], s)),
    ]
}

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    prop_oneof![
        (0..n).prop_map(|qubit| Gate::H { qubit }),
        (0..n, angle_strategy()).prop_map(|(qubit, angle)| Gate::Rx { qubit, angle }),
        (0..n, angle_strategy()).prop_map(|(qubit, angle)| Gate::Rz { qubit, angle }),
        (0..n, 1..n.max(2)).prop_map(move |(control, off)| Gate::Cx { control, target: (control + off) % n }),
    ]
}

fn circuit_strategy() -> impl Strategy<Value = QuantumCircuit> {
    (2usize..=8, any::<bool>(), 0usize..=PARAMS.len()).prop_flat_map(|(n, measured, declared)| {
        proptest::collection::vec(gate_strategy(n), 0..=64).prop_map(move |gates| {
            let mut parameters: Vec<String> = PARAMS[..declared].iter().map(|s| s.to_string()).collect();
            // every referenced parameter must be declared
            for g in &gates {
                if let Some(Angle::Param { param, .. }) = g.angle() {
                    if !parameters.contains(param) {
                        parameters.push(param.clone());
                    }
                }
            }
            QuantumCircuit { num_qubits: n, gates, parameters, measured }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn parse_inverts_emit(c in circuit_strategy()) {
        let text = emit(&c).unwrap();
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(emit(&back).unwrap(), text);
    }
}

#[test]
fn qaoa_circuit_round_trips() {
    let p = SchedulingProblem::new(5, 2);
    let (model, _) = maxcut_to_ising(&build_constraint_graph(&p));
    let mut c = build_qaoa_circuit(&model, 2).unwrap();
    assert_eq!(c.gates.len(), 108);
    let text = emit(&c).unwrap();
    assert_eq!(parse(&text).unwrap(), c);

    c.measured = true;
    let bound = c.bind(&c.binding(&[0.3, 0.7, 0.2, 0.9]).unwrap()).unwrap();
    let text = emit(&bound).unwrap();
    assert!(text.contains("measure q[9] -> c[9];"));
    assert_eq!(parse(&text).unwrap(), bound);
}

#[test]
fn unknown_gate_is_reported_with_line() {
    let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\nh q[0];\ncz q[0],q[1];\n";
    match parse(src) {
        Err(QasmError::UnknownGate { name, line }) => {
            assert_eq!(name, "cz");
            assert_eq!(line, 6);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn non_finite_angles_are_refused() {
    let mut c = QuantumCircuit::new(1);
    c.push(Gate::Rx { qubit: 0, angle: Angle::Value(f64::NAN) }).unwrap();
    assert!(matches!(emit(&c), Err(QasmError::NonFiniteAngle { index: 0 })));
}
