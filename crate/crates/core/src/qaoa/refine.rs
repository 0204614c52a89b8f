use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{NelderMead, SimError, StateVector};
use crate::domain::{IsingModel, QuantumCircuit};

/// Fixed starting value for every angle of the first restart.
pub const FIXED_START: f64 = 0.1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    #[default]
    NelderMead,
}

/// Layer count and optimiser budget for one refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaoaConfig {
    pub layers: usize,
    pub optimizer: Optimizer,
    pub max_evals: usize,
    pub tolerance: f64,
    pub restarts: usize,
    pub rng_seed: u64,
    pub initial_step: f64,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        Self {
            layers: 2,
            optimizer: Optimizer::NelderMead,
            max_evals: 400,
            tolerance: 1e-4,
            restarts: 3,
            rng_seed: 0,
            initial_step: 0.25,
        }
    }
}

impl QaoaConfig {
    pub fn validate(&self) -> Result<(), RefineError> {
        if self.layers == 0 {
            return Err(RefineError::InvalidConfig("layers must be at least 1".into()));
        }
        if self.max_evals == 0 {
            return Err(RefineError::InvalidConfig("max_evals must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(RefineError::InvalidConfig("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub parameters: Vec<f64>,
    pub value: f64,
}

/// Every objective evaluation across all restarts, plus the best point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementTrace {
    pub evaluations: Vec<Evaluation>,
    pub best_parameters: Vec<f64>,
    pub best_expectation: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("parameter mismatch: circuit has {actual} parameters, expected {expected} for {layers} layers")]
    ParameterMismatch {
        expected: usize,
        actual: usize,
        layers: usize,
    },
    #[error("invalid QAOA config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Starting points: the fixed point first, then uniform draws with
/// `γ ∈ [0, π)` and `β ∈ [0, π/2)`. All drawn up front so the budget never
/// influences them.
fn initial_points(cfg: &QaoaConfig) -> Vec<Vec<f64>> {
    let p = cfg.layers;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut points = vec![vec![FIXED_START; 2 * p]];
    for _ in 1..cfg.restarts {
        let gammas = (0..p).map(|_| rng.random_range(0.0..PI)).collect::<Vec<_>>();
        let betas = (0..p).map(|_| rng.random_range(0.0..FRAC_PI_2)).collect::<Vec<_>>();
        points.push(gammas.into_iter().chain(betas).collect());
    }
    points
}

/// Minimises the Ising expectation of `circuit` over its `2p` angles.
pub fn refine(
    circuit: &QuantumCircuit,
    model: &IsingModel,
    cfg: &QaoaConfig,
) -> Result<RefinementTrace, RefineError> {
    cfg.validate()?;
    let expected = 2 * cfg.layers;
    if circuit.parameters.len() != expected {
        return Err(RefineError::ParameterMismatch {
            expected,
            actual: circuit.parameters.len(),
            layers: cfg.layers,
        });
    }
    if circuit.num_qubits != model.n {
        return Err(SimError::DimensionMismatch {
            state: circuit.num_qubits,
            model: model.n,
        }
        .into());
    }
    // surfaces the qubit cap before any work
    StateVector::zero(circuit.num_qubits)?;

    let diagonal = model.diagonal();
    let mut evaluations = Vec::new();
    let mut failure = None;
    let mut objective = |theta: &[f64]| -> f64 {
        let value = circuit
            .binding(theta)
            .map_err(SimError::from)
            .and_then(|b| super::simulate(circuit, &b))
            .map(|s| s.expectation_diagonal(&diagonal));
        match value {
            Ok(v) => {
                evaluations.push(Evaluation {
                    parameters: theta.to_vec(),
                    value: v,
                });
                v
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        }
    };

    let optimizer = NelderMead {
        initial_step: cfg.initial_step,
        tolerance: cfg.tolerance,
        max_evals: cfg.max_evals,
    };
    for start in initial_points(cfg) {
        optimizer.minimize(&start, &mut objective);
    }
    if let Some(e) = failure {
        return Err(e.into());
    }

    let best = evaluations
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .expect("every restart evaluates its start");
    Ok(RefinementTrace {
        best_parameters: best.parameters,
        best_expectation: best.value,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::build_qaoa_circuit;

    fn single_edge() -> IsingModel {
        let mut m = IsingModel::new(2);
        m.add_coupling(0, 1, 0.5);
        m.offset = -0.5;
        m
    }

    #[test]
    fn first_restart_starts_at_fixed_point() {
        let m = single_edge();
        let c = build_qaoa_circuit(&m, 1).unwrap();
        let trace = refine(&c, &m, &QaoaConfig { layers: 1, ..Default::default() }).unwrap();
        assert_eq!(trace.evaluations[0].parameters, vec![FIXED_START, FIXED_START]);
        assert!(trace.best_expectation <= trace.evaluations[0].value);
        assert!(trace.evaluations.len() <= 3 * 400);
    }

    #[test]
    fn zero_model_is_flat() {
        let mut m = IsingModel::new(2);
        m.offset = 1.75;
        let c = build_qaoa_circuit(&m, 1).unwrap();
        let cfg = QaoaConfig { layers: 1, max_evals: 30, ..Default::default() };
        let trace = refine(&c, &m, &cfg).unwrap();
        assert!(trace.evaluations.iter().all(|e| (e.value - 1.75).abs() < 1e-12));
    }

    #[test]
    fn layer_mismatch_is_rejected() {
        let m = single_edge();
        let c = build_qaoa_circuit(&m, 2).unwrap();
        let err = refine(&c, &m, &QaoaConfig { layers: 1, ..Default::default() }).unwrap_err();
        assert!(matches!(err, RefineError::ParameterMismatch { expected: 2, actual: 4, .. }));
    }

    #[test]
    fn restarts_are_seed_deterministic() {
        let cfg = QaoaConfig { layers: 2, restarts: 4, rng_seed: 9, ..Default::default() };
        let a = initial_points(&cfg);
        assert_eq!(a, initial_points(&cfg));
        assert_eq!(a.len(), 4);
        for pt in &a[1..] {
            assert!(pt[..2].iter().all(|g| (0.0..PI).contains(g)));
            assert!(pt[2..].iter().all(|b| (0.0..FRAC_PI_2).contains(b)));
        }
    }
}
