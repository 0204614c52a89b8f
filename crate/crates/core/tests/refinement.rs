//! Variational refinement against an exhaustive angle scan.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use qflow_core::domain::ConstraintGraph;
use qflow_core::encoders::{build_constraint_graph, maxcut_to_ising};
use qflow_core::qaoa::{build_qaoa_circuit, refine, QaoaConfig, FIXED_START};
use qflow_core::SchedulingProblem;

/// Single-edge p=1 cut expectation, simulated by hand on four amplitudes.
fn single_edge_energy(gamma: f64, beta: f64) -> f64 {
    let h = Complex64::new(0.5, 0.0);
    let mut amp = [h; 4];
    // exp(-i γ Z0 Z1 / 2): phase depends on parity only
    for (b, a) in amp.iter_mut().enumerate() {
        let parity = (b & 1) ^ (b >> 1);
        let sign = if parity == 0 { -1.0 } else { 1.0 };
        *a *= Complex64::from_polar(1.0, sign * gamma / 2.0);
    }
    let (c, s) = (beta.cos(), beta.sin());
    for q in 0..2 {
        let mask = 1 << q;
        for b in 0..4 {
            if b & mask == 0 {
                let (a0, a1) = (amp[b], amp[b | mask]);
                amp[b] = a0 * c - Complex64::i() * s * a1;
                amp[b | mask] = a1 * c - Complex64::i() * s * a0;
            }
        }
    }
    // energy = -cut; cut = 1 on odd parity
    -(amp[1].norm_sqr() + amp[2].norm_sqr())
}

fn grid_minimum() -> (f64, f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..100 {
        for k in 0..100 {
            let g = PI * i as f64 / 99.0;
            let b = FRAC_PI_2 * k as f64 / 99.0;
            let e = single_edge_energy(g, b);
            if e < best.0 {
                best = (e, g, b);
            }
        }
    }
    best
}

#[test]
fn single_edge_reaches_grid_minimum() {
    let (grid_min, g, b) = grid_minimum();
    assert!((grid_min + 1.0).abs() < 1e-3, "grid minimum {grid_min}");
    // the ansatz applies exp(-iγH) with H = -cut, which mirrors β about π/4
    assert!((g - FRAC_PI_2).abs() < 0.05 && (b - 3.0 * PI / 8.0).abs() < 0.05);
    assert!((single_edge_energy(-FRAC_PI_2, PI / 8.0) + 1.0).abs() < 1e-12);

    let graph = ConstraintGraph::from_edges(2, [(0, 1)]);
    let (model, _) = maxcut_to_ising(&graph);
    let circuit = build_qaoa_circuit(&model, 1).unwrap();
    let trace = refine(&circuit, &model, &QaoaConfig { layers: 1, ..Default::default() }).unwrap();
    assert!((trace.best_expectation - grid_min).abs() <= 0.02, "{}", trace.best_expectation);
    let (gamma, beta) = (trace.best_parameters[0], trace.best_parameters[1]);
    assert!((single_edge_energy(gamma, beta) - trace.best_expectation).abs() < 1e-9);
}

#[test]
fn oracle_agrees_with_simulator_on_grid() {
    let graph = ConstraintGraph::from_edges(2, [(0, 1)]);
    let (model, _) = maxcut_to_ising(&graph);
    let circuit = build_qaoa_circuit(&model, 1).unwrap();
    for (g, b) in [(0.3, 0.2), (1.1, 1.4), (FRAC_PI_2, PI / 8.0), (2.9, 0.05)] {
        let state = qflow_core::qaoa::simulate(&circuit, &circuit.binding(&[g, b]).unwrap()).unwrap();
        let e = qflow_core::qaoa::expectation(&state, &model).unwrap();
        assert!((e - single_edge_energy(g, b)).abs() < 1e-9);
    }
}

fn schedule_model() -> qflow_core::domain::IsingModel {
    let p = SchedulingProblem::new(5, 2);
    maxcut_to_ising(&build_constraint_graph(&p)).0
}

#[test]
fn best_never_worse_than_fixed_start() {
    let model = schedule_model();
    let circuit = build_qaoa_circuit(&model, 2).unwrap();
    let cfg = QaoaConfig { max_evals: 80, restarts: 2, ..Default::default() };
    let trace = refine(&circuit, &model, &cfg).unwrap();
    let start = &trace.evaluations[0];
    assert_eq!(start.parameters, vec![FIXED_START; 4]);
    assert!(trace.best_expectation <= start.value);
    assert_eq!(trace.evaluations.len() <= 160, true);
}

#[test]
fn best_is_monotone_in_budget() {
    let model = schedule_model();
    let circuit = build_qaoa_circuit(&model, 2).unwrap();
    let mut last = f64::INFINITY;
    for budget in [5, 20, 60, 150] {
        let cfg = QaoaConfig { max_evals: budget, restarts: 2, rng_seed: 7, ..Default::default() };
        let best = refine(&circuit, &model, &cfg).unwrap().best_expectation;
        assert!(best <= last + 1e-12, "budget {budget}: {best} > {last}");
        last = best;
    }
}

#[test]
fn refinement_is_deterministic() {
    let model = schedule_model();
    let circuit = build_qaoa_circuit(&model, 2).unwrap();
    let cfg = QaoaConfig { max_evals: 50, rng_seed: 3, ..Default::default() };
    assert_eq!(refine(&circuit, &model, &cfg).unwrap(), refine(&circuit, &model, &cfg).unwrap());
}
