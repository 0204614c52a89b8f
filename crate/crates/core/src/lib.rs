//! Core building blocks for orchestrated quantum optimization.
//!
//! The crate is organised around the tasks a quantum orchestration pipeline
//! runs for every request:
//!
//! * [`domain`]: the problem, model, circuit and result types that travel
//!   between services as process variables.
//! * [`encoders`]: problem mapping (domain data to Ising/QUBO models) and
//!   solution mapping (measurement counts back to domain answers).
//! * [`qaoa`]: ansatz generation, statevector simulation, parameter
//!   refinement and shot sampling.
//! * [`qasm`]: OpenQASM 2.0 emission and parsing, the inter-service circuit
//!   format.
//! * [`decisions`]: FIRST-hit decision tables for device and strategy
//!   selection.
//! * [`classical`]: exact classical solvers used by the classical strategy.

pub mod classical;
pub mod decisions;
pub mod domain;
pub mod encoders;
pub mod qaoa;
pub mod qasm;

pub use domain::{
    ConstraintGraph, DeviceDescriptor, DomainSolution, IsingModel, KnapsackProblem,
    MeasurementCounts, ProblemInstance, QuantumCircuit, QuboModel, SchedulingProblem,
};

/// Largest register the built-in statevector simulator accepts.
pub const MAX_SIMULATOR_QUBITS: usize = 24;
