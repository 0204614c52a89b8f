//! QAOA circuit generation, statevector simulation, refinement and sampling.

mod ansatz;
mod nelder_mead;
mod refine;
mod sim;

pub use ansatz::{build_qaoa_circuit, parameter_names};
pub use nelder_mead::{NelderMead, NelderMeadResult};
pub use refine::{refine, Evaluation, FIXED_START, Optimizer, QaoaConfig, RefineError, RefinementTrace};
pub use sim::{expectation, sample, simulate, SimError, StateVector};
