//! Shared vocabulary exchanged between services as process variables.
//!
//! Every type here is an immutable value with a JSON wire form. Bit ordering
//! is fixed system-wide: in a rendered bitstring the character at position
//! `k` (left to right) is qubit `k`, and in a basis-state index qubit `k` is
//! bit `k` of the integer.

mod circuit;
mod model;
mod problem;
mod solution;

pub use circuit::{Angle, CircuitError, Gate, QuantumCircuit};
pub use model::{IsingModel, QuboModel};
pub use problem::{
    ConstraintGraph, KnapsackProblem, ProblemInstance, SchedulingProblem, ValidationErrors,
};
pub use solution::{
    Assignment, DeviceDescriptor, DeviceKind, Diagnostics, DomainSolution, MeasurementCounts,
    SolutionAnswer, SolutionStatus,
};

/// Renders basis-state `index` of an `n`-qubit register, qubit 0 leftmost.
pub fn bitstring(index: usize, n: usize) -> String {
    (0..n)
        .map(|k| if (index >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`bitstring`]. Returns `None` on characters other than `0`/`1`.
pub fn bitstring_index(bits: &str) -> Option<usize> {
    bits.bytes().enumerate().try_fold(0usize, |acc, (k, b)| match b {
        b'0' => Some(acc),
        b'1' => Some(acc | (1 << k)),
        _ => None,
    })
}

/// Serde adapter storing a map keyed by unordered index pairs as a list of
/// `[i, j, value]` triples, since JSON object keys must be strings.
pub(crate) mod pair_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(usize, usize), f64>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let triples: Vec<(usize, usize, f64)> = map.iter().map(|(&(i, j), &v)| (i, j, v)).collect();
        triples.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(usize, usize), f64>, D::Error> {
        let triples = Vec::<(usize, usize, f64)>::deserialize(d)?;
        let mut map = BTreeMap::new();
        for (i, j, v) in triples {
            if i == j {
                return Err(serde::de::Error::custom(format!(
                    "pair ({i}, {j}) must have distinct endpoints"
                )));
            }
            *map.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
        }
        Ok(map)
    }
}
