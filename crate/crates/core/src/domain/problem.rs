use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Shift scheduling: assign one of `num_agents` agents to each of
/// `num_shifts` consecutive shifts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulingProblem {
    pub num_shifts: usize,
    pub num_agents: usize,
    /// Exactly one agent per shift.
    #[serde(default = "default_true")]
    pub constraint_e1: bool,
    /// No agent works two consecutive shifts.
    #[serde(default = "default_true")]
    pub constraint_e2: bool,
    /// Optional reference-store ids, one per agent, in agent order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub agent_ids: Vec<String>,
}

fn default_true() -> bool {
    true
}

impl SchedulingProblem {
    pub fn new(num_shifts: usize, num_agents: usize) -> Self {
        Self {
            num_shifts,
            num_agents,
            constraint_e1: true,
            constraint_e2: true,
            agent_ids: Vec::new(),
        }
    }

    /// One binary variable (vertex, qubit) per shift-agent pair.
    pub fn num_variables(&self) -> usize {
        self.num_shifts.saturating_mul(self.num_agents)
    }

    pub fn validate(&self, max_qubits: usize) -> Result<(), ValidationErrors> {
        let mut errors = Vec::new();
        if self.num_shifts == 0 {
            errors.push("num_shifts must be at least 1".to_string());
        }
        if self.num_agents == 0 {
            errors.push("num_agents must be at least 1".to_string());
        } else if self.constraint_e1 && self.num_agents < 2 {
            errors.push("constraint E1 needs at least 2 agents".to_string());
        }
        if !self.agent_ids.is_empty() && self.agent_ids.len() != self.num_agents {
            errors.push(format!(
                "agent_ids lists {} ids but num_agents is {}",
                self.agent_ids.len(),
                self.num_agents
            ));
        }
        let needed = self.num_variables();
        if needed > max_qubits {
            errors.push(format!(
                "qubit budget exceeded: needs {needed}, max {max_qubits}"
            ));
        }
        ValidationErrors::result(errors)
    }
}

/// 0/1 knapsack: pick items maximising total value within `capacity`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackProblem {
    pub values: Vec<u64>,
    pub weights: Vec<u64>,
    pub capacity: u64,
    /// Optional reference-store ids, one per item.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub container_ids: Vec<String>,
}

impl KnapsackProblem {
    pub fn new(values: Vec<u64>, weights: Vec<u64>, capacity: u64) -> Self {
        Self {
            values,
            weights,
            capacity,
            container_ids: Vec::new(),
        }
    }

    pub fn num_items(&self) -> usize {
        self.values.len()
    }

    /// Number of slack bits needed to represent every unused capacity
    /// `0..=capacity` in binary.
    pub fn slack_bits(&self) -> usize {
        (u64::BITS - self.capacity.leading_zeros()) as usize
    }

    /// Items plus slack bits.
    pub fn num_variables(&self) -> usize {
        self.num_items() + self.slack_bits()
    }

    pub fn validate(&self, max_qubits: usize) -> Result<(), ValidationErrors> {
        let mut errors = Vec::new();
        if self.values.is_empty() && self.weights.is_empty() {
            errors.push("empty item list".to_string());
        } else if self.values.len() != self.weights.len() {
            errors.push(format!(
                "values has {} entries but weights has {}",
                self.values.len(),
                self.weights.len()
            ));
        }
        if self.capacity == 0 {
            errors.push("nonpositive capacity".to_string());
        }
        for (i, &v) in self.values.iter().enumerate() {
            if v == 0 {
                errors.push(format!("nonpositive value for item {}", i + 1));
            }
        }
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0 {
                errors.push(format!("nonpositive weight for item {}", i + 1));
            }
        }
        if !self.container_ids.is_empty() && self.container_ids.len() != self.values.len() {
            errors.push(format!(
                "container_ids lists {} ids for {} items",
                self.container_ids.len(),
                self.values.len()
            ));
        }
        let needed = self.num_variables();
        if needed > max_qubits {
            errors.push(format!(
                "qubit budget exceeded: needs {needed}, max {max_qubits}"
            ));
        }
        ValidationErrors::result(errors)
    }
}

/// A client problem as carried in the `problem` process variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemInstance {
    Schedule(SchedulingProblem),
    Knapsack(KnapsackProblem),
}

impl ProblemInstance {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemInstance::Schedule(_) => "schedule",
            ProblemInstance::Knapsack(_) => "knapsack",
        }
    }

    pub fn num_variables(&self) -> usize {
        match self {
            ProblemInstance::Schedule(p) => p.num_variables(),
            ProblemInstance::Knapsack(p) => p.num_variables(),
        }
    }

    pub fn validate(&self, max_qubits: usize) -> Result<(), ValidationErrors> {
        match self {
            ProblemInstance::Schedule(p) => p.validate(max_qubits),
            ProblemInstance::Knapsack(p) => p.validate(max_qubits),
        }
    }
}

/// Human-readable invariant violations collected by `validate`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<String>);

impl ValidationErrors {
    fn result(errors: Vec<String>) -> Result<(), Self> {
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Self(errors))
        }
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("; "))
    }
}

impl std::error::Error for ValidationErrors {}

/// Conflict graph of shift-agent assignments.
///
/// Vertex `v = (shift - 1) * num_agents + (agent - 1)`; `vertex_labels[v]`
/// holds the 1-based `(shift, agent)` pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintGraph {
    pub num_vertices: usize,
    pub edges: BTreeSet<(usize, usize)>,
    pub vertex_labels: Vec<(usize, usize)>,
}

impl ConstraintGraph {
    /// Graph without labels, mostly useful for tests.
    pub fn from_edges(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges = edges
            .into_iter()
            .filter(|(u, v)| u != v)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        Self {
            num_vertices,
            edges,
            vertex_labels: Vec::new(),
        }
    }

    /// Number of edges whose endpoints differ under `bits`.
    pub fn cut_value(&self, bits: &[bool]) -> usize {
        self.edges.iter().filter(|&&(u, v)| bits[u] != bits[v]).count()
    }
}
