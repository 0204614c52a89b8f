use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Histogram of sampled bitstrings. Character `k` of each key is qubit `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementCounts {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl MeasurementCounts {
    pub fn from_counts(counts: BTreeMap<String, u64>) -> Self {
        Self {
            shots: counts.values().sum(),
            counts,
        }
    }

    /// Bit width shared by every key, if the map is nonempty.
    pub fn num_qubits(&self) -> Option<usize> {
        self.counts.keys().next().map(String::len)
    }

    pub fn validate(&self, num_qubits: usize) -> Result<(), String> {
        if self.shots == 0 {
            return Err("shots must be positive".into());
        }
        if let Some(bad) = self
            .counts
            .keys()
            .find(|k| k.len() != num_qubits || !k.bytes().all(|b| b == b'0' || b == b'1'))
        {
            return Err(format!(
                "bitstring '{bad}' is not a {num_qubits}-bit string"
            ));
        }
        let total: u64 = self.counts.values().sum();
        if total != self.shots {
            return Err(format!("counts sum to {total}, expected {} shots", self.shots));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionStatus {
    Feasible,
    /// The chosen bitstring breaks a domain constraint; reported as-is.
    Infeasible,
    /// No usable sample; a safe fallback answer was substituted.
    Degraded,
}

/// One (shift, agent) pair, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub shift: usize,
    pub agent: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolutionAnswer {
    Schedule {
        assignments: Vec<Assignment>,
    },
    Knapsack {
        /// 1-based item indices.
        items: Vec<usize>,
        total_value: u64,
        total_weight: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Full chosen bitstring, slack bits included.
    pub bitstring: String,
    pub count: u64,
    /// Cut size for schedules, total value for knapsacks.
    pub objective: f64,
    #[serde(default)]
    pub refinement_trace_len: usize,
    /// How the answer was produced (`best_sampled`, `brute_force`, ...).
    pub method: String,
}

/// Decoded domain-level answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSolution {
    #[serde(flatten)]
    pub answer: SolutionAnswer,
    pub status: SolutionStatus,
    pub diagnostics: Diagnostics,
}

impl DomainSolution {
    pub fn kind(&self) -> &'static str {
        match self.answer {
            SolutionAnswer::Schedule { .. } => "schedule",
            SolutionAnswer::Knapsack { .. } => "knapsack",
        }
    }

    /// Agent per shift (1-based, in shift order) when the answer is a
    /// feasible schedule.
    pub fn agents_by_shift(&self) -> Option<Vec<usize>> {
        match &self.answer {
            SolutionAnswer::Schedule { assignments } if self.status == SolutionStatus::Feasible => {
                Some(assignments.iter().map(|a| a.agent).collect())
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviceKind {
    StatevectorSimulator,
}

/// An execution target in the device registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceDescriptor {
    pub id: String,
    pub kind: DeviceKind,
    pub max_qubits: usize,
    #[serde(default = "available_default")]
    pub available: bool,
    #[serde(default)]
    pub cost_per_shot: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn available_default() -> bool {
    true
}

impl DeviceDescriptor {
    pub fn simulator(id: impl Into<String>, max_qubits: usize) -> Self {
        Self {
            id: id.into(),
            kind: DeviceKind::StatevectorSimulator,
            max_qubits,
            available: true,
            cost_per_shot: 0.0,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_qubits == 0 {
            return Err(format!("device '{}' must have max_qubits >= 1", self.id));
        }
        if !(self.cost_per_shot >= 0.0) {
            return Err(format!("device '{}' has a negative cost_per_shot", self.id));
        }
        Ok(())
    }
}
