//! Problem mapping and solution mapping.
//!
//! Problem mapping turns a domain instance into an [`IsingModel`] plus the
//! [`EncodingMetadata`] needed later to interpret samples. Solution mapping
//! turns [`MeasurementCounts`] back into a [`DomainSolution`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    Assignment, ConstraintGraph, Diagnostics, DomainSolution, IsingModel, KnapsackProblem,
    MeasurementCounts, QuboModel, SchedulingProblem, SolutionAnswer, SolutionStatus,
};

/// What solution mapping needs besides the counts and the original problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EncodingMetadata {
    MaxcutSchedule {
        graph: ConstraintGraph,
    },
    KnapsackSlack {
        num_items: usize,
        slack_bits: usize,
        slack_coefficients: Vec<u64>,
        penalty: u64,
    },
}

impl EncodingMetadata {
    pub fn num_qubits(&self) -> usize {
        match self {
            EncodingMetadata::MaxcutSchedule { graph } => graph.num_vertices,
            EncodingMetadata::KnapsackSlack {
                num_items,
                slack_bits,
                ..
            } => num_items + slack_bits,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EncodingMetadata::MaxcutSchedule { .. } => "maxcut-schedule",
            EncodingMetadata::KnapsackSlack { .. } => "knapsack-slack",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// Most frequent bitstring.
    ArgmaxCount,
    /// Best objective among everything sampled.
    #[default]
    BestSampled,
}

impl DecodeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodeMode::ArgmaxCount => "argmax_count",
            DecodeMode::BestSampled => "best_sampled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("empty counts map")]
    EmptyCounts,
    #[error("bitstring '{bits}' has length {actual}, expected {expected}")]
    LengthMismatch {
        bits: String,
        expected: usize,
        actual: usize,
    },
    #[error("kind mismatch: metadata is {metadata}, problem is {problem}")]
    KindMismatch {
        metadata: &'static str,
        problem: &'static str,
    },
    #[error("metadata describes {metadata} qubits but the problem needs {problem}")]
    SizeMismatch { metadata: usize, problem: usize },
}

/// Vertex index of the 1-based `(shift, agent)` pair.
pub fn vertex_index(p: &SchedulingProblem, shift: usize, agent: usize) -> usize {
    (shift - 1) * p.num_agents + (agent - 1)
}

/// Builds the conflict graph whose maximum cuts are the valid schedules.
///
/// E1 joins every pair of vertices within one shift; E2 joins `(s, a)` with
/// `(s + 1, a)`.
pub fn build_constraint_graph(p: &SchedulingProblem) -> ConstraintGraph {
    let mut edges = std::collections::BTreeSet::new();
    if p.constraint_e1 {
        for s in 1..=p.num_shifts {
            for a in 1..=p.num_agents {
                for b in a + 1..=p.num_agents {
                    edges.insert((vertex_index(p, s, a), vertex_index(p, s, b)));
                }
            }
        }
    }
    if p.constraint_e2 {
        for s in 1..p.num_shifts {
            for a in 1..=p.num_agents {
                edges.insert((vertex_index(p, s, a), vertex_index(p, s + 1, a)));
            }
        }
    }
    let vertex_labels = (1..=p.num_shifts)
        .flat_map(|s| (1..=p.num_agents).map(move |a| (s, a)))
        .collect();
    ConstraintGraph {
        num_vertices: p.num_variables(),
        edges,
        vertex_labels,
    }
}

/// Ising form of max-cut: `J_uv = 1/2` per edge and offset `-|E|/2`, so the
/// energy of a spin assignment equals minus its cut size.
pub fn maxcut_to_ising(g: &ConstraintGraph) -> (IsingModel, EncodingMetadata) {
    let mut model = IsingModel::new(g.num_vertices);
    for &(u, v) in &g.edges {
        model.add_coupling(u, v, 0.5);
    }
    model.offset = -(g.edges.len() as f64) / 2.0;
    (model, EncodingMetadata::MaxcutSchedule { graph: g.clone() })
}

/// Penalty weight: one more than the total value, so any constraint
/// violation costs more than every feasible gain combined.
pub fn knapsack_penalty(p: &KnapsackProblem) -> u64 {
    p.values.iter().sum::<u64>() + 1
}

/// QUBO for `min -Σ v_i x_i + A (Σ w_i x_i + Σ 2^k s_k - W)^2`.
///
/// Variables `0..n` are items, `n..n+m` the slack bits. Coefficients are
/// expanded in exact integer arithmetic before conversion.
pub fn knapsack_to_qubo(p: &KnapsackProblem) -> (QuboModel, EncodingMetadata) {
    let n = p.num_items();
    let m = p.slack_bits();
    let penalty = knapsack_penalty(p);
    let slack_coefficients: Vec<u64> = (0..m).map(|k| 1u64 << k).collect();

    let a = i128::from(penalty);
    let cap = i128::from(p.capacity);
    let coeffs: Vec<i128> = p
        .weights
        .iter()
        .chain(slack_coefficients.iter())
        .map(|&c| i128::from(c))
        .collect();

    let mut qubo = QuboModel::new(n + m);
    // (Σ c_k y_k - W)^2 = Σ c_k^2 y_k + 2 Σ_{k<l} c_k c_l y_k y_l - 2W Σ c_k y_k + W^2
    for (k, &c) in coeffs.iter().enumerate() {
        let mut lin = a * (c * c - 2 * cap * c);
        if k < n {
            lin -= i128::from(p.values[k]);
        }
        if lin != 0 {
            qubo.add_linear(k, lin as f64);
        }
        for (l, &d) in coeffs.iter().enumerate().skip(k + 1) {
            qubo.add_quadratic(k, l, (2 * a * c * d) as f64);
        }
    }
    qubo.offset = (a * cap * cap) as f64;

    let meta = EncodingMetadata::KnapsackSlack {
        num_items: n,
        slack_bits: m,
        slack_coefficients,
        penalty,
    };
    (qubo, meta)
}

/// Substitutes `x_i = (1 - z_i) / 2`; the result agrees with `q` on every
/// assignment under `z_i = 1 - 2 x_i`.
pub fn qubo_to_ising(q: &QuboModel) -> IsingModel {
    let mut model = IsingModel::new(q.n);
    let mut offset = q.offset;
    for (&i, &a) in &q.linear {
        offset += a / 2.0;
        model.add_field(i, -a / 2.0);
    }
    for (&(i, j), &b) in &q.quadratic {
        offset += b / 4.0;
        model.add_field(i, -b / 4.0);
        model.add_field(j, -b / 4.0);
        model.add_coupling(i, j, b / 4.0);
    }
    model.h.retain(|_, v| *v != 0.0);
    model.j.retain(|_, v| *v != 0.0);
    model.offset = offset;
    model
}

fn parse_bits(bits: &str) -> Vec<bool> {
    bits.bytes().map(|b| b == b'1').collect()
}

fn check_counts(counts: &MeasurementCounts, width: usize) -> Result<(), DecodeError> {
    if counts.counts.is_empty() {
        return Err(DecodeError::EmptyCounts);
    }
    match counts.counts.keys().find(|k| k.len() != width) {
        Some(bad) => Err(DecodeError::LengthMismatch {
            bits: bad.clone(),
            expected: width,
            actual: bad.len(),
        }),
        None => Ok(()),
    }
}

/// Highest count, ties broken by the lexicographically smallest bitstring.
fn argmax_count(counts: &MeasurementCounts) -> (&str, u64) {
    let mut best: Option<(&str, u64)> = None;
    // BTreeMap iterates in lexicographic order, so strict `>` keeps the first.
    for (bits, &count) in &counts.counts {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((bits, count));
        }
    }
    best.expect("counts checked nonempty")
}

/// Maps a chosen bitstring to its schedule and feasibility.
pub fn schedule_from_bits(p: &SchedulingProblem, bits: &[bool]) -> (Vec<Assignment>, SolutionStatus) {
    let assignments: Vec<Assignment> = (1..=p.num_shifts)
        .flat_map(|s| (1..=p.num_agents).map(move |a| (s, a)))
        .filter(|&(s, a)| bits[vertex_index(p, s, a)])
        .map(|(shift, agent)| Assignment { shift, agent })
        .collect();
    let one_per_shift = (1..=p.num_shifts)
        .all(|s| assignments.iter().filter(|a| a.shift == s).count() == 1);
    let no_repeats = !p.constraint_e2
        || assignments.windows(2).all(|w| w[0].shift == w[1].shift || w[0].agent != w[1].agent);
    let status = if one_per_shift && no_repeats {
        SolutionStatus::Feasible
    } else {
        SolutionStatus::Infeasible
    };
    (assignments, status)
}

/// Decodes scheduling samples. A bitstring with a shift covered by zero or
/// several agents is returned flagged [`SolutionStatus::Infeasible`].
pub fn decode_schedule(
    counts: &MeasurementCounts,
    meta: &EncodingMetadata,
    p: &SchedulingProblem,
    mode: DecodeMode,
) -> Result<DomainSolution, DecodeError> {
    let graph = match meta {
        EncodingMetadata::MaxcutSchedule { graph } => graph,
        other => {
            return Err(DecodeError::KindMismatch {
                metadata: other.kind(),
                problem: "schedule",
            })
        }
    };
    if graph.num_vertices != p.num_variables() {
        return Err(DecodeError::SizeMismatch {
            metadata: graph.num_vertices,
            problem: p.num_variables(),
        });
    }
    check_counts(counts, graph.num_vertices)?;

    let (bits, count) = match mode {
        DecodeMode::ArgmaxCount => argmax_count(counts),
        DecodeMode::BestSampled => counts
            .counts
            .iter()
            .map(|(b, &c)| (b.as_str(), c, graph.cut_value(&parse_bits(b))))
            // max cut, then max count, then smallest bitstring
            .max_by(|x, y| x.2.cmp(&y.2).then(x.1.cmp(&y.1)).then(y.0.cmp(x.0)))
            .map(|(b, c, _)| (b, c))
            .expect("counts checked nonempty"),
    };
    let flags = parse_bits(bits);
    let (assignments, status) = schedule_from_bits(p, &flags);
    Ok(DomainSolution {
        answer: SolutionAnswer::Schedule { assignments },
        status,
        diagnostics: Diagnostics {
            bitstring: bits.to_string(),
            count,
            objective: graph.cut_value(&flags) as f64,
            refinement_trace_len: 0,
            method: mode.as_str().to_string(),
        },
    })
}

/// Total value and weight of the selection given by the item bits.
pub fn knapsack_totals(p: &KnapsackProblem, item_bits: &[bool]) -> (u64, u64) {
    item_bits
        .iter()
        .zip(p.values.iter().zip(&p.weights))
        .filter(|(&on, _)| on)
        .fold((0, 0), |(v, w), (_, (&vi, &wi))| (v + vi, w + wi))
}

/// Decodes knapsack samples. Item bits come first; slack bits are dropped.
/// When no usable sample exists the empty selection is returned flagged
/// [`SolutionStatus::Degraded`], so reported weight never exceeds capacity.
pub fn decode_knapsack(
    counts: &MeasurementCounts,
    meta: &EncodingMetadata,
    p: &KnapsackProblem,
    mode: DecodeMode,
) -> Result<DomainSolution, DecodeError> {
    let (num_items, width) = match meta {
        EncodingMetadata::KnapsackSlack { num_items, .. } => (*num_items, meta.num_qubits()),
        other => {
            return Err(DecodeError::KindMismatch {
                metadata: other.kind(),
                problem: "knapsack",
            })
        }
    };
    if width != p.num_variables() || num_items != p.num_items() {
        return Err(DecodeError::SizeMismatch {
            metadata: width,
            problem: p.num_variables(),
        });
    }
    check_counts(counts, width)?;

    let evaluate = |bits: &str| {
        let flags = parse_bits(&bits[..num_items]);
        let (value, weight) = knapsack_totals(p, &flags);
        (flags, value, weight)
    };

    let chosen = match mode {
        DecodeMode::ArgmaxCount => {
            let (bits, count) = argmax_count(counts);
            let (flags, value, weight) = evaluate(bits);
            (weight <= p.capacity).then_some((bits, count, flags, value, weight))
        }
        DecodeMode::BestSampled => counts
            .counts
            .iter()
            .map(|(b, &c)| {
                let (flags, value, weight) = evaluate(b);
                (b.as_str(), c, flags, value, weight)
            })
            .filter(|x| x.4 <= p.capacity)
            // max value, then max count, then smallest bitstring
            .max_by(|x, y| x.3.cmp(&y.3).then(x.1.cmp(&y.1)).then(y.0.cmp(x.0))),
    };

    let solution = match chosen {
        Some((bits, count, flags, value, weight)) => DomainSolution {
            answer: SolutionAnswer::Knapsack {
                items: selected_items(&flags),
                total_value: value,
                total_weight: weight,
            },
            status: SolutionStatus::Feasible,
            diagnostics: Diagnostics {
                bitstring: bits.to_string(),
                count,
                objective: value as f64,
                refinement_trace_len: 0,
                method: mode.as_str().to_string(),
            },
        },
        None => {
            let (bits, count) = argmax_count(counts);
            DomainSolution {
                answer: SolutionAnswer::Knapsack {
                    items: Vec::new(),
                    total_value: 0,
                    total_weight: 0,
                },
                status: SolutionStatus::Degraded,
                diagnostics: Diagnostics {
                    bitstring: bits.to_string(),
                    count,
                    objective: 0.0,
                    refinement_trace_len: 0,
                    method: mode.as_str().to_string(),
                },
            }
        }
    };
    Ok(solution)
}

/// 1-based indices of the set flags.
pub fn selected_items(flags: &[bool]) -> Vec<usize> {
    flags
        .iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(i, _)| i + 1)
        .collect()
}
