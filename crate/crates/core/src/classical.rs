//! Exact classical solvers behind the classical strategy.

use thiserror::Error;

use crate::domain::{
    bitstring, Diagnostics, DomainSolution, KnapsackProblem, ProblemInstance, SchedulingProblem,
    SolutionAnswer, SolutionStatus,
};
use crate::encoders::{build_constraint_graph, knapsack_totals, schedule_from_bits, selected_items};

/// Largest variable count the classical strategy accepts.
pub const BRUTE_FORCE_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassicalError {
    #[error("cap exceeded: {variables} variables, classical solver accepts at most {cap}")]
    CapExceeded { variables: usize, cap: usize },
}

fn check_cap(variables: usize) -> Result<(), ClassicalError> {
    if variables > BRUTE_FORCE_CAP {
        return Err(ClassicalError::CapExceeded {
            variables,
            cap: BRUTE_FORCE_CAP,
        });
    }
    Ok(())
}

pub fn solve(problem: &ProblemInstance) -> Result<DomainSolution, ClassicalError> {
    match problem {
        ProblemInstance::Schedule(p) => solve_schedule(p),
        ProblemInstance::Knapsack(p) => solve_knapsack(p),
    }
}

/// Exhaustive max-cut over every assignment of the constraint graph.
///
/// Among maximum cuts a feasible schedule is preferred, then the
/// lexicographically smallest bitstring.
pub fn solve_schedule(p: &SchedulingProblem) -> Result<DomainSolution, ClassicalError> {
    let n = p.num_variables();
    check_cap(n)?;
    let graph = build_constraint_graph(p);
    let mut best: Option<(usize, bool, String)> = None;
    for index in 0..1usize << n {
        let bits: Vec<bool> = (0..n).map(|k| (index >> k) & 1 == 1).collect();
        let cut = graph.cut_value(&bits);
        let feasible = schedule_from_bits(p, &bits).1 == SolutionStatus::Feasible;
        let text = bitstring(index, n);
        let better = match &best {
            None => true,
            Some((c, f, b)) => (cut, feasible).cmp(&(*c, *f)).then_with(|| b.cmp(&text)).is_gt(),
        };
        if better {
            best = Some((cut, feasible, text));
        }
    }
    let (cut, _, text) = best.expect("at least one assignment");
    let bits: Vec<bool> = text.bytes().map(|b| b == b'1').collect();
    let (assignments, status) = schedule_from_bits(p, &bits);
    Ok(DomainSolution {
        answer: SolutionAnswer::Schedule { assignments },
        status,
        diagnostics: Diagnostics {
            bitstring: text,
            count: 0,
            objective: cut as f64,
            refinement_trace_len: 0,
            method: "brute_force".into(),
        },
    })
}

/// Exact 0/1 knapsack by dynamic programming over (items x capacity).
pub fn solve_knapsack(p: &KnapsackProblem) -> Result<DomainSolution, ClassicalError> {
    check_cap(p.num_variables())?;
    let n = p.num_items();
    let cap = p.capacity as usize;
    // best[i][c]: best value using the first i items within capacity c
    let mut best = vec![vec![0u64; cap + 1]; n + 1];
    for i in 1..=n {
        let (v, w) = (p.values[i - 1], p.weights[i - 1] as usize);
        for c in 0..=cap {
            best[i][c] = best[i - 1][c];
            if w <= c {
                best[i][c] = best[i][c].max(best[i - 1][c - w] + v);
            }
        }
    }
    let mut flags = vec![false; n];
    let mut c = cap;
    for i in (1..=n).rev() {
        if best[i][c] != best[i - 1][c] {
            flags[i - 1] = true;
            c -= p.weights[i - 1] as usize;
        }
    }
    let (value, weight) = knapsack_totals(p, &flags);
    debug_assert_eq!(value, best[n][cap]);

    // slack bits hold the unused capacity, least significant first
    let slack = p.capacity - weight;
    let text: String = flags
        .iter()
        .map(|&f| if f { '1' } else { '0' })
        .chain((0..p.slack_bits()).map(|k| if (slack >> k) & 1 == 1 { '1' } else { '0' }))
        .collect();
    Ok(DomainSolution {
        answer: SolutionAnswer::Knapsack {
            items: selected_items(&flags),
            total_value: value,
            total_weight: weight,
        },
        status: SolutionStatus::Feasible,
        diagnostics: Diagnostics {
            bitstring: text,
            count: 0,
            objective: value as f64,
            refinement_trace_len: 0,
            method: "dynamic_programming".into(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_by_two_is_optimal() {
        let s = solve_schedule(&SchedulingProblem::new(5, 2)).unwrap();
        assert_eq!(s.diagnostics.objective, 13.0);
        assert_eq!(s.status, SolutionStatus::Feasible);
        assert!(["1001100110", "0110011001"].contains(&s.diagnostics.bitstring.as_str()));
    }

    #[test]
    fn knapsack_example() {
        let s = solve_knapsack(&KnapsackProblem::new(vec![6, 10, 12], vec![1, 2, 3], 5)).unwrap();
        assert_eq!(
            s.answer,
            SolutionAnswer::Knapsack { items: vec![2, 3], total_value: 22, total_weight: 5 }
        );
        assert_eq!(s.diagnostics.bitstring, "011000");
    }

    #[test]
    fn infeasible_single_items_are_skipped() {
        let s = solve_knapsack(&KnapsackProblem::new(vec![100, 1], vec![9, 2], 3)).unwrap();
        assert_eq!(
            s.answer,
            SolutionAnswer::Knapsack { items: vec![2], total_value: 1, total_weight: 2 }
        );
    }

    #[test]
    fn cap_is_enforced() {
        let p = ProblemInstance::Schedule(SchedulingProblem::new(25, 1));
        assert_eq!(
            solve(&p),
            Err(ClassicalError::CapExceeded { variables: 25, cap: BRUTE_FORCE_CAP })
        );
    }
}
