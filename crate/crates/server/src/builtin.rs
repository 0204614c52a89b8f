//! Process definitions deployed on first start.

use qflow_engine::ProcessDefinition;

/// Entry process of every submitted problem.
pub const STRATEGY_PROCESS: &str = "strategy-decision";

const SOURCES: [&str; 4] = [
    include_str!("../../../config/definitions/strategy-decision.json"),
    include_str!("../../../config/definitions/classical-strategy.json"),
    include_str!("../../../config/definitions/scheduling-qaoa-pipeline.json"),
    include_str!("../../../config/definitions/knapsack-qaoa-pipeline.json"),
];

pub fn definitions() -> Vec<ProcessDefinition> {
    SOURCES
        .iter()
        .map(|s| serde_json::from_str(s).expect("built-in definition parses"))
        .collect()
}
