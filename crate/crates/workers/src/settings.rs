use std::collections::BTreeMap;

use qflow_core::decisions::{device_table, DecisionTable};
use qflow_core::qaoa::QaoaConfig;
use qflow_core::{DeviceDescriptor, MAX_SIMULATOR_QUBITS};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SHOTS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub name: String,
}

/// A shipping container that can be loaded as one knapsack item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Container {
    pub name: String,
    pub value: u64,
    pub weight: u64,
}

/// Static domain data that input and output aggregation join against.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceStore {
    #[serde(default)]
    pub agents: BTreeMap<String, Agent>,
    #[serde(default)]
    pub containers: BTreeMap<String, Container>,
}

impl ReferenceStore {
    /// Small built-in data set used when no store file is configured.
    pub fn demo() -> Self {
        let agents = [("a1", "Ada"), ("a2", "Grace"), ("a3", "Edsger"), ("a4", "Barbara")]
            .into_iter()
            .map(|(id, name)| (id.to_string(), Agent { name: name.to_string() }))
            .collect();
        let containers = [
            ("c1", "Bananas", 6, 1),
            ("c2", "Coffee", 10, 2),
            ("c3", "Machine parts", 12, 3),
            ("c4", "Textiles", 7, 2),
            ("c5", "Electronics", 15, 4),
        ]
        .into_iter()
        .map(|(id, name, value, weight)| {
            (
                id.to_string(),
                Container {
                    name: name.to_string(),
                    value,
                    weight,
                },
            )
        })
        .collect();
        Self { agents, containers }
    }
}

/// Static configuration shared by every handler.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub devices: Vec<DeviceDescriptor>,
    pub device_table: DecisionTable,
    pub qaoa: QaoaConfig,
    pub default_shots: u64,
    pub references: ReferenceStore,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            devices: vec![DeviceDescriptor::simulator("local-statevector", MAX_SIMULATOR_QUBITS)],
            device_table: device_table(),
            qaoa: QaoaConfig::default(),
            default_shots: DEFAULT_SHOTS,
            references: ReferenceStore::demo(),
        }
    }
}
