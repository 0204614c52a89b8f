//! FIRST-hit decision tables.
//!
//! A table lists named inputs and an ordered set of rules. Each rule holds
//! one condition per input, written in a compact text form:
//!
//! | condition            | meaning                                   |
//! |----------------------|-------------------------------------------|
//! | `-`                  | matches anything                          |
//! | `< 16`, `>= 2.5`     | numeric (or string) comparison            |
//! | `== "schedule"`      | JSON equality, numbers compared by value  |
//! | `!= false`           | negated equality                          |
//! | `in ["a", "b"]`      | membership in a JSON array                |
//! | `>= required_qubits` | a bare identifier refers to another fact  |
//!
//! The first rule whose conditions all hold wins; otherwise the table's
//! default output applies.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::domain::DeviceDescriptor;

pub const DEVICE_TABLE_ID: &str = "device-selection";
pub const STRATEGY_TABLE_ID: &str = "strategy-selection";
/// Variable counts below this go to the classical solver by default.
pub const DEFAULT_STRATEGY_THRESHOLD: u64 = 16;

pub type Facts = Map<String, Value>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecisionError {
    #[error("unknown decision table '{0}'")]
    UnknownTable(String),
    #[error("missing fact '{0}'")]
    MissingFact(String),
    #[error("no rule matched in table '{0}' and it has no default")]
    NoMatch(String),
    #[error("cannot compare {left} with {right} in table '{table}'")]
    TypeMismatch {
        table: String,
        left: Value,
        right: Value,
    },
    #[error("invalid table '{table}': {message}")]
    InvalidTable { table: String, message: String },
    #[error("no capable device for {required_qubits} qubits")]
    NoCapableDevice { required_qubits: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "in")]
    In,
}

impl Comparator {
    fn symbol(self) -> &'static str {
        match self {
            Comparator::Eq => "==",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::In => "in",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Literal(Value),
    Fact(String),
}

/// One cell of a rule row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Condition {
    Any,
    Compare(Comparator, Operand),
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            return Ok(Condition::Any);
        }
        // longest symbols first so "<=" is not read as "<"
        let ops = [
            ("==", Comparator::Eq),
            ("!=", Comparator::Ne),
            ("<=", Comparator::Le),
            (">=", Comparator::Ge),
            ("<", Comparator::Lt),
            (">", Comparator::Gt),
            ("in ", Comparator::In),
        ];
        let (cmp, rest) = ops
            .iter()
            .find_map(|(sym, cmp)| s.strip_prefix(sym).map(|rest| (*cmp, rest.trim())))
            .unwrap_or((Comparator::Eq, s));
        let operand = match serde_json::from_str::<Value>(rest) {
            Ok(v) => Operand::Literal(v),
            Err(_) if is_identifier(rest) => Operand::Fact(rest.to_string()),
            Err(_) => return Err(format!("invalid condition operand '{rest}'")),
        };
        if cmp == Comparator::In && !matches!(operand, Operand::Literal(Value::Array(_)) | Operand::Fact(_)) {
            return Err(format!("'in' needs an array, got '{rest}'"));
        }
        Ok(Condition::Compare(cmp, operand))
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Any => f.write_str("-"),
            Condition::Compare(cmp, Operand::Literal(v)) => write!(f, "{} {}", cmp.symbol(), v),
            Condition::Compare(cmp, Operand::Fact(name)) => write!(f, "{} {}", cmp.symbol(), name),
        }
    }
}

impl TryFrom<String> for Condition {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Condition> for String {
    fn from(c: Condition) -> Self {
        c.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputClause {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub when: Vec<Condition>,
    pub then: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HitPolicy {
    #[default]
    First,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTable {
    pub id: String,
    pub inputs: Vec<InputClause>,
    pub rules: Vec<Rule>,
    #[serde(default)]
    pub hit_policy: HitPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_output: Option<Map<String, Value>>,
}

fn compare_values(left: &Value, right: &Value) -> Option<Ordering> {
    match (left, right) {
        (Value::Number(a), Value::Number(b)) => a.as_f64()?.partial_cmp(&b.as_f64()?),
        (Value::String(a), Value::String(b)) => Some(a.cmp(b)),
        (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
        _ => None,
    }
}

fn values_equal(left: &Value, right: &Value) -> bool {
    match (left, right) {
        (Value::Number(_), Value::Number(_)) => compare_values(left, right) == Some(Ordering::Equal),
        _ => left == right,
    }
}

impl DecisionTable {
    pub fn validate(&self) -> Result<(), DecisionError> {
        let invalid = |message: String| DecisionError::InvalidTable {
            table: self.id.clone(),
            message,
        };
        if self.rules.is_empty() && self.default_output.is_none() {
            return Err(invalid("needs at least one rule or a default".into()));
        }
        for (i, rule) in self.rules.iter().enumerate() {
            if rule.when.len() != self.inputs.len() {
                return Err(invalid(format!(
                    "rule {} has {} conditions for {} inputs",
                    i + 1,
                    rule.when.len(),
                    self.inputs.len()
                )));
            }
        }
        Ok(())
    }

    fn holds(&self, fact: &Value, cond: &Condition, facts: &Facts) -> Result<bool, DecisionError> {
        let (cmp, operand) = match cond {
            Condition::Any => return Ok(true),
            Condition::Compare(cmp, operand) => (cmp, operand),
        };
        let right = match operand {
            Operand::Literal(v) => v,
            Operand::Fact(name) => facts
                .get(name)
                .ok_or_else(|| DecisionError::MissingFact(name.clone()))?,
        };
        let mismatch = || DecisionError::TypeMismatch {
            table: self.id.clone(),
            left: fact.clone(),
            right: right.clone(),
        };
        Ok(match cmp {
            Comparator::Eq => values_equal(fact, right),
            Comparator::Ne => !values_equal(fact, right),
            Comparator::In => match right {
                Value::Array(items) => items.iter().any(|v| values_equal(fact, v)),
                _ => return Err(mismatch()),
            },
            ordered => {
                let ord = compare_values(fact, right).ok_or_else(mismatch)?;
                match ordered {
                    Comparator::Lt => ord == Ordering::Less,
                    Comparator::Le => ord != Ordering::Greater,
                    Comparator::Gt => ord == Ordering::Greater,
                    Comparator::Ge => ord != Ordering::Less,
                    _ => unreachable!(),
                }
            }
        })
    }

    /// FIRST-hit evaluation over `facts`.
    pub fn evaluate(&self, facts: &Facts) -> Result<Map<String, Value>, DecisionError> {
        let inputs: Vec<&Value> = self
            .inputs
            .iter()
            .map(|i| {
                facts
                    .get(&i.name)
                    .ok_or_else(|| DecisionError::MissingFact(i.name.clone()))
            })
            .collect::<Result<_, _>>()?;
        for rule in &self.rules {
            let mut matched = true;
            for (fact, cond) in inputs.iter().zip(&rule.when) {
                if !self.holds(fact, cond, facts)? {
                    matched = false;
                    break;
                }
            }
            if matched {
                return Ok(rule.then.clone());
            }
        }
        self.default_output
            .clone()
            .ok_or_else(|| DecisionError::NoMatch(self.id.clone()))
    }
}

/// Tables by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecisionRegistry {
    tables: BTreeMap<String, DecisionTable>,
}

impl DecisionRegistry {
    /// The built-in device and strategy tables.
    pub fn with_defaults() -> Self {
        let mut r = Self::default();
        r.insert(device_table()).expect("built-in table is valid");
        r.insert(strategy_table(DEFAULT_STRATEGY_THRESHOLD))
            .expect("built-in table is valid");
        r
    }

    pub fn insert(&mut self, table: DecisionTable) -> Result<(), DecisionError> {
        table.validate()?;
        self.tables.insert(table.id.clone(), table);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&DecisionTable> {
        self.tables.get(id)
    }

    pub fn evaluate(&self, id: &str, facts: &Facts) -> Result<Map<String, Value>, DecisionError> {
        self.tables
            .get(id)
            .ok_or_else(|| DecisionError::UnknownTable(id.to_string()))?
            .evaluate(facts)
    }
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("literal objects only"),
    }
}

fn cond(s: &str) -> Condition {
    s.parse().expect("built-in condition")
}

/// Per-candidate acceptance: available devices large enough for the circuit.
pub fn device_table() -> DecisionTable {
    DecisionTable {
        id: DEVICE_TABLE_ID.into(),
        inputs: ["available", "max_qubits", "cost_per_shot"]
            .into_iter()
            .map(|name| InputClause {
                name: name.into(),
                label: None,
            })
            .collect(),
        rules: vec![Rule {
            when: vec![cond("== true"), cond(">= required_qubits"), cond("-")],
            then: object(json!({ "accept": true })),
            description: Some("available and large enough".into()),
        }],
        hit_policy: HitPolicy::First,
        default_output: Some(object(json!({ "accept": false }))),
    }
}

/// Classical brute force below `threshold` variables, QAOA pipeline above.
pub fn strategy_table(threshold: u64) -> DecisionTable {
    let pipeline = |kind: &str, process: &str| Rule {
        when: vec![cond(&format!("== \"{kind}\"")), cond("-")],
        then: object(json!({ "strategy": "qaoa-pipeline", "solution_process": process })),
        description: None,
    };
    DecisionTable {
        id: STRATEGY_TABLE_ID.into(),
        inputs: ["kind", "num_variables"]
            .into_iter()
            .map(|name| InputClause {
                name: name.into(),
                label: None,
            })
            .collect(),
        rules: vec![
            Rule {
                when: vec![cond("-"), cond(&format!("< {threshold}"))],
                then: object(json!({
                    "strategy": "classical-brute-force",
                    "solution_process": "classical-strategy"
                })),
                description: Some("small instances are solved exactly".into()),
            },
            pipeline("schedule", "scheduling-qaoa-pipeline"),
            pipeline("knapsack", "knapsack-qaoa-pipeline"),
        ],
        hit_policy: HitPolicy::First,
        default_output: None,
    }
}

/// Facts the device table sees for one candidate.
pub fn device_facts(device: &DeviceDescriptor, required_qubits: usize, shots: u64) -> Facts {
    object(json!({
        "device_id": device.id,
        "max_qubits": device.max_qubits,
        "available": device.available,
        "cost_per_shot": device.cost_per_shot,
        "required_qubits": required_qubits,
        "shots": shots,
    }))
}

/// First device in registry order that `table` accepts.
///
/// Capacity and availability are also checked directly, so a permissive
/// table can never select a device that cannot run the circuit.
pub fn select_device<'a>(
    table: &DecisionTable,
    registry: &'a [DeviceDescriptor],
    required_qubits: usize,
    shots: u64,
) -> Result<&'a DeviceDescriptor, DecisionError> {
    for device in registry {
        if !device.available || device.max_qubits < required_qubits {
            continue;
        }
        let out = table.evaluate(&device_facts(device, required_qubits, shots))?;
        if out.get("accept").and_then(Value::as_bool) == Some(true) {
            return Ok(device);
        }
    }
    Err(DecisionError::NoCapableDevice { required_qubits })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn facts(v: Value) -> Facts {
        object(v)
    }

    #[test]
    fn conditions_parse_and_print() {
        for text in ["-", "< 16", ">= required_qubits", "== \"schedule\"", "in [1,2]", "!= false"] {
            let c: Condition = text.parse().unwrap();
            assert_eq!(c.to_string().parse::<Condition>().unwrap(), c);
        }
        assert_eq!("16".parse::<Condition>().unwrap(), "== 16".parse().unwrap());
        assert!("< 1 2".parse::<Condition>().is_err());
        assert!("in 3".parse::<Condition>().is_err());
    }

    #[test]
    fn device_ladder() {
        let table: DecisionTable = serde_json::from_value(json!({
            "id": "ladder",
            "inputs": [{"name": "required_qubits"}],
            "rules": [
                {"when": ["<= 5"], "then": {"device_id": "local-sv-5"}},
                {"when": ["<= 24"], "then": {"device_id": "local-sv-24"}}
            ]
        }))
        .unwrap();
        let out = table.evaluate(&facts(json!({"required_qubits": 10}))).unwrap();
        assert_eq!(out["device_id"], "local-sv-24");
        assert_eq!(
            table.evaluate(&facts(json!({"required_qubits": 30}))),
            Err(DecisionError::NoMatch("ladder".into()))
        );
    }

    #[test]
    fn strategy_threshold_boundary() {
        let t = strategy_table(16);
        let small = t.evaluate(&facts(json!({"kind": "schedule", "num_variables": 10}))).unwrap();
        assert_eq!(small["strategy"], "classical-brute-force");
        let big = t.evaluate(&facts(json!({"kind": "schedule", "num_variables": 16}))).unwrap();
        assert_eq!(big["strategy"], "qaoa-pipeline");
        assert_eq!(big["solution_process"], "scheduling-qaoa-pipeline");
        let knap = t.evaluate(&facts(json!({"kind": "knapsack", "num_variables": 20}))).unwrap();
        assert_eq!(knap["solution_process"], "knapsack-qaoa-pipeline");
    }

    #[test]
    fn missing_fact() {
        assert_eq!(
            strategy_table(16).evaluate(&facts(json!({"kind": "schedule"}))),
            Err(DecisionError::MissingFact("num_variables".into()))
        );
    }

    #[test]
    fn type_mismatch_is_an_error() {
        let t = strategy_table(16);
        assert!(matches!(
            t.evaluate(&facts(json!({"kind": "schedule", "num_variables": "ten"}))),
            Err(DecisionError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn numbers_compare_by_value() {
        let c: Condition = "== 10".parse().unwrap();
        let t = DecisionTable {
            id: "t".into(),
            inputs: vec![InputClause { name: "x".into(), label: None }],
            rules: vec![Rule { when: vec![c], then: Map::new(), description: None }],
            hit_policy: HitPolicy::First,
            default_output: None,
        };
        assert!(t.evaluate(&facts(json!({"x": 10.0}))).is_ok());
    }

    #[test]
    fn rule_order_decides() {
        let mut t = strategy_table(16);
        t.rules.reverse();
        // the catch-all knapsack rule now comes first
        let out = t.evaluate(&facts(json!({"kind": "knapsack", "num_variables": 3}))).unwrap();
        assert_eq!(out["strategy"], "qaoa-pipeline");
    }

    #[test]
    fn table_shape_is_validated() {
        let mut t = device_table();
        t.rules[0].when.pop();
        assert!(matches!(t.validate(), Err(DecisionError::InvalidTable { .. })));
        let empty = DecisionTable {
            id: "e".into(),
            inputs: vec![],
            rules: vec![],
            hit_policy: HitPolicy::First,
            default_output: None,
        };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn select_device_cases() {
        let t = device_table();
        let reg = vec![DeviceDescriptor::simulator("local-sv-24", 24)];
        assert_eq!(select_device(&t, &reg, 10, 1000).unwrap().id, "local-sv-24");
        assert_eq!(
            select_device(&t, &reg, 30, 1000),
            Err(DecisionError::NoCapableDevice { required_qubits: 30 })
        );
        assert_eq!(
            DecisionError::NoCapableDevice { required_qubits: 30 }.to_string(),
            "no capable device for 30 qubits"
        );

        let mut down = DeviceDescriptor::simulator("down", 24);
        down.available = false;
        let reg = vec![down, DeviceDescriptor::simulator("up", 24)];
        assert_eq!(select_device(&t, &reg, 4, 1000).unwrap().id, "up");
    }

    #[test]
    fn registry_order_beats_cost() {
        let t = device_table();
        let mut pricey = DeviceDescriptor::simulator("pricey", 24);
        pricey.cost_per_shot = 0.5;
        let mut cheap = DeviceDescriptor::simulator("cheap", 24);
        cheap.cost_per_shot = 0.01;
        let reg = vec![pricey.clone(), cheap.clone()];
        assert_eq!(select_device(&t, &reg, 4, 100).unwrap().id, "pricey");
        let reg = vec![cheap, pricey];
        assert_eq!(select_device(&t, &reg, 4, 100).unwrap().id, "cheap");
    }

    #[test]
    fn permissive_table_cannot_pick_small_device() {
        let mut t = device_table();
        t.rules[0].when = vec![Condition::Any, Condition::Any, Condition::Any];
        let reg = vec![DeviceDescriptor::simulator("tiny", 4)];
        assert!(select_device(&t, &reg, 10, 1).is_err());
    }

    #[test]
    fn table_json_round_trip() {
        let t = strategy_table(16);
        let text = serde_json::to_string_pretty(&t).unwrap();
        assert!(text.contains("\"< 16\""));
        assert_eq!(serde_json::from_str::<DecisionTable>(&text).unwrap(), t);
    }
}
