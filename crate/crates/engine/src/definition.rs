use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::EngineError;

/// A straight-line process: tasks run strictly in list order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessDefinition {
    pub id: String,
    /// Assigned on deploy; any value supplied by the caller is ignored.
    #[serde(default)]
    pub version: u32,
    pub tasks: Vec<TaskDef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDef {
    pub id: String,
    #[serde(flatten)]
    pub kind: TaskKind,
    /// Optional tasks are skipped when the variable named by `flag` is
    /// `false`. Any other value, or absence, runs the task.
    #[serde(default)]
    pub optional: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TaskKind {
    /// Published to the broker as a job of `job_type`.
    Service { job_type: String },
    /// Evaluated inline against the instance variables.
    BusinessRule { decision_id: String },
    /// Runs a child instance. `target` is a definition id or `${variable}`.
    CallActivity {
        target: String,
        #[serde(default)]
        outputs: Vec<String>,
    },
}

impl TaskDef {
    pub fn service(id: impl Into<String>, job_type: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            kind: TaskKind::Service {
                job_type: job_type.into(),
            },
            optional: false,
            flag: None,
        }
    }

    pub fn business_rule(id: impl Into<String>, decision_id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            kind: TaskKind::BusinessRule {
                decision_id: decision_id.into(),
            },
            optional: false,
            flag: None,
        }
    }

    pub fn call_activity(id: impl Into<String>, target: impl Into<String>, outputs: &[&str]) -> Self {
        Self {
            id: id.into(),
            kind: TaskKind::CallActivity {
                target: target.into(),
                outputs: outputs.iter().map(|s| s.to_string()).collect(),
            },
            optional: false,
            flag: None,
        }
    }

    pub fn optional_on(mut self, flag: impl Into<String>) -> Self {
        self.optional = true;
        self.flag = Some(flag.into());
        self
    }
}

impl ProcessDefinition {
    pub fn new(id: impl Into<String>, tasks: Vec<TaskDef>) -> Self {
        Self {
            id: id.into(),
            version: 0,
            tasks,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let invalid = |m: String| Err(EngineError::InvalidDefinition(m));
        if self.id.trim().is_empty() {
            return invalid("empty definition id".into());
        }
        if self.tasks.is_empty() {
            return invalid(format!("definition '{}' has an empty task list", self.id));
        }
        let mut seen = BTreeSet::new();
        for t in &self.tasks {
            if !seen.insert(t.id.as_str()) {
                return invalid(format!("duplicate task id '{}'", t.id));
            }
            if t.optional && t.flag.is_none() {
                return invalid(format!("optional task '{}' names no flag variable", t.id));
            }
            let empty = match &t.kind {
                TaskKind::Service { job_type } => job_type.is_empty(),
                TaskKind::BusinessRule { decision_id } => decision_id.is_empty(),
                TaskKind::CallActivity { target, .. } => target.is_empty(),
            };
            if empty {
                return invalid(format!("task '{}' has an empty target", t.id));
            }
        }
        Ok(())
    }
}

/// Variable name inside a `${name}` reference.
pub(crate) fn variable_reference(target: &str) -> Option<&str> {
    target.strip_prefix("${")?.strip_suffix('}')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format() {
        let d: ProcessDefinition = serde_json::from_str(
            r#"{"id":"p","tasks":[
                {"id":"a","kind":"service","job_type":"t"},
                {"id":"b","kind":"business-rule","decision_id":"d"},
                {"id":"c","kind":"call-activity","target":"${x}","outputs":["solution"],"optional":true,"flag":"run_c"}
            ]}"#,
        )
        .unwrap();
        assert_eq!(d.tasks[0], TaskDef::service("a", "t"));
        assert_eq!(d.tasks[2], TaskDef::call_activity("c", "${x}", &["solution"]).optional_on("run_c"));
        assert_eq!(d.validate(), Ok(()));
    }

    #[test]
    fn invariants() {
        let dup = ProcessDefinition::new("p", vec![TaskDef::service("a", "t"), TaskDef::service("a", "u")]);
        assert!(dup.validate().unwrap_err().to_string().contains("duplicate task id 'a'"));
        assert!(ProcessDefinition::new("p", vec![]).validate().is_err());
        let mut bad = TaskDef::service("a", "t");
        bad.optional = true;
        assert!(ProcessDefinition::new("p", vec![bad]).validate().is_err());
    }

    #[test]
    fn references() {
        assert_eq!(variable_reference("${solution_process}"), Some("solution_process"));
        assert_eq!(variable_reference("classical-strategy"), None);
    }
}
