use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::HandlerError;

pub type Variables = Map<String, Value>;

pub(crate) fn required<T: DeserializeOwned>(vars: &Variables, key: &str) -> Result<T, HandlerError> {
    let v = vars
        .get(key)
        .ok_or_else(|| HandlerError::invalid(format!("missing variable '{key}'")))?;
    serde_json::from_value(v.clone())
        .map_err(|e| HandlerError::invalid(format!("invalid variable '{key}': {e}")))
}

/// `None` for an absent or null variable.
pub(crate) fn optional<T: DeserializeOwned>(vars: &Variables, key: &str) -> Result<Option<T>, HandlerError> {
    match vars.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(_) => required(vars, key).map(Some),
    }
}

pub(crate) fn output<const N: usize>(pairs: [(&str, Value); N]) -> Variables {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub(crate) fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("domain types serialize")
}
