//! Flag/config-file merging. A `--config` JSON file supplies defaults;
//! command-line flags override it field by field. The file may hold the
//! fields at top level or under a key named after the subcommand.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub fn load_config(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    if !value.is_object() {
        return Err(CliError::Usage(format!(
            "config {} must be a JSON object",
            path.display()
        )));
    }
    Ok(value)
}

fn section(config: &Value, command: &str) -> Map<String, Value> {
    let Some(object) = config.as_object() else {
        return Map::new();
    };
    match object.get(command) {
        Some(Value::Object(inner)) => inner.clone(),
        _ => object
            .iter()
            .filter(|(_, v)| !v.is_object())
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    }
}

/// Effective parameters: config-file values overlaid with explicit flags.
/// `flags` must skip unset options when serialized.
pub fn resolve<F, P>(command: &str, flags: &F, config: Option<&Value>) -> CliResult<P>
where
    F: Serialize,
    P: DeserializeOwned,
{
    let mut merged = config.map(|c| section(c, command)).unwrap_or_default();
    let Value::Object(explicit) = serde_json::to_value(flags).expect("flags serialize") else {
        unreachable!("flag structs serialize to objects");
    };
    merged.extend(explicit);
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Usage(format!("invalid {command} parameters: {e}")))
}
