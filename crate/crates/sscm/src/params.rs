//! Model parameter set: every fitted constant of the channel model with its
//! 28 GHz dense-urban NLOS default, grouped by subsystem and overridable via
//! config file or CLI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::LinkConfig;
use crate::spatial::SpatialParams;
use crate::temporal::TemporalParams;

/// All fitted constants of the model. `Default` is the 28 GHz dense-urban
/// NLOS parameter set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub link: LinkConfig,
    pub temporal: TemporalParams,
    pub spatial: SpatialParams,
}

impl ModelParams {
    /// Re-validate every field against its type invariants. Returns the first
    /// violated constraint with its dotted field name.
    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.temporal.validate()?;
        self.spatial.validate()?;
        Ok(())
    }

    /// Apply a single `name=value` override with a dotted field path, e.g.
    /// `temporal.n_max=1` or `link.tx_power_dbm=30`.
    pub fn apply_override(&mut self, name: &str, value: &str) -> Result<()> {
        let mut tree = serde_json::to_value(&*self).expect("params serialize");
        let pointer = format!("/{}", name.replace('.', "/"));
        let slot = tree.pointer_mut(&pointer).ok_or_else(|| Error::InvalidConfig {
            field: name.to_string(),
            constraint: "unknown parameter name".to_string(),
        })?;
        *slot = parse_override_value(value, slot);
        *self = serde_json::from_value(tree).map_err(|e| Error::InvalidConfig {
            field: name.to_string(),
            constraint: e.to_string(),
        })?;
        self.validate()
    }
}

/// Parse an override value with the type of the existing field as a guide.
fn parse_override_value(raw: &str, current: &serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match current {
        Value::Bool(_) => raw
            .parse::<bool>()
            .map(Value::Bool)
            .unwrap_or_else(|_| Value::String(raw.to_string())),
        Value::Number(n) if n.is_u64() || n.is_i64() => raw
            .parse::<i64>()
            .map(|v| Value::Number(v.into()))
            .or_else(|_| raw.parse::<f64>().map(|v| serde_json::json!(v)))
            .unwrap_or_else(|_| Value::String(raw.to_string())),
        Value::Number(_) => raw
            .parse::<f64>()
            .map(|v| serde_json::json!(v))
            .unwrap_or_else(|_| Value::String(raw.to_string())),
        _ => Value::String(raw.to_string()),
    }
}
