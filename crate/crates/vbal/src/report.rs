//! JSON run reports.

use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};
use vbal_core::{VectorSystem, WalkMode};

pub const SCHEMA_VERSION: u32 = 1;

/// What a command did: its configuration, the instance it ran on, its
/// outputs and run statistics. `statistics.wall_time_ms` is the only field
/// that varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_hash: Option<String>,
    pub config: Value,
    pub outputs: Value,
    pub statistics: Value,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, instance_hash: Option<String>, config: Value) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            seed,
            instance_hash,
            config,
            outputs: json!({}),
            statistics: json!({}),
        }
    }
}

pub fn mode_str(mode: WalkMode) -> &'static str {
    match mode {
        WalkMode::Paper => "paper",
        WalkMode::Practical => "practical",
    }
}

pub fn mode_name<S: Serializer>(mode: &WalkMode, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(mode_str(*mode))
}

/// Coloring, residual `Vχ − t` and its norms.
pub fn coloring_outputs(sys: &VectorSystem, chi: &[f64]) -> Value {
    let residual = sys.residual(chi);
    let linf = residual.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    json!({
        "coloring": chi,
        "residual": residual.as_slice(),
        "residual_l2": residual.norm(),
        "residual_linf": linf,
        "discrepancy": linf,
    })
}
