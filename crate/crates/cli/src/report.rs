use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use ktorus_core::ktheory::EXTERIOR_CONVENTION;
use ktorus_core::smooth_cp::CONVOLUTION_CONVENTION;

pub const COLUMN_MAP_CONVENTION: &str = "points are column vectors; h(x) = A x + t + r(x) mod Z^d";

/// Deterministic part of a run report. Wall time is attached outside it.
#[derive(Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Value,
    pub config_hash: String,
    pub conventions: Value,
    pub results: Value,
    pub notes: Vec<String>,
}

pub fn config_hash(command: &Value) -> String {
    let canonical = serde_json::to_string(command).expect("config serialises");
    let digest = Sha256::digest(canonical.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

impl RunReport {
    pub fn new(command: Value, results: Value, notes: Vec<String>) -> Self {
        RunReport {
            tool: "ktorus",
            version: env!("CARGO_PKG_VERSION"),
            config_hash: config_hash(&command),
            command,
            conventions: json!({
                "column_map": COLUMN_MAP_CONVENTION,
                "transpose": EXTERIOR_CONVENTION,
                "convolution": CONVOLUTION_CONVENTION,
            }),
            results,
            notes,
        }
    }

    /// `{"report": ..., "wall_time_seconds": ...}` as pretty JSON.
    pub fn render(&self, wall_time: f64) -> String {
        let out = json!({ "report": self, "wall_time_seconds": wall_time });
        serde_json::to_string_pretty(&out).expect("report serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_only_on_config() {
        let a = config_hash(&json!({"x": 1}));
        assert_eq!(a, config_hash(&json!({"x": 1})));
        assert_ne!(a, config_hash(&json!({"x": 2})));
        assert_eq!(a.len(), "sha256:".len() + 64);
    }
}
