//! Serialisation of run results: JSON with base64-encoded parameters, and a
//! per-round CSV.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use super::RunResult;
use crate::Result;

pub(super) mod params_base64 {
    use super::*;
    use crate::model::ModelParams;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        params: &ModelParams,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&STANDARD.encode(params.to_bytes()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<ModelParams, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = STANDARD.decode(text.as_bytes()).map_err(D::Error::custom)?;
        ModelParams::from_bytes(&bytes).map_err(D::Error::custom)
    }
}

pub const ROUND_CSV_HEADER: [&str; 10] = [
    "round",
    "acc_agg",
    "acc_test",
    "d_eopp",
    "d_eo",
    "d_ap",
    "d_acc",
    "phi_best_updated",
    "fair_check",
    "stopped",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunResult {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| crate::Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Serialization(e.to_string()))
    }

    /// Per-round log as CSV. Rates are raw fractions, `d_acc` is in
    /// percentage points, undefined values are empty cells.
    pub fn round_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| crate::Error::Serialization(e.to_string());
        w.write_record(ROUND_CSV_HEADER).map_err(io)?;
        for log in &self.logs {
            w.write_record([
                log.round.to_string(),
                log.acc_agg.to_string(),
                cell(log.acc_test),
                cell(log.d_eopp),
                cell(log.d_eo),
                cell(log.d_ap),
                cell(log.d_acc),
                log.phi_best_updated.to_string(),
                log.fair_check_invoked.to_string(),
                log.stopped.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| crate::Error::Serialization(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
