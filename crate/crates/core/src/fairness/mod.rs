//! Hard-prediction group fairness metrics and the statistics used to report
//! them.
//!
//! For groups `a` and the pooled population, with rates from confusion
//! counts:
//!
//! ```text
//! Δ_EOpp = max_a (FNR_a - FNR)
//! Δ_EO   = max( max_a (FPR_a - FPR), max_a (FNR_a - FNR) )
//! Δ_AP   = max_a (FPR_a - FPR) + max_a (FNR_a - FNR)
//! ```
//!
//! Gaps are signed; the max runs over the raw differences. A rate whose
//! denominator is zero is `None`, and any delta depending on it is `None`.

mod metrics;
mod stats;

pub use metrics::{evaluate, evaluate_predictions, violation, FairnessReport, GroupConfusion};
pub use stats::{
    coefficient_of_variation, mahalanobis_from_origin, mahalanobis_rank, sample_covariance_2d,
};

use serde::{Deserialize, Serialize};

/// Which group-fairness notion a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Notion {
    /// Equality of opportunity.
    #[default]
    #[serde(rename = "eopp", alias = "EOpp")]
    EOpp,
    /// Equalized odds.
    #[serde(rename = "eo", alias = "EO")]
    EO,
    /// Accuracy parity.
    #[serde(rename = "ap", alias = "AP")]
    AP,
}

impl Notion {
    pub const ALL: [Notion; 3] = [Notion::EOpp, Notion::EO, Notion::AP];

    pub fn as_str(self) -> &'static str {
        match self {
            Notion::EOpp => "eopp",
            Notion::EO => "eo",
            Notion::AP => "ap",
        }
    }
}

impl std::fmt::Display for Notion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Notion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "eopp" => Ok(Notion::EOpp),
            "eo" => Ok(Notion::EO),
            "ap" => Ok(Notion::AP),
            other => Err(format!(
                "unknown fairness notion `{other}` (expected eopp, eo or ap)"
            )),
        }
    }
}

/// Decision threshold on predicted probabilities unless configured otherwise.
pub const DEFAULT_THRESHOLD: f64 = 0.5;
