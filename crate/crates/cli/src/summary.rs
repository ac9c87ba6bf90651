//! Summary tables computed from per-repeat results.
//!
//! Everything here is post-processing of [`RunResult`]s: accuracy and
//! violations are taken from the held-out test report when the run had one,
//! otherwise from the aggregator-set report, and scaled to percent exactly
//! once.

use fairfed::fairness::{
    coefficient_of_variation, mahalanobis_from_origin, sample_covariance_2d, FairnessReport, Notion,
};
use fairfed::orchestrator::RunResult;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Accuracy and violations of one repeat's final model, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeatMetrics {
    pub accuracy: f64,
    pub d_eopp: Option<f64>,
    pub d_eo: Option<f64>,
    pub d_ap: Option<f64>,
}

impl RepeatMetrics {
    pub fn of(result: &RunResult) -> Self {
        let r: &FairnessReport = result.final_test.as_ref().unwrap_or(&result.final_agg);
        let pct = |v: Option<f64>| v.map(|x| 100.0 * x);
        RepeatMetrics {
            accuracy: 100.0 * r.accuracy,
            d_eopp: pct(r.delta_eopp),
            d_eo: pct(r.delta_eo),
            d_ap: pct(r.delta_ap),
        }
    }

    pub fn delta(&self, notion: Notion) -> Option<f64> {
        match notion {
            Notion::EOpp => self.d_eopp,
            Notion::EO => self.d_eo,
            Notion::AP => self.d_ap,
        }
    }
}

/// Spread of one metric across repeats. Every field is `None` when some
/// repeat left the metric undefined; `std` and `cov` also need two repeats
/// (and `cov` a nonzero mean).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stat {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub cov: Option<f64>,
    pub median: Option<f64>,
}

impl Stat {
    pub fn of(values: &[Option<f64>]) -> Self {
        let Some(v) = values.iter().copied().collect::<Option<Vec<f64>>>() else {
            return Stat::default();
        };
        if v.is_empty() {
            return Stat::default();
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std = (v.len() > 1)
            .then(|| (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        Stat {
            mean: Some(mean),
            std,
            cov: coefficient_of_variation(&v).ok(),
            median: Some(median(&v)),
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        (v[k - 1] + v[k]) / 2.0
    }
}

/// Relative reduction of a violation against a baseline, in percent.
pub fn improvement(base: f64, heuristic: f64) -> Option<f64> {
    (base != 0.0).then(|| 100.0 * (base - heuristic) / base)
}

/// Trade-off distance of a heuristic's repeats for one notion: the mean
/// `(error %, Δ %)` point measured under the sample covariance of the
/// repeat points.
pub fn tradeoff_distance(
    metrics: &[RepeatMetrics],
    notion: Notion,
) -> std::result::Result<f64, String> {
    if metrics.len() < 3 {
        return Err(format!("{} repeats; at least 3 are needed", metrics.len()));
    }
    let points = metrics
        .iter()
        .map(|m| m.delta(notion).map(|d| (100.0 - m.accuracy, d)))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| "a repeat has an undefined violation".to_string())?;
    let n = points.len() as f64;
    let mean = (
        points.iter().map(|p| p.0).sum::<f64>() / n,
        points.iter().map(|p| p.1).sum::<f64>() / n,
    );
    mahalanobis_from_origin(mean, sample_covariance_2d(&points)).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub heuristic: String,
    pub repeats: usize,
    pub accuracy: Stat,
    pub d_eopp: Stat,
    pub d_eo: Stat,
    pub d_ap: Stat,
    /// Reduction of the mean violation against the baseline row, in percent,
    /// ordered EOpp, EO, AP.
    #[serde(default)]
    pub improvement: [Option<f64>; 3],
    /// Trade-off distance per notion, ordered EOpp, EO, AP.
    #[serde(default)]
    pub mahalanobis: [Option<f64>; 3],
}

impl SummaryRow {
    pub fn new(heuristic: impl Into<String>, metrics: &[RepeatMetrics]) -> Self {
        let col = |f: fn(&RepeatMetrics) -> Option<f64>| {
            Stat::of(&metrics.iter().map(f).collect::<Vec<_>>())
        };
        SummaryRow {
            heuristic: heuristic.into(),
            repeats: metrics.len(),
            accuracy: col(|m| Some(m.accuracy)),
            d_eopp: col(|m| m.d_eopp),
            d_eo: col(|m| m.d_eo),
            d_ap: col(|m| m.d_ap),
            improvement: [None; 3],
            mahalanobis: [None; 3],
        }
    }

    pub fn delta(&self, notion: Notion) -> &Stat {
        match notion {
            Notion::EOpp => &self.d_eopp,
            Notion::EO => &self.d_eo,
            Notion::AP => &self.d_ap,
        }
    }

    pub fn set_improvement(&mut self, base: &SummaryRow) {
        for (i, notion) in Notion::ALL.into_iter().enumerate() {
            self.improvement[i] = match (base.delta(notion).mean, self.delta(notion).mean) {
                (Some(b), Some(h)) => improvement(b, h),
                _ => None,
            };
        }
    }
}

/// Output of one command: the rows plus any warnings raised while
/// summarising.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub command: String,
    pub rows: Vec<SummaryRow>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

const METRICS: [&str; 4] = ["accuracy", "d_eopp", "d_eo", "d_ap"];
const STATS: [&str; 4] = ["mean", "std", "cov", "median"];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Summary {
    pub fn row(&self, heuristic: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.heuristic == heuristic)
    }

    pub fn header() -> Vec<String> {
        let mut h = vec!["heuristic".to_string(), "repeats".to_string()];
        for m in METRICS {
            h.extend(STATS.iter().map(|s| format!("{m}_{s}")));
        }
        for prefix in ["improvement", "mahalanobis"] {
            h.extend(
                Notion::ALL
                    .iter()
                    .map(|n| format!("{prefix}_{}", n.as_str())),
            );
        }
        h
    }

    /// One line per row. Percent-scale values; empty cells are undefined.
    pub fn to_csv(&self) -> Result<String> {
        let err = |e: csv::Error| CliError::Run(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::header()).map_err(err)?;
        for r in &self.rows {
            let mut rec = vec![r.heuristic.clone(), r.repeats.to_string()];
            for s in [&r.accuracy, &r.d_eopp, &r.d_eo, &r.d_ap] {
                rec.extend([s.mean, s.std, s.cov, s.median].map(cell));
            }
            rec.extend(r.improvement.map(cell));
            rec.extend(r.mahalanobis.map(cell));
            w.write_record(rec).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Run(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries always serialise")
    }
}
