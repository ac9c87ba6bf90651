//! Experiment files.
//!
//! An experiment is a single TOML document:
//!
//! ```toml
//! name = "desk"
//! repeats = 5
//! seed = 0
//!
//! [data]
//! source = "synthetic"        # or "csv"
//! num_samples = 14000
//! # ... remaining generator fields
//!
//! [partition]
//! mode = "heterogeneous"      # or "homogeneous"
//! group_client_fractions = [0.5, 0.5]
//!
//! [split]
//! test_fraction = 0.15
//! agg_fraction = 0.15
//!
//! [run]
//! num_clients = 10
//! # ... remaining round-loop fields
//! heuristic = { kind = "fair_acc_avg", alpha = 10, notion = "eo" }
//! ```
//!
//! Repeat `r` uses seed `seed + r` for data generation, splitting,
//! partitioning and training.

use std::path::{Path, PathBuf};

use fairfed::data::{self, CsvSchema, Dataset, SynthSpec};
use fairfed::orchestrator::RunConfig;
use fairfed::seed;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    Synthetic(SynthSpec),
    Csv {
        path: PathBuf,
        #[serde(flatten)]
        schema: CsvSchema,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Partitioning {
    /// Every client holds a single group.
    Heterogeneous { group_client_fractions: Vec<f64> },
    /// Every client holds every group.
    Homogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    /// Share of the pool held out for final reporting; 0 disables it.
    #[serde(default = "default_fraction")]
    pub test_fraction: f64,
    /// Share of what remains that goes to the aggregator set.
    #[serde(default = "default_fraction")]
    pub agg_fraction: f64,
}

fn default_fraction() -> f64 {
    0.15
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: default_fraction(),
            agg_fraction: default_fraction(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    /// α used for the FairAvg and FairAccAvg rows.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    10.0
}

impl Default for CompareSpec {
    fn default() -> Self {
        CompareSpec {
            alpha: default_alpha(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LmmShards {
    #[default]
    Homogeneous,
    /// Feed the penalised baseline single-group shards; this fails by
    /// construction and exists to demonstrate it.
    Heterogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default)]
    pub lmm_shards: LmmShards,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    pub data: DataSource,
    pub partition: Partitioning,
    #[serde(default)]
    pub split: SplitSpec,
    pub run: RunConfig,
    #[serde(default)]
    pub compare: CompareSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
}

fn default_repeats() -> usize {
    5
}

/// Datasets for one repeat.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub shards: Vec<Dataset>,
    pub agg: Dataset,
    pub test: Option<Dataset>,
    /// Training pool before sharding.
    pub train: Dataset,
}

const SPLIT_TEST: u64 = 1;
const SPLIT_AGG: u64 = 2;
const PARTITION: u64 = 3;

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut spec = Self::from_toml(&text)?;
        // Relative CSV paths are resolved against the experiment file.
        if let DataSource::Csv { path: csv, .. } = &mut spec.data {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    *csv = dir.join(&*csv);
                }
            }
        }
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment specs always serialise")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: &str| Err(CliError::Config(format!("{field}: {reason}")));
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            || self.name.starts_with('.')
        {
            return bad(
                "name",
                "must be nonempty and use only ASCII letters, digits, '-', '_' or '.'",
            );
        }
        if self.repeats == 0 {
            return bad("repeats", "must be at least 1");
        }
        if !(0.0..1.0).contains(&self.split.test_fraction) {
            return bad("split.test_fraction", "must lie in [0, 1)");
        }
        if !(self.split.agg_fraction > 0.0 && self.split.agg_fraction < 1.0) {
            return bad("split.agg_fraction", "must lie in (0, 1)");
        }
        if !(self.compare.alpha > 0.0 && self.compare.alpha <= 100.0) {
            return bad("compare.alpha", "must lie in (0, 100]");
        }
        if self.sweep.alphas.iter().any(|a| !(*a > 0.0 && *a <= 100.0)) {
            return bad("sweep.alphas", "entries must lie in (0, 100]");
        }
        if let DataSource::Synthetic(s) = &self.data {
            s.validate()?;
        }
        if let Partitioning::Heterogeneous {
            group_client_fractions,
        } = &self.partition
        {
            let total: f64 = group_client_fractions.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return bad("partition.group_client_fractions", "must sum to 1");
            }
        }
        self.run.validate()?;
        Ok(())
    }

    pub fn repeat_seed(&self, repeat: usize) -> u64 {
        self.seed.wrapping_add(repeat as u64)
    }

    /// Loads the CSV source once; synthetic sources return `None` and are
    /// generated per repeat.
    pub fn load_pool(&self) -> Result<Option<Dataset>> {
        match &self.data {
            DataSource::Synthetic(_) => Ok(None),
            DataSource::Csv { path, schema } => Ok(Some(data::load_csv(path, schema)?)),
        }
    }

    /// Builds the datasets of one repeat with the configured partitioning.
    pub fn prepare(&self, repeat: usize, pool: Option<&Dataset>) -> Result<Prepared> {
        self.prepare_as(repeat, pool, &self.partition)
    }

    pub fn prepare_as(
        &self,
        repeat: usize,
        pool: Option<&Dataset>,
        partition: &Partitioning,
    ) -> Result<Prepared> {
        let s = self.repeat_seed(repeat);
        let generated;
        let all = match (&self.data, pool) {
            (_, Some(pool)) => pool,
            (DataSource::Synthetic(spec), None) => {
                generated = data::generate_synthetic(&SynthSpec {
                    seed: s,
                    ..spec.clone()
                })?;
                &generated
            }
            (DataSource::Csv { .. }, None) => {
                return Err(CliError::Run("CSV pool was not loaded".into()));
            }
        };
        let (rest, test) = if self.split.test_fraction > 0.0 {
            let (rest, test) = data::split_aggregator_set(
                all,
                self.split.test_fraction,
                seed::derive(s, &[SPLIT_TEST]),
            )?;
            (rest, Some(test))
        } else {
            (all.clone(), None)
        };
        let (train, agg) = data::split_aggregator_set(
            &rest,
            self.split.agg_fraction,
            seed::derive(s, &[SPLIT_AGG]),
        )?;
        let m = self.run.num_clients;
        let part_seed = seed::derive(s, &[PARTITION]);
        let shards = match partition {
            Partitioning::Heterogeneous {
                group_client_fractions,
            } => data::partition_heterogeneous(&train, m, group_client_fractions, part_seed)?,
            Partitioning::Homogeneous => data::partition_homogeneous(&train, m, part_seed)?,
        };
        Ok(Prepared {
            shards,
            agg,
            test,
            train,
        })
    }
}
