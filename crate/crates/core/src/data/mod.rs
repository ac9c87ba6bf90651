//! Datasets carrying a sensitive attribute, and the ways they are cut up
//! between clients and the aggregator.

mod csv_io;
mod partition;
mod synth;

pub use csv_io::{export_csv, load_csv, CsvSchema};
pub use partition::{partition_heterogeneous, partition_homogeneous, split_aggregator_set};
pub use synth::{generate_synthetic, SynthSpec};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One labelled example with its demographic group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: u8,
    pub group: usize,
}

/// A non-empty, validated collection of samples sharing a feature dimension
/// and a number of demographic groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<Sample>,
    feature_dim: usize,
    num_groups: usize,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, feature_dim: usize, num_groups: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::config("samples", "dataset must be nonempty"));
        }
        if feature_dim == 0 {
            return Err(Error::config("feature_dim", "must be at least 1"));
        }
        if num_groups == 0 {
            return Err(Error::config("num_groups", "must be at least 1"));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != feature_dim {
                return Err(Error::config(
                    "samples",
                    format!(
                        "sample {i} has {} features, expected {feature_dim}",
                        s.features.len()
                    ),
                ));
            }
            if s.features.iter().any(|x| !x.is_finite()) {
                return Err(Error::config(
                    "samples",
                    format!("sample {i} has a non-finite feature"),
                ));
            }
            if s.label > 1 {
                return Err(Error::config(
                    "samples",
                    format!("sample {i} has label {}", s.label),
                ));
            }
            if s.group >= num_groups {
                return Err(Error::config(
                    "samples",
                    format!(
                        "sample {i} has group {} but num_groups is {num_groups}",
                        s.group
                    ),
                ));
            }
        }
        Ok(Dataset {
            samples,
            feature_dim,
            num_groups,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false for a constructed dataset; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    /// Sample counts per group.
    pub fn group_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_groups];
        for s in &self.samples {
            counts[s.group] += 1;
        }
        counts
    }

    /// Sample counts indexed `[group][label]`.
    pub fn cell_counts(&self) -> Vec<[usize; 2]> {
        let mut counts = vec![[0; 2]; self.num_groups];
        for s in &self.samples {
            counts[s.group][s.label as usize] += 1;
        }
        counts
    }

    /// Distinct groups that actually occur, ascending.
    pub fn groups_present(&self) -> Vec<usize> {
        self.group_counts()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(g, _)| g)
            .collect()
    }

    /// Builds a dataset from a subset of this one's sample indices, keeping
    /// their relative order.
    pub(crate) fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let samples = indices.iter().map(|&i| self.samples[i].clone()).collect();
        Dataset::new(samples, self.feature_dim, self.num_groups)
    }

    pub(crate) fn indices_by_group(&self) -> Vec<Vec<usize>> {
        let mut by_group = vec![Vec::new(); self.num_groups];
        for (i, s) in self.samples.iter().enumerate() {
            by_group[s.group].push(i);
        }
        by_group
    }
}
