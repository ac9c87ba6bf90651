//! Synthetic two-Gaussian classification data with a per-group label-noise
//! knob, used as a stand-in for real demographic data.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::{Dataset, Sample};
use crate::{seed, Error, Result};

/// Parameters of the synthetic generator.
///
/// For every sample: draw a group from `group_proportions`, draw a clean
/// label with probability `positive_rates[group]` of being 1, draw features
/// from `N(class_means[group][label], noise_std² I)`, then flip the label
/// with probability `label_flip_rates[group]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub num_samples: usize,
    pub feature_dim: usize,
    pub num_groups: usize,
    pub group_proportions: Vec<f64>,
    pub positive_rates: Vec<f64>,
    /// Indexed `[group][label]`, each of length `feature_dim`.
    pub class_means: Vec<[Vec<f64>; 2]>,
    pub noise_std: f64,
    pub label_flip_rates: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::config("num_samples", "must be at least 1"));
        }
        if self.feature_dim == 0 {
            return Err(Error::config("feature_dim", "must be at least 1"));
        }
        if self.num_groups == 0 {
            return Err(Error::config("num_groups", "must be at least 1"));
        }
        let s = self.num_groups;
        check_len("group_proportions", self.group_proportions.len(), s)?;
        check_len("positive_rates", self.positive_rates.len(), s)?;
        check_len("class_means", self.class_means.len(), s)?;
        check_len("label_flip_rates", self.label_flip_rates.len(), s)?;
        if self
            .group_proportions
            .iter()
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(Error::config(
                "group_proportions",
                "entries must lie in [0, 1]",
            ));
        }
        let total: f64 = self.group_proportions.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "group_proportions",
                format!("must sum to 1, got {total}"),
            ));
        }
        if self.positive_rates.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::config(
                "positive_rates",
                "entries must lie in [0, 1]",
            ));
        }
        if self
            .label_flip_rates
            .iter()
            .any(|p| !(0.0..0.5).contains(p))
        {
            return Err(Error::config(
                "label_flip_rates",
                "entries must lie in [0, 0.5)",
            ));
        }
        for means in &self.class_means {
            for m in means {
                check_len("class_means", m.len(), self.feature_dim)?;
                if m.iter().any(|x| !x.is_finite()) {
                    return Err(Error::config("class_means", "entries must be finite"));
                }
            }
        }
        if !(self.noise_std.is_finite() && self.noise_std > 0.0) {
            return Err(Error::config("noise_std", "must be positive and finite"));
        }
        Ok(())
    }
}

fn check_len(field: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::config(
            field,
            format!("expected {want} entries, got {got}"),
        ));
    }
    Ok(())
}

pub fn generate_synthetic(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = seed::rng(spec.seed, &[]);
    let groups = WeightedIndex::new(&spec.group_proportions)
        .map_err(|e| Error::config("group_proportions", e.to_string()))?;
    let noise = Normal::new(0.0, spec.noise_std).expect("validated std");

    let samples = (0..spec.num_samples)
        .map(|_| {
            let group = groups.sample(&mut rng);
            let clean = rng.random_bool(spec.positive_rates[group]) as u8;
            let features = spec.class_means[group][clean as usize]
                .iter()
                .map(|m| m + noise.sample(&mut rng))
                .collect();
            let flip = rng.random_bool(spec.label_flip_rates[group]);
            Sample {
                features,
                label: if flip { 1 - clean } else { clean },
                group,
            }
        })
        .collect();
    Dataset::new(samples, spec.feature_dim, spec.num_groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn separated(seed: u64) -> SynthSpec {
        SynthSpec {
            num_samples: 2000,
            feature_dim: 2,
            num_groups: 2,
            group_proportions: vec![0.5, 0.5],
            positive_rates: vec![0.5, 0.5],
            class_means: vec![
                [vec![-2.0, 0.0], vec![2.0, 0.0]],
                [vec![-2.0, 1.0], vec![2.0, 1.0]],
            ],
            noise_std: 0.7,
            label_flip_rates: vec![0.0, 0.0],
            seed,
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = generate_synthetic(&separated(11)).unwrap();
        let b = generate_synthetic(&separated(11)).unwrap();
        let c = generate_synthetic(&separated(12)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_proportions_yield_single_group() {
        let mut spec = separated(3);
        spec.group_proportions = vec![1.0, 0.0];
        let d = generate_synthetic(&spec).unwrap();
        assert!(d.samples().iter().all(|s| s.group == 0));
    }

    #[test]
    fn group_counts_track_proportions() {
        let mut spec = separated(5);
        spec.num_samples = 10_000;
        spec.group_proportions = vec![0.3, 0.7];
        let counts = generate_synthetic(&spec).unwrap().group_counts();
        for (c, p) in counts.iter().zip(&spec.group_proportions) {
            let expected = p * spec.num_samples as f64;
            assert!(
                (*c as f64 - expected).abs() <= 0.05 * expected,
                "{c} vs {expected}"
            );
        }
    }

    #[test]
    fn flip_rate_matches() {
        let mut spec = separated(9);
        spec.num_samples = 20_000;
        spec.class_means = vec![[vec![0.0, 0.0], vec![100.0, 0.0]]; 2];
        spec.label_flip_rates = vec![0.0, 0.25];
        let d = generate_synthetic(&spec).unwrap();
        // With means 100 apart the clean label is recoverable from x0.
        let mut flipped = [0usize; 2];
        for s in d.samples() {
            let clean = (s.features[0] > 50.0) as u8;
            if clean != s.label {
                flipped[s.group] += 1;
            }
        }
        let counts = d.group_counts();
        assert_eq!(flipped[0], 0);
        let rate = flipped[1] as f64 / counts[1] as f64;
        assert!((rate - 0.25).abs() < 0.02, "{rate}");
    }

    #[test]
    fn validation_names_field() {
        let mut spec = separated(1);
        spec.group_proportions = vec![0.5, 0.6];
        match generate_synthetic(&spec) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "group_proportions"),
            other => panic!("{other:?}"),
        }
        let mut spec = separated(1);
        spec.label_flip_rates = vec![0.0, 0.5];
        match generate_synthetic(&spec) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "label_flip_rates"),
            other => panic!("{other:?}"),
        }
    }
}
