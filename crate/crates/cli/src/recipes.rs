//! Built-in experiment recipes, mirrored by the files under `recipes/`.
//!
//! Both use two equally sized groups whose class-conditional Gaussians point
//! in directions 60° apart, with a quarter of group 1's labels flipped.
//! Group 1 is therefore both harder and differently oriented, so a model
//! fitted to the pooled population serves it worse.

use fairfed::aggregation::HeuristicSpec;
use fairfed::data::SynthSpec;
use fairfed::exec::Exec;
use fairfed::fairness::Notion;
use fairfed::orchestrator::{LmmConfig, ModelSpec, RunConfig};

use crate::config::{
    CompareSpec, DataSource, ExperimentSpec, OracleSpec, Partitioning, SplitSpec, SweepSpec,
};

fn biased_pool(num_samples: usize) -> SynthSpec {
    // Group 1's class axis is rotated by 60°: (cos 60°, sin 60°).
    let (c, s) = (0.5, 0.8660254037844386);
    SynthSpec {
        num_samples,
        feature_dim: 2,
        num_groups: 2,
        group_proportions: vec![0.5, 0.5],
        positive_rates: vec![0.5, 0.5],
        class_means: vec![
            [vec![-1.0, 0.0], vec![1.0, 0.0]],
            [vec![-c, -s], vec![c, s]],
        ],
        noise_std: 0.5,
        label_flip_rates: vec![0.0, 0.25],
        seed: 0,
    }
}

fn recipe(name: &str, num_clients: usize) -> ExperimentSpec {
    // After 15% test and 15% aggregator splits, about 1000 samples per client.
    let num_samples = (num_clients as f64 * 1000.0 / (0.85 * 0.85)).round() as usize;
    ExperimentSpec {
        name: name.into(),
        repeats: 5,
        seed: 0,
        data: DataSource::Synthetic(biased_pool(num_samples)),
        partition: Partitioning::Heterogeneous {
            group_client_fractions: vec![0.5, 0.5],
        },
        split: SplitSpec::default(),
        run: RunConfig {
            num_clients,
            rounds: 60,
            local_epochs: 1,
            learning_rate: 0.05,
            batch_size: 32,
            heuristic: HeuristicSpec::fair_acc_avg(10.0, Notion::EO),
            accuracy_tolerance: 1.0,
            threshold_round: 20,
            participation: 1.0,
            seed: 0,
            model: ModelSpec::Linear,
            lmm: LmmConfig::default(),
            fair_check_band: false,
            band_patience: 2,
            threshold: 0.5,
            time_budget_secs: None,
            nesting_probe_alphas: vec![],
            exec: Exec::default(),
        },
        compare: CompareSpec::default(),
        sweep: SweepSpec {
            alphas: vec![2.0, 10.0, 50.0, 100.0],
        },
        oracle: OracleSpec::default(),
    }
}

/// Ten clients, logistic model: small enough for a laptop core.
pub fn desk() -> ExperimentSpec {
    recipe("desk", 10)
}

/// Fifty clients with about 1K samples each.
pub fn standard() -> ExperimentSpec {
    recipe("standard", 50)
}

pub fn by_name(name: &str) -> Option<ExperimentSpec> {
    match name {
        "desk" => Some(desk()),
        "standard" => Some(standard()),
        _ => None,
    }
}
