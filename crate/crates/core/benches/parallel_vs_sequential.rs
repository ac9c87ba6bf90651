use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fairfed::aggregation::{score_submissions, ClientSubmission, HeuristicSpec};
use fairfed::data::{
    generate_synthetic, partition_heterogeneous, split_aggregator_set, Dataset, SynthSpec,
};
use fairfed::exec::Exec;
use fairfed::fairness::Notion;
use fairfed::model::{init_params, Architecture};
use fairfed::orchestrator::{run_federated, LmmConfig, ModelSpec, RunConfig};

fn pool(num_samples: usize) -> Dataset {
    let (s, c) = 60f64.to_radians().sin_cos();
    generate_synthetic(&SynthSpec {
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
        seed: 1,
    })
    .unwrap()
}

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn round_loop(c: &mut Criterion) {
    let clients = 20;
    let (train, agg) = split_aggregator_set(&pool(24_000), 0.15, 2).unwrap();
    let shards = partition_heterogeneous(&train, clients, &[0.5, 0.5], 3).unwrap();
    let mut group = c.benchmark_group("federated_run");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = RunConfig {
            num_clients: clients,
            rounds: 5,
            local_epochs: 1,
            learning_rate: 0.05,
            batch_size: 32,
            heuristic: HeuristicSpec::fair_acc_avg(10.0, Notion::EO),
            // Never stops early, so every iteration runs all rounds.
            accuracy_tolerance: 1e-9,
            threshold_round: 1,
            participation: 1.0,
            seed: 4,
            model: ModelSpec::Mlp { hidden_dim: 16 },
            lmm: LmmConfig::default(),
            fair_check_band: false,
            band_patience: 2,
            threshold: 0.5,
            time_budget_secs: None,
            nesting_probe_alphas: vec![],
            exec,
        };
        group.bench_function(BenchmarkId::new("mlp16_20_clients_5_rounds", name), |b| {
            b.iter(|| run_federated(black_box(&cfg), &shards, &agg, None).unwrap())
        });
    }
    group.finish();
}

fn scoring(c: &mut Criterion) {
    let agg = pool(10_000);
    let arch = Architecture::Mlp {
        input_dim: 2,
        hidden_dim: 16,
    };
    let subs: Vec<ClientSubmission> = (0..50)
        .map(|i| ClientSubmission {
            client_id: i,
            params: init_params(arch, i as u64).unwrap(),
            num_samples: 1000,
        })
        .collect();
    let mut group = c.benchmark_group("score_submissions");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new("50_clients_10k_agg", name), |b| {
            b.iter(|| score_submissions(black_box(&subs), &agg, Notion::EO, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, round_loop, scoring);
criterion_main!(benches);
