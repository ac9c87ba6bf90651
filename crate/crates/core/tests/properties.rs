use fairfed::aggregation::{dispatch, ClientSubmission, HeuristicSpec};
use fairfed::data::{partition_heterogeneous, split_aggregator_set, Dataset, Sample};
use fairfed::exec::Exec;
use fairfed::fairness::Notion;
use fairfed::model::{
    init_params, local_train_ce, local_train_lmm, Architecture, ModelParams, TrainConfig,
};
use proptest::prelude::*;

fn dataset(cells: &[(usize, u8, f64)], num_groups: usize) -> Dataset {
    let samples = cells
        .iter()
        .map(|&(g, y, x)| Sample {
            features: vec![x, x * x - 0.5],
            label: y,
            group: g,
        })
        .collect();
    Dataset::new(samples, 2, num_groups).unwrap()
}

fn cells() -> impl Strategy<Value = Vec<(usize, u8, f64)>> {
    prop::collection::vec((0usize..2, 0u8..2, -2.0f64..2.0), 40..120)
}

fn features(d: &Dataset) -> Vec<(u64, u64)> {
    let mut v: Vec<(u64, u64)> = d
        .samples()
        .iter()
        .map(|s| (s.features[0].to_bits(), s.features[1].to_bits()))
        .collect();
    v.sort_unstable();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_then_partition_conserves_samples(cells in cells(), m in 2usize..6, seed in any::<u64>()) {
        let mut cells = cells;
        // Guarantee every (group, label) stratum.
        cells.extend([(0, 0, 0.1), (0, 1, 0.2), (1, 0, 0.3), (1, 1, 0.4), (0, 0, 0.5), (1, 1, 0.6)]);
        let data = dataset(&cells, 2);
        let (train, agg) = split_aggregator_set(&data, 0.2, seed).unwrap();
        prop_assert_eq!(agg.groups_present(), vec![0, 1]);
        let shards = partition_heterogeneous(&train, 2 * m, &[0.5, 0.5], seed).unwrap();
        let mut all: Vec<_> = shards.iter().flat_map(features).collect();
        all.extend(features(&agg));
        all.sort_unstable();
        prop_assert_eq!(all, features(&data));
        for shard in &shards {
            prop_assert!(shard.groups_present().len() <= 1);
        }
    }

    #[test]
    fn zero_lambda_penalised_training_equals_cross_entropy(cells in cells(), seed in any::<u64>()) {
        let mut cells = cells;
        cells.extend([(0, 0, 0.1), (0, 1, 0.2), (1, 0, 0.3), (1, 1, 0.4)]);
        let data = dataset(&cells, 2);
        let init = init_params(Architecture::Mlp { input_dim: 2, hidden_dim: 3 }, seed).unwrap();
        let cfg = TrainConfig { epochs: 2, learning_rate: 0.1, batch_size: 8, seed, lambda: 0.0, notion: Notion::EO };
        prop_assert_eq!(local_train_lmm(&init, &data, &cfg).unwrap(), local_train_ce(&init, &data, &cfg).unwrap());
    }

    #[test]
    fn aggregation_ignores_submission_order(
        values in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 2..8),
        sizes in prop::collection::vec(1usize..100, 8),
        rotate in 0usize..8,
        alpha in 1.0f64..100.0,
    ) {
        let arch = Architecture::Linear { input_dim: 2 };
        let subs: Vec<ClientSubmission> = values
            .iter()
            .enumerate()
            .map(|(i, v)| ClientSubmission {
                client_id: i,
                params: ModelParams::new(arch, v.clone()).unwrap(),
                num_samples: sizes[i],
            })
            .collect();
        let agg = dataset(&[(0, 0, -1.0), (0, 1, 1.0), (1, 0, -0.5), (1, 1, 0.7), (0, 1, 0.2), (1, 0, 0.1)], 2);
        let mut shuffled = subs.clone();
        shuffled.rotate_left(rotate % subs.len());
        for spec in [
            HeuristicSpec::fed_avg(Notion::EO),
            HeuristicSpec::fair_best(Notion::EO),
            HeuristicSpec::fair_avg(alpha, Notion::EO),
            HeuristicSpec::fair_acc_avg(alpha, Notion::AP),
        ] {
            let a = dispatch(&spec, &subs, &agg, Exec::Sequential).unwrap();
            let b = dispatch(&spec, &shuffled, &agg, Exec::Parallel).unwrap();
            prop_assert_eq!(a.params, b.params);
            prop_assert_eq!(a.chosen, b.chosen);
        }
    }
}
