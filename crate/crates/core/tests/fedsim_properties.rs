use fedfeed_core::fedsim::{
    aggregate, check_descent, closed_form_optimum, global_gradient, quadratic_shards,
    run_simulation, weighted_sum, ClientShard, ClientUpdate, FedConfig, ModelParams,
};
use proptest::prelude::*;

fn shard_strategy(max_clients: usize, dim: usize) -> impl Strategy<Value = Vec<ClientShard>> {
    prop::collection::vec(
        (1u64..=100, prop::collection::vec(-5.0f64..5.0, dim)),
        1..=max_clients,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (n, c))| ClientShard::quadratic(i + 1, n, c))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_training_reaches_optimum(shards in shard_strategy(16, 6)) {
        let trace = run_simulation(&shards, &FedConfig::quadratic(0.5, 200)).unwrap();
        let opt = closed_form_optimum(&shards).unwrap();
        for (w, o) in trace.final_weights.0.iter().zip(&opt.0) {
            prop_assert!((w - o).abs() <= 1e-6);
        }
        let report = check_descent(&trace, &FedConfig::quadratic(0.5, 200));
        prop_assert!(report.monotone);
        prop_assert!(report.step_condition_holds);
    }

    #[test]
    fn aggregation_ignores_arrival_order(
        shards in shard_strategy(12, 4),
        w in prop::collection::vec(-3.0f64..3.0, 4),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let w = ModelParams(w);
        let updates: Vec<ClientUpdate> = shards
            .iter()
            .map(|s| ClientUpdate {
                client_id: s.client_id,
                n_samples: s.n_samples,
                delta: s.gradient(&w).unwrap(),
            })
            .collect();
        let mut shuffled = updates.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = aggregate(&updates, &w, 0.3).unwrap();
        let b = aggregate(&shuffled, &w, 0.3).unwrap();
        prop_assert_eq!(a.0.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                        b.0.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn sample_weights_sum_to_one(ns in prop::collection::vec(1u64..10_000, 1..32)) {
        let updates: Vec<ClientUpdate> = ns
            .iter()
            .enumerate()
            .map(|(i, &n)| ClientUpdate { client_id: i + 1, n_samples: n, delta: vec![1.0] })
            .collect();
        let s = weighted_sum(&updates).unwrap();
        prop_assert!((s[0] - 1.0).abs() <= 1e-15 * ns.len() as f64);
    }

    #[test]
    fn one_round_is_a_pooled_gradient_step(shards in shard_strategy(8, 5), eta in 0.01f64..1.9) {
        let trace = run_simulation(&shards, &FedConfig::quadratic(eta, 1)).unwrap();
        // pooled data: every sample of client k is the point c_k
        let n: u64 = shards.iter().map(|s| s.n_samples).sum();
        let mut mean = [0.0; 5];
        for s in &shards {
            let fedfeed_core::fedsim::ShardData::Quadratic { center } = &s.data else { unreachable!() };
            for (m, c) in mean.iter_mut().zip(center) {
                *m += s.n_samples as f64 * c;
            }
        }
        for (w, m) in trace.final_weights.0.iter().zip(mean) {
            // w0 = 0, pooled gradient = w0 - mean
            prop_assert!((w - eta * m / n as f64).abs() <= 1e-12);
        }
        let g = global_gradient(&ModelParams::zeros(5), &shards).unwrap();
        for (gi, wi) in g.iter().zip(&trace.final_weights.0) {
            prop_assert!((wi + eta * gi).abs() <= 1e-12);
        }
    }
}

#[test]
fn seeded_shards_are_reproducible() {
    let a = quadratic_shards(4, 8, 5.0, 100, 11);
    let b = quadratic_shards(4, 8, 5.0, 100, 11);
    assert_eq!(a, b);
    let ta = run_simulation(&a, &FedConfig::quadratic(0.5, 50)).unwrap();
    let tb = run_simulation(&b, &FedConfig::quadratic(0.5, 50)).unwrap();
    assert_eq!(ta.to_jsonl(), tb.to_jsonl());
}
