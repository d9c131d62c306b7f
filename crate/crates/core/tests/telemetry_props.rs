use hqdetect::telemetry::{
    dataset_stats, generate_dataset, load_csv, train_test_split, write_csv, CsvSchema, GeneratorSpec, Normalization,
    CLASS_COUNT, FEATURE_COUNT,
};
use proptest::prelude::*;

fn spec(n: usize, seed: u64) -> GeneratorSpec {
    GeneratorSpec { n_samples: n, seed, ..Default::default() }
}

#[test]
fn every_attack_class_is_separated_from_normal() {
    let s = spec(10_000, 42);
    let stats = dataset_stats(&generate_dataset(&s).unwrap()).unwrap();
    let normal = stats.class(0).unwrap();
    for c in 1..CLASS_COUNT {
        let k = stats.class(c).unwrap();
        let best = (0..FEATURE_COUNT)
            .map(|j| {
                let se = (normal.stds[j].powi(2) / normal.count as f64 + k.stds[j].powi(2) / k.count as f64).sqrt();
                ((k.means[j] - normal.means[j]).abs(), se)
            })
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        assert!(best.0 >= s.delta / 2.0 - 5.0 * best.1, "class {c}: separation {} (se {})", best.0, best.1);
    }
}

#[test]
fn generation_is_deterministic_per_seed() {
    let a = generate_dataset(&spec(600, 7)).unwrap();
    let b = generate_dataset(&spec(600, 7)).unwrap();
    let c = generate_dataset(&spec(600, 8)).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().zip(&c).any(|(x, y)| x.record.features != y.record.features));
}

#[test]
fn master_csv_round_trips_without_normalization() {
    let data = generate_dataset(&spec(120, 3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    write_csv(std::fs::File::create(&path).unwrap(), &data).unwrap();
    let loaded = load_csv(&path, CsvSchema::Master, &Normalization::None).unwrap();
    assert_eq!(loaded.samples, data);
}

#[test]
fn split_partitions_samples() {
    let data = generate_dataset(&spec(300, 1)).unwrap();
    let (train, test) = train_test_split(&data, 0.7, 5).unwrap();
    assert_eq!((train.len(), test.len()), (210, 90));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn labels_chain_and_features_stay_in_range(
        seed in any::<u64>(),
        n in 6usize..300,
        delta in 0.0f64..0.6,
        sigma in 0.0f64..0.3,
        rho in 0.0f64..0.5,
    ) {
        let s = GeneratorSpec { n_samples: n, seed, delta, sigma, rho, ..Default::default() };
        for sample in generate_dataset(&s).unwrap() {
            prop_assert!(sample.record.features.iter().all(|v| (0.0..=1.0).contains(v)));
            if sample.attack_class != 0 {
                prop_assert_eq!((sample.l1_anomaly, sample.l2_intrusion), (1, 1));
            }
            if sample.l2_intrusion == 1 {
                prop_assert_eq!(sample.l1_anomaly, 1);
            }
        }
    }
}
