use hqdetect::classical::{Classifier, MlpConfig, RandomForestConfig};
use hqdetect::hybrid::{
    build_encoder, predict_hybrid, train_hybrid, Composition, EncodingKind, HeadConfig, HybridConfig, HybridModel,
};
use hqdetect::telemetry::{dataset_stats, generate_dataset, project_layer_view, GeneratorSpec, MasterTelemetryRecord};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rf(n_classes: usize, trees: usize) -> HeadConfig {
    HeadConfig::Forest(RandomForestConfig { tree_count: trees, n_classes, ..Default::default() })
}

fn toy(d: usize, n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let label = i % 2;
        let centre = if label == 0 { 0.2 } else { 0.8 };
        x.push((0..d).map(|_| (centre + rng.random_range(-0.1..0.1f64)).clamp(0.0, 1.0)).collect());
        y.push(label);
    }
    (x, y)
}

#[test]
fn width_contract_for_every_kind() {
    let d = 11;
    let (x, y) = toy(d, 40, 1);
    for kind in EncodingKind::ALL {
        let enc = build_encoder(kind, d, 3).unwrap();
        let r = enc.output_width();
        match kind {
            EncodingKind::None => assert_eq!(r, d),
            EncodingKind::Amplitude(_) => assert_eq!(r, 2 * 4 - 1 + 1),
            _ => assert_eq!(r, 2 * 4 - 1),
        }
        for (comp, want) in [(Composition::Serial, r), (Composition::Parallel, r + d)] {
            let m = train_hybrid(&x, &y, &HybridConfig::new(kind, comp, rf(2, 3))).unwrap();
            assert_eq!(m.head.input_dim(), want, "{kind} {comp}");
            assert_eq!(m.features(&x[0]).unwrap().len(), want);
        }
    }
}

#[test]
fn amplitude_depth_grows_with_k() {
    let counts: Vec<usize> = (3..=6).map(|k| build_encoder(EncodingKind::Amplitude(k), 11, 0).unwrap().circuit.gate_count()).collect();
    assert!(counts.windows(2).all(|w| w[1] > w[0]), "{counts:?}");
}

#[test]
fn full_encoding_separates_class_prototypes() {
    let data = generate_dataset(&GeneratorSpec { n_samples: 6000, seed: 42, sigma: 0.0, rho: 0.0, ..Default::default() }).unwrap();
    let stats = dataset_stats(&data).unwrap();
    let enc = build_encoder(EncodingKind::Full, 11, 0).unwrap();
    let z: Vec<Vec<f64>> = (0..6)
        .map(|c| {
            let record = MasterTelemetryRecord { features: stats.class(c).unwrap().means, ..MasterTelemetryRecord::baseline() };
            enc.extract_features(&project_layer_view(&record, 3).unwrap()).unwrap()
        })
        .collect();
    for a in 0..6 {
        for b in a + 1..6 {
            let dist = z[a].iter().zip(&z[b]).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            assert!(dist > 1e-6, "classes {a} and {b} collide");
        }
    }
}

#[test]
fn separable_set_with_full_encoding_and_rf() {
    let (x, y) = toy(6, 200, 2);
    let m = train_hybrid(&x, &y, &HybridConfig::new(EncodingKind::Full, Composition::Serial, rf(2, 25))).unwrap();
    let correct = x.iter().zip(&y).filter(|(xi, &yi)| predict_hybrid(&m, xi).unwrap().0 == yi).count();
    assert!(correct as f64 / x.len() as f64 >= 0.99);
}

#[test]
fn models_round_trip_through_json() {
    let (x, y) = toy(5, 60, 4);
    let mlp = HeadConfig::Mlp(MlpConfig { hidden: vec![6], epochs: 5, ..Default::default() });
    for (kind, head) in [(EncodingKind::Partial, mlp), (EncodingKind::Amplitude(3), rf(2, 4))] {
        let m = train_hybrid(&x, &y, &HybridConfig::new(kind, Composition::Parallel, head)).unwrap();
        let back = HybridModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.predict_proba(&x[3]).unwrap(), m.predict_proba(&x[3]).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn readouts_are_bounded_and_pure(x in prop::collection::vec(0.0f64..=1.0, 11), k in 0usize..7, seed in any::<u64>()) {
        let enc = build_encoder(EncodingKind::ALL[k], 11, seed).unwrap();
        let z = enc.extract_features(&x).unwrap();
        prop_assert_eq!(&z, &enc.extract_features(&x).unwrap());
        if EncodingKind::ALL[k] == EncodingKind::None {
            prop_assert_eq!(&z, &x);
        }
        prop_assert!(z.iter().all(|v| v.abs() <= 1.0 + 1e-10));
    }
}
