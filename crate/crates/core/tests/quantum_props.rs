use std::f64::consts::PI;

use hqdetect::quantum::density::partial_trace;
use hqdetect::quantum::linalg::CMatrix;
use hqdetect::quantum::random::{random_density, random_hermitian, random_state, random_unitary};
use hqdetect::quantum::{
    apply_circuit, channel_adjoint_apply, channel_apply, product_encode, swap_trick_purity, Gate, Observable,
    ParameterizedCircuit, QuantumChannel,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tr_prod(a: &CMatrix, b: &CMatrix) -> Complex64 {
    (a * b).trace()
}

fn circuit(rng: &mut ChaCha8Rng, q: usize, layers: usize) -> ParameterizedCircuit {
    let mut c = ParameterizedCircuit::new(q);
    for _ in 0..layers {
        for k in 0..q {
            c.push(Gate::ry(k, rng.random_range(-PI..PI))).unwrap();
            c.push(Gate::rz(k, rng.random_range(-PI..PI))).unwrap();
        }
        for k in 0..q.saturating_sub(1) {
            c.push(if rng.random_bool(0.5) { Gate::cnot(k, k + 1) } else { Gate::cz(k + 1, k) }).unwrap();
        }
        if q >= 3 {
            c.push(Gate::ccx(0, 1, 2)).unwrap();
        }
    }
    c
}

fn channel(rng: &mut ChaCha8Rng, s: usize, a: usize) -> QuantumChannel {
    QuantumChannel::new(random_unitary(1 << (s + a), rng), s, a).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn circuits_preserve_norm(seed in any::<u64>(), q in 1usize..=4, layers in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = circuit(&mut rng, q, layers);
        let out = apply_circuit(&random_state(q, &mut rng), &c).unwrap();
        let norm = out.amplitudes().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn channels_are_cptp(seed in any::<u64>(), s in 1usize..=2, a in 0usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = channel(&mut rng, s, a);
        let out = channel_apply(&ch, &random_density(s, &mut rng)).unwrap();
        prop_assert!((out.matrix().trace() - 1.0).norm() < 1e-10);
        let min = out.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        prop_assert!(min >= -1e-9, "min eigenvalue {min}");
    }

    #[test]
    fn adjoint_identity(seed in any::<u64>(), s in 1usize..=2, a in 0usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = channel(&mut rng, s, a);
        let b = random_density(s, &mut rng);
        let obs = Observable::new(random_hermitian(1 << s, &mut rng), "A").unwrap();
        let lhs = tr_prod(obs.matrix(), channel_apply(&ch, &b).unwrap().matrix());
        let rhs = tr_prod(channel_adjoint_apply(&ch, &obs).unwrap().matrix(), b.matrix());
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn swap_trick_matches_purity(seed in any::<u64>(), q in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_density(q, &mut rng);
        let direct: f64 = x.matrix().iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((swap_trick_purity(&x) - direct).abs() < 1e-10);
    }

    #[test]
    fn product_encoding_is_separable(x in prop::collection::vec(0.0f64..=1.0, 1..=5)) {
        let rho = hqdetect::quantum::DensityOperator::from_state(&product_encode(&x).unwrap());
        for k in 0..x.len() {
            prop_assert!(partial_trace(&rho, &[k]).unwrap().entropy().abs() < 1e-10);
        }
    }

    #[test]
    fn composition_matches_sequential(seed in any::<u64>(), s in 1usize..=2, a1 in 0usize..=1, a2 in 0usize..=1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e1, e2) = (channel(&mut rng, s, a1), channel(&mut rng, s, a2));
        let x = random_density(s, &mut rng);
        let seq = channel_apply(&e2, &channel_apply(&e1, &x).unwrap()).unwrap();
        let joint = channel_apply(&e1.then(&e2).unwrap(), &x).unwrap();
        let diff = (seq.matrix() - joint.matrix()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-10);
    }
}
