use hqdetect::classical::forest::Node;
use hqdetect::classical::{
    confusion_matrix, metrics_from_cm, predict_rf, roc_auc, train_rf, DecisionTree, MlpModel, RandomForestConfig,
    RandomForestModel,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn mlp_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let model = MlpModel::initialized(&[5, 7, 6, 3], 21);
    let x: Vec<Vec<f64>> = (0..12).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<usize> = (0..12).map(|i| i % 3).collect();
    let (_, grad) = model.loss_and_gradient(&x, &y).unwrap();
    let analytic = grad.flatten();
    let theta = model.parameters();
    assert_eq!(analytic.len(), theta.len());
    let h = 1e-6;
    let mut probe = model.clone();
    for _ in 0..100 {
        let i = rng.random_range(0..theta.len());
        let mut t = theta.clone();
        t[i] += h;
        probe.set_parameters(&t);
        let plus = probe.loss(&x, &y).unwrap();
        t[i] -= 2.0 * h;
        probe.set_parameters(&t);
        let minus = probe.loss(&x, &y).unwrap();
        let fd = (plus - minus) / (2.0 * h);
        let rel = (fd - analytic[i]).abs() / (fd.abs() + analytic[i].abs()).max(1e-8);
        assert!(rel < 1e-5, "parameter {i}: analytic {} fd {fd} rel {rel}", analytic[i]);
    }
}

fn leaf_tree(class: usize, n_classes: usize) -> DecisionTree {
    let mut counts = vec![0; n_classes];
    counts[class] = 1;
    DecisionTree { nodes: vec![Node::Leaf { counts }] }
}

fn forest(votes: &[usize], n_classes: usize) -> RandomForestModel {
    RandomForestModel {
        trees: votes.iter().map(|&c| leaf_tree(c, n_classes)).collect(),
        tree_count: votes.len(),
        max_depth: 0,
        features_per_split: 1,
        n_classes,
        input_dim: 1,
        seed: 0,
    }
}

#[test]
fn rf_majority_survives_an_extra_tree() {
    // For each T and each split of votes with majority share > (T+1)/(2T),
    // one more tree voting for any class leaves the prediction unchanged.
    for n_classes in [2usize, 3, 6] {
        for t in 1usize..=12 {
            for winner_votes in 0..=t {
                let share = winner_votes as f64 / t as f64;
                if share <= (t + 1) as f64 / (2 * t) as f64 {
                    continue;
                }
                let winner = n_classes - 1;
                let mut votes = vec![winner; winner_votes];
                votes.extend((0..t - winner_votes).map(|i| i % (n_classes - 1)));
                let before = predict_rf(&forest(&votes, n_classes), &[0.0]).unwrap().0;
                assert_eq!(before, winner);
                for extra in 0..n_classes {
                    let mut more = votes.clone();
                    more.push(extra);
                    assert_eq!(predict_rf(&forest(&more, n_classes), &[0.0]).unwrap().0, before);
                }
            }
        }
    }
}

#[test]
fn rf_training_is_seed_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x: Vec<Vec<f64>> = (0..120).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
    let y: Vec<usize> = x.iter().map(|r| usize::from(r[0] + r[1] > 1.0)).collect();
    let cfg = RandomForestConfig { tree_count: 15, seed: 9, ..Default::default() };
    let a = train_rf(&x, &y, &cfg).unwrap();
    let b = train_rf(&x, &y, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

fn order_preserved(a: &[f64], b: &[f64]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| a[i].partial_cmp(&a[j]) == b[i].partial_cmp(&b[j])))
}

proptest! {
    #[test]
    fn metric_identities(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..200)) {
        let (t, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let cm = confusion_matrix(&t, &p, 4).unwrap();
        let r = metrics_from_cm(&cm).unwrap();
        let tp: u64 = (0..4).map(|k| cm.counts[k][k]).sum();
        let fn_: u64 = (0..4).map(|k| cm.counts[k].iter().sum::<u64>() - cm.counts[k][k]).sum();
        let micro_recall = tp as f64 / (tp + fn_) as f64;
        prop_assert_eq!(micro_recall, r.accuracy);
        let n: u64 = r.per_class.iter().map(|c| c.support).sum();
        let weighted: f64 = r.per_class.iter().map(|c| c.support as f64 * c.f1).sum::<f64>() / n as f64;
        prop_assert!((weighted - r.weighted_f1).abs() < 1e-12);
    }

    #[test]
    fn auc_invariant_under_increasing_maps(
        data in prop::collection::vec((0.0f64..1.0, 0usize..2), 2..100),
        a in 0.1f64..10.0,
        b in -5.0f64..5.0,
    ) {
        let (scores, labels): (Vec<f64>, Vec<usize>) = data.into_iter().unzip();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let base = roc_auc(&scores, &labels).unwrap();
        let affine: Vec<f64> = scores.iter().map(|s| a * s + b).collect();
        let cubed: Vec<f64> = scores.iter().map(|s| s.powi(3) + s).collect();
        let exp: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
        for mapped in [affine, cubed, exp] {
            // rounding can merge two close scores; such draws are not strictly increasing
            if order_preserved(&scores, &mapped) {
                prop_assert_eq!(roc_auc(&mapped, &labels).unwrap(), base);
            }
        }
    }
}
