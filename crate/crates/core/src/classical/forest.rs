//! Gini CART trees on bootstrap samples, combined by hard majority vote.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_dataset, Classifier, MlError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomForestConfig {
    pub tree_count: usize,
    pub max_depth: usize,
    pub n_classes: usize,
    pub seed: u64,
}

impl Default for RandomForestConfig {
    fn default() -> Self {
        Self { tree_count: 100, max_depth: 12, n_classes: 2, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { counts: Vec<u64> },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Flat node arena; node 0 is the root. Samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf_counts(&self, x: &[f64]) -> &[u64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Majority class of the reached leaf, lowest index on ties.
    pub fn predict(&self, x: &[f64]) -> usize {
        let counts = self.leaf_counts(x);
        let mut best = 0;
        for (c, &n) in counts.iter().enumerate() {
            if n > counts[best] {
                best = c;
            }
        }
        best
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub trees: Vec<DecisionTree>,
    pub tree_count: usize,
    pub max_depth: usize,
    pub features_per_split: usize,
    pub n_classes: usize,
    pub input_dim: usize,
    pub seed: u64,
}

impl RandomForestModel {
    /// Vote counts per class.
    pub fn votes(&self, x: &[f64]) -> Result<Vec<usize>> {
        if x.len() != self.input_dim {
            return Err(MlError::ShapeMismatch { expected: self.input_dim, actual: x.len() });
        }
        let mut votes = vec![0; self.n_classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        Ok(votes)
    }

    pub fn to_json(&self) -> Result<String> {
        super::to_versioned_json("hqdetect-rf", self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        super::from_versioned_json("hqdetect-rf", text)
    }
}

impl Classifier for RandomForestModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        let votes = self.votes(x)?;
        let total = self.trees.len().max(1) as f64;
        Ok(votes.into_iter().map(|v| v as f64 / total).collect())
    }
}

fn gini(counts: &[u64], total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    max_depth: usize,
    features_per_split: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<u64> {
        let mut c = vec![0u64; self.n_classes];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    /// Best `(weighted child impurity, feature, threshold)` over `features`.
    fn best_split(&self, idx: &[usize], features: &[usize]) -> Option<(f64, usize, f64)> {
        let total = idx.len() as u64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        for &f in features {
            sorted.clear();
            sorted.extend(idx.iter().map(|&i| (self.x[i][f], self.y[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0u64; self.n_classes];
            let mut right = self.counts(idx);
            for k in 0..sorted.len() - 1 {
                left[sorted[k].1] += 1;
                right[sorted[k].1] -= 1;
                let (lo, hi) = (sorted[k].0, sorted[k + 1].0);
                if lo == hi {
                    continue;
                }
                let nl = k as u64 + 1;
                let nr = total - nl;
                let score = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / total as f64;
                let threshold = lo + (hi - lo) / 2.0;
                if best.is_none_or(|(s, _, _)| score < s) {
                    best = Some((score, f, threshold));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = self.counts(&idx);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: counts.clone() });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth {
            return id;
        }
        let d = self.x[0].len();
        let candidates = sample(rng, d, self.features_per_split.min(d)).into_vec();
        // Fall back to every feature when the drawn ones are constant on this node.
        let split = self.best_split(&idx, &candidates).or_else(|| {
            let all: Vec<usize> = (0..d).collect();
            self.best_split(&idx, &all)
        });
        let Some((_, feature, threshold)) = split else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

pub fn train_rf(x: &[Vec<f64>], y: &[usize], cfg: &RandomForestConfig) -> Result<RandomForestModel> {
    let d = check_dataset(x, y, cfg.n_classes)?;
    if cfg.tree_count == 0 || cfg.n_classes == 0 {
        return Err(MlError::InvalidConfig(format!("{cfg:?}")));
    }
    if d == 0 {
        return Err(MlError::ShapeMismatch { expected: 1, actual: 0 });
    }
    let features_per_split = (d as f64).sqrt().ceil() as usize;
    let n = x.len();
    let trees = (0..cfg.tree_count)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(cfg.seed, t);
            let boot: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut b = Builder {
                x,
                y,
                n_classes: cfg.n_classes,
                max_depth: cfg.max_depth,
                features_per_split,
                nodes: Vec::new(),
            };
            b.grow(boot, 0, &mut rng);
            DecisionTree { nodes: b.nodes }
        })
        .collect();
    Ok(RandomForestModel {
        trees,
        tree_count: cfg.tree_count,
        max_depth: cfg.max_depth,
        features_per_split,
        n_classes: cfg.n_classes,
        input_dim: d,
        seed: cfg.seed,
    })
}

/// Majority label (lowest class on ties) and the vote share per class.
pub fn predict_rf(model: &RandomForestModel, x: &[f64]) -> Result<(usize, Vec<f64>)> {
    let dist = model.predict_proba(x)?;
    Ok((super::argmax(&dist), dist))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> (Vec<Vec<f64>>, Vec<usize>) {
        let pts = [([0.0, 0.0], 0), ([0.0, 1.0], 1), ([1.0, 0.0], 1), ([1.0, 1.0], 0)];
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..25 {
            for (p, l) in pts {
                x.push(p.to_vec());
                y.push(l);
            }
        }
        (x, y)
    }

    #[test]
    fn xor_is_fit_exactly() {
        let (x, y) = xor();
        let cfg = RandomForestConfig { tree_count: 25, max_depth: 2, ..Default::default() };
        let m = train_rf(&x, &y, &cfg).unwrap();
        for (xi, &yi) in x.iter().zip(&y) {
            assert_eq!(predict_rf(&m, xi).unwrap().0, yi);
        }
    }

    #[test]
    fn constant_labels() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let y = vec![2; 20];
        let m = train_rf(&x, &y, &RandomForestConfig { tree_count: 5, n_classes: 3, ..Default::default() }).unwrap();
        let (label, dist) = predict_rf(&m, &[100.0, -3.0]).unwrap();
        assert_eq!(label, 2);
        assert_eq!(dist, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn deterministic() {
        let (x, y) = xor();
        let cfg = RandomForestConfig { tree_count: 7, seed: 11, ..Default::default() };
        assert_eq!(train_rf(&x, &y, &cfg).unwrap(), train_rf(&x, &y, &cfg).unwrap());
    }

    #[test]
    fn tie_goes_to_lowest_class() {
        let leaf = |c: usize| DecisionTree {
            nodes: vec![Node::Leaf { counts: if c == 0 { vec![3, 1] } else { vec![1, 3] } }],
        };
        let m = RandomForestModel {
            trees: vec![leaf(1), leaf(0)],
            tree_count: 2,
            max_depth: 0,
            features_per_split: 1,
            n_classes: 2,
            input_dim: 1,
            seed: 0,
        };
        assert_eq!(predict_rf(&m, &[0.0]).unwrap(), (0, vec![0.5, 0.5]));
        let tie = DecisionTree { nodes: vec![Node::Leaf { counts: vec![2, 2] }] };
        assert_eq!(tie.predict(&[0.0]), 0);
    }

    #[test]
    fn leaves_have_positive_mass() {
        let (x, y) = xor();
        let m = train_rf(&x, &y, &RandomForestConfig { tree_count: 10, ..Default::default() }).unwrap();
        for t in &m.trees {
            assert!(t.depth() <= m.max_depth);
            for n in &t.nodes {
                match n {
                    Node::Leaf { counts } => assert!(counts.iter().sum::<u64>() > 0),
                    Node::Split { threshold, .. } => assert!(threshold.is_finite()),
                }
            }
        }
    }

    #[test]
    fn shape_errors() {
        let (x, y) = xor();
        let m = train_rf(&x, &y, &RandomForestConfig { tree_count: 1, ..Default::default() }).unwrap();
        assert!(matches!(predict_rf(&m, &[1.0]), Err(MlError::ShapeMismatch { .. })));
        assert_eq!(train_rf(&[], &[], &RandomForestConfig::default()), Err(MlError::EmptyDataset));
    }
}
