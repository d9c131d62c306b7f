//! Fully connected network with ReLU hidden layers and a softmax output,
//! trained by plain mini-batch gradient descent on cross-entropy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dataset, Classifier, MlError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub n_classes: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self { hidden: vec![32, 16], n_classes: 2, learning_rate: 0.1, epochs: 200, batch_size: 32, seed: 0 }
    }
}

/// One dense layer: `weights` is `out × in`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], biases: vec![0.0; outputs] }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.biases[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<DenseLayer>,
    pub seed: u64,
    /// Mean training cross-entropy before the first update and after each epoch.
    pub loss_history: Vec<f64>,
}

/// Gradient of the mean loss with respect to every layer's weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

const LOG_FLOOR: f64 = 1e-300;

impl MlpModel {
    /// All-zero parameters for the given layer sizes (input, hidden…, output).
    pub fn zeros(sizes: &[usize]) -> Self {
        let layers = sizes.windows(2).map(|w| DenseLayer::zeros(w[0], w[1])).collect();
        Self { layers, seed: 0, loss_history: Vec::new() }
    }

    /// He-uniform initialization.
    pub fn initialized(sizes: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = Self::zeros(sizes);
        for layer in &mut model.layers {
            let bound = (6.0 / layer.inputs.max(1) as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-bound..bound);
            }
        }
        model.seed = seed;
        model
    }

    pub fn hidden_layer_count(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }

    /// Pre-activations and activations for every layer.
    fn forward_trace(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act = vec![x.to_vec()];
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(act.last().expect("non-empty"));
            let a = if i + 1 == self.layers.len() { softmax(&z) } else { z.iter().map(|v| v.max(0.0)).collect() };
            pre.push(z);
            act.push(a);
        }
        (pre, act)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(MlError::ShapeMismatch { expected: self.input_dim(), actual: x.len() });
        }
        Ok(())
    }

    /// Backpropagate one sample, accumulating into `grad`; returns the
    /// sample's loss and the gradient of the loss with respect to the input.
    fn backprop(&self, x: &[f64], label: usize, grad: &mut MlpGradient, scale: f64) -> (f64, Vec<f64>) {
        let (pre, act) = self.forward_trace(x);
        let probs = act.last().expect("non-empty");
        let loss = -probs[label].max(LOG_FLOOR).ln();
        let mut delta: Vec<f64> = probs.clone();
        delta[label] -= 1.0;
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &act[l];
            for (o, &d) in delta.iter().enumerate().take(layer.outputs) {
                grad.biases[l][o] += scale * d;
                let row = &mut grad.weights[l][o * layer.inputs..(o + 1) * layer.inputs];
                for (g, v) in row.iter_mut().zip(input) {
                    *g += scale * d * v;
                }
            }
            let mut back = vec![0.0; layer.inputs];
            for (row, &d) in layer.weights.chunks_exact(layer.inputs).zip(&delta) {
                for (b, w) in back.iter_mut().zip(row) {
                    *b += w * d;
                }
            }
            if l > 0 {
                for (b, z) in back.iter_mut().zip(&pre[l - 1]) {
                    if *z <= 0.0 {
                        *b = 0.0;
                    }
                }
            }
            delta = back;
        }
        (loss, delta)
    }

    fn zero_gradient(&self) -> MlpGradient {
        MlpGradient {
            weights: self.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: self.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    /// Mean cross-entropy and its gradient over `(x, y)`.
    pub fn loss_and_gradient(&self, x: &[Vec<f64>], y: &[usize]) -> Result<(f64, MlpGradient)> {
        check_dataset(x, y, self.n_classes())?;
        let mut grad = self.zero_gradient();
        let scale = 1.0 / x.len() as f64;
        let mut loss = 0.0;
        for (xi, &yi) in x.iter().zip(y) {
            self.check_input(xi)?;
            loss += self.backprop(xi, yi, &mut grad, scale).0;
        }
        Ok((loss * scale, grad))
    }

    /// Mean cross-entropy over `(x, y)`.
    pub fn loss(&self, x: &[Vec<f64>], y: &[usize]) -> Result<f64> {
        check_dataset(x, y, self.n_classes())?;
        let mut total = 0.0;
        for (xi, &yi) in x.iter().zip(y) {
            total += -self.predict_proba(xi)?[yi].max(LOG_FLOOR).ln();
        }
        Ok(total / x.len() as f64)
    }

    /// `∂(−log p_label)/∂x` for one sample.
    pub fn input_gradient(&self, x: &[f64], label: usize) -> Result<Vec<f64>> {
        self.check_input(x)?;
        if label >= self.n_classes() {
            return Err(MlError::LabelOutOfRange { label, n_classes: self.n_classes() });
        }
        let mut scratch = self.zero_gradient();
        Ok(self.backprop(x, label, &mut scratch, 0.0).1)
    }

    /// Flat parameter view (weights then biases, layer by layer).
    pub fn parameters(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases).copied()).collect()
    }

    pub fn set_parameters(&mut self, values: &[f64]) {
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *w = it.next().expect("parameter vector too short");
            }
        }
    }

    fn apply_gradient(&mut self, grad: &MlpGradient, lr: f64) {
        for (l, layer) in self.layers.iter_mut().enumerate() {
            for (w, g) in layer.weights.iter_mut().zip(&grad.weights[l]) {
                *w -= lr * g;
            }
            for (b, g) in layer.biases.iter_mut().zip(&grad.biases[l]) {
                *b -= lr * g;
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        super::to_versioned_json("hqdetect-mlp", self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        super::from_versioned_json("hqdetect-mlp", text)
    }
}

impl MlpGradient {
    pub fn flatten(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.biases).flat_map(|(w, b)| w.iter().chain(b).copied()).collect()
    }
}

impl Classifier for MlpModel {
    fn n_classes(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs)
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.forward_trace(x).1.pop().expect("non-empty"))
    }
}

pub fn train_mlp(x: &[Vec<f64>], y: &[usize], cfg: &MlpConfig) -> Result<MlpModel> {
    let width = check_dataset(x, y, cfg.n_classes)?;
    if cfg.n_classes < 2 || cfg.batch_size == 0 || cfg.learning_rate.is_nan() || cfg.learning_rate <= 0.0 {
        return Err(MlError::InvalidConfig(format!("{cfg:?}")));
    }
    let mut sizes = vec![width];
    sizes.extend(&cfg.hidden);
    sizes.push(cfg.n_classes);
    let mut model = MlpModel::initialized(&sizes, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut order: Vec<usize> = (0..x.len()).collect();
    model.loss_history.push(model.loss(x, y)?);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let mut grad = model.zero_gradient();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                model.backprop(&x[i], y[i], &mut grad, scale);
            }
            model.apply_gradient(&grad, cfg.learning_rate);
        }
        model.loss_history.push(model.loss(x, y)?);
    }
    Ok(model)
}

pub fn predict_mlp(model: &MlpModel, x: &[f64]) -> Result<Vec<f64>> {
    model.predict_proba(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::argmax;

    fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = i % 2;
            let centre = if c == 0 { -1.0 } else { 1.0 };
            x.push(vec![centre + rng.random_range(-0.4..0.4), centre + rng.random_range(-0.4..0.4)]);
            y.push(c);
        }
        (x, y)
    }

    #[test]
    fn separable_blobs_are_learned() {
        let (x, y) = blobs(200, 3);
        let cfg = MlpConfig { hidden: vec![8], epochs: 50, ..Default::default() };
        let m = train_mlp(&x, &y, &cfg).unwrap();
        let correct = x.iter().zip(&y).filter(|(xi, &yi)| argmax(&m.predict_proba(xi).unwrap()) == yi).count();
        assert!(correct as f64 / 200.0 >= 0.99);
        assert!(m.loss_history.last().unwrap() <= &m.loss_history[0]);
        assert_eq!(argmax(&predict_mlp(&m, &x[0]).unwrap()), y[0]);
    }

    #[test]
    fn memorizes_single_sample() {
        let cfg = MlpConfig { hidden: vec![4], n_classes: 3, epochs: 100, batch_size: 1, ..Default::default() };
        let m = train_mlp(&[vec![0.2, 0.9]], &[2], &cfg).unwrap();
        assert_eq!(argmax(&m.predict_proba(&[0.2, 0.9]).unwrap()), 2);
    }

    #[test]
    fn deterministic_given_seed() {
        let (x, y) = blobs(40, 1);
        let cfg = MlpConfig { hidden: vec![5], epochs: 5, ..Default::default() };
        let a = train_mlp(&x, &y, &cfg).unwrap();
        let b = train_mlp(&x, &y, &cfg).unwrap();
        assert_eq!(a.parameters().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.parameters().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = MlpModel::zeros(&[3, 4, 6]);
        let p = m.predict_proba(&[0.5, -2.0, 9.0]).unwrap();
        for v in &p {
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        assert_eq!(train_mlp(&[], &[], &MlpConfig::default()), Err(MlError::EmptyDataset));
        assert!(matches!(train_mlp(&[vec![1.0], vec![1.0, 2.0]], &[0, 1], &MlpConfig::default()), Err(MlError::ShapeMismatch { .. })));
        let m = MlpModel::zeros(&[2, 2]);
        assert!(matches!(m.predict_proba(&[1.0]), Err(MlError::ShapeMismatch { .. })));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = MlpModel::initialized(&[3, 5, 2], 9);
        let back = MlpModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
