use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encoder::{build_encoder, Encoder, EncodingKind};
use super::{HybridError, Result};
use crate::classical::{self, argmax, Classifier, MlpConfig, MlpModel, RandomForestConfig, RandomForestModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Composition {
    /// Head sees the quantum readout only.
    Serial,
    /// Head sees the readout concatenated with the raw features.
    Parallel,
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Composition::Serial => "serial",
            Composition::Parallel => "parallel",
        })
    }
}

impl FromStr for Composition {
    type Err = HybridError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(Composition::Serial),
            "parallel" => Ok(Composition::Parallel),
            other => Err(HybridError::UnsupportedKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HeadConfig {
    Mlp(MlpConfig),
    Forest(RandomForestConfig),
}

impl HeadConfig {
    pub fn n_classes(&self) -> usize {
        match self {
            HeadConfig::Mlp(c) => c.n_classes,
            HeadConfig::Forest(c) => c.n_classes,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HeadConfig::Mlp(_) => "mlp",
            HeadConfig::Forest(_) => "rf",
        }
    }

    fn train(&self, x: &[Vec<f64>], y: &[usize]) -> Result<Head> {
        Ok(match self {
            HeadConfig::Mlp(c) => Head::Mlp(classical::train_mlp(x, y, c)?),
            HeadConfig::Forest(c) => Head::Forest(classical::train_rf(x, y, c)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Head {
    Mlp(MlpModel),
    Forest(RandomForestModel),
}

impl Head {
    /// Hidden-layer count for an MLP, deepest tree for a forest.
    pub fn depth(&self) -> usize {
        match self {
            Head::Mlp(m) => m.hidden_layer_count(),
            Head::Forest(f) => f.trees.iter().map(|t| t.depth()).max().unwrap_or(0),
        }
    }
}

impl Classifier for Head {
    fn n_classes(&self) -> usize {
        match self {
            Head::Mlp(m) => m.n_classes(),
            Head::Forest(f) => f.n_classes(),
        }
    }

    fn input_dim(&self) -> usize {
        match self {
            Head::Mlp(m) => m.input_dim(),
            Head::Forest(f) => f.input_dim(),
        }
    }

    fn predict_proba(&self, x: &[f64]) -> classical::Result<Vec<f64>> {
        match self {
            Head::Mlp(m) => m.predict_proba(x),
            Head::Forest(f) => f.predict_proba(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    pub encoding: EncodingKind,
    pub composition: Composition,
    pub head: HeadConfig,
    /// One parameter-shift refinement pass over the circuit angles (MLP heads only).
    pub pqc_training: bool,
    pub pqc_learning_rate: f64,
    pub seed: u64,
}

impl HybridConfig {
    pub fn new(encoding: EncodingKind, composition: Composition, head: HeadConfig) -> Self {
        Self { encoding, composition, head, pqc_training: false, pqc_learning_rate: 0.1, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub encoder: Encoder,
    pub head: Head,
    pub composition: Composition,
    pub feature_dim: usize,
}

fn compose(encoder: &Encoder, composition: Composition, x: &[f64]) -> Result<Vec<f64>> {
    let mut z = encoder.extract_features(x)?;
    if composition == Composition::Parallel {
        z.extend_from_slice(x);
    }
    Ok(z)
}

/// Head inputs for every row, in row order.
pub fn composed_features(encoder: &Encoder, composition: Composition, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    x.par_iter().map(|xi| compose(encoder, composition, xi)).collect()
}

/// Head input width for a given encoder and composition.
pub fn head_width(encoder: &Encoder, composition: Composition) -> usize {
    match composition {
        Composition::Serial => encoder.output_width(),
        Composition::Parallel => encoder.output_width() + encoder.config.feature_dim,
    }
}

impl HybridModel {
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        compose(&self.encoder, self.composition, x)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(classical::to_versioned_json("hqdetect-hybrid", self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = classical::from_versioned_json("hqdetect-hybrid", text)?;
        if head_width(&model.encoder, model.composition) != model.head.input_dim() {
            return Err(HybridError::ShapeMismatch {
                expected: head_width(&model.encoder, model.composition),
                actual: model.head.input_dim(),
            });
        }
        Ok(model)
    }
}

impl Classifier for HybridModel {
    fn n_classes(&self) -> usize {
        self.head.n_classes()
    }

    fn input_dim(&self) -> usize {
        self.feature_dim
    }

    fn predict_proba(&self, x: &[f64]) -> classical::Result<Vec<f64>> {
        let f = self.features(x).map_err(|e| match e {
            HybridError::ShapeMismatch { expected, actual } => classical::MlError::ShapeMismatch { expected, actual },
            other => classical::MlError::InvalidConfig(other.to_string()),
        })?;
        self.head.predict_proba(&f)
    }
}

pub fn train_hybrid(x: &[Vec<f64>], y: &[usize], cfg: &HybridConfig) -> Result<HybridModel> {
    let d = classical::check_dataset(x, y, cfg.head.n_classes())?;
    let mut encoder = build_encoder(cfg.encoding, d, cfg.seed)?;
    let mut feats = composed_features(&encoder, cfg.composition, x)?;
    let mut head = cfg.head.train(&feats, y)?;

    if cfg.pqc_training && encoder.circuit.parameter_count() > 0 {
        if let Head::Mlp(mlp) = &head {
            let grad = circuit_gradient(&encoder, mlp, &feats, x, y)?;
            let theta: Vec<f64> =
                encoder.circuit.parameters().iter().zip(&grad).map(|(t, g)| t - cfg.pqc_learning_rate * g).collect();
            encoder.circuit.set_parameters(&theta)?;
            feats = composed_features(&encoder, cfg.composition, x)?;
            head = cfg.head.train(&feats, y)?;
        }
    }
    debug_assert_eq!(head.input_dim(), head_width(&encoder, cfg.composition));
    Ok(HybridModel { encoder, head, composition: cfg.composition, feature_dim: d })
}

/// Mean cross-entropy gradient with respect to the circuit angles, chained
/// through the head's input gradient and the parameter-shift Jacobian.
fn circuit_gradient(encoder: &Encoder, mlp: &MlpModel, feats: &[Vec<f64>], x: &[Vec<f64>], y: &[usize]) -> Result<Vec<f64>> {
    let per_sample: Vec<Vec<f64>> = (0..x.len())
        .into_par_iter()
        .map(|i| {
            let dl_df = mlp.input_gradient(&feats[i], y[i])?;
            let jac = encoder.feature_jacobian(&x[i])?;
            Ok(jac.iter().map(|row| row.iter().zip(&dl_df).map(|(a, b)| a * b).sum()).collect())
        })
        .collect::<Result<_>>()?;
    let n = x.len() as f64;
    let mut grad = vec![0.0; encoder.circuit.parameter_count()];
    for g in &per_sample {
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc += v / n;
        }
    }
    Ok(grad)
}

/// Head label and its probability (softmax maximum or vote share).
pub fn predict_hybrid(model: &HybridModel, x: &[f64]) -> Result<(usize, f64)> {
    let p = model.predict_proba(x)?;
    let label = argmax(&p);
    Ok((label, p[label]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..60 {
            let c = i % 2;
            let base = if c == 0 { 0.15 } else { 0.85 };
            let jitter = (i as f64 * 0.37).sin() * 0.1;
            x.push(vec![base + jitter, base - jitter, 0.5, base]);
            y.push(c);
        }
        (x, y)
    }

    #[test]
    fn widths_follow_composition() {
        let (x, y) = separable();
        let rf = HeadConfig::Forest(RandomForestConfig { tree_count: 5, ..Default::default() });
        for kind in EncodingKind::ALL {
            let s = train_hybrid(&x, &y, &HybridConfig::new(kind, Composition::Serial, rf.clone())).unwrap();
            assert_eq!(s.head.input_dim(), s.encoder.output_width());
            let p = train_hybrid(&x, &y, &HybridConfig::new(kind, Composition::Parallel, rf.clone())).unwrap();
            assert_eq!(p.head.input_dim(), p.encoder.output_width() + 4);
        }
    }

    #[test]
    fn full_rf_fits_separable_set() {
        let (x, y) = separable();
        let cfg = HybridConfig::new(
            EncodingKind::Full,
            Composition::Serial,
            HeadConfig::Forest(RandomForestConfig { tree_count: 25, ..Default::default() }),
        );
        let m = train_hybrid(&x, &y, &cfg).unwrap();
        let correct = x.iter().zip(&y).filter(|(xi, &yi)| predict_hybrid(&m, xi).unwrap().0 == yi).count();
        assert!(correct as f64 / x.len() as f64 >= 0.99);
    }

    #[test]
    fn uniform_mlp_confidence() {
        let encoder = build_encoder(EncodingKind::None, 3, 0).unwrap();
        let m = HybridModel {
            encoder,
            head: Head::Mlp(MlpModel::zeros(&[3, 4, 6])),
            composition: Composition::Serial,
            feature_dim: 3,
        };
        let (label, conf) = predict_hybrid(&m, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(label, 0);
        assert!((conf - 1.0 / 6.0).abs() < 1e-12);
        assert!(matches!(predict_hybrid(&m, &[0.1]), Err(HybridError::Ml(_))));
    }

    #[test]
    fn pqc_refinement_runs_and_round_trips() {
        let (x, y) = separable();
        let mut cfg = HybridConfig::new(
            EncodingKind::Partial,
            Composition::Serial,
            HeadConfig::Mlp(MlpConfig { hidden: vec![6], epochs: 20, ..Default::default() }),
        );
        cfg.pqc_training = true;
        let refined = train_hybrid(&x, &y, &cfg).unwrap();
        cfg.pqc_training = false;
        let frozen = train_hybrid(&x, &y, &cfg).unwrap();
        assert_ne!(refined.encoder.circuit.parameters(), frozen.encoder.circuit.parameters());
        let back = HybridModel::from_json(&refined.to_json().unwrap()).unwrap();
        assert_eq!(back, refined);
    }
}
