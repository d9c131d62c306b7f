use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{LayerModel, Pipeline, PipelineConfig, PipelineError, Result};
use crate::telemetry::{project_layer_view, LabeledSample};

pub const DEPTH_CAP: f64 = 32.0;
const LATENCY_RUNS: usize = 5;
const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeObjective {
    pub losses: [f64; 3],
    pub latencies: [f64; 3],
    pub interpretability: f64,
    pub total: f64,
}

/// `(pqc_layers + head_depth) / 32`.
pub fn depth_proxy(pqc_layers: usize, head_depth: usize) -> f64 {
    (pqc_layers + head_depth) as f64 / DEPTH_CAP
}

/// `Σ_ℓ (loss_ℓ + λ_ℓ·latency_ℓ) + λ₄·proxy`; reported only.
pub fn composite_objective(
    losses: [f64; 3],
    latencies: [f64; 3],
    interpretability: f64,
    cfg: &PipelineConfig,
) -> Result<CompositeObjective> {
    const NAMES: [&str; 3] = ["lambda1", "lambda2", "lambda3"];
    for (name, &value) in NAMES.iter().zip(&cfg.lambda_latency) {
        if value < 0.0 {
            return Err(PipelineError::NegativeWeight { name, value });
        }
    }
    if cfg.lambda_interpretability < 0.0 {
        return Err(PipelineError::NegativeWeight { name: "lambda4", value: cfg.lambda_interpretability });
    }
    let mut total = 0.0;
    for l in 0..3 {
        total += losses[l] + cfg.lambda_latency[l] * latencies[l];
    }
    total += cfg.lambda_interpretability * interpretability;
    Ok(CompositeObjective { losses, latencies, interpretability, total })
}

/// Mean cross-entropy of one layer's model against that layer's labels.
pub fn layer_loss(model: &dyn LayerModel, samples: &[LabeledSample], layer: u8) -> Result<f64> {
    if samples.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for s in samples {
        let p = model.predict_proba(&project_layer_view(&s.record, layer)?)?;
        total -= p[s.layer_label(layer)?].max(LOG_FLOOR).ln();
    }
    Ok(total / samples.len() as f64)
}

/// Median over 5 runs of the wall-clock seconds each layer needs to score every sample.
pub fn measure_latencies(pipeline: &Pipeline, samples: &[LabeledSample]) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (i, layer) in [1u8, 2, 3].into_iter().enumerate() {
        let model = pipeline.layer(layer).expect("layers 1-3 exist");
        let views = samples.iter().map(|s| project_layer_view(&s.record, layer)).collect::<std::result::Result<Vec<_>, _>>()?;
        let mut runs = Vec::with_capacity(LATENCY_RUNS);
        for _ in 0..LATENCY_RUNS {
            let start = Instant::now();
            for v in &views {
                std::hint::black_box(model.predict_proba(v)?);
            }
            runs.push(start.elapsed().as_secs_f64());
        }
        runs.sort_by(f64::total_cmp);
        out[i] = runs[LATENCY_RUNS / 2];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let cfg = PipelineConfig::default();
        let o = composite_objective([0.1, 0.2, 0.3], [1.0, 2.0, 3.0], 0.5, &cfg).unwrap();
        assert!((o.total - 0.6).abs() < 1e-15);

        let cfg = PipelineConfig { lambda_interpretability: 1.0, ..Default::default() };
        assert_eq!(composite_objective([0.0; 3], [0.0; 3], depth_proxy(4, 12), &cfg).unwrap().total, 0.5);

        let a = PipelineConfig { lambda_latency: [0.0, 1.5, 0.0], ..Default::default() };
        let b = PipelineConfig { lambda_latency: [0.0, 3.0, 0.0], ..Default::default() };
        let lat = [0.0, 0.25, 0.0];
        let ta = composite_objective([0.0; 3], lat, 0.0, &a).unwrap().total;
        let tb = composite_objective([0.0; 3], lat, 0.0, &b).unwrap().total;
        assert_eq!(tb, 2.0 * ta);

        let bad = PipelineConfig { lambda_latency: [0.0, -1.0, 0.0], ..Default::default() };
        assert!(matches!(composite_objective([0.0; 3], [0.0; 3], 0.0, &bad), Err(PipelineError::NegativeWeight { .. })));
    }
}
