use serde::{Deserialize, Serialize};

use super::{assemble_pipeline, Pipeline, PipelineConfig, Result};
use crate::classical::{MlpConfig, RandomForestConfig};
use crate::hybrid::{train_hybrid, Composition, EncodingKind, HeadConfig, HybridConfig, HybridModel};
use crate::telemetry::{layer_class_count, project_layer_view, LabeledSample};

/// How one layer's model is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub encoding: EncodingKind,
    pub composition: Composition,
    pub head: HeadConfig,
    pub pqc_training: bool,
    pub seed: u64,
}

impl Default for LayerSpec {
    fn default() -> Self {
        Self {
            encoding: EncodingKind::None,
            composition: Composition::Serial,
            head: HeadConfig::Forest(RandomForestConfig::default()),
            pqc_training: false,
            seed: 0,
        }
    }
}

impl LayerSpec {
    pub fn mlp(encoding: EncodingKind, composition: Composition, cfg: MlpConfig) -> Self {
        Self { encoding, composition, head: HeadConfig::Mlp(cfg), ..Default::default() }
    }

    fn hybrid_config(&self, n_classes: usize) -> HybridConfig {
        let head = match &self.head {
            HeadConfig::Mlp(c) => HeadConfig::Mlp(MlpConfig { n_classes, seed: self.seed, ..c.clone() }),
            HeadConfig::Forest(c) => HeadConfig::Forest(RandomForestConfig { n_classes, seed: self.seed, ..c.clone() }),
        };
        HybridConfig { pqc_training: self.pqc_training, seed: self.seed, ..HybridConfig::new(self.encoding, self.composition, head) }
    }
}

/// Layer view rows and that layer's labels.
pub fn layer_dataset(samples: &[LabeledSample], layer: u8) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut x = Vec::with_capacity(samples.len());
    let mut y = Vec::with_capacity(samples.len());
    for s in samples {
        x.push(project_layer_view(&s.record, layer)?);
        y.push(s.layer_label(layer)?);
    }
    Ok((x, y))
}

/// Trains on every sample with the layer's own label, so layers 2 and 3
/// also see the records an imperfect upstream gate lets through.
pub fn train_layer(samples: &[LabeledSample], layer: u8, spec: &LayerSpec) -> Result<HybridModel> {
    let (x, y) = layer_dataset(samples, layer)?;
    Ok(train_hybrid(&x, &y, &spec.hybrid_config(layer_class_count(layer)?))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerModels {
    pub l1: HybridModel,
    pub l2: HybridModel,
    pub l3: HybridModel,
}

impl LayerModels {
    pub fn into_pipeline(self, cfg: PipelineConfig) -> Result<Pipeline> {
        assemble_pipeline(Box::new(self.l1), Box::new(self.l2), Box::new(self.l3), cfg)
    }
}

pub fn train_pipeline_models(samples: &[LabeledSample], specs: &[LayerSpec; 3]) -> Result<LayerModels> {
    Ok(LayerModels {
        l1: train_layer(samples, 1, &specs[0])?,
        l2: train_layer(samples, 2, &specs[1])?,
        l3: train_layer(samples, 3, &specs[2])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{run_pipeline, Stage};
    use crate::telemetry::{generate_dataset, GeneratorSpec};

    #[test]
    fn small_pipeline_partitions_input() {
        let data = generate_dataset(&GeneratorSpec { n_samples: 240, seed: 5, ..Default::default() }).unwrap();
        let spec = LayerSpec { head: HeadConfig::Forest(RandomForestConfig { tree_count: 10, ..Default::default() }), ..Default::default() };
        let models = train_pipeline_models(&data, &[spec.clone(), spec.clone(), spec]).unwrap();
        let p = models.into_pipeline(PipelineConfig::default()).unwrap();
        let (outcomes, summary) = run_pipeline(&p, &data).unwrap();
        assert_eq!(outcomes.len(), 240);
        assert_eq!(summary.stage_counts.iter().sum::<usize>(), 240);
        assert_eq!(summary.confusion.total(), 240);
        for o in &outcomes {
            assert_eq!(o.l3.is_some(), o.stage == Stage::L3Classified);
            if o.final_label != 0 {
                assert!(o.l3.as_ref().unwrap().confidence >= 1.0 / 6.0);
            }
        }
    }
}
