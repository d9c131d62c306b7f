use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{LayerModel, PipelineConfig, PipelineError, Result};
use crate::classical::{argmax, confusion_matrix, ConfusionMatrix};
use crate::telemetry::{project_layer_view, LabeledSample, MasterTelemetryRecord, CLASS_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "L1-clear")]
    L1Clear,
    #[serde(rename = "L1-flag")]
    L1Flag,
    #[serde(rename = "L2-clear")]
    L2Clear,
    #[serde(rename = "L3-classified")]
    L3Classified,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::L1Clear, Stage::L1Flag, Stage::L2Clear, Stage::L3Classified];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::L1Clear => "L1-clear",
            Stage::L1Flag => "L1-flag",
            Stage::L2Clear => "L2-clear",
            Stage::L3Classified => "L3-classified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Low,
    Medium,
    High,
}

const SEVERITY_MEDIUM: f64 = 0.7;
const SEVERITY_HIGH: f64 = 0.9;

/// `low` below 0.7, `medium` in `[0.7, 0.9)`, `high` from 0.9.
pub fn severity_index(p2: f64) -> Result<Severity> {
    if !(0.0..=1.0).contains(&p2) {
        return Err(PipelineError::OutOfRange(p2));
    }
    Ok(if p2 < SEVERITY_MEDIUM {
        Severity::Low
    } else if p2 < SEVERITY_HIGH {
        Severity::Medium
    } else {
        Severity::High
    })
}

/// First 8 bytes (big-endian) of SHA-256 over the little-endian feature
/// bytes, the version string and the label byte.
pub fn trace_id(record: &MasterTelemetryRecord, model_version: &str, label: u8) -> u64 {
    let mut h = Sha256::new();
    for v in &record.features {
        h.update(v.to_le_bytes());
    }
    h.update((model_version.len() as u64).to_le_bytes());
    h.update(model_version.as_bytes());
    h.update([label]);
    let digest = h.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

fn hex_id<S: serde::Serializer>(id: &u64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{id:016x}"))
}

fn parse_hex_id<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
    let text = String::deserialize(d)?;
    u64::from_str_radix(&text, 16).map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Info {
    pub flag: u8,
    pub probability: f64,
    pub timestamp: u64,
    pub slice_id: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Info {
    pub intrusion: u8,
    pub severity: Severity,
    /// Absent when the record was demoted as stale before layer 2 ran.
    pub probability: Option<f64>,
    pub stale: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L3Info {
    pub attack_class: usize,
    pub confidence: f64,
    #[serde(serialize_with = "hex_id", deserialize_with = "parse_hex_id")]
    pub trace_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub sample_id: u64,
    pub stage: Stage,
    pub l1: L1Info,
    pub l2: Option<L2Info>,
    pub l3: Option<L3Info>,
    pub final_label: usize,
}

pub struct Pipeline {
    l1: Box<dyn LayerModel>,
    l2: Box<dyn LayerModel>,
    l3: Box<dyn LayerModel>,
    cfg: PipelineConfig,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline").field("cfg", &self.cfg).finish_non_exhaustive()
    }
}

pub fn assemble_pipeline(
    l1: Box<dyn LayerModel>,
    l2: Box<dyn LayerModel>,
    l3: Box<dyn LayerModel>,
    cfg: PipelineConfig,
) -> Result<Pipeline> {
    for (layer, model, expected) in [(1u8, &l1, 2usize), (2, &l2, 2), (3, &l3, CLASS_COUNT)] {
        if model.n_classes() != expected {
            return Err(PipelineError::ArityMismatch { layer, expected, actual: model.n_classes() });
        }
    }
    for (name, value) in [("tau1", cfg.tau1), ("tau2", cfg.tau2)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(PipelineError::InvalidThreshold { name, value });
        }
    }
    Ok(Pipeline { l1, l2, l3, cfg })
}

impl Pipeline {
    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn layer(&self, layer: u8) -> Option<&dyn LayerModel> {
        match layer {
            1 => Some(self.l1.as_ref()),
            2 => Some(self.l2.as_ref()),
            3 => Some(self.l3.as_ref()),
            _ => None,
        }
    }
}

fn positive_probability(p: &[f64]) -> Result<f64> {
    let v = p.get(1).copied().ok_or(PipelineError::Model("binary head returned fewer than 2 classes".into()))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(PipelineError::OutOfRange(v));
    }
    Ok(v)
}

pub fn classify(pipeline: &Pipeline, record: &MasterTelemetryRecord) -> Result<DetectionOutcome> {
    classify_with_l2_tick(pipeline, record, record.timestamp)
}

/// As [`classify`], with layer 2 evaluated at tick `l2_tick`. A flagged
/// record whose layer-2 tick exceeds `timestamp + max_l1_to_l2_delay` is
/// demoted to `L2-clear` with the stale marker set.
pub fn classify_with_l2_tick(pipeline: &Pipeline, record: &MasterTelemetryRecord, l2_tick: u64) -> Result<DetectionOutcome> {
    let cfg = &pipeline.cfg;
    let p1 = positive_probability(&pipeline.l1.predict_proba(&project_layer_view(record, 1)?)?)?;
    let flag = u8::from(p1 >= cfg.tau1);
    let l1 = L1Info { flag, probability: p1, timestamp: record.timestamp, slice_id: record.slice_id };
    let mut outcome =
        DetectionOutcome { sample_id: record.sample_id, stage: Stage::L1Clear, l1, l2: None, l3: None, final_label: 0 };
    if flag == 0 {
        return Ok(outcome);
    }

    outcome.stage = Stage::L2Clear;
    if l2_tick > record.timestamp.saturating_add(cfg.max_l1_to_l2_delay) {
        outcome.l2 = Some(L2Info { intrusion: 0, severity: Severity::Low, probability: None, stale: true });
        return Ok(outcome);
    }
    let p2 = positive_probability(&pipeline.l2.predict_proba(&project_layer_view(record, 2)?)?)?;
    let intrusion = u8::from(p2 >= cfg.tau2);
    outcome.l2 = Some(L2Info { intrusion, severity: severity_index(p2)?, probability: Some(p2), stale: false });
    if intrusion == 0 {
        return Ok(outcome);
    }

    let p3 = pipeline.l3.predict_proba(&project_layer_view(record, 3)?)?;
    let label = argmax(&p3);
    outcome.stage = Stage::L3Classified;
    outcome.l3 = Some(L3Info {
        attack_class: label,
        confidence: p3[label],
        trace_id: trace_id(record, &cfg.model_version, label as u8),
    });
    outcome.final_label = label;
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub total: usize,
    /// Counts in `Stage::ALL` order.
    pub stage_counts: [usize; 4],
    /// Final label against the true attack class.
    pub confusion: ConfusionMatrix,
}

impl PipelineSummary {
    pub fn stage_count(&self, stage: Stage) -> usize {
        self.stage_counts[Stage::ALL.iter().position(|s| *s == stage).expect("listed")]
    }
}

/// Classify every sample (in parallel, results in input order) and summarize.
pub fn run_pipeline(pipeline: &Pipeline, samples: &[LabeledSample]) -> Result<(Vec<DetectionOutcome>, PipelineSummary)> {
    let outcomes: Vec<DetectionOutcome> = samples.par_iter().map(|s| classify(pipeline, &s.record)).collect::<Result<_>>()?;
    let mut stage_counts = [0usize; 4];
    for o in &outcomes {
        stage_counts[Stage::ALL.iter().position(|s| *s == o.stage).expect("listed")] += 1;
    }
    let truth: Vec<usize> = samples.iter().map(|s| s.attack_class).collect();
    let predicted: Vec<usize> = outcomes.iter().map(|o| o.final_label).collect();
    let confusion = confusion_matrix(&truth, &predicted, CLASS_COUNT)?;
    Ok((outcomes, PipelineSummary { total: samples.len(), stage_counts, confusion }))
}
