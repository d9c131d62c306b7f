//! Synthetic O-RAN telemetry with three layer views and six traffic classes.

mod csv_io;
mod generator;
mod split;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_io::{load_csv, write_csv, ColumnBounds, CsvSchema, LoadedDataset, Normalization};
pub use generator::{generate_dataset, GeneratorSpec, UnauthorizedAccessMode};
pub use split::train_test_split;
pub use stats::{dataset_stats, ClassStats, DatasetStats};

pub const FEATURE_COUNT: usize = 23;
pub const CLASS_COUNT: usize = 6;

/// Canonical master order. Layer views are contiguous slices of it.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "connection_request_rate",
    "connection_setup_time",
    "mobility_index",
    "paging_response_rate",
    "control_plane_entropy",
    "scheduling_anomaly_score",
    "harq_retransmission_count",
    "flow_interarrival_time",
    "packet_size_variance",
    "jitter_index",
    "radio_link_failure_rate",
    "registration_failure_rate",
    "rsrp",
    "rsrq",
    "rssi_nr",
    "throughput",
    "prb_usage",
    "port_scan_rate",
    "packet_drop_rate",
    "unauthorized_access",
    "malicious_payload_size",
    "exfil_flow_duration",
    "upload_ratio",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(usize)]
pub enum Feature {
    ConnectionRequestRate,
    ConnectionSetupTime,
    MobilityIndex,
    PagingResponseRate,
    ControlPlaneEntropy,
    SchedulingAnomalyScore,
    HarqRetransmissionCount,
    FlowInterarrivalTime,
    PacketSizeVariance,
    JitterIndex,
    RadioLinkFailureRate,
    RegistrationFailureRate,
    Rsrp,
    Rsrq,
    RssiNr,
    Throughput,
    PrbUsage,
    PortScanRate,
    PacketDropRate,
    UnauthorizedAccess,
    MaliciousPayloadSize,
    ExfilFlowDuration,
    UploadRatio,
}

impl Feature {
    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        FEATURE_NAMES[self.index()]
    }
}

/// Class-0 feature means. Every generated Normal sample is a Gaussian around these.
pub const BASELINE_MEANS: [f64; FEATURE_COUNT] = [
    0.30, 0.25, 0.30, 0.70, 0.35, 0.20, // layer 1
    0.20, 0.40, 0.30, 0.25, 0.15, 0.15, // layer 2
    0.55, 0.50, 0.50, 0.40, 0.45, 0.10, 0.10, 0.05, 0.15, 0.20, 0.30, // layer 3
];

/// Threshold subtracted in the QoS-violation indicator.
pub const QOS_THRESHOLD: f64 = 0.5;

const LAYER_RANGES: [std::ops::Range<usize>; 3] = [0..6, 6..12, 12..23];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttackClass {
    Normal = 0,
    Dos = 1,
    Spoofing = 2,
    Exfiltration = 3,
    Malware = 4,
    Reconnaissance = 5,
}

impl AttackClass {
    pub const ALL: [AttackClass; CLASS_COUNT] = [
        AttackClass::Normal,
        AttackClass::Dos,
        AttackClass::Spoofing,
        AttackClass::Exfiltration,
        AttackClass::Malware,
        AttackClass::Reconnaissance,
    ];

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AttackClass::Normal => "normal",
            AttackClass::Dos => "dos",
            AttackClass::Spoofing => "spoofing",
            AttackClass::Exfiltration => "exfiltration",
            AttackClass::Malware => "malware",
            AttackClass::Reconnaissance => "reconnaissance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterTelemetryRecord {
    pub sample_id: u64,
    pub slice_id: u32,
    pub timestamp: u64,
    pub features: [f64; FEATURE_COUNT],
}

impl MasterTelemetryRecord {
    pub fn get(&self, f: Feature) -> f64 {
        self.features[f.index()]
    }

    /// A record sitting exactly on the class-0 means.
    pub fn baseline() -> Self {
        Self { sample_id: 0, slice_id: 0, timestamp: 0, features: BASELINE_MEANS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub record: MasterTelemetryRecord,
    pub attack_class: usize,
    pub l1_anomaly: u8,
    pub l2_intrusion: u8,
}

impl LabeledSample {
    /// Label for the given layer: anomaly flag, intrusion flag, or attack class.
    pub fn layer_label(&self, layer: u8) -> Result<usize> {
        match layer {
            1 => Ok(self.l1_anomaly as usize),
            2 => Ok(self.l2_intrusion as usize),
            3 => Ok(self.attack_class),
            other => Err(TelemetryError::InvalidLayer(other)),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TelemetryError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("invalid layer {0}; expected 1, 2 or 3")]
    InvalidLayer(u8),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("row {row}: {message}")]
    ParseError { row: usize, message: String },
    #[error("file has no data rows")]
    EmptyFile,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, TelemetryError>;

/// Number of classes predicted at each layer.
pub fn layer_class_count(layer: u8) -> Result<usize> {
    match layer {
        1 | 2 => Ok(2),
        3 => Ok(CLASS_COUNT),
        other => Err(TelemetryError::InvalidLayer(other)),
    }
}

pub fn layer_feature_names(layer: u8) -> Result<&'static [&'static str]> {
    let range = LAYER_RANGES.get((layer as usize).wrapping_sub(1)).ok_or(TelemetryError::InvalidLayer(layer))?;
    Ok(&FEATURE_NAMES[range.clone()])
}

/// Features of one layer in canonical order: 6, 6 or 11 values.
pub fn project_layer_view(record: &MasterTelemetryRecord, layer: u8) -> Result<Vec<f64>> {
    let range = LAYER_RANGES.get((layer as usize).wrapping_sub(1)).ok_or(TelemetryError::InvalidLayer(layer))?;
    Ok(record.features[range.clone()].to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indicators {
    pub dos_burstiness: f64,
    pub spoofing_signal_deviation: f64,
    pub replay_timing_offset: f64,
    pub qos_violation_frequency: f64,
    pub slice_resource_deviation: f64,
}

pub fn interpretable_indicators(record: &MasterTelemetryRecord) -> Indicators {
    let dev = |f: Feature| (record.get(f) - BASELINE_MEANS[f.index()]).abs();
    Indicators {
        dos_burstiness: (dev(Feature::Throughput) + dev(Feature::PrbUsage)).clamp(0.0, 1.0),
        spoofing_signal_deviation: (dev(Feature::Rsrp) + dev(Feature::Rsrq)) / 2.0,
        replay_timing_offset: dev(Feature::FlowInterarrivalTime),
        qos_violation_frequency: (record.get(Feature::JitterIndex) + record.get(Feature::PacketDropRate)
            - QOS_THRESHOLD)
            .clamp(0.0, 1.0),
        slice_resource_deviation: dev(Feature::PrbUsage),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn views_have_documented_widths() {
        let r = MasterTelemetryRecord::baseline();
        assert_eq!(project_layer_view(&r, 1).unwrap().len(), 6);
        assert_eq!(project_layer_view(&r, 2).unwrap().len(), 6);
        assert_eq!(project_layer_view(&r, 3).unwrap().len(), 11);
        assert_eq!(project_layer_view(&r, 4), Err(TelemetryError::InvalidLayer(4)));
        assert_eq!(project_layer_view(&r, 0), Err(TelemetryError::InvalidLayer(0)));
        assert_eq!(layer_feature_names(3).unwrap()[0], "rsrp");
    }

    #[test]
    fn feature_enum_matches_names() {
        assert_eq!(Feature::UploadRatio.index(), FEATURE_COUNT - 1);
        assert_eq!(Feature::Rsrp.name(), "rsrp");
        assert_eq!(Feature::UnauthorizedAccess.name(), "unauthorized_access");
    }

    #[test]
    fn baseline_indicators_vanish() {
        let ind = interpretable_indicators(&MasterTelemetryRecord::baseline());
        assert_eq!(ind.dos_burstiness, 0.0);
        assert_eq!(ind.spoofing_signal_deviation, 0.0);
        assert_eq!(ind.replay_timing_offset, 0.0);
        assert_eq!(ind.qos_violation_frequency, 0.0);
        assert_eq!(ind.slice_resource_deviation, 0.0);
    }
}
