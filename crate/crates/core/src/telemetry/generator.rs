use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    AttackClass, Feature, LabeledSample, MasterTelemetryRecord, Result, TelemetryError, BASELINE_MEANS, CLASS_COUNT,
    FEATURE_COUNT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnauthorizedAccessMode {
    /// 0/1 flag drawn with the class's access probability.
    Binary,
    /// Continuous rate: Gaussian around the class's access probability.
    Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n_samples: usize,
    pub proportions: [f64; CLASS_COUNT],
    pub seed: u64,
    pub delta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub unauthorized_access: UnauthorizedAccessMode,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            n_samples: 10_000,
            proportions: [1.0; CLASS_COUNT],
            seed: 0,
            delta: 0.3,
            sigma: 0.08,
            rho: 0.05,
            unauthorized_access: UnauthorizedAccessMode::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Shift {
    Up,
    Down,
    /// `±δ` with a fair random sign.
    Either,
    /// `±δ/2` with a fair random sign.
    EitherHalf,
}

use Feature as F;
use Shift::*;

fn class_shifts(class: AttackClass) -> &'static [(Feature, Shift)] {
    match class {
        AttackClass::Normal => &[],
        AttackClass::Dos => &[
            (F::ConnectionRequestRate, Up),
            (F::ConnectionSetupTime, Up),
            (F::SchedulingAnomalyScore, Up),
            (F::HarqRetransmissionCount, Up),
            (F::JitterIndex, Up),
            (F::Throughput, Up),
            (F::PrbUsage, Up),
        ],
        AttackClass::Spoofing => &[
            (F::MobilityIndex, Up),
            (F::PagingResponseRate, Down),
            (F::RadioLinkFailureRate, Up),
            (F::RegistrationFailureRate, Up),
            (F::Rsrp, Either),
            (F::Rsrq, Either),
        ],
        AttackClass::Exfiltration => &[
            (F::SchedulingAnomalyScore, Up),
            (F::FlowInterarrivalTime, Up),
            (F::JitterIndex, Up),
            (F::ExfilFlowDuration, Up),
            (F::UploadRatio, Up),
        ],
        AttackClass::Malware => &[
            (F::ControlPlaneEntropy, Up),
            (F::ConnectionSetupTime, Up),
            (F::PacketSizeVariance, Up),
            (F::RegistrationFailureRate, Up),
            (F::MaliciousPayloadSize, Up),
        ],
        AttackClass::Reconnaissance => &[
            (F::MobilityIndex, Up),
            (F::ControlPlaneEntropy, Up),
            (F::PacketSizeVariance, Up),
            (F::PortScanRate, Up),
            (F::PrbUsage, EitherHalf),
        ],
    }
}

/// Probability of the unauthorized-access flag per class.
fn access_probability(class: AttackClass) -> f64 {
    match class {
        AttackClass::Spoofing | AttackClass::Malware => 0.8,
        _ => BASELINE_MEANS[F::UnauthorizedAccess.index()],
    }
}

const L1_FEATURES: [Feature; 6] = [
    F::ConnectionRequestRate,
    F::ConnectionSetupTime,
    F::MobilityIndex,
    F::PagingResponseRate,
    F::ControlPlaneEntropy,
    F::SchedulingAnomalyScore,
];

const SLICE_COUNT: u32 = 3;
const TICKS_PER_SAMPLE: u64 = 10;
const SHUFFLE_STREAM: u64 = u64::MAX;

impl GeneratorSpec {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("delta", self.delta), ("sigma", self.sigma), ("rho", self.rho)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(TelemetryError::InvalidSpec(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.proportions.iter().any(|p| !p.is_finite() || *p < 0.0) || self.proportions.iter().sum::<f64>() <= 0.0 {
            return Err(TelemetryError::InvalidSpec(format!("bad class proportions {:?}", self.proportions)));
        }
        let active = self.proportions.iter().filter(|&&p| p > 0.0).count();
        if self.n_samples < active {
            return Err(TelemetryError::InvalidSpec(format!(
                "{} samples cannot cover {active} classes",
                self.n_samples
            )));
        }
        Ok(())
    }

    /// Per-class counts by largest remainder, ties to the lower class.
    pub fn class_counts(&self) -> Result<[usize; CLASS_COUNT]> {
        self.validate()?;
        let total: f64 = self.proportions.iter().sum();
        let exact: Vec<f64> = self.proportions.iter().map(|p| p / total * self.n_samples as f64).collect();
        let mut counts = [0usize; CLASS_COUNT];
        for (c, e) in counts.iter_mut().zip(&exact) {
            *c = e.floor() as usize;
        }
        let mut remaining = self.n_samples - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..CLASS_COUNT).collect();
        order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
        for &c in order.iter().cycle() {
            if remaining == 0 {
                break;
            }
            if self.proportions[c] > 0.0 {
                counts[c] += 1;
                remaining -= 1;
            }
        }
        Ok(counts)
    }
}

fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Deterministic dataset: labels are laid out by class and shuffled once;
/// sample `i` then draws all of its values from its own stream `(seed, i)`.
pub fn generate_dataset(spec: &GeneratorSpec) -> Result<Vec<LabeledSample>> {
    let counts = spec.class_counts()?;
    let mut labels: Vec<AttackClass> =
        AttackClass::ALL.iter().zip(counts).flat_map(|(&c, n)| std::iter::repeat_n(c, n)).collect();
    labels.shuffle(&mut sample_rng(spec.seed, SHUFFLE_STREAM));

    // The first round(ρ·n₀) Normal samples in index order become benign anomalies.
    let n_benign = (spec.rho * counts[0] as f64).round() as usize;
    let mut benign = vec![false; labels.len()];
    for i in labels.iter().enumerate().filter(|(_, &c)| c == AttackClass::Normal).map(|(i, _)| i).take(n_benign) {
        benign[i] = true;
    }

    Ok((0..labels.len())
        .into_par_iter()
        .map(|i| draw_sample(spec, i, labels[i], benign[i]))
        .collect())
}

fn draw_sample(spec: &GeneratorSpec, i: usize, class: AttackClass, benign_anomaly: bool) -> LabeledSample {
    let mut rng = sample_rng(spec.seed, i as u64);
    let mut features = [0.0; FEATURE_COUNT];
    for (f, mean) in features.iter_mut().zip(BASELINE_MEANS) {
        let z: f64 = rng.sample(StandardNormal);
        *f = mean + spec.sigma * z;
    }
    for &(feature, shift) in class_shifts(class) {
        let amount = match shift {
            Up => spec.delta,
            Down => -spec.delta,
            Either => sign(&mut rng) * spec.delta,
            EitherHalf => sign(&mut rng) * spec.delta / 2.0,
        };
        features[feature.index()] += amount;
    }
    let access = access_probability(class);
    let ua = F::UnauthorizedAccess.index();
    features[ua] = match spec.unauthorized_access {
        UnauthorizedAccessMode::Binary => f64::from(u8::from(rng.random_bool(access))),
        UnauthorizedAccessMode::Rate => access + spec.sigma * rng.sample::<f64, _>(StandardNormal),
    };
    if benign_anomaly {
        let f = L1_FEATURES[rng.random_range(0..L1_FEATURES.len())];
        features[f.index()] += spec.delta / 2.0;
    }
    for f in &mut features {
        *f = f.clamp(0.0, 1.0);
    }
    let slice_id = rng.random_range(0..SLICE_COUNT);
    let attack = class != AttackClass::Normal;
    LabeledSample {
        record: MasterTelemetryRecord { sample_id: i as u64, slice_id, timestamp: i as u64 * TICKS_PER_SAMPLE, features },
        attack_class: class.index(),
        l1_anomaly: u8::from(attack || benign_anomaly),
        l2_intrusion: u8::from(attack),
    }
}

fn sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random_bool(0.5) { 1.0 } else { -1.0 }
}
