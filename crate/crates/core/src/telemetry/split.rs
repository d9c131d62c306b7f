use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{LabeledSample, Result, TelemetryError};

const SPLIT_STREAM: u64 = u64::MAX - 1;

/// Seeded shuffle, then the first `round(fraction·n)` samples train.
pub fn train_test_split(
    samples: &[LabeledSample],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(TelemetryError::InvalidSpec(format!("split fraction {fraction} outside (0, 1)")));
    }
    if samples.is_empty() {
        return Err(TelemetryError::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SPLIT_STREAM);
    order.shuffle(&mut rng);
    let n_train = (fraction * samples.len() as f64).round() as usize;
    let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::{generate_dataset, GeneratorSpec};

    #[test]
    fn partitions_deterministically() {
        let data = generate_dataset(&GeneratorSpec { n_samples: 101, seed: 3, ..Default::default() }).unwrap();
        let (a, b) = train_test_split(&data, 0.7, 9).unwrap();
        assert_eq!((a.len(), b.len()), (71, 30));
        let mut ids: Vec<u64> = a.iter().chain(&b).map(|s| s.record.sample_id).collect();
        ids.sort();
        assert_eq!(ids, (0..101).collect::<Vec<_>>());
        let (a2, _) = train_test_split(&data, 0.7, 9).unwrap();
        assert_eq!(a, a2);
        assert!(train_test_split(&data, 1.0, 9).is_err());
    }
}
