use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{LabeledSample, Result, TelemetryError, FEATURE_COUNT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub count: usize,
    pub means: [f64; FEATURE_COUNT],
    /// Population standard deviations.
    pub stds: [f64; FEATURE_COUNT],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub per_class: BTreeMap<usize, ClassStats>,
}

impl DatasetStats {
    pub fn class(&self, c: usize) -> Option<&ClassStats> {
        self.per_class.get(&c)
    }
}

/// Two-pass per-class means and stds, summed in sample order.
pub fn dataset_stats(samples: &[LabeledSample]) -> Result<DatasetStats> {
    if samples.is_empty() {
        return Err(TelemetryError::EmptyDataset);
    }
    let mut groups: BTreeMap<usize, Vec<&LabeledSample>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.attack_class).or_default().push(s);
    }
    let per_class = groups
        .into_iter()
        .map(|(c, members)| {
            let n = members.len() as f64;
            let mut means = [0.0; FEATURE_COUNT];
            for s in &members {
                for (m, v) in means.iter_mut().zip(&s.record.features) {
                    *m += v;
                }
            }
            for m in &mut means {
                *m /= n;
            }
            let mut stds = [0.0; FEATURE_COUNT];
            for s in &members {
                for ((acc, v), m) in stds.iter_mut().zip(&s.record.features).zip(&means) {
                    *acc += (v - m) * (v - m);
                }
            }
            for v in &mut stds {
                *v = (*v / n).sqrt();
            }
            (c, ClassStats { count: members.len(), means, stds })
        })
        .collect();
    Ok(DatasetStats { per_class })
}
