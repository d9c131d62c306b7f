use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    layer_feature_names, LabeledSample, MasterTelemetryRecord, Result, TelemetryError, CLASS_COUNT, FEATURE_COUNT,
    FEATURE_NAMES,
};

/// Column layout accepted by [`load_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CsvSchema {
    /// All 23 features plus `attack_class`.
    Master,
    /// One layer's features plus `attack_class`; the other features load as 0.
    Layer(u8),
    /// The six layer-1 features plus a binary `anomaly` column.
    AnomalyBinary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Normalization {
    /// Per-file min-max over each feature column; constant columns become 0.
    MinMax,
    /// Reuse previously recorded bounds (values outside are clipped).
    Fixed(Vec<ColumnBounds>),
    /// Keep values, clipped to `[0, 1]`.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnBounds {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadedDataset {
    pub samples: Vec<LabeledSample>,
    pub schema: CsvSchema,
    pub bounds: Vec<ColumnBounds>,
}

impl CsvSchema {
    pub fn feature_columns(self) -> Result<Vec<&'static str>> {
        match self {
            CsvSchema::Master => Ok(FEATURE_NAMES.to_vec()),
            CsvSchema::Layer(l) => Ok(layer_feature_names(l)?.to_vec()),
            CsvSchema::AnomalyBinary => Ok(layer_feature_names(1)?.to_vec()),
        }
    }

    fn label_column(self) -> &'static str {
        match self {
            CsvSchema::AnomalyBinary => "anomaly",
            _ => "attack_class",
        }
    }
}

struct RawRow {
    line: usize,
    values: Vec<f64>,
    label: usize,
    l1: Option<u8>,
    l2: Option<u8>,
    slice_id: Option<u32>,
    timestamp: Option<u64>,
    sample_id: Option<u64>,
}

fn parse_err(line: usize, message: impl Into<String>) -> TelemetryError {
    TelemetryError::ParseError { row: line, message: message.into() }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, col: Option<usize>, name: &str, line: usize) -> Result<Option<T>> {
    let Some(i) = col else { return Ok(None) };
    let text = rec.get(i).ok_or_else(|| parse_err(line, format!("missing value for {name}")))?;
    if text.is_empty() {
        return Ok(None);
    }
    text.parse().map(Some).map_err(|_| parse_err(line, format!("cannot parse {name} = {text:?}")))
}

fn flag(v: Option<u64>, name: &str, line: usize) -> Result<Option<u8>> {
    match v {
        None => Ok(None),
        Some(b @ (0 | 1)) => Ok(Some(b as u8)),
        Some(other) => Err(parse_err(line, format!("{name} must be 0 or 1, got {other}"))),
    }
}

pub fn load_csv(path: &Path, schema: CsvSchema, normalization: &Normalization) -> Result<LoadedDataset> {
    let file = std::fs::File::open(path).map_err(|e| TelemetryError::Io(format!("{}: {e}", path.display())))?;
    read_csv(file, schema, normalization)
}

pub(crate) fn read_csv<R: Read>(reader: R, schema: CsvSchema, normalization: &Normalization) -> Result<LoadedDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| TelemetryError::Io(e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let require = |name: &str| find(name).ok_or_else(|| TelemetryError::MissingColumn(name.to_string()));

    let feature_names = schema.feature_columns()?;
    let feature_cols = feature_names.iter().map(|n| require(n)).collect::<Result<Vec<_>>>()?;
    let label_col = require(schema.label_column())?;
    let (l1_col, l2_col) = (find("l1_anomaly"), find("l2_intrusion"));
    let (slice_col, ts_col, id_col) = (find("slice_id"), find("timestamp"), find("sample_id"));
    let n_labels = if schema == CsvSchema::AnomalyBinary { 2 } else { CLASS_COUNT };

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let values = feature_cols
            .iter()
            .zip(&feature_names)
            .map(|(&c, name)| {
                let v: f64 = field(&rec, Some(c), name, line)?.ok_or_else(|| parse_err(line, format!("empty {name}")))?;
                if v.is_finite() { Ok(v) } else { Err(parse_err(line, format!("non-finite {name}"))) }
            })
            .collect::<Result<Vec<_>>>()?;
        let label: usize = field(&rec, Some(label_col), schema.label_column(), line)?
            .ok_or_else(|| parse_err(line, "empty label"))?;
        if label >= n_labels {
            return Err(parse_err(line, format!("label {label} outside 0..{n_labels}")));
        }
        rows.push(RawRow {
            line,
            values,
            label,
            l1: flag(field(&rec, l1_col, "l1_anomaly", line)?, "l1_anomaly", line)?,
            l2: flag(field(&rec, l2_col, "l2_intrusion", line)?, "l2_intrusion", line)?,
            slice_id: field(&rec, slice_col, "slice_id", line)?,
            timestamp: field(&rec, ts_col, "timestamp", line)?,
            sample_id: field(&rec, id_col, "sample_id", line)?,
        });
    }
    if rows.is_empty() {
        return Err(TelemetryError::EmptyFile);
    }

    let bounds: Vec<ColumnBounds> = match normalization {
        Normalization::Fixed(b) => {
            for name in &feature_names {
                if !b.iter().any(|c| c.name == *name) {
                    return Err(TelemetryError::MissingColumn(format!("bounds for {name}")));
                }
            }
            feature_names.iter().map(|n| b.iter().find(|c| c.name == *n).expect("checked").clone()).collect()
        }
        _ => feature_names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let (min, max) = rows
                    .iter()
                    .map(|r| r.values[j])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                ColumnBounds { name: name.to_string(), min, max }
            })
            .collect(),
    };

    let master_index: Vec<usize> =
        feature_names.iter().map(|n| FEATURE_NAMES.iter().position(|m| m == n).expect("known feature")).collect();
    let samples = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut features = [0.0; FEATURE_COUNT];
            for (j, &v) in r.values.iter().enumerate() {
                let b = &bounds[j];
                features[master_index[j]] = match normalization {
                    Normalization::None => v.clamp(0.0, 1.0),
                    _ if b.max > b.min => ((v - b.min) / (b.max - b.min)).clamp(0.0, 1.0),
                    _ => 0.0,
                };
            }
            let (attack_class, default_l1) = match schema {
                CsvSchema::AnomalyBinary => (0, r.label as u8),
                _ => (r.label, u8::from(r.label != 0)),
            };
            let l2 = r.l2.unwrap_or(u8::from(attack_class != 0));
            let l1 = r.l1.unwrap_or(default_l1.max(l2));
            if (attack_class != 0 && (l1 == 0 || l2 == 0)) || (l2 == 1 && l1 == 0) {
                return Err(parse_err(r.line, "inconsistent layer labels"));
            }
            Ok(LabeledSample {
                record: MasterTelemetryRecord {
                    sample_id: r.sample_id.unwrap_or(i as u64),
                    slice_id: r.slice_id.unwrap_or(0),
                    timestamp: r.timestamp.unwrap_or(i as u64),
                    features,
                },
                attack_class,
                l1_anomaly: l1,
                l2_intrusion: l2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedDataset { samples, schema, bounds })
}

/// Master-schema CSV with every metadata and label column.
pub fn write_csv<W: Write>(writer: W, samples: &[LabeledSample]) -> Result<()> {
    let io = |e: csv::Error| TelemetryError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["sample_id", "slice_id", "timestamp"];
    header.extend(FEATURE_NAMES);
    header.extend(["attack_class", "l1_anomaly", "l2_intrusion"]);
    w.write_record(&header).map_err(io)?;
    for s in samples {
        let r = &s.record;
        let mut row = vec![r.sample_id.to_string(), r.slice_id.to_string(), r.timestamp.to_string()];
        row.extend(r.features.iter().map(|v| v.to_string()));
        row.extend([s.attack_class.to_string(), s.l1_anomaly.to_string(), s.l2_intrusion.to_string()]);
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| TelemetryError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer1_csv(rows: &[&str]) -> String {
        let mut s = String::from(
            "connection_request_rate,connection_setup_time,mobility_index,paging_response_rate,control_plane_entropy,scheduling_anomaly_score,anomaly\n",
        );
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    #[test]
    fn three_rows_load() {
        let text = layer1_csv(&["1,2,3,4,5,6,0", "2,2,4,4,6,6,1", "3,2,5,4,7,6,1"]);
        let d = read_csv(text.as_bytes(), CsvSchema::AnomalyBinary, &Normalization::MinMax).unwrap();
        assert_eq!(d.samples.len(), 3);
        assert_eq!(d.samples[1].record.features[0], 0.5);
        // constant column
        assert!(d.samples.iter().all(|s| s.record.features[1] == 0.0));
        assert_eq!(d.samples[2].l1_anomaly, 1);
        assert_eq!(d.samples[2].l2_intrusion, 0);
        assert_eq!(d.bounds[0], ColumnBounds { name: "connection_request_rate".into(), min: 1.0, max: 3.0 });
    }

    #[test]
    fn missing_column_is_named() {
        let text = "connection_request_rate,anomaly\n1,0\n";
        assert_eq!(
            read_csv(text.as_bytes(), CsvSchema::AnomalyBinary, &Normalization::MinMax),
            Err(TelemetryError::MissingColumn("connection_setup_time".into()))
        );
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = layer1_csv(&["1,2,3,4,5,6,0", "1,x,3,4,5,6,0"]);
        assert!(matches!(
            read_csv(text.as_bytes(), CsvSchema::AnomalyBinary, &Normalization::MinMax),
            Err(TelemetryError::ParseError { row: 3, .. })
        ));
        let text = layer1_csv(&["1,2,3,4,5,6,7"]);
        assert!(matches!(
            read_csv(text.as_bytes(), CsvSchema::AnomalyBinary, &Normalization::MinMax),
            Err(TelemetryError::ParseError { row: 2, .. })
        ));
        assert_eq!(
            read_csv(layer1_csv(&[]).as_bytes(), CsvSchema::AnomalyBinary, &Normalization::MinMax),
            Err(TelemetryError::EmptyFile)
        );
    }

    #[test]
    fn crlf_is_accepted() {
        let text = layer1_csv(&["1,2,3,4,5,6,0", "2,2,4,4,6,6,1"]).replace('\n', "\r\n");
        assert_eq!(read_csv(text.as_bytes(), CsvSchema::AnomalyBinary, &Normalization::MinMax).unwrap().samples.len(), 2);
    }

    #[test]
    fn master_round_trip_without_normalization() {
        let spec = crate::telemetry::GeneratorSpec { n_samples: 30, ..Default::default() };
        let data = crate::telemetry::generate_dataset(&spec).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &data).unwrap();
        let back = read_csv(buf.as_slice(), CsvSchema::Master, &Normalization::None).unwrap();
        assert_eq!(back.samples, data);
    }

    #[test]
    fn layer_schema_zero_fills_other_features() {
        let mut buf = Vec::new();
        let spec = crate::telemetry::GeneratorSpec { n_samples: 12, ..Default::default() };
        write_csv(&mut buf, &crate::telemetry::generate_dataset(&spec).unwrap()).unwrap();
        let d = read_csv(buf.as_slice(), CsvSchema::Layer(3), &Normalization::MinMax).unwrap();
        assert!(d.samples.iter().all(|s| s.record.features[..12].iter().all(|&v| v == 0.0)));
        assert_eq!(d.bounds.len(), 11);
    }
}
