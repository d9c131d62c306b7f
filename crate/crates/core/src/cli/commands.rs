use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{DataSource, ExperimentConfig, HeadKind};
use super::{Cli, CliError, Command, CommonArgs, ExportArgs, PipelineArgs, ResourceArgs};
use crate::classical::{
    argmax, confusion_matrix, from_versioned_json, metrics_from_cm, roc_auc, to_versioned_json, Classifier, MlError,
};
use crate::hybrid::{build_encoder, Composition, EncodingKind, HybridModel};
use crate::pipeline::{
    assemble_pipeline, composite_objective, depth_proxy, layer_dataset, layer_loss, measure_latencies, run_pipeline,
    train_layer, Stage,
};
use crate::quantum::resource_counts;
use crate::telemetry::{
    generate_dataset, layer_class_count, layer_feature_names, load_csv, project_layer_view, train_test_split, write_csv,
    AttackClass, LabeledSample, TelemetryError,
};

pub const METRICS_SCHEMA: &str = include_str!("../../schemas/metrics.schema.json");
pub const LAYER_MODEL_FORMAT: &str = "hqdetect-layer-model";
const LATENCY_RUNS: usize = 5;

/// A trained hybrid model tagged with the layer it serves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerModelFile {
    pub layer: u8,
    pub model: HybridModel,
}

impl LayerModelFile {
    pub fn to_json(&self) -> Result<String, MlError> {
        to_versioned_json(LAYER_MODEL_FORMAT, self)
    }

    pub fn from_json(text: &str) -> Result<Self, MlError> {
        from_versioned_json(LAYER_MODEL_FORMAT, text)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| CliError::io(path, e))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => gen(&args),
        Command::TrainEval(args) => train_eval(&args),
        Command::Pipeline(args) => pipeline(&args),
        Command::ExportLatent(args) => export_latent(&args),
        Command::Resources(args) => resources(&args),
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    write(path, text)
}

fn run_dir(cfg: &ExperimentConfig, sub: Option<&str>) -> Result<PathBuf, CliError> {
    let base = cfg.out.join(cfg.run_id());
    let dir = match sub {
        Some(s) => base.join(s),
        None => base.clone(),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    write(&base.join("config.txt"), cfg.canonical())?;
    Ok(dir)
}

fn load_samples(cfg: &ExperimentConfig) -> Result<Vec<LabeledSample>, TelemetryError> {
    Ok(match &cfg.source {
        DataSource::Generate(spec) => generate_dataset(spec)?,
        DataSource::Csv { path, schema, normalization } => load_csv(path, *schema, normalization)?.samples,
    })
}

fn load_data(cfg: &ExperimentConfig) -> Result<Vec<LabeledSample>, CliError> {
    Ok(load_samples(cfg)?)
}

fn split(cfg: &ExperimentConfig, data: &[LabeledSample]) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>), CliError> {
    let (train, test) = train_test_split(data, cfg.split, cfg.split_seed)?;
    if train.is_empty() || test.is_empty() {
        return Err(CliError::Data(format!(
            "split {} of {} samples leaves an empty side ({} train, {} test)",
            cfg.split,
            data.len(),
            train.len(),
            test.len()
        )));
    }
    Ok((train, test))
}

fn gen(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = args.raw_config()?.resolve()?;
    if !matches!(cfg.source, DataSource::Generate(_)) {
        return Err(CliError::Config("gen needs source = generate".into()));
    }
    let data = load_data(&cfg)?;
    let path = run_dir(&cfg, None)?.join("dataset.csv");
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    write_csv(std::io::BufWriter::new(file), &data)?;
    println!("{}", path.display());
    let counts: Vec<String> = AttackClass::ALL
        .iter()
        .map(|c| format!("{} {}", c.name(), data.iter().filter(|s| s.attack_class == c.index()).count()))
        .collect();
    println!("{} samples: {}", data.len(), counts.join(", "));
    Ok(())
}

/// Median over 5 runs of seconds per sample.
fn per_sample_latency(model: &HybridModel, x: &[Vec<f64>]) -> Result<f64, CliError> {
    let mut runs = Vec::with_capacity(LATENCY_RUNS);
    for _ in 0..LATENCY_RUNS {
        let start = Instant::now();
        for v in x {
            std::hint::black_box(model.predict_proba(v)?);
        }
        runs.push(start.elapsed().as_secs_f64() / x.len() as f64);
    }
    runs.sort_by(f64::total_cmp);
    Ok(runs[LATENCY_RUNS / 2])
}

fn interpretability(model: &HybridModel) -> f64 {
    depth_proxy(model.encoder.config.pqc_layers, model.head.depth())
}

fn cell_name(layer: u8, encoding: EncodingKind, composition: Composition, head: HeadKind) -> String {
    format!("l{layer}-{encoding}-{composition}-{}", head.as_str())
}

fn train_eval(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = args.raw_config()?.resolve()?;
    let data = load_data(&cfg)?;
    let (train, test) = split(&cfg, &data)?;
    let dir = run_dir(&cfg, None)?;
    let run_id = cfg.run_id();
    let schema: Value = serde_json::from_str(METRICS_SCHEMA).expect("embedded schema is JSON");
    let validator = jsonschema::validator_for(&schema).expect("embedded schema compiles");

    let mut cells = Vec::new();
    for &layer in &cfg.layers {
        let n_classes = layer_class_count(layer)?;
        let (x_test, y_test) = layer_dataset(&test, layer)?;
        for &encoding in &cfg.encodings {
            for &composition in &cfg.compositions {
                for &head in &cfg.heads {
                    let cell = cell_name(layer, encoding, composition, head);
                    let start = Instant::now();
                    let model = train_layer(&train, layer, &cfg.layer_spec(encoding, composition, head))?;
                    let train_secs = start.elapsed().as_secs_f64();

                    let probs = x_test.par_iter().map(|x| model.predict_proba(x)).collect::<Result<Vec<_>, _>>()?;
                    let predicted: Vec<usize> = probs.iter().map(|p| argmax(p)).collect();
                    let cm = confusion_matrix(&y_test, &predicted, n_classes)?;
                    let report = metrics_from_cm(&cm)?;
                    let auc = if n_classes == 2 {
                        let scores: Vec<f64> = probs.iter().map(|p| p[1]).collect();
                        match roc_auc(&scores, &y_test) {
                            Ok(a) => Some(a),
                            Err(MlError::DegenerateLabels) => None,
                            Err(e) => return Err(e.into()),
                        }
                    } else {
                        None
                    };
                    let loss = layer_loss(&model, &test, layer)?;
                    let interp = interpretability(&model);
                    let per_class: Vec<Value> = report
                        .per_class
                        .iter()
                        .enumerate()
                        .map(|(k, c)| {
                            json!({"class": k, "precision": c.precision, "recall": c.recall, "f1": c.f1,
                                   "support": c.support, "zero_division": c.zero_division})
                        })
                        .collect();
                    let metrics = json!({
                        "schema_version": 1,
                        "run_id": run_id,
                        "cell": cell,
                        "layer": layer,
                        "encoding": encoding.to_string(),
                        "composition": composition.to_string(),
                        "head": head.as_str(),
                        "n_train": train.len(),
                        "n_test": test.len(),
                        "n_classes": n_classes,
                        "accuracy": report.accuracy,
                        "macro_f1": report.macro_f1,
                        "weighted_f1": report.weighted_f1,
                        "per_class": per_class,
                        "confusion": cm.counts,
                        "auc": auc,
                        "loss": loss,
                        "interpretability": interp,
                    });
                    if let Some(err) = validator.iter_errors(&metrics).next() {
                        return Err(CliError::Numerical(format!("{cell}: metrics fail schema: {err}")));
                    }

                    let latency = per_sample_latency(&model, &x_test)?;
                    let lambda = cfg.pipeline.lambda_latency[usize::from(layer) - 1];
                    let timing = json!({
                        "cell": cell,
                        "train_seconds": train_secs,
                        "latency_seconds_per_sample": latency,
                        "objective_term": loss + lambda * latency + cfg.pipeline.lambda_interpretability * interp,
                    });

                    let cell_dir = dir.join(&cell);
                    fs::create_dir_all(&cell_dir).map_err(|e| CliError::io(&cell_dir, e))?;
                    write_json(&cell_dir.join("metrics.json"), &metrics)?;
                    write_json(&cell_dir.join("timing.json"), &timing)?;
                    write(&cell_dir.join("confusion.csv"), cm.to_csv())?;
                    let file = LayerModelFile { layer, model };
                    write(&cell_dir.join("model.json"), file.to_json()?)?;

                    eprintln!("{cell}: accuracy {:.4} macro-F1 {:.4}", report.accuracy, report.macro_f1);
                    cells.push(json!({
                        "cell": cell,
                        "accuracy": report.accuracy,
                        "macro_f1": report.macro_f1,
                        "weighted_f1": report.weighted_f1,
                        "auc": auc,
                    }));
                }
            }
        }
    }
    write_json(&dir.join("summary.json"), &json!({ "run_id": run_id, "cells": cells }))?;
    println!("{}", dir.display());
    Ok(())
}

fn pipeline(args: &PipelineArgs) -> Result<(), CliError> {
    let mut raw = args.common.raw_config()?;
    for (key, value) in [
        ("l1_model", &args.l1_model),
        ("l2_model", &args.l2_model),
        ("l3_model", &args.l3_model),
        ("tau1", &args.tau1),
        ("tau2", &args.tau2),
    ] {
        if let Some(v) = value {
            raw.set(key, v)?;
        }
    }
    let cfg = raw.resolve()?;
    let data = load_data(&cfg)?;
    let (train, test) = split(&cfg, &data)?;
    let dir = run_dir(&cfg, Some("pipeline"))?;

    let given = cfg.models.iter().filter(|m| m.is_some()).count();
    let models: Vec<HybridModel> = match given {
        3 => cfg
            .models
            .iter()
            .zip(1u8..)
            .map(|(path, layer)| {
                let path = path.as_ref().expect("all three given");
                let file = LayerModelFile::load(path)?;
                if file.layer != layer {
                    return Err(CliError::Data(format!("{}: model is for layer {}, not {layer}", path.display(), file.layer)));
                }
                Ok(file.model)
            })
            .collect::<Result<_, _>>()?,
        0 => {
            let spec = cfg.layer_spec(cfg.encodings[0], cfg.compositions[0], cfg.heads[0]);
            let mut out = Vec::with_capacity(3);
            for layer in 1u8..=3 {
                let model = train_layer(&train, layer, &spec)?;
                let file = LayerModelFile { layer, model };
                write(&dir.join(format!("l{layer}.model.json")), file.to_json()?)?;
                out.push(file.model);
            }
            out
        }
        _ => return Err(CliError::Config("give all three of l1_model, l2_model, l3_model or none".into())),
    };
    let interp = interpretability(&models[2]);
    let mut it = models.into_iter();
    let (l1, l2, l3) = (it.next().expect("3"), it.next().expect("3"), it.next().expect("3"));
    let p = assemble_pipeline(Box::new(l1), Box::new(l2), Box::new(l3), cfg.pipeline.clone())?;

    let (outcomes, summary) = run_pipeline(&p, &test)?;
    let mut lines = String::new();
    for o in &outcomes {
        lines.push_str(&serde_json::to_string(o).map_err(|e| CliError::Numerical(e.to_string()))?);
        lines.push('\n');
    }
    write(&dir.join("outcomes.jsonl"), lines)?;

    let report = metrics_from_cm(&summary.confusion)?;
    let stages: serde_json::Map<String, Value> =
        Stage::ALL.iter().map(|s| (s.as_str().to_string(), json!(summary.stage_count(*s)))).collect();
    write_json(
        &dir.join("summary.json"),
        &json!({
            "run_id": cfg.run_id(),
            "total": summary.total,
            "stages": stages,
            "accuracy": report.accuracy,
            "macro_f1": report.macro_f1,
            "confusion": summary.confusion.counts,
        }),
    )?;

    let mut losses = [0.0; 3];
    for (i, layer) in (1u8..=3).enumerate() {
        losses[i] = layer_loss(p.layer(layer).expect("layers 1-3 exist"), &test, layer)?;
    }
    let latencies = measure_latencies(&p, &test)?.map(|t| t / test.len() as f64);
    let objective = composite_objective(losses, latencies, interp, &cfg.pipeline)?;
    write_json(
        &dir.join("timing.json"),
        &serde_json::to_value(&objective).map_err(|e| CliError::Numerical(e.to_string()))?,
    )?;
    eprintln!("pipeline: accuracy {:.4} macro-F1 {:.4}", report.accuracy, report.macro_f1);
    println!("{}", dir.display());
    Ok(())
}

fn export_latent(args: &ExportArgs) -> Result<(), CliError> {
    let cfg = args.common.raw_config()?.resolve()?;
    let data = match load_samples(&cfg) {
        Err(TelemetryError::EmptyFile) => Vec::new(),
        other => other?,
    };
    let (layer, encoder) = match &args.model {
        Some(path) => {
            let file = LayerModelFile::load(path)?;
            (file.layer, file.model.encoder)
        }
        None => {
            let layer = cfg.layers[0];
            (layer, build_encoder(cfg.encodings[0], layer_feature_names(layer)?.len(), cfg.seed)?)
        }
    };
    let views = data.iter().map(|s| project_layer_view(&s.record, layer)).collect::<Result<Vec<_>, _>>()?;
    let z = views.par_iter().map(|x| encoder.extract_features(x)).collect::<Result<Vec<_>, _>>()?;

    let path = match &args.to {
        Some(p) => p.clone(),
        None => run_dir(&cfg, None)?.join(format!("latent-l{layer}-{}.csv", encoder.config.kind)),
    };
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
    let mut header: Vec<String> = (1..=encoder.output_width()).map(|j| format!("z_{j}")).collect();
    header.push("attack_class".into());
    w.write_record(&header).map_err(|e| CliError::io(&path, e))?;
    for (row, s) in z.iter().zip(&data) {
        let mut fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        fields.push(s.attack_class.to_string());
        w.write_record(&fields).map_err(|e| CliError::io(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    println!("{}", path.display());
    Ok(())
}

fn resources(args: &ResourceArgs) -> Result<(), CliError> {
    if args.m.len() != args.d.len() {
        return Err(CliError::Config(format!("--m has {} entries, --d has {}", args.m.len(), args.d.len())));
    }
    let est = resource_counts(args.n_proj, &args.m, &args.d)?;
    let value = json!({
        "n_copies": est.n_copies,
        "n_tomography": est.n_tomography,
        "n_proj": est.n_proj,
        "m_list": est.m_list,
        "d_list": est.d_list,
        "ratio": est.ratio(),
    });
    println!("{}", serde_json::to_string_pretty(&value).expect("plain JSON"));
    Ok(())
}
