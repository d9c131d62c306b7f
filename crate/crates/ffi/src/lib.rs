//! C ABI over `hqdetect`.
//!
//! Every function returns an [`HqStatus`]. On failure the calling thread's
//! message is available from [`hq_last_error`] until the next call. Handles
//! are opaque; free each one with its `_free` function. Panics are caught at
//! the boundary and reported as `HQ_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use hqdetect::classical::{argmax, confusion_matrix, metrics_from_cm, Classifier};
use hqdetect::cli::{CliError, HeadKind, LayerModelFile, RawConfig};
use hqdetect::hybrid::predict_hybrid;
use hqdetect::pipeline::{assemble_pipeline, classify, run_pipeline, train_layer, Pipeline, PipelineConfig, Stage};
use hqdetect::quantum::resource_counts;
use hqdetect::telemetry::{
    generate_dataset, layer_class_count, load_csv, project_layer_view, train_test_split, CsvSchema, GeneratorSpec,
    LabeledSample, Normalization,
};

/// Result code of every call. Values 2–4 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Data = 3,
    Numerical = 4,
    Panic = 5,
}

/// Samples with their labels.
pub struct HqDataset {
    samples: Vec<LabeledSample>,
}

/// A trained model bound to a pipeline layer (1, 2 or 3).
pub struct HqModel {
    file: LayerModelFile,
}

/// Three layer models plus gating thresholds.
pub struct HqPipeline {
    inner: Pipeline,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HqMetrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub total: u64,
}

/// Stage codes: 0 L1-clear, 2 L2-clear, 3 L3-classified.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HqOutcome {
    pub stage: u32,
    pub final_label: u32,
    pub l1_probability: f64,
    /// NaN when layer 2 did not run.
    pub l2_probability: f64,
    /// NaN when layer 3 did not run.
    pub confidence: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HqPipelineSummary {
    pub total: u64,
    /// L1-clear, L1-flag, L2-clear, L3-classified.
    pub stage_counts: [u64; 4],
    pub accuracy: f64,
    pub macro_f1: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Cli(CliError),
}

impl<E: Into<CliError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Cli(e.into())
    }
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HqStatus {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HqStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("{name} is null"));
            HqStatus::NullPointer
        }
        Ok(Err(Failure::Cli(e))) => {
            let status = match e {
                CliError::Config(_) => HqStatus::InvalidArgument,
                CliError::Data(_) => HqStatus::Data,
                CliError::Numerical(_) => HqStatus::Numerical,
            };
            set_error(e.to_string());
            status
        }
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {text}"));
            HqStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(ptr: *const T, name: &'static str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or(Failure::Null(name))
}

unsafe fn out<'a, T>(ptr: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or(Failure::Null(name))
}

unsafe fn text<'a>(ptr: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    let s = borrow(ptr, name)?;
    CStr::from_ptr(s).to_str().map_err(|_| Failure::Cli(CliError::Config(format!("{name} is not UTF-8"))))
}

fn emit<T>(slot: &mut *mut T, value: T) {
    *slot = Box::into_raw(Box::new(value));
}

unsafe fn release<T>(ptr: *mut T) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn hq_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Generates `n` samples with default generator settings.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_dataset_generate(n: u64, seed: u64, out_dataset: *mut *mut HqDataset) -> HqStatus {
    guard(|| {
        let slot = out(out_dataset, "out_dataset")?;
        let spec = GeneratorSpec { n_samples: n as usize, seed, ..Default::default() };
        emit(slot, HqDataset { samples: generate_dataset(&spec)? });
        Ok(())
    })
}

/// Loads a master-schema CSV. `normalize` nonzero applies min-max scaling.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_dataset_load_csv(path: *const c_char, normalize: i32, out_dataset: *mut *mut HqDataset) -> HqStatus {
    guard(|| {
        let path = PathBuf::from(text(path, "path")?);
        let slot = out(out_dataset, "out_dataset")?;
        let norm = if normalize != 0 { Normalization::MinMax } else { Normalization::None };
        emit(slot, HqDataset { samples: load_csv(&path, CsvSchema::Master, &norm)?.samples });
        Ok(())
    })
}

/// # Safety
/// `dataset` must be a live handle; `out_len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_dataset_len(dataset: *const HqDataset, out_len: *mut u64) -> HqStatus {
    guard(|| {
        *out(out_len, "out_len")? = borrow(dataset, "dataset")?.samples.len() as u64;
        Ok(())
    })
}

/// Seeded shuffle split; the first `round(fraction * n)` samples train.
///
/// # Safety
/// `dataset` must be a live handle; both outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_dataset_split(
    dataset: *const HqDataset,
    fraction: f64,
    seed: u64,
    out_train: *mut *mut HqDataset,
    out_test: *mut *mut HqDataset,
) -> HqStatus {
    guard(|| {
        let ds = borrow(dataset, "dataset")?;
        let train_slot = out(out_train, "out_train")?;
        let test_slot = out(out_test, "out_test")?;
        let (train, test) = train_test_split(&ds.samples, fraction, seed)?;
        emit(train_slot, HqDataset { samples: train });
        emit(test_slot, HqDataset { samples: test });
        Ok(())
    })
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hq_dataset_free(dataset: *mut HqDataset) {
    release(dataset)
}

/// Trains a layer model. `config` is optional `key = value` text in the CLI
/// config format; the first listed encoding, composition and head are used.
///
/// # Safety
/// `dataset` must be a live handle, `config` null or nul-terminated, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_model_train(
    dataset: *const HqDataset,
    layer: u8,
    config: *const c_char,
    out_model: *mut *mut HqModel,
) -> HqStatus {
    guard(|| {
        let ds = borrow(dataset, "dataset")?;
        let slot = out(out_model, "out_model")?;
        let raw = if config.is_null() { RawConfig::default() } else { RawConfig::parse(text(config, "config")?)? };
        let cfg = raw.resolve()?;
        layer_class_count(layer)?;
        let head = cfg.heads.first().copied().unwrap_or(HeadKind::Rf);
        let spec = cfg.layer_spec(cfg.encodings[0], cfg.compositions[0], head);
        let model = train_layer(&ds.samples, layer, &spec)?;
        emit(slot, HqModel { file: LayerModelFile { layer, model } });
        Ok(())
    })
}

/// Reads a layer model file written by the CLI or [`hq_model_save`].
///
/// # Safety
/// `path` must be nul-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_model_load(path: *const c_char, out_model: *mut *mut HqModel) -> HqStatus {
    guard(|| {
        let path = PathBuf::from(text(path, "path")?);
        let slot = out(out_model, "out_model")?;
        emit(slot, HqModel { file: LayerModelFile::load(&path)? });
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn hq_model_save(model: *const HqModel, path: *const c_char) -> HqStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        let path = PathBuf::from(text(path, "path")?);
        let json = m.file.to_json()?;
        std::fs::write(&path, json).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Ok(())
    })
}

/// Layer, input width and class count of a model. Any output may be null.
///
/// # Safety
/// `model` must be a live handle; non-null outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_model_info(
    model: *const HqModel,
    out_layer: *mut u8,
    out_input_dim: *mut u64,
    out_n_classes: *mut u64,
) -> HqStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        if let Some(v) = out_layer.as_mut() {
            *v = m.file.layer;
        }
        if let Some(v) = out_input_dim.as_mut() {
            *v = m.file.model.feature_dim as u64;
        }
        if let Some(v) = out_n_classes.as_mut() {
            *v = m.file.model.n_classes() as u64;
        }
        Ok(())
    })
}

/// Predicts one layer-view row of `len` values.
///
/// # Safety
/// `x` must point to `len` readable doubles; outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_model_predict(
    model: *const HqModel,
    x: *const f64,
    len: usize,
    out_label: *mut u32,
    out_confidence: *mut f64,
) -> HqStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        let x = std::slice::from_raw_parts(borrow(x, "x")?, len);
        let label_slot = out(out_label, "out_label")?;
        let conf_slot = out(out_confidence, "out_confidence")?;
        let (label, conf) = predict_hybrid(&m.file.model, x)?;
        *label_slot = label as u32;
        *conf_slot = conf;
        Ok(())
    })
}

/// Scores a model on every sample of `dataset` against its layer's labels.
///
/// # Safety
/// Both handles must be live; `out_metrics` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_model_evaluate(model: *const HqModel, dataset: *const HqDataset, out_metrics: *mut HqMetrics) -> HqStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        let ds = borrow(dataset, "dataset")?;
        let slot = out(out_metrics, "out_metrics")?;
        let layer = m.file.layer;
        let mut truth = Vec::with_capacity(ds.samples.len());
        let mut predicted = Vec::with_capacity(ds.samples.len());
        for s in &ds.samples {
            let p = m.file.model.predict_proba(&project_layer_view(&s.record, layer)?)?;
            truth.push(s.layer_label(layer)?);
            predicted.push(argmax(&p));
        }
        let report = metrics_from_cm(&confusion_matrix(&truth, &predicted, m.file.model.n_classes())?)?;
        *slot = HqMetrics {
            accuracy: report.accuracy,
            macro_f1: report.macro_f1,
            weighted_f1: report.weighted_f1,
            total: report.total,
        };
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hq_model_free(model: *mut HqModel) {
    release(model)
}

/// Builds a pipeline from copies of three layer models; the models stay owned
/// by the caller.
///
/// # Safety
/// All model handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_pipeline_new(
    l1: *const HqModel,
    l2: *const HqModel,
    l3: *const HqModel,
    tau1: f64,
    tau2: f64,
    out_pipeline: *mut *mut HqPipeline,
) -> HqStatus {
    guard(|| {
        let models = [borrow(l1, "l1")?, borrow(l2, "l2")?, borrow(l3, "l3")?];
        let slot = out(out_pipeline, "out_pipeline")?;
        for (expected, m) in (1u8..).zip(models) {
            if m.file.layer != expected {
                return Err(CliError::Data(format!("l{expected} model was trained for layer {}", m.file.layer)).into());
            }
        }
        let cfg = PipelineConfig { tau1, tau2, ..Default::default() };
        let [a, b, c] = models.map(|m| Box::new(m.file.model.clone()));
        emit(slot, HqPipeline { inner: assemble_pipeline(a, b, c, cfg)? });
        Ok(())
    })
}

fn stage_code(stage: Stage) -> u32 {
    Stage::ALL.iter().position(|s| *s == stage).expect("listed") as u32
}

/// Classifies sample `index` of `dataset`.
///
/// # Safety
/// Handles must be live; `out_outcome` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_pipeline_classify(
    pipeline: *const HqPipeline,
    dataset: *const HqDataset,
    index: u64,
    out_outcome: *mut HqOutcome,
) -> HqStatus {
    guard(|| {
        let p = borrow(pipeline, "pipeline")?;
        let ds = borrow(dataset, "dataset")?;
        let slot = out(out_outcome, "out_outcome")?;
        let sample = ds
            .samples
            .get(index as usize)
            .ok_or_else(|| CliError::Config(format!("index {index} out of range for {} samples", ds.samples.len())))?;
        let o = classify(&p.inner, &sample.record)?;
        *slot = HqOutcome {
            stage: stage_code(o.stage),
            final_label: o.final_label as u32,
            l1_probability: o.l1.probability,
            l2_probability: o.l2.and_then(|l2| l2.probability).unwrap_or(f64::NAN),
            confidence: o.l3.map_or(f64::NAN, |l3| l3.confidence),
        };
        Ok(())
    })
}

/// Runs every sample and reports stage counts and final-label metrics.
///
/// # Safety
/// Handles must be live; `out_summary` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_pipeline_run(
    pipeline: *const HqPipeline,
    dataset: *const HqDataset,
    out_summary: *mut HqPipelineSummary,
) -> HqStatus {
    guard(|| {
        let p = borrow(pipeline, "pipeline")?;
        let ds = borrow(dataset, "dataset")?;
        let slot = out(out_summary, "out_summary")?;
        let (_, summary) = run_pipeline(&p.inner, &ds.samples)?;
        let report = metrics_from_cm(&summary.confusion)?;
        *slot = HqPipelineSummary {
            total: summary.total as u64,
            stage_counts: summary.stage_counts.map(|c| c as u64),
            accuracy: report.accuracy,
            macro_f1: report.macro_f1,
        };
        Ok(())
    })
}

/// # Safety
/// `pipeline` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hq_pipeline_free(pipeline: *mut HqPipeline) {
    release(pipeline)
}

/// Copy counts for the SWAP-based estimator and for tomography over `len`
/// layers. `m` and `d` may be null when `len` is 0.
///
/// # Safety
/// `m` and `d` must each point to `len` readable values; outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hq_resource_counts(
    n_proj: u64,
    m: *const u64,
    d: *const u64,
    len: usize,
    out_copies: *mut u64,
    out_tomography: *mut u64,
) -> HqStatus {
    guard(|| {
        let (m, d) = if len == 0 {
            (&[][..], &[][..])
        } else {
            (std::slice::from_raw_parts(borrow(m, "m")?, len), std::slice::from_raw_parts(borrow(d, "d")?, len))
        };
        let copies = out(out_copies, "out_copies")?;
        let tomo = out(out_tomography, "out_tomography")?;
        let est = resource_counts(n_proj, m, d)?;
        *copies = est.n_copies;
        *tomo = est.n_tomography;
        Ok(())
    })
}
