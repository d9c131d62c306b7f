#ifndef HQDETECT_H
#define HQDETECT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call. Values 2–4 match the CLI exit codes.
 */
typedef enum HqStatus {
  HQ_STATUS_OK = 0,
  HQ_STATUS_NULL_POINTER = 1,
  HQ_STATUS_INVALID_ARGUMENT = 2,
  HQ_STATUS_DATA = 3,
  HQ_STATUS_NUMERICAL = 4,
  HQ_STATUS_PANIC = 5,
} HqStatus;

/**
 * Samples with their labels.
 */
typedef struct HqDataset HqDataset;

/**
 * A trained model bound to a pipeline layer (1, 2 or 3).
 */
typedef struct HqModel HqModel;

/**
 * Three layer models plus gating thresholds.
 */
typedef struct HqPipeline HqPipeline;

typedef struct HqMetrics {
  double accuracy;
  double macro_f1;
  double weighted_f1;
  uint64_t total;
} HqMetrics;

/**
 * Stage codes: 0 L1-clear, 2 L2-clear, 3 L3-classified.
 */
typedef struct HqOutcome {
  uint32_t stage;
  uint32_t final_label;
  double l1_probability;
  /**
   * NaN when layer 2 did not run.
   */
  double l2_probability;
  /**
   * NaN when layer 3 did not run.
   */
  double confidence;
} HqOutcome;

typedef struct HqPipelineSummary {
  uint64_t total;
  /**
   * L1-clear, L1-flag, L2-clear, L3-classified.
   */
  uint64_t stage_counts[4];
  double accuracy;
  double macro_f1;
} HqPipelineSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *hq_last_error(void);

/**
 * Generates `n` samples with default generator settings.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HqStatus hq_dataset_generate(uint64_t n, uint64_t seed, struct HqDataset **out_dataset);

/**
 * Loads a master-schema CSV. `normalize` nonzero applies min-max scaling.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be valid for writes.
 */
enum HqStatus hq_dataset_load_csv(const char *path,
                                  int32_t normalize,
                                  struct HqDataset **out_dataset);

/**
 * # Safety
 * `dataset` must be a live handle; `out_len` valid for writes.
 */
enum HqStatus hq_dataset_len(const struct HqDataset *dataset, uint64_t *out_len);

/**
 * Seeded shuffle split; the first `round(fraction * n)` samples train.
 *
 * # Safety
 * `dataset` must be a live handle; both outputs valid for writes.
 */
enum HqStatus hq_dataset_split(const struct HqDataset *dataset,
                               double fraction,
                               uint64_t seed,
                               struct HqDataset **out_train,
                               struct HqDataset **out_test);

/**
 * # Safety
 * `dataset` must be null or a handle not yet freed.
 */
void hq_dataset_free(struct HqDataset *dataset);

/**
 * Trains a layer model. `config` is optional `key = value` text in the CLI
 * config format; the first listed encoding, composition and head are used.
 *
 * # Safety
 * `dataset` must be a live handle, `config` null or nul-terminated, `out` valid for writes.
 */
enum HqStatus hq_model_train(const struct HqDataset *dataset,
                             uint8_t layer,
                             const char *config,
                             struct HqModel **out_model);

/**
 * Reads a layer model file written by the CLI or [`hq_model_save`].
 *
 * # Safety
 * `path` must be nul-terminated; `out` valid for writes.
 */
enum HqStatus hq_model_load(const char *path, struct HqModel **out_model);

/**
 * # Safety
 * `model` must be a live handle and `path` nul-terminated.
 */
enum HqStatus hq_model_save(const struct HqModel *model, const char *path);

/**
 * Layer, input width and class count of a model. Any output may be null.
 *
 * # Safety
 * `model` must be a live handle; non-null outputs valid for writes.
 */
enum HqStatus hq_model_info(const struct HqModel *model,
                            uint8_t *out_layer,
                            uint64_t *out_input_dim,
                            uint64_t *out_n_classes);

/**
 * Predicts one layer-view row of `len` values.
 *
 * # Safety
 * `x` must point to `len` readable doubles; outputs valid for writes.
 */
enum HqStatus hq_model_predict(const struct HqModel *model,
                               const double *x,
                               size_t len,
                               uint32_t *out_label,
                               double *out_confidence);

/**
 * Scores a model on every sample of `dataset` against its layer's labels.
 *
 * # Safety
 * Both handles must be live; `out_metrics` valid for writes.
 */
enum HqStatus hq_model_evaluate(const struct HqModel *model,
                                const struct HqDataset *dataset,
                                struct HqMetrics *out_metrics);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void hq_model_free(struct HqModel *model);

/**
 * Builds a pipeline from copies of three layer models; the models stay owned
 * by the caller.
 *
 * # Safety
 * All model handles must be live; `out` valid for writes.
 */
enum HqStatus hq_pipeline_new(const struct HqModel *l1,
                              const struct HqModel *l2,
                              const struct HqModel *l3,
                              double tau1,
                              double tau2,
                              struct HqPipeline **out_pipeline);

/**
 * Classifies sample `index` of `dataset`.
 *
 * # Safety
 * Handles must be live; `out_outcome` valid for writes.
 */
enum HqStatus hq_pipeline_classify(const struct HqPipeline *pipeline,
                                   const struct HqDataset *dataset,
                                   uint64_t index,
                                   struct HqOutcome *out_outcome);

/**
 * Runs every sample and reports stage counts and final-label metrics.
 *
 * # Safety
 * Handles must be live; `out_summary` valid for writes.
 */
enum HqStatus hq_pipeline_run(const struct HqPipeline *pipeline,
                              const struct HqDataset *dataset,
                              struct HqPipelineSummary *out_summary);

/**
 * # Safety
 * `pipeline` must be null or a handle not yet freed.
 */
void hq_pipeline_free(struct HqPipeline *pipeline);

/**
 * Copy counts for the SWAP-based estimator and for tomography over `len`
 * layers. `m` and `d` may be null when `len` is 0.
 *
 * # Safety
 * `m` and `d` must each point to `len` readable values; outputs valid for writes.
 */
enum HqStatus hq_resource_counts(uint64_t n_proj,
                                 const uint64_t *m,
                                 const uint64_t *d,
                                 size_t len,
                                 uint64_t *out_copies,
                                 uint64_t *out_tomography);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HQDETECT_H */
