#ifndef SPREADSCOPE_H
#define SPREADSCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
enum SpreadscopeStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  SPREADSCOPE_STATUS_OK = 0,
  SPREADSCOPE_STATUS_NULL_ARGUMENT = 1,
  SPREADSCOPE_STATUS_INVALID_UTF8 = 2,
  SPREADSCOPE_STATUS_IO = 3,
  SPREADSCOPE_STATUS_DATA = 4,
  SPREADSCOPE_STATUS_MODEL = 5,
  SPREADSCOPE_STATUS_SHAP = 6,
  SPREADSCOPE_STATUS_DIMENSION = 7,
  SPREADSCOPE_STATUS_PANIC = 8,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum SpreadscopeStatus SpreadscopeStatus;
#else
typedef int32_t SpreadscopeStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque dataset handle.
 */
typedef struct SpreadscopeDataset SpreadscopeDataset;

/**
 * Opaque model handle.
 */
typedef struct SpreadscopeModel SpreadscopeModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *spreadscope_last_error(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void spreadscope_string_free(char *s);

/**
 * Reads a wide yield CSV and a recession CSV and builds the spread dataset.
 *
 * # Safety
 * Paths must be NUL-terminated strings; `out` must be writable.
 */
SpreadscopeStatus spreadscope_dataset_load(const char *yields_path,
                                           const char *recession_path,
                                           struct SpreadscopeDataset **out);

/**
 * Splits a dataset into training and test windows given as `YYYY-MM`.
 *
 * # Safety
 * `ds` must be a live dataset handle; month strings NUL-terminated;
 * `train_out` and `test_out` writable.
 */
SpreadscopeStatus spreadscope_dataset_split(const struct SpreadscopeDataset *ds,
                                            const char *train_start,
                                            const char *train_end,
                                            const char *test_start,
                                            const char *test_end,
                                            struct SpreadscopeDataset **train_out,
                                            struct SpreadscopeDataset **test_out);

/**
 * Number of months in the dataset; 0 for null.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t spreadscope_dataset_rows(const struct SpreadscopeDataset *ds);

/**
 * Number of spread features; 0 for null.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t spreadscope_dataset_features(const struct SpreadscopeDataset *ds);

/**
 * Copies the row-major feature matrix into `out` (rows × features values).
 *
 * # Safety
 * `ds` must be a live dataset handle and `out` must hold `len` doubles.
 */
SpreadscopeStatus spreadscope_dataset_features_copy(const struct SpreadscopeDataset *ds,
                                                    double *out,
                                                    size_t len);

/**
 * Frees a dataset handle. Null is ignored.
 *
 * # Safety
 * `ds` must come from this library and not have been freed.
 */
void spreadscope_dataset_free(struct SpreadscopeDataset *ds);

/**
 * Fits a random forest of `n_trees` trees with default tree settings.
 *
 * # Safety
 * `ds` must be a live dataset handle; `out` writable.
 */
SpreadscopeStatus spreadscope_fit_forest(const struct SpreadscopeDataset *ds,
                                         size_t n_trees,
                                         uint64_t seed,
                                         struct SpreadscopeModel **out);

/**
 * Fits a boosted ensemble of `n_stages` stages with shrinkage `nu`.
 *
 * # Safety
 * `ds` must be a live dataset handle; `out` writable.
 */
SpreadscopeStatus spreadscope_fit_gbm(const struct SpreadscopeDataset *ds,
                                      size_t n_stages,
                                      double nu,
                                      uint64_t seed,
                                      struct SpreadscopeModel **out);

/**
 * Probability-like scores for `n_rows` row-major instances.
 *
 * # Safety
 * `x` must hold `n_rows * n_cols` doubles and `scores` `n_rows` doubles.
 */
SpreadscopeStatus spreadscope_model_predict(const struct SpreadscopeModel *model,
                                            const double *x,
                                            size_t n_rows,
                                            size_t n_cols,
                                            double *scores);

/**
 * SHAP values in the model's output unit (probability for forests,
 * log-odds for boosting): `values` receives `n_rows * n_cols` row-major
 * entries and `base_value` the expected output.
 *
 * # Safety
 * `x` and `values` must hold `n_rows * n_cols` doubles; `base_value` writable.
 */
SpreadscopeStatus spreadscope_model_shap(const struct SpreadscopeModel *model,
                                         const double *x,
                                         size_t n_rows,
                                         size_t n_cols,
                                         double *values,
                                         double *base_value);

/**
 * Number of input features the model expects; 0 for null.
 *
 * # Safety
 * `model` must be null or a live model handle.
 */
size_t spreadscope_model_features(const struct SpreadscopeModel *model);

/**
 * Serializes the model as JSON into a new string.
 *
 * # Safety
 * `model` must be a live model handle; `out` writable.
 */
SpreadscopeStatus spreadscope_model_to_json(const struct SpreadscopeModel *model, char **out);

/**
 * Parses a model from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` writable.
 */
SpreadscopeStatus spreadscope_model_from_json(const char *json, struct SpreadscopeModel **out);

/**
 * Frees a model handle. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and not have been freed.
 */
void spreadscope_model_free(struct SpreadscopeModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPREADSCOPE_H */
