//! C ABI over the spreadscope library.
//!
//! Datasets and models cross the boundary as opaque handles. Every fallible
//! call returns a [`SpreadscopeStatus`]; on failure the message is available
//! from [`spreadscope_last_error`] on the same thread until the next call.
//! Strings returned through out-parameters are freed with
//! [`spreadscope_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spreadscope::boosting::{fit_gbm, GbmConfig};
use spreadscope::data::{attach_target, compute_spreads, parse_yield_csv, temporal_split, Dataset, MonthRange};
use spreadscope::forest::{fit_forest, ForestConfig};
use spreadscope::matrix::FeatureMatrix;
use spreadscope::model::Model;
use spreadscope::shap::{shap_values, ShapAlgorithm};

/// Result code of every fallible call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpreadscopeStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Data = 4,
    Model = 5,
    Shap = 6,
    Dimension = 7,
    Panic = 8,
}

/// Opaque dataset handle.
pub struct SpreadscopeDataset(Dataset);

/// Opaque model handle.
pub struct SpreadscopeModel(Model);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(SpreadscopeStatus, String);

fn fail(status: SpreadscopeStatus, msg: impl std::fmt::Display) -> Failure {
    Failure(status, msg.to_string())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SpreadscopeStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpreadscopeStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SpreadscopeStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(SpreadscopeStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(SpreadscopeStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(SpreadscopeStatus::NullArgument, format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(fail(SpreadscopeStatus::NullArgument, format!("{name} is null")));
    }
    Ok(())
}

unsafe fn matrix_arg(x: *const f64, n_rows: usize, n_cols: usize) -> Result<FeatureMatrix, Failure> {
    if x.is_null() {
        return Err(fail(SpreadscopeStatus::NullArgument, "x is null"));
    }
    let len =
        n_rows.checked_mul(n_cols).ok_or_else(|| fail(SpreadscopeStatus::Dimension, "n_rows * n_cols overflows"))?;
    let values = std::slice::from_raw_parts(x, len).to_vec();
    FeatureMatrix::new(n_rows, n_cols, values).ok_or_else(|| fail(SpreadscopeStatus::Dimension, "bad matrix shape"))
}

fn check_cols(model: &Model, n_cols: usize) -> Result<(), Failure> {
    let expected = model.feature_names().len();
    if n_cols != expected {
        return Err(fail(SpreadscopeStatus::Dimension, format!("expected {expected} features, got {n_cols}")));
    }
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn spreadscope_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reads a wide yield CSV and a recession CSV and builds the spread dataset.
///
/// # Safety
/// Paths must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_dataset_load(
    yields_path: *const c_char,
    recession_path: *const c_char,
    out: *mut *mut SpreadscopeDataset,
) -> SpreadscopeStatus {
    guard(|| {
        out_arg(out, "out")?;
        let yields = str_arg(yields_path, "yields_path")?;
        let recession = str_arg(recession_path, "recession_path")?;
        let read = |p: &str| std::fs::read_to_string(p).map_err(|e| fail(SpreadscopeStatus::Io, format!("{p}: {e}")));
        let parsed =
            parse_yield_csv(&read(yields)?).map_err(|e| fail(SpreadscopeStatus::Data, format!("{yields}: {e}")))?;
        let ds = attach_target(compute_spreads(&parsed.panel), &read(recession)?)
            .map_err(|e| fail(SpreadscopeStatus::Data, e))?;
        *out = Box::into_raw(Box::new(SpreadscopeDataset(ds)));
        Ok(())
    })
}

/// Splits a dataset into training and test windows given as `YYYY-MM`.
///
/// # Safety
/// `ds` must be a live dataset handle; month strings NUL-terminated;
/// `train_out` and `test_out` writable.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_dataset_split(
    ds: *const SpreadscopeDataset,
    train_start: *const c_char,
    train_end: *const c_char,
    test_start: *const c_char,
    test_end: *const c_char,
    train_out: *mut *mut SpreadscopeDataset,
    test_out: *mut *mut SpreadscopeDataset,
) -> SpreadscopeStatus {
    guard(|| {
        out_arg(train_out, "train_out")?;
        out_arg(test_out, "test_out")?;
        let ds = ref_arg(ds, "ds")?;
        let month = |p: *const c_char, name: &str| -> Result<_, Failure> {
            str_arg(p, name)?.parse().map_err(|e| fail(SpreadscopeStatus::Data, format!("{name}: {e}")))
        };
        let train = MonthRange::new(month(train_start, "train_start")?, month(train_end, "train_end")?);
        let test = MonthRange::new(month(test_start, "test_start")?, month(test_end, "test_end")?);
        let (a, b) = temporal_split(&ds.0, train, test).map_err(|e| fail(SpreadscopeStatus::Data, e))?;
        *train_out = Box::into_raw(Box::new(SpreadscopeDataset(a)));
        *test_out = Box::into_raw(Box::new(SpreadscopeDataset(b)));
        Ok(())
    })
}

/// Number of months in the dataset; 0 for null.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_dataset_rows(ds: *const SpreadscopeDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// Number of spread features; 0 for null.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_dataset_features(ds: *const SpreadscopeDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_features())
}

/// Copies the row-major feature matrix into `out` (rows × features values).
///
/// # Safety
/// `ds` must be a live dataset handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_dataset_features_copy(
    ds: *const SpreadscopeDataset,
    out: *mut f64,
    len: usize,
) -> SpreadscopeStatus {
    guard(|| {
        out_arg(out, "out")?;
        let values = ref_arg(ds, "ds")?.0.features.as_slice();
        if len != values.len() {
            return Err(fail(
                SpreadscopeStatus::Dimension,
                format!("buffer holds {len} values, need {}", values.len()),
            ));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, len);
        Ok(())
    })
}

/// Frees a dataset handle. Null is ignored.
///
/// # Safety
/// `ds` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_dataset_free(ds: *mut SpreadscopeDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Fits a random forest of `n_trees` trees with default tree settings.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_fit_forest(
    ds: *const SpreadscopeDataset,
    n_trees: usize,
    seed: u64,
    out: *mut *mut SpreadscopeModel,
) -> SpreadscopeStatus {
    guard(|| {
        out_arg(out, "out")?;
        let ds = ref_arg(ds, "ds")?;
        let config = ForestConfig { n_trees, ..Default::default() };
        let model = fit_forest(&ds.0, &config, seed).map_err(|e| fail(SpreadscopeStatus::Model, e))?;
        *out = Box::into_raw(Box::new(SpreadscopeModel(Model::Forest(model))));
        Ok(())
    })
}

/// Fits a boosted ensemble of `n_stages` stages with shrinkage `nu`.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_fit_gbm(
    ds: *const SpreadscopeDataset,
    n_stages: usize,
    nu: f64,
    seed: u64,
    out: *mut *mut SpreadscopeModel,
) -> SpreadscopeStatus {
    guard(|| {
        out_arg(out, "out")?;
        let ds = ref_arg(ds, "ds")?;
        let config = GbmConfig { n_stages, nu, ..Default::default() };
        let (model, _) = fit_gbm(&ds.0, &config, seed).map_err(|e| fail(SpreadscopeStatus::Model, e))?;
        *out = Box::into_raw(Box::new(SpreadscopeModel(Model::Gbm(model))));
        Ok(())
    })
}

/// Probability-like scores for `n_rows` row-major instances.
///
/// # Safety
/// `x` must hold `n_rows * n_cols` doubles and `scores` `n_rows` doubles.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_model_predict(
    model: *const SpreadscopeModel,
    x: *const f64,
    n_rows: usize,
    n_cols: usize,
    scores: *mut f64,
) -> SpreadscopeStatus {
    guard(|| {
        out_arg(scores, "scores")?;
        let model = &ref_arg(model, "model")?.0;
        check_cols(model, n_cols)?;
        let x = matrix_arg(x, n_rows, n_cols)?;
        for (i, row) in x.rows().enumerate() {
            let p = model.predict(row, 0.5).map_err(|e| fail(SpreadscopeStatus::Model, e))?;
            *scores.add(i) = p.score;
        }
        Ok(())
    })
}

/// SHAP values in the model's output unit (probability for forests,
/// log-odds for boosting): `values` receives `n_rows * n_cols` row-major
/// entries and `base_value` the expected output.
///
/// # Safety
/// `x` and `values` must hold `n_rows * n_cols` doubles; `base_value` writable.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_model_shap(
    model: *const SpreadscopeModel,
    x: *const f64,
    n_rows: usize,
    n_cols: usize,
    values: *mut f64,
    base_value: *mut f64,
) -> SpreadscopeStatus {
    guard(|| {
        out_arg(values, "values")?;
        out_arg(base_value, "base_value")?;
        let model = &ref_arg(model, "model")?.0;
        check_cols(model, n_cols)?;
        let x = matrix_arg(x, n_rows, n_cols)?;
        let dates: Vec<_> = (0..n_rows as i64).map(spreadscope::data::Month::from_ordinal).collect();
        let s =
            shap_values(model, &x, &dates, ShapAlgorithm::LeafProduct).map_err(|e| fail(SpreadscopeStatus::Shap, e))?;
        let out = s.values.as_slice();
        ptr::copy_nonoverlapping(out.as_ptr(), values, out.len());
        *base_value = s.base_value;
        Ok(())
    })
}

/// Number of input features the model expects; 0 for null.
///
/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_model_features(model: *const SpreadscopeModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.feature_names().len())
}

/// Serializes the model as JSON into a new string.
///
/// # Safety
/// `model` must be a live model handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_model_to_json(
    model: *const SpreadscopeModel,
    out: *mut *mut c_char,
) -> SpreadscopeStatus {
    guard(|| {
        out_arg(out, "out")?;
        let json = ref_arg(model, "model")?.0.to_json();
        *out = CString::new(json).map_err(|e| fail(SpreadscopeStatus::Model, e))?.into_raw();
        Ok(())
    })
}

/// Parses a model from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_model_from_json(
    json: *const c_char,
    out: *mut *mut SpreadscopeModel,
) -> SpreadscopeStatus {
    guard(|| {
        out_arg(out, "out")?;
        let model = Model::from_json(str_arg(json, "json")?).map_err(|e| fail(SpreadscopeStatus::Model, e))?;
        *out = Box::into_raw(Box::new(SpreadscopeModel(model)));
        Ok(())
    })
}

/// Frees a model handle. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn spreadscope_model_free(model: *mut SpreadscopeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
