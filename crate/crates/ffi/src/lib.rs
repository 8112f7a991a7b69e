//! C ABI for the elastic-sparse library.
//!
//! Datasets and sparse path matrices travel as opaque handles created and
//! released by the `es_*_free` functions; raw series are borrowed
//! `(pointer, length)` buffers. Every fallible call returns an
//! [`EsStatus`]; outputs are written through non-null out-pointers only
//! on `ES_STATUS_OK`.

use std::ffi::{c_char, CStr};
use std::path::PathBuf;
use std::ptr;

use elastic_sparse::dense::{self, BandConfig, KernelConfig, LocalCost};
use elastic_sparse::grid::{self, GridError, SparsifyConfig};
use elastic_sparse::measures::{self, MeasureError};
use elastic_sparse::series::{Dataset, Delimiter, SeriesError, TimeSeries};
use elastic_sparse::sparse;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    DegenerateSeries = 4,
    IoError = 5,
    FormatError = 6,
    /// The sparse matrix admits no path to the terminal cell.
    Unreachable = 7,
    InsufficientData = 8,
    Internal = 9,
}

/// Local cost selector for the DTW family.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsLocalCost {
    SquaredDifference = 0,
    AbsoluteDifference = 1,
}

impl From<EsLocalCost> for LocalCost {
    fn from(c: EsLocalCost) -> Self {
        match c {
            EsLocalCost::SquaredDifference => LocalCost::SquaredDifference,
            EsLocalCost::AbsoluteDifference => LocalCost::AbsoluteDifference,
        }
    }
}

/// Opaque labeled dataset handle.
pub struct EsDataset {
    inner: Dataset,
}

/// Opaque sparse path matrix handle.
pub struct EsPathMatrix {
    inner: grid::SparsePathMatrix,
}

fn status_of_series(e: &SeriesError) -> EsStatus {
    match e {
        SeriesError::Io(_) => EsStatus::IoError,
        SeriesError::DegenerateSeries => EsStatus::DegenerateSeries,
        SeriesError::Empty(_) => EsStatus::InvalidArgument,
        SeriesError::NonFinite { .. } => EsStatus::InvalidArgument,
        SeriesError::TooShort { .. } => EsStatus::InvalidArgument,
        SeriesError::Ragged { .. } | SeriesError::Parse { .. } => EsStatus::FormatError,
    }
}

fn status_of_measure(e: &MeasureError) -> EsStatus {
    match e {
        MeasureError::DimensionMismatch { .. } => EsStatus::DimensionMismatch,
        MeasureError::DegenerateSeries => EsStatus::DegenerateSeries,
        MeasureError::InvalidParameter(_) => EsStatus::InvalidArgument,
        MeasureError::LagOutOfRange { .. } => EsStatus::InvalidArgument,
    }
}

fn status_of_grid(e: &GridError) -> EsStatus {
    match e {
        GridError::Io(_) => EsStatus::IoError,
        GridError::Format { .. } => EsStatus::FormatError,
        GridError::InsufficientData { .. } => EsStatus::InsufficientData,
        GridError::EmptyGrid => EsStatus::InsufficientData,
        GridError::OverThreshold { .. } => EsStatus::InvalidArgument,
        GridError::DimensionMismatch { .. } => EsStatus::DimensionMismatch,
        GridError::Measure(m) => status_of_measure(m),
    }
}

/// Static human-readable description of a status code.
#[no_mangle]
pub extern "C" fn es_status_message(status: EsStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        EsStatus::Ok => b"ok\0",
        EsStatus::NullPointer => b"null pointer argument\0",
        EsStatus::InvalidArgument => b"invalid argument\0",
        EsStatus::DimensionMismatch => b"dimension mismatch\0",
        EsStatus::DegenerateSeries => b"constant series (zero variance)\0",
        EsStatus::IoError => b"i/o error\0",
        EsStatus::FormatError => b"file format error\0",
        EsStatus::Unreachable => b"terminal cell unreachable in sparse matrix\0",
        EsStatus::InsufficientData => b"insufficient data\0",
        EsStatus::Internal => b"internal error\0",
    };
    msg.as_ptr().cast()
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn es_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn path_from(ptr: *const c_char) -> Result<PathBuf, EsStatus> {
    if ptr.is_null() {
        return Err(EsStatus::NullPointer);
    }
    let s = unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| EsStatus::InvalidArgument)?;
    Ok(PathBuf::from(s))
}

unsafe fn series_from(values: *const f64, len: usize) -> Result<TimeSeries, EsStatus> {
    if values.is_null() {
        return Err(EsStatus::NullPointer);
    }
    let slice = unsafe { std::slice::from_raw_parts(values, len) };
    TimeSeries::new(slice.to_vec()).map_err(|e| status_of_series(&e))
}

/// Loads a UCR-format text file (tab or comma delimited, auto-detected).
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid
/// pointer; the returned handle must be released with
/// [`es_dataset_free`].
#[no_mangle]
pub unsafe extern "C" fn es_dataset_load(
    path: *const c_char,
    out: *mut *mut EsDataset,
) -> EsStatus {
    if out.is_null() {
        return EsStatus::NullPointer;
    }
    let path = match unsafe { path_from(path) } {
        Ok(p) => p,
        Err(s) => return s,
    };
    match elastic_sparse::series::load_ucr(&path, Delimiter::Auto) {
        Ok(ds) => {
            unsafe { *out = Box::into_raw(Box::new(EsDataset { inner: ds })) };
            EsStatus::Ok
        }
        Err(e) => status_of_series(&e),
    }
}

/// Number of series, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle from [`es_dataset_load`].
#[no_mangle]
pub unsafe extern "C" fn es_dataset_len(ds: *const EsDataset) -> usize {
    unsafe { ds.as_ref() }.map_or(0, |d| d.inner.len())
}

/// Common series length T, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle from [`es_dataset_load`].
#[no_mangle]
pub unsafe extern "C" fn es_dataset_series_len(ds: *const EsDataset) -> usize {
    unsafe { ds.as_ref() }.map_or(0, |d| d.inner.series_len())
}

/// Class label of series `index`.
///
/// # Safety
/// `ds` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn es_dataset_label(
    ds: *const EsDataset,
    index: usize,
    out: *mut i64,
) -> EsStatus {
    let Some(d) = (unsafe { ds.as_ref() }) else {
        return EsStatus::NullPointer;
    };
    if out.is_null() {
        return EsStatus::NullPointer;
    }
    if index >= d.inner.len() {
        return EsStatus::InvalidArgument;
    }
    match d.inner.get(index).label() {
        Some(l) => {
            unsafe { *out = l };
            EsStatus::Ok
        }
        None => EsStatus::InvalidArgument,
    }
}

/// Copies series `index` into `buffer` (capacity `len`, which must equal
/// the series length).
///
/// # Safety
/// `ds` must be a live handle; `buffer` must point to at least `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn es_dataset_values(
    ds: *const EsDataset,
    index: usize,
    buffer: *mut f64,
    len: usize,
) -> EsStatus {
    let Some(d) = (unsafe { ds.as_ref() }) else {
        return EsStatus::NullPointer;
    };
    if buffer.is_null() {
        return EsStatus::NullPointer;
    }
    if index >= d.inner.len() || len != d.inner.series_len() {
        return EsStatus::InvalidArgument;
    }
    let src = d.inner.get(index).values();
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buffer, len) };
    EsStatus::Ok
}

/// Releases a dataset handle. Null is ignored.
///
/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn es_dataset_free(ds: *mut EsDataset) {
    if !ds.is_null() {
        drop(unsafe { Box::from_raw(ds) });
    }
}

/// Learns a sparse path matrix from all pairwise optimal alignments of
/// `train`, thresholded at `theta` and weighted by occupancy^(−gamma).
///
/// # Safety
/// `train` must be a live dataset handle and `out` a valid pointer; the
/// returned handle must be released with [`es_spm_free`].
#[no_mangle]
pub unsafe extern "C" fn es_spm_learn(
    train: *const EsDataset,
    cost: EsLocalCost,
    theta: u64,
    gamma: f64,
    out: *mut *mut EsPathMatrix,
) -> EsStatus {
    let Some(d) = (unsafe { train.as_ref() }) else {
        return EsStatus::NullPointer;
    };
    if out.is_null() {
        return EsStatus::NullPointer;
    }
    let cfg = match SparsifyConfig::new(theta, gamma) {
        Ok(c) => c,
        Err(e) => return status_of_grid(&e),
    };
    let counts = match grid::accumulate_paths(&d.inner, cost.into()) {
        Ok(g) => g,
        Err(e) => return status_of_grid(&e),
    };
    let p = match grid::normalize_grid(&counts) {
        Ok(p) => p,
        Err(e) => return status_of_grid(&e),
    };
    match grid::sparsify(&counts, &p, cfg) {
        Ok(m) => {
            unsafe { *out = Box::into_raw(Box::new(EsPathMatrix { inner: m })) };
            EsStatus::Ok
        }
        Err(e) => status_of_grid(&e),
    }
}

/// Reads a matrix from an SPM text file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid
/// pointer; release the handle with [`es_spm_free`].
#[no_mangle]
pub unsafe extern "C" fn es_spm_load(path: *const c_char, out: *mut *mut EsPathMatrix) -> EsStatus {
    if out.is_null() {
        return EsStatus::NullPointer;
    }
    let path = match unsafe { path_from(path) } {
        Ok(p) => p,
        Err(s) => return s,
    };
    match grid::read_spm(&path) {
        Ok(m) => {
            unsafe { *out = Box::into_raw(Box::new(EsPathMatrix { inner: m })) };
            EsStatus::Ok
        }
        Err(e) => status_of_grid(&e),
    }
}

/// Writes a matrix to an SPM text file.
///
/// # Safety
/// `m` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn es_spm_save(m: *const EsPathMatrix, path: *const c_char) -> EsStatus {
    let Some(m) = (unsafe { m.as_ref() }) else {
        return EsStatus::NullPointer;
    };
    let path = match unsafe { path_from(path) } {
        Ok(p) => p,
        Err(s) => return s,
    };
    match grid::write_spm(&m.inner, &path) {
        Ok(()) => EsStatus::Ok,
        Err(e) => status_of_grid(&e),
    }
}

/// Number of entries, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_spm_len(m: *const EsPathMatrix) -> usize {
    unsafe { m.as_ref() }.map_or(0, |m| m.inner.len())
}

/// Grid dimension T, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_spm_dim(m: *const EsPathMatrix) -> usize {
    unsafe { m.as_ref() }.map_or(0, |m| m.inner.t())
}

/// Releases a matrix handle. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn es_spm_free(m: *mut EsPathMatrix) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Euclidean distance between two equal-length series.
///
/// # Safety
/// `x` and `y` must point to `x_len` / `y_len` readable doubles; `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn es_euclidean(
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
    out: *mut f64,
) -> EsStatus {
    if out.is_null() {
        return EsStatus::NullPointer;
    }
    let (sx, sy) = match (unsafe { series_from(x, x_len) }, unsafe {
        series_from(y, y_len)
    }) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match measures::euclidean(&sx, &sy) {
        Ok(v) => {
            unsafe { *out = v };
            EsStatus::Ok
        }
        Err(e) => status_of_measure(&e),
    }
}

/// Dynamic time warping over the full grid.
///
/// # Safety
/// Buffer arguments as in [`es_euclidean`]; `out_value` must be valid
/// and `out_visited` may be null.
#[no_mangle]
pub unsafe extern "C" fn es_dtw(
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
    cost: EsLocalCost,
    out_value: *mut f64,
    out_visited: *mut u64,
) -> EsStatus {
    if out_value.is_null() {
        return EsStatus::NullPointer;
    }
    let (sx, sy) = match (unsafe { series_from(x, x_len) }, unsafe {
        series_from(y, y_len)
    }) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match dense::dtw(&sx, &sy, cost.into()) {
        Ok(r) => {
            unsafe {
                *out_value = r.value;
                if !out_visited.is_null() {
                    *out_visited = r.visited;
                }
            }
            EsStatus::Ok
        }
        Err(e) => status_of_measure(&e),
    }
}

/// Sakoe-Chiba banded DTW; `band_pct` is the corridor radius in percent
/// of the series length.
///
/// # Safety
/// As in [`es_dtw`]; both series must have length `len`.
#[no_mangle]
pub unsafe extern "C" fn es_dtw_sc(
    x: *const f64,
    y: *const f64,
    len: usize,
    cost: EsLocalCost,
    band_pct: u8,
    out_value: *mut f64,
    out_visited: *mut u64,
) -> EsStatus {
    if out_value.is_null() {
        return EsStatus::NullPointer;
    }
    let band = match BandConfig::new(band_pct) {
        Ok(b) => b,
        Err(e) => return status_of_measure(&e),
    };
    let (sx, sy) = match (unsafe { series_from(x, len) }, unsafe {
        series_from(y, len)
    }) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match dense::dtw_sc(&sx, &sy, cost.into(), band) {
        Ok(r) => {
            unsafe {
                *out_value = r.value;
                if !out_visited.is_null() {
                    *out_visited = r.visited;
                }
            }
            EsStatus::Ok
        }
        Err(e) => status_of_measure(&e),
    }
}

/// Log of the regularized time-elastic kernel over the full grid.
///
/// # Safety
/// As in [`es_dtw_sc`].
#[no_mangle]
pub unsafe extern "C" fn es_krdtw(
    x: *const f64,
    y: *const f64,
    len: usize,
    nu: f64,
    out_log_value: *mut f64,
    out_visited: *mut u64,
) -> EsStatus {
    if out_log_value.is_null() {
        return EsStatus::NullPointer;
    }
    let cfg = match KernelConfig::new(nu) {
        Ok(c) => c,
        Err(e) => return status_of_measure(&e),
    };
    let (sx, sy) = match (unsafe { series_from(x, len) }, unsafe {
        series_from(y, len)
    }) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match dense::krdtw(&sx, &sy, cfg) {
        Ok(r) => {
            unsafe {
                *out_log_value = r.log_value;
                if !out_visited.is_null() {
                    *out_visited = r.visited;
                }
            }
            EsStatus::Ok
        }
        Err(e) => status_of_measure(&e),
    }
}

/// Sparsified-paths DTW over the entries of `m`.
///
/// Returns `ES_STATUS_UNREACHABLE` when no admissible path reaches the
/// terminal cell (only possible for hand-built matrices).
///
/// # Safety
/// `m` must be a live handle; buffers as in [`es_dtw_sc`].
#[no_mangle]
pub unsafe extern "C" fn es_sp_dtw(
    m: *const EsPathMatrix,
    x: *const f64,
    y: *const f64,
    len: usize,
    cost: EsLocalCost,
    out_value: *mut f64,
    out_visited: *mut u64,
) -> EsStatus {
    let Some(m) = (unsafe { m.as_ref() }) else {
        return EsStatus::NullPointer;
    };
    if out_value.is_null() {
        return EsStatus::NullPointer;
    }
    let (sx, sy) = match (unsafe { series_from(x, len) }, unsafe {
        series_from(y, len)
    }) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match sparse::sp_dtw(&sx, &sy, &m.inner, cost.into()) {
        Ok(r) => {
            unsafe {
                *out_value = r.value;
                if !out_visited.is_null() {
                    *out_visited = r.visited;
                }
            }
            if r.reachable {
                EsStatus::Ok
            } else {
                EsStatus::Unreachable
            }
        }
        Err(e) => status_of_measure(&e),
    }
}

/// Log of the sparsified-paths kernel over the entries of `m` (entry
/// weights are ignored).
///
/// # Safety
/// As in [`es_sp_dtw`].
#[no_mangle]
pub unsafe extern "C" fn es_sp_krdtw(
    m: *const EsPathMatrix,
    x: *const f64,
    y: *const f64,
    len: usize,
    nu: f64,
    out_log_value: *mut f64,
    out_visited: *mut u64,
) -> EsStatus {
    let Some(m) = (unsafe { m.as_ref() }) else {
        return EsStatus::NullPointer;
    };
    if out_log_value.is_null() {
        return EsStatus::NullPointer;
    }
    let cfg = match KernelConfig::new(nu) {
        Ok(c) => c,
        Err(e) => return status_of_measure(&e),
    };
    let (sx, sy) = match (unsafe { series_from(x, len) }, unsafe {
        series_from(y, len)
    }) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match sparse::sp_krdtw(&sx, &sy, &m.inner, cfg) {
        Ok(r) => {
            unsafe {
                *out_log_value = r.value;
                if !out_visited.is_null() {
                    *out_visited = r.visited;
                }
            }
            if r.reachable {
                EsStatus::Ok
            } else {
                EsStatus::Unreachable
            }
        }
        Err(e) => status_of_measure(&e),
    }
}
