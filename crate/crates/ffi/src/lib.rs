//! C ABI over the `coorbit` crate.
//!
//! Every entry point returns a [`CoorbitStatus`]; results come back through
//! out-pointers. Fields, H grids and transforms are opaque handles owned by
//! the caller and released with the matching `*_free` function. The message
//! of the most recent failure on the calling thread is available from
//! [`coorbit_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use coorbit::cwt::{self, HGrid, TransformArray};
use coorbit::experiments::{
    run_calderon, run_counterexample, run_decay_suite, run_embeddedness, run_frame, CalderonConfig,
    CounterexampleConfig, DecayConfig, EmbeddingConfig, FrameConfig, Report,
};
use coorbit::grid::{Domain, FrequencyGrid, SampledField};
use coorbit::group::GroupFamily;
use coorbit::norms::{mixed_norm, HWeight, MixedNormParams, WeightSpec};
use coorbit::orbit;
use coorbit::wavelet::{self, WaveletSpec};
use coorbit::CoorbitError;
use num_complex::Complex64;
use serde::Serialize;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoorbitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OffOrbit = 3,
    GridMismatch = 4,
    Unsupported = 5,
    InsufficientSamples = 6,
    Io = 7,
    Format = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Dilation group family.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoorbitFamilyKind {
    Similitude = 0,
    Diagonal = 1,
    Shearlet = 2,
    Scalar = 3,
}

/// Family descriptor; `shear_exponent` is read for the shearlet family only.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CoorbitFamily {
    pub kind: CoorbitFamilyKind,
    pub shear_exponent: f64,
}

/// Sampled field on a square frequency grid.
pub struct CoorbitField {
    inner: SampledField,
    family: Option<GroupFamily>,
}

/// Quadrature grid on the dilation group.
pub struct CoorbitHGrid {
    inner: HGrid,
}

/// Sampled wavelet transform.
pub struct CoorbitTransform {
    inner: TransformArray,
}

/// Heap string returned by the library; free with [`coorbit_string_free`].
pub struct CoorbitString {
    inner: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &CoorbitError) -> CoorbitStatus {
    match e {
        CoorbitError::OffOrbit(..) => CoorbitStatus::OffOrbit,
        CoorbitError::GridMismatch(_) | CoorbitError::FamilyMismatch { .. } => CoorbitStatus::GridMismatch,
        CoorbitError::Unsupported { .. } => CoorbitStatus::Unsupported,
        CoorbitError::InsufficientSamples(_) => CoorbitStatus::InsufficientSamples,
        CoorbitError::Io(_) => CoorbitStatus::Io,
        CoorbitError::Format(_) | CoorbitError::Json(_) => CoorbitStatus::Format,
        _ => CoorbitStatus::InvalidArgument,
    }
}

struct Failure(CoorbitStatus, String);

impl From<CoorbitError> for Failure {
    fn from(e: CoorbitError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type FfiResult<T> = std::result::Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> CoorbitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CoorbitStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CoorbitStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CoorbitStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CoorbitStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn family(f: CoorbitFamily) -> FfiResult<GroupFamily> {
    let fam = match f.kind {
        CoorbitFamilyKind::Similitude => GroupFamily::Similitude,
        CoorbitFamilyKind::Diagonal => GroupFamily::Diagonal,
        CoorbitFamilyKind::Shearlet => GroupFamily::shearlet(f.shear_exponent)?,
        CoorbitFamilyKind::Scalar => GroupFamily::ScalarReducible,
    };
    Ok(fam)
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

// ------------------------------------------------------------------ orbit

/// Whether `(xi1, xi2)` lies in the open dual orbit.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_in_orbit(fam: CoorbitFamily, xi1: f64, xi2: f64, out: *mut bool) -> CoorbitStatus {
    guard(|| write_out(out, orbit::in_orbit(family(fam)?, [xi1, xi2])?, "out"))
}

/// Euclidean distance from `(xi1, xi2)` to the orbit complement.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_dist_complement(fam: CoorbitFamily, xi1: f64, xi2: f64, out: *mut f64) -> CoorbitStatus {
    guard(|| write_out(out, orbit::dist_complement(family(fam)?, [xi1, xi2])?, "out"))
}

/// Auxiliary envelope function `A`; fails with `OffOrbit` off the orbit.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_aux_a(fam: CoorbitFamily, xi1: f64, xi2: f64, out: *mut f64) -> CoorbitStatus {
    guard(|| write_out(out, orbit::aux_a(family(fam)?, [xi1, xi2])?, "out"))
}

// ----------------------------------------------------------------- fields

/// Samples the default bump wavelet (`order == 0`) or the moment wavelet
/// of the given order on an `n x n` grid over `[-xi_max, xi_max)^2`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_field_wavelet(
    fam: CoorbitFamily,
    order: u32,
    n: usize,
    xi_max: f64,
    out: *mut *mut CoorbitField,
) -> CoorbitStatus {
    guard(|| {
        let fam = family(fam)?;
        let spec = if order == 0 {
            WaveletSpec::default_bump(fam)?
        } else {
            WaveletSpec::moment(order)
        };
        let grid = FrequencyGrid::new(n, xi_max)?;
        let inner = wavelet::make_wavelet(fam, spec, grid)?;
        let h = Box::new(CoorbitField {
            inner,
            family: Some(fam),
        });
        write_out(out, Box::into_raw(h), "out")
    })
}

/// Builds a frequency-domain field from `2 n^2` interleaved (re, im)
/// values in row-major order.
///
/// # Safety
/// `values` must be valid for `2 n^2` reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_field_from_values(
    n: usize,
    xi_max: f64,
    values: *const f64,
    out: *mut *mut CoorbitField,
) -> CoorbitStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let grid = FrequencyGrid::new(n, xi_max)?;
        let raw = std::slice::from_raw_parts(values, 2 * grid.len());
        let v: Vec<Complex64> = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let inner = SampledField::new(grid, v, Domain::Frequency)?;
        write_out(out, Box::into_raw(Box::new(CoorbitField { inner, family: None })), "out")
    })
}

/// Reads a field from a grid file sidecar.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_field_read(path: *const c_char, out: *mut *mut CoorbitField) -> CoorbitStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        let (inner, family) = SampledField::read(Path::new(path))?;
        write_out(out, Box::into_raw(Box::new(CoorbitField { inner, family })), "out")
    })
}

/// Writes a field as a grid file sidecar plus raw data.
///
/// # Safety
/// `field` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn coorbit_field_write(field: *const CoorbitField, path: *const c_char) -> CoorbitStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let path = read_str(path, "path")?;
        f.inner.write(Path::new(path), f.family)?;
        Ok(())
    })
}

/// Samples per axis of the field's grid.
///
/// # Safety
/// `field` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_field_size(field: *const CoorbitField, out: *mut usize) -> CoorbitStatus {
    guard(|| write_out(out, deref(field, "field")?.inner.grid.n, "out"))
}

/// L2 norm of the field.
///
/// # Safety
/// `field` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_field_l2_norm(field: *const CoorbitField, out: *mut f64) -> CoorbitStatus {
    guard(|| write_out(out, deref(field, "field")?.inner.l2_norm(), "out"))
}

/// Copies the frequency samples as interleaved (re, im) pairs; `len` is
/// the capacity of `buf` in doubles and must be at least `2 n^2`.
///
/// # Safety
/// `field` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_field_values(field: *const CoorbitField, buf: *mut f64, len: usize) -> CoorbitStatus {
    guard(|| {
        let f = deref(field, "field")?.inner.to_frequency();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < 2 * f.values.len() {
            return Err(Failure(
                CoorbitStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", 2 * f.values.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, 2 * f.values.len());
        for (o, v) in out.chunks_exact_mut(2).zip(&f.values) {
            o[0] = v.re;
            o[1] = v.im;
        }
        Ok(())
    })
}

/// Releases a field handle; null is ignored.
///
/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coorbit_field_free(field: *mut CoorbitField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

// ------------------------------------------------------------- transforms

/// Default quadrature grid of a family.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_hgrid_default(fam: CoorbitFamily, out: *mut *mut CoorbitHGrid) -> CoorbitStatus {
    guard(|| {
        let inner = HGrid::default_for(family(fam)?)?;
        write_out(out, Box::into_raw(Box::new(CoorbitHGrid { inner })), "out")
    })
}

/// Quadrature grid from JSON (`{"family": .., "a_min": ..}` or a full grid).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_hgrid_from_json(json: *const c_char, out: *mut *mut CoorbitHGrid) -> CoorbitStatus {
    guard(|| {
        let inner = HGrid::from_json(read_str(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(CoorbitHGrid { inner })), "out")
    })
}

/// Number of nodes of the grid.
///
/// # Safety
/// `hgrid` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_hgrid_len(hgrid: *const CoorbitHGrid, out: *mut usize) -> CoorbitStatus {
    guard(|| write_out(out, deref(hgrid, "hgrid")?.inner.len(), "out"))
}

/// # Safety
/// `hgrid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coorbit_hgrid_free(hgrid: *mut CoorbitHGrid) {
    if !hgrid.is_null() {
        drop(Box::from_raw(hgrid));
    }
}

/// Calderon function of `psi` at `(xi1, xi2)` under the grid's quadrature.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_calderon(
    psi: *const CoorbitField,
    hgrid: *const CoorbitHGrid,
    xi1: f64,
    xi2: f64,
    out: *mut f64,
) -> CoorbitStatus {
    guard(|| {
        let psi = deref(psi, "psi")?.inner.to_frequency();
        let h = deref(hgrid, "hgrid")?;
        write_out(out, cwt::calderon_function(&psi, [xi1, xi2], &h.inner)?, "out")
    })
}

/// Wavelet transform of `f` with respect to `psi`.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_cwt_analyze(
    f: *const CoorbitField,
    psi: *const CoorbitField,
    hgrid: *const CoorbitHGrid,
    out: *mut *mut CoorbitTransform,
) -> CoorbitStatus {
    guard(|| {
        let f = deref(f, "f")?.inner.to_frequency();
        let psi = deref(psi, "psi")?.inner.to_frequency();
        let h = deref(hgrid, "hgrid")?;
        let inner = cwt::analyze(&f, &psi, &h.inner)?;
        write_out(out, Box::into_raw(Box::new(CoorbitTransform { inner })), "out")
    })
}

/// Weighted mixed `L^{p,q}` norm of a transform. `p` and `q` accept
/// `INFINITY`; `weight_json` is a dilation weight bundle such as
/// `{"u":1}` or null for `w = 1`.
///
/// # Safety
/// `t` must be a live handle, `weight_json` null or NUL-terminated and
/// `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_transform_mixed_norm(
    t: *const CoorbitTransform,
    p: f64,
    q: f64,
    s: f64,
    weight_json: *const c_char,
    out: *mut f64,
) -> CoorbitStatus {
    guard(|| {
        let t = &deref(t, "transform")?.inner;
        let w = if weight_json.is_null() {
            HWeight::Unit
        } else {
            HWeight::from_json(t.hgrid.family, read_str(weight_json, "weight_json")?)?
        };
        let params = MixedNormParams::new(p, q, WeightSpec::new(s, w)?)?;
        write_out(out, mixed_norm(&t, &params), "out")
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coorbit_transform_free(t: *mut CoorbitTransform) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

// ------------------------------------------------------------ experiments

fn report_json<C: Serialize, R: Serialize>(r: Report<C, R>) -> FfiResult<(String, i32)> {
    Ok((r.to_json()?, r.exit_code()))
}

fn parse<T: serde::de::DeserializeOwned + Default>(json: Option<&str>) -> FfiResult<T> {
    match json {
        None => Ok(T::default()),
        Some(s) => Ok(serde_json::from_str(s).map_err(CoorbitError::from)?),
    }
}

/// Runs one experiment by command name (`calderon`, `check-embeddedness`,
/// `verify-decay`, `frame-test`, `counterexample`) with an optional JSON
/// configuration. The report is returned as a JSON string and its exit
/// code (0 when every check passes) in `exit_code`.
///
/// # Safety
/// `command` must be NUL-terminated, `config_json` null or NUL-terminated,
/// and both out-pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coorbit_run_experiment(
    command: *const c_char,
    config_json: *const c_char,
    report: *mut *mut CoorbitString,
    exit_code: *mut i32,
) -> CoorbitStatus {
    guard(|| {
        let command = read_str(command, "command")?;
        let config = if config_json.is_null() {
            None
        } else {
            Some(read_str(config_json, "config_json")?)
        };
        let (json, code) = match command {
            "calderon" => report_json(run_calderon(&parse::<CalderonConfig>(config)?)?)?,
            "check-embeddedness" => report_json(run_embeddedness(&parse::<EmbeddingConfig>(config)?)?)?,
            "verify-decay" => report_json(run_decay_suite(&parse::<DecayConfig>(config)?)?)?,
            "frame-test" => report_json(run_frame(&parse::<FrameConfig>(config)?)?)?,
            "counterexample" => report_json(run_counterexample(&parse::<CounterexampleConfig>(config)?)?)?,
            other => {
                return Err(Failure(
                    CoorbitStatus::InvalidArgument,
                    format!("unknown experiment `{other}`"),
                ))
            }
        };
        let inner = CString::new(json).map_err(|_| Failure(CoorbitStatus::Format, "report contains NUL".into()))?;
        write_out(exit_code, code, "exit_code")?;
        write_out(report, Box::into_raw(Box::new(CoorbitString { inner })), "report")
    })
}

/// Borrowed pointer to the string's NUL-terminated bytes; valid until the
/// string is freed.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn coorbit_string_data(s: *const CoorbitString) -> *const c_char {
    match s.as_ref() {
        Some(s) => s.inner.as_ptr(),
        None => std::ptr::null(),
    }
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coorbit_string_free(s: *mut CoorbitString) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
