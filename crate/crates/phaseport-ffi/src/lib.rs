//! C ABI for the phaseport analyzer.
//!
//! Fields are opaque handles created by [`pp_field_parse`] and released
//! with [`pp_field_free`]. Every fallible call returns a [`PpStatus`];
//! on failure a thread-local message is retrievable with
//! [`pp_last_error_message`]. Strings returned through out-parameters are
//! owned by the library and must be released with [`pp_string_free`].
//!
//! The header `include/phaseport.h` is generated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use phaseport::expr::FieldExpr;
use phaseport::geom::{Point, Rect};
use phaseport::report::analyze;
use phaseport::topo::{poincare_index, CircleSpec, IndexError};
use phaseport::verdict::AnalyzeParams;

/// Opaque parsed vector field.
pub struct PpField {
    inner: FieldExpr,
}

/// Status code of a C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpStatus {
    /// Success.
    Ok = 0,
    /// An expression failed to parse.
    ParseError = 2,
    /// Evaluation left the field's domain.
    DomainError = 3,
    /// A computation failed (zero on circle, no convergence, ...).
    ComputeError = 4,
    /// A required pointer argument was null.
    NullPointer = 5,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 6,
    /// A numeric argument was out of range.
    InvalidArgument = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<Vec<u8>>) {
    let cstring = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Message describing the most recent failure on this thread, or null if
/// the last call succeeded. The pointer stays valid until the next
/// failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn pp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn pp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, PpStatus> {
    if ptr.is_null() {
        return Err(PpStatus::NullPointer);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| PpStatus::InvalidUtf8)
}

/// Parses the two component expressions into a field handle.
///
/// # Safety
/// `fx` and `fy` must be valid NUL-terminated strings and `out` a valid
/// pointer. On success `*out` owns a field that must be released with
/// [`pp_field_free`].
#[no_mangle]
pub unsafe extern "C" fn pp_field_parse(
    fx: *const c_char,
    fy: *const c_char,
    out: *mut *mut PpField,
) -> PpStatus {
    clear_error();
    if out.is_null() {
        set_error("out pointer is null");
        return PpStatus::NullPointer;
    }
    let (fx, fy) = match (read_str(fx), read_str(fy)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(status), _) | (_, Err(status)) => {
            set_error("component source is null or not UTF-8");
            return status;
        }
    };
    match FieldExpr::parse(fx, fy) {
        Ok(field) => {
            *out = Box::into_raw(Box::new(PpField { inner: field }));
            PpStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            *out = ptr::null_mut();
            PpStatus::ParseError
        }
    }
}

/// Releases a field handle. Null is ignored.
///
/// # Safety
/// `field` must be null or a pointer returned by [`pp_field_parse`] that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn pp_field_free(field: *mut PpField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

unsafe fn field_ref<'a>(field: *const PpField) -> Result<&'a FieldExpr, PpStatus> {
    if field.is_null() {
        set_error("field handle is null");
        Err(PpStatus::NullPointer)
    } else {
        Ok(&(*field).inner)
    }
}

/// Evaluates X(x, y) into `out_xy[0]`, `out_xy[1]`.
///
/// # Safety
/// `field` must be a live handle and `out_xy` must point to at least two
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn pp_field_eval(
    field: *const PpField,
    x: f64,
    y: f64,
    out_xy: *mut f64,
) -> PpStatus {
    clear_error();
    let f = match field_ref(field) {
        Ok(f) => f,
        Err(s) => return s,
    };
    if out_xy.is_null() {
        set_error("out_xy is null");
        return PpStatus::NullPointer;
    }
    match f.eval(Point::new(x, y)) {
        Ok(v) => {
            *out_xy = v.x;
            *out_xy.add(1) = v.y;
            PpStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            PpStatus::DomainError
        }
    }
}

/// Writes the Jacobian at (x, y) row-major into `out_m[0..4]`.
///
/// # Safety
/// `field` must be a live handle and `out_m` must point to at least four
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn pp_field_jacobian(
    field: *const PpField,
    x: f64,
    y: f64,
    out_m: *mut f64,
) -> PpStatus {
    clear_error();
    let f = match field_ref(field) {
        Ok(f) => f,
        Err(s) => return s,
    };
    if out_m.is_null() {
        set_error("out_m is null");
        return PpStatus::NullPointer;
    }
    match f.jacobian(Point::new(x, y)) {
        Ok(jac) => {
            *out_m = jac.a;
            *out_m.add(1) = jac.b;
            *out_m.add(2) = jac.c;
            *out_m.add(3) = jac.d;
            PpStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            PpStatus::DomainError
        }
    }
}

/// Poincaré index of the field along the circle of the given center and
/// radius.
///
/// # Safety
/// `field` must be a live handle and `out_index` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pp_poincare_index(
    field: *const PpField,
    center_x: f64,
    center_y: f64,
    radius: f64,
    out_index: *mut i64,
) -> PpStatus {
    clear_error();
    let f = match field_ref(field) {
        Ok(f) => f,
        Err(s) => return s,
    };
    if out_index.is_null() {
        set_error("out_index is null");
        return PpStatus::NullPointer;
    }
    let Some(circle) = CircleSpec::at(Point::new(center_x, center_y), radius) else {
        set_error("radius must be positive and finite");
        return PpStatus::InvalidArgument;
    };
    match poincare_index(f, &circle, 1e-9) {
        Ok(result) => {
            *out_index = result.index;
            PpStatus::Ok
        }
        Err(IndexError::Domain(e)) => {
            set_error(e.to_string());
            PpStatus::DomainError
        }
        Err(e) => {
            set_error(e.to_string());
            PpStatus::ComputeError
        }
    }
}

/// Runs the full analysis over [xmin, xmax] x [ymin, ymax] and returns
/// the JSON report. The returned string must be released with
/// [`pp_string_free`].
///
/// # Safety
/// `field` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pp_analyze_json(
    field: *const PpField,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    grid: u32,
    seed: u64,
    out_json: *mut *mut c_char,
) -> PpStatus {
    clear_error();
    let f = match field_ref(field) {
        Ok(f) => f,
        Err(s) => return s,
    };
    if out_json.is_null() {
        set_error("out_json is null");
        return PpStatus::NullPointer;
    }
    *out_json = ptr::null_mut();
    let Some(region) = Rect::new(xmin, xmax, ymin, ymax) else {
        set_error("degenerate region: need xmin < xmax and ymin < ymax");
        return PpStatus::InvalidArgument;
    };
    if grid < 2 {
        set_error("grid must be at least 2");
        return PpStatus::InvalidArgument;
    }
    let params = AnalyzeParams {
        region,
        grid_n: grid as usize,
        seed,
        ..AnalyzeParams::default()
    };
    let report = analyze(f, &params);
    if report.spectral.counts.total() == 0 {
        set_error("every sample hit a domain error");
        return PpStatus::DomainError;
    }
    match CString::new(report.to_json()) {
        Ok(s) => {
            *out_json = s.into_raw();
            PpStatus::Ok
        }
        Err(_) => {
            set_error("report contained an interior NUL");
            PpStatus::ComputeError
        }
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer produced by this library and not freed
/// yet.
#[no_mangle]
pub unsafe extern "C" fn pp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
