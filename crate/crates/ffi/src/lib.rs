//! C ABI over `topofeat`.
//!
//! Handles are opaque pointers released with the matching `*_free`. Every
//! fallible call returns a [`TfStatus`]; on failure the message is available
//! from [`tf_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use topofeat::complex::{build_alpha, build_cech, build_rips, Convention};
use topofeat::eval::{iou_scores, ratio_to_f64, LabelMask};
use topofeat::metrics::bottleneck;
use topofeat::persistence::{diagram, PersistenceDiagram};
use topofeat::pointcloud::{sample_annulus, sample_disc, Point2, PointCloud, Source};
use topofeat::signature::{signature_feature, FEATURE_LEN};
use topofeat::vectorize::silhouette_feature;
use topofeat::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Degenerate = 4,
    SizeCap = 5,
    BufferTooSmall = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TfComplex {
    Rips = 0,
    Cech = 1,
    Alpha = 2,
}

/// Opaque point cloud.
pub struct TfPointCloud(PointCloud);

/// Opaque persistence diagram.
pub struct TfDiagram(PersistenceDiagram);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: TfStatus, msg: impl Into<String>) -> TfStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> TfStatus {
    let status = match e {
        Error::Io { .. } | Error::ImageDecode { .. } | Error::UnsupportedImage { .. } | Error::Parse { .. } => TfStatus::Io,
        Error::Collinear(_) => TfStatus::Degenerate,
        Error::SizeCap { .. } => TfStatus::SizeCap,
        _ => TfStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> TfStatus) -> TfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(TfStatus::Internal, "internal panic"),
    }
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a cloud from `n` interleaved `x, y` pairs.
///
/// # Safety
/// `xy` must point to `2 * n` doubles (or may be NULL when `n == 0`); `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tf_pointcloud_new(xy: *const f64, n: usize, out: *mut *mut TfPointCloud) -> TfStatus {
    guard(|| {
        if out.is_null() || (xy.is_null() && n > 0) {
            return fail(TfStatus::NullPointer, "null pointer argument");
        }
        let coords = if n == 0 { &[][..] } else { std::slice::from_raw_parts(xy, 2 * n) };
        let points = coords.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect();
        match PointCloud::new(points, Source::File) {
            Ok(pc) => {
                put(out, TfPointCloud(pc));
                TfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Reads a `x y` per line text file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_pointcloud_read(path: *const c_char, out: *mut *mut TfPointCloud) -> TfStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(TfStatus::NullPointer, "null pointer argument");
        }
        let Ok(p) = CStr::from_ptr(path).to_str() else {
            return fail(TfStatus::InvalidArgument, "path is not UTF-8");
        };
        match PointCloud::read(Path::new(p)) {
            Ok(pc) => {
                put(out, TfPointCloud(pc));
                TfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_sample_disc(n: usize, seed: u64, out: *mut *mut TfPointCloud) -> TfStatus {
    guard(|| {
        if out.is_null() {
            return fail(TfStatus::NullPointer, "null pointer argument");
        }
        put(out, TfPointCloud(sample_disc(n, seed)));
        TfStatus::Ok
    })
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_sample_annulus(
    n: usize,
    r_in: f64,
    r_out: f64,
    seed: u64,
    out: *mut *mut TfPointCloud,
) -> TfStatus {
    guard(|| {
        if out.is_null() {
            return fail(TfStatus::NullPointer, "null pointer argument");
        }
        match sample_annulus(n, r_in, r_out, seed) {
            Ok(pc) => {
                put(out, TfPointCloud(pc));
                TfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of points; 0 for NULL.
///
/// # Safety
/// `pc` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_pointcloud_len(pc: *const TfPointCloud) -> usize {
    pc.as_ref().map_or(0, |p| p.0.len())
}

/// # Safety
/// `pc` must be a live handle; `x` and `y` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_pointcloud_get(pc: *const TfPointCloud, i: usize, x: *mut f64, y: *mut f64) -> TfStatus {
    let Some(pc) = pc.as_ref() else {
        return fail(TfStatus::NullPointer, "null point cloud");
    };
    if x.is_null() || y.is_null() {
        return fail(TfStatus::NullPointer, "null output pointer");
    }
    match pc.0.points().get(i) {
        Some(p) => {
            *x = p.x;
            *y = p.y;
            TfStatus::Ok
        }
        None => fail(TfStatus::InvalidArgument, format!("index {i} out of range")),
    }
}

/// # Safety
/// `pc` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn tf_pointcloud_free(pc: *mut TfPointCloud) {
    if !pc.is_null() {
        drop(Box::from_raw(pc));
    }
}

/// Persistence diagram up to dimension 1 of the chosen filtration (simplices
/// up to dimension 2, no value cap). `squared` reports Čech values as
/// squared radii.
///
/// # Safety
/// `pc` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_diagram_compute(
    pc: *const TfPointCloud,
    complex: TfComplex,
    squared: bool,
    out: *mut *mut TfDiagram,
) -> TfStatus {
    guard(|| {
        let (Some(pc), false) = (pc.as_ref(), out.is_null()) else {
            return fail(TfStatus::NullPointer, "null pointer argument");
        };
        let fc = match complex {
            TfComplex::Rips => build_rips(&pc.0, 2, f64::INFINITY),
            TfComplex::Cech => build_cech(&pc.0, 2, f64::INFINITY),
            TfComplex::Alpha => build_alpha(&pc.0),
        };
        let d = match fc {
            Ok(fc) => diagram(&fc),
            Err(e) => return from_error(e),
        };
        let d = if squared && d.convention == Convention::CechRadius {
            match d.rescaled(Convention::AlphaSquaredRadius) {
                Ok(d) => d,
                Err(e) => return from_error(e),
            }
        } else {
            d
        };
        put(out, TfDiagram(d));
        TfStatus::Ok
    })
}

/// Number of pairs; 0 for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_diagram_len(d: *const TfDiagram) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// Pair `i` in (dim, birth, death) order; `death` is +inf for essential classes.
///
/// # Safety
/// `d` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_diagram_get(
    d: *const TfDiagram,
    i: usize,
    dim: *mut usize,
    birth: *mut f64,
    death: *mut f64,
) -> TfStatus {
    let Some(d) = d.as_ref() else {
        return fail(TfStatus::NullPointer, "null diagram");
    };
    if dim.is_null() || birth.is_null() || death.is_null() {
        return fail(TfStatus::NullPointer, "null output pointer");
    }
    match d.0.pairs.get(i) {
        Some(p) => {
            *dim = p.dim;
            *birth = p.birth;
            *death = p.death;
            TfStatus::Ok
        }
        None => fail(TfStatus::InvalidArgument, format!("index {i} out of range")),
    }
}

/// # Safety
/// `d` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn tf_diagram_free(d: *mut TfDiagram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Bottleneck distance in dimension `dim`.
///
/// # Safety
/// `a`, `b` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_bottleneck(a: *const TfDiagram, b: *const TfDiagram, dim: usize, out: *mut f64) -> TfStatus {
    guard(|| {
        let (Some(a), Some(b), false) = (a.as_ref(), b.as_ref(), out.is_null()) else {
            return fail(TfStatus::NullPointer, "null pointer argument");
        };
        *out = bottleneck(&a.0, &b.0, dim);
        TfStatus::Ok
    })
}

unsafe fn write_feature(values: topofeat::Result<Vec<f64>>, buf: *mut f64, len: usize) -> TfStatus {
    let values = match values {
        Ok(v) => v,
        Err(e) => return from_error(e),
    };
    if buf.is_null() {
        return fail(TfStatus::NullPointer, "null buffer");
    }
    if len < values.len() {
        return fail(TfStatus::BufferTooSmall, format!("need {} values, buffer holds {len}", values.len()));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    TfStatus::Ok
}

/// Constant-weight silhouettes of dimensions 0 and 1 into `buf`
/// (`2 * resolution` values).
///
/// # Safety
/// `d` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tf_silhouette_feature(d: *const TfDiagram, resolution: usize, buf: *mut f64, len: usize) -> TfStatus {
    guard(|| match d.as_ref() {
        Some(d) => write_feature(silhouette_feature(&d.0, resolution), buf, len),
        None => fail(TfStatus::NullPointer, "null diagram"),
    })
}

/// Number of values written by [`tf_signature_feature`].
#[no_mangle]
pub extern "C" fn tf_signature_feature_len() -> usize {
    2 * FEATURE_LEN
}

/// Landscape signature feature (2 × 155 values) into `buf`.
///
/// # Safety
/// `d` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tf_signature_feature(d: *const TfDiagram, buf: *mut f64, len: usize) -> TfStatus {
    guard(|| match d.as_ref() {
        Some(d) => write_feature(signature_feature(&d.0), buf, len),
        None => fail(TfStatus::NullPointer, "null diagram"),
    })
}

/// Per-class IoU of two `width × height` label masks. `per_class` receives
/// `classes` values; absent classes score 1.
///
/// # Safety
/// `pred` and `truth` must hold `width * height` values; `per_class` must
/// hold `classes` doubles; `total` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_iou(
    pred: *const u16,
    truth: *const u16,
    width: usize,
    height: usize,
    classes: usize,
    per_class: *mut f64,
    total: *mut f64,
) -> TfStatus {
    guard(|| {
        let n = width * height;
        if (n > 0 && (pred.is_null() || truth.is_null())) || per_class.is_null() || total.is_null() {
            return fail(TfStatus::NullPointer, "null pointer argument");
        }
        let slice = |p: *const u16| if n == 0 { Vec::new() } else { std::slice::from_raw_parts(p, n).to_vec() };
        let masks = LabelMask::new(width, height, slice(pred)).and_then(|p| Ok((p, LabelMask::new(width, height, slice(truth))?)));
        let r = match masks.and_then(|(p, t)| iou_scores(&p, &t, classes)) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        for (i, v) in r.per_class.iter().enumerate() {
            *per_class.add(i) = ratio_to_f64(v);
        }
        *total = r.total_f64();
        TfStatus::Ok
    })
}
