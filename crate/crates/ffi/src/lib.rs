//! C ABI over the nilsoliton toolkit.
//!
//! Brackets and graphs are opaque handles created by `ns_*_new` or
//! `ns_*_from_*` and released with the matching `ns_*_free`. Every fallible
//! call returns an [`NsStatus`]; on failure `ns_last_error` gives a message
//! for the calling thread. Array outputs use the caller's buffer: the
//! required length is always written to `*len`, and `NS_STATUS_BUFFER_TOO_SMALL`
//! is returned when the buffer is shorter.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nilsoliton::bracket::{self, Bracket};
use nilsoliton::doc::{self, BracketDocument, Document};
use nilsoliton::error::Error;
use nilsoliton::flow::{self, FlowOptions};
use nilsoliton::graphs::{self, Graph};
use nilsoliton::{curvature, soliton, stratify};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    InvalidInput = 4,
    ComputationFailed = 5,
    BufferTooSmall = 6,
    Overflow = 7,
    Panic = 8,
}

/// Opaque bracket handle.
pub struct NsBracket(Bracket);

/// Opaque graph handle.
pub struct NsGraph(Graph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> NsStatus {
    match e {
        Error::Parse { .. } | Error::Io(_) => NsStatus::ParseError,
        Error::IndexOutOfRange { .. }
        | Error::DiagonalKey { .. }
        | Error::DuplicateKey { .. }
        | Error::NonFinite { .. }
        | Error::ZeroDimension
        | Error::ZeroBracket
        | Error::InvalidBracket(_)
        | Error::Graph(_)
        | Error::GrstParameters { .. }
        | Error::CoefficientCount { .. } => NsStatus::InvalidInput,
        _ => NsStatus::ComputationFailed,
    }
}

/// Runs `f`, turning errors and panics into a status and a message.
fn guard(f: impl FnOnce() -> Result<(), NsStatus>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
            set_error(format!("panic: {}", msg.unwrap_or_default()));
            NsStatus::Panic
        }
    }
}

fn fail(e: Error) -> NsStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn bad(status: NsStatus, msg: &str) -> NsStatus {
    set_error(msg);
    status
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, NsStatus> {
    p.as_ref().ok_or_else(|| bad(NsStatus::NullPointer, "null handle"))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, NsStatus> {
    p.as_mut().ok_or_else(|| bad(NsStatus::NullPointer, "null output pointer"))
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, NsStatus> {
    if s.is_null() {
        return Err(bad(NsStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| bad(NsStatus::InvalidArgument, "string is not UTF-8"))
}

/// Copies `v` into `buf` when it fits; always reports the needed length.
unsafe fn fill<T: Copy>(v: &[T], buf: *mut T, len: *mut usize) -> Result<(), NsStatus> {
    let len = out(len)?;
    let cap = *len;
    *len = v.len();
    if v.is_empty() {
        return Ok(());
    }
    if buf.is_null() || cap < v.len() {
        return Err(bad(NsStatus::BufferTooSmall, "output buffer too small"));
    }
    ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn c_string(s: String) -> Result<*mut c_char, NsStatus> {
    CString::new(s).map(CString::into_raw).map_err(|_| bad(NsStatus::ComputationFailed, "interior NUL"))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Zero bracket on R^dim.
///
/// # Safety
/// `out_bracket` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_bracket_new(dim: usize, out_bracket: *mut *mut NsBracket) -> NsStatus {
    guard(|| {
        let o = out(out_bracket)?;
        if dim == 0 {
            return Err(fail(Error::ZeroDimension));
        }
        *o = boxed(NsBracket(Bracket::zero(dim)));
        Ok(())
    })
}

/// Parses a bracket document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_bracket` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_bracket_from_json(json: *const c_char, out_bracket: *mut *mut NsBracket) -> NsStatus {
    guard(|| {
        let o = out(out_bracket)?;
        let b = match Document::parse(text(json)?).map_err(fail)? {
            Document::Bracket(d) => d.to_bracket().map_err(fail)?,
            _ => return Err(bad(NsStatus::ParseError, "expected a bracket document")),
        };
        *o = boxed(NsBracket(b));
        Ok(())
    })
}

/// Bracket document as a new string; free it with `ns_string_free`.
///
/// # Safety
/// `b` must be a live handle; `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_bracket_to_json(b: *const NsBracket, out_json: *mut *mut c_char) -> NsStatus {
    guard(|| {
        let b = deref(b)?;
        let o = out(out_json)?;
        *o = c_string(Document::Bracket(BracketDocument::from_bracket(&b.0, None)).to_json())?;
        Ok(())
    })
}

/// # Safety
/// `b` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ns_bracket_free(b: *mut NsBracket) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Dimension of the underlying space, 0 for a null handle.
///
/// # Safety
/// `b` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_bracket_dim(b: *const NsBracket) -> usize {
    b.as_ref().map_or(0, |b| b.0.dim())
}

/// Sets the coefficient of `e_k` in `[e_i, e_j]` (1-based).
///
/// # Safety
/// `b` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_bracket_set(b: *mut NsBracket, i: usize, j: usize, k: usize, c: f64) -> NsStatus {
    guard(|| {
        let b = out(b)?;
        if !c.is_finite() {
            return Err(fail(Error::NonFinite { i, j, k }));
        }
        b.0.set(i, j, k, c).map_err(fail)
    })
}

/// # Safety
/// `b` must be a live handle; `out_c` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_bracket_get(b: *const NsBracket, i: usize, j: usize, k: usize, out_c: *mut f64) -> NsStatus {
    guard(|| {
        let b = deref(b)?;
        let n = b.0.dim();
        if [i, j, k].iter().any(|&x| x == 0 || x > n) {
            return Err(fail(Error::IndexOutOfRange { i, j, k, dim: n }));
        }
        *out(out_c)? = b.0.get(i, j, k);
        Ok(())
    })
}

/// Jacobi and nilpotency check. `*out_step` is 0 when not nilpotent.
///
/// # Safety
/// `b` must be a live handle; outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_validate(b: *const NsBracket, tol: f64, out_jacobi_ok: *mut bool, out_step: *mut usize) -> NsStatus {
    guard(|| {
        let r = bracket::validate(&deref(b)?.0, tol);
        *out(out_jacobi_ok)? = r.jacobi_ok;
        *out(out_step)? = if r.nilpotent { r.step.unwrap_or(0) } else { 0 };
        Ok(())
    })
}

/// Ricci operator, `dim * dim` entries in row-major order.
///
/// # Safety
/// `b` must be a live handle; `buf` holds `*len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_ricci(b: *const NsBracket, buf: *mut f64, len: *mut usize) -> NsStatus {
    guard(|| {
        let ric = curvature::ricci_operator(&deref(b)?.0);
        let rows: Vec<f64> = ric.transpose().iter().copied().collect();
        fill(&rows, buf, len)
    })
}

/// `F = 16 tr(Ric^2) / ||mu||^4`.
///
/// # Safety
/// `b` must be a live handle; `out_f` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_f_value(b: *const NsBracket, out_f: *mut f64) -> NsStatus {
    guard(|| {
        *out(out_f)? = curvature::f_value(&deref(b)?.0).map_err(fail)?;
        Ok(())
    })
}

/// Nilsoliton test; `*out_c` receives the constant of `Ric = c I + D`.
///
/// # Safety
/// `b` must be a live handle; outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_is_einstein(b: *const NsBracket, tol: f64, out_einstein: *mut bool, out_c: *mut f64) -> NsStatus {
    guard(|| {
        let r = soliton::is_einstein(&deref(b)?.0, tol).map_err(fail)?;
        *out(out_einstein)? = r.is_einstein;
        *out(out_c)? = r.c_mu;
        Ok(())
    })
}

/// Eigenvalue type of the soliton derivation: distinct coprime values in
/// `values` and their multiplicities in `multiplicities`, both of length
/// `*len`.
///
/// # Safety
/// `b` must be a live handle; both buffers hold `*len` elements.
#[no_mangle]
pub unsafe extern "C" fn ns_eigenvalue_type(
    b: *const NsBracket,
    tol: f64,
    values: *mut u64,
    multiplicities: *mut usize,
    len: *mut usize,
) -> NsStatus {
    guard(|| {
        let r = soliton::is_einstein(&deref(b)?.0, tol).map_err(fail)?;
        let t = soliton::eigenvalue_type(&r).map_err(fail)?;
        let cap = *out(len)?;
        fill(&t.values, values, len)?;
        *len = cap;
        fill(&t.multiplicities, multiplicities, len)
    })
}

/// Minimal-norm point of the convex hull of the weights, length `dim`.
///
/// # Safety
/// `b` must be a live handle; `buf` holds `*len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_beta(b: *const NsBracket, buf: *mut f64, len: *mut usize) -> NsStatus {
    guard(|| {
        let beta = stratify::beta_of(&deref(b)?.0).map_err(fail)?;
        fill(&beta.point, buf, len)
    })
}

/// Integrates the normalized gradient flow and returns the limit as a new
/// handle.
///
/// # Safety
/// `b` must be a live handle; outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_flow(
    b: *const NsBracket,
    grad_tol: f64,
    max_time: f64,
    out_limit: *mut *mut NsBracket,
    out_converged: *mut bool,
) -> NsStatus {
    guard(|| {
        let b = deref(b)?;
        let (lim, conv) = (out(out_limit)?, out(out_converged)?);
        if !(grad_tol > 0.0) || !(max_time > 0.0) {
            return Err(bad(NsStatus::InvalidArgument, "grad_tol and max_time must be positive"));
        }
        let opts = FlowOptions { grad_tol, max_time, ..FlowOptions::default() };
        let traj = flow::integrate(&b.0, &opts).map_err(fail)?;
        *conv = traj.converged;
        *lim = boxed(NsBracket(traj.limit));
        Ok(())
    })
}

/// Graph from `edge_count` pairs of 1-based vertices in `edges`.
///
/// # Safety
/// `edges` holds `2 * edge_count` values; `out_graph` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_new(vertices: usize, edges: *const usize, edge_count: usize, out_graph: *mut *mut NsGraph) -> NsStatus {
    guard(|| {
        let o = out(out_graph)?;
        if edges.is_null() && edge_count > 0 {
            return Err(bad(NsStatus::NullPointer, "null edge array"));
        }
        let flat = if edge_count == 0 { &[][..] } else { std::slice::from_raw_parts(edges, 2 * edge_count) };
        let g = Graph::new(vertices, flat.chunks(2).map(|p| (p[0], p[1]))).map_err(fail)?;
        *o = boxed(NsGraph(g));
        Ok(())
    })
}

/// Graph from edge-list text or a JSON graph document.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out_graph` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_parse(source: *const c_char, out_graph: *mut *mut NsGraph) -> NsStatus {
    guard(|| {
        let o = out(out_graph)?;
        *o = boxed(NsGraph(doc::parse_graph(text(source)?).map_err(fail)?));
        Ok(())
    })
}

/// `G(r,s,t)`.
///
/// # Safety
/// `out_graph` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_grst(r: usize, s: usize, t: usize, out_graph: *mut *mut NsGraph) -> NsStatus {
    guard(|| {
        let o = out(out_graph)?;
        *o = boxed(NsGraph(graphs::grst(r, s, t).map_err(fail)?));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_free(g: *mut NsGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Exact positivity of the weighting.
///
/// # Safety
/// `g` must be a live handle; `out_positive` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_is_positive(g: *const NsGraph, out_positive: *mut bool) -> NsStatus {
    guard(|| {
        *out(out_positive)? = graphs::is_positive(&deref(g)?.0).map_err(fail)?;
        Ok(())
    })
}

/// Coprime integer weighting in edge order and its `nu`.
/// `NS_STATUS_OVERFLOW` when an entry does not fit in 64 bits.
///
/// # Safety
/// `g` must be a live handle; `buf` holds `*len` values; `out_nu` valid.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_weighting(g: *const NsGraph, buf: *mut i64, len: *mut usize, out_nu: *mut i64) -> NsStatus {
    guard(|| {
        let w = graphs::weighting(&deref(g)?.0).map_err(fail)?;
        let nu_out = out(out_nu)?;
        let overflow = || bad(NsStatus::Overflow, "weighting does not fit in 64 bits");
        let ints = graphs::small_integers(&w.integer).ok_or_else(overflow)?;
        let nu = graphs::small_integers(std::slice::from_ref(&w.nu_int)).ok_or_else(overflow)?[0];
        fill(&ints, buf, len)?;
        *nu_out = nu;
        Ok(())
    })
}

/// The graph's 2-step bracket with all coefficients 1, as a new handle.
///
/// # Safety
/// `g` must be a live handle; `out_bracket` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ns_graph_to_bracket(g: *const NsGraph, out_bracket: *mut *mut NsBracket) -> NsStatus {
    guard(|| {
        let g = deref(g)?;
        let o = out(out_bracket)?;
        *o = boxed(NsBracket(graphs::to_bracket(&g.0, None).map_err(fail)?));
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::Parse { line: 1, column: 1, message: String::new() }), NsStatus::ParseError);
        assert_eq!(status_of(&Error::ZeroBracket), NsStatus::InvalidInput);
        assert_eq!(status_of(&Error::Singular), NsStatus::ComputationFailed);
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, NsStatus::Panic);
        let msg = unsafe { CStr::from_ptr(ns_last_error()) }.to_str().unwrap();
        assert_eq!(msg, "panic: boom");
    }

    #[test]
    fn fill_reports_length() {
        let mut len = 1;
        let mut buf = [0.0];
        let s = guard(|| unsafe { fill(&[1.0, 2.0], buf.as_mut_ptr(), &mut len) });
        assert_eq!((s, len), (NsStatus::BufferTooSmall, 2));
        let mut buf = [0.0; 2];
        let s = guard(|| unsafe { fill(&[1.0, 2.0], buf.as_mut_ptr(), &mut len) });
        assert_eq!((s, buf), (NsStatus::Ok, [1.0, 2.0]));
    }
}
