//! C ABI over the `marginal` crate.
//!
//! Lifts and reports are opaque handles owned by the caller and released with
//! the matching `*_free`. Every fallible call returns a [`MarginalStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`marginal_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use marginal::catalog::{catalog_lookup_in, parse_params, Built};
use marginal::constructor::{construct_lifts, AmbientKind, LiftedImmersion};
use marginal::verifier::{assemble_report, MarginalityReport, Verdict};
use marginal::{GeomError, Tolerances};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownEntry = 3,
    ParamConstraint = 4,
    Pipeline = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalVerdict {
    MarginallyTrapped = 0,
    NotMarginal = 1,
    Inconclusive = 2,
}

impl From<Verdict> for MarginalVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::MarginallyTrapped => MarginalVerdict::MarginallyTrapped,
            Verdict::NotMarginal => MarginalVerdict::NotMarginal,
            Verdict::Inconclusive => MarginalVerdict::Inconclusive,
        }
    }
}

/// Opaque lifted immersion.
pub struct MarginalLift {
    lift: LiftedImmersion,
    tol: Tolerances,
}

/// Opaque verification report.
pub struct MarginalReport {
    report: MarginalityReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &GeomError) -> MarginalStatus {
    match err.root_cause() {
        GeomError::UnknownEntry(_) => MarginalStatus::UnknownEntry,
        GeomError::ParamConstraint(_) => MarginalStatus::ParamConstraint,
        GeomError::Parse(_) | GeomError::UnsupportedAmbient(_) | GeomError::Argument(_) | GeomError::MissingRoot { .. } => {
            MarginalStatus::InvalidArgument
        }
        _ => MarginalStatus::Pipeline,
    }
}

struct Fail(MarginalStatus, String);

impl From<GeomError> for Fail {
    fn from(e: GeomError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording failures and converting panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MarginalStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MarginalStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside marginal");
            MarginalStatus::Panic
        }
    }
}

/// # Safety
/// `s` is null or a valid NUL-terminated string.
unsafe fn opt_str<'a>(s: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if s.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(s)
        .to_str()
        .map(Some)
        .map_err(|_| Fail(MarginalStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn null(what: &str) -> Fail {
    Fail(MarginalStatus::NullPointer, format!("{what} is null"))
}

fn parse_ambient(s: Option<&str>) -> Result<Option<AmbientKind>, Fail> {
    Ok(match s {
        Some(a) if !a.is_empty() => Some(a.parse()?),
        _ => None,
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn marginal_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds the lift of catalog entry `entry`.
///
/// `params` (`key=val,...`) and `ambient` may be null. For hypersurface
/// entries `root_index` selects the root of the curvature polynomial.
///
/// # Safety
/// String arguments are null or valid NUL-terminated strings; `out` is a valid
/// pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn marginal_lift_from_catalog(
    entry: *const c_char,
    params: *const c_char,
    ambient: *const c_char,
    root_index: u32,
    out: *mut *mut MarginalLift,
) -> MarginalStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let name = opt_str(entry, "entry")?.ok_or_else(|| null("entry"))?;
        let params = parse_params(opt_str(params, "params")?.unwrap_or(""))?;
        let ambient = parse_ambient(opt_str(ambient, "ambient")?)?;
        let tol = Tolerances::default();
        let e = catalog_lookup_in(name, &params, ambient)?;
        let lift = e.lift(ambient, root_index as usize, &tol)?;
        *out = Box::into_raw(Box::new(MarginalLift { lift, tol }));
        Ok(())
    })
}

/// Number of lifts the hypersurface entry admits in `ambient` (null for the
/// entry's default); lift entries count as one.
///
/// # Safety
/// As for [`marginal_lift_from_catalog`].
#[no_mangle]
pub unsafe extern "C" fn marginal_root_count(
    entry: *const c_char,
    params: *const c_char,
    ambient: *const c_char,
    out: *mut usize,
) -> MarginalStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = opt_str(entry, "entry")?.ok_or_else(|| null("entry"))?;
        let params = parse_params(opt_str(params, "params")?.unwrap_or(""))?;
        let ambient = parse_ambient(opt_str(ambient, "ambient")?)?;
        let e = catalog_lookup_in(name, &params, ambient)?;
        *out = match &e.built {
            Built::Lift(_) => 1,
            Built::Hypersurface { imm, ambients } => {
                let kind = ambient.unwrap_or(ambients[0]);
                construct_lifts(imm, kind, &Tolerances::default())?.lifts.len()
            }
        };
        Ok(())
    })
}

/// Resamples the lift on an `nx` by `ny` grid (each at least 3).
///
/// # Safety
/// `lift` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn marginal_lift_set_grid(lift: *mut MarginalLift, nx: u32, ny: u32) -> MarginalStatus {
    guard(|| {
        let h = lift.as_mut().ok_or_else(|| null("lift"))?;
        let chart = h.lift.chart.clone().with_resolution(vec![nx as usize, ny as usize])?;
        h.lift = h.lift.with_chart(chart)?;
        Ok(())
    })
}

/// Overrides the finite-difference step and the marginality tolerance; a
/// non-positive value keeps the current setting.
///
/// # Safety
/// `lift` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn marginal_lift_set_tolerances(lift: *mut MarginalLift, step: f64, tol_marginal: f64) -> MarginalStatus {
    guard(|| {
        let h = lift.as_mut().ok_or_else(|| null("lift"))?;
        let mut tol = h.tol;
        if step > 0.0 {
            tol = tol.with_step(step);
        }
        if tol_marginal > 0.0 {
            tol = tol.with_tol_marginal(tol_marginal);
        }
        tol.validate()?;
        h.tol = tol;
        Ok(())
    })
}

/// Chart and container dimensions of the lift.
///
/// # Safety
/// `lift` is null or a live handle; the out pointers are null or writable.
#[no_mangle]
pub unsafe extern "C" fn marginal_lift_dims(lift: *const MarginalLift, chart_dim: *mut usize, ambient_dim: *mut usize) -> MarginalStatus {
    guard(|| {
        let h = lift.as_ref().ok_or_else(|| null("lift"))?;
        if chart_dim.is_null() || ambient_dim.is_null() {
            return Err(null("out"));
        }
        *chart_dim = h.lift.chart.dim();
        *ambient_dim = h.lift.ambient.container_signature.dim();
        Ok(())
    })
}

/// Evaluates the lift at chart point `x` (`x_len` values) into `out`
/// (`out_len` values, at least the container dimension).
///
/// # Safety
/// `x` points to `x_len` readable doubles and `out` to `out_len` writable ones.
#[no_mangle]
pub unsafe extern "C" fn marginal_lift_eval(
    lift: *const MarginalLift,
    x: *const f64,
    x_len: usize,
    out: *mut f64,
    out_len: usize,
) -> MarginalStatus {
    guard(|| {
        let h = lift.as_ref().ok_or_else(|| null("lift"))?;
        if x.is_null() || out.is_null() {
            return Err(null("buffer"));
        }
        if x_len != h.lift.chart.dim() {
            return Err(GeomError::Dimension {
                expected: h.lift.chart.dim(),
                found: x_len,
            }
            .into());
        }
        let y = h.lift.eval_at(std::slice::from_raw_parts(x, x_len))?;
        if out_len < y.len() {
            return Err(Fail(
                MarginalStatus::InvalidArgument,
                format!("output buffer holds {out_len} values, need {}", y.len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, y.len()).copy_from_slice(&y);
        Ok(())
    })
}

/// Verifies the lift on its grid.
///
/// # Safety
/// `lift` is null or a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn marginal_verify(lift: *const MarginalLift, out: *mut *mut MarginalReport) -> MarginalStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let h = lift.as_ref().ok_or_else(|| null("lift"))?;
        let report = assemble_report(&h.lift, &h.tol)?;
        *out = Box::into_raw(Box::new(MarginalReport { report }));
        Ok(())
    })
}

/// # Safety
/// `report` is null or a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn marginal_report_verdict(report: *const MarginalReport, out: *mut MarginalVerdict) -> MarginalStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.report.verdict().into();
        Ok(())
    })
}

/// Largest normalized null residual over the grid; NaN when no sample succeeded.
///
/// # Safety
/// `report` is null or a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn marginal_report_max_null_residual(report: *const MarginalReport, out: *mut f64) -> MarginalStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.report.summary.null_residual.map_or(f64::NAN, |s| s.max);
        Ok(())
    })
}

/// Sample and excluded-sample counts.
///
/// # Safety
/// `report` is null or a live handle; the out pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn marginal_report_counts(report: *const MarginalReport, samples: *mut usize, excluded: *mut usize) -> MarginalStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if samples.is_null() || excluded.is_null() {
            return Err(null("out"));
        }
        *samples = r.report.summary.samples;
        *excluded = r.report.summary.excluded;
        Ok(())
    })
}

/// # Safety
/// `lift` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn marginal_lift_free(lift: *mut MarginalLift) {
    if !lift.is_null() {
        drop(Box::from_raw(lift));
    }
}

/// # Safety
/// `report` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn marginal_report_free(report: *mut MarginalReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
