//! C ABI over the sizing engine.
//!
//! Every fallible call returns an [`LdovcoStatus`]; on failure the message is
//! kept per thread and read with [`ldovco_last_error`]. Problems live behind
//! an opaque handle that the caller frees with [`ldovco_problem_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ldovco::cli;
use ldovco::flows::{Flow, FlowSetup};
use ldovco::models::testbench::Mode;
use ldovco::optimizer::OptConfig;
use ldovco::sizing::{self, bundled, PerfMetrics};
use ldovco::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdovcoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Evaluation = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdovcoMode {
    Ideal = 0,
    Coupled = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdovcoFlow {
    Codesign = 0,
    Sequential = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdovcoBundledPoint {
    Codesign = 0,
    Sequential = 1,
}

/// Performance of one design, SI units, phase noise in dBc/Hz.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LdovcoMetrics {
    pub f0: f64,
    pub pn100k: f64,
    pub pn1m: f64,
    pub pn10m: f64,
    pub pdyn: f64,
    pub psr_max: f64,
    pub pm: f64,
    pub vdd_max: f64,
    pub startup_margin: f64,
    pub fom: f64,
}

impl From<&PerfMetrics> for LdovcoMetrics {
    fn from(m: &PerfMetrics) -> Self {
        LdovcoMetrics {
            f0: m.f0,
            pn100k: m.pn100k,
            pn1m: m.pn1m,
            pn10m: m.pn10m,
            pdyn: m.pdyn,
            psr_max: m.psr_max,
            pm: m.pm,
            vdd_max: m.vdd_max,
            startup_margin: m.startup_margin,
            fom: m.fom,
        }
    }
}

/// Opaque sizing problem with its behavioral constants.
pub struct LdovcoProblem {
    setup: FlowSetup,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LdovcoStatus {
    match e {
        Error::InvalidArgument(_) | Error::MissingVariable(_) => LdovcoStatus::InvalidArgument,
        Error::Parse { .. } => LdovcoStatus::Parse,
        Error::Evaluation { .. } | Error::Surrogate(_) => LdovcoStatus::Evaluation,
        Error::Io { .. } => LdovcoStatus::Io,
    }
}

struct Fail(LdovcoStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

impl From<cli::Failure> for Fail {
    fn from(f: cli::Failure) -> Self {
        match f {
            cli::Failure::Input(e) | cli::Failure::Setup(e) => e.into(),
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(LdovcoStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LdovcoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LdovcoStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LdovcoStatus::Panic
        }
    }
}

unsafe fn problem_ref<'a>(p: *const LdovcoProblem) -> Result<&'a LdovcoProblem, Fail> {
    // SAFETY: caller passes a handle from ldovco_problem_* or null
    unsafe { p.as_ref() }.ok_or_else(|| null("problem"))
}

unsafe fn path_arg<'a>(p: *const c_char, what: &str) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null, caller guarantees a NUL-terminated string
    let s = unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail(LdovcoStatus::InvalidArgument, format!("`{what}` is not UTF-8")))?;
    Ok(Path::new(s))
}

unsafe fn point_arg(p: &LdovcoProblem, values: *const f64, len: usize) -> Result<sizing::DesignPoint, Fail> {
    if values.is_null() {
        return Err(null("values"));
    }
    let dim = p.setup.problem.full_space().dim();
    if len != dim {
        return Err(Fail(
            LdovcoStatus::InvalidArgument,
            format!("expected {dim} values, got {len}"),
        ));
    }
    // SAFETY: non-null, caller guarantees `len` readable doubles
    let v = unsafe { std::slice::from_raw_parts(values, len) };
    Ok(sizing::DesignPoint::new(v.to_vec()))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null, caller guarantees a writable T
    unsafe { out.write(v) };
    Ok(())
}

fn mode_of(m: LdovcoMode) -> Mode {
    match m {
        LdovcoMode::Ideal => Mode::IdealSupply,
        LdovcoMode::Coupled => Mode::Coupled,
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ldovco_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Figure of merit in dBc/Hz from frequency, offset (Hz), phase noise at
/// that offset (dBc/Hz) and power (W).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldovco_fom(f0: f64, delta_f: f64, pn: f64, pdyn: f64, out: *mut f64) -> LdovcoStatus {
    guard(|| {
        let v = sizing::fom(f0, delta_f, pn, pdyn)?;
        unsafe { write_out(out, v, "out") }
    })
}

/// Bundled 43-variable problem with default constants.
///
/// # Safety
/// `out` must be writable; the handle is freed with `ldovco_problem_free`.
#[no_mangle]
pub unsafe extern "C" fn ldovco_problem_bundled(out: *mut *mut LdovcoProblem) -> LdovcoStatus {
    guard(|| {
        let h = Box::into_raw(Box::new(LdovcoProblem {
            setup: FlowSetup::bundled(),
        }));
        unsafe { write_out(out, h, "out") }
    })
}

/// Problem loaded from a problem file and an optional constants file
/// (`constants_path` may be null).
///
/// # Safety
/// Paths must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldovco_problem_load(
    problem_path: *const c_char,
    constants_path: *const c_char,
    out: *mut *mut LdovcoProblem,
) -> LdovcoStatus {
    guard(|| {
        let p = unsafe { path_arg(problem_path, "problem_path") }?;
        let c = if constants_path.is_null() {
            None
        } else {
            Some(unsafe { path_arg(constants_path, "constants_path") }?)
        };
        let setup = cli::load_setup(Some(p), c, ldovco::flows::DEFAULT_STAGE1_SHARE)?;
        let h = Box::into_raw(Box::new(LdovcoProblem { setup }));
        unsafe { write_out(out, h, "out") }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ldovco_problem_free(p: *mut LdovcoProblem) {
    if !p.is_null() {
        // SAFETY: allocated by Box::into_raw in this library
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Number of design variables.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ldovco_problem_dim(p: *const LdovcoProblem, out: *mut usize) -> LdovcoStatus {
    guard(|| {
        let p = unsafe { problem_ref(p) }?;
        unsafe { write_out(out, p.setup.problem.full_space().dim(), "out") }
    })
}

/// Number of corners the problem checks, nominal included.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ldovco_problem_corner_count(p: *const LdovcoProblem, out: *mut usize) -> LdovcoStatus {
    guard(|| {
        let p = unsafe { problem_ref(p) }?;
        unsafe { write_out(out, p.setup.problem.corners.len(), "out") }
    })
}

/// Copies one of the bundled reference designs into `values`.
///
/// # Safety
/// `values` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ldovco_bundled_point(which: LdovcoBundledPoint, values: *mut f64, len: usize) -> LdovcoStatus {
    guard(|| {
        let pt = match which {
            LdovcoBundledPoint::Codesign => bundled::codesign_point(),
            LdovcoBundledPoint::Sequential => bundled::sequential_point(),
        };
        if values.is_null() {
            return Err(null("values"));
        }
        if len != pt.len() {
            return Err(Fail(
                LdovcoStatus::InvalidArgument,
                format!("expected room for {} values, got {len}", pt.len()),
            ));
        }
        // SAFETY: non-null, caller guarantees `len` writable doubles
        unsafe { std::slice::from_raw_parts_mut(values, len) }.copy_from_slice(&pt.values);
        Ok(())
    })
}

/// Evaluates a design at one corner (index into the problem's corner list).
///
/// # Safety
/// `values` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldovco_evaluate(
    p: *const LdovcoProblem,
    values: *const f64,
    len: usize,
    mode: LdovcoMode,
    corner: usize,
    out: *mut LdovcoMetrics,
) -> LdovcoStatus {
    guard(|| {
        let p = unsafe { problem_ref(p) }?;
        let pt = unsafe { point_arg(p, values, len) }?;
        let c = p.setup.problem.corners.get(corner).ok_or_else(|| {
            Fail(LdovcoStatus::InvalidArgument, format!("corner index {corner} out of range"))
        })?;
        let m = p.setup.testbench(mode_of(mode))?.evaluate_metrics(&pt, c)?;
        unsafe { write_out(out, LdovcoMetrics::from(&m), "out") }
    })
}

/// Worst case over all corners in coupled mode and its constraint violation.
///
/// # Safety
/// `values` must hold `len` doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldovco_evaluate_worst(
    p: *const LdovcoProblem,
    values: *const f64,
    len: usize,
    out: *mut LdovcoMetrics,
    violation: *mut f64,
) -> LdovcoStatus {
    guard(|| {
        let p = unsafe { problem_ref(p) }?;
        let pt = unsafe { point_arg(p, values, len) }?;
        let r = p.setup.evaluate_coupled(&pt)?;
        unsafe { write_out(out, LdovcoMetrics::from(&r.worst), "out") }?;
        unsafe { write_out(violation, r.violation, "violation") }
    })
}

/// Runs a sizing flow with default optimizer settings. The final design is
/// written to `values` (`len` = problem dimension) with its coupled
/// worst-case metrics and violation.
///
/// # Safety
/// `values` must hold `len` doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ldovco_run_flow(
    p: *const LdovcoProblem,
    flow: LdovcoFlow,
    seed: u64,
    budget: usize,
    values: *mut f64,
    len: usize,
    worst: *mut LdovcoMetrics,
    violation: *mut f64,
) -> LdovcoStatus {
    guard(|| {
        let p = unsafe { problem_ref(p) }?;
        if values.is_null() {
            return Err(null("values"));
        }
        let dim = p.setup.problem.full_space().dim();
        if len != dim {
            return Err(Fail(
                LdovcoStatus::InvalidArgument,
                format!("expected room for {dim} values, got {len}"),
            ));
        }
        let flow = match flow {
            LdovcoFlow::Codesign => Flow::Codesign,
            LdovcoFlow::Sequential => Flow::Sequential,
        };
        let r = p.setup.run(flow, &OptConfig::default().with(seed, budget))?;
        // SAFETY: non-null, caller guarantees `len` writable doubles
        unsafe { std::slice::from_raw_parts_mut(values, len) }.copy_from_slice(&r.final_point.values);
        unsafe { write_out(worst, LdovcoMetrics::from(&r.coupled.worst), "worst") }?;
        unsafe { write_out(violation, r.coupled.violation, "violation") }
    })
}
