//! C ABI for `kantorovich-gruss`.
//!
//! Conventions:
//!
//! - Every fallible function returns a [`KgStatus`] and writes its result
//!   through an out-pointer. Out-pointers are left untouched on failure.
//! - Objects are opaque handles created by `kg_*_new` functions and released
//!   with the matching `kg_*_free`. Passing NULL to a `free` function is a
//!   no-op.
//! - After a non-OK status, [`kg_last_error_message`] returns a description
//!   of the failure. The text belongs to the library and stays valid until
//!   the next failing call on the same thread.
//! - Panics never cross the boundary; they are reported as
//!   [`KgStatus::Panic`].
//!
//! Handles are immutable after construction and may be shared between
//! threads for reading.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use kantorovich_gruss::{
    self as kg, BoundCheckRecord, EstimateConfig, GridSpec, GrussEstimator, NormMode, OmegaMode,
    QuadratureRule, RateFit, SmoothFunction, SweepPoint,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownFunction = 3,
    OutOfDomain = 4,
    PairTooClose = 5,
    IndexOutOfRange = 6,
    InvalidArgument = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KgOmegaMode {
    Lower = 0,
    Upper = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KgNormMode {
    GridLower = 0,
    AnalyticUpper = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KgResidual {
    /// `sup |n[K_n(fg) - K_n f K_n g] - x(1-x) f'g'|`
    Gv = 0,
    /// `sup |K_n(fg) - K_n f K_n g|`
    Gruss = 1,
    /// `sup |n F_n(x) - x(1-x)|`; the function arguments are ignored.
    Nfn = 2,
}

/// One inequality check.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KgRecord {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Least-squares fit of `log v = intercept + slope log n`. When
/// `identically_zero` is true the other fields are zero.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KgRateFit {
    pub identically_zero: bool,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// A corpus function, or a product of two.
pub struct KgFunction {
    inner: SmoothFunction,
    name: CString,
}

/// Grid, modulus and norm settings plus the cell quadrature rule.
pub struct KgEstimator {
    rule: QuadratureRule,
    grid: GridSpec,
    config: EstimateConfig,
}

impl KgEstimator {
    fn estimator(&self) -> GrussEstimator<'_> {
        GrussEstimator::new(&self.rule, self.grid, self.config)
    }
}

/// Records of a sweep, in `(x, y)` grid order.
pub struct KgReport {
    records: Vec<BoundCheckRecord>,
    skipped: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(KgStatus, String);

impl From<kg::Error> for Failure {
    fn from(e: kg::Error) -> Self {
        let status = match e {
            kg::Error::UnknownFunction(_) => KgStatus::UnknownFunction,
            kg::Error::OutOfDomain { .. } => KgStatus::OutOfDomain,
            kg::Error::PairTooClose { .. } => KgStatus::PairTooClose,
            kg::Error::BasisIndex { .. } => KgStatus::IndexOutOfRange,
            _ => KgStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(KgStatus::NullPointer, format!("`{what}` is NULL"))
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> KgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => KgStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("internal panic: {message}"));
            KgStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed_function(inner: SmoothFunction) -> Result<*mut KgFunction, Failure> {
    let name = CString::new(inner.name())
        .map_err(|_| Failure(KgStatus::InvalidArgument, "name contains NUL".into()))?;
    Ok(Box::into_raw(Box::new(KgFunction { inner, name })))
}

/// Description of the last failure on this thread, or an empty string.
#[no_mangle]
pub extern "C" fn kg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Looks up a corpus function by name (`"exp"`, `"e_2"`, `"1/(1+x)"`, ...).
#[no_mangle]
pub unsafe extern "C" fn kg_function_new(
    name: *const c_char,
    out: *mut *mut KgFunction,
) -> KgStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|e| Failure(KgStatus::InvalidUtf8, e.to_string()))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = kg::lookup(name)?;
        put(out, boxed_function(f)?, "out")
    })
}

/// The pointwise product `f g`, with derivatives from the Leibniz rule.
#[no_mangle]
pub unsafe extern "C" fn kg_function_product(
    f: *const KgFunction,
    g: *const KgFunction,
    out: *mut *mut KgFunction,
) -> KgStatus {
    guard(|| {
        let (f, g) = (get(f, "f")?, get(g, "g")?);
        if out.is_null() {
            return Err(null("out"));
        }
        put(
            out,
            boxed_function(SmoothFunction::product(&f.inner, &g.inner))?,
            "out",
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn kg_function_free(f: *mut KgFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Canonical name, owned by the handle.
#[no_mangle]
pub unsafe extern "C" fn kg_function_name(f: *const KgFunction) -> *const c_char {
    match f.as_ref() {
        Some(f) => f.name.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Derivative of order 0 to 3 at `x`.
#[no_mangle]
pub unsafe extern "C" fn kg_function_eval(
    f: *const KgFunction,
    order: u32,
    x: f64,
    out: *mut f64,
) -> KgStatus {
    guard(|| {
        let f = get(f, "f")?;
        if order as usize > kg::function_space::MAX_DERIVATIVE {
            return Err(Failure(
                KgStatus::InvalidArgument,
                format!("derivative order {order} exceeds 3"),
            ));
        }
        put(out, f.inner.derivative(order as usize, x), "out")
    })
}

/// Analytic upper bound on `sup |f^(order)|` over `[0, 1]`.
#[no_mangle]
pub unsafe extern "C" fn kg_function_norm_bound(
    f: *const KgFunction,
    order: u32,
    out: *mut f64,
) -> KgStatus {
    guard(|| {
        let f = get(f, "f")?;
        if order as usize > kg::function_space::MAX_DERIVATIVE {
            return Err(Failure(
                KgStatus::InvalidArgument,
                format!("order {order} exceeds 3"),
            ));
        }
        put(out, f.inner.norm_bound(order as usize), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn kg_divided_difference(
    f: *const KgFunction,
    x: f64,
    y: f64,
    pair_floor: f64,
    out: *mut f64,
) -> KgStatus {
    guard(|| {
        let f = get(f, "f")?;
        put(
            out,
            kg::divided_difference(&f.inner, x, y, pair_floor)?,
            "out",
        )
    })
}

/// `C(n,k) x^k (1-x)^(n-k)`.
#[no_mangle]
pub unsafe extern "C" fn kg_bernstein_basis(n: usize, k: usize, x: f64, out: *mut f64) -> KgStatus {
    guard(|| put(out, kg::bernstein_basis(n, k, x)?, "out"))
}

/// `K_n(f)(x)` with the default 8-point Gauss-Legendre cell rule.
#[no_mangle]
pub unsafe extern "C" fn kg_kantorovich_apply(
    f: *const KgFunction,
    n: usize,
    x: f64,
    out: *mut f64,
) -> KgStatus {
    guard(|| {
        let f = get(f, "f")?;
        let v = kg::kantorovich_apply(&f.inner, n, x, &QuadratureRule::default())?;
        put(out, v.value, "out")
    })
}

/// Closed-form `K_n(e_j)(x)` for `j` in 0..=2.
#[no_mangle]
pub unsafe extern "C" fn kg_moment_exact(j: u32, n: usize, x: f64, out: *mut f64) -> KgStatus {
    guard(|| put(out, kg::kantorovich_moment_exact(j, n, x)?, "out"))
}

/// `F_n(x) = (x(1-x)(n-1) + 1/3) / (n+1)^2`.
#[no_mangle]
pub extern "C" fn kg_f_n(n: usize, x: f64) -> f64 {
    kg::f_n(n, x)
}

/// `E_n(x, y) = F_n(x) + (x-y)(1-2x) / (2(n+1))`.
#[no_mangle]
pub extern "C" fn kg_e_n(n: usize, x: f64, y: f64) -> f64 {
    kg::e_n(n, x, y)
}

/// Estimator with the given grid and estimate settings.
#[no_mangle]
pub unsafe extern "C" fn kg_estimator_new(
    grid_points: usize,
    pair_floor: f64,
    tau_check: f64,
    omega_mode: KgOmegaMode,
    norm_mode: KgNormMode,
    out: *mut *mut KgEstimator,
) -> KgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = GridSpec::new(grid_points, pair_floor)?;
        let omega = match omega_mode {
            KgOmegaMode::Lower => OmegaMode::Lower,
            KgOmegaMode::Upper => OmegaMode::Upper,
        };
        let norm = match norm_mode {
            KgNormMode::GridLower => NormMode::GridLower,
            KgNormMode::AnalyticUpper => NormMode::AnalyticUpper,
        };
        let config = EstimateConfig::new(tau_check, omega, norm)?;
        let est = KgEstimator {
            rule: QuadratureRule::default(),
            grid,
            config,
        };
        put(out, Box::into_raw(Box::new(est)), "out")
    })
}

/// 33-point grid, pair floor 1e-3, tau 1e-9, lower moduli, grid norms.
#[no_mangle]
pub unsafe extern "C" fn kg_estimator_default(out: *mut *mut KgEstimator) -> KgStatus {
    kg_estimator_new(
        GridSpec::VERIFICATION_POINTS,
        GridSpec::DEFAULT_PAIR_FLOOR,
        EstimateConfig::DEFAULT_TAU,
        KgOmegaMode::Lower,
        KgNormMode::GridLower,
        out,
    )
}

#[no_mangle]
pub unsafe extern "C" fn kg_estimator_free(est: *mut KgEstimator) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

#[derive(Clone, Copy)]
enum Side {
    TheoremLhs,
    TheoremRhs,
    PerturbedLhs,
    PerturbedRhs,
}

#[allow(clippy::too_many_arguments)]
unsafe fn side(
    est: *const KgEstimator,
    f: *const KgFunction,
    g: *const KgFunction,
    n: usize,
    x: f64,
    y: f64,
    out: *mut f64,
    which: Side,
) -> KgStatus {
    guard(|| {
        let (est, f, g) = (get(est, "est")?, get(f, "f")?, get(g, "g")?);
        let (e, f, g) = (est.estimator(), &f.inner, &g.inner);
        let v = match which {
            Side::TheoremLhs => e.theorem_lhs(f, g, n, x, y),
            Side::TheoremRhs => e.theorem_rhs(f, g, n, x, y),
            Side::PerturbedLhs => e.perturbed_gruss_lhs(f, g, n, x, y),
            Side::PerturbedRhs => e.perturbed_gruss_rhs(f, g, n, x, y),
        }?;
        put(out, v, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn kg_theorem_lhs(
    est: *const KgEstimator,
    f: *const KgFunction,
    g: *const KgFunction,
    n: usize,
    x: f64,
    y: f64,
    out: *mut f64,
) -> KgStatus {
    side(est, f, g, n, x, y, out, Side::TheoremLhs)
}

#[no_mangle]
pub unsafe extern "C" fn kg_theorem_rhs(
    est: *const KgEstimator,
    f: *const KgFunction,
    g: *const KgFunction,
    n: usize,
    x: f64,
    y: f64,
    out: *mut f64,
) -> KgStatus {
    side(est, f, g, n, x, y, out, Side::TheoremRhs)
}

#[no_mangle]
pub unsafe extern "C" fn kg_perturbed_lhs(
    est: *const KgEstimator,
    f: *const KgFunction,
    g: *const KgFunction,
    n: usize,
    x: f64,
    y: f64,
    out: *mut f64,
) -> KgStatus {
    side(est, f, g, n, x, y, out, Side::PerturbedLhs)
}

#[no_mangle]
pub unsafe extern "C" fn kg_perturbed_rhs(
    est: *const KgEstimator,
    f: *const KgFunction,
    g: *const KgFunction,
    n: usize,
    x: f64,
    y: f64,
    out: *mut f64,
) -> KgStatus {
    side(est, f, g, n, x, y, out, Side::PerturbedRhs)
}

unsafe fn sweep(
    est: *const KgEstimator,
    f: *const KgFunction,
    g: *const KgFunction,
    n: usize,
    perturbed: bool,
    out: *mut *mut KgReport,
) -> KgStatus {
    guard(|| {
        let (est, f, g) = (get(est, "est")?, get(f, "f")?, get(g, "g")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let e = est.estimator();
        let report = if perturbed {
            e.check_perturbed(&f.inner, &g.inner, n)?
        } else {
            e.check_theorem(&f.inner, &g.inner, n)?
        };
        let boxed = Box::new(KgReport {
            records: report.records,
            skipped: report.skipped,
        });
        put(out, Box::into_raw(boxed), "out")
    })
}

/// Checks the two-point estimate on every admissible grid pair.
#[no_mangle]
pub unsafe extern "C" fn kg_check_theorem(
    est: *const KgEstimator,
    f: *const KgFunction,
    g: *const KgFunction,
    n: usize,
    out: *mut *mut KgReport,
) -> KgStatus {
    sweep(est, f, g, n, false, out)
}

/// Checks the perturbed Grüss estimate on every admissible grid pair.
#[no_mangle]
pub unsafe extern "C" fn kg_check_perturbed(
    est: *const KgEstimator,
    f: *const KgFunction,
    g: *const KgFunction,
    n: usize,
    out: *mut *mut KgReport,
) -> KgStatus {
    sweep(est, f, g, n, true, out)
}

/// Checks `|K_n h - h| <= ||h'||/(2n) + 8||h''||/(9n)` at every grid point.
#[no_mangle]
pub unsafe extern "C" fn kg_ah_bound_check(
    est: *const KgEstimator,
    h: *const KgFunction,
    n: usize,
    out: *mut *mut KgReport,
) -> KgStatus {
    guard(|| {
        let (est, h) = (get(est, "est")?, get(h, "h")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let records = est.estimator().ah_bound_check(&h.inner, n)?;
        put(
            out,
            Box::into_raw(Box::new(KgReport {
                records,
                skipped: 0,
            })),
            "out",
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn kg_report_free(report: *mut KgReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of records; 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn kg_report_len(report: *const KgReport) -> usize {
    report.as_ref().map_or(0, |r| r.records.len())
}

/// Number of passing records; 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn kg_report_passes(report: *const KgReport) -> usize {
    report
        .as_ref()
        .map_or(0, |r| r.records.iter().filter(|c| c.pass).count())
}

/// Grid pairs left out because they were closer than the pair floor.
#[no_mangle]
pub unsafe extern "C" fn kg_report_skipped(report: *const KgReport) -> usize {
    report.as_ref().map_or(0, |r| r.skipped)
}

#[no_mangle]
pub unsafe extern "C" fn kg_report_get(
    report: *const KgReport,
    index: usize,
    out: *mut KgRecord,
) -> KgStatus {
    guard(|| {
        let report = get(report, "report")?;
        let r = report.records.get(index).ok_or_else(|| {
            Failure(
                KgStatus::IndexOutOfRange,
                format!("record {index} of {}", report.records.len()),
            )
        })?;
        let record = KgRecord {
            n: r.n,
            x: r.x,
            y: r.y,
            lhs: r.lhs,
            rhs: r.rhs,
            slack: r.slack,
            pass: r.pass,
        };
        put(out, record, "out")
    })
}

/// Smallest `rhs - lhs`; fails with `InvalidArgument` on an empty report.
#[no_mangle]
pub unsafe extern "C" fn kg_report_min_slack(report: *const KgReport, out: *mut f64) -> KgStatus {
    guard(|| {
        let report = get(report, "report")?;
        let min = report
            .records
            .iter()
            .map(|r| r.slack)
            .reduce(f64::min)
            .ok_or_else(|| Failure(KgStatus::InvalidArgument, "empty report".into()))?;
        put(out, min, "out")
    })
}

/// Sup over a uniform grid of `grid_points` points of the chosen residual.
#[no_mangle]
pub unsafe extern "C" fn kg_residual_sup(
    kind: KgResidual,
    f: *const KgFunction,
    g: *const KgFunction,
    n: usize,
    grid_points: usize,
    out: *mut f64,
) -> KgStatus {
    guard(|| {
        let grid = GridSpec::new(grid_points, GridSpec::DEFAULT_PAIR_FLOOR)?;
        let rule = QuadratureRule::default();
        let v = match kind {
            KgResidual::Nfn => kg::Residual::Nfn.evaluate(n, &grid, &rule)?,
            KgResidual::Gv | KgResidual::Gruss => {
                let (f, g) = (get(f, "f")?, get(g, "g")?);
                let residual = if kind == KgResidual::Gv {
                    kg::Residual::Gv(&f.inner, &g.inner)
                } else {
                    kg::Residual::Gruss(&f.inner, &g.inner)
                };
                residual.evaluate(n, &grid, &rule)?
            }
        };
        put(out, v, "out")
    })
}

/// Fits `log values[i]` against `log degrees[i]` over the positive values.
#[no_mangle]
pub unsafe extern "C" fn kg_fit_rate(
    degrees: *const usize,
    values: *const f64,
    len: usize,
    out: *mut KgRateFit,
) -> KgStatus {
    guard(|| {
        if degrees.is_null() {
            return Err(null("degrees"));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        let ns = std::slice::from_raw_parts(degrees, len);
        let vs = std::slice::from_raw_parts(values, len);
        let points: Vec<SweepPoint> = ns
            .iter()
            .zip(vs)
            .map(|(&n, &sup_value)| SweepPoint { n, sup_value })
            .collect();
        let fit = match kg::fit_rate(&points)? {
            RateFit::IdenticallyZero => KgRateFit {
                identically_zero: true,
                ..KgRateFit::default()
            },
            RateFit::PowerLaw {
                slope,
                intercept,
                r_squared,
            } => KgRateFit {
                identically_zero: false,
                slope,
                intercept,
                r_squared,
            },
        };
        put(out, fit, "out")
    })
}
