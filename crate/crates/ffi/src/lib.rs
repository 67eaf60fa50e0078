//! C ABI over the `connsum` pipeline.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free`. Every function returns a [`CsStatus`]; on failure the
//! message is available from [`cs_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_rational::Rational64;

use connsum::assembly::{
    assemble, choose_levels, discrete_growth_table, validate_model, DiscreteGrowth, Mode, ScheduleConfig,
};
use connsum::catalog::Catalog;
use connsum::growth::{check_bgd, normalize, same_growth_type, GrowthError, GrowthFunction, NormalizeConfig};
use connsum::pipeline::{self, PipelineError, RunConfig, Stage};
use connsum::simulate::{ball_volume_table, growth_certificate, to_metric_graph, Certificate, CertificateError};
use connsum::tree::build_tree;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NormalizationFailed = 3,
    /// Model validation failed or the certificate is not valid.
    VerificationFailed = 4,
    /// File or schema error while loading a run configuration.
    IoError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsMode {
    ConnectedSum = 0,
    LowerDimSpheres = 1,
}

/// A growth table.
pub struct CsGrowth(GrowthFunction);

/// A finished pipeline run: model, `z`, `w` and the certificate.
pub struct CsRun {
    z: DiscreteGrowth,
    w_numerators: Vec<u64>,
    w_denominator: u64,
    certificate: Certificate,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: CsStatus, msg: impl Into<String>) -> CsStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning a panic into [`CsStatus::Panic`].
fn guard(f: impl FnOnce() -> CsStatus) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(CsStatus::Panic, msg)
        }
    }
}

fn growth_status(e: &GrowthError) -> CsStatus {
    match e {
        GrowthError::NormalizationFailed(_) => CsStatus::NormalizationFailed,
        _ => CsStatus::InvalidArgument,
    }
}

unsafe fn copy_out(src: &[u64], buf: *mut u64, cap: usize, written: *mut usize) -> CsStatus {
    if written.is_null() {
        return fail(CsStatus::NullPointer, "written is null");
    }
    *written = src.len();
    if src.is_empty() {
        return CsStatus::Ok;
    }
    if buf.is_null() {
        return fail(CsStatus::NullPointer, "buffer is null");
    }
    if cap < src.len() {
        return fail(CsStatus::BufferTooSmall, format!("need {} slots, have {cap}", src.len()));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    CsStatus::Ok
}

/// The message of the last failed call on this thread. Valid until the next
/// call into the library on this thread; never null.
#[no_mangle]
pub extern "C" fn cs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static and NUL-terminated.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `len` values into a new growth table.
///
/// # Safety
/// `values` must point to `len` readable `uint64_t`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_growth_new(values: *const u64, len: usize, out: *mut *mut CsGrowth) -> CsStatus {
    guard(|| {
        if values.is_null() || out.is_null() {
            return fail(CsStatus::NullPointer, "values or out is null");
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        match GrowthFunction::new(v) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(CsGrowth(g)));
                CsStatus::Ok
            }
            Err(e) => fail(growth_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `g` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cs_growth_free(g: *mut CsGrowth) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of entries, `horizon + 1`; 0 for null.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_growth_len(g: *const CsGrowth) -> usize {
    g.as_ref().map_or(0, |g| g.0.values().len())
}

/// Copies the values into `buf`; `*written` receives the length even when
/// the buffer is too small.
///
/// # Safety
/// `g` must be a live handle; `buf` must hold `cap` writable slots.
#[no_mangle]
pub unsafe extern "C" fn cs_growth_values(
    g: *const CsGrowth,
    buf: *mut u64,
    cap: usize,
    written: *mut usize,
) -> CsStatus {
    guard(|| match g.as_ref() {
        None => fail(CsStatus::NullPointer, "growth handle is null"),
        Some(g) => copy_out(g.0.values(), buf, cap, written),
    })
}

/// Smallest bgd constant `L` of the table.
///
/// # Safety
/// `g` must be a live handle; `out_l` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_growth_check_bgd(g: *const CsGrowth, out_l: *mut u64) -> CsStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), out_l.is_null()) else {
            return fail(CsStatus::NullPointer, "null argument");
        };
        match check_bgd(&g.0) {
            Ok(l) => {
                *out_l = l;
                CsStatus::Ok
            }
            Err(e) => fail(CsStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Canonical form with `λ = lambda_num / lambda_den`; `*out_a` receives the
/// equivalence witness.
///
/// # Safety
/// `g` must be a live handle; `out` and `out_a` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_growth_normalize(
    g: *const CsGrowth,
    lambda_num: i64,
    lambda_den: i64,
    a_max: u64,
    out: *mut *mut CsGrowth,
    out_a: *mut u64,
) -> CsStatus {
    guard(|| {
        let Some(g) = g.as_ref() else {
            return fail(CsStatus::NullPointer, "growth handle is null");
        };
        if out.is_null() || out_a.is_null() {
            return fail(CsStatus::NullPointer, "out or out_a is null");
        }
        if lambda_den <= 0 {
            return fail(CsStatus::InvalidArgument, "lambda denominator must be positive");
        }
        let config = NormalizeConfig { lambda: Rational64::new(lambda_num, lambda_den), a_max, ..Default::default() };
        match normalize(&g.0, &config) {
            Ok(c) => {
                *out_a = c.witness().map_or(0, |w| w.a);
                *out = Box::into_raw(Box::new(CsGrowth(c.table().clone())));
                CsStatus::Ok
            }
            Err(e) => fail(growth_status(&e), e.to_string()),
        }
    })
}

/// Least witness `A ≤ a_max` that `f` and `h` have the same growth type, or
/// 0 in `*out_a` when none is found.
///
/// # Safety
/// `f` and `h` must be live handles; `out_a` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_same_growth_type(
    f: *const CsGrowth,
    h: *const CsGrowth,
    a_max: u64,
    out_a: *mut u64,
) -> CsStatus {
    guard(|| {
        let (Some(f), Some(h), false) = (f.as_ref(), h.as_ref(), out_a.is_null()) else {
            return fail(CsStatus::NullPointer, "null argument");
        };
        match same_growth_type(&f.0, &h.0, a_max) {
            Ok(w) => {
                *out_a = w.map_or(0, |w| w.a);
                CsStatus::Ok
            }
            Err(e) => fail(CsStatus::InvalidArgument, e.to_string()),
        }
    })
}

fn verification(e: impl std::fmt::Display) -> (CsStatus, String) {
    (CsStatus::VerificationFailed, e.to_string())
}

fn certify(v: &GrowthFunction, mode: Mode, resolution: u64, a_max: u64) -> Result<CsRun, (CsStatus, String)> {
    let canonical = normalize(v, &NormalizeConfig { a_max, ..Default::default() })
        .map_err(|e| (growth_status(&e), e.to_string()))?;
    let catalog = match mode {
        Mode::ConnectedSum => Catalog::default_catalog(),
        Mode::LowerDimSpheres => Catalog::default_torus_catalog(),
    };
    let s = choose_levels(&canonical, &catalog, &ScheduleConfig { a_max, mode, ..Default::default() })
        .map_err(verification)?;
    let tree = build_tree(&canonical, &s).map_err(verification)?;
    let model = assemble(canonical.table(), &s, &tree, &catalog, mode).map_err(verification)?;
    let report = validate_model(&model);
    if !report.passed() {
        return Err(verification(report));
    }
    let g = to_metric_graph(&model, resolution);
    let alpha_max = canonical.horizon() * model.l() as usize;
    let certificate = match growth_certificate(canonical.table(), &model, &g, a_max, alpha_max) {
        Ok(c) => c,
        Err(CertificateError::Failed { certificate, .. }) => *certificate,
        Err(e) => return Err(verification(e)),
    };
    let z = discrete_growth_table(&model);
    let w = ball_volume_table(&g, z.horizon());
    Ok(CsRun { z, w_numerators: w.numerators, w_denominator: w.denominator, certificate })
}

fn finish(result: Result<CsRun, (CsStatus, String)>, out: *mut *mut CsRun) -> CsStatus {
    match result {
        Ok(run) => {
            let valid = run.certificate.is_valid();
            let text = run.certificate.to_string();
            // SAFETY: callers check `out` for null first
            unsafe { *out = Box::into_raw(Box::new(run)) };
            if valid {
                CsStatus::Ok
            } else {
                fail(CsStatus::VerificationFailed, text)
            }
        }
        Err((status, msg)) => fail(status, msg),
    }
}

/// Normalizes `v`, schedules and assembles it with the shipped catalog for
/// `mode`, and certifies the model.
///
/// `mode` is a [`CsMode`] value. A run whose certificate is not valid is
/// still returned in `*out` (with status [`CsStatus::VerificationFailed`])
/// so its witnesses can be read.
///
/// # Safety
/// `v` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_run_certify(
    v: *const CsGrowth,
    mode: i32,
    resolution: u64,
    a_max: u64,
    out: *mut *mut CsRun,
) -> CsStatus {
    guard(|| {
        let Some(v) = v.as_ref() else {
            return fail(CsStatus::NullPointer, "growth handle is null");
        };
        if out.is_null() {
            return fail(CsStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        if resolution == 0 || a_max == 0 {
            return fail(CsStatus::InvalidArgument, "resolution and a_max must be positive");
        }
        let mode = match mode {
            m if m == CsMode::ConnectedSum as i32 => Mode::ConnectedSum,
            m if m == CsMode::LowerDimSpheres as i32 => Mode::LowerDimSpheres,
            m => return fail(CsStatus::InvalidArgument, format!("unknown mode {m}")),
        };
        finish(certify(&v.0, mode, resolution, a_max), out)
    })
}

/// Runs the full pipeline from a TOML run configuration and writes every
/// artifact to its output directory, as `connsum certify --config` does.
///
/// # Safety
/// `config_path` must be a NUL-terminated UTF-8 path; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_run_config(config_path: *const c_char, out: *mut *mut CsRun) -> CsStatus {
    guard(|| {
        if config_path.is_null() || out.is_null() {
            return fail(CsStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(path) = CStr::from_ptr(config_path).to_str() else {
            return fail(CsStatus::InvalidArgument, "path is not UTF-8");
        };
        let result = RunConfig::from_toml_path(Path::new(path))
            .and_then(|cfg| pipeline::run(&cfg, Stage::Certify))
            .and_then(|run| pipeline::write_outputs(&run).map(|_| run));
        let result = match result {
            Ok(run) => {
                let z = run.z.expect("certified run has z");
                let w = run.w.expect("certified run has w");
                Ok(CsRun {
                    z,
                    w_numerators: w.numerators,
                    w_denominator: w.denominator,
                    certificate: run.certificate.expect("certified run has a certificate"),
                })
            }
            Err(e) => Err((pipeline_status(&e), e.to_string())),
        };
        finish(result, out)
    })
}

fn pipeline_status(e: &PipelineError) -> CsStatus {
    match e {
        PipelineError::Normalization(_) => CsStatus::NormalizationFailed,
        PipelineError::Verification(_) | PipelineError::Certificate(_) => CsStatus::VerificationFailed,
        PipelineError::Io(_) | PipelineError::Schema(_) => CsStatus::IoError,
    }
}

/// # Safety
/// `run` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cs_run_free(run: *mut CsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// 1 when the certificate is valid, 0 otherwise or for null.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_run_is_valid(run: *const CsRun) -> i32 {
    run.as_ref().map_or(0, |r| i32::from(r.certificate.is_valid()))
}

/// Witnesses `A₁` for `(v, z)` and `A₂` for `(z, w)`; 0 where none was found.
///
/// # Safety
/// `run` must be a live handle; `a1` and `a2` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_run_witnesses(run: *const CsRun, a1: *mut u64, a2: *mut u64) -> CsStatus {
    guard(|| {
        let (Some(run), false, false) = (run.as_ref(), a1.is_null(), a2.is_null()) else {
            return fail(CsStatus::NullPointer, "null argument");
        };
        *a1 = run.certificate.a1.map_or(0, |w| w.a);
        *a2 = run.certificate.a2.map_or(0, |w| w.a);
        CsStatus::Ok
    })
}

/// The discrete growth `z(0), …, z(horizon)` on the length index.
///
/// # Safety
/// `run` must be a live handle; `buf` must hold `cap` writable slots.
#[no_mangle]
pub unsafe extern "C" fn cs_run_z(run: *const CsRun, buf: *mut u64, cap: usize, written: *mut usize) -> CsStatus {
    guard(|| match run.as_ref() {
        None => fail(CsStatus::NullPointer, "run handle is null"),
        Some(r) => copy_out(&r.z.values, buf, cap, written),
    })
}

/// Ball volumes as numerators over one shared denominator:
/// `w(α) = buf[α] / *denominator`.
///
/// # Safety
/// `run` must be a live handle; `buf` must hold `cap` writable slots and
/// `denominator` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_run_w(
    run: *const CsRun,
    buf: *mut u64,
    cap: usize,
    written: *mut usize,
    denominator: *mut u64,
) -> CsStatus {
    guard(|| {
        let (Some(r), false) = (run.as_ref(), denominator.is_null()) else {
            return fail(CsStatus::NullPointer, "null argument");
        };
        *denominator = r.w_denominator;
        copy_out(&r.w_numerators, buf, cap, written)
    })
}

/// The certificate in its `key=value` text form, owned by the run.
///
/// # Safety
/// `run` must be a live handle. The returned string is freed with
/// [`cs_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cs_run_certificate_text(run: *const CsRun) -> *mut c_char {
    run.as_ref().and_then(|r| CString::new(r.certificate.to_string()).ok()).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
