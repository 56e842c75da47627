//! C ABI for `qreservoir`.
//!
//! Objects are opaque handles created by `qr_*_new`/`qr_*_load`-style calls
//! and released with the matching `qr_*_free`. Every fallible call returns a
//! [`QrStatus`]; on failure the message is available from
//! [`qr_last_error_message`] on the same thread. Strings returned by the
//! library are released with [`qr_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qreservoir::benchmarks::{gen_input, gen_narma, InputSignalSpec, NarmaSpec};
use qreservoir::circuit::{export_qasm, SubsystemLayout};
use qreservoir::engine::{FeatureSeries, Reservoir, ReservoirConfig, Shots, Window};
use qreservoir::noise::{load_noise_profile, DeviceNoiseProfile};
use qreservoir::readout::{fit_regression, nmse, predict_scalar, ReadoutWeights};
use qreservoir::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Numeric = 4,
    Io = 5,
    Parse = 6,
    Capacity = 7,
    Panic = 8,
}

fn status_of(e: &Error) -> QrStatus {
    match e {
        Error::Context { source, .. } => status_of(source),
        Error::Dimension(_) | Error::Length(_) | Error::Window(_) | Error::QubitIndex { .. } => {
            QrStatus::Dimension
        }
        Error::NonFinite(_)
        | Error::UndefinedNormalization(_)
        | Error::Divergence { .. }
        | Error::CorruptedState(_) => QrStatus::Numeric,
        Error::Io { .. } => QrStatus::Io,
        Error::Parse(_) => QrStatus::Parse,
        Error::Capacity(_) => QrStatus::Capacity,
        _ => QrStatus::InvalidArgument,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (QrStatus, String)>) -> QrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QrStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QrStatus::Panic
        }
    }
}

fn fail(e: Error) -> (QrStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QrStatus, String) {
    (QrStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], (QrStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn slice_mut<'a>(data: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], (QrStatus, String)> {
    if len == 0 {
        return Ok(&mut []);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(data, len))
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, (QrStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (QrStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn copy_out(src: &[f64], dst: &mut [f64]) -> Result<(), (QrStatus, String)> {
    if src.len() != dst.len() {
        return Err((
            QrStatus::Dimension,
            format!("output buffer holds {} values, {} needed", dst.len(), src.len()),
        ));
    }
    dst.copy_from_slice(src);
    Ok(())
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library and valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qr_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version"),
    };
    VERSION.as_ptr()
}

/// Releases a string returned by the library.
#[no_mangle]
pub unsafe extern "C" fn qr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Device noise profile.
pub struct QrNoiseProfile {
    inner: DeviceNoiseProfile,
}

/// `spec` is a profile file path or `preset:<name>`; presets are sized to `num_qubits`.
#[no_mangle]
pub unsafe extern "C" fn qr_profile_load(
    spec: *const c_char,
    num_qubits: usize,
    out: *mut *mut QrNoiseProfile,
) -> QrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = text(spec, "spec")?;
        let inner = load_noise_profile(spec, num_qubits).map_err(fail)?;
        *out = Box::into_raw(Box::new(QrNoiseProfile { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qr_profile_free(profile: *mut QrNoiseProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Configured reservoir.
pub struct QrReservoir {
    inner: Reservoir,
}

/// Adjacent-pair reservoir on `num_qubits` qubits. `shots == 0` selects exact
/// expectations. A null `profile` means noiseless.
#[no_mangle]
pub unsafe extern "C" fn qr_reservoir_new(
    num_qubits: usize,
    scale: f64,
    profile: *const QrNoiseProfile,
    shots: u64,
    seed: u64,
    out: *mut *mut QrReservoir,
) -> QrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let profile = match profile.as_ref() {
            Some(p) => p.inner.clone(),
            None => DeviceNoiseProfile::noiseless(num_qubits),
        };
        let config = ReservoirConfig {
            layout: SubsystemLayout::adjacent(num_qubits).map_err(fail)?,
            scale,
            profile,
            shots: if shots == 0 { Shots::Exact } else { Shots::Finite(shots) },
            seed,
        };
        let inner = Reservoir::new(config).map_err(fail)?;
        *out = Box::into_raw(Box::new(QrReservoir { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qr_reservoir_free(reservoir: *mut QrReservoir) {
    if !reservoir.is_null() {
        drop(Box::from_raw(reservoir));
    }
}

/// Per-timestep feature rows.
pub struct QrFeatures {
    inner: FeatureSeries,
}

/// Drives the reservoir from `|+⟩` over `inputs[0..len]`.
#[no_mangle]
pub unsafe extern "C" fn qr_reservoir_run(
    reservoir: *const QrReservoir,
    inputs: *const f64,
    len: usize,
    out: *mut *mut QrFeatures,
) -> QrStatus {
    guard(|| {
        let reservoir = reservoir.as_ref().ok_or_else(|| null("reservoir"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inputs = slice(inputs, len, "inputs")?;
        let inner = reservoir.inner.run(inputs).map_err(fail)?;
        *out = Box::into_raw(Box::new(QrFeatures { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qr_features_timesteps(features: *const QrFeatures) -> usize {
    features.as_ref().map_or(0, |f| f.inner.timesteps())
}

#[no_mangle]
pub unsafe extern "C" fn qr_features_width(features: *const QrFeatures) -> usize {
    features.as_ref().map_or(0, |f| f.inner.width())
}

/// Copies the row-major `timesteps × width` values into `buf`.
#[no_mangle]
pub unsafe extern "C" fn qr_features_copy(features: *const QrFeatures, buf: *mut f64, len: usize) -> QrStatus {
    guard(|| {
        let features = features.as_ref().ok_or_else(|| null("features"))?;
        copy_out(features.inner.values(), slice_mut(buf, len, "buf")?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn qr_features_free(features: *mut QrFeatures) {
    if !features.is_null() {
        drop(Box::from_raw(features));
    }
}

/// Trained linear readout.
pub struct QrWeights {
    inner: ReadoutWeights,
}

/// Fits on feature rows `first..=last` (1-based) against `targets`, which
/// must have one entry per timestep of `features`.
#[no_mangle]
pub unsafe extern "C" fn qr_fit_regression(
    features: *const QrFeatures,
    targets: *const f64,
    len: usize,
    first: usize,
    last: usize,
    out: *mut *mut QrWeights,
) -> QrStatus {
    guard(|| {
        let features = features.as_ref().ok_or_else(|| null("features"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let targets = slice(targets, len, "targets")?;
        if targets.len() != features.inner.timesteps() {
            return Err(fail(Error::Length(format!(
                "{} targets for {} timesteps",
                targets.len(),
                features.inner.timesteps()
            ))));
        }
        let window = Window::new(first, last);
        window.check(targets.len()).map_err(fail)?;
        let rows = features.inner.slice(window).map_err(fail)?;
        let inner = fit_regression(&rows, &targets[window.range()]).map_err(fail)?;
        *out = Box::into_raw(Box::new(QrWeights { inner }));
        Ok(())
    })
}

/// Writes one prediction per timestep of `features` into `buf`.
#[no_mangle]
pub unsafe extern "C" fn qr_predict(
    weights: *const QrWeights,
    features: *const QrFeatures,
    buf: *mut f64,
    len: usize,
) -> QrStatus {
    guard(|| {
        let weights = weights.as_ref().ok_or_else(|| null("weights"))?;
        let features = features.as_ref().ok_or_else(|| null("features"))?;
        let p = predict_scalar(&weights.inner, &features.inner).map_err(fail)?;
        copy_out(&p, slice_mut(buf, len, "buf")?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn qr_weights_free(weights: *mut QrWeights) {
    if !weights.is_null() {
        drop(Box::from_raw(weights));
    }
}

/// Triple-sine input with the given parameters; `len` samples from `t = origin`.
#[no_mangle]
pub unsafe extern "C" fn qr_gen_input(
    alpha_bar: f64,
    beta_bar: f64,
    gamma_bar: f64,
    period: f64,
    amplitude: f64,
    origin: i64,
    buf: *mut f64,
    len: usize,
) -> QrStatus {
    guard(|| {
        let spec = InputSignalSpec {
            alpha_bar,
            beta_bar,
            gamma_bar,
            period,
            amplitude,
            length: len,
            origin,
        };
        let u = gen_input(&spec).map_err(fail)?;
        copy_out(&u, slice_mut(buf, len, "buf")?)
    })
}

/// NARMA targets for `inputs`; `order == 2` selects the NARMA2 recurrence.
#[no_mangle]
pub unsafe extern "C" fn qr_gen_narma(order: usize, inputs: *const f64, len: usize, buf: *mut f64) -> QrStatus {
    guard(|| {
        let spec = if order == 2 {
            NarmaSpec::narma2()
        } else {
            NarmaSpec::narma(order)
        };
        let y = gen_narma(&spec, slice(inputs, len, "inputs")?).map_err(fail)?;
        copy_out(&y, slice_mut(buf, len, "buf")?)
    })
}

/// NMSE over the 1-based window `first..=last`.
#[no_mangle]
pub unsafe extern "C" fn qr_nmse(
    predictions: *const f64,
    targets: *const f64,
    len: usize,
    first: usize,
    last: usize,
    out: *mut f64,
) -> QrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = slice(predictions, len, "predictions")?;
        let y = slice(targets, len, "targets")?;
        *out = nmse(p, y, Window::new(first, last)).map_err(fail)?;
        Ok(())
    })
}

/// OpenQASM 2.0 program for `inputs` on an adjacent-pair layout. Release the
/// string with [`qr_string_free`].
#[no_mangle]
pub unsafe extern "C" fn qr_export_qasm(
    inputs: *const f64,
    len: usize,
    num_qubits: usize,
    scale: f64,
    out: *mut *mut c_char,
) -> QrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let layout = SubsystemLayout::adjacent(num_qubits).map_err(fail)?;
        let program = export_qasm(slice(inputs, len, "inputs")?, &layout, scale).map_err(fail)?;
        *out = CString::new(program).expect("QASM has no NUL").into_raw();
        Ok(())
    })
}
