//! C ABI over the cavlab toolkit.
//!
//! Conventions:
//! - Opaque handles (`CavGeometry`, `CavStage`, `CavTimeSeries`) are created
//!   by `*_new` constructors and released by the matching `*_free`; a null
//!   handle is always rejected, never dereferenced.
//! - Fallible calls return [`CavStatus`]; on failure the thread-local
//!   message behind [`cav_last_error_message`] describes the problem and
//!   stays valid until the next failing call on the same thread.
//! - Scalar convenience calls (`cav_transmission`, `cav_rms`, ...) return
//!   NaN on a null handle.
//!
//! The matching header is generated into `include/cavlab.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cavlab::error::Error;
use cavlab::fabry_perot::{
    self, CavityGeometry, DisplacementConversion, LockPoint, LockSide,
};
use cavlab::lockloop::{simulate_lock, LockConfig, NotchConfig};
use cavlab::mechanics::{
    apply_stage, cavity_noise, kick_train, transmissibility, KickMode, KickRecipe,
    OscillatorStage,
};
use cavlab::polariton::{
    cooperativity, normal_mode_splitting, polariton_eigenenergies, PolaritonModel,
};
use cavlab::signal_analysis::{peak_to_peak, rms};
use cavlab::timeseries::{SignalUnit, TimeSeries};

/// Status code of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CavStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Input validation failed; see `cav_last_error_message`.
    InvalidArgument = 2,
    /// A numerical procedure failed (fit divergence, loop instability).
    Numerical = 3,
}

/// Unit tag of a time series.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CavUnit {
    Meter = 0,
    Transmission = 1,
}

impl From<CavUnit> for SignalUnit {
    fn from(u: CavUnit) -> Self {
        match u {
            CavUnit::Meter => SignalUnit::Meter,
            CavUnit::Transmission => SignalUnit::Transmission,
        }
    }
}

/// Side of the resonance used for locking.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CavLockSide {
    Below = 0,
    Above = 1,
}

/// Side-of-fringe operating point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavLockPoint {
    pub offset_m: f64,
    pub transmission: f64,
    pub slope_per_m: f64,
}

impl From<LockPoint> for CavLockPoint {
    fn from(lp: LockPoint) -> Self {
        CavLockPoint {
            offset_m: lp.offset_m,
            transmission: lp.transmission,
            slope_per_m: lp.slope_per_m,
        }
    }
}

impl From<CavLockPoint> for LockPoint {
    fn from(lp: CavLockPoint) -> Self {
        LockPoint {
            offset_m: lp.offset_m,
            transmission: lp.transmission,
            slope_per_m: lp.slope_per_m,
        }
    }
}

/// One ring-down mode of the kick recipe.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavKickMode {
    pub frequency_hz: f64,
    pub amplitude_m: f64,
    pub decay_time_s: f64,
}

/// Servo parameters; `notch_hz <= 0` disables the notch.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavLockParams {
    pub kp: f64,
    pub ki_per_s: f64,
    pub actuator_cutoff_hz: f64,
    pub notch_hz: f64,
    pub notch_q: f64,
    pub sensor_noise_rms: f64,
    pub sample_rate_hz: f64,
    pub setpoint: CavLockPoint,
}

/// Opaque cavity geometry handle.
pub struct CavGeometry(CavityGeometry);
/// Opaque isolation-stage handle.
pub struct CavStage(OscillatorStage);
/// Opaque trace handle.
pub struct CavTimeSeries(TimeSeries);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).ok();
    });
}

fn status_of(err: &Error) -> CavStatus {
    match err.kind() {
        cavlab::ErrorKind::Validation => CavStatus::InvalidArgument,
        cavlab::ErrorKind::Numerical => CavStatus::Numerical,
    }
}

fn fail(err: Error) -> CavStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn null_pointer(what: &str) -> CavStatus {
    set_error(format!("null pointer: {what}"));
    CavStatus::NullPointer
}

/// Runs an FFI body, converting panics into `InvalidArgument` instead of
/// unwinding across the ABI boundary.
fn guarded(body: impl FnOnce() -> CavStatus) -> CavStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            CavStatus::InvalidArgument
        }
    }
}

/// Message of the last failing call on this thread, or null. Owned by the
/// library; valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cav_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ---------------------------------------------------------------------------
// geometry
// ---------------------------------------------------------------------------

/// Creates a cavity geometry handle.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_geometry_new(
    wavelength_m: f64,
    finesse: f64,
    mode_number: u64,
    peak_transmission: f64,
    out: *mut *mut CavGeometry,
) -> CavStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match CavityGeometry::new(wavelength_m, finesse, mode_number, peak_transmission) {
            Ok(g) => {
                unsafe { *out = Box::into_raw(Box::new(CavGeometry(g))) };
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a geometry handle (null is a no-op).
///
/// # Safety
/// `geom` must be null or a pointer from `cav_geometry_new`.
#[no_mangle]
pub unsafe extern "C" fn cav_geometry_free(geom: *mut CavGeometry) {
    if !geom.is_null() {
        drop(unsafe { Box::from_raw(geom) });
    }
}

/// Fringe transmission at mirror separation `z_m`; NaN on a null handle.
///
/// # Safety
/// `geom` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cav_transmission(geom: *const CavGeometry, z_m: f64) -> f64 {
    match unsafe { geom.as_ref() } {
        Some(g) => fabry_perot::transmission(z_m, &g.0),
        None => f64::NAN,
    }
}

/// Fringe slope dT/dz at `z_m` in 1/m; NaN on a null handle.
///
/// # Safety
/// `geom` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cav_transmission_slope(geom: *const CavGeometry, z_m: f64) -> f64 {
    match unsafe { geom.as_ref() } {
        Some(g) => fabry_perot::transmission_slope(z_m, &g.0),
        None => f64::NAN,
    }
}

/// Spatial-equivalent linewidth lambda / (2 F).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_spatial_linewidth(
    finesse: f64,
    wavelength_m: f64,
    out: *mut f64,
) -> CavStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match fabry_perot::finesse_to_spatial_linewidth(finesse, wavelength_m) {
            Ok(v) => {
                unsafe { *out = v };
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Finds the maximum-slope lock point on the chosen fringe side.
///
/// # Safety
/// `geom` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cav_find_lock_point(
    geom: *const CavGeometry,
    side: CavLockSide,
    out: *mut CavLockPoint,
) -> CavStatus {
    guarded(|| {
        let Some(g) = (unsafe { geom.as_ref() }) else {
            return null_pointer("geom");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let rust_side = match side {
            CavLockSide::Below => LockSide::BelowResonance,
            CavLockSide::Above => LockSide::AboveResonance,
        };
        unsafe { *out = fabry_perot::find_lock_point(&g.0, rust_side).into() };
        CavStatus::Ok
    })
}

/// Fits the transmission fringe to `(z, transmission)` samples.
///
/// # Safety
/// `z_m`/`transmission` must point to `len` doubles; the `out_*` pointers
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn cav_fit_resonance(
    z_m: *const f64,
    transmission: *const f64,
    len: usize,
    wavelength_m: f64,
    out_peak_transmission: *mut f64,
    out_resonance_length_m: *mut f64,
    out_finesse: *mut f64,
    out_rms_residual: *mut f64,
) -> CavStatus {
    guarded(|| {
        if z_m.is_null() || transmission.is_null() {
            return null_pointer("samples");
        }
        if out_peak_transmission.is_null()
            || out_resonance_length_m.is_null()
            || out_finesse.is_null()
            || out_rms_residual.is_null()
        {
            return null_pointer("out");
        }
        let zs = unsafe { std::slice::from_raw_parts(z_m, len) };
        let ts = unsafe { std::slice::from_raw_parts(transmission, len) };
        let samples: Vec<(f64, f64)> = zs.iter().copied().zip(ts.iter().copied()).collect();
        match fabry_perot::fit_resonance(&samples, wavelength_m) {
            Ok(fit) => {
                unsafe {
                    *out_peak_transmission = fit.peak_transmission;
                    *out_resonance_length_m = fit.resonance_length_m;
                    *out_finesse = fit.finesse;
                    *out_rms_residual = fit.rms_residual;
                }
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// stages
// ---------------------------------------------------------------------------

/// Creates an isolation stage from resonance frequency and damping ratio.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_stage_new(
    resonance_hz: f64,
    damping_ratio: f64,
    out: *mut *mut CavStage,
) -> CavStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match OscillatorStage::new(resonance_hz, damping_ratio, "stage") {
            Ok(s) => {
                unsafe { *out = Box::into_raw(Box::new(CavStage(s))) };
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Creates the spring-table stage from its mechanical parameters.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_stage_from_spring(
    spring_constant_n_per_m: f64,
    n_springs: u32,
    payload_kg: f64,
    damping_ratio: f64,
    out: *mut *mut CavStage,
) -> CavStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match OscillatorStage::from_spring(
            spring_constant_n_per_m,
            n_springs,
            payload_kg,
            damping_ratio,
            "spring table",
        ) {
            Ok(s) => {
                unsafe { *out = Box::into_raw(Box::new(CavStage(s))) };
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a stage handle (null is a no-op).
///
/// # Safety
/// `stage` must be null or a pointer from a stage constructor.
#[no_mangle]
pub unsafe extern "C" fn cav_stage_free(stage: *mut CavStage) {
    if !stage.is_null() {
        drop(unsafe { Box::from_raw(stage) });
    }
}

/// Stage resonance frequency in Hz; NaN on a null handle.
///
/// # Safety
/// `stage` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cav_stage_resonance_hz(stage: *const CavStage) -> f64 {
    match unsafe { stage.as_ref() } {
        Some(s) => s.0.resonance_hz(),
        None => f64::NAN,
    }
}

/// Base-excitation transmissibility |H(f)|; NaN on a null handle.
///
/// # Safety
/// `stage` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cav_stage_transmissibility(stage: *const CavStage, f_hz: f64) -> f64 {
    match unsafe { stage.as_ref() } {
        Some(s) => transmissibility(&s.0, f_hz),
        None => f64::NAN,
    }
}

// ---------------------------------------------------------------------------
// time series
// ---------------------------------------------------------------------------

/// Creates a trace from a sample buffer.
///
/// # Safety
/// `values` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cav_timeseries_new(
    dt_s: f64,
    values: *const f64,
    len: usize,
    unit: CavUnit,
    out: *mut *mut CavTimeSeries,
) -> CavStatus {
    guarded(|| {
        if values.is_null() {
            return null_pointer("values");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let vals = unsafe { std::slice::from_raw_parts(values, len) }.to_vec();
        match TimeSeries::new(dt_s, vals, unit.into()) {
            Ok(ts) => {
                unsafe { *out = Box::into_raw(Box::new(CavTimeSeries(ts))) };
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a trace handle (null is a no-op).
///
/// # Safety
/// `ts` must be null or a pointer from a trace-producing call.
#[no_mangle]
pub unsafe extern "C" fn cav_timeseries_free(ts: *mut CavTimeSeries) {
    if !ts.is_null() {
        drop(unsafe { Box::from_raw(ts) });
    }
}

/// Number of samples; 0 on a null handle.
///
/// # Safety
/// `ts` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cav_timeseries_len(ts: *const CavTimeSeries) -> usize {
    unsafe { ts.as_ref() }.map_or(0, |t| t.0.len())
}

/// Sample interval in seconds; NaN on a null handle.
///
/// # Safety
/// `ts` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cav_timeseries_dt_s(ts: *const CavTimeSeries) -> f64 {
    unsafe { ts.as_ref() }.map_or(f64::NAN, |t| t.0.dt_s())
}

/// Copies the samples into `buf` (capacity `cap` doubles).
///
/// # Safety
/// `ts` must be a valid handle and `buf` must point to `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn cav_timeseries_copy_values(
    ts: *const CavTimeSeries,
    buf: *mut f64,
    cap: usize,
) -> CavStatus {
    guarded(|| {
        let Some(t) = (unsafe { ts.as_ref() }) else {
            return null_pointer("ts");
        };
        if buf.is_null() {
            return null_pointer("buf");
        }
        if cap < t.0.len() {
            set_error(format!(
                "buffer capacity {cap} is smaller than trace length {}",
                t.0.len()
            ));
            return CavStatus::InvalidArgument;
        }
        let dst = unsafe { std::slice::from_raw_parts_mut(buf, t.0.len()) };
        dst.copy_from_slice(t.0.values());
        CavStatus::Ok
    })
}

/// Mean-subtracted rms of a trace; NaN on a null handle.
///
/// # Safety
/// `ts` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cav_rms(ts: *const CavTimeSeries) -> f64 {
    unsafe { ts.as_ref() }.map_or(f64::NAN, |t| rms(&t.0))
}

/// Global peak-to-peak excursion of a trace; NaN on a null handle.
///
/// # Safety
/// `ts` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn cav_peak_to_peak(ts: *const CavTimeSeries) -> f64 {
    unsafe { ts.as_ref() }
        .and_then(|t| peak_to_peak(&t.0, None).ok())
        .unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// synthesis and chain
// ---------------------------------------------------------------------------

/// Synthesizes a cold-plate kick train.
///
/// # Safety
/// `modes` must point to `n_modes` entries; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cav_kick_train(
    period_s: f64,
    modes: *const CavKickMode,
    n_modes: usize,
    broadband_floor_m_per_sqrt_hz: f64,
    seed: u64,
    duration_s: f64,
    dt_s: f64,
    out: *mut *mut CavTimeSeries,
) -> CavStatus {
    guarded(|| {
        if modes.is_null() && n_modes > 0 {
            return null_pointer("modes");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let mode_slice = if n_modes == 0 {
            &[]
        } else {
            unsafe { std::slice::from_raw_parts(modes, n_modes) }
        };
        let recipe = KickRecipe {
            period_s,
            modes: mode_slice
                .iter()
                .map(|m| KickMode {
                    frequency_hz: m.frequency_hz,
                    amplitude_m: m.amplitude_m,
                    decay_time_s: m.decay_time_s,
                })
                .collect(),
            broadband_floor_m_per_sqrt_hz,
            seed,
        };
        match kick_train(&recipe, duration_s, dt_s) {
            Ok(ts) => {
                unsafe { *out = Box::into_raw(Box::new(CavTimeSeries(ts))) };
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Passes a trace through one isolation stage.
///
/// # Safety
/// All handles must be valid; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_apply_stage(
    input: *const CavTimeSeries,
    stage: *const CavStage,
    out: *mut *mut CavTimeSeries,
) -> CavStatus {
    guarded(|| {
        let (Some(ts), Some(st)) = (unsafe { input.as_ref() }, unsafe { stage.as_ref() }) else {
            return null_pointer("input/stage");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match apply_stage(&ts.0, &st.0) {
            Ok(res) => {
                unsafe { *out = Box::into_raw(Box::new(CavTimeSeries(res))) };
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Differential cavity noise of the full isolation chain.
///
/// # Safety
/// All handles must be valid; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_cavity_noise(
    cold_plate: *const CavTimeSeries,
    spring_stage: *const CavStage,
    fiber_stack: *const CavStage,
    mirror_stack: *const CavStage,
    out: *mut *mut CavTimeSeries,
) -> CavStatus {
    guarded(|| {
        let (Some(cold), Some(spring), Some(fiber), Some(mirror)) = (
            unsafe { cold_plate.as_ref() },
            unsafe { spring_stage.as_ref() },
            unsafe { fiber_stack.as_ref() },
            unsafe { mirror_stack.as_ref() },
        ) else {
            return null_pointer("chain handles");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match cavity_noise(&cold.0, &spring.0, &fiber.0, &mirror.0) {
            Ok(res) => {
                unsafe { *out = Box::into_raw(Box::new(CavTimeSeries(res))) };
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// interferometric conversion and lock
// ---------------------------------------------------------------------------

/// Converts a transmission trace to displacement around the lock point.
/// `out_of_band` (optional) receives the flagged-sample count.
///
/// # Safety
/// `trace`, `geom` and `out` must be valid; `out_of_band` may be null.
#[no_mangle]
pub unsafe extern "C" fn cav_transmission_to_displacement(
    trace: *const CavTimeSeries,
    geom: *const CavGeometry,
    lock: CavLockPoint,
    out: *mut *mut CavTimeSeries,
    out_of_band: *mut usize,
) -> CavStatus {
    guarded(|| {
        let (Some(ts), Some(g)) = (unsafe { trace.as_ref() }, unsafe { geom.as_ref() }) else {
            return null_pointer("trace/geom");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match fabry_perot::transmission_to_displacement(&ts.0, &g.0, &lock.into(), None) {
            Ok(DisplacementConversion {
                displacement,
                out_of_band_count,
                ..
            }) => {
                unsafe {
                    *out = Box::into_raw(Box::new(CavTimeSeries(displacement)));
                    if !out_of_band.is_null() {
                        *out_of_band = out_of_band_count;
                    }
                }
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Forward model: displacement around the lock point to transmission.
///
/// # Safety
/// `trace`, `geom` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cav_displacement_to_transmission(
    trace: *const CavTimeSeries,
    geom: *const CavGeometry,
    lock: CavLockPoint,
    out: *mut *mut CavTimeSeries,
) -> CavStatus {
    guarded(|| {
        let (Some(ts), Some(g)) = (unsafe { trace.as_ref() }, unsafe { geom.as_ref() }) else {
            return null_pointer("trace/geom");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match fabry_perot::displacement_to_transmission(&ts.0, &g.0, &lock.into()) {
            Ok(t) => {
                unsafe { *out = Box::into_raw(Box::new(CavTimeSeries(t))) };
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Runs the closed stabilization loop against a disturbance trace.
///
/// # Safety
/// `disturbance`, `geom`, `out_residual` and `out_actuator` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cav_simulate_lock(
    disturbance: *const CavTimeSeries,
    geom: *const CavGeometry,
    params: CavLockParams,
    seed: u64,
    out_residual: *mut *mut CavTimeSeries,
    out_actuator: *mut *mut CavTimeSeries,
) -> CavStatus {
    guarded(|| {
        let (Some(dist), Some(g)) =
            (unsafe { disturbance.as_ref() }, unsafe { geom.as_ref() })
        else {
            return null_pointer("disturbance/geom");
        };
        if out_residual.is_null() || out_actuator.is_null() {
            return null_pointer("out");
        }
        let config = LockConfig {
            kp: params.kp,
            ki_per_s: params.ki_per_s,
            actuator_cutoff_hz: params.actuator_cutoff_hz,
            notch: (params.notch_hz > 0.0).then_some(NotchConfig {
                frequency_hz: params.notch_hz,
                quality: params.notch_q,
            }),
            sensor_noise_rms: params.sensor_noise_rms,
            setpoint: params.setpoint.into(),
            sample_rate_hz: params.sample_rate_hz,
        };
        match simulate_lock(&dist.0, &g.0, &config, seed) {
            Ok(run) => {
                unsafe {
                    *out_residual = Box::into_raw(Box::new(CavTimeSeries(run.residual)));
                    *out_actuator = Box::into_raw(Box::new(CavTimeSeries(run.actuator)));
                }
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// polariton model
// ---------------------------------------------------------------------------

/// Complex polariton eigenenergies, split into real and imaginary parts.
///
/// # Safety
/// The four `out_*` pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cav_polariton_eigenenergies(
    exciton_energy_mev: f64,
    exciton_linewidth_mev: f64,
    cavity_linewidth_mev: f64,
    coupling_mev: f64,
    detuning_mev: f64,
    out_upper_re: *mut f64,
    out_upper_im: *mut f64,
    out_lower_re: *mut f64,
    out_lower_im: *mut f64,
) -> CavStatus {
    guarded(|| {
        if out_upper_re.is_null()
            || out_upper_im.is_null()
            || out_lower_re.is_null()
            || out_lower_im.is_null()
        {
            return null_pointer("out");
        }
        let model = match PolaritonModel::new(
            exciton_energy_mev,
            exciton_linewidth_mev,
            cavity_linewidth_mev,
            coupling_mev,
            detuning_mev,
        ) {
            Ok(m) => m,
            Err(e) => return fail(e),
        };
        let (upper, lower) = polariton_eigenenergies(&model);
        unsafe {
            *out_upper_re = upper.re;
            *out_upper_im = upper.im;
            *out_lower_re = lower.re;
            *out_lower_im = lower.im;
        }
        CavStatus::Ok
    })
}

/// Minimal branch separation over a detuning interval.
///
/// # Safety
/// `out_splitting_mev` must be valid; `out_detuning_mev` may be null.
#[no_mangle]
pub unsafe extern "C" fn cav_normal_mode_splitting(
    exciton_energy_mev: f64,
    exciton_linewidth_mev: f64,
    cavity_linewidth_mev: f64,
    coupling_mev: f64,
    detuning_min_mev: f64,
    detuning_max_mev: f64,
    out_splitting_mev: *mut f64,
    out_detuning_mev: *mut f64,
) -> CavStatus {
    guarded(|| {
        if out_splitting_mev.is_null() {
            return null_pointer("out_splitting_mev");
        }
        let model = match PolaritonModel::new(
            exciton_energy_mev,
            exciton_linewidth_mev,
            cavity_linewidth_mev,
            coupling_mev,
            0.0,
        ) {
            Ok(m) => m,
            Err(e) => return fail(e),
        };
        match normal_mode_splitting(&model, (detuning_min_mev, detuning_max_mev)) {
            Ok(min) => {
                unsafe {
                    *out_splitting_mev = min.splitting_mev;
                    if !out_detuning_mev.is_null() {
                        *out_detuning_mev = min.detuning_mev;
                    }
                }
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Cooperativity 2 S^2 / (kappa Gamma).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cav_cooperativity(
    splitting_mev: f64,
    kappa_mev: f64,
    gamma_mev: f64,
    out: *mut f64,
) -> CavStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match cooperativity(splitting_mev, kappa_mev, gamma_mev) {
            Ok(c) => {
                unsafe { *out = c };
                CavStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
