//! Discrete-time simulation of the active cavity-length stabilization.
//!
//! The servo chain mirrors the hardware: the photodiode samples the
//! transmission at the side-of-fringe lock point, the error is normalized to
//! length units by the fringe slope, a PI controller (with optional notch)
//! computes the correction, and a first-order lag models the bandwidth limit
//! of the high-voltage piezo driver. The loop closes with one sample of
//! transport delay.
//!
//! [`controller_response`] is the analytic companion of the simulated loop:
//! the open-loop gain L(f) whose closed-loop suppression 1/|1+L| the
//! time-domain simulation must reproduce.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fabry_perot::{transmission, CavityGeometry, LockPoint};
use crate::noise::GaussianNoise;
use crate::timeseries::{SignalUnit, TimeSeries};

/// Notch filter placement (typically on a mains line).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotchConfig {
    pub frequency_hz: f64,
    pub quality: f64,
}

/// Servo configuration: PI gains, actuator bandwidth, optional notch,
/// sensor noise and the lock point it regulates to.
#[derive(Debug, Clone, PartialEq)]
pub struct LockConfig {
    /// Proportional gain (dimensionless: length out per length error in).
    pub kp: f64,
    /// Integral gain in 1/s.
    pub ki_per_s: f64,
    /// First-order lag cutoff of the piezo/high-voltage chain.
    pub actuator_cutoff_hz: f64,
    pub notch: Option<NotchConfig>,
    /// White sensor noise, rms in normalized transmission units.
    pub sensor_noise_rms: f64,
    /// Side-of-fringe operating point the loop regulates to.
    pub setpoint: LockPoint,
    pub sample_rate_hz: f64,
}

impl LockConfig {
    pub const DEFAULT_KP: f64 = 0.2;
    pub const DEFAULT_KI_PER_S: f64 = 300.0;
    pub const DEFAULT_ACTUATOR_CUTOFF_HZ: f64 = 500.0;
    pub const DEFAULT_SENSOR_NOISE_RMS: f64 = 0.002;
    pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 1.0e5;

    /// Default tuning for a given lock point: UGF near 50 Hz against the
    /// 500 Hz actuator lag, which leaves a generous phase margin.
    pub fn for_setpoint(setpoint: LockPoint) -> Self {
        LockConfig {
            kp: Self::DEFAULT_KP,
            ki_per_s: Self::DEFAULT_KI_PER_S,
            actuator_cutoff_hz: Self::DEFAULT_ACTUATOR_CUTOFF_HZ,
            notch: None,
            sensor_noise_rms: Self::DEFAULT_SENSOR_NOISE_RMS,
            setpoint,
            sample_rate_hz: Self::DEFAULT_SAMPLE_RATE_HZ,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kp.is_finite() && self.kp >= 0.0) {
            return Err(Error::validation(format!("kp must be >= 0, got {}", self.kp)));
        }
        if !(self.ki_per_s.is_finite() && self.ki_per_s >= 0.0) {
            return Err(Error::validation(format!(
                "ki must be >= 0, got {} 1/s",
                self.ki_per_s
            )));
        }
        if !(self.actuator_cutoff_hz.is_finite() && self.actuator_cutoff_hz > 0.0) {
            return Err(Error::validation(format!(
                "actuator cutoff must be positive, got {} Hz",
                self.actuator_cutoff_hz
            )));
        }
        if self.sample_rate_hz < 10.0 * self.actuator_cutoff_hz {
            return Err(Error::validation(format!(
                "sample rate {} Hz must resolve the actuator cutoff {} Hz by at least 10x",
                self.sample_rate_hz, self.actuator_cutoff_hz
            )));
        }
        if let Some(n) = &self.notch {
            if !(n.frequency_hz > 0.0 && n.frequency_hz < self.sample_rate_hz / 2.0) {
                return Err(Error::validation(format!(
                    "notch frequency {} Hz outside (0, Nyquist)",
                    n.frequency_hz
                )));
            }
            if !(n.quality.is_finite() && n.quality > 0.0) {
                return Err(Error::validation(format!(
                    "notch quality must be positive, got {}",
                    n.quality
                )));
            }
        }
        if !(self.sensor_noise_rms.is_finite() && self.sensor_noise_rms >= 0.0) {
            return Err(Error::validation("sensor noise rms must be >= 0"));
        }
        if self.setpoint.slope_per_m == 0.0 {
            return Err(Error::validation("lock point slope must be nonzero"));
        }
        Ok(())
    }
}

/// Open-loop frequency response L(f) = PI(f) x actuator-lag(f) x notch(f),
/// in length-out-per-length-error units (the fringe-slope normalization of
/// the sensing cancels out). The closed loop suppresses disturbances by
/// 1/|1 + L(f)|.
pub fn controller_response(config: &LockConfig, f_hz: f64) -> Result<Complex64> {
    let nyquist = config.sample_rate_hz / 2.0;
    if !(f_hz > 0.0 && f_hz < nyquist) {
        return Err(Error::validation(format!(
            "frequency {f_hz} Hz outside (0, Nyquist = {nyquist} Hz)"
        )));
    }
    let omega = 2.0 * std::f64::consts::PI * f_hz;
    let pi = Complex64::new(config.kp, 0.0)
        + Complex64::new(0.0, -config.ki_per_s / omega);
    let lag = Complex64::new(1.0, 0.0) / Complex64::new(1.0, f_hz / config.actuator_cutoff_hz);
    let notch = match &config.notch {
        None => Complex64::new(1.0, 0.0),
        Some(n) => {
            let w0 = 2.0 * std::f64::consts::PI * n.frequency_hz;
            let num = Complex64::new(w0 * w0 - omega * omega, 0.0);
            let den = Complex64::new(w0 * w0 - omega * omega, w0 * omega / n.quality);
            num / den
        }
    };
    Ok(pi * lag * notch)
}

/// Frequency where |L(f)| crosses unity, by bisection; `None` when the loop
/// gain never reaches 1 below Nyquist.
pub fn unity_gain_frequency(config: &LockConfig) -> Option<f64> {
    let nyquist = config.sample_rate_hz / 2.0;
    let gain = |f: f64| controller_response(config, f).map(|c| c.norm()).ok();
    let mut lo = 1e-3;
    let mut hi = nyquist * 0.999;
    let g_lo = gain(lo)?;
    let g_hi = gain(hi)?;
    if g_lo < 1.0 || g_hi > 1.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if gain(mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo * hi).sqrt())
}

/// Phase margin of the loop at its unity-gain frequency, in degrees,
/// including the one-sample transport delay of the simulation.
pub fn phase_margin_deg(config: &LockConfig) -> Option<f64> {
    let ugf = unity_gain_frequency(config)?;
    let delay = 2.0 * std::f64::consts::PI * ugf / config.sample_rate_hz;
    let l = controller_response(config, ugf).ok()?;
    Some(180.0 + (l.arg() - delay).to_degrees())
}

/// Result of a closed-loop run.
#[derive(Debug, Clone)]
pub struct LockRun {
    /// Residual cavity-length fluctuation around the lock point (meters).
    pub residual: TimeSeries,
    /// Actuator length command (meters).
    pub actuator: TimeSeries,
}

/// RBJ biquad notch, direct form II transposed.
struct NotchState {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    s1: f64,
    s2: f64,
}

impl NotchState {
    fn new(notch: &NotchConfig, sample_rate_hz: f64) -> Self {
        let omega = 2.0 * std::f64::consts::PI * notch.frequency_hz / sample_rate_hz;
        let alpha = omega.sin() / (2.0 * notch.quality);
        let a0 = 1.0 + alpha;
        NotchState {
            b0: 1.0 / a0,
            b1: -2.0 * omega.cos() / a0,
            b2: 1.0 / a0,
            a1: -2.0 * omega.cos() / a0,
            a2: (1.0 - alpha) / a0,
            s1: 0.0,
            s2: 0.0,
        }
    }

    fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.s1;
        self.s1 = self.b1 * x - self.a1 * y + self.s2;
        self.s2 = self.b2 * x - self.a2 * y;
        y
    }
}

/// Runs the closed loop against a cavity-length disturbance trace.
///
/// Per sample: the cavity length error is disturbance minus actuator, the
/// sensor reads the fringe transmission there plus seeded white noise, the
/// error is normalized to length by the lock-point slope, the PI law (with
/// integrator anti-windup at an eighth wavelength of actuator command)
/// updates through the optional notch and the actuator lag. Deterministic
/// for a given seed.
///
/// Fails with [`Error::LockUnstable`] when the residual exceeds a quarter of
/// the free spectral range.
pub fn simulate_lock(
    disturbance: &TimeSeries,
    geom: &CavityGeometry,
    config: &LockConfig,
    seed: u64,
) -> Result<LockRun> {
    config.validate()?;
    if disturbance.unit() != SignalUnit::Meter {
        return Err(Error::validation(format!(
            "disturbance must be in meters, got unit '{}'",
            disturbance.unit()
        )));
    }
    let dt = disturbance.dt_s();
    if ((dt * config.sample_rate_hz) - 1.0).abs() > 1e-6 {
        return Err(Error::validation(format!(
            "disturbance sample rate {} Hz does not match loop sample rate {} Hz",
            disturbance.sample_rate_hz(),
            config.sample_rate_hz
        )));
    }

    let z_lock = geom.on_resonance_length_m() + config.setpoint.offset_m;
    let divergence_limit = geom.free_spectral_range_m() / 4.0;
    let windup_limit = geom.wavelength_m() / 8.0;
    let alpha = 1.0 - (-2.0 * std::f64::consts::PI * config.actuator_cutoff_hz * dt).exp();

    let mut noise = GaussianNoise::new(seed);
    let mut notch = config.notch.as_ref().map(|n| NotchState::new(n, config.sample_rate_hz));

    let n = disturbance.len();
    let mut residual = Vec::with_capacity(n);
    let mut actuator = Vec::with_capacity(n);
    let mut integ = 0.0;
    let mut act = 0.0;

    for (i, &dist) in disturbance.values().iter().enumerate() {
        let d = dist - act;
        if d.abs() > divergence_limit {
            return Err(Error::LockUnstable {
                at_sample: i,
                excursion_m: d.abs(),
                kp: config.kp,
                ki_per_s: config.ki_per_s,
            });
        }

        let mut t = transmission(z_lock + d, geom);
        if config.sensor_noise_rms > 0.0 {
            t += config.sensor_noise_rms * noise.sample();
        }
        let e_len = (t - config.setpoint.transmission) / config.setpoint.slope_per_m;

        // Conditional integration: freeze the integrator while the PI
        // command saturates an eighth wavelength.
        let integ_next = integ + config.ki_per_s * dt * e_len;
        if (config.kp * e_len + integ_next).abs() <= windup_limit {
            integ = integ_next;
        }
        let u_pi = config.kp * e_len + integ;
        let u = match notch.as_mut() {
            Some(state) => state.process(u_pi),
            None => u_pi,
        };
        act += alpha * (u - act);

        residual.push(d);
        actuator.push(act);
    }

    Ok(LockRun {
        residual: TimeSeries::new(dt, residual, SignalUnit::Meter)?,
        actuator: TimeSeries::new(dt, actuator, SignalUnit::Meter)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fabry_perot::{find_lock_point, LockSide};
    use std::f64::consts::PI;

    const NM: f64 = 1e-9;

    fn geometry() -> CavityGeometry {
        CavityGeometry::new(780.0 * NM, 110.0, 13, 1.0).unwrap()
    }

    fn config(geom: &CavityGeometry) -> LockConfig {
        let lock = find_lock_point(geom, LockSide::BelowResonance);
        LockConfig::for_setpoint(lock)
    }

    fn sine_disturbance(amp: f64, f: f64, duration: f64) -> TimeSeries {
        let dt = 1.0 / LockConfig::DEFAULT_SAMPLE_RATE_HZ;
        TimeSeries::from_fn(dt, (duration / dt) as usize, SignalUnit::Meter, |t| {
            amp * (2.0 * PI * f * t).sin()
        })
        .unwrap()
    }

    fn steady_amplitude(values: &[f64], skip: usize) -> f64 {
        let tail = &values[skip..];
        let ms: f64 = tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64;
        (2.0 * ms).sqrt()
    }

    // -- controller response --

    #[test]
    fn integrator_diverges_at_dc() {
        let geom = geometry();
        let cfg = config(&geom);
        let g = controller_response(&cfg, 1e-6).unwrap();
        assert!(g.norm() > 1e6 * cfg.kp);
    }

    #[test]
    fn proportional_only_gain_is_flat_below_cutoff() {
        let geom = geometry();
        let mut cfg = config(&geom);
        cfg.ki_per_s = 0.0;
        let g = controller_response(&cfg, cfg.actuator_cutoff_hz / 100.0).unwrap();
        assert!((g.norm() - cfg.kp).abs() / cfg.kp < 0.01);
    }

    #[test]
    fn notch_suppresses_its_line() {
        let geom = geometry();
        let mut cfg = config(&geom);
        cfg.notch = Some(NotchConfig {
            frequency_hz: 50.0,
            quality: 10.0,
        });
        let g = controller_response(&cfg, 50.0).unwrap();
        // >= 20 dB below the proportional gain
        assert!(g.norm() <= cfg.kp / 10.0, "|C(50 Hz)| = {}", g.norm());
        // and transparent a decade away
        let g_off = controller_response(&cfg, 500.0).unwrap();
        assert!(g_off.norm() > 0.0);
    }

    #[test]
    fn out_of_range_frequencies_are_rejected() {
        let geom = geometry();
        let cfg = config(&geom);
        assert!(controller_response(&cfg, 0.0).is_err());
        assert!(controller_response(&cfg, -1.0).is_err());
        assert!(controller_response(&cfg, cfg.sample_rate_hz).is_err());
    }

    #[test]
    fn default_tuning_places_ugf_near_50_hz_with_margin() {
        let geom = geometry();
        let cfg = config(&geom);
        let ugf = unity_gain_frequency(&cfg).unwrap();
        assert!((40.0..60.0).contains(&ugf), "UGF = {ugf} Hz");
        let margin = phase_margin_deg(&cfg).unwrap();
        assert!(margin >= 45.0, "phase margin = {margin} deg");
    }

    // -- closed loop --

    #[test]
    fn quiet_loop_has_identically_zero_residual() {
        let geom = geometry();
        let mut cfg = config(&geom);
        cfg.sensor_noise_rms = 0.0;
        let dist = TimeSeries::new(1e-5, vec![0.0; 2000], SignalUnit::Meter).unwrap();
        let run = simulate_lock(&dist, &geom, &cfg, 1).unwrap();
        assert!(run.residual.values().iter().all(|&v| v == 0.0));
        assert!(run.actuator.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_gains_pass_the_disturbance_through_bit_exactly() {
        let geom = geometry();
        let mut cfg = config(&geom);
        cfg.kp = 0.0;
        cfg.ki_per_s = 0.0;
        let dist = sine_disturbance(0.05 * NM, 35.0, 0.2);
        let run = simulate_lock(&dist, &geom, &cfg, 42).unwrap();
        assert_eq!(run.residual.values(), dist.values());
    }

    #[test]
    fn low_frequency_suppression_matches_analytic_loop_gain() {
        let geom = geometry();
        let mut cfg = config(&geom);
        cfg.sensor_noise_rms = 0.0;
        let amp = 0.05 * NM;
        let dist = sine_disturbance(amp, 5.0, 2.0);
        let run = simulate_lock(&dist, &geom, &cfg, 1).unwrap();
        let measured = steady_amplitude(run.residual.values(), 100_000);
        let l = controller_response(&cfg, 5.0).unwrap();
        let expected = amp / (Complex64::new(1.0, 0.0) + l).norm();
        assert!(
            (measured - expected).abs() / expected < 0.10,
            "measured {measured:.3e}, expected {expected:.3e}"
        );
    }

    #[test]
    fn suppression_expires_a_decade_above_ugf() {
        let geom = geometry();
        let mut cfg = config(&geom);
        cfg.sensor_noise_rms = 0.0;
        let ugf = unity_gain_frequency(&cfg).unwrap();
        let amp = 0.05 * NM;
        let dist = sine_disturbance(amp, 10.0 * ugf, 1.0);
        let run = simulate_lock(&dist, &geom, &cfg, 1).unwrap();
        let measured = steady_amplitude(run.residual.values(), 50_000);
        assert!(
            (measured / amp - 1.0).abs() <= 0.10,
            "residual/input = {}",
            measured / amp
        );
    }

    #[test]
    fn integrator_removes_constant_offset() {
        let geom = geometry();
        let mut cfg = config(&geom);
        cfg.sensor_noise_rms = 0.0;
        let step = 0.1 * NM;
        let dist = TimeSeries::new(1e-5, vec![step; 100_000], SignalUnit::Meter).unwrap();
        let run = simulate_lock(&dist, &geom, &cfg, 1).unwrap();
        let tail = run.residual.values().last().unwrap().abs();
        assert!(tail < 1e-3 * step, "steady-state error {tail:.3e} m");
    }

    #[test]
    fn runs_are_deterministic_under_seed() {
        let geom = geometry();
        let cfg = config(&geom);
        let dist = sine_disturbance(0.05 * NM, 20.0, 0.2);
        let a = simulate_lock(&dist, &geom, &cfg, 7).unwrap();
        let b = simulate_lock(&dist, &geom, &cfg, 7).unwrap();
        assert_eq!(a.residual.values(), b.residual.values());
        let c = simulate_lock(&dist, &geom, &cfg, 8).unwrap();
        assert_ne!(c.residual.values(), b.residual.values());
    }

    #[test]
    fn unstable_gains_report_divergence() {
        let geom = geometry();
        let mut cfg = config(&geom);
        cfg.sensor_noise_rms = 0.0;
        cfg.kp = 2.0e4; // unity gain pushed beyond Nyquist: delay flips the sign
        let dist = sine_disturbance(0.2 * NM, 20.0, 0.5);
        let err = simulate_lock(&dist, &geom, &cfg, 1).unwrap_err();
        match err {
            Error::LockUnstable { kp, .. } => assert_eq!(kp, 2.0e4),
            other => panic!("expected LockUnstable, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_sample_rate_is_rejected() {
        let geom = geometry();
        let cfg = config(&geom);
        let dist = TimeSeries::new(1e-4, vec![0.0; 100], SignalUnit::Meter).unwrap();
        assert!(simulate_lock(&dist, &geom, &cfg, 1).is_err());
    }
}
