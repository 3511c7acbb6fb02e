//! Statistics and spectra of displacement traces.
//!
//! Everything here treats a trace as a fluctuation record: [`rms`] subtracts
//! the trace mean before squaring (a static offset of the operating point is
//! not vibration), [`rms_vs_bandwidth`] integrates the one-sided power
//! spectrum up to each cutoff (brick-wall "integration bandwidth"
//! semantics), [`amplitude_spectrum`] is a Hann/50%-overlap Welch average
//! calibrated so a pure sine of amplitude `a` reads `a` at its bin, and
//! [`occurrence_histogram`] counts mean-subtracted excursions.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

/// Displacement rms as a function of integration bandwidth.
#[derive(Debug, Clone)]
pub struct RmsBandwidthCurve {
    pub bandwidths_hz: Vec<f64>,
    pub rms_m: Vec<f64>,
}

/// Amplitude spectrum at fixed frequency resolution.
#[derive(Debug, Clone)]
pub struct AmplitudeSpectrum {
    pub resolution_hz: f64,
    pub frequencies_hz: Vec<f64>,
    pub amplitudes_m: Vec<f64>,
}

impl AmplitudeSpectrum {
    /// Largest amplitude inside `[f_lo, f_hi]`.
    pub fn peak_in_band(&self, f_lo: f64, f_hi: f64) -> f64 {
        self.frequencies_hz
            .iter()
            .zip(&self.amplitudes_m)
            .filter(|(f, _)| **f >= f_lo && **f <= f_hi)
            .map(|(_, a)| *a)
            .fold(0.0, f64::max)
    }
}

/// Occurrence histogram of mean-subtracted samples.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub bin_width_m: f64,
    pub bin_centers_m: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Total counts in bins whose centers lie beyond +-`threshold_m`.
    pub fn counts_beyond(&self, threshold_m: f64) -> u64 {
        self.bin_centers_m
            .iter()
            .zip(&self.counts)
            .filter(|(c, _)| c.abs() > threshold_m)
            .map(|(_, n)| *n)
            .sum()
    }
}

/// Root-mean-square of the mean-subtracted trace.
pub fn rms(trace: &TimeSeries) -> f64 {
    let mean = trace.mean();
    let n = trace.len() as f64;
    (trace
        .values()
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n)
        .sqrt()
}

/// Peak-to-peak excursion: global max - min, or, with `window_s`, the
/// maximum over consecutive windows of that length.
pub fn peak_to_peak(trace: &TimeSeries, window_s: Option<f64>) -> Result<f64> {
    let span = |vals: &[f64]| {
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for &v in vals {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi - lo
    };
    match window_s {
        None => Ok(span(trace.values())),
        Some(w) => {
            if !(w > 0.0 && w <= trace.duration_s()) {
                return Err(Error::validation(format!(
                    "window {w} s must lie in (0, {} s]",
                    trace.duration_s()
                )));
            }
            let w_samples = ((w / trace.dt_s()).round() as usize).max(1);
            Ok(trace
                .values()
                .chunks(w_samples)
                .map(span)
                .fold(0.0, f64::max))
        }
    }
}

/// One-sided power spectrum (mean removed) of the full trace; bin k carries
/// the mean-square contribution of frequency k / (n dt). Summing all bins
/// reproduces the squared time-domain rms (Parseval).
fn one_sided_power(trace: &TimeSeries) -> Vec<f64> {
    let n = trace.len();
    let mean = trace.mean();
    let mut buf: Vec<Complex64> = trace
        .values()
        .iter()
        .map(|&v| Complex64::new(v - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let norm = 1.0 / (n as f64 * n as f64);
    (0..=n / 2)
        .map(|k| {
            let two_sided = k != 0 && k != n - k;
            buf[k].norm_sqr() * norm * if two_sided { 2.0 } else { 1.0 }
        })
        .collect()
}

/// Displacement rms as a function of integration bandwidth: for each grid
/// frequency B, the square root of the cumulative one-sided power up to B.
pub fn rms_vs_bandwidth(trace: &TimeSeries, grid_hz: &[f64]) -> Result<RmsBandwidthCurve> {
    if grid_hz.is_empty() {
        return Err(Error::validation("bandwidth grid is empty"));
    }
    let nyquist = trace.nyquist_hz();
    if !grid_hz.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::validation(
            "bandwidth grid must be strictly ascending",
        ));
    }
    for &b in grid_hz {
        if !(b > 0.0 && b <= nyquist * (1.0 + 1e-9)) {
            return Err(Error::validation(format!(
                "bandwidth {b} Hz outside (0, Nyquist = {nyquist} Hz]"
            )));
        }
    }

    let power = one_sided_power(trace);
    let df = 1.0 / (trace.len() as f64 * trace.dt_s());
    let mut rms_m = Vec::with_capacity(grid_hz.len());
    let mut acc = power[0];
    let mut k = 1usize;
    for &b in grid_hz {
        while k < power.len() && k as f64 * df <= b * (1.0 + 1e-12) {
            acc += power[k];
            k += 1;
        }
        rms_m.push(acc.sqrt());
    }
    Ok(RmsBandwidthCurve {
        bandwidths_hz: grid_hz.to_vec(),
        rms_m,
    })
}

/// Welch amplitude spectrum: Hann-windowed segments of length
/// 1/resolution with 50% overlap, power-averaged, amplitude-calibrated by
/// the window's coherent gain.
pub fn amplitude_spectrum(trace: &TimeSeries, resolution_hz: f64) -> Result<AmplitudeSpectrum> {
    if !(resolution_hz.is_finite() && resolution_hz > 0.0) {
        return Err(Error::validation(format!(
            "resolution must be positive, got {resolution_hz} Hz"
        )));
    }
    let seg_len = (1.0 / (resolution_hz * trace.dt_s())).round() as usize;
    if seg_len < 4 {
        return Err(Error::validation(format!(
            "resolution {resolution_hz} Hz leaves fewer than 4 samples per segment"
        )));
    }
    if seg_len > trace.len() {
        return Err(Error::validation(format!(
            "trace of {} s is shorter than one segment (1/resolution = {} s)",
            trace.duration_s(),
            1.0 / resolution_hz
        )));
    }

    // Periodic Hann: exact zero-sum harmonics make the bin calibration exact
    // for on-bin sines.
    let window: Vec<f64> = (0..seg_len)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / seg_len as f64).cos()))
        .collect();
    let coherent_gain: f64 = window.iter().sum();

    let hop = (seg_len / 2).max(1);
    let n_bins = seg_len / 2 + 1;
    let mut mean_power = vec![0.0; n_bins];
    let mut n_segments = 0usize;
    let fft = FftPlanner::new().plan_fft_forward(seg_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); seg_len];

    let values = trace.values();
    let mut start = 0usize;
    while start + seg_len <= values.len() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(values[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, mp) in mean_power.iter_mut().enumerate() {
            let single = k == 0 || k == seg_len - k;
            let amp = buf[k].norm() / coherent_gain * if single { 1.0 } else { 2.0 };
            *mp += amp * amp;
        }
        n_segments += 1;
        start += hop;
    }

    let amplitudes_m = mean_power
        .iter()
        .map(|p| (p / n_segments as f64).sqrt())
        .collect();
    let df = 1.0 / (seg_len as f64 * trace.dt_s());
    Ok(AmplitudeSpectrum {
        resolution_hz: df,
        frequencies_hz: (0..n_bins).map(|k| k as f64 * df).collect(),
        amplitudes_m,
    })
}

/// Histogram of mean-subtracted samples with the given bin width; bins tile
/// the full sample range.
pub fn occurrence_histogram(trace: &TimeSeries, bin_width_m: f64) -> Result<Histogram> {
    if !(bin_width_m.is_finite() && bin_width_m > 0.0) {
        return Err(Error::validation(format!(
            "bin width must be positive, got {bin_width_m} m"
        )));
    }
    let mean = trace.mean();
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for &v in trace.values() {
        let c = v - mean;
        lo = lo.min(c);
        hi = hi.max(c);
    }
    let n_bins = (((hi - lo) / bin_width_m).floor() as usize) + 1;
    let mut counts = vec![0u64; n_bins];
    for &v in trace.values() {
        let idx = (((v - mean - lo) / bin_width_m) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let bin_centers_m = (0..n_bins)
        .map(|i| lo + (i as f64 + 0.5) * bin_width_m)
        .collect();
    Ok(Histogram {
        bin_width_m,
        bin_centers_m,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::SignalUnit;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sine(amp: f64, f: f64, n: usize, dt: f64) -> TimeSeries {
        TimeSeries::from_fn(dt, n, SignalUnit::Meter, |t| amp * (2.0 * PI * f * t).sin())
            .unwrap()
    }

    // -- rms --

    #[test]
    fn rms_of_zero_trace_is_zero() {
        let ts = TimeSeries::new(1e-3, vec![0.0; 100], SignalUnit::Meter).unwrap();
        assert_eq!(rms(&ts), 0.0);
    }

    #[test]
    fn rms_of_alternating_samples_is_amplitude() {
        let a = 3.7e-12;
        let values: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { a } else { -a }).collect();
        let ts = TimeSeries::new(1e-3, values, SignalUnit::Meter).unwrap();
        assert_relative_eq!(rms(&ts), a, max_relative = 1e-12);
    }

    #[test]
    fn rms_ignores_static_offset() {
        let values: Vec<f64> = (0..1000)
            .map(|i| 5.0e-9 + if i % 2 == 0 { 1e-12 } else { -1e-12 })
            .collect();
        let ts = TimeSeries::new(1e-3, values, SignalUnit::Meter).unwrap();
        assert_relative_eq!(rms(&ts), 1e-12, max_relative = 1e-9);
    }

    // -- peak to peak --

    #[test]
    fn constant_trace_has_zero_peak_to_peak() {
        let ts = TimeSeries::new(1e-3, vec![4.2e-9; 50], SignalUnit::Meter).unwrap();
        assert_eq!(peak_to_peak(&ts, None).unwrap(), 0.0);
    }

    #[test]
    fn sine_peak_to_peak_is_twice_amplitude() {
        let ts = sine(1e-9, 10.0, 10_000, 1e-4);
        let pp = peak_to_peak(&ts, None).unwrap();
        assert_relative_eq!(pp, 2e-9, max_relative = 1e-4);
    }

    #[test]
    fn windowed_peak_to_peak_caps_at_global() {
        let ts = sine(1e-9, 3.0, 10_000, 1e-4);
        let global = peak_to_peak(&ts, None).unwrap();
        let windowed = peak_to_peak(&ts, Some(0.5)).unwrap();
        assert!(windowed <= global);
        assert!(peak_to_peak(&ts, Some(10.0)).is_err()); // longer than trace
    }

    // -- rms vs bandwidth --

    #[test]
    fn curve_is_monotone_and_parseval_consistent() {
        let ts = kicklike_trace(4096, 9);
        let nyq = ts.nyquist_hz();
        let grid: Vec<f64> = (1..=64).map(|i| nyq * i as f64 / 64.0).collect();
        let curve = rms_vs_bandwidth(&ts, &grid).unwrap();
        for w in curve.rms_m.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let total = curve.rms_m.last().unwrap();
        assert_relative_eq!(*total, rms(&ts), max_relative = 1e-6);
    }

    #[test]
    fn white_noise_rms_grows_as_sqrt_bandwidth() {
        // Averaged over 20 seeded traces, rms(B) tracks sqrt(B) within 5%
        // across a decade.
        let mut ratio_sum = 0.0;
        let n_traces = 20;
        for seed in 0..n_traces {
            let ts = white_trace(1 << 14, seed);
            let nyq = ts.nyquist_hz();
            let curve = rms_vs_bandwidth(&ts, &[nyq / 20.0, nyq / 2.0]).unwrap();
            ratio_sum += curve.rms_m[1] / curve.rms_m[0];
        }
        let mean_ratio = ratio_sum / n_traces as f64;
        assert!(
            (mean_ratio - 10.0f64.sqrt()).abs() / 10.0f64.sqrt() < 0.05,
            "mean ratio {mean_ratio} vs sqrt(10)"
        );
    }

    #[test]
    fn grid_beyond_nyquist_is_rejected() {
        let ts = sine(1e-9, 10.0, 1000, 1e-4);
        assert!(rms_vs_bandwidth(&ts, &[6000.0]).is_err());
        assert!(rms_vs_bandwidth(&ts, &[]).is_err());
        assert!(rms_vs_bandwidth(&ts, &[100.0, 50.0]).is_err());
    }

    fn white_trace(n: usize, seed: u64) -> TimeSeries {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        TimeSeries::new(1e-4, values, SignalUnit::Meter).unwrap()
    }

    fn kicklike_trace(n: usize, seed: u64) -> TimeSeries {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let phase: f64 = rng.gen();
        TimeSeries::from_fn(1e-4, n, SignalUnit::Meter, |t| {
            1e-9 * (2.0 * PI * (37.0 * t + phase)).sin()
                + 3e-10 * (2.0 * PI * 410.0 * t).cos()
                + 1e-10 * (t * 17.0).sin()
        })
        .unwrap()
    }

    // -- amplitude spectrum --

    #[test]
    fn sine_amplitude_is_read_back_at_its_bin() {
        let a = 2.4e-10;
        let ts = sine(a, 20.0, 1_000_000, 1e-5); // 10 s at 100 kHz
        let spec = amplitude_spectrum(&ts, 1.0).unwrap();
        let bin = spec
            .frequencies_hz
            .iter()
            .position(|f| (*f - 20.0).abs() < 1e-9)
            .unwrap();
        assert!(
            (spec.amplitudes_m[bin] - a).abs() / a < 0.02,
            "read {} vs {}",
            spec.amplitudes_m[bin],
            a
        );
    }

    #[test]
    fn two_separated_sines_resolve_at_correct_amplitudes() {
        let (a1, a2) = (1.0e-10, 3.0e-10);
        let ts = TimeSeries::from_fn(1e-5, 500_000, SignalUnit::Meter, |t| {
            a1 * (2.0 * PI * 50.0 * t).sin() + a2 * (2.0 * PI * 700.0 * t).sin()
        })
        .unwrap();
        let spec = amplitude_spectrum(&ts, 1.0).unwrap();
        let read = |f0: f64| {
            let bin = spec
                .frequencies_hz
                .iter()
                .position(|f| (*f - f0).abs() < 1e-9)
                .unwrap();
            spec.amplitudes_m[bin]
        };
        assert!((read(50.0) - a1).abs() / a1 < 0.02);
        assert!((read(700.0) - a2).abs() / a2 < 0.02);
    }

    #[test]
    fn constant_trace_has_empty_spectrum_away_from_dc() {
        let ts = TimeSeries::new(1e-4, vec![1.0e-9; 20_000], SignalUnit::Meter).unwrap();
        let spec = amplitude_spectrum(&ts, 10.0).unwrap();
        for (f, a) in spec.frequencies_hz.iter().zip(&spec.amplitudes_m).skip(2) {
            assert!(*a < 1e-20, "bin at {f} Hz reads {a}");
        }
    }

    #[test]
    fn trace_shorter_than_segment_is_rejected() {
        let ts = sine(1e-9, 10.0, 100, 1e-4); // 10 ms
        assert!(amplitude_spectrum(&ts, 1.0).is_err());
    }

    // -- histogram --

    #[test]
    fn zero_trace_populates_single_bin() {
        let ts = TimeSeries::new(1e-4, vec![0.0; 256], SignalUnit::Meter).unwrap();
        let h = occurrence_histogram(&ts, 1e-11).unwrap();
        assert_eq!(h.counts.len(), 1);
        assert_eq!(h.counts[0], 256);
    }

    #[test]
    fn sine_histogram_is_arcsine_shaped() {
        let ts = sine(1e-9, 7.0, 100_000, 1e-5);
        let h = occurrence_histogram(&ts, 5e-11).unwrap();
        let edge = h.counts[0].max(*h.counts.last().unwrap());
        let mid = h.counts[h.counts.len() / 2];
        assert!(
            edge > 2 * mid,
            "edge bins should dominate: edge {edge}, mid {mid}"
        );
    }

    #[test]
    fn nonpositive_bin_width_is_rejected() {
        let ts = sine(1e-9, 7.0, 100, 1e-4);
        assert!(occurrence_histogram(&ts, 0.0).is_err());
        assert!(occurrence_histogram(&ts, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn histogram_counts_sum_to_sample_count(
            seed in 0u64..1000,
            n in 16usize..2000,
        ) {
            let ts = white_trace(n.max(16), seed);
            let h = occurrence_histogram(&ts, 0.05).unwrap();
            prop_assert_eq!(h.counts.iter().sum::<u64>(), ts.len() as u64);
        }

        #[test]
        fn rms_is_shift_and_sign_invariant(seed in 0u64..1000) {
            let ts = white_trace(512, seed);
            let shifted: Vec<f64> = ts.values().iter().map(|v| v + 7.7e-9).collect();
            let flipped: Vec<f64> = ts.values().iter().map(|v| -v).collect();
            let r = rms(&ts);
            let rs = rms(&ts.with_values(shifted, SignalUnit::Meter).unwrap());
            let rf = rms(&ts.with_values(flipped, SignalUnit::Meter).unwrap());
            prop_assert!((r - rs).abs() <= 1e-9 * r.max(1e-300));
            prop_assert!((r - rf).abs() <= 1e-12 * r.max(1e-300));
        }
    }
}
