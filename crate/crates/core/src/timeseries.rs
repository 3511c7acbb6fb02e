//! Uniformly sampled signal traces.
//!
//! [`TimeSeries`] is the universal trace carrier of the crate: displacement
//! in meters or normalized cavity transmission, always uniformly sampled.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Physical unit of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalUnit {
    /// Displacement / cavity length in meters.
    Meter,
    /// Normalized cavity transmission (dimensionless, on-resonance peak ≤ 1).
    Transmission,
}

impl fmt::Display for SignalUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalUnit::Meter => write!(f, "meter"),
            SignalUnit::Transmission => write!(f, "transmission"),
        }
    }
}

impl FromStr for SignalUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "meter" => Ok(SignalUnit::Meter),
            "transmission" => Ok(SignalUnit::Transmission),
            other => Err(Error::validation(format!(
                "unknown signal unit '{other}' (expected 'meter' or 'transmission')"
            ))),
        }
    }
}

/// A uniformly sampled signal with sample interval and unit tag.
///
/// Construction enforces the structural invariants (positive finite sample
/// interval, at least two samples, finite values); uniform sampling holds by
/// construction since only the interval is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt_s: f64,
    unit: SignalUnit,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt_s: f64, values: Vec<f64>, unit: SignalUnit) -> Result<Self> {
        if !dt_s.is_finite() || dt_s <= 0.0 {
            return Err(Error::validation(format!(
                "sample interval must be finite and positive, got {dt_s}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::validation(format!(
                "a time series needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(TimeSeries { dt_s, unit, values })
    }

    /// Build a trace by evaluating `f(t)` at `n` uniform samples t = i·dt.
    pub fn from_fn(
        dt_s: f64,
        n: usize,
        unit: SignalUnit,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = (0..n).map(|i| f(i as f64 * dt_s)).collect();
        TimeSeries::new(dt_s, values, unit)
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_s
    }

    pub fn unit(&self) -> SignalUnit {
        self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least 2 samples by construction
    }

    pub fn duration_s(&self) -> f64 {
        self.values.len() as f64 * self.dt_s
    }

    pub fn sample_rate_hz(&self) -> f64 {
        1.0 / self.dt_s
    }

    pub fn nyquist_hz(&self) -> f64 {
        0.5 / self.dt_s
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Same sampling grid, new values and unit. Lengths must match.
    pub fn with_values(&self, values: Vec<f64>, unit: SignalUnit) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::validation(format!(
                "value count {} does not match trace length {}",
                values.len(),
                self.values.len()
            )));
        }
        TimeSeries::new(self.dt_s, values, unit)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Checks that `other` shares this trace's sampling interval (1 ppm) and
    /// length; used before sample-wise combinations.
    pub fn same_grid(&self, other: &TimeSeries) -> bool {
        self.values.len() == other.values.len()
            && ((self.dt_s - other.dt_s) / self.dt_s).abs() <= 1e-6
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_construction() {
        assert!(TimeSeries::new(0.0, vec![0.0, 1.0], SignalUnit::Meter).is_err());
        assert!(TimeSeries::new(-1.0, vec![0.0, 1.0], SignalUnit::Meter).is_err());
        assert!(TimeSeries::new(1e-5, vec![0.0], SignalUnit::Meter).is_err());
        assert!(TimeSeries::new(1e-5, vec![0.0, f64::NAN], SignalUnit::Meter).is_err());
    }

    #[test]
    fn from_fn_samples_on_grid() {
        let ts = TimeSeries::from_fn(0.5, 4, SignalUnit::Meter, |t| 2.0 * t).unwrap();
        assert_eq!(ts.values(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(ts.duration_s(), 2.0);
        assert_eq!(ts.nyquist_hz(), 1.0);
    }

    #[test]
    fn unit_round_trips_through_str() {
        for unit in [SignalUnit::Meter, SignalUnit::Transmission] {
            assert_eq!(unit.to_string().parse::<SignalUnit>().unwrap(), unit);
        }
        assert!("metre".parse::<SignalUnit>().is_err());
    }
}
