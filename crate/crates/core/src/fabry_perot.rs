//! Fabry-Perot transmission fringe and interferometric displacement readout.
//!
//! The transmission of a two-mirror cavity as a function of mirror separation
//! `z` is the Airy fringe
//!
//! ```text
//! T(z) = T0 / (1 + (G sin PHI)^2),   PHI = 2 pi (z - L) / lambda
//! ```
//!
//! with `G = 2 F / pi` set by the finesse `F` and `L` the on-resonance
//! length. Successive resonances are spaced by the free spectral range
//! `lambda / 2`; a single resonance has the spatial-equivalent linewidth
//! (FWHM) `lambda / (2 F)`, which is the mechanical stability budget of the
//! cavity.
//!
//! Operating the cavity on the side of the fringe at maximum slope turns it
//! into a displacement interferometer: small length fluctuations map linearly
//! to transmission fluctuations through `dT/dz` at the lock point.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LmOptions};
use crate::timeseries::{SignalUnit, TimeSeries};

/// Geometry and optical parameters of one cavity mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityGeometry {
    wavelength_m: f64,
    finesse: f64,
    mode_number: u64,
    peak_transmission: f64,
    /// Descriptive metadata only: (fiber, planar) mirror intensity
    /// transmissions. Not used by any equation.
    mirror_transmissions: Option<(f64, f64)>,
}

impl CavityGeometry {
    pub fn new(
        wavelength_m: f64,
        finesse: f64,
        mode_number: u64,
        peak_transmission: f64,
    ) -> Result<Self> {
        if !(wavelength_m.is_finite() && wavelength_m > 0.0) {
            return Err(Error::validation(format!(
                "wavelength must be positive, got {wavelength_m} m"
            )));
        }
        if !(finesse.is_finite() && finesse >= 1.0) {
            return Err(Error::validation(format!(
                "finesse must be >= 1, got {finesse}"
            )));
        }
        if mode_number == 0 {
            return Err(Error::validation("mode number must be positive"));
        }
        if !(peak_transmission > 0.0 && peak_transmission <= 1.0) {
            return Err(Error::validation(format!(
                "peak transmission must lie in (0, 1], got {peak_transmission}"
            )));
        }
        Ok(CavityGeometry {
            wavelength_m,
            finesse,
            mode_number,
            peak_transmission,
            mirror_transmissions: None,
        })
    }

    pub fn with_mirror_transmissions(mut self, fiber: f64, planar: f64) -> Self {
        self.mirror_transmissions = Some((fiber, planar));
        self
    }

    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_m
    }

    pub fn finesse(&self) -> f64 {
        self.finesse
    }

    pub fn mode_number(&self) -> u64 {
        self.mode_number
    }

    pub fn peak_transmission(&self) -> f64 {
        self.peak_transmission
    }

    pub fn mirror_transmissions(&self) -> Option<(f64, f64)> {
        self.mirror_transmissions
    }

    /// Fringe slope factor G = 2 F / pi.
    pub fn slope_factor(&self) -> f64 {
        2.0 * self.finesse / PI
    }

    /// On-resonance length L = q lambda / 2.
    pub fn on_resonance_length_m(&self) -> f64 {
        self.mode_number as f64 * self.wavelength_m / 2.0
    }

    /// Free spectral range in length, lambda / 2.
    pub fn free_spectral_range_m(&self) -> f64 {
        self.wavelength_m / 2.0
    }

    /// Spatial-equivalent linewidth (FWHM) lambda / (2 F).
    pub fn spatial_linewidth_m(&self) -> f64 {
        self.wavelength_m / (2.0 * self.finesse)
    }
}

/// Which side of the resonance the servo locks to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockSide {
    BelowResonance,
    AboveResonance,
}

/// Side-of-fringe operating point: the offset of maximum |dT/dz|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockPoint {
    /// Signed offset from resonance in meters (negative below resonance).
    pub offset_m: f64,
    /// Transmission at the lock point.
    pub transmission: f64,
    /// Fringe slope dT/dz at the lock point, in 1/m.
    pub slope_per_m: f64,
}

/// Cavity transmission at mirror separation `z_m` (Airy fringe).
pub fn transmission(z_m: f64, geom: &CavityGeometry) -> f64 {
    let phi = 2.0 * PI * (z_m - geom.on_resonance_length_m()) / geom.wavelength_m;
    let gs = geom.slope_factor() * phi.sin();
    geom.peak_transmission / (1.0 + gs * gs)
}

/// Derivative dT/dz of the transmission fringe at `z_m`, in 1/m.
pub fn transmission_slope(z_m: f64, geom: &CavityGeometry) -> f64 {
    let g = geom.slope_factor();
    let lambda = geom.wavelength_m;
    let phi = 2.0 * PI * (z_m - geom.on_resonance_length_m()) / lambda;
    let denom = 1.0 + (g * phi.sin()).powi(2);
    -geom.peak_transmission * (4.0 * g * g * PI / lambda) * phi.sin() * phi.cos()
        / (denom * denom)
}

/// Spatial-equivalent linewidth lambda / (2 F) for a given finesse.
pub fn finesse_to_spatial_linewidth(finesse: f64, wavelength_m: f64) -> Result<f64> {
    if !(finesse.is_finite() && finesse >= 1.0) {
        return Err(Error::validation(format!(
            "finesse must be >= 1, got {finesse}"
        )));
    }
    if !(wavelength_m.is_finite() && wavelength_m > 0.0) {
        return Err(Error::validation(format!(
            "wavelength must be positive, got {wavelength_m} m"
        )));
    }
    Ok(wavelength_m / (2.0 * finesse))
}

/// All resonance lengths L + m lambda/2 inside the half-open interval
/// `[z_min, z_max)`, ascending. An empty or inverted interval yields an
/// empty list.
pub fn resonance_lengths(geom: &CavityGeometry, z_min_m: f64, z_max_m: f64) -> Vec<f64> {
    let fsr = geom.free_spectral_range_m();
    let l = geom.on_resonance_length_m();
    if !(z_max_m > z_min_m) {
        return Vec::new();
    }
    let first = ((z_min_m - l) / fsr).ceil() as i64;
    let mut out = Vec::new();
    let mut m = first;
    loop {
        let z = l + m as f64 * fsr;
        if z >= z_max_m {
            break;
        }
        if z >= z_min_m {
            out.push(z);
        }
        m += 1;
    }
    out
}

/// Finds the side-of-fringe operating point with maximum |dT/dz|.
///
/// The extremum condition d^2 T / dz^2 = 0 reduces to a quadratic in
/// s = sin^2 PHI:
///
/// ```text
/// 2 G^2 s^2 - (3 G^2 + 2) s + 1 = 0
/// ```
///
/// whose smaller root locates the steepest point between resonance and the
/// half-maximum. In the high-finesse limit s -> 1/(3 G^2) and the
/// transmission there approaches 3/4 of the peak.
pub fn find_lock_point(geom: &CavityGeometry, side: LockSide) -> LockPoint {
    let g2 = geom.slope_factor().powi(2);
    let b = 3.0 * g2 + 2.0;
    // Smaller quadratic root in the cancellation-free form 2c / (b + sqrt(D)).
    let s = 2.0 / (b + (b * b - 8.0 * g2).sqrt());
    let phi = s.sqrt().asin();
    let magnitude = phi * geom.wavelength_m / (2.0 * PI);
    let offset_m = match side {
        LockSide::BelowResonance => -magnitude,
        LockSide::AboveResonance => magnitude,
    };
    let z = geom.on_resonance_length_m() + offset_m;
    LockPoint {
        offset_m,
        transmission: transmission(z, geom),
        slope_per_m: transmission_slope(z, geom),
    }
}

/// Result of converting a transmission trace to displacement.
#[derive(Debug, Clone)]
pub struct DisplacementConversion {
    /// Displacement around the lock point, in meters, same sampling as the
    /// input.
    pub displacement: TimeSeries,
    /// Per-sample flag: true where the input transmission left the validity
    /// band of the linear inversion.
    pub out_of_band: Vec<bool>,
    /// Number of flagged samples.
    pub out_of_band_count: usize,
}

/// Default validity band for the linear inversion, as fractions of the peak
/// transmission. Brackets the maximum-slope point (3/4 of peak) while
/// excluding the flat fringe top and the tails where the slope collapses.
pub const DEFAULT_VALIDITY_BAND: (f64, f64) = (0.4, 0.95);

/// Converts a transmission trace to cavity-length displacement around the
/// lock point in the linear small-fluctuation approximation
/// `d = (T - T_lock) / (dT/dz)`.
///
/// Samples outside the validity band (`band` as fractions of peak
/// transmission, [`DEFAULT_VALIDITY_BAND`] when `None`) are flagged but still
/// converted.
pub fn transmission_to_displacement(
    trace: &TimeSeries,
    geom: &CavityGeometry,
    lock: &LockPoint,
    band: Option<(f64, f64)>,
) -> Result<DisplacementConversion> {
    if trace.unit() != SignalUnit::Transmission {
        return Err(Error::validation(format!(
            "expected a transmission trace, got unit '{}'",
            trace.unit()
        )));
    }
    if lock.slope_per_m == 0.0 {
        return Err(Error::validation(
            "lock point slope is zero; cannot invert transmission",
        ));
    }
    let (lo_frac, hi_frac) = band.unwrap_or(DEFAULT_VALIDITY_BAND);
    if !(lo_frac >= 0.0 && lo_frac < hi_frac) {
        return Err(Error::validation(format!(
            "invalid validity band ({lo_frac}, {hi_frac})"
        )));
    }
    let lo = lo_frac * geom.peak_transmission;
    let hi = hi_frac * geom.peak_transmission;

    let mut out_of_band = Vec::with_capacity(trace.len());
    let mut count = 0usize;
    let values: Vec<f64> = trace
        .values()
        .iter()
        .map(|&t| {
            let outside = !(lo..=hi).contains(&t);
            out_of_band.push(outside);
            count += outside as usize;
            (t - lock.transmission) / lock.slope_per_m
        })
        .collect();

    Ok(DisplacementConversion {
        displacement: trace.with_values(values, SignalUnit::Meter)?,
        out_of_band,
        out_of_band_count: count,
    })
}

/// Forward model of the side-of-fringe readout: maps a displacement trace
/// around the lock point to the transmission the photodiode would see.
pub fn displacement_to_transmission(
    trace: &TimeSeries,
    geom: &CavityGeometry,
    lock: &LockPoint,
) -> Result<TimeSeries> {
    if trace.unit() != SignalUnit::Meter {
        return Err(Error::validation(format!(
            "expected a displacement trace, got unit '{}'",
            trace.unit()
        )));
    }
    let z_lock = geom.on_resonance_length_m() + lock.offset_m;
    let values = trace
        .values()
        .iter()
        .map(|&d| transmission(z_lock + d, geom))
        .collect();
    trace.with_values(values, SignalUnit::Transmission)
}

/// Fringe fit result.
#[derive(Debug, Clone)]
pub struct ResonanceFit {
    pub peak_transmission: f64,
    pub resonance_length_m: f64,
    pub finesse: f64,
    /// rms of the transmission residuals at the fitted parameters.
    pub rms_residual: f64,
    pub iterations: usize,
}

/// Fits the Airy fringe to `(z, transmission)` samples around one resonance,
/// recovering peak transmission, resonance length and finesse.
///
/// Initial values are derivative-free: peak from the maximum sample,
/// resonance length from its position, finesse from the half-maximum width.
/// Non-convergence returns [`Error::FitNotConverged`] carrying the
/// best-so-far parameters `[T0, L, F]`.
pub fn fit_resonance(samples: &[(f64, f64)], wavelength_m: f64) -> Result<ResonanceFit> {
    if samples.len() < 10 {
        return Err(Error::validation(format!(
            "fringe fit needs at least 10 samples, got {}",
            samples.len()
        )));
    }
    if !samples.windows(2).all(|w| w[1].0 > w[0].0) {
        return Err(Error::validation(
            "fringe fit positions must be strictly increasing",
        ));
    }
    let t_max = samples.iter().map(|s| s.1).fold(f64::MIN, f64::max);
    let t_min = samples.iter().map(|s| s.1).fold(f64::MAX, f64::min);
    if t_max - t_min <= 1e-12 * t_max.abs().max(1e-300) {
        return Err(Error::validation(
            "fringe fit data is constant; no resonance to fit",
        ));
    }

    let (argmax, _) = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .unwrap();
    let l_init = samples[argmax].0;

    // Half-maximum crossings bracket the linewidth.
    let half = 0.5 * t_max;
    let left = samples[..argmax]
        .iter()
        .rev()
        .find(|s| s.1 < half)
        .map(|s| s.0);
    let right = samples[argmax..].iter().find(|s| s.1 < half).map(|s| s.0);
    let width = match (left, right) {
        (Some(a), Some(b)) => b - a,
        _ => {
            return Err(Error::validation(
                "fringe fit data does not span a full linewidth around the peak",
            ))
        }
    };
    let f_init = (wavelength_m / (2.0 * width)).max(1.0);

    let model = |p: &[f64], r: &mut [f64]| {
        let (t0, l, f) = (p[0], p[1], p[2]);
        let g = 2.0 * f / PI;
        for (i, &(z, t)) in samples.iter().enumerate() {
            let phi = 2.0 * PI * (z - l) / wavelength_m;
            let gs = g * phi.sin();
            r[i] = t0 / (1.0 + gs * gs) - t;
        }
    };

    let outcome = levenberg_marquardt(
        model,
        samples.len(),
        &[t_max, l_init, f_init],
        &LmOptions::default(),
    )
    .into_result()?;

    Ok(ResonanceFit {
        peak_transmission: outcome.params[0],
        resonance_length_m: outcome.params[1],
        finesse: outcome.params[2].abs(),
        rms_residual: outcome.rms_residual,
        iterations: outcome.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const NM: f64 = 1e-9;

    fn default_geometry() -> CavityGeometry {
        CavityGeometry::new(780.0 * NM, 110.0, 13, 1.0).unwrap()
    }

    // -- geometry invariants --

    #[test]
    fn derived_quantities_match_definitions() {
        let geom = default_geometry();
        assert_relative_eq!(geom.slope_factor(), 2.0 * 110.0 / PI);
        assert_relative_eq!(geom.on_resonance_length_m(), 13.0 * 780.0 * NM / 2.0);
        // 5.07 um mode length for q = 13 at 780 nm
        assert_relative_eq!(geom.on_resonance_length_m(), 5.07e-6, max_relative = 1e-12);
        let dl = geom.spatial_linewidth_m();
        assert!(dl > 0.0 && dl < geom.free_spectral_range_m());
    }

    #[test]
    fn geometry_rejects_invalid_parameters() {
        assert!(CavityGeometry::new(-780.0 * NM, 110.0, 13, 1.0).is_err());
        assert!(CavityGeometry::new(780.0 * NM, 0.5, 13, 1.0).is_err());
        assert!(CavityGeometry::new(780.0 * NM, 110.0, 0, 1.0).is_err());
        assert!(CavityGeometry::new(780.0 * NM, 110.0, 13, 0.0).is_err());
        assert!(CavityGeometry::new(780.0 * NM, 110.0, 13, 1.5).is_err());
    }

    // -- transmission --

    #[test]
    fn on_resonance_transmission_is_peak() {
        let geom = default_geometry();
        assert_eq!(
            transmission(geom.on_resonance_length_m(), &geom),
            geom.peak_transmission()
        );
    }

    #[test]
    fn fwhm_matches_spatial_linewidth() {
        // Width between the half-maximum points: 3.55 nm for F = 110 at
        // 780 nm, within 0.5% of lambda / (2 F) = 3.545 nm.
        let geom = default_geometry();
        let g = geom.slope_factor();
        let half_offset = (1.0 / g).asin() * geom.wavelength_m() / (2.0 * PI);
        let fwhm = 2.0 * half_offset;
        assert_relative_eq!(fwhm, 3.55 * NM, max_relative = 2e-3);
        assert_relative_eq!(fwhm, geom.spatial_linewidth_m(), max_relative = 5e-3);
        // and the half-maximum points really sit at T0/2
        let l = geom.on_resonance_length_m();
        assert_relative_eq!(transmission(l + half_offset, &geom), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn antiresonance_transmission_floor() {
        let geom = default_geometry();
        let z = geom.on_resonance_length_m() + geom.wavelength_m() / 4.0;
        let g2 = geom.slope_factor().powi(2);
        assert_relative_eq!(transmission(z, &geom), 1.0 / (1.0 + g2), epsilon = 1e-15);
        // For F = 110 the floor is about T0 / 4905.
        assert_relative_eq!(transmission(z, &geom), 1.0 / 4905.0, max_relative = 1e-3);
    }

    proptest! {
        // The rounding of z + lambda/2 itself costs ~3e-15 of phase, which
        // the fringe amplifies by up to G near the half-maximum points;
        // 1e-12 relative periodicity therefore holds for G <~ 300, i.e.
        // finesse up to ~450. The instrument-relevant range is far below.
        #[test]
        fn transmission_is_periodic_and_bounded(
            finesse in 1.0f64..450.0,
            z_frac in -5.0f64..5.0,
        ) {
            let geom = CavityGeometry::new(780.0 * NM, finesse, 13, 1.0).unwrap();
            let z = geom.on_resonance_length_m() + z_frac * geom.wavelength_m();
            let t = transmission(z, &geom);
            let t_shift = transmission(z + geom.wavelength_m() / 2.0, &geom);
            prop_assert!((t - t_shift).abs() <= 1e-12 * t.abs());
            let floor = 1.0 / (1.0 + geom.slope_factor().powi(2));
            prop_assert!(t >= floor * (1.0 - 1e-12) && t <= 1.0);
        }

        #[test]
        fn slope_is_antisymmetric_about_resonance(
            finesse in 1.0f64..2000.0,
            delta_frac in 1e-6f64..0.49,
        ) {
            let geom = CavityGeometry::new(780.0 * NM, finesse, 13, 1.0).unwrap();
            let l = geom.on_resonance_length_m();
            let d = delta_frac * geom.wavelength_m() / 2.0;
            let up = transmission_slope(l + d, &geom);
            let down = transmission_slope(l - d, &geom);
            prop_assert!((up + down).abs() <= 1e-12 * up.abs().max(1e-300));
        }
    }

    // -- slope --

    #[test]
    fn slope_vanishes_on_resonance() {
        let geom = default_geometry();
        assert_eq!(transmission_slope(geom.on_resonance_length_m(), &geom), 0.0);
    }

    #[test]
    fn slope_matches_finite_difference() {
        let geom = default_geometry();
        let l = geom.on_resonance_length_m();
        let h = 1e-4 * geom.spatial_linewidth_m();
        for frac in [-0.9, -0.5, -0.2, 0.1, 0.3, 0.7, 1.3] {
            let z = l + frac * geom.spatial_linewidth_m();
            let fd = (transmission(z + h, &geom) - transmission(z - h, &geom)) / (2.0 * h);
            let analytic = transmission_slope(z, &geom);
            assert_relative_eq!(analytic, fd, max_relative = 1e-6);
        }
    }

    // -- linewidth helper --

    #[test]
    fn spatial_linewidth_reference_values() {
        let nm = |f: f64| finesse_to_spatial_linewidth(f, 780.0 * NM).unwrap() / NM;
        assert_relative_eq!(nm(1000.0), 0.39, max_relative = 1e-12);
        assert_relative_eq!(nm(30.0), 13.0, max_relative = 1e-12);
        assert_relative_eq!(nm(110.0), 3.545, max_relative = 1e-3);
        assert!(finesse_to_spatial_linewidth(0.0, 780.0 * NM).is_err());
        assert!(finesse_to_spatial_linewidth(110.0, -1.0).is_err());
    }

    // -- resonance comb --

    #[test]
    fn resonances_are_spaced_by_half_wavelength() {
        let geom = default_geometry();
        let l = geom.on_resonance_length_m();
        let lambda = geom.wavelength_m();
        let zs = resonance_lengths(&geom, l - 0.1 * lambda, l + 0.9 * lambda);
        assert_eq!(zs.len(), 2);
        assert_relative_eq!(zs[1] - zs[0], lambda / 2.0, epsilon = 1e-18);
        // Any window of width exactly lambda holds exactly 2 resonances.
        for start_frac in [-0.5, -0.3, 0.0, 0.12, 0.77] {
            let start = l + start_frac * lambda;
            assert_eq!(resonance_lengths(&geom, start, start + lambda).len(), 2);
        }
        assert!(resonance_lengths(&geom, l, l).is_empty());
    }

    #[test]
    fn mode_number_links_length_and_wavelength_detuning() {
        // lambda = 2 L / q: a 120 nm length change at q = 8 moves the
        // resonance wavelength by 2 * 120 / 8 = 30 nm.
        let q = 8.0;
        let delta_l = 120.0 * NM;
        let delta_lambda = 2.0 * delta_l / q;
        assert_relative_eq!(delta_lambda, 30.0 * NM, epsilon = 1e-18);
    }

    // -- lock point --

    #[test]
    fn lock_point_is_self_consistent_and_mirrored() {
        let geom = default_geometry();
        let below = find_lock_point(&geom, LockSide::BelowResonance);
        let above = find_lock_point(&geom, LockSide::AboveResonance);
        let z = geom.on_resonance_length_m() + below.offset_m;
        assert_eq!(below.slope_per_m, transmission_slope(z, &geom));
        assert_eq!(below.transmission, transmission(z, &geom));
        assert_relative_eq!(below.offset_m, -above.offset_m, max_relative = 1e-9);
        assert_relative_eq!(below.slope_per_m, -above.slope_per_m, max_relative = 1e-9);
        assert!(below.offset_m < 0.0 && below.slope_per_m > 0.0);
        // Lock offset lies strictly between resonance and antiresonance.
        assert!(below.offset_m.abs() < geom.wavelength_m() / 4.0);
    }

    #[test]
    fn lock_point_sits_at_three_quarters_of_peak() {
        let geom = default_geometry();
        let lock = find_lock_point(&geom, LockSide::BelowResonance);
        assert!(
            (lock.transmission / geom.peak_transmission() - 0.75).abs() < 0.01,
            "T_lock/T0 = {}",
            lock.transmission
        );
    }

    #[test]
    fn lock_point_maximizes_slope_numerically() {
        // Independent check: golden-section search of |dT/dz| over the
        // below-resonance quarter period.
        let geom = default_geometry();
        let l = geom.on_resonance_length_m();
        let f = |off: f64| -transmission_slope(l + off, &geom).abs();
        let (mut a, mut b) = (-geom.wavelength_m() / 4.0, 0.0);
        let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - inv_phi * (b - a);
            let d = a + inv_phi * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let numeric = 0.5 * (a + b);
        let lock = find_lock_point(&geom, LockSide::BelowResonance);
        assert_relative_eq!(lock.offset_m, numeric, max_relative = 1e-6);
    }

    // -- displacement conversion --

    #[test]
    fn constant_trace_at_lock_point_maps_to_zero() {
        let geom = default_geometry();
        let lock = find_lock_point(&geom, LockSide::BelowResonance);
        let trace = TimeSeries::new(
            1e-5,
            vec![lock.transmission; 64],
            SignalUnit::Transmission,
        )
        .unwrap();
        let conv = transmission_to_displacement(&trace, &geom, &lock, None).unwrap();
        assert!(conv.displacement.values().iter().all(|&d| d == 0.0));
        assert_eq!(conv.out_of_band_count, 0);
    }

    #[test]
    fn out_of_band_samples_are_flagged_not_dropped() {
        let geom = default_geometry();
        let lock = find_lock_point(&geom, LockSide::BelowResonance);
        let mut values = vec![lock.transmission; 16];
        values[3] = 0.99; // flat fringe top
        values[9] = 0.05; // deep tail
        let trace = TimeSeries::new(1e-5, values, SignalUnit::Transmission).unwrap();
        let conv = transmission_to_displacement(&trace, &geom, &lock, None).unwrap();
        assert_eq!(conv.out_of_band_count, 2);
        assert!(conv.out_of_band[3] && conv.out_of_band[9]);
        assert_eq!(conv.displacement.len(), 16);
    }

    #[test]
    fn zero_slope_lock_point_is_rejected() {
        let geom = default_geometry();
        let lock = LockPoint {
            offset_m: 0.0,
            transmission: 1.0,
            slope_per_m: 0.0,
        };
        let trace = TimeSeries::new(1e-5, vec![0.8, 0.8], SignalUnit::Transmission).unwrap();
        assert!(transmission_to_displacement(&trace, &geom, &lock, None).is_err());
    }

    fn round_trip_rms_error(amplitude_m: f64) -> f64 {
        let geom = default_geometry();
        let lock = find_lock_point(&geom, LockSide::BelowResonance);
        let f = 220.0;
        let d_in = TimeSeries::from_fn(1e-5, 20_000, SignalUnit::Meter, |t| {
            amplitude_m * (2.0 * PI * f * t).sin()
        })
        .unwrap();
        let t = displacement_to_transmission(&d_in, &geom, &lock).unwrap();
        let conv = transmission_to_displacement(&t, &geom, &lock, None).unwrap();
        let err2: f64 = d_in
            .values()
            .iter()
            .zip(conv.displacement.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let sig2: f64 = d_in.values().iter().map(|a| a * a).sum();
        (err2 / sig2).sqrt()
    }

    #[test]
    fn inversion_round_trip_is_linear_for_small_amplitudes() {
        // 30 pm sine survives the forward model and inversion within 5% rms.
        assert!(round_trip_rms_error(30e-12) < 0.05);
    }

    #[test]
    fn inversion_error_grows_monotonically_with_amplitude() {
        // Measured round-trip rms error vs amplitude (F = 110, 780 nm):
        //   dl/100 -> ~2e-5, dl/50 -> ~1e-4, dl/20 -> ~6e-4,
        //   dl/10  -> ~2.5e-3, dl/5 -> ~1e-2
        let dl = default_geometry().spatial_linewidth_m();
        let errors: Vec<f64> = [dl / 100.0, dl / 50.0, dl / 20.0, dl / 10.0, dl / 5.0]
            .iter()
            .map(|&a| round_trip_rms_error(a))
            .collect();
        assert!(errors[2] <= 0.02, "error at dl/20 = {}", errors[2]);
        for w in errors.windows(2) {
            assert!(w[1] > w[0], "errors not monotone: {errors:?}");
        }
    }

    // -- fringe fit --

    fn fringe_samples(geom: &CavityGeometry, n: usize, span_linewidths: f64) -> Vec<(f64, f64)> {
        let l = geom.on_resonance_length_m();
        let dl = geom.spatial_linewidth_m();
        (0..n)
            .map(|i| {
                let z = l + dl * span_linewidths * (i as f64 / (n - 1) as f64 - 0.5);
                (z, transmission(z, geom))
            })
            .collect()
    }

    #[test]
    fn noiseless_fit_recovers_finesse() {
        let geom = default_geometry();
        let samples = fringe_samples(&geom, 200, 5.0);
        let fit = fit_resonance(&samples, geom.wavelength_m()).unwrap();
        assert!(
            (fit.finesse - 110.0).abs() / 110.0 < 1e-3,
            "finesse = {}",
            fit.finesse
        );
        assert_relative_eq!(fit.peak_transmission, 1.0, max_relative = 1e-6);
        assert_relative_eq!(
            fit.resonance_length_m,
            geom.on_resonance_length_m(),
            max_relative = 1e-9
        );
        assert!(fit.rms_residual < 1e-9);
        // Recovered spatial linewidth: 3.5 +- 0.1 nm.
        let dl = finesse_to_spatial_linewidth(fit.finesse, geom.wavelength_m()).unwrap();
        assert!((dl - 3.5e-9).abs() < 0.1e-9);
    }

    #[test]
    fn degenerate_fit_inputs_are_rejected() {
        let geom = default_geometry();
        let few = fringe_samples(&geom, 5, 2.0);
        assert!(fit_resonance(&few, geom.wavelength_m()).is_err());

        let flat: Vec<(f64, f64)> = (0..30).map(|i| (i as f64 * NM, 0.5)).collect();
        assert!(fit_resonance(&flat, geom.wavelength_m()).is_err());

        let mut unsorted = fringe_samples(&geom, 30, 3.0);
        unsorted.swap(3, 4);
        assert!(fit_resonance(&unsorted, geom.wavelength_m()).is_err());
    }
}
