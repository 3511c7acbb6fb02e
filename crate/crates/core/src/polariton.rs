//! Coupled exciton-photon oscillator model.
//!
//! A cavity mode at energy `E_C` (linewidth `kappa`, FWHM) coupled with
//! strength `g` to an exciton at `E_X` (linewidth `Gamma`) forms upper and
//! lower polaritons. The model is the 2x2 non-Hermitian matrix
//!
//! ```text
//! | E_C - i kappa/2      g          |
//! |      g          E_X - i Gamma/2 |
//! ```
//!
//! whose eigenvalues carry the branch energies in their real parts and the
//! half-linewidths in their imaginary parts. At `g = 0` the branches reduce
//! to the bare damped modes; at zero detuning with equal linewidths the
//! branch separation is exactly `2 g`. The observable normal-mode splitting
//! `S` (the minimal branch separation across detuning) gives the
//! cooperativity `C = 2 S^2 / (kappa Gamma)`.
//!
//! All energies are in meV.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LmOptions};

/// Exciton-photon model parameters at one detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonModel {
    pub exciton_energy_mev: f64,
    /// Exciton linewidth Gamma (FWHM).
    pub exciton_linewidth_mev: f64,
    /// Cavity linewidth kappa (FWHM).
    pub cavity_linewidth_mev: f64,
    /// Coupling strength g.
    pub coupling_mev: f64,
    /// Detuning Delta = E_C - E_X.
    pub detuning_mev: f64,
}

impl PolaritonModel {
    pub fn new(
        exciton_energy_mev: f64,
        exciton_linewidth_mev: f64,
        cavity_linewidth_mev: f64,
        coupling_mev: f64,
        detuning_mev: f64,
    ) -> Result<Self> {
        if !(exciton_linewidth_mev > 0.0 && cavity_linewidth_mev > 0.0) {
            return Err(Error::validation(format!(
                "linewidths must be positive, got Gamma = {exciton_linewidth_mev}, \
                 kappa = {cavity_linewidth_mev} meV"
            )));
        }
        if !(coupling_mev.is_finite() && coupling_mev >= 0.0) {
            return Err(Error::validation(format!(
                "coupling must be >= 0, got {coupling_mev} meV"
            )));
        }
        if !(exciton_energy_mev.is_finite() && detuning_mev.is_finite()) {
            return Err(Error::validation("energies must be finite"));
        }
        Ok(PolaritonModel {
            exciton_energy_mev,
            exciton_linewidth_mev,
            cavity_linewidth_mev,
            coupling_mev,
            detuning_mev,
        })
    }

    pub fn cavity_energy_mev(&self) -> f64 {
        self.exciton_energy_mev + self.detuning_mev
    }

    pub fn with_detuning(&self, detuning_mev: f64) -> Self {
        PolaritonModel {
            detuning_mev,
            ..self.clone()
        }
    }
}

/// Complex eigenenergies (upper, lower) of the coupled system, ordered by
/// real part. Real parts are the branch energies, -2 Im the linewidths.
pub fn polariton_eigenenergies(model: &PolaritonModel) -> (Complex64, Complex64) {
    let e_c = Complex64::new(
        model.cavity_energy_mev(),
        -0.5 * model.cavity_linewidth_mev,
    );
    let e_x = Complex64::new(
        model.exciton_energy_mev,
        -0.5 * model.exciton_linewidth_mev,
    );
    let mean = 0.5 * (e_c + e_x);
    let half_diff = 0.5 * (e_c - e_x);
    let root = (half_diff * half_diff
        + Complex64::new(model.coupling_mev * model.coupling_mev, 0.0))
    .sqrt();
    let (a, b) = (mean + root, mean - root);
    if a.re >= b.re {
        (a, b)
    } else {
        (b, a)
    }
}

/// Real branch separation Re(E+) - Re(E-) at the model's detuning.
pub fn branch_separation_mev(model: &PolaritonModel) -> f64 {
    let (upper, lower) = polariton_eigenenergies(model);
    upper.re - lower.re
}

/// Location and value of the minimal branch separation over a detuning range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingMinimum {
    /// Normal-mode splitting S: the minimal separation.
    pub splitting_mev: f64,
    pub detuning_mev: f64,
}

/// Minimizes the branch separation over a detuning interval (golden-section).
/// Fails when the minimum sits on the interval edge, i.e. the range does not
/// bracket it.
pub fn normal_mode_splitting(
    model: &PolaritonModel,
    detuning_range_mev: (f64, f64),
) -> Result<SplittingMinimum> {
    let (mut a, mut b) = detuning_range_mev;
    if !(b > a) {
        return Err(Error::validation(format!(
            "detuning range ({a}, {b}) meV is empty"
        )));
    }
    let width = b - a;
    let f = |delta: f64| branch_separation_mev(&model.with_detuning(delta));
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let c = b - inv_phi * (b - a);
        let d = a + inv_phi * (b - a);
        let (fc, fd) = (f(c), f(d));
        // On a tie (exactly symmetric separation curves) shrink both ends,
        // otherwise the bracket drifts toward one edge.
        if fc < fd {
            b = d;
        } else if fc > fd {
            a = c;
        } else {
            a = c;
            b = d;
        }
        if b - a < 1e-14 * width {
            break;
        }
    }
    let detuning = 0.5 * (a + b);
    let edge_distance = (detuning - detuning_range_mev.0)
        .min(detuning_range_mev.1 - detuning);
    if edge_distance < 1e-3 * width {
        return Err(Error::validation(format!(
            "detuning range ({}, {}) meV does not bracket the splitting minimum",
            detuning_range_mev.0, detuning_range_mev.1
        )));
    }
    Ok(SplittingMinimum {
        splitting_mev: f(detuning),
        detuning_mev: detuning,
    })
}

/// Cooperativity C = 2 S^2 / (kappa Gamma) from the observable splitting.
pub fn cooperativity(splitting_mev: f64, kappa_mev: f64, gamma_mev: f64) -> Result<f64> {
    if !(splitting_mev >= 0.0) {
        return Err(Error::validation(format!(
            "splitting must be >= 0, got {splitting_mev} meV"
        )));
    }
    if !(kappa_mev > 0.0 && gamma_mev > 0.0) {
        return Err(Error::validation(format!(
            "linewidths must be positive, got kappa = {kappa_mev}, gamma = {gamma_mev} meV"
        )));
    }
    Ok(2.0 * splitting_mev * splitting_mev / (kappa_mev * gamma_mev))
}

/// Photonic Hopfield fractions (upper branch, lower branch) at a detuning.
/// Each lies in [0, 1]; they sum to 1.
pub fn hopfield_photon_fractions(detuning_mev: f64, coupling_mev: f64) -> (f64, f64) {
    let denom = (detuning_mev * detuning_mev + 4.0 * coupling_mev * coupling_mev).sqrt();
    if denom == 0.0 {
        return (0.5, 0.5);
    }
    let upper = 0.5 * (1.0 + detuning_mev / denom);
    (upper, 1.0 - upper)
}

/// Affine map from piezo voltage to cavity energy: E_C(V) = intercept +
/// slope * V.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningCalibration {
    pub intercept_mev: f64,
    pub slope_mev_per_volt: f64,
}

impl DetuningCalibration {
    pub fn new(intercept_mev: f64, slope_mev_per_volt: f64) -> Result<Self> {
        if slope_mev_per_volt == 0.0 || !slope_mev_per_volt.is_finite() {
            return Err(Error::validation(
                "calibration slope must be finite and nonzero",
            ));
        }
        Ok(DetuningCalibration {
            intercept_mev,
            slope_mev_per_volt,
        })
    }

    pub fn cavity_energy_mev(&self, voltage_v: f64) -> f64 {
        self.intercept_mev + self.slope_mev_per_volt * voltage_v
    }
}

/// Synthetic transmission map over a (voltage, energy) grid.
#[derive(Debug, Clone)]
pub struct TransmissionMap {
    pub voltages_v: Vec<f64>,
    pub energies_mev: Vec<f64>,
    /// Row-major: `values[v_idx * energies.len() + e_idx]`.
    pub values: Vec<f64>,
}

impl TransmissionMap {
    pub fn row(&self, v_idx: usize) -> &[f64] {
        let n = self.energies_mev.len();
        &self.values[v_idx * n..(v_idx + 1) * n]
    }
}

/// Forward model of an avoided-crossing transmission measurement: at each
/// voltage the cavity energy follows the calibration and the map carries two
/// Lorentzians at the branch energies, FWHM -2 Im(E), weighted by the
/// photonic Hopfield fractions.
pub fn synthesize_transmission_map(
    model: &PolaritonModel,
    calibration: &DetuningCalibration,
    voltages_v: &[f64],
    energies_mev: &[f64],
) -> Result<TransmissionMap> {
    if voltages_v.is_empty() || energies_mev.is_empty() {
        return Err(Error::validation("voltage and energy grids must be non-empty"));
    }
    if !voltages_v.windows(2).all(|w| w[1] > w[0])
        || !energies_mev.windows(2).all(|w| w[1] > w[0])
    {
        return Err(Error::validation(
            "voltage and energy grids must be strictly ascending",
        ));
    }
    let mut values = Vec::with_capacity(voltages_v.len() * energies_mev.len());
    for &v in voltages_v {
        let detuning = calibration.cavity_energy_mev(v) - model.exciton_energy_mev;
        let at_v = model.with_detuning(detuning);
        let (upper, lower) = polariton_eigenenergies(&at_v);
        let (w_up, w_lo) = hopfield_photon_fractions(detuning, model.coupling_mev);
        for &e in energies_mev {
            let mut t = 0.0;
            for (branch, weight) in [(upper, w_up), (lower, w_lo)] {
                let hw = -branch.im; // half width at half maximum
                let de = e - branch.re;
                t += weight * hw * hw / (de * de + hw * hw);
            }
            values.push(t);
        }
    }
    Ok(TransmissionMap {
        voltages_v: voltages_v.to_vec(),
        energies_mev: energies_mev.to_vec(),
        values,
    })
}

/// Polariton branch label of an observed peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Upper,
    Lower,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Upper => write!(f, "upper"),
            Branch::Lower => write!(f, "lower"),
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Branch::Upper),
            "lower" => Ok(Branch::Lower),
            other => Err(Error::validation(format!(
                "unknown branch '{other}' (expected 'upper' or 'lower')"
            ))),
        }
    }
}

/// One observed polariton peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingObservation {
    pub voltage_v: f64,
    pub energy_mev: f64,
    pub branch: Branch,
}

/// Avoided-crossing fit result.
#[derive(Debug, Clone)]
pub struct CrossingFit {
    pub coupling_mev: f64,
    pub calibration: DetuningCalibration,
    pub rms_residual_mev: f64,
    /// True when the fitted detunings of all observations share one sign:
    /// the calibration is then poorly constrained.
    pub one_sided: bool,
}

/// Fits the coupled-oscillator branches to observed peak energies,
/// recovering the coupling and the voltage calibration. Linewidths and the
/// exciton energy are measured independently and stay fixed.
pub fn fit_avoided_crossing(
    observations: &[CrossingObservation],
    kappa_mev: f64,
    gamma_mev: f64,
    exciton_energy_mev: f64,
) -> Result<CrossingFit> {
    if observations.len() < 6 {
        return Err(Error::validation(format!(
            "avoided-crossing fit needs at least 6 observations, got {}",
            observations.len()
        )));
    }
    if !(kappa_mev > 0.0 && gamma_mev > 0.0) {
        return Err(Error::validation("linewidths must be positive"));
    }

    // Initial calibration from the branch-sum rule: where both branches are
    // observed at one voltage, Re(E+) + Re(E-) ~= E_C + E_X.
    let mut sums: Vec<(f64, f64)> = Vec::new();
    let mut by_voltage: std::collections::BTreeMap<u64, Vec<&CrossingObservation>> =
        std::collections::BTreeMap::new();
    for obs in observations {
        by_voltage
            .entry(obs.voltage_v.to_bits())
            .or_default()
            .push(obs);
    }
    let mut min_separation = f64::MAX;
    for group in by_voltage.values() {
        let upper = group.iter().find(|o| o.branch == Branch::Upper);
        let lower = group.iter().find(|o| o.branch == Branch::Lower);
        if let (Some(u), Some(l)) = (upper, lower) {
            sums.push((u.voltage_v, u.energy_mev + l.energy_mev - exciton_energy_mev));
            min_separation = min_separation.min(u.energy_mev - l.energy_mev);
        }
    }
    let (intercept_init, slope_init) = if sums.len() >= 2 {
        linear_regression(&sums)
    } else {
        // Degenerate labeling: fall back to a regression through all points.
        let pts: Vec<(f64, f64)> = observations
            .iter()
            .map(|o| (o.voltage_v, o.energy_mev))
            .collect();
        linear_regression(&pts)
    };
    let g_init = if min_separation < f64::MAX {
        (0.5 * min_separation).max(1e-3)
    } else {
        1.0
    };

    let residuals = |p: &[f64], r: &mut [f64]| {
        let g = p[0].abs();
        let (a, b) = (p[1], p[2]);
        for (i, obs) in observations.iter().enumerate() {
            let detuning = a + b * obs.voltage_v - exciton_energy_mev;
            let model = PolaritonModel {
                exciton_energy_mev,
                exciton_linewidth_mev: gamma_mev,
                cavity_linewidth_mev: kappa_mev,
                coupling_mev: g,
                detuning_mev: detuning,
            };
            let (upper, lower) = polariton_eigenenergies(&model);
            let predicted = match obs.branch {
                Branch::Upper => upper.re,
                Branch::Lower => lower.re,
            };
            r[i] = predicted - obs.energy_mev;
        }
    };

    let outcome = levenberg_marquardt(
        residuals,
        observations.len(),
        &[g_init, intercept_init, slope_init],
        &LmOptions::default(),
    )
    .into_result()?;

    let calibration = DetuningCalibration::new(outcome.params[1], outcome.params[2])?;
    let signs: Vec<f64> = observations
        .iter()
        .map(|o| calibration.cavity_energy_mev(o.voltage_v) - exciton_energy_mev)
        .collect();
    let one_sided = signs.iter().all(|d| *d > 0.0) || signs.iter().all(|d| *d < 0.0);
    if one_sided {
        log::warn!(
            "all observations sit on one side of the resonance; \
             the detuning calibration is ill-conditioned"
        );
    }

    Ok(CrossingFit {
        coupling_mev: outcome.params[0].abs(),
        calibration,
        rms_residual_mev: outcome.rms_residual,
        one_sided,
    })
}

fn linear_regression(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return (sy / n, 1.0);
    }
    let slope = (n * sxy - sx * sy) / denom;
    ((sy - slope * sx) / n, slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_model(detuning: f64) -> PolaritonModel {
        // kappa = 6.3 meV, Gamma = 6.1 meV, g = 2.75 meV at E_X = 1725 meV
        PolaritonModel::new(1725.0, 6.1, 6.3, 2.75, detuning).unwrap()
    }

    // -- eigenenergies --

    #[test]
    fn decoupled_limit_returns_bare_modes() {
        let model = PolaritonModel::new(1725.0, 6.1, 6.3, 0.0, -4.0).unwrap();
        let (upper, lower) = polariton_eigenenergies(&model);
        // g = 0: bare cavity at E_X - 4 with -i kappa/2, bare exciton with
        // -i Gamma/2.
        let bare_cavity = Complex64::new(1721.0, -3.15);
        let bare_exciton = Complex64::new(1725.0, -3.05);
        assert!((upper - bare_exciton).norm() < 1e-12);
        assert!((lower - bare_cavity).norm() < 1e-12);
    }

    #[test]
    fn symmetric_resonance_splits_by_twice_coupling() {
        let model = PolaritonModel::new(1725.0, 6.0, 6.0, 2.75, 0.0).unwrap();
        let (upper, lower) = polariton_eigenenergies(&model);
        assert_relative_eq!(upper.re - lower.re, 5.5, epsilon = 1e-12);
    }

    #[test]
    fn reference_parameters_give_half_meV_splitting() {
        let (upper, lower) = polariton_eigenenergies(&reference_model(0.0));
        let s = upper.re - lower.re;
        assert!((s - 5.50).abs() < 0.01, "splitting = {s} meV");
    }

    #[test]
    fn trace_is_conserved() {
        for detuning in [-30.0, -3.0, 0.0, 1.7, 12.0] {
            for g in [0.0, 1.0, 2.75, 8.0] {
                let model = PolaritonModel::new(1725.0, 6.1, 6.3, g, detuning).unwrap();
                let (upper, lower) = polariton_eigenenergies(&model);
                let sum = upper + lower;
                let expected = Complex64::new(
                    model.cavity_energy_mev() + model.exciton_energy_mev,
                    -0.5 * (6.3 + 6.1),
                );
                assert!(
                    (sum - expected).norm() <= 1e-12 * expected.norm(),
                    "trace violated at detuning {detuning}, g {g}"
                );
            }
        }
    }

    #[test]
    fn eigenvalues_annihilate_the_characteristic_polynomial() {
        // Independent oracle: each eigenvalue must satisfy
        // det(M - lambda I) = 0 for the defining 2x2 matrix.
        for detuning in [-9.0, -0.4, 0.0, 2.2, 17.0] {
            let model = reference_model(detuning);
            let e_c = Complex64::new(model.cavity_energy_mev(), -0.5 * 6.3);
            let e_x = Complex64::new(1725.0, -0.5 * 6.1);
            let g = Complex64::new(2.75, 0.0);
            let (upper, lower) = polariton_eigenenergies(&model);
            for lambda in [upper, lower] {
                let det = (e_c - lambda) * (e_x - lambda) - g * g;
                assert!(
                    det.norm() <= 1e-12 * e_c.norm() * e_x.norm() / 1000.0,
                    "det residual {} at detuning {detuning}",
                    det.norm()
                );
            }
        }
    }

    #[test]
    fn far_detuned_branches_approach_bare_energies() {
        let g = 2.75;
        for detuning in [-50.0, -27.5, 27.5, 50.0] {
            let model = reference_model(detuning);
            let (upper, lower) = polariton_eigenenergies(&model);
            let (cavity_like, exciton_like) = if detuning > 0.0 {
                (upper, lower)
            } else {
                (lower, upper)
            };
            let tol = 1.1 * g * g / detuning.abs();
            assert!(
                (cavity_like.re - model.cavity_energy_mev()).abs() <= tol,
                "cavity branch off by {} at detuning {detuning}",
                (cavity_like.re - model.cavity_energy_mev()).abs()
            );
            assert!((exciton_like.re - 1725.0).abs() <= tol);
        }
    }

    // -- splitting minimum --

    #[test]
    fn splitting_minimum_sits_at_zero_detuning_for_equal_linewidths() {
        let model = PolaritonModel::new(1725.0, 6.0, 6.0, 2.75, 0.0).unwrap();
        let min = normal_mode_splitting(&model, (-10.0, 10.0)).unwrap();
        assert_relative_eq!(min.splitting_mev, 5.5, epsilon = 1e-9);
        assert!(min.detuning_mev.abs() < 1e-6);
    }

    #[test]
    fn reference_minimum_matches_observed_splitting() {
        let min = normal_mode_splitting(&reference_model(0.0), (-15.0, 15.0)).unwrap();
        assert!((min.splitting_mev - 5.5).abs() < 0.011, "S = {}", min.splitting_mev);
        assert!(min.detuning_mev.abs() < 0.2);
    }

    #[test]
    fn splitting_is_even_in_detuning_for_equal_linewidths() {
        let model = PolaritonModel::new(1725.0, 6.0, 6.0, 2.75, 0.0).unwrap();
        for d in [0.3, 1.0, 4.2, 9.9] {
            let plus = branch_separation_mev(&model.with_detuning(d));
            let minus = branch_separation_mev(&model.with_detuning(-d));
            assert!((plus - minus).abs() <= 1e-9 * plus);
        }
    }

    #[test]
    fn non_bracketing_range_is_an_error() {
        let model = reference_model(0.0);
        assert!(normal_mode_splitting(&model, (5.0, 40.0)).is_err());
        assert!(normal_mode_splitting(&model, (3.0, 3.0)).is_err());
    }

    // -- cooperativity --

    #[test]
    fn cooperativity_reference_value() {
        let c = cooperativity(5.5, 6.3, 6.1).unwrap();
        assert!((c - 1.57).abs() < 0.01, "C = {c}");
    }

    #[test]
    fn cooperativity_trivial_values() {
        assert_eq!(cooperativity(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(cooperativity(1.0, 1.0, 1.0).unwrap(), 2.0);
        assert!(cooperativity(1.0, 0.0, 1.0).is_err());
        assert!(cooperativity(-1.0, 1.0, 1.0).is_err());
    }

    // -- Hopfield fractions --

    #[test]
    fn hopfield_fractions_partition_unity() {
        for detuning in [-40.0, -2.0, 0.0, 3.3, 40.0] {
            let (u, l) = hopfield_photon_fractions(detuning, 2.75);
            assert!((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&l));
            assert_relative_eq!(u + l, 1.0, epsilon = 1e-15);
        }
        assert_eq!(hopfield_photon_fractions(0.0, 0.0), (0.5, 0.5));
    }

    // -- transmission map --

    #[test]
    fn far_red_detuned_map_has_single_photonic_peak() {
        let model = reference_model(0.0);
        let cal = DetuningCalibration::new(1725.0 - 60.0, 1.0).unwrap();
        let energies: Vec<f64> = (0..600).map(|i| 1640.0 + i as f64 * 0.25).collect();
        let map = synthesize_transmission_map(&model, &cal, &[0.0], &energies).unwrap();
        let detuning = -60.0;
        let (_, w_lo) = hopfield_photon_fractions(detuning, 2.75);
        assert!(w_lo > 0.95, "photonic weight = {w_lo}");
        let row = map.row(0);
        let peak_idx = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let cavity = cal.cavity_energy_mev(0.0);
        assert!(
            (energies[peak_idx] - cavity).abs() < 2.0,
            "peak at {} vs E_C {}",
            energies[peak_idx],
            cavity
        );
    }

    #[test]
    fn resonant_map_has_two_equal_peaks() {
        let model = PolaritonModel::new(1725.0, 1.0, 1.0, 2.75, 0.0).unwrap();
        let cal = DetuningCalibration::new(1725.0, 1.0).unwrap();
        let energies: Vec<f64> = (0..2000).map(|i| 1715.0 + i as f64 * 0.01).collect();
        let map = synthesize_transmission_map(&model, &cal, &[0.0], &energies).unwrap();
        let row = map.row(0);
        // Peaks re-trace the branch energies within 2% of the linewidth.
        let (upper, lower) = polariton_eigenenergies(&model);
        for branch in [upper, lower] {
            let near: Vec<(usize, f64)> = energies
                .iter()
                .enumerate()
                .filter(|(_, e)| (**e - branch.re).abs() < 1.0)
                .map(|(i, _)| (i, row[i]))
                .collect();
            let (peak_idx, _) = near
                .iter()
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(
                (energies[*peak_idx] - branch.re).abs() <= 0.02 * 1.0,
                "peak at {} vs branch {}",
                energies[*peak_idx],
                branch.re
            );
        }
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        let model = reference_model(0.0);
        let cal = DetuningCalibration::new(1680.0, 1.0).unwrap();
        assert!(synthesize_transmission_map(&model, &cal, &[], &[1.0, 2.0]).is_err());
        assert!(synthesize_transmission_map(&model, &cal, &[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    // -- avoided-crossing fit --

    fn synthetic_observations(
        g: f64,
        cal: &DetuningCalibration,
        voltages: &[f64],
    ) -> Vec<CrossingObservation> {
        let base = PolaritonModel::new(1725.0, 6.1, 6.3, g, 0.0).unwrap();
        let mut out = Vec::new();
        for &v in voltages {
            let detuning = cal.cavity_energy_mev(v) - 1725.0;
            let (upper, lower) = polariton_eigenenergies(&base.with_detuning(detuning));
            out.push(CrossingObservation {
                voltage_v: v,
                energy_mev: upper.re,
                branch: Branch::Upper,
            });
            out.push(CrossingObservation {
                voltage_v: v,
                energy_mev: lower.re,
                branch: Branch::Lower,
            });
        }
        out
    }

    #[test]
    fn noiseless_branches_recover_coupling() {
        let cal = DetuningCalibration::new(1680.0, 1.0).unwrap();
        let voltages: Vec<f64> = (0..8).map(|i| 25.0 + 5.5 * i as f64).collect();
        let obs = synthetic_observations(2.75, &cal, &voltages);
        let fit = fit_avoided_crossing(&obs, 6.3, 6.1, 1725.0).unwrap();
        assert!(
            (fit.coupling_mev - 2.75).abs() / 2.75 < 0.005,
            "g = {}",
            fit.coupling_mev
        );
        assert!((fit.calibration.slope_mev_per_volt - 1.0).abs() < 0.005);
        assert!((fit.calibration.intercept_mev - 1680.0).abs() < 0.2);
        assert!(fit.rms_residual_mev < 1e-6);
        assert!(!fit.one_sided);
    }

    #[test]
    fn fit_of_its_own_forward_model_is_a_fixed_point() {
        let cal = DetuningCalibration::new(1690.0, 0.8).unwrap();
        let voltages: Vec<f64> = (0..10).map(|i| 20.0 + 6.0 * i as f64).collect();
        let obs = synthetic_observations(3.4, &cal, &voltages);
        let fit = fit_avoided_crossing(&obs, 6.3, 6.1, 1725.0).unwrap();
        let refit_obs = synthetic_observations(fit.coupling_mev, &fit.calibration, &voltages);
        let refit = fit_avoided_crossing(&refit_obs, 6.3, 6.1, 1725.0).unwrap();
        assert!((refit.coupling_mev - fit.coupling_mev).abs() < 1e-6);
        assert!(
            (refit.calibration.slope_mev_per_volt - fit.calibration.slope_mev_per_volt).abs()
                < 1e-8
        );
    }

    #[test]
    fn one_sided_observations_raise_the_flag() {
        let cal = DetuningCalibration::new(1680.0, 1.0).unwrap();
        // all voltages red-detuned: E_C from 1690 to 1704 << E_X
        let voltages: Vec<f64> = (0..8).map(|i| 10.0 + 2.0 * i as f64).collect();
        let obs = synthetic_observations(2.75, &cal, &voltages);
        let fit = fit_avoided_crossing(&obs, 6.3, 6.1, 1725.0).unwrap();
        assert!(fit.one_sided);
    }

    #[test]
    fn too_few_observations_are_rejected() {
        let cal = DetuningCalibration::new(1680.0, 1.0).unwrap();
        let obs = synthetic_observations(2.75, &cal, &[40.0, 45.0, 50.0]);
        assert!(fit_avoided_crossing(&obs[..5], 6.3, 6.1, 1725.0).is_err());
    }
}
