//! Typed run configuration.
//!
//! The on-disk format is deliberately small: `[section]` headers,
//! `key = value` lines, `#` comments. Every key is typed and validated on
//! parse; unknown sections, unknown keys and duplicate keys are hard errors
//! naming the line, so a typo cannot silently fall back to a default.
//!
//! All sections have physical defaults matching the reference setup, so a
//! minimal (even empty) config is valid.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::fabry_perot::{find_lock_point, CavityGeometry, LockSide};
use crate::lockloop::{LockConfig, NotchConfig};
use crate::mechanics::{KickMode, KickRecipe, OscillatorStage};
use crate::polariton::{DetuningCalibration, PolaritonModel};

#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySection {
    pub wavelength_nm: f64,
    pub finesse: f64,
    pub mode_number: u64,
    pub peak_transmission: f64,
    pub lock_side: LockSide,
    pub band_low_frac: f64,
    pub band_high_frac: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            wavelength_nm: 780.0,
            finesse: 110.0,
            mode_number: 13,
            peak_transmission: 1.0,
            lock_side: LockSide::BelowResonance,
            band_low_frac: 0.4,
            band_high_frac: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpringStageSection {
    pub spring_constant_n_per_m: f64,
    pub n_springs: u32,
    pub payload_kg: f64,
    pub damping_ratio: f64,
    /// Direct resonance override; when set it replaces the spring-derived
    /// value.
    pub resonance_hz: Option<f64>,
}

impl Default for SpringStageSection {
    fn default() -> Self {
        SpringStageSection {
            spring_constant_n_per_m: 1520.0,
            n_springs: 4,
            payload_kg: 0.51,
            damping_ratio: 0.05,
            resonance_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackSection {
    pub resonance_hz: f64,
    pub damping_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KickSection {
    pub period_s: f64,
    pub broadband_floor_m_per_sqrt_hz: f64,
    pub modes: Vec<KickMode>,
}

impl Default for KickSection {
    fn default() -> Self {
        let defaults = KickRecipe::default();
        KickSection {
            period_s: defaults.period_s,
            broadband_floor_m_per_sqrt_hz: defaults.broadband_floor_m_per_sqrt_hz,
            modes: defaults.modes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LockSection {
    pub kp: f64,
    pub ki_per_s: f64,
    pub actuator_cutoff_hz: f64,
    pub notch_hz: Option<f64>,
    pub notch_q: f64,
    pub sensor_noise_rms: f64,
}

impl Default for LockSection {
    fn default() -> Self {
        LockSection {
            kp: LockConfig::DEFAULT_KP,
            ki_per_s: LockConfig::DEFAULT_KI_PER_S,
            actuator_cutoff_hz: LockConfig::DEFAULT_ACTUATOR_CUTOFF_HZ,
            notch_hz: None,
            notch_q: 10.0,
            sensor_noise_rms: LockConfig::DEFAULT_SENSOR_NOISE_RMS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonSection {
    pub exciton_energy_mev: f64,
    pub exciton_linewidth_mev: f64,
    pub cavity_linewidth_mev: f64,
    pub coupling_mev: f64,
    pub detuning_mev: f64,
    pub calibration_intercept_mev: f64,
    pub calibration_slope_mev_per_volt: f64,
}

impl Default for PolaritonSection {
    fn default() -> Self {
        PolaritonSection {
            exciton_energy_mev: 1725.0,
            exciton_linewidth_mev: 6.1,
            cavity_linewidth_mev: 6.3,
            coupling_mev: 2.75,
            detuning_mev: 0.0,
            calibration_intercept_mev: 1680.0,
            calibration_slope_mev_per_volt: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub seed: u64,
    pub duration_s: f64,
    pub dt_s: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 1,
            duration_s: 10.0,
            dt_s: 1.0e-5,
        }
    }
}

/// Complete, validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub spring_stage: SpringStageSection,
    pub fiber_stack: StackSection,
    pub mirror_stack: StackSection,
    pub kick: KickSection,
    pub lock: LockSection,
    pub polariton: PolaritonSection,
    pub run: RunSection,
}

impl StackSection {
    /// Rigid fiber-mirror stack default: 1.5 kHz, lightly damped.
    pub fn fiber_default() -> Self {
        StackSection {
            resonance_hz: 1500.0,
            damping_ratio: 0.05,
        }
    }

    /// Planar-mirror / positioner stack default: 130 Hz, lightly damped.
    pub fn mirror_default() -> Self {
        StackSection {
            resonance_hz: 130.0,
            damping_ratio: 0.05,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: GeometrySection::default(),
            spring_stage: SpringStageSection::default(),
            fiber_stack: StackSection::fiber_default(),
            mirror_stack: StackSection::mirror_default(),
            kick: KickSection::default(),
            lock: LockSection::default(),
            polariton: PolaritonSection::default(),
            run: RunSection::default(),
        }
    }
}

impl RunConfig {
    // -- domain object builders --

    pub fn geometry(&self) -> Result<CavityGeometry> {
        CavityGeometry::new(
            self.geometry.wavelength_nm * 1e-9,
            self.geometry.finesse,
            self.geometry.mode_number,
            self.geometry.peak_transmission,
        )
    }

    pub fn validity_band(&self) -> (f64, f64) {
        (self.geometry.band_low_frac, self.geometry.band_high_frac)
    }

    pub fn spring_stage(&self) -> Result<OscillatorStage> {
        match self.spring_stage.resonance_hz {
            Some(f0) => OscillatorStage::new(f0, self.spring_stage.damping_ratio, "spring table"),
            None => OscillatorStage::from_spring(
                self.spring_stage.spring_constant_n_per_m,
                self.spring_stage.n_springs,
                self.spring_stage.payload_kg,
                self.spring_stage.damping_ratio,
                "spring table",
            ),
        }
    }

    pub fn fiber_stack(&self) -> Result<OscillatorStage> {
        OscillatorStage::new(
            self.fiber_stack.resonance_hz,
            self.fiber_stack.damping_ratio,
            "fiber stack",
        )
    }

    pub fn mirror_stack(&self) -> Result<OscillatorStage> {
        OscillatorStage::new(
            self.mirror_stack.resonance_hz,
            self.mirror_stack.damping_ratio,
            "mirror stack",
        )
    }

    pub fn kick_recipe(&self, seed: u64) -> KickRecipe {
        KickRecipe {
            period_s: self.kick.period_s,
            modes: self.kick.modes.clone(),
            broadband_floor_m_per_sqrt_hz: self.kick.broadband_floor_m_per_sqrt_hz,
            seed,
        }
    }

    pub fn lock_config(&self, geom: &CavityGeometry) -> Result<LockConfig> {
        let setpoint = find_lock_point(geom, self.geometry.lock_side);
        let cfg = LockConfig {
            kp: self.lock.kp,
            ki_per_s: self.lock.ki_per_s,
            actuator_cutoff_hz: self.lock.actuator_cutoff_hz,
            notch: self.lock.notch_hz.map(|frequency_hz| NotchConfig {
                frequency_hz,
                quality: self.lock.notch_q,
            }),
            sensor_noise_rms: self.lock.sensor_noise_rms,
            setpoint,
            sample_rate_hz: 1.0 / self.run.dt_s,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn polariton_model(&self) -> Result<PolaritonModel> {
        PolaritonModel::new(
            self.polariton.exciton_energy_mev,
            self.polariton.exciton_linewidth_mev,
            self.polariton.cavity_linewidth_mev,
            self.polariton.coupling_mev,
            self.polariton.detuning_mev,
        )
    }

    pub fn calibration(&self) -> Result<DetuningCalibration> {
        DetuningCalibration::new(
            self.polariton.calibration_intercept_mev,
            self.polariton.calibration_slope_mev_per_volt,
        )
    }

    /// Canonical text form; `parse_config(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let g = &self.geometry;
        out.push_str("[geometry]\n");
        out.push_str(&format!("wavelength_nm = {}\n", g.wavelength_nm));
        out.push_str(&format!("finesse = {}\n", g.finesse));
        out.push_str(&format!("mode_number = {}\n", g.mode_number));
        out.push_str(&format!("peak_transmission = {}\n", g.peak_transmission));
        out.push_str(&format!(
            "lock_side = {}\n",
            match g.lock_side {
                LockSide::BelowResonance => "below",
                LockSide::AboveResonance => "above",
            }
        ));
        out.push_str(&format!("band_low_frac = {}\n", g.band_low_frac));
        out.push_str(&format!("band_high_frac = {}\n", g.band_high_frac));

        let s = &self.spring_stage;
        out.push_str("\n[spring_stage]\n");
        out.push_str(&format!(
            "spring_constant_n_per_m = {}\n",
            s.spring_constant_n_per_m
        ));
        out.push_str(&format!("n_springs = {}\n", s.n_springs));
        out.push_str(&format!("payload_kg = {}\n", s.payload_kg));
        out.push_str(&format!("damping_ratio = {}\n", s.damping_ratio));
        if let Some(f0) = s.resonance_hz {
            out.push_str(&format!("resonance_hz = {f0}\n"));
        }

        for (name, stack) in [
            ("fiber_stack", &self.fiber_stack),
            ("mirror_stack", &self.mirror_stack),
        ] {
            out.push_str(&format!("\n[{name}]\n"));
            out.push_str(&format!("resonance_hz = {}\n", stack.resonance_hz));
            out.push_str(&format!("damping_ratio = {}\n", stack.damping_ratio));
        }

        let k = &self.kick;
        out.push_str("\n[kick_recipe]\n");
        out.push_str(&format!("period_s = {}\n", k.period_s));
        out.push_str(&format!(
            "broadband_floor_m_per_sqrt_hz = {}\n",
            k.broadband_floor_m_per_sqrt_hz
        ));
        for m in &k.modes {
            out.push_str(&format!(
                "mode = {}, {}, {}\n",
                m.frequency_hz, m.amplitude_m, m.decay_time_s
            ));
        }

        let l = &self.lock;
        out.push_str("\n[lock]\n");
        out.push_str(&format!("kp = {}\n", l.kp));
        out.push_str(&format!("ki_per_s = {}\n", l.ki_per_s));
        out.push_str(&format!("actuator_cutoff_hz = {}\n", l.actuator_cutoff_hz));
        if let Some(f) = l.notch_hz {
            out.push_str(&format!("notch_hz = {f}\n"));
        }
        out.push_str(&format!("notch_q = {}\n", l.notch_q));
        out.push_str(&format!("sensor_noise_rms = {}\n", l.sensor_noise_rms));

        let p = &self.polariton;
        out.push_str("\n[polariton]\n");
        out.push_str(&format!("exciton_energy_mev = {}\n", p.exciton_energy_mev));
        out.push_str(&format!(
            "exciton_linewidth_mev = {}\n",
            p.exciton_linewidth_mev
        ));
        out.push_str(&format!(
            "cavity_linewidth_mev = {}\n",
            p.cavity_linewidth_mev
        ));
        out.push_str(&format!("coupling_mev = {}\n", p.coupling_mev));
        out.push_str(&format!("detuning_mev = {}\n", p.detuning_mev));
        out.push_str(&format!(
            "calibration_intercept_mev = {}\n",
            p.calibration_intercept_mev
        ));
        out.push_str(&format!(
            "calibration_slope_mev_per_volt = {}\n",
            p.calibration_slope_mev_per_volt
        ));

        let r = &self.run;
        out.push_str("\n[run]\n");
        out.push_str(&format!("seed = {}\n", r.seed));
        out.push_str(&format!("duration_s = {}\n", r.duration_s));
        out.push_str(&format!("dt_s = {}\n", r.dt_s));
        out
    }
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn parse_f64(key: &str, value: &str, line: usize) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| config_err(line, format!("key '{key}': cannot parse '{value}' as a number")))
}

fn parse_u64(key: &str, value: &str, line: usize) -> Result<u64> {
    value.parse::<u64>().map_err(|_| {
        config_err(
            line,
            format!("key '{key}': cannot parse '{value}' as an unsigned integer"),
        )
    })
}

fn require(cond: bool, key: &str, line: usize, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(config_err(line, format!("key '{key}': {what}")))
    }
}

/// Parses and validates a config file. Defaults fill everything the text
/// does not mention; the first `mode` key in `[kick_recipe]` replaces the
/// default mode list.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut section: Option<String> = None;
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut modes_replaced = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(stripped) = line.strip_prefix('[') {
            let Some(name) = stripped.strip_suffix(']') else {
                return Err(config_err(line_no, format!("malformed section header '{line}'")));
            };
            let name = name.trim();
            const SECTIONS: [&str; 8] = [
                "geometry",
                "spring_stage",
                "fiber_stack",
                "mirror_stack",
                "kick_recipe",
                "lock",
                "polariton",
                "run",
            ];
            if !SECTIONS.contains(&name) {
                return Err(config_err(line_no, format!("unknown section '[{name}]'")));
            }
            section = Some(name.to_string());
            continue;
        }

        let Some(eq) = line.find('=') else {
            return Err(config_err(line_no, format!("expected 'key = value', got '{line}'")));
        };
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        let Some(sec) = section.clone() else {
            return Err(config_err(
                line_no,
                format!("key '{key}' appears before any [section] header"),
            ));
        };
        if key.is_empty() {
            return Err(config_err(line_no, "empty key"));
        }
        if value.is_empty() {
            return Err(config_err(line_no, format!("key '{key}': empty value")));
        }

        let is_mode = sec == "kick_recipe" && key == "mode";
        if !is_mode && !seen.insert((sec.clone(), key.clone())) {
            return Err(config_err(
                line_no,
                format!("duplicate key '{key}' in section '[{sec}]'"),
            ));
        }

        apply_key(&mut cfg, &sec, &key, &value, line_no, &mut modes_replaced)?;
    }

    Ok(cfg)
}

fn apply_key(
    cfg: &mut RunConfig,
    section: &str,
    key: &str,
    value: &str,
    line: usize,
    modes_replaced: &mut bool,
) -> Result<()> {
    match (section, key) {
        ("geometry", "wavelength_nm") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.geometry.wavelength_nm = v;
        }
        ("geometry", "finesse") => {
            let v = parse_f64(key, value, line)?;
            require(v >= 1.0, key, line, "must be >= 1")?;
            cfg.geometry.finesse = v;
        }
        ("geometry", "mode_number") => {
            let v = parse_u64(key, value, line)?;
            require(v >= 1, key, line, "must be >= 1")?;
            cfg.geometry.mode_number = v;
        }
        ("geometry", "peak_transmission") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0 && v <= 1.0, key, line, "must lie in (0, 1]")?;
            cfg.geometry.peak_transmission = v;
        }
        ("geometry", "lock_side") => {
            cfg.geometry.lock_side = match value {
                "below" => LockSide::BelowResonance,
                "above" => LockSide::AboveResonance,
                other => {
                    return Err(config_err(
                        line,
                        format!("key 'lock_side': expected 'below' or 'above', got '{other}'"),
                    ))
                }
            };
        }
        ("geometry", "band_low_frac") => {
            let v = parse_f64(key, value, line)?;
            require(v >= 0.0 && v < 1.0, key, line, "must lie in [0, 1)")?;
            cfg.geometry.band_low_frac = v;
        }
        ("geometry", "band_high_frac") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0 && v <= 1.0, key, line, "must lie in (0, 1]")?;
            cfg.geometry.band_high_frac = v;
        }
        ("spring_stage", "spring_constant_n_per_m") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.spring_stage.spring_constant_n_per_m = v;
        }
        ("spring_stage", "n_springs") => {
            let v = parse_u64(key, value, line)?;
            require(v >= 1 && v <= u32::MAX as u64, key, line, "must be >= 1")?;
            cfg.spring_stage.n_springs = v as u32;
        }
        ("spring_stage", "payload_kg") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.spring_stage.payload_kg = v;
        }
        ("spring_stage", "damping_ratio") => {
            let v = parse_f64(key, value, line)?;
            require(v >= 0.0, key, line, "must be >= 0")?;
            cfg.spring_stage.damping_ratio = v;
        }
        ("spring_stage", "resonance_hz") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.spring_stage.resonance_hz = Some(v);
        }
        ("fiber_stack" | "mirror_stack", "resonance_hz") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            if section == "fiber_stack" {
                cfg.fiber_stack.resonance_hz = v;
            } else {
                cfg.mirror_stack.resonance_hz = v;
            }
        }
        ("fiber_stack" | "mirror_stack", "damping_ratio") => {
            let v = parse_f64(key, value, line)?;
            require(v >= 0.0, key, line, "must be >= 0")?;
            if section == "fiber_stack" {
                cfg.fiber_stack.damping_ratio = v;
            } else {
                cfg.mirror_stack.damping_ratio = v;
            }
        }
        ("kick_recipe", "period_s") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.kick.period_s = v;
        }
        ("kick_recipe", "broadband_floor_m_per_sqrt_hz") => {
            let v = parse_f64(key, value, line)?;
            require(v >= 0.0, key, line, "must be >= 0")?;
            cfg.kick.broadband_floor_m_per_sqrt_hz = v;
        }
        ("kick_recipe", "mode") => {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(config_err(
                    line,
                    "key 'mode': expected 'frequency_hz, amplitude_m, decay_time_s'",
                ));
            }
            let frequency_hz = parse_f64("mode.frequency_hz", parts[0], line)?;
            let amplitude_m = parse_f64("mode.amplitude_m", parts[1], line)?;
            let decay_time_s = parse_f64("mode.decay_time_s", parts[2], line)?;
            require(frequency_hz > 0.0, "mode.frequency_hz", line, "must be positive")?;
            require(amplitude_m >= 0.0, "mode.amplitude_m", line, "must be >= 0")?;
            require(decay_time_s > 0.0, "mode.decay_time_s", line, "must be positive")?;
            if !*modes_replaced {
                cfg.kick.modes.clear();
                *modes_replaced = true;
            }
            cfg.kick.modes.push(KickMode {
                frequency_hz,
                amplitude_m,
                decay_time_s,
            });
        }
        ("lock", "kp") => {
            let v = parse_f64(key, value, line)?;
            require(v >= 0.0, key, line, "must be >= 0")?;
            cfg.lock.kp = v;
        }
        ("lock", "ki_per_s") => {
            let v = parse_f64(key, value, line)?;
            require(v >= 0.0, key, line, "must be >= 0")?;
            cfg.lock.ki_per_s = v;
        }
        ("lock", "actuator_cutoff_hz") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.lock.actuator_cutoff_hz = v;
        }
        ("lock", "notch_hz") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.lock.notch_hz = Some(v);
        }
        ("lock", "notch_q") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.lock.notch_q = v;
        }
        ("lock", "sensor_noise_rms") => {
            let v = parse_f64(key, value, line)?;
            require(v >= 0.0, key, line, "must be >= 0")?;
            cfg.lock.sensor_noise_rms = v;
        }
        ("polariton", "exciton_energy_mev") => {
            cfg.polariton.exciton_energy_mev = parse_f64(key, value, line)?;
        }
        ("polariton", "exciton_linewidth_mev") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.polariton.exciton_linewidth_mev = v;
        }
        ("polariton", "cavity_linewidth_mev") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.polariton.cavity_linewidth_mev = v;
        }
        ("polariton", "coupling_mev") => {
            let v = parse_f64(key, value, line)?;
            require(v >= 0.0, key, line, "must be >= 0")?;
            cfg.polariton.coupling_mev = v;
        }
        ("polariton", "detuning_mev") => {
            cfg.polariton.detuning_mev = parse_f64(key, value, line)?;
        }
        ("polariton", "calibration_intercept_mev") => {
            cfg.polariton.calibration_intercept_mev = parse_f64(key, value, line)?;
        }
        ("polariton", "calibration_slope_mev_per_volt") => {
            let v = parse_f64(key, value, line)?;
            require(v != 0.0, key, line, "must be nonzero")?;
            cfg.polariton.calibration_slope_mev_per_volt = v;
        }
        ("run", "seed") => {
            cfg.run.seed = parse_u64(key, value, line)?;
        }
        ("run", "duration_s") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.run.duration_s = v;
        }
        ("run", "dt_s") => {
            let v = parse_f64(key, value, line)?;
            require(v > 0.0, key, line, "must be positive")?;
            cfg.run.dt_s = v;
        }
        (sec, key) => {
            return Err(config_err(
                line,
                format!("unknown key '{key}' in section '[{sec}]'"),
            ));
        }
    }
    Ok(())
}
