//! Command implementations behind the `cavlab` binary.
//!
//! Each command reads the typed config, produces provenance-stamped CSV
//! artifacts in the output directory, and returns the metric lines it
//! printed. All randomness flows from the single run seed; identical config
//! and seed reproduce byte-identical outputs.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::csvio::{self, Provenance};
use crate::error::{Error, Result};
use crate::fabry_perot::{
    self, displacement_to_transmission, fit_resonance, transmission_to_displacement,
};
use crate::lockloop::{simulate_lock, unity_gain_frequency};
use crate::mechanics::{cavity_noise, kick_train};
use crate::polariton::{
    cooperativity, fit_avoided_crossing, normal_mode_splitting, polariton_eigenenergies,
    CrossingObservation,
};
use crate::signal_analysis::{
    amplitude_spectrum, occurrence_histogram, peak_to_peak, rms, rms_vs_bandwidth,
};
use crate::timeseries::{SignalUnit, TimeSeries};

/// Sensor-noise seed derivation: keeps the lock sensor stream decorrelated
/// from the kick synthesis stream under the same run seed.
const SENSOR_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Histogram bin width for analysis outputs: 10 pm.
const HISTOGRAM_BIN_M: f64 = 1.0e-11;

/// Execution context shared by all commands.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: RunConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub parallel: usize,
    config_hash: String,
}

/// Files written and metrics computed by one command.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub metrics: Vec<(String, String)>,
}

impl CommandOutput {
    fn metric(&mut self, key: &str, value: impl std::fmt::Display) {
        self.metrics.push((key.to_string(), value.to_string()));
    }
}

impl RunContext {
    pub fn new(
        config: RunConfig,
        seed_override: Option<u64>,
        out_dir: PathBuf,
        parallel: usize,
    ) -> Self {
        let seed = seed_override.unwrap_or(config.run.seed);
        let mut hasher = Sha256::new();
        hasher.update(config.serialize().as_bytes());
        let config_hash = hex_prefix(&hasher.finalize(), 12);
        RunContext {
            config,
            seed,
            out_dir,
            parallel: parallel.max(1),
            config_hash,
        }
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    fn provenance(&self, command: &str) -> Provenance {
        Provenance::new(command, self.config_hash.clone(), self.seed)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Creates the output directory and echoes the resolved config
    /// (defaults applied) next to the artifacts.
    pub fn prepare(&self) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir)?;
        let path = self.path("resolved_config.cfg");
        std::fs::write(&path, self.config.serialize())?;
        Ok(path)
    }

    fn sensor_seed(&self) -> u64 {
        self.seed ^ SENSOR_SEED_SALT
    }
}

fn hex_prefix(bytes: &[u8], chars: usize) -> String {
    let mut s = String::with_capacity(chars);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
        if s.len() >= chars {
            break;
        }
    }
    s.truncate(chars);
    s
}

/// Runs `f(trial)` for trials `0..n`, fanning out over up to `parallel`
/// threads; results come back in trial order regardless of scheduling.
pub fn run_trials<T: Send>(
    n: usize,
    parallel: usize,
    f: impl Fn(usize) -> T + Sync,
) -> Vec<T> {
    let threads = parallel.max(1).min(n.max(1));
    if threads <= 1 {
        return (0..n).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        let f = &f;
        let mut handles = Vec::new();
        for (start, slice) in (0..).step_by(chunk).zip(slots.chunks_mut(chunk)) {
            handles.push(scope.spawn(move || {
                for (offset, slot) in slice.iter_mut().enumerate() {
                    *slot = Some(f(start + offset));
                }
            }));
        }
        for h in handles {
            h.join().expect("trial worker panicked");
        }
    });
    slots.into_iter().map(|s| s.unwrap()).collect()
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

/// Synthesizes the cold-plate trace and the differential cavity noise.
pub fn cmd_synth(ctx: &RunContext) -> Result<CommandOutput> {
    ctx.prepare()?;
    let prov = ctx.provenance("synth");
    let mut out = CommandOutput::default();

    let (cold, cavity) = synthesize_chain(ctx)?;

    let cold_path = ctx.path("cold_plate.csv");
    csvio::write_timeseries(&cold_path, &cold, &prov)?;
    let cavity_path = ctx.path("cavity_noise.csv");
    csvio::write_timeseries(&cavity_path, &cavity, &prov)?;

    out.metric("cold_plate_rms_m", rms(&cold));
    out.metric("cold_plate_p2p_m", peak_to_peak(&cold, None)?);
    out.metric("cavity_rms_m", rms(&cavity));
    out.metric("cavity_p2p_m", peak_to_peak(&cavity, None)?);
    csvio::write_metrics(&ctx.path("synth_metrics.txt"), &out.metrics, &prov)?;

    out.files = vec![cold_path, cavity_path, ctx.path("synth_metrics.txt")];
    Ok(out)
}

/// Cold plate -> spring table -> stack differential, from the config.
fn synthesize_chain(ctx: &RunContext) -> Result<(TimeSeries, TimeSeries)> {
    let cfg = &ctx.config;
    let recipe = cfg.kick_recipe(ctx.seed);
    let cold = kick_train(&recipe, cfg.run.duration_s, cfg.run.dt_s)?;
    let cavity = cavity_noise(
        &cold,
        &cfg.spring_stage()?,
        &cfg.fiber_stack()?,
        &cfg.mirror_stack()?,
    )?;
    Ok((cold, cavity))
}

// ---------------------------------------------------------------------------
// convert
// ---------------------------------------------------------------------------

/// Converts between transmission and displacement traces, direction chosen
/// by the input's unit tag.
pub fn cmd_convert(ctx: &RunContext, input: &Path) -> Result<CommandOutput> {
    ctx.prepare()?;
    let prov = ctx.provenance("convert");
    let mut out = CommandOutput::default();

    let trace = csvio::read_timeseries(input)?;
    let geom = ctx.config.geometry()?;
    let lock = fabry_perot::find_lock_point(&geom, ctx.config.geometry.lock_side);

    match trace.unit() {
        SignalUnit::Transmission => {
            let conv =
                transmission_to_displacement(&trace, &geom, &lock, Some(ctx.config.validity_band()))?;
            let path = ctx.path("displacement.csv");
            csvio::write_timeseries(&path, &conv.displacement, &prov)?;
            out.metric("direction", "transmission_to_displacement");
            out.metric("out_of_band_count", conv.out_of_band_count);
            out.metric(
                "out_of_band_fraction",
                conv.out_of_band_count as f64 / trace.len() as f64,
            );
            out.metric("displacement_rms_m", rms(&conv.displacement));
            out.files.push(path);
        }
        SignalUnit::Meter => {
            let t = displacement_to_transmission(&trace, &geom, &lock)?;
            let path = ctx.path("transmission.csv");
            csvio::write_timeseries(&path, &t, &prov)?;
            out.metric("direction", "displacement_to_transmission");
            out.metric("lock_transmission", lock.transmission);
            out.files.push(path);
        }
    }
    csvio::write_metrics(&ctx.path("convert_metrics.txt"), &out.metrics, &prov)?;
    out.files.push(ctx.path("convert_metrics.txt"));
    Ok(out)
}

// ---------------------------------------------------------------------------
// lock
// ---------------------------------------------------------------------------

/// Runs the servo simulation against a disturbance trace (from `input`, or
/// synthesized from the config when absent).
pub fn cmd_lock(ctx: &RunContext, input: Option<&Path>) -> Result<CommandOutput> {
    ctx.prepare()?;
    let prov = ctx.provenance("lock");
    let mut out = CommandOutput::default();

    let disturbance = match input {
        Some(path) => csvio::read_timeseries(path)?,
        None => synthesize_chain(ctx)?.1,
    };
    let geom = ctx.config.geometry()?;
    let lock_cfg = ctx.config.lock_config(&geom)?;
    let run = simulate_lock(&disturbance, &geom, &lock_cfg, ctx.sensor_seed())?;

    let residual_path = ctx.path("locked_residual.csv");
    csvio::write_timeseries(&residual_path, &run.residual, &prov)?;
    let actuator_path = ctx.path("actuator.csv");
    csvio::write_timeseries(&actuator_path, &run.actuator, &prov)?;

    let unlocked = rms(&disturbance);
    let locked = rms(&run.residual);
    out.metric("unlocked_rms_m", unlocked);
    out.metric("locked_rms_m", locked);
    out.metric("locked_over_unlocked", locked / unlocked);
    out.metric("locked_p2p_m", peak_to_peak(&run.residual, None)?);
    if let Some(ugf) = unity_gain_frequency(&lock_cfg) {
        out.metric("unity_gain_hz", ugf);
    }
    csvio::write_metrics(&ctx.path("lock_metrics.txt"), &out.metrics, &prov)?;

    out.files = vec![residual_path, actuator_path, ctx.path("lock_metrics.txt")];
    Ok(out)
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

/// Full statistics run on a displacement trace: rms, p-p, rms vs bandwidth,
/// amplitude spectrum and occurrence histogram.
pub fn cmd_analyze(ctx: &RunContext, input: &Path) -> Result<CommandOutput> {
    ctx.prepare()?;
    let trace = csvio::read_timeseries(input)?;
    if trace.unit() != SignalUnit::Meter {
        return Err(Error::validation(
            "analyze expects a displacement trace in meters; run 'convert' first",
        ));
    }
    let prefix = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trace")
        .to_string();
    analyze_trace(ctx, &trace, &prefix, ctx.provenance("analyze"))
}

fn analyze_trace(
    ctx: &RunContext,
    trace: &TimeSeries,
    prefix: &str,
    prov: Provenance,
) -> Result<CommandOutput> {
    let mut out = CommandOutput::default();

    out.metric("rms_m", rms(trace));
    out.metric("p2p_m", peak_to_peak(trace, None)?);

    // Log-spaced bandwidth grid, 25 points per decade from 1 Hz to Nyquist.
    let nyquist = trace.nyquist_hz();
    let mut grid: Vec<f64> = Vec::new();
    let mut f = 1.0f64.min(nyquist / 2.0);
    while f < nyquist {
        grid.push(f);
        f *= 10f64.powf(1.0 / 25.0);
    }
    grid.push(nyquist);
    let curve = rms_vs_bandwidth(trace, &grid)?;
    let bw_path = ctx.path(&format!("{prefix}_rms_vs_bandwidth.csv"));
    csvio::write_xy(
        &bw_path,
        "bandwidth_hz,rms_m",
        curve
            .bandwidths_hz
            .iter()
            .copied()
            .zip(curve.rms_m.iter().copied()),
        &prov,
    )?;
    out.files.push(bw_path);

    // 1 Hz resolution spectrum when the trace is long enough, else the
    // coarsest resolution it supports.
    let resolution = 1.0f64.max(2.0 / trace.duration_s());
    let spectrum = amplitude_spectrum(trace, resolution)?;
    let spec_path = ctx.path(&format!("{prefix}_spectrum.csv"));
    csvio::write_xy(
        &spec_path,
        "frequency_hz,amplitude_m",
        spectrum
            .frequencies_hz
            .iter()
            .copied()
            .zip(spectrum.amplitudes_m.iter().copied()),
        &prov,
    )?;
    out.files.push(spec_path);

    let hist = occurrence_histogram(trace, HISTOGRAM_BIN_M)?;
    let hist_path = ctx.path(&format!("{prefix}_histogram.csv"));
    csvio::write_xy(
        &hist_path,
        "displacement_m,count",
        hist.bin_centers_m
            .iter()
            .copied()
            .zip(hist.counts.iter().map(|c| *c as f64)),
        &prov,
    )?;
    out.files.push(hist_path);
    out.metric("histogram_bins", hist.counts.len());
    out.metric("tail_count_beyond_200pm", hist.counts_beyond(2.0e-10));

    let metrics_path = ctx.path(&format!("{prefix}_metrics.txt"));
    csvio::write_metrics(&metrics_path, &out.metrics, &prov)?;
    out.files.push(metrics_path);
    Ok(out)
}

// ---------------------------------------------------------------------------
// fit-finesse
// ---------------------------------------------------------------------------

/// Fits the transmission fringe. Without an input scan, fits a synthetic
/// scan generated from the config geometry (and, with `trials > 1`, repeats
/// under 1% seeded transmission noise to report the recovery spread).
pub fn cmd_fit_finesse(
    ctx: &RunContext,
    input: Option<&Path>,
    trials: usize,
) -> Result<CommandOutput> {
    ctx.prepare()?;
    let prov = ctx.provenance("fit-finesse");
    let mut out = CommandOutput::default();
    let geom = ctx.config.geometry()?;
    let wavelength = geom.wavelength_m();

    let samples = match input {
        Some(path) => csvio::read_resonance_scan(path)?,
        None => {
            let samples = synthetic_scan(&geom, 301, 6.0);
            let path = ctx.path("resonance_scan.csv");
            csvio::write_resonance_scan(&path, &samples, &prov)?;
            out.files.push(path);
            samples
        }
    };

    let fit = fit_resonance(&samples, wavelength)?;
    out.metric("fitted_peak_transmission", fit.peak_transmission);
    out.metric("fitted_resonance_length_m", fit.resonance_length_m);
    out.metric("fitted_finesse", fit.finesse);
    out.metric(
        "fitted_spatial_linewidth_m",
        fabry_perot::finesse_to_spatial_linewidth(fit.finesse, wavelength)?,
    );
    out.metric("fit_rms_residual", fit.rms_residual);
    out.metric("fit_iterations", fit.iterations);

    if trials > 1 {
        let noise_rms = 0.01 * geom.peak_transmission();
        let base_seed = ctx.seed;
        let finesses = run_trials(trials, ctx.parallel, |trial| {
            let noisy = perturb_scan(&samples, noise_rms, base_seed.wrapping_add(trial as u64));
            fit_resonance(&noisy, wavelength).map(|f| f.finesse)
        });
        let mut ok = Vec::new();
        for f in finesses {
            ok.push(f?);
        }
        let mean = ok.iter().sum::<f64>() / ok.len() as f64;
        let var = ok.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / ok.len() as f64;
        let worst = ok
            .iter()
            .map(|f| (f - geom.finesse()).abs() / geom.finesse())
            .fold(0.0, f64::max);
        out.metric("trials", trials);
        out.metric("trial_noise_rms", noise_rms);
        out.metric("finesse_mean", mean);
        out.metric("finesse_std", var.sqrt());
        out.metric("finesse_worst_relative_error", worst);
    }

    csvio::write_metrics(&ctx.path("fit_finesse.txt"), &out.metrics, &prov)?;
    out.files.push(ctx.path("fit_finesse.txt"));
    Ok(out)
}

/// Noiseless fringe scan spanning `span_linewidths` around resonance.
pub fn synthetic_scan(
    geom: &fabry_perot::CavityGeometry,
    n: usize,
    span_linewidths: f64,
) -> Vec<(f64, f64)> {
    let l = geom.on_resonance_length_m();
    let dl = geom.spatial_linewidth_m();
    (0..n)
        .map(|i| {
            let z = l + dl * span_linewidths * (i as f64 / (n - 1) as f64 - 0.5);
            (z, fabry_perot::transmission(z, geom))
        })
        .collect()
}

/// Adds seeded white noise to the transmission column of a scan.
pub fn perturb_scan(samples: &[(f64, f64)], noise_rms: f64, seed: u64) -> Vec<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    samples
        .iter()
        .map(|&(z, t)| {
            // Box-Muller pair per sample, first half used.
            let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            let v: f64 = rng.gen();
            let gauss =
                (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
            (z, t + noise_rms * gauss)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// fit-polariton
// ---------------------------------------------------------------------------

/// Fits the avoided crossing. Without an input, fits synthetic branch
/// observations generated from the config model and calibration.
pub fn cmd_fit_polariton(
    ctx: &RunContext,
    input: Option<&Path>,
    trials: usize,
) -> Result<CommandOutput> {
    ctx.prepare()?;
    let prov = ctx.provenance("fit-polariton");
    let mut out = CommandOutput::default();
    let p = &ctx.config.polariton;

    let observations = match input {
        Some(path) => csvio::read_crossing_observations(path)?,
        None => {
            let obs = synthetic_observations(ctx)?;
            let path = ctx.path("crossing_observations.csv");
            csvio::write_crossing_observations(&path, &obs, &prov)?;
            out.files.push(path);
            obs
        }
    };

    let fit = fit_avoided_crossing(
        &observations,
        p.cavity_linewidth_mev,
        p.exciton_linewidth_mev,
        p.exciton_energy_mev,
    )?;
    let model = crate::polariton::PolaritonModel::new(
        p.exciton_energy_mev,
        p.exciton_linewidth_mev,
        p.cavity_linewidth_mev,
        fit.coupling_mev,
        0.0,
    )?;
    let span = 10.0 * fit.coupling_mev.max(1.0);
    let minimum = normal_mode_splitting(&model, (-span, span))?;
    let coop = cooperativity(
        minimum.splitting_mev,
        p.cavity_linewidth_mev,
        p.exciton_linewidth_mev,
    )?;

    out.metric("fitted_coupling_mev", fit.coupling_mev);
    out.metric("fitted_calibration_intercept_mev", fit.calibration.intercept_mev);
    out.metric(
        "fitted_calibration_slope_mev_per_volt",
        fit.calibration.slope_mev_per_volt,
    );
    out.metric("fit_rms_residual_mev", fit.rms_residual_mev);
    out.metric("one_sided_detunings", fit.one_sided);
    out.metric("normal_mode_splitting_mev", minimum.splitting_mev);
    out.metric("cooperativity", coop);

    if trials > 1 {
        let noise_mev = 0.3;
        let base_seed = ctx.seed;
        let couplings = run_trials(trials, ctx.parallel, |trial| {
            let noisy = perturb_observations(
                &observations,
                noise_mev,
                base_seed.wrapping_add(trial as u64),
            );
            fit_avoided_crossing(
                &noisy,
                p.cavity_linewidth_mev,
                p.exciton_linewidth_mev,
                p.exciton_energy_mev,
            )
            .map(|f| (f.coupling_mev, f.calibration.slope_mev_per_volt))
        });
        let mut gs = Vec::new();
        let mut slopes = Vec::new();
        for c in couplings {
            let (g, s) = c?;
            gs.push(g);
            slopes.push(s);
        }
        let g_mean = gs.iter().sum::<f64>() / gs.len() as f64;
        let slope_mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
        out.metric("trials", trials);
        out.metric("trial_noise_mev", noise_mev);
        out.metric("coupling_mean_mev", g_mean);
        out.metric("calibration_slope_mean", slope_mean);
    }

    csvio::write_metrics(&ctx.path("fit_polariton.txt"), &out.metrics, &prov)?;
    out.files.push(ctx.path("fit_polariton.txt"));
    Ok(out)
}

/// Eight-detuning branch observations straddling the resonance, from the
/// config model and calibration.
pub fn synthetic_observations(ctx: &RunContext) -> Result<Vec<CrossingObservation>> {
    let model = ctx.config.polariton_model()?;
    let cal = ctx.config.calibration()?;
    let crossing_v =
        (model.exciton_energy_mev - cal.intercept_mev) / cal.slope_mev_per_volt;
    let mut out = Vec::new();
    for i in 0..8 {
        let detuning = -14.0 + 4.0 * i as f64; // meV, both signs
        let v = crossing_v + detuning / cal.slope_mev_per_volt;
        let (upper, lower) = polariton_eigenenergies(&model.with_detuning(detuning));
        out.push(CrossingObservation {
            voltage_v: v,
            energy_mev: upper.re,
            branch: crate::polariton::Branch::Upper,
        });
        out.push(CrossingObservation {
            voltage_v: v,
            energy_mev: lower.re,
            branch: crate::polariton::Branch::Lower,
        });
    }
    Ok(out)
}

/// Adds seeded Gaussian noise to observed peak energies.
pub fn perturb_observations(
    observations: &[CrossingObservation],
    noise_mev: f64,
    seed: u64,
) -> Vec<CrossingObservation> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    observations
        .iter()
        .map(|o| {
            let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            let v: f64 = rng.gen();
            let gauss =
                (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
            CrossingObservation {
                energy_mev: o.energy_mev + noise_mev * gauss,
                ..*o
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

/// End-to-end pipeline: synthesize, analyze unlocked, lock, analyze locked,
/// and consolidate the headline numbers.
pub fn cmd_report(ctx: &RunContext) -> Result<CommandOutput> {
    ctx.prepare()?;
    let prov = ctx.provenance("report");
    let mut out = CommandOutput::default();

    let (cold, cavity) = synthesize_chain(ctx)?;
    csvio::write_timeseries(&ctx.path("cold_plate.csv"), &cold, &prov)?;
    csvio::write_timeseries(&ctx.path("cavity_noise.csv"), &cavity, &prov)?;
    out.files.push(ctx.path("cold_plate.csv"));
    out.files.push(ctx.path("cavity_noise.csv"));

    let geom = ctx.config.geometry()?;
    let lock_cfg = ctx.config.lock_config(&geom)?;
    let run = simulate_lock(&cavity, &geom, &lock_cfg, ctx.sensor_seed())?;
    csvio::write_timeseries(&ctx.path("locked_residual.csv"), &run.residual, &prov)?;
    out.files.push(ctx.path("locked_residual.csv"));

    let unlocked_analysis = analyze_trace(ctx, &cavity, "unlocked", ctx.provenance("report"))?;
    let locked_analysis = analyze_trace(ctx, &run.residual, "locked", ctx.provenance("report"))?;
    out.files.extend(unlocked_analysis.files);
    out.files.extend(locked_analysis.files);

    let unlocked_rms = rms(&cavity);
    let locked_rms = rms(&run.residual);
    let unlocked_hist = occurrence_histogram(&cavity, HISTOGRAM_BIN_M)?;
    let locked_hist = occurrence_histogram(&run.residual, HISTOGRAM_BIN_M)?;

    out.metric("cold_plate_rms_m", rms(&cold));
    out.metric("cold_plate_p2p_m", peak_to_peak(&cold, None)?);
    out.metric("unlocked_rms_m", unlocked_rms);
    out.metric("unlocked_p2p_m", peak_to_peak(&cavity, None)?);
    out.metric("locked_rms_m", locked_rms);
    out.metric("locked_p2p_m", peak_to_peak(&run.residual, None)?);
    out.metric("locked_over_unlocked", locked_rms / unlocked_rms);
    out.metric(
        "rms_reduction_percent",
        100.0 * (1.0 - locked_rms / unlocked_rms),
    );
    out.metric(
        "unlocked_tail_count_beyond_200pm",
        unlocked_hist.counts_beyond(2.0e-10),
    );
    out.metric(
        "locked_tail_count_beyond_200pm",
        locked_hist.counts_beyond(2.0e-10),
    );
    if let Some(ugf) = unity_gain_frequency(&lock_cfg) {
        out.metric("unity_gain_hz", ugf);
    }

    csvio::write_metrics(&ctx.path("report.txt"), &out.metrics, &prov)?;
    out.files.push(ctx.path("report.txt"));
    Ok(out)
}
