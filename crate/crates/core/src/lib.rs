//! Simulation and analysis toolkit for a fiber Fabry-Perot cavity operated in
//! a closed-cycle cryostat.
//!
//! The crate covers the full measurement chain of such a setup:
//!
//! - [`fabry_perot`] — cavity transmission fringe, its slope, lock-point
//!   geometry and the interferometric conversion between transmission signals
//!   and cavity-length displacement, plus a fringe fit that recovers finesse.
//! - [`mechanics`] — synthesis of cryo-cooler disturbance traces and their
//!   propagation through the passive vibration isolation chain (spring table,
//!   fiber-mirror stack, planar-mirror stack) down to differential
//!   cavity-length noise.
//! - [`signal_analysis`] — rms, peak-to-peak, rms-versus-bandwidth curves,
//!   amplitude spectra and occurrence histograms of displacement traces.
//! - [`lockloop`] — discrete-time simulation of the active length
//!   stabilization (side-of-fringe sensing, PI control, optional notch,
//!   band-limited piezo actuation).
//! - [`polariton`] — coupled exciton-photon oscillator model: complex
//!   eigenenergies, normal-mode splitting, cooperativity, synthetic
//!   transmission maps and avoided-crossing fits.
//! - [`config`], [`csvio`], [`pipeline`] — the reproducible CLI pipeline:
//!   typed run configuration, provenance-stamped CSV I/O and the subcommand
//!   implementations behind the `cavlab` binary.
//!
//! All lengths are carried internally in meters at double precision; energies
//! of the polariton model are in meV. Every random quantity flows from an
//! explicit `u64` seed, so identical inputs reproduce identical outputs
//! bit for bit.

pub mod config;
pub mod csvio;
pub mod error;
pub mod fabry_perot;
pub mod fit;
pub mod lockloop;
pub mod mechanics;
mod noise;
pub mod pipeline;
pub mod polariton;
pub mod signal_analysis;
pub mod timeseries;

pub use error::{Error, ErrorKind, Result};
pub use timeseries::{SignalUnit, TimeSeries};
