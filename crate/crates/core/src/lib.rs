//! Stochastic resonance in driven, dissipative two-level systems.
//!
//! The crate simulates a two-level system whose relaxation is described by
//! the Bloch equations, computes its steady-state response to a resonant
//! drive, and locates the stochastic-resonance peak that appears when the
//! longitudinal and transverse relaxation times coincide. It also simulates
//! the NMR protocols used to measure those relaxation times.
//!
//! Module map:
//!
//! * [`params`], [`state`], [`relaxation`]: domain types, validation and the
//!   relaxation matrix.
//! * [`dynamics`]: Bloch, master-equation and rotating-frame equations of
//!   motion, frame transforms, integration and steady-state detection.
//! * [`steady_state`]: closed-form steady state, susceptibility and the
//!   fundamental spectral amplitude of simulated signals.
//! * [`sr_analysis`]: sweeps over relaxation time and drive amplitude, peak
//!   location and monotonicity diagnostics.
//! * [`pulse_sim`]: inversion recovery, Carr-Purcell echo trains, long-pulse
//!   acquisition and relaxation-time fits.
//! * [`io`] and [`cli`]: CSV output, experiment manifests and the
//!   command-line front end.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the a_kl / σ_k notation of the equations.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod dynamics;
pub mod io;
pub mod params;
pub mod pulse_sim;
pub mod relaxation;
pub mod sr_analysis;
pub mod state;
pub mod steady_state;

pub use params::{hz_to_rad, params_from_nmr, rad_to_hz, ParamError, SystemParams};
pub use state::{bloch_to_density, density_to_bloch, BlochState, DensityMatrix, RotatingState};
