//! Steady-state response of the driven two-level system.
//!
//! On resonance the transverse steady-state amplitude is
//! η = s_eq·ω₁T₂ / (1 + ω₁²T₁T₂). Off resonance the full rotating-frame
//! solution with D = 1 + Δ²T₂² + ω₁²T₁T₂ reads
//!
//! ```text
//! u = s_eq·ω₁ΔT₂² / D,   v = s_eq·ω₁T₂ / D,   w = s_eq(1 + Δ²T₂²) / D.
//! ```
//!
//! The susceptibility is reported scale-free as (χ′, χ″) = (u, v)/(2ω₁T₂s_eq),
//! so that η = 2ω₁T₂s_eq·|χ|. Only its shape and ratios carry meaning.

use std::f64::consts::TAU;

use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::{integrate_to_steady_state, DynamicsError, IntegratorConfig, Trajectory, STEADY_EPS};
use crate::params::SystemParams;
use crate::state::BlochState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyStateError {
    #[error("susceptibility is a response ratio and needs a non-zero drive")]
    ZeroDrive,
    #[error("susceptibility normalization needs a non-zero equilibrium polarization")]
    ZeroPolarization,
    #[error("samples are not uniformly spaced (step {index} differs from the mean spacing)")]
    NonUniformSampling { index: usize },
    #[error("window spans {periods} drive periods, not an integer number")]
    WindowNotPeriodAligned { periods: f64 },
    #[error("window holds {0} periods, at least 10 required")]
    TooFewPeriods(usize),
    #[error("{0:.1} samples per period, at least 32 required")]
    Undersampled(f64),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateSolution {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    /// Transverse amplitude √(u² + v²).
    pub eta: f64,
    pub chi_prime: f64,
    pub chi_double_prime: f64,
}

/// Resonant steady-state amplitude η = s_eq·ω₁T₂/(1 + ω₁²T₁T₂).
pub fn eta_resonant(p: &SystemParams) -> f64 {
    p.s_eq * p.omega1 * p.t2 / (1.0 + p.omega1 * p.omega1 * p.t1 * p.t2)
}

/// Closed-form rotating-frame steady state at detuning Δ = ω₀ − Ω.
pub fn steady_state_rotating(p: &SystemParams, detuning: f64) -> SteadyStateSolution {
    let dt2 = detuning * p.t2;
    let lorentz = 1.0 + dt2 * dt2;
    let d = lorentz + p.omega1 * p.omega1 * p.t1 * p.t2;
    let u = p.s_eq * p.omega1 * detuning * p.t2 * p.t2 / d;
    let v = p.s_eq * p.omega1 * p.t2 / d;
    let w = p.s_eq * lorentz / d;
    SteadyStateSolution {
        u,
        v,
        w,
        eta: u.hypot(v),
        // ω₁ → 0 limits of (u, v)/(2ω₁T₂s_eq), finite at zero drive
        chi_prime: dt2 / (2.0 * d),
        chi_double_prime: 1.0 / (2.0 * d),
    }
}

/// Normalized susceptibility (χ′, χ″) = (u, v)/(2ω₁T₂s_eq).
pub fn susceptibility(p: &SystemParams, detuning: f64) -> Result<(f64, f64), SteadyStateError> {
    if p.omega1 == 0.0 {
        return Err(SteadyStateError::ZeroDrive);
    }
    if p.s_eq == 0.0 {
        return Err(SteadyStateError::ZeroPolarization);
    }
    let sol = steady_state_rotating(p, detuning);
    let norm = 2.0 * p.omega1 * p.t2 * p.s_eq;
    Ok((sol.u / norm, sol.v / norm))
}

/// Steady state obtained by integrating the rotating-frame equations from
/// equilibrium until the state stops changing by more than `eps`.
pub fn steady_state_numeric(
    p: &SystemParams,
    detuning: f64,
    cfg: &IntegratorConfig,
    eps: f64,
) -> Result<SteadyStateSolution, SteadyStateError> {
    let max_span = 200.0 * p.t1.max(p.t2);
    let m = integrate_to_steady_state(p, detuning, cfg, eps, max_span)?;
    let closed = steady_state_rotating(p, detuning);
    Ok(SteadyStateSolution {
        u: m.u,
        v: m.v,
        w: m.w,
        eta: m.transverse(),
        chi_prime: closed.chi_prime,
        chi_double_prime: closed.chi_double_prime,
    })
}

/// Numeric resonant η with the default convergence threshold.
pub fn eta_numeric(p: &SystemParams, cfg: &IntegratorConfig) -> Result<f64, SteadyStateError> {
    Ok(steady_state_numeric(p, 0.0, cfg, STEADY_EPS)?.eta)
}

/// Sample times covering exactly `periods` drive periods starting at
/// `t_start`, `per_period` points each, endpoint excluded.
pub fn period_aligned_times(t_start: f64, omega_drive: f64, periods: usize, per_period: usize) -> Vec<f64> {
    let n = periods * per_period;
    let dt = TAU / omega_drive / per_period as f64;
    (0..n).map(|i| t_start + i as f64 * dt).collect()
}

/// Amplitude of the component of s₁(t) oscillating at Ω: 2·|⟨s₁(t)e^{iΩt}⟩|
/// over a rectangular window of an integer number of periods.
///
/// The samples must be uniformly spaced with the window length taken as
/// `n·dt` (endpoint excluded), span at least 10 periods and resolve each
/// period with at least 32 points.
pub fn fundamental_amplitude(traj: &Trajectory<BlochState>, omega_drive: f64) -> Result<f64, SteadyStateError> {
    let s1: Vec<f64> = traj.states.iter().map(|s| s.s1).collect();
    fundamental_amplitude_of(&traj.times, &s1, omega_drive)
}

/// [`fundamental_amplitude`] on raw `(times, signal)` samples.
pub fn fundamental_amplitude_of(times: &[f64], signal: &[f64], omega_drive: f64) -> Result<f64, SteadyStateError> {
    let n = times.len();
    if n < 2 || signal.len() != n {
        return Err(SteadyStateError::TooFewPeriods(0));
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(SteadyStateError::NonUniformSampling { index: 0 });
    }
    if let Some(index) = times.windows(2).position(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(SteadyStateError::NonUniformSampling { index });
    }
    let periods = n as f64 * dt * omega_drive / TAU;
    let whole = periods.round();
    if (periods - whole).abs() > 1e-6 * periods.max(1.0) || whole < 1.0 {
        return Err(SteadyStateError::WindowNotPeriodAligned { periods });
    }
    if whole < 10.0 {
        return Err(SteadyStateError::TooFewPeriods(whole as usize));
    }
    let per_period = n as f64 / whole;
    if per_period < 32.0 {
        return Err(SteadyStateError::Undersampled(per_period));
    }
    let sum: Complex64 = times
        .iter()
        .zip(signal)
        .map(|(&t, &x)| x * Complex64::from_polar(1.0, omega_drive * t))
        .sum();
    Ok(2.0 * sum.norm() / n as f64)
}
