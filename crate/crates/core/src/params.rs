//! Drive and relaxation parameters of a two-level system.
//!
//! All frequencies are stored as angular frequencies (rad/s) and all times in
//! seconds. Conversions from the Hz values used on the command line and in
//! manifests go through [`hz_to_rad`] / [`rad_to_hz`].

use std::f64::consts::TAU;

use thiserror::Error;

/// Proton gyromagnetic ratio in rad/(s·T).
pub const GAMMA_PROTON: f64 = 2.675_221_874e8;

/// 2·ω₁ must stay below this fraction of ω₀ for the weak-drive flag.
pub const WEAK_DRIVE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("relaxation times must be positive (t1 = {t1}, t2 = {t2})")]
    NonPositiveTime { t1: f64, t2: f64 },
    #[error("t2 = {t2} s exceeds 2·t1 = {} s", 2.0 * t1)]
    T2Bound { t1: f64, t2: f64 },
    #[error("|s_eq| = {0} lies outside the Bloch ball")]
    BlochBound(f64),
    #[error("{name} must be finite and non-negative, got {value}")]
    InvalidFrequency { name: &'static str, value: f64 },
    #[error("gyromagnetic ratio and static field must be positive (gamma = {gamma}, b0 = {b0})")]
    InvalidField { gamma: f64, b0: f64 },
}

/// Parameters of the driven, relaxing two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Larmor frequency ω₀ (rad/s).
    pub omega0: f64,
    /// Rabi frequency ω₁ (rad/s).
    pub omega1: f64,
    /// Drive frequency Ω (rad/s).
    pub omega_drive: f64,
    /// Longitudinal relaxation time (s).
    pub t1: f64,
    /// Transverse relaxation time (s).
    pub t2: f64,
    /// Equilibrium population difference.
    pub s_eq: f64,
}

impl SystemParams {
    /// Resonantly driven system (Ω = ω₀), validated.
    pub fn resonant(omega0: f64, omega1: f64, t1: f64, t2: f64, s_eq: f64) -> Result<Self, ParamError> {
        SystemParams {
            omega0,
            omega1,
            omega_drive: omega0,
            t1,
            t2,
            s_eq,
        }
        .validate()
    }

    /// Resonant system with a single relaxation time T₁ = T₂ = `t12`.
    pub fn single_timescale(omega0: f64, omega1: f64, t12: f64, s_eq: f64) -> Result<Self, ParamError> {
        Self::resonant(omega0, omega1, t12, t12, s_eq)
    }

    /// Returns the parameters unchanged when every invariant holds.
    pub fn validate(self) -> Result<Self, ParamError> {
        if !(self.t1 > 0.0 && self.t2 > 0.0) || !self.t1.is_finite() || !self.t2.is_finite() {
            return Err(ParamError::NonPositiveTime {
                t1: self.t1,
                t2: self.t2,
            });
        }
        if self.t2 > 2.0 * self.t1 {
            return Err(ParamError::T2Bound {
                t1: self.t1,
                t2: self.t2,
            });
        }
        if !(self.s_eq.abs() <= 1.0) {
            return Err(ParamError::BlochBound(self.s_eq));
        }
        for (name, value) in [
            ("omega0", self.omega0),
            ("omega1", self.omega1),
            ("omega_drive", self.omega_drive),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ParamError::InvalidFrequency { name, value });
            }
        }
        Ok(self)
    }

    /// True iff 2·ω₁ < 0.01·ω₀, the regime where a constant relaxation
    /// matrix and the rotating-wave approximation are trustworthy.
    pub fn is_weak_drive(&self) -> bool {
        2.0 * self.omega1 < WEAK_DRIVE_FRACTION * self.omega0
    }

    /// Detuning Δ = ω₀ − Ω.
    pub fn detuning(&self) -> f64 {
        self.omega0 - self.omega_drive
    }

    pub fn is_single_timescale(&self) -> bool {
        self.t1 == self.t2
    }

    pub fn with_omega1(self, omega1: f64) -> Self {
        SystemParams { omega1, ..self }
    }

    pub fn with_times(self, t1: f64, t2: f64) -> Self {
        SystemParams { t1, t2, ..self }
    }

    pub fn with_s_eq(self, s_eq: f64) -> Self {
        SystemParams { s_eq, ..self }
    }

    /// Sets Ω so that ω₀ − Ω equals `detuning`.
    pub fn with_detuning(self, detuning: f64) -> Self {
        SystemParams {
            omega_drive: self.omega0 - detuning,
            ..self
        }
    }
}

/// Builds system parameters from NMR quantities: ω₀ = γB₀, ω₁ = γB₁,
/// s_eq = M₀, resonant drive.
pub fn params_from_nmr(gamma: f64, b0: f64, b1: f64, t1: f64, t2: f64, m0: f64) -> Result<SystemParams, ParamError> {
    if !(gamma > 0.0 && b0 > 0.0) {
        return Err(ParamError::InvalidField { gamma, b0 });
    }
    SystemParams::resonant(gamma * b0, gamma * b1.abs(), t1, t2, m0)
}

#[inline]
pub fn hz_to_rad(hz: f64) -> f64 {
    hz * TAU
}

#[inline]
pub fn rad_to_hz(omega: f64) -> f64 {
    omega / TAU
}
