//! Equations of motion of the driven, relaxing two-level system.
//!
//! Three equivalent descriptions are provided:
//!
//! * [`bloch_rhs`]: the lab-frame Bloch equations for s = (s₁, s₂, s₃),
//!   driven by 2ω₁cos(Ωt) along σ₁.
//! * [`lindblad_rhs`]: the Markovian master equation for ρ, with the
//!   dissipator built from [`generator_matrix`]. It matches [`bloch_rhs`]
//!   term by term after ρ ↦ s.
//! * [`rotating_rhs`]: the rotating-wave equations for μ = (u, v, w) in the
//!   frame rotating at Ω, with detuning Δ = ω₀ − Ω.
//!
//! Frame convention: u + iv = e^{iΩt}(s₁ + is₂), w = s₃. Free precession in
//! the lab frame runs as s₁ + is₂ ∝ e^{−iω₀t}.

mod integrator;

pub use integrator::{integrate, IntegrateError, IntegratorConfig, IntegratorStats, Method, OdeState, Trajectory};

use num_complex::Complex64;
use thiserror::Error;

use crate::params::SystemParams;
use crate::relaxation::{generator_matrix, RelaxationMatrix};
use crate::state::{BlochState, DensityMatrix, RotatingState};

/// Default convergence threshold for [`detect_steady_state`].
pub const STEADY_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("need at least {needed} samples in the detection window, found {found}")]
    InsufficientSamples { needed: usize, found: usize },
    #[error("no steady state within {0} s")]
    NotConverged(f64),
}

/// Lab-frame Bloch equations.
pub fn bloch_rhs(t: f64, s: &BlochState, p: &SystemParams) -> BlochState {
    let drive = 2.0 * p.omega1 * (p.omega_drive * t).cos();
    BlochState {
        s1: p.omega0 * s.s2 - s.s1 / p.t2,
        s2: -p.omega0 * s.s1 - s.s2 / p.t2 + drive * s.s3,
        s3: -drive * s.s2 - (s.s3 - p.s_eq) / p.t1,
    }
}

type C2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

const PAULI: [C2; 3] = [
    [[ZERO, ONE], [ONE, ZERO]],
    [[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]],
    [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]],
];

fn mul(a: &C2, b: &C2) -> C2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn add_scaled(acc: &mut C2, k: Complex64, m: &C2) {
    for (arow, mrow) in acc.iter_mut().zip(m) {
        for (a, x) in arow.iter_mut().zip(mrow) {
            *a += k * x;
        }
    }
}

/// Hamiltonian in rad/s (ħ = 1), H(t) = −(ω₀σ₃ + 2ω₁cos(Ωt)σ₁)/2. The
/// overall sign fixes the precession sense of the Bloch equations.
pub fn hamiltonian(t: f64, p: &SystemParams) -> [[Complex64; 2]; 2] {
    let mut h = [[ZERO; 2]; 2];
    add_scaled(&mut h, Complex64::new(-0.5 * p.omega0, 0.0), &PAULI[2]);
    add_scaled(
        &mut h,
        Complex64::new(-p.omega1 * (p.omega_drive * t).cos(), 0.0),
        &PAULI[0],
    );
    h
}

/// dρ/dt = −i[H, ρ] + ¼ Σ_kl a_kl ([σ_k ρ, σ_l] + [σ_k, ρ σ_l]) for an
/// arbitrary coefficient matrix `a`.
pub fn master_equation_rhs(t: f64, rho: &DensityMatrix, p: &SystemParams, a: &RelaxationMatrix) -> DensityMatrix {
    let r = &rho.m;
    let h = hamiltonian(t, p);
    let hr = mul(&h, r);
    let rh = mul(r, &h);
    let mut out = [[ZERO; 2]; 2];
    add_scaled(&mut out, -I, &hr);
    add_scaled(&mut out, I, &rh);

    for k in 0..3 {
        let sk_r = mul(&PAULI[k], r);
        for l in 0..3 {
            let coeff = a.a[k][l];
            if coeff == ZERO {
                continue;
            }
            // [σ_k ρ, σ_l] + [σ_k, ρ σ_l] = 2σ_kρσ_l − σ_lσ_kρ − ρσ_lσ_k
            let sl_sk = mul(&PAULI[l], &PAULI[k]);
            let w = 0.25 * coeff;
            add_scaled(&mut out, 2.0 * w, &mul(&sk_r, &PAULI[l]));
            add_scaled(&mut out, -w, &mul(&sl_sk, r));
            add_scaled(&mut out, -w, &mul(r, &sl_sk));
        }
    }
    DensityMatrix::from_entries(out)
}

/// Master-equation generator that reproduces [`bloch_rhs`].
pub fn lindblad_rhs(t: f64, rho: &DensityMatrix, p: &SystemParams) -> DensityMatrix {
    master_equation_rhs(t, rho, p, &generator_matrix(p))
}

/// Rotating-wave equations with detuning Δ = ω₀ − Ω:
/// u̇ = Δv − u/T₂, v̇ = −Δu − v/T₂ + ω₁w, ẇ = −ω₁v − (w − s_eq)/T₁.
pub fn rotating_rhs(_t: f64, m: &RotatingState, p: &SystemParams, detuning: f64) -> RotatingState {
    RotatingState {
        u: detuning * m.v - m.u / p.t2,
        v: -detuning * m.u - m.v / p.t2 + p.omega1 * m.w,
        w: -p.omega1 * m.v - (m.w - p.s_eq) / p.t1,
    }
}

/// u + iv = e^{iΩt}(s₁ + is₂), w = s₃.
pub fn lab_to_rotating(s: &BlochState, t: f64, omega_drive: f64) -> RotatingState {
    let (sin, cos) = (omega_drive * t).sin_cos();
    RotatingState {
        u: s.s1 * cos - s.s2 * sin,
        v: s.s1 * sin + s.s2 * cos,
        w: s.s3,
    }
}

pub fn rotating_to_lab(m: &RotatingState, t: f64, omega_drive: f64) -> BlochState {
    let (sin, cos) = (omega_drive * t).sin_cos();
    BlochState {
        s1: m.u * cos + m.v * sin,
        s2: -m.u * sin + m.v * cos,
        s3: m.w,
    }
}

pub fn simulate_bloch(
    p: &SystemParams,
    s0: BlochState,
    t_span: (f64, f64),
    t_eval: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<BlochState>, IntegrateError> {
    integrate(|t, s| bloch_rhs(t, s, p), s0, t_span, t_eval, cfg)
}

pub fn simulate_lindblad(
    p: &SystemParams,
    rho0: DensityMatrix,
    t_span: (f64, f64),
    t_eval: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<DensityMatrix>, IntegrateError> {
    let a = generator_matrix(p);
    integrate(|t, r| master_equation_rhs(t, r, p, &a), rho0, t_span, t_eval, cfg)
}

pub fn simulate_rotating(
    p: &SystemParams,
    detuning: f64,
    m0: RotatingState,
    t_span: (f64, f64),
    t_eval: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<RotatingState>, IntegrateError> {
    integrate(|t, m| rotating_rhs(t, m, p, detuning), m0, t_span, t_eval, cfg)
}

/// `n + 1` evenly spaced points from `t0` to `t1` inclusive.
pub fn uniform_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let dt = (t1 - t0) / n as f64;
    let mut v: Vec<f64> = (0..=n).map(|i| t0 + i as f64 * dt).collect();
    if let Some(last) = v.last_mut() {
        *last = t1;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateDetection {
    pub converged: bool,
    /// Mean state over the trailing window.
    pub steady: RotatingState,
    /// Largest per-component spread (max − min) inside the window.
    pub spread: f64,
}

/// Default detection window 2·max(T₁, T₂).
pub fn default_window(p: &SystemParams) -> f64 {
    2.0 * p.t1.max(p.t2)
}

/// Declares a rotating-frame trajectory stationary when every component
/// varies by less than `eps` over the trailing `window` seconds. A
/// trajectory shorter than the window is never converged.
pub fn detect_steady_state(
    traj: &Trajectory<RotatingState>,
    window: f64,
    eps: f64,
) -> Result<SteadyStateDetection, DynamicsError> {
    let (t_last, _) = traj
        .last()
        .ok_or(DynamicsError::InsufficientSamples { needed: 2, found: 0 })?;
    let start = traj.times.partition_point(|&t| t < t_last - window);
    let tail = &traj.states[start..];
    if tail.len() < 2 {
        return Err(DynamicsError::InsufficientSamples {
            needed: 2,
            found: tail.len(),
        });
    }
    let long_enough = t_last - traj.times[0] >= window * (1.0 - 1e-12);
    let n = tail.len() as f64;
    let mut mean = [0.0; 3];
    let mut spread: f64 = 0.0;
    for c in 0..3 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for m in tail {
            let x = m.component(c);
            mean[c] += x / n;
            lo = lo.min(x);
            hi = hi.max(x);
        }
        spread = spread.max(hi - lo);
    }
    Ok(SteadyStateDetection {
        converged: long_enough && spread < eps,
        steady: RotatingState::from(mean),
        spread,
    })
}

/// Drives the rotating-frame system from equilibrium (0, 0, s_eq) in chunks
/// of one detection window until [`detect_steady_state`] converges or
/// `max_span` is exhausted. Returns the last state of the converged run.
pub fn integrate_to_steady_state(
    p: &SystemParams,
    detuning: f64,
    cfg: &IntegratorConfig,
    eps: f64,
    max_span: f64,
) -> Result<RotatingState, DynamicsError> {
    let window = default_window(p);
    let samples_per_window = 64;
    let mut state = RotatingState::new(0.0, 0.0, p.s_eq);
    let mut t = 0.0;
    while t < max_span {
        let times = uniform_times(t, t + window, samples_per_window);
        let tr = simulate_rotating(p, detuning, state, (t, t + window), &times, cfg)?;
        let det = detect_steady_state(&tr, window, eps)?;
        let (t_end, last) = tr.last().expect("non-empty trajectory");
        state = last;
        t = t_end;
        if det.converged {
            return Ok(state);
        }
    }
    Err(DynamicsError::NotConverged(max_span))
}
