//! Simulated NMR measurement protocols.
//!
//! Pulses are ideal instantaneous rotations. Between pulses every
//! isochromat evolves under the undriven rotating-frame Bloch equations,
//! which have the exact solution
//!
//! ```text
//! (u + iv)(t) = (u + iv)(0)·e^{−iδt − t/T₂},   w(t) = s_eq + (w(0) − s_eq)·e^{−t/T₁}
//! ```
//!
//! for a static offset δ. Rotations are right-handed about the axis
//! (cos φ, sin φ, 0), so a π/2 pulse with phase 0 takes +z to −y.
//!
//! Each scan starts from exact thermal equilibrium (0, 0, s_eq), standing
//! in for a repetition delay of [`REPETITION_DELAY_T1`]·T₁.

mod fit;

pub use fit::{fit_t1, fit_t2, FitError, T1Fit, T2Fit};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::dynamics::{simulate_rotating, uniform_times, IntegrateError, IntegratorConfig};
use crate::params::SystemParams;
use crate::state::RotatingState;

/// Repetition delay between scans, in units of T₁.
pub const REPETITION_DELAY_T1: f64 = 10.0;
/// Default size of the inhomogeneous-broadening grid.
pub const DEFAULT_ISOCHROMATS: usize = 21;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PulseError {
    #[error("isochromat weights must be non-negative and sum to 1 (sum = {0})")]
    InvalidWeights(f64),
    #[error("isochromat offsets and weights differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseEvent {
    /// Instantaneous rotation by `angle` about (cos `phase`, sin `phase`, 0).
    HardPulse { angle: f64, phase: f64 },
    /// Free evolution.
    Delay(f64),
    /// Free evolution for the given duration, then one recorded sample.
    Acquire(f64),
}

impl PulseEvent {
    pub fn validate(&self) -> Result<(), PulseError> {
        match *self {
            PulseEvent::HardPulse { angle, phase } => {
                if !(0.0..std::f64::consts::TAU).contains(&angle) || !phase.is_finite() {
                    return Err(PulseError::InvalidSequence(format!(
                        "flip angle {angle} outside [0, 2π) or bad phase {phase}"
                    )));
                }
            }
            PulseEvent::Delay(d) | PulseEvent::Acquire(d) => {
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(PulseError::InvalidSequence(format!("negative duration {d}")));
                }
            }
        }
        Ok(())
    }
}

/// Quantity stored in an [`AcquisitionRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// Ensemble-mean w.
    Longitudinal,
    /// |ensemble-mean (u + iv)|.
    Transverse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub seed: u64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionRecord {
    pub observable: Observable,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub noise: Option<NoiseSpec>,
}

impl AcquisitionRecord {
    pub fn new(observable: Observable, times: Vec<f64>, values: Vec<f64>) -> Self {
        AcquisitionRecord {
            observable,
            times,
            values,
            noise: None,
        }
    }

    /// Adds zero-mean Gaussian noise of standard deviation `sigma`, drawn
    /// from a generator seeded with `seed`.
    pub fn with_noise(mut self, seed: u64, sigma: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma.abs()).expect("finite sigma");
        for v in &mut self.values {
            *v += normal.sample(&mut rng);
        }
        self.noise = Some(NoiseSpec { seed, sigma });
        self
    }
}

/// Static frequency offsets (rad/s) with normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct IsochromatEnsemble {
    offsets: Vec<f64>,
    weights: Vec<f64>,
}

impl IsochromatEnsemble {
    pub fn new(offsets: Vec<f64>, weights: Vec<f64>) -> Result<Self, PulseError> {
        if offsets.len() != weights.len() || offsets.is_empty() {
            return Err(PulseError::LengthMismatch(offsets.len(), weights.len()));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(w >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(PulseError::InvalidWeights(sum));
        }
        Ok(IsochromatEnsemble { offsets, weights })
    }

    /// One on-resonance isochromat.
    pub fn single() -> Self {
        IsochromatEnsemble {
            offsets: vec![0.0],
            weights: vec![1.0],
        }
    }

    /// Gaussian line of standard deviation `sigma` (rad/s) sampled at `n`
    /// equally spaced offsets over ±3σ.
    pub fn gaussian(sigma: f64, n: usize) -> Self {
        if sigma == 0.0 || n <= 1 {
            return Self::single();
        }
        let offsets = crate::sr_analysis::linspace(-3.0 * sigma, 3.0 * sigma, n);
        let raw: Vec<f64> = offsets.iter().map(|x| (-0.5 * (x / sigma).powi(2)).exp()).collect();
        let total: f64 = raw.iter().sum();
        IsochromatEnsemble {
            offsets,
            weights: raw.into_iter().map(|w| w / total).collect(),
        }
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// Rotation by `angle` about (cos `phase`, sin `phase`, 0); preserves the
/// vector norm.
pub fn apply_hard_pulse(s: &RotatingState, angle: f64, phase: f64) -> RotatingState {
    let (nx, ny) = (phase.cos(), phase.sin());
    let (sin, cos) = angle.sin_cos();
    let dot = nx * s.u + ny * s.v;
    // n × s with n = (nx, ny, 0)
    let cross = [ny * s.w, -nx * s.w, nx * s.v - ny * s.u];
    RotatingState {
        u: s.u * cos + cross[0] * sin + nx * dot * (1.0 - cos),
        v: s.v * cos + cross[1] * sin + ny * dot * (1.0 - cos),
        w: s.w * cos + cross[2] * sin,
    }
}

/// Exact undriven evolution for `duration` at static offset `offset`.
pub fn free_evolution(s: &RotatingState, offset: f64, duration: f64, p: &SystemParams) -> RotatingState {
    let decay2 = (-duration / p.t2).exp();
    let (sin, cos) = (offset * duration).sin_cos();
    // (u + iv)·e^{−iδt}
    let u = (s.u * cos + s.v * sin) * decay2;
    let v = (s.v * cos - s.u * sin) * decay2;
    let w = p.s_eq + (s.w - p.s_eq) * (-duration / p.t1).exp();
    RotatingState { u, v, w }
}

/// Runs `events` on every isochromat from equilibrium and returns the
/// ensemble-mean state at each [`PulseEvent::Acquire`], with its time.
pub fn run_sequence(
    p: &SystemParams,
    ensemble: &IsochromatEnsemble,
    events: &[PulseEvent],
) -> Result<Vec<(f64, RotatingState)>, PulseError> {
    for e in events {
        e.validate()?;
    }
    let mut states = vec![RotatingState::new(0.0, 0.0, p.s_eq); ensemble.len()];
    let mut t = 0.0;
    let mut out = Vec::new();
    for e in events {
        match *e {
            PulseEvent::HardPulse { angle, phase } => {
                for s in &mut states {
                    *s = apply_hard_pulse(s, angle, phase);
                }
            }
            PulseEvent::Delay(d) | PulseEvent::Acquire(d) => {
                for (s, &off) in states.iter_mut().zip(&ensemble.offsets) {
                    *s = free_evolution(s, off, d, p);
                }
                t += d;
            }
        }
        if let PulseEvent::Acquire(_) = e {
            let mut mean = RotatingState::default();
            for (s, &w) in states.iter().zip(&ensemble.weights) {
                mean.u += w * s.u;
                mean.v += w * s.v;
                mean.w += w * s.w;
            }
            out.push((t, mean));
        }
    }
    Ok(out)
}

fn observe(observable: Observable, m: &RotatingState) -> f64 {
    match observable {
        Observable::Longitudinal => m.w,
        Observable::Transverse => m.transverse(),
    }
}

/// Inversion recovery: for each delay τ, a π pulse from equilibrium, free
/// recovery for τ, then a reading of the longitudinal component
/// s₃(τ) = s_eq(1 − 2e^{−τ/T₁}). Times in the record are the delays.
pub fn inversion_recovery(p: &SystemParams, delays: &[f64]) -> Result<AcquisitionRecord, PulseError> {
    let mut values = Vec::with_capacity(delays.len());
    for &tau in delays {
        let seq = [
            PulseEvent::HardPulse {
                angle: std::f64::consts::PI,
                phase: 0.0,
            },
            PulseEvent::Acquire(tau),
        ];
        let acq = run_sequence(p, &IsochromatEnsemble::single(), &seq)?;
        values.push(observe(Observable::Longitudinal, &acq[0].1));
    }
    Ok(AcquisitionRecord::new(
        Observable::Longitudinal,
        delays.to_vec(),
        values,
    ))
}

/// Carr-Purcell echo train: π/2 pulse, then `n_echoes` repetitions of
/// [τ, π, τ, read]. Records the ensemble transverse magnitude at the echo
/// tops t = 2nτ.
pub fn carr_purcell(
    p: &SystemParams,
    ensemble: &IsochromatEnsemble,
    tau_echo: f64,
    n_echoes: usize,
) -> Result<AcquisitionRecord, PulseError> {
    if !(tau_echo > 0.0) || n_echoes < 2 {
        return Err(PulseError::InvalidSequence(format!(
            "need tau_echo > 0 and at least 2 echoes (tau = {tau_echo}, n = {n_echoes})"
        )));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut seq = vec![PulseEvent::HardPulse {
        angle: half_pi,
        phase: 0.0,
    }];
    for _ in 0..n_echoes {
        seq.push(PulseEvent::Delay(tau_echo));
        seq.push(PulseEvent::HardPulse {
            angle: std::f64::consts::PI,
            phase: 0.0,
        });
        seq.push(PulseEvent::Acquire(tau_echo));
    }
    let acq = run_sequence(p, ensemble, &seq)?;
    let (times, values) = acq
        .iter()
        .map(|(t, m)| (*t, observe(Observable::Transverse, m)))
        .unzip();
    Ok(AcquisitionRecord::new(Observable::Transverse, times, values))
}

/// Free-induction decay after a π/2 pulse, sampled at `times` (increasing,
/// non-negative).
pub fn free_induction_decay(
    p: &SystemParams,
    ensemble: &IsochromatEnsemble,
    times: &[f64],
) -> Result<AcquisitionRecord, PulseError> {
    let mut seq = vec![PulseEvent::HardPulse {
        angle: std::f64::consts::FRAC_PI_2,
        phase: 0.0,
    }];
    let mut last = 0.0;
    for &t in times {
        if t < last {
            return Err(PulseError::InvalidSequence("sample times must increase".into()));
        }
        seq.push(PulseEvent::Acquire(t - last));
        last = t;
    }
    let acq = run_sequence(p, ensemble, &seq)?;
    let values = acq.iter().map(|(_, m)| m.transverse()).collect();
    Ok(AcquisitionRecord::new(Observable::Transverse, times.to_vec(), values))
}

/// Continuous resonant (or detuned, per `p`) drive from equilibrium for
/// `duration`, reading √(u² + v²) every `readout_stride` seconds starting
/// at t = 0. The final sample sits exactly at `duration`.
pub fn long_pulse_response(
    p: &SystemParams,
    duration: f64,
    readout_stride: f64,
) -> Result<AcquisitionRecord, PulseError> {
    long_pulse_response_with(p, duration, readout_stride, &IntegratorConfig::adaptive(1e-11))
}

pub fn long_pulse_response_with(
    p: &SystemParams,
    duration: f64,
    readout_stride: f64,
    cfg: &IntegratorConfig,
) -> Result<AcquisitionRecord, PulseError> {
    if !(duration > 0.0 && readout_stride > 0.0) {
        return Err(PulseError::InvalidSequence(format!(
            "duration ({duration}) and stride ({readout_stride}) must be positive"
        )));
    }
    let n = (duration / readout_stride).ceil().max(1.0) as usize;
    let mut times: Vec<f64> = (0..n).map(|i| i as f64 * readout_stride).collect();
    times.push(duration);
    if times.len() >= 2 && times[times.len() - 2] >= duration {
        times.remove(times.len() - 2);
    }
    let eq = RotatingState::new(0.0, 0.0, p.s_eq);
    let tr = simulate_rotating(p, p.detuning(), eq, (0.0, duration), &times, cfg)?;
    let values = tr.states.iter().map(|m| m.transverse()).collect();
    Ok(AcquisitionRecord::new(Observable::Transverse, tr.times, values))
}

/// Acquisition settings for a combined T₁/T₂ measurement. Delays and echo
/// spacing scale with the nominal relaxation times of the sample, as an
/// operator would choose them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationProtocol {
    /// Number of inversion delays, log-spaced over [`ir_lo`, `ir_hi`]·T₁.
    ///
    /// [`ir_lo`]: RelaxationProtocol::ir_lo
    /// [`ir_hi`]: RelaxationProtocol::ir_hi
    pub ir_delays: usize,
    pub ir_lo: f64,
    pub ir_hi: f64,
    /// Echo half-spacing τ in units of T₂.
    pub tau_fraction: f64,
    pub n_echoes: usize,
    /// Standard deviation of the Gaussian offset distribution (rad/s).
    pub linewidth: f64,
}

impl Default for RelaxationProtocol {
    fn default() -> Self {
        RelaxationProtocol {
            ir_delays: 16,
            ir_lo: 0.02,
            ir_hi: 5.0,
            tau_fraction: 0.05,
            n_echoes: 20,
            linewidth: crate::params::hz_to_rad(50.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationMeasurement {
    pub t1: T1Fit,
    pub t2: T2Fit,
}

/// Simulates inversion recovery and a Carr-Purcell train for `p`, adds
/// optional noise (absolute σ; the echo train uses `seed + 1`) and refits
/// both relaxation times.
pub fn measure_relaxation(
    p: &SystemParams,
    protocol: &RelaxationProtocol,
    noise: Option<NoiseSpec>,
) -> Result<RelaxationMeasurement, PulseError> {
    let delays = log_delays(protocol.ir_lo * p.t1, protocol.ir_hi * p.t1, protocol.ir_delays);
    let mut ir = inversion_recovery(p, &delays)?;
    let ensemble = IsochromatEnsemble::gaussian(protocol.linewidth, DEFAULT_ISOCHROMATS);
    let mut cp = carr_purcell(p, &ensemble, protocol.tau_fraction * p.t2, protocol.n_echoes)?;
    if let Some(n) = noise {
        ir = ir.with_noise(n.seed, n.sigma);
        cp = cp.with_noise(n.seed.wrapping_add(1), n.sigma);
    }
    Ok(RelaxationMeasurement {
        t1: fit_t1(&ir)?,
        t2: fit_t2(&cp)?,
    })
}

/// Convenience: log-spaced inversion delays from `lo` to `hi`.
pub fn log_delays(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    crate::sr_analysis::logspace(lo, hi, n)
}

/// Convenience: evenly spaced readout times over `[0, duration]`.
pub fn readout_times(duration: f64, n: usize) -> Vec<f64> {
    uniform_times(0.0, duration, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::hz_to_rad;
    use crate::steady_state::eta_resonant;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params(t1: f64, t2: f64, s_eq: f64, omega1: f64) -> SystemParams {
        SystemParams::resonant(hz_to_rad(400e6), omega1, t1, t2, s_eq).unwrap()
    }

    #[test]
    fn hard_pulses() {
        let eq = RotatingState::new(0.0, 0.0, 0.8);
        let inv = apply_hard_pulse(&eq, PI, 0.0);
        assert!(inv.u.abs() < 1e-15 && inv.v.abs() < 1e-15 && (inv.w + 0.8).abs() < 1e-15);
        let q = apply_hard_pulse(&RotatingState::new(0.0, 0.0, 1.0), FRAC_PI_2, 0.0);
        assert!(q.u.abs() < 1e-15 && (q.v + 1.0).abs() < 1e-15 && q.w.abs() < 1e-15);
        let s = RotatingState::new(0.1, -0.3, 0.5);
        assert_eq!(apply_hard_pulse(&s, 0.0, 1.3), s);
    }

    #[test]
    fn double_pi_is_identity_and_norm_preserved() {
        let s = RotatingState::new(0.3, -0.2, 0.6);
        for phase in [0.0, 0.7, FRAC_PI_2, 2.9] {
            let once = apply_hard_pulse(&s, PI, phase);
            assert!((once.norm() - s.norm()).abs() < 1e-15);
            let twice = apply_hard_pulse(&once, PI, phase);
            for (a, b) in twice.to_array().iter().zip(s.to_array()) {
                assert!((a - b).abs() < 1e-14);
            }
            let any = apply_hard_pulse(&s, 1.234, phase);
            assert!((any.norm() - s.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn event_validation() {
        assert!(PulseEvent::Delay(-1.0).validate().is_err());
        assert!(PulseEvent::HardPulse { angle: 7.0, phase: 0.0 }.validate().is_err());
        assert!(PulseEvent::Acquire(0.0).validate().is_ok());
    }

    #[test]
    fn ensemble_validation() {
        assert!(IsochromatEnsemble::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(IsochromatEnsemble::new(vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(IsochromatEnsemble::new(vec![0.0], vec![0.5, 0.5]).is_err());
        let g = IsochromatEnsemble::gaussian(100.0, DEFAULT_ISOCHROMATS);
        assert_eq!(g.len(), 21);
        assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(IsochromatEnsemble::new(g.offsets().to_vec(), g.weights().to_vec()).is_ok());
    }

    #[test]
    fn inversion_recovery_examples() {
        let p = params(36.5e-3, 36.5e-3, 0.9, 0.0);
        let zero = p.t1 * std::f64::consts::LN_2;
        assert!((zero * 1e3 - 25.30).abs() < 5e-3);
        let rec = inversion_recovery(&p, &[0.0, zero, 50.0 * p.t1]).unwrap();
        assert!((rec.values[0] + 0.9).abs() < 1e-15);
        assert!(rec.values[1].abs() < 1e-15);
        assert!((rec.values[2] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn inversion_recovery_matches_integrated_bloch() {
        let p = SystemParams::resonant(2000.0, 0.0, 0.03, 0.02, 0.6).unwrap();
        let delays = log_delays(1e-3, 0.1, 8);
        let rec = inversion_recovery(&p, &delays).unwrap();
        let cfg = IntegratorConfig::adaptive(1e-12);
        let tr = crate::dynamics::simulate_bloch(
            &p,
            crate::state::BlochState::new(0.0, 0.0, -0.6),
            (0.0, 0.1),
            &delays,
            &cfg,
        )
        .unwrap();
        for (a, s) in rec.values.iter().zip(&tr.states) {
            assert!((a - s.s3).abs() < 1e-9);
        }
    }

    #[test]
    fn echo_decay_closed_form() {
        let p = params(28.5e-3, 28.5e-3, 1.0, 0.0);
        let rec = carr_purcell(&p, &IsochromatEnsemble::gaussian(hz_to_rad(200.0), 21), 5e-3, 6).unwrap();
        assert!((rec.values[2] - 0.3490).abs() < 5e-5);
        for (t, v) in rec.times.iter().zip(&rec.values) {
            assert!((v - (-t / p.t2).exp()).abs() < 1e-12);
        }
        assert!(carr_purcell(&p, &IsochromatEnsemble::single(), 5e-3, 1).is_err());
        assert!(carr_purcell(&p, &IsochromatEnsemble::single(), 0.0, 4).is_err());
    }

    #[test]
    fn refocusing_vs_dephasing() {
        let p = params(25e-3, 25e-3, 1.0, 0.0);
        let times: Vec<f64> = (1..=8).map(|n| n as f64 * 2.0 * 2e-3).collect();

        let fid_single = free_induction_decay(&p, &IsochromatEnsemble::single(), &times).unwrap();
        let cp_single = carr_purcell(&p, &IsochromatEnsemble::single(), 2e-3, 8).unwrap();
        for (a, b) in fid_single.values.iter().zip(&cp_single.values) {
            assert!((a - b).abs() < 1e-14);
        }

        let broad = IsochromatEnsemble::gaussian(hz_to_rad(50.0), 21);
        let fid = free_induction_decay(&p, &broad, &times).unwrap();
        let cp = carr_purcell(&p, &broad, 2e-3, 8).unwrap();
        for ((t, f), e) in times.iter().zip(&fid.values).zip(&cp.values) {
            let pure = (-t / p.t2).exp();
            assert!(*f < pure - 1e-3, "FID at {t} not faster than T2 decay");
            assert!((e - pure).abs() < 1e-12);
        }
    }

    #[test]
    fn long_pulse_examples() {
        let w = hz_to_rad(6.3);
        let p = params(25e-3, 25e-3, 1.0, w);
        let analytic = 0.49997;
        assert!((eta_resonant(&p) - analytic).abs() < 5e-6);
        let rec = long_pulse_response(&p, 0.25, 1e-3).unwrap();
        assert_eq!(*rec.times.last().unwrap(), 0.25);
        assert_eq!(rec.values[0], 0.0);
        // After 10 lifetimes the transient (∝ e^{-10}) is still ~1e-5.
        assert!((rec.values.last().unwrap() - analytic).abs() < 1e-4);
        let rec = long_pulse_response(&p, 0.5, 5e-3).unwrap();
        assert!((rec.values.last().unwrap() - eta_resonant(&p)).abs() < 1e-6);

        let short = long_pulse_response(&p, 1e-3, 1e-4).unwrap();
        assert!((short.values.last().unwrap() - eta_resonant(&p)).abs() > 0.4);

        let idle = long_pulse_response(&p.with_omega1(0.0), 0.1, 1e-3).unwrap();
        assert!(idle.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn relaxation_round_trip() {
        let proto = RelaxationProtocol::default();
        for t in [45.5e-3, 18.0e-3] {
            let p = params(t, t, 0.5, 0.0);
            let clean = measure_relaxation(&p, &proto, None).unwrap();
            assert!((clean.t1.t1_hat / t - 1.0).abs() < 1e-6);
            assert!((clean.t2.t2_hat / t - 1.0).abs() < 1e-6);
            let noisy = measure_relaxation(&p, &proto, Some(NoiseSpec { seed: 3, sigma: 0.005 })).unwrap();
            assert!((noisy.t1.t1_hat - t).abs() < 1e-3);
            assert!((noisy.t2.t2_hat - t).abs() < 1e-3);
        }
    }

    #[test]
    fn noise_is_reproducible() {
        let rec = AcquisitionRecord::new(Observable::Longitudinal, vec![0.0, 1.0, 2.0], vec![1.0; 3]);
        let a = rec.clone().with_noise(7, 0.01);
        let b = rec.clone().with_noise(7, 0.01);
        let c = rec.with_noise(8, 0.01);
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        assert_eq!(a.noise, Some(NoiseSpec { seed: 7, sigma: 0.01 }));
    }
}
