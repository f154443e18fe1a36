//! Response sweeps and the stochastic-resonance peak.
//!
//! With a single relaxation time T₁ = T₂ = T₁₂ the resonant amplitude
//! η = s_eq·ω₁T₁₂/(1 + ω₁²T₁₂²) peaks at T₁₂* = 1/ω₁ with η* = s_eq/2,
//! independent of the drive. The same point maximizes η over the drive,
//! ω₁* = (T₁T₂)^{-1/2}. Varying T₁ or T₂ alone gives monotonic curves.
//!
//! Sweeps along T₁₂ also support the constraint T₁ = k·T₂, for which the
//! peak moves to T₂* = 1/(ω₁√k) with height s_eq/(2√k). That law follows
//! directly from the resonant formula; k = 1 is the default.
//!
//! Peaks are located by a grid scan followed by bisection on the sign of
//! the closed-form slope inside the bracketing cell, down to a relative
//! width of 1e-12. Bisection on the slope sign keeps full double precision
//! where a value-based search would stall near √ε because the curve is flat
//! at its top.

use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::IntegratorConfig;
use crate::params::{ParamError, SystemParams};
use crate::steady_state::{eta_numeric, eta_resonant, steady_state_rotating, SteadyStateError};

/// Relative bracket width at which peak refinement stops.
pub const REFINE_RTOL: f64 = 1e-12;
/// Tolerance on successive differences in [`monotonicity_report`].
pub const MONOTONIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("sweep grid needs at least {needed} points, got {found}")]
    GridTooShort { needed: usize, found: usize },
    #[error("sweep grid is not strictly increasing at index {0}")]
    NonIncreasingGrid(usize),
    #[error("sweep grid value {0} must be positive for this control")]
    NonPositiveGrid(f64),
    #[error("peak location needs a non-zero drive")]
    ZeroDrive,
    #[error("ratio k = T1/T2 = {0} must be at least 0.5")]
    InvalidRatio(f64),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Numeric(#[from] SteadyStateError),
}

/// Swept quantity. Internal units: seconds for times, rad/s for
/// frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Control {
    /// Common relaxation time with T₁ = k·T₂ (T₂ is the swept value).
    T12 {
        ratio: f64,
    },
    Omega1,
    T1,
    T2,
    Detuning,
}

impl Control {
    pub fn name(&self) -> &'static str {
        match self {
            Control::T12 { .. } => "t12",
            Control::Omega1 => "omega1",
            Control::T1 => "t1",
            Control::T2 => "t2",
            Control::Detuning => "detuning",
        }
    }

    pub fn is_frequency(&self) -> bool {
        matches!(self, Control::Omega1 | Control::Detuning)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    /// Interior maximum, refined.
    Max,
    /// No interior maximum; location/value hold the best grid point.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub location: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub control: Control,
    /// Parameters at which the sweep was taken; the swept field is
    /// overwritten at each grid point.
    pub base: SystemParams,
    pub grid: Vec<f64>,
    /// |η| at each grid point.
    pub response: Vec<f64>,
    pub extremum: Extremum,
    /// Every grid point also satisfies T₂ ≤ 2T₁.
    pub physical: bool,
}

impl SweepResult {
    /// Responses divided by |s_eq|; zero when s_eq = 0.
    pub fn normalized(&self) -> Vec<f64> {
        let s = self.base.s_eq.abs();
        self.response
            .iter()
            .map(|r| if s > 0.0 { r / s } else { 0.0 })
            .collect()
    }
}

fn check_grid(grid: &[f64], min_len: usize, positive: bool) -> Result<(), AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    if grid.len() < min_len {
        return Err(AnalysisError::GridTooShort {
            needed: min_len,
            found: grid.len(),
        });
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(AnalysisError::NonIncreasingGrid(i + 1));
    }
    if positive && !(grid[0] > 0.0) {
        return Err(AnalysisError::NonPositiveGrid(grid[0]));
    }
    if let Some(&bad) = grid.iter().find(|x| !x.is_finite()) {
        return Err(AnalysisError::NonPositiveGrid(bad));
    }
    Ok(())
}

/// Parameters at grid value `x` of `control`.
fn at(control: Control, base: &SystemParams, x: f64) -> SystemParams {
    match control {
        Control::T12 { ratio } => base.with_times(ratio * x, x),
        Control::Omega1 => base.with_omega1(x),
        Control::T1 => base.with_times(x, base.t2),
        Control::T2 => base.with_times(base.t1, x),
        Control::Detuning => base.with_detuning(x),
    }
}

fn response(control: Control, base: &SystemParams, x: f64) -> f64 {
    let p = at(control, base, x);
    match control {
        Control::Detuning => steady_state_rotating(&p, x).eta,
        _ => eta_resonant(&p).abs(),
    }
}

/// A quantity with the sign of dη/dx at grid value `x`.
fn slope_sign(control: Control, base: &SystemParams, x: f64) -> f64 {
    let p = at(control, base, x);
    let w2 = p.omega1 * p.omega1;
    match control {
        Control::T12 { ratio } => 1.0 - ratio * w2 * x * x,
        Control::Omega1 => 1.0 - w2 * p.t1 * p.t2,
        Control::T1 => -1.0,
        Control::T2 => 1.0,
        Control::Detuning => {
            let x2 = (x * p.t2).powi(2);
            x.signum() * (w2 * p.t1 * p.t2 - 1.0 - x2)
        }
    }
}

fn bisect_slope(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= REFINE_RTOL * mid.abs().max(f64::MIN_POSITIVE) {
            return mid;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section maximization of a unimodal `f` on [lo, hi].
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rtol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..500 {
        if hi - lo <= rtol * (0.5 * (lo + hi)).abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}

fn locate(control: Control, base: &SystemParams, grid: &[f64], response_vals: &[f64]) -> Extremum {
    let (imax, &vmax) = response_vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let boundary = Extremum {
        location: grid[imax],
        value: vmax,
        kind: ExtremumKind::None,
    };
    if vmax == 0.0 || imax == 0 || imax + 1 == grid.len() {
        return boundary;
    }
    let (lo, hi) = (grid[imax - 1], grid[imax + 1]);
    let slope = |x: f64| slope_sign(control, base, x);
    let location = if slope(lo) > 0.0 && slope(hi) < 0.0 {
        bisect_slope(slope, lo, hi)
    } else {
        golden_section_max(|x| response(control, base, x), lo, hi, REFINE_RTOL)
    };
    Extremum {
        location,
        value: response(control, base, location),
        kind: ExtremumKind::Max,
    }
}

fn formula_domain(p: &SystemParams) -> Result<(), AnalysisError> {
    match p.validate() {
        Ok(_) | Err(ParamError::T2Bound { .. }) => Ok(()),
        Err(e) => Err(e.into()),
    }
}

/// Evaluates the closed-form response along `control` from `base`.
///
/// Only the formula domain is enforced (positive times, |s_eq| ≤ 1,
/// non-negative drive); [`SweepResult::physical`] records whether every
/// point also satisfies T₂ ≤ 2T₁.
pub fn sweep(control: Control, base: &SystemParams, grid: &[f64]) -> Result<SweepResult, AnalysisError> {
    let positive = !matches!(control, Control::Detuning);
    check_grid(grid, 3, positive)?;
    if let Control::T12 { ratio } = control {
        if !(ratio >= 0.5) {
            return Err(AnalysisError::InvalidRatio(ratio));
        }
    }
    let mut physical = true;
    for &x in grid {
        let p = at(control, base, x);
        formula_domain(&p)?;
        physical &= p.t2 <= 2.0 * p.t1;
    }
    let response_vals: Vec<f64> = grid.iter().map(|&x| response(control, base, x)).collect();
    let extremum = locate(control, base, grid, &response_vals);
    Ok(SweepResult {
        control,
        base: *base,
        grid: grid.to_vec(),
        response: response_vals,
        extremum,
        physical,
    })
}

fn resonant_base(omega1: f64, t1: f64, t2: f64, s_eq: f64) -> SystemParams {
    SystemParams {
        omega0: 0.0,
        omega1,
        omega_drive: 0.0,
        t1,
        t2,
        s_eq,
    }
}

/// Response vs common relaxation time T₁ = T₂ = T₁₂ at fixed drive.
pub fn sweep_t12(omega1: f64, s_eq: f64, grid: &[f64]) -> Result<SweepResult, AnalysisError> {
    sweep_t12_ratio(omega1, s_eq, 1.0, grid)
}

/// Response vs T₂ under the constraint T₁ = k·T₂.
pub fn sweep_t12_ratio(omega1: f64, s_eq: f64, ratio: f64, grid: &[f64]) -> Result<SweepResult, AnalysisError> {
    sweep(Control::T12 { ratio }, &resonant_base(omega1, 1.0, 1.0, s_eq), grid)
}

/// Response vs drive amplitude ω₁ at fixed T₁, T₂.
pub fn sweep_omega1(t1: f64, t2: f64, s_eq: f64, grid: &[f64]) -> Result<SweepResult, AnalysisError> {
    sweep(Control::Omega1, &resonant_base(0.0, t1, t2, s_eq), grid)
}

pub fn sweep_t1(omega1: f64, t2: f64, s_eq: f64, grid: &[f64]) -> Result<SweepResult, AnalysisError> {
    sweep(Control::T1, &resonant_base(omega1, 1.0, t2, s_eq), grid)
}

pub fn sweep_t2(omega1: f64, t1: f64, s_eq: f64, grid: &[f64]) -> Result<SweepResult, AnalysisError> {
    sweep(Control::T2, &resonant_base(omega1, t1, 1.0, s_eq), grid)
}

/// Response vs detuning Δ = ω₀ − Ω (rad/s) from the full steady state.
pub fn sweep_detuning(p: &SystemParams, grid: &[f64]) -> Result<SweepResult, AnalysisError> {
    sweep(Control::Detuning, p, grid)
}

/// Same grid through the time-domain path: each point is integrated in
/// the rotating frame until stationary. Points run in parallel; output
/// order follows the grid.
pub fn sweep_numeric(
    control: Control,
    base: &SystemParams,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<SweepResult, AnalysisError> {
    let analytic = sweep(control, base, grid)?;
    let response_vals = grid
        .par_iter()
        .map(|&x| {
            let p = at(control, base, x);
            match control {
                Control::Detuning => {
                    crate::steady_state::steady_state_numeric(&p, x, cfg, crate::dynamics::STEADY_EPS).map(|s| s.eta)
                }
                _ => eta_numeric(&p, cfg).map(f64::abs),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult {
        response: response_vals,
        ..analytic
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrPeak {
    /// T₁₂* = 1/ω₁ (s).
    pub t12_star: f64,
    /// η* = s_eq/2.
    pub eta_star: f64,
}

/// Closed-form SR peak for T₁ = T₂.
pub fn find_sr_peak(omega1: f64, s_eq: f64) -> Result<SrPeak, AnalysisError> {
    if !(omega1 > 0.0) {
        return Err(AnalysisError::ZeroDrive);
    }
    Ok(SrPeak {
        t12_star: 1.0 / omega1,
        eta_star: 0.5 * s_eq.abs(),
    })
}

/// Peak of the constrained sweep T₁ = k·T₂: T₂* = 1/(ω₁√k),
/// η* = s_eq/(2√k).
pub fn find_sr_peak_ratio(omega1: f64, s_eq: f64, ratio: f64) -> Result<SrPeak, AnalysisError> {
    if !(ratio >= 0.5) {
        return Err(AnalysisError::InvalidRatio(ratio));
    }
    let peak = find_sr_peak(omega1, s_eq)?;
    let sk = ratio.sqrt();
    Ok(SrPeak {
        t12_star: peak.t12_star / sk,
        eta_star: peak.eta_star / sk,
    })
}

/// Optimal drive ω₁* = (T₁T₂)^{-1/2}.
pub fn optimal_omega1(t1: f64, t2: f64) -> f64 {
    1.0 / (t1 * t2).sqrt()
}

/// Response at the optimal drive, s_eq·√(T₂/T₁)/2.
pub fn optimal_response(t1: f64, t2: f64, s_eq: f64) -> f64 {
    0.5 * s_eq.abs() * (t2 / t1).sqrt()
}

/// First-order (linear-response) amplitude s_eq·ω₁·T₂, which is
/// s_eq·ω₁·T₁₂ for a single relaxation time.
pub fn linear_response_eta(p: &SystemParams) -> f64 {
    p.s_eq * p.omega1 * p.t2
}

/// Which relaxation time is held fixed in [`monotonicity_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixedAxis {
    /// T₁ fixed at the given value, T₂ swept.
    T1(f64),
    /// T₂ fixed at the given value, T₁ swept.
    T2(f64),
    /// T₁ = T₂ swept together.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
    /// Neither; the successive differences change sign.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    pub is_monotonic: bool,
    pub direction: Direction,
    /// Number of sign changes from rising to falling.
    pub interior_maxima: usize,
}

/// Sign pattern of successive differences of η along a relaxation axis.
pub fn monotonicity_report(
    omega1: f64,
    s_eq: f64,
    axis: FixedAxis,
    grid: &[f64],
) -> Result<MonotonicityReport, AnalysisError> {
    let result = match axis {
        FixedAxis::T1(t1) => sweep_t2(omega1, t1, s_eq, grid)?,
        FixedAxis::T2(t2) => sweep_t1(omega1, t2, s_eq, grid)?,
        FixedAxis::Joint => sweep_t12(omega1, s_eq, grid)?,
    };
    Ok(classify(&result.response))
}

/// Classifies a sampled curve by its successive differences.
pub fn classify(values: &[f64]) -> MonotonicityReport {
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let up = diffs.iter().all(|&d| d > MONOTONIC_TOL);
    let down = diffs.iter().all(|&d| d < -MONOTONIC_TOL);
    let mut interior_maxima = 0;
    let mut rising = None;
    for &d in &diffs {
        if d.abs() <= MONOTONIC_TOL {
            continue;
        }
        let now = d > 0.0;
        if rising == Some(true) && !now {
            interior_maxima += 1;
        }
        rising = Some(now);
    }
    let direction = if up {
        Direction::Increasing
    } else if down {
        Direction::Decreasing
    } else {
        Direction::Mixed
    };
    MonotonicityReport {
        is_monotonic: up || down,
        direction,
        interior_maxima,
    }
}

/// `n` points from `lo` to `hi` inclusive, linear spacing.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
            v[n - 1] = hi;
            v
        }
    }
}

/// `n` points from `lo` to `hi` inclusive, logarithmic spacing.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect();
    if let Some(first) = v.first_mut() {
        *first = lo;
    }
    if let Some(last) = v.last_mut() {
        *last = hi;
    }
    v
}
