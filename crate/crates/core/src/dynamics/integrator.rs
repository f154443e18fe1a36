//! Explicit Runge-Kutta integration: fixed-step classical RK4 and the
//! embedded Dormand-Prince 5(4) pair with cubic Hermite dense output.

use num_complex::Complex64;
use thiserror::Error;

use crate::state::{BlochState, DensityMatrix, RotatingState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid time span or sample times: {0}")]
    InvalidSpan(String),
    #[error("step size {step:e} fell below the underflow limit at t = {t}")]
    StepSizeUnderflow { t: f64, step: f64 },
    #[error("exceeded {0} integration steps")]
    MaxStepsExceeded(usize),
    #[error("state became non-finite at t = {0}")]
    NonFinite(f64),
}

/// A state that can be advanced by a Runge-Kutta scheme.
pub trait OdeState: Copy {
    const DIM: usize;
    fn component(&self, i: usize) -> f64;
    /// `self + a·x`.
    fn axpy(&self, a: f64, x: &Self) -> Self;
}

impl<const N: usize> OdeState for [f64; N] {
    const DIM: usize = N;
    fn component(&self, i: usize) -> f64 {
        self[i]
    }
    fn axpy(&self, a: f64, x: &Self) -> Self {
        let mut out = *self;
        for (o, xi) in out.iter_mut().zip(x) {
            *o += a * xi;
        }
        out
    }
}

impl OdeState for BlochState {
    const DIM: usize = 3;
    fn component(&self, i: usize) -> f64 {
        [self.s1, self.s2, self.s3][i]
    }
    fn axpy(&self, a: f64, x: &Self) -> Self {
        BlochState::new(self.s1 + a * x.s1, self.s2 + a * x.s2, self.s3 + a * x.s3)
    }
}

impl OdeState for RotatingState {
    const DIM: usize = 3;
    fn component(&self, i: usize) -> f64 {
        [self.u, self.v, self.w][i]
    }
    fn axpy(&self, a: f64, x: &Self) -> Self {
        RotatingState::new(self.u + a * x.u, self.v + a * x.v, self.w + a * x.w)
    }
}

impl OdeState for DensityMatrix {
    const DIM: usize = 8;
    fn component(&self, i: usize) -> f64 {
        let z = self.m[i / 4][(i / 2) % 2];
        if i.is_multiple_of(2) {
            z.re
        } else {
            z.im
        }
    }
    fn axpy(&self, a: f64, x: &Self) -> Self {
        let mut m = self.m;
        for (row, xrow) in m.iter_mut().zip(&x.m) {
            for (e, xe) in row.iter_mut().zip(xrow) {
                *e += Complex64::new(a, 0.0) * xe;
            }
        }
        DensityMatrix::from_entries(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with constant step `max_step`.
    Rk4,
    /// Dormand-Prince 5(4) with local error control.
    Dopri5,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub atol: f64,
    pub rtol: f64,
    pub max_step: f64,
    /// `None` lets the adaptive method pick its own first step.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Dopri5,
            atol: 1e-10,
            rtol: 1e-10,
            max_step: f64::INFINITY,
            initial_step: None,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn adaptive(tol: f64) -> Self {
        IntegratorConfig {
            atol: tol,
            rtol: tol,
            ..Default::default()
        }
    }

    pub fn fixed_step(step: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            max_step: step,
            ..Default::default()
        }
    }

    pub fn with_max_step(self, max_step: f64) -> Self {
        IntegratorConfig { max_step, ..self }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        if !(self.atol > 0.0 && self.rtol > 0.0) {
            return Err(IntegrateError::InvalidConfig(format!(
                "tolerances must be positive (atol = {}, rtol = {})",
                self.atol, self.rtol
            )));
        }
        if !(self.max_step > 0.0) {
            return Err(IntegrateError::InvalidConfig(format!(
                "max_step must be positive, got {}",
                self.max_step
            )));
        }
        if self.method == Method::Rk4 && !self.max_step.is_finite() {
            return Err(IntegrateError::InvalidConfig(
                "fixed-step RK4 needs a finite max_step".into(),
            ));
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0) {
                return Err(IntegrateError::InvalidConfig(format!(
                    "initial_step must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub final_step: f64,
}

/// Time-stamped states with integrator metadata. Times are strictly
/// increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub stats: IntegratorStats,
}

impl<S: Copy> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, S)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> + '_ {
        self.times.iter().copied().zip(self.states.iter())
    }

    /// Applies `f(t, state)` to every sample, keeping times and stats.
    pub fn map<T>(&self, mut f: impl FnMut(f64, &S) -> T) -> Trajectory<T> {
        Trajectory {
            times: self.times.clone(),
            states: self.iter().map(|(t, s)| f(t, s)).collect(),
            stats: self.stats,
        }
    }
}

/// Cubic Hermite interpolant on [t0, t0 + h].
fn hermite<S: OdeState>(y0: &S, f0: &S, y1: &S, f1: &S, h: f64, theta: f64) -> S {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let mut out = y0.axpy(h00 - 1.0, y0);
    out = out.axpy(h * h10, f0);
    out = out.axpy(h01, y1);
    out.axpy(h * h11, f1)
}

fn is_finite<S: OdeState>(y: &S) -> bool {
    (0..S::DIM).all(|i| y.component(i).is_finite())
}

fn rms<S: OdeState>(y: &S, scale: impl Fn(usize) -> f64) -> f64 {
    let sum: f64 = (0..S::DIM)
        .map(|i| {
            let x = y.component(i) / scale(i);
            x * x
        })
        .sum();
    (sum / S::DIM as f64).sqrt()
}

/// Collects output samples as steps are accepted.
struct Recorder<'a, S> {
    t_eval: &'a [f64],
    next: usize,
    times: Vec<f64>,
    states: Vec<S>,
}

impl<'a, S: OdeState> Recorder<'a, S> {
    fn new(t_eval: &'a [f64], t0: f64, y0: S) -> Self {
        let mut rec = Recorder {
            t_eval,
            next: 0,
            times: Vec::with_capacity(t_eval.len().max(16)),
            states: Vec::with_capacity(t_eval.len().max(16)),
        };
        if t_eval.is_empty() {
            rec.times.push(t0);
            rec.states.push(y0);
        } else {
            while rec.next < t_eval.len() && t_eval[rec.next] == t0 {
                rec.times.push(t0);
                rec.states.push(y0);
                rec.next += 1;
            }
        }
        rec
    }

    /// True when a requested sample falls strictly inside (.., t1).
    fn wants_interior(&self, t1: f64) -> bool {
        self.next < self.t_eval.len() && self.t_eval[self.next] < t1
    }

    /// Records the step ending at `t1`; `interp(theta)` evaluates the dense
    /// output at t0 + theta·(t1 − t0).
    fn step(&mut self, t0: f64, t1: f64, y1: &S, interp: impl Fn(f64) -> S) {
        if self.t_eval.is_empty() {
            self.times.push(t1);
            self.states.push(*y1);
            return;
        }
        let h = t1 - t0;
        while self.next < self.t_eval.len() && self.t_eval[self.next] <= t1 {
            let te = self.t_eval[self.next];
            let y = if te == t1 { *y1 } else { interp((te - t0) / h) };
            self.times.push(te);
            self.states.push(y);
            self.next += 1;
        }
    }
}

/// Integrates `dy/dt = rhs(t, y)` over `t_span` (forward in time).
///
/// With an empty `t_eval` every accepted step is recorded (including the
/// initial point); otherwise the trajectory holds exactly the requested
/// times, which must be strictly increasing and inside the span.
pub fn integrate<S, F>(
    rhs: F,
    y0: S,
    t_span: (f64, f64),
    t_eval: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<S>, IntegrateError>
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
{
    cfg.validate()?;
    let (t0, t_end) = t_span;
    if !(t0.is_finite() && t_end.is_finite() && t_end >= t0) {
        return Err(IntegrateError::InvalidSpan(format!("[{t0}, {t_end}]")));
    }
    if !is_finite(&y0) {
        return Err(IntegrateError::NonFinite(t0));
    }
    if t_eval.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(IntegrateError::InvalidSpan(
            "sample times not strictly increasing".into(),
        ));
    }
    if let (Some(&first), Some(&last)) = (t_eval.first(), t_eval.last()) {
        if first < t0 || last > t_end {
            return Err(IntegrateError::InvalidSpan(format!(
                "sample times [{first}, {last}] outside span [{t0}, {t_end}]"
            )));
        }
    }
    match cfg.method {
        Method::Rk4 => rk4(rhs, y0, t0, t_end, t_eval, cfg),
        Method::Dopri5 => dopri5(rhs, y0, t0, t_end, t_eval, cfg),
    }
}

fn rk4<S, F>(
    rhs: F,
    y0: S,
    t0: f64,
    t_end: f64,
    t_eval: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<S>, IntegrateError>
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
{
    let span = t_end - t0;
    let n_steps = (span / cfg.max_step).ceil().max(if span > 0.0 { 1.0 } else { 0.0 }) as usize;
    if n_steps > cfg.max_steps {
        return Err(IntegrateError::MaxStepsExceeded(cfg.max_steps));
    }
    let h = if n_steps > 0 { span / n_steps as f64 } else { 0.0 };
    let mut rec = Recorder::new(t_eval, t0, y0);
    let mut stats = IntegratorStats::default();
    let mut y = y0;
    let mut f = rhs(t0, &y);
    stats.rhs_evals += 1;
    for i in 0..n_steps {
        let t = t0 + i as f64 * h;
        let k1 = f;
        let k2 = rhs(t + 0.5 * h, &y.axpy(0.5 * h, &k1));
        let k3 = rhs(t + 0.5 * h, &y.axpy(0.5 * h, &k2));
        let k4 = rhs(t + h, &y.axpy(h, &k3));
        let y_new = y
            .axpy(h / 6.0, &k1)
            .axpy(h / 3.0, &k2)
            .axpy(h / 3.0, &k3)
            .axpy(h / 6.0, &k4);
        let t_new = if i + 1 == n_steps {
            t_end
        } else {
            t0 + (i + 1) as f64 * h
        };
        if !is_finite(&y_new) {
            return Err(IntegrateError::NonFinite(t_new));
        }
        let f_new = rhs(t_new, &y_new);
        stats.rhs_evals += 4;
        rec.step(t, t_new, &y_new, |theta| hermite(&y, &f, &y_new, &f_new, h, theta));
        y = y_new;
        f = f_new;
        stats.steps += 1;
    }
    stats.final_step = h;
    Ok(Trajectory {
        times: rec.times,
        states: rec.states,
        stats,
    })
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Coefficients of the fourth-order continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Dormand-Prince dense output on one accepted step, accurate to the order
/// of the step itself rather than the cubic Hermite bound.
struct DenseOutput<S> {
    r: [S; 5],
}

impl<S: OdeState> DenseOutput<S> {
    fn new(y0: &S, y1: &S, h: f64, k: [&S; 6]) -> Self {
        let [k1, k3, k4, k5, k6, k7] = k;
        let dy = y1.axpy(-1.0, y0);
        let bspl = k1.axpy(h - 1.0, k1).axpy(-1.0, &dy);
        let r4 = dy.axpy(-h, k7).axpy(-1.0, &bspl);
        let r5 = k1
            .axpy(h * D1 - 1.0, k1)
            .axpy(h * D3, k3)
            .axpy(h * D4, k4)
            .axpy(h * D5, k5)
            .axpy(h * D6, k6)
            .axpy(h * D7, k7);
        DenseOutput {
            r: [*y0, dy, bspl, r4, r5],
        }
    }

    fn eval(&self, theta: f64) -> S {
        let s1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.r;
        let inner = r4.axpy(s1, r5);
        let inner = r3.axpy(theta, &inner);
        let inner = r2.axpy(s1, &inner);
        r1.axpy(theta, &inner)
    }
}

fn initial_step<S, F>(rhs: &F, t0: f64, y0: &S, f0: &S, cfg: &IntegratorConfig) -> f64
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
{
    let scale = |i: usize| cfg.atol + cfg.rtol * y0.component(i).abs();
    let d0 = rms(y0, scale);
    let d1 = rms(f0, scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = y0.axpy(h0, f0);
    let f1 = rhs(t0 + h0, &y1);
    let d2 = rms(&f1.axpy(-1.0, f0), scale) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

fn dopri5<S, F>(
    rhs: F,
    y0: S,
    t0: f64,
    t_end: f64,
    t_eval: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<S>, IntegrateError>
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
{
    let span = t_end - t0;
    let mut rec = Recorder::new(t_eval, t0, y0);
    let mut stats = IntegratorStats::default();
    if span == 0.0 {
        return Ok(Trajectory {
            times: rec.times,
            states: rec.states,
            stats,
        });
    }
    let h_min = 1e-15 * span;
    let mut t = t0;
    let mut y = y0;
    let mut f = rhs(t, &y);
    stats.rhs_evals += 1;
    let mut h = match cfg.initial_step {
        Some(h) => h,
        None => {
            stats.rhs_evals += 1;
            initial_step(&rhs, t, &y, &f, cfg)
        }
    }
    .min(cfg.max_step)
    .min(span);

    while t < t_end {
        if stats.steps + stats.rejected >= cfg.max_steps {
            return Err(IntegrateError::MaxStepsExceeded(cfg.max_steps));
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let k1 = f;
        let k2 = rhs(t + C2 * h, &y.axpy(h * A21, &k1));
        let k3 = rhs(t + C3 * h, &y.axpy(h * A31, &k1).axpy(h * A32, &k2));
        let k4 = rhs(t + C4 * h, &y.axpy(h * A41, &k1).axpy(h * A42, &k2).axpy(h * A43, &k3));
        let k5 = rhs(
            t + C5 * h,
            &y.axpy(h * A51, &k1)
                .axpy(h * A52, &k2)
                .axpy(h * A53, &k3)
                .axpy(h * A54, &k4),
        );
        let k6 = rhs(
            t + h,
            &y.axpy(h * A61, &k1)
                .axpy(h * A62, &k2)
                .axpy(h * A63, &k3)
                .axpy(h * A64, &k4)
                .axpy(h * A65, &k5),
        );
        let y_new = y
            .axpy(h * B1, &k1)
            .axpy(h * B3, &k3)
            .axpy(h * B4, &k4)
            .axpy(h * B5, &k5)
            .axpy(h * B6, &k6);
        let t_new = if last { t_end } else { t + h };
        let k7 = rhs(t_new, &y_new);
        stats.rhs_evals += 6;

        let err_vec = k1
            .axpy(-1.0, &k1)
            .axpy(h * E1, &k1)
            .axpy(h * E3, &k3)
            .axpy(h * E4, &k4)
            .axpy(h * E5, &k5)
            .axpy(h * E6, &k6)
            .axpy(h * E7, &k7);
        let err = rms(&err_vec, |i| {
            cfg.atol + cfg.rtol * y.component(i).abs().max(y_new.component(i).abs())
        });

        if !err.is_finite() {
            // Treat overflow as a rejected step.
            stats.rejected += 1;
            h *= 0.2;
        } else if err <= 1.0 {
            if !is_finite(&y_new) {
                return Err(IntegrateError::NonFinite(t_new));
            }
            if rec.wants_interior(t_new) {
                let dense = DenseOutput::new(&y, &y_new, h, [&k1, &k3, &k4, &k5, &k6, &k7]);
                rec.step(t, t_new, &y_new, |theta| dense.eval(theta));
            } else {
                rec.step(t, t_new, &y_new, |_| y_new);
            }
            t = t_new;
            y = y_new;
            f = k7;
            stats.steps += 1;
            stats.final_step = h;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(cfg.max_step);
            continue;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
        if h < h_min {
            return Err(IntegrateError::StepSizeUnderflow { t, step: h });
        }
    }

    Ok(Trajectory {
        times: rec.times,
        states: rec.states,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(rate: f64) -> impl Fn(f64, &[f64; 1]) -> [f64; 1] {
        move |_, y| [-rate * y[0]]
    }

    #[test]
    fn zero_rhs_is_constant() {
        let y0 = [0.3, -0.2, 0.9];
        for cfg in [IntegratorConfig::default(), IntegratorConfig::fixed_step(0.1)] {
            let tr = integrate(|_, _: &[f64; 3]| [0.0; 3], y0, (0.0, 2.0), &[], &cfg).unwrap();
            assert!(tr.states.iter().all(|s| *s == y0));
            assert_eq!(*tr.times.last().unwrap(), 2.0);
        }
    }

    #[test]
    fn samples_exactly_at_requested_times() {
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let tr = integrate(
            decay(1.0),
            [1.0],
            (0.0, 1.0),
            &times,
            &IntegratorConfig::adaptive(1e-12),
        )
        .unwrap();
        assert_eq!(tr.times, times);
        for (t, y) in tr.iter() {
            assert!((y[0] - (-t).exp()).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn rk4_fourth_order() {
        let err = |h: f64| {
            let tr = integrate(decay(1.0), [1.0], (0.0, 1.0), &[1.0], &IntegratorConfig::fixed_step(h)).unwrap();
            (tr.states[0][0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio.log2() - 4.0).abs() < 0.2, "observed order {}", ratio.log2());
    }

    #[test]
    fn stiff_decay_underflows_or_exhausts_steps() {
        let cfg = IntegratorConfig {
            max_steps: 50,
            ..IntegratorConfig::adaptive(1e-12)
        };
        let err = integrate(decay(1e6), [1.0], (0.0, 1.0), &[], &cfg).unwrap_err();
        assert!(matches!(err, IntegrateError::MaxStepsExceeded(50)));
    }

    #[test]
    fn step_underflow_detected() {
        // Finite-time blow-up at t = 1 forces ever smaller steps.
        let cfg = IntegratorConfig::adaptive(1e-12);
        let err = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], [1.0], (0.0, 2.0), &[], &cfg).unwrap_err();
        assert!(
            matches!(
                err,
                IntegrateError::StepSizeUnderflow { .. } | IntegrateError::NonFinite(_)
            ),
            "{err:?}"
        );
    }

    #[test]
    fn config_validation() {
        let bad = IntegratorConfig {
            atol: 0.0,
            ..Default::default()
        };
        assert!(integrate(decay(1.0), [1.0], (0.0, 1.0), &[], &bad).is_err());
        let bad = IntegratorConfig {
            method: Method::Rk4,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(integrate(decay(1.0), [1.0], (1.0, 0.0), &[], &IntegratorConfig::default()).is_err());
        assert!(integrate(decay(1.0), [1.0], (0.0, 1.0), &[0.5, 0.5], &IntegratorConfig::default()).is_err());
        assert!(integrate(decay(1.0), [1.0], (0.0, 1.0), &[2.0], &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn hermite_reproduces_cubics() {
        // y = t³ on [1, 2]; y' = 3t².
        let (y0, f0, y1, f1) = ([1.0], [3.0], [8.0], [12.0]);
        for theta in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let t: f64 = 1.0 + theta;
            let y = hermite(&y0, &f0, &y1, &f1, 1.0, theta);
            assert!((y[0] - t.powi(3)).abs() < 1e-14);
        }
    }
}
