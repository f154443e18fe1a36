//! Relaxation-time estimators for simulated acquisitions.

use thiserror::Error;

use super::AcquisitionRecord;

const MAX_ITERATIONS: usize = 500;
const STEP_RTOL: f64 = 1e-13;
const MAX_DAMPING: f64 = 1e16;
/// Delays must reach down to this fraction of the fitted T₁ ...
pub const SPAN_LOW: f64 = 0.2;
/// ... and up to this multiple of it.
pub const SPAN_HIGH: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("fit did not converge: {0}")]
    FitDiverged(String),
    #[error("data do not constrain the fit: {0}")]
    InsufficientSpan(String),
    #[error("echo amplitude {value} at index {index} is not positive")]
    NonPositiveAmplitude { index: usize, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T1Fit {
    pub t1_hat: f64,
    pub m0_hat: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T2Fit {
    pub t2_hat: f64,
    pub amplitude_hat: f64,
    pub residual_norm: f64,
}

fn check_lengths(rec: &AcquisitionRecord, min: usize) -> Result<(), FitError> {
    if rec.times.len() != rec.values.len() {
        return Err(FitError::InsufficientSpan(format!(
            "{} times but {} values",
            rec.times.len(),
            rec.values.len()
        )));
    }
    if rec.times.len() < min {
        return Err(FitError::InsufficientSpan(format!(
            "need at least {min} samples, got {}",
            rec.times.len()
        )));
    }
    if rec.times.iter().chain(&rec.values).any(|x| !x.is_finite()) {
        return Err(FitError::FitDiverged("non-finite input".into()));
    }
    Ok(())
}

fn ir_model(m0: f64, t1: f64, tau: f64) -> (f64, f64, f64) {
    let e = (-tau / t1).exp();
    let y = m0 * (1.0 - 2.0 * e);
    (y, 1.0 - 2.0 * e, -2.0 * m0 * e * tau / (t1 * t1))
}

fn ir_cost(rec: &AcquisitionRecord, m0: f64, t1: f64) -> f64 {
    rec.times
        .iter()
        .zip(&rec.values)
        .map(|(&tau, &y)| (y - ir_model(m0, t1, tau).0).powi(2))
        .sum()
}

/// Initial guess: M₀ from the longest delay, T₁ from the zero crossing
/// τ₀ = T₁ ln 2 (or the median delay when the data never cross zero).
fn ir_guess(rec: &AcquisitionRecord) -> (f64, f64) {
    let mut idx: Vec<usize> = (0..rec.times.len()).collect();
    idx.sort_by(|&a, &b| rec.times[a].total_cmp(&rec.times[b]));
    let m0 = rec.values[*idx.last().unwrap()];
    let t_med = rec.times[idx[idx.len() / 2]].max(f64::MIN_POSITIVE);
    let mut t1 = t_med / std::f64::consts::LN_2;
    for w in idx.windows(2) {
        let (ya, yb) = (rec.values[w[0]] * m0.signum(), rec.values[w[1]] * m0.signum());
        if ya <= 0.0 && yb > 0.0 {
            let (ta, tb) = (rec.times[w[0]], rec.times[w[1]]);
            let t0 = ta + (tb - ta) * (-ya) / (yb - ya);
            if t0 > 0.0 {
                t1 = t0 / std::f64::consts::LN_2;
            }
            break;
        }
    }
    (m0, t1)
}

/// Fits M(τ) = M₀(1 − 2e^{−τ/T₁}) by damped Gauss-Newton
/// (Levenberg-Marquardt with Marquardt diagonal scaling).
pub fn fit_t1(rec: &AcquisitionRecord) -> Result<T1Fit, FitError> {
    check_lengths(rec, 4)?;
    let scale = rec.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let (lo, hi) = rec
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if scale == 0.0 || hi - lo <= 1e-12 * scale {
        return Err(FitError::InsufficientSpan("data are constant".into()));
    }

    let (mut m0, mut t1) = ir_guess(rec);
    let mut cost = ir_cost(rec, m0, t1);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Normal equations for the 2 × 2 problem.
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&tau, &y) in rec.times.iter().zip(&rec.values) {
            let (f, j1, j2) = ir_model(m0, t1, tau);
            let r = y - f;
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            g1 += j1 * r;
            g2 += j2 * r;
        }
        let mut accepted = false;
        while lambda < MAX_DAMPING {
            let (b11, b22) = (a11 * (1.0 + lambda), a22 * (1.0 + lambda));
            let det = b11 * b22 - a12 * a12;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let d1 = (g1 * b22 - g2 * a12) / det;
            let d2 = (b11 * g2 - a12 * g1) / det;
            let (m_new, t_new) = (m0 + d1, t1 + d2);
            if t_new > 0.0 && t_new.is_finite() {
                let c = ir_cost(rec, m_new, t_new);
                if c <= cost {
                    let small =
                        d1.abs() <= STEP_RTOL * m_new.abs().max(f64::MIN_POSITIVE) && d2.abs() <= STEP_RTOL * t_new;
                    m0 = m_new;
                    t1 = t_new;
                    let flat = cost - c <= 1e-15 * cost;
                    cost = c;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    converged = small || (flat && lambda <= 1e-6) || cost == 0.0;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: the current point is a minimum
            // to working precision, unless the gradient is still large.
            let gnorm = (g1 * g1 + g2 * g2).sqrt();
            converged = gnorm <= 1e-8 * (a11 + a22).sqrt() * scale;
            break;
        }
        if converged {
            break;
        }
    }

    if !converged || !t1.is_finite() || !m0.is_finite() {
        return Err(FitError::FitDiverged(format!(
            "no convergence after {iterations} iterations (T1 = {t1}, M0 = {m0})"
        )));
    }
    let tmin = rec.times.iter().cloned().fold(f64::INFINITY, f64::min);
    let tmax = rec.times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if tmin > SPAN_LOW * t1 || tmax < SPAN_HIGH * t1 {
        return Err(FitError::InsufficientSpan(format!(
            "delays [{tmin}, {tmax}] s do not cover [{SPAN_LOW}, {SPAN_HIGH}]·T1 with T1 = {t1} s"
        )));
    }
    Ok(T1Fit {
        t1_hat: t1,
        m0_hat: m0,
        residual_norm: cost.sqrt(),
        iterations,
    })
}

/// Fits A·e^{−t/T₂} to echo maxima by least squares on ln A − t/T₂,
/// weighting each point by y² to undo the log's noise amplification.
pub fn fit_t2(rec: &AcquisitionRecord) -> Result<T2Fit, FitError> {
    check_lengths(rec, 3)?;
    if let Some((index, &value)) = rec.values.iter().enumerate().find(|(_, &v)| v <= 0.0) {
        return Err(FitError::NonPositiveAmplitude { index, value });
    }
    let (mut sw, mut st, mut sl, mut stt, mut stl) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &y) in rec.times.iter().zip(&rec.values) {
        let w = y * y;
        let l = y.ln();
        sw += w;
        st += w * t;
        sl += w * l;
        stt += w * t * t;
        stl += w * t * l;
    }
    let det = sw * stt - st * st;
    if !(det > 1e-14 * sw * stt) {
        return Err(FitError::InsufficientSpan("echo times do not span an interval".into()));
    }
    let slope = (sw * stl - st * sl) / det;
    let intercept = (sl - slope * st) / sw;
    if !(slope < 0.0) {
        return Err(FitError::FitDiverged(format!("echoes do not decay (slope {slope})")));
    }
    let t2 = -1.0 / slope;
    let a = intercept.exp();
    let residual_norm = rec
        .times
        .iter()
        .zip(&rec.values)
        .map(|(&t, &y)| (y - a * (-t / t2).exp()).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(T2Fit {
        t2_hat: t2,
        amplitude_hat: a,
        residual_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::pulse_sim::{carr_purcell, inversion_recovery, log_delays, IsochromatEnsemble, Observable};

    fn ir(t1: f64, s_eq: f64, delays: &[f64]) -> AcquisitionRecord {
        let p = SystemParams::resonant(1e4, 0.0, t1, t1, s_eq).unwrap();
        inversion_recovery(&p, delays).unwrap()
    }

    #[test]
    fn t1_noiseless_round_trip() {
        let rec = ir(36.5e-3, 1.0, &log_delays(1e-3, 0.2, 12));
        let fit = fit_t1(&rec).unwrap();
        assert!((fit.t1_hat * 1e3 - 36.5).abs() < 0.04, "{fit:?}");
        assert!((fit.t1_hat / 36.5e-3 - 1.0).abs() < 1e-9);
        assert!((fit.m0_hat - 1.0).abs() < 1e-9);
        assert!(fit.residual_norm < 1e-9);
    }

    #[test]
    fn t1_with_noise_statistics() {
        let t1 = 36.5e-3;
        let clean = ir(t1, 1.0, &log_delays(1e-3, 0.2, 12));
        let fits: Vec<f64> = (0..100)
            .map(|seed| fit_t1(&clean.clone().with_noise(seed, 0.01)).unwrap().t1_hat)
            .collect();
        let mean = fits.iter().sum::<f64>() / fits.len() as f64;
        assert!((mean / t1 - 1.0).abs() < 0.01, "mean {mean}");
        let within = fits.iter().filter(|&&f| (f / t1 - 1.0).abs() < 0.03).count();
        assert!(within >= 95, "only {within} fits within 3%");
    }

    #[test]
    fn t1_degenerate_inputs() {
        let flat = AcquisitionRecord::new(Observable::Longitudinal, vec![0.01, 0.02, 0.03, 0.04], vec![0.5; 4]);
        assert!(matches!(
            fit_t1(&flat),
            Err(FitError::InsufficientSpan(_) | FitError::FitDiverged(_))
        ));
        let few = ir(0.03, 1.0, &[0.01, 0.02, 0.05]);
        assert!(matches!(fit_t1(&few), Err(FitError::InsufficientSpan(_))));
        // All delays far below T1: only the initial slope is visible.
        let short = ir(1.0, 1.0, &log_delays(1e-3, 0.05, 10));
        assert!(fit_t1(&short).is_err());
    }

    #[test]
    fn t2_noiseless_round_trip() {
        let p = SystemParams::resonant(1e4, 0.0, 24.9e-3, 18.0e-3, 0.7).unwrap();
        let rec = carr_purcell(&p, &IsochromatEnsemble::gaussian(300.0, 21), 2e-3, 16).unwrap();
        let fit = fit_t2(&rec).unwrap();
        assert!((fit.t2_hat * 1e3 - 18.0).abs() < 0.02);
        assert!((fit.t2_hat / 18e-3 - 1.0).abs() < 1e-10);
        assert!((fit.amplitude_hat - 0.7).abs() < 1e-10);
    }

    #[test]
    fn t2_degenerate_inputs() {
        let one = AcquisitionRecord::new(Observable::Transverse, vec![0.01], vec![0.5]);
        assert!(matches!(fit_t2(&one), Err(FitError::InsufficientSpan(_))));
        let zero = AcquisitionRecord::new(Observable::Transverse, vec![0.01, 0.02, 0.03], vec![0.5, 0.0, 0.2]);
        assert_eq!(
            fit_t2(&zero),
            Err(FitError::NonPositiveAmplitude { index: 1, value: 0.0 })
        );
        let same = AcquisitionRecord::new(Observable::Transverse, vec![0.01; 3], vec![0.5, 0.4, 0.3]);
        assert!(matches!(fit_t2(&same), Err(FitError::InsufficientSpan(_))));
    }
}
