//! Acceptance suite. Prints one PASS/FAIL line per criterion; run with
//! `cargo test --test acceptance -- --nocapture` to see them.

use std::cell::RefCell;
use std::f64::consts::TAU;
use std::time::Instant;

use bloch_sr::dynamics::{simulate_bloch, simulate_lindblad, uniform_times, IntegratorConfig};
use bloch_sr::pulse_sim::{measure_relaxation, NoiseSpec, RelaxationProtocol};
use bloch_sr::relaxation::{generator_matrix, psd_check};
use bloch_sr::sr_analysis::{
    find_sr_peak, linear_response_eta, linspace, monotonicity_report, optimal_omega1, sweep_numeric, sweep_omega1,
    sweep_t12, Control, Direction, FixedAxis,
};
use bloch_sr::state::bloch_components;
use bloch_sr::steady_state::{eta_resonant, fundamental_amplitude, period_aligned_times};
use bloch_sr::{bloch_to_density, hz_to_rad, rad_to_hz, BlochState, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Worst conservation errors seen by any trajectory in the suite.
#[derive(Default)]
struct Conservation {
    trace: f64,
    hermiticity: f64,
    norm_excess: f64,
    trajectories: usize,
}

thread_local! {
    static CONSERVATION: RefCell<Conservation> = RefCell::new(Conservation::default());
}

fn record_bloch(states: &[BlochState], initial_norm: f64) {
    let bound = initial_norm.max(1.0);
    CONSERVATION.with(|c| {
        let mut c = c.borrow_mut();
        for s in states {
            c.norm_excess = c.norm_excess.max(s.norm() - bound);
        }
        c.trajectories += 1;
    });
}

fn record_density(states: &[bloch_sr::DensityMatrix]) {
    CONSERVATION.with(|c| {
        let mut c = c.borrow_mut();
        for rho in states {
            c.trace = c.trace.max((rho.trace() - 1.0).norm());
            c.hermiticity = c.hermiticity.max(rho.hermiticity_error());
            c.norm_excess = c.norm_excess.max(bloch_components(rho).norm() - 1.0);
        }
        c.trajectories += 1;
    });
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// Drive amplitudes of the fig1 experiment (Hz).
const FIG1_RABI_HZ: [f64; 3] = [6.3, 5.5, 4.8];
// The table1 samples: CuSO4 concentration (mM) and T12 (ms).
const TABLE1: [(f64, f64); 5] = [(40.0, 45.5), (50.0, 36.5), (60.0, 28.5), (75.0, 25.0), (100.0, 18.0)];

fn criterion_1() -> Outcome {
    let grid = linspace(5e-3, 80e-3, 1501);
    let mut notes = Vec::new();
    let mut ok = true;

    let start = Instant::now();
    for hz in FIG1_RABI_HZ {
        let w1 = hz_to_rad(hz);
        let r = sweep_t12(w1, 1.0, &grid).map_err(err)?;
        let peak = find_sr_peak(w1, 1.0).map_err(err)?;
        let loc_err = (w1 * r.extremum.location - 1.0).abs();
        let height_err = (r.extremum.value - 0.5).abs();
        ok &= loc_err < 1e-6 && height_err <= 1e-9 && (peak.t12_star * w1 - 1.0).abs() < 1e-6;
        notes.push(format!(
            "{hz} Hz: T* = {:.4} ms, |w1 T* - 1| = {loc_err:.1e}, |peak - 0.5| = {height_err:.1e}",
            r.extremum.location * 1e3
        ));
    }
    let t_analytic = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let sub: Vec<f64> = (0..20).map(|k| grid[k * (grid.len() - 1) / 19]).collect();
    let cfg = IntegratorConfig::adaptive(1e-10);
    let mut worst = 0.0f64;
    for hz in FIG1_RABI_HZ {
        let base = SystemParams::single_timescale(hz_to_rad(400e6), hz_to_rad(hz), 25e-3, 1.0).map_err(err)?;
        let numeric = sweep_numeric(Control::T12 { ratio: 1.0 }, &base, &sub, &cfg).map_err(err)?;
        for (&t, &eta) in sub.iter().zip(&numeric.response) {
            // Independent oracle: closed form written out here.
            let x = hz_to_rad(hz) * t;
            worst = worst.max((eta - x / (1.0 + x * x)).abs());
        }
    }
    let t_numeric = start.elapsed().as_secs_f64();
    ok &= worst < 1e-6 && t_analytic < 10.0 && t_numeric < 300.0;
    notes.push(format!("numeric 20-point subgrids: max |diff| = {worst:.1e}"));
    notes.push(format!("runtime {t_analytic:.3} s analytic, {t_numeric:.2} s numeric"));
    check(ok, notes.join("; "))
}

fn criterion_2() -> Outcome {
    // Expected peaks quoted to two decimals.
    let listed = [(18.0, 8.84), (28.5, 5.59), (45.5, 3.50)];
    let grid = linspace(hz_to_rad(0.1), hz_to_rad(20.0), 1991);
    let mut ok = true;
    let mut notes = Vec::new();
    for (t_ms, listed_hz) in listed {
        let t = t_ms * 1e-3;
        let r = sweep_omega1(t, t, 1.0, &grid).map_err(err)?;
        let found = rad_to_hz(r.extremum.location);
        let oracle = 1.0 / (TAU * t);
        let rel = (found / oracle - 1.0).abs();
        ok &= rel < 1e-3 && (rad_to_hz(optimal_omega1(t, t)) / oracle - 1.0).abs() < 1e-12;
        let vs_listed = (found / listed_hz - 1.0).abs();
        notes.push(format!(
            "{t_ms} ms: {found:.4} Hz (oracle {oracle:.4}, rel {rel:.1e}; listed {listed_hz:.2}, rel {vs_listed:.2e})"
        ));
    }
    notes.push("28.5 ms listed as 5.59 but 1/(2pi 28.5 ms) = 5.584 rounds to 5.58".into());
    check(ok, notes.join("; "))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = IntegratorConfig::adaptive(1e-10);
    let mut worst = 0.0f64;
    let mut worst_psd = f64::INFINITY;
    for _ in 0..50 {
        let t1 = rng.gen_range(5e-3..50e-3);
        let t2 = t1 * rng.gen_range(0.2..2.0);
        let p = SystemParams::resonant(
            hz_to_rad(rng.gen_range(5.0..50.0)),
            hz_to_rad(rng.gen_range(0.0..10.0)),
            t1,
            t2,
            rng.gen_range(-1.0..1.0),
        )
        .map_err(err)?
        .with_detuning(hz_to_rad(rng.gen_range(-2.0..2.0)));
        worst_psd = worst_psd.min(psd_check(&generator_matrix(&p), 1e-12).map_err(err)?.min_eigenvalue);

        // Random initial state inside the ball.
        let s0 = loop {
            let s = BlochState::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if s.norm() <= 1.0 {
                break s;
            }
        };
        let span = (0.0, 5.0 * t1);
        let times = uniform_times(span.0, span.1, 100);
        let b = simulate_bloch(&p, s0, span, &times, &cfg).map_err(err)?;
        let l = simulate_lindblad(&p, bloch_to_density(&s0), span, &times, &cfg).map_err(err)?;
        record_bloch(&b.states, s0.norm());
        record_density(&l.states);
        for (s, rho) in b.states.iter().zip(&l.states) {
            let r = bloch_components(rho);
            worst = worst
                .max((s.s1 - r.s1).abs())
                .max((s.s2 - r.s2).abs())
                .max((s.s3 - r.s3).abs());
        }
    }
    check(
        worst < 1e-8 && worst_psd >= 0.0,
        format!("50 random sets over 5 T1: max componentwise diff = {worst:.1e}; smallest relaxation eigenvalue {worst_psd:.3e}"),
    )
}

fn criterion_4() -> Outcome {
    CONSERVATION.with(|c| {
        let c = c.borrow();
        check(
            c.trajectories > 0 && c.trace < 1e-9 && c.hermiticity < 1e-9 && c.norm_excess <= 1e-9,
            format!(
                "{} trajectories: trace drift {:.1e}, Hermiticity drift {:.1e}, max |s| - bound = {:.1e}",
                c.trajectories, c.trace, c.hermiticity, c.norm_excess
            ),
        )
    })
}

fn criterion_5() -> Outcome {
    let p = SystemParams::single_timescale(hz_to_rad(10e3), hz_to_rad(6.3), 25e-3, 1.0).map_err(err)?;
    let s0 = BlochState::new(0.0, 0.0, 1.0);
    let times = period_aligned_times(20.0 * p.t1, p.omega_drive, 50, 64);
    let end = *times.last().unwrap();
    let tr = simulate_bloch(&p, s0, (0.0, end), &times, &IntegratorConfig::adaptive(1e-10)).map_err(err)?;
    record_bloch(&tr.states, 1.0);
    let lab = fundamental_amplitude(&tr, p.omega_drive).map_err(err)?;
    let x = p.omega1 * p.t1;
    let oracle = x / (1.0 + x * x);
    let rel = (lab / oracle - 1.0).abs();
    check(
        rel < 7e-3 && (eta_resonant(&p) - oracle).abs() < 1e-15,
        format!("lab fundamental {lab:.6} vs rotating-frame {oracle:.6}: rel {rel:.1e}"),
    )
}

fn criterion_6() -> Outcome {
    let proto = RelaxationProtocol::default();
    let mut ok = true;
    let (mut worst_clean, mut worst_noisy) = (0.0f64, 0.0f64);
    for (i, (_, t_ms)) in TABLE1.iter().enumerate() {
        let t = t_ms * 1e-3;
        // s_eq = 1, so sigma = 0.01 is 1% of the full signal either way.
        let p = SystemParams::single_timescale(0.0, hz_to_rad(5.5), t, 1.0).map_err(err)?;
        let clean = measure_relaxation(&p, &proto, None).map_err(err)?;
        let rel = (clean.t1.t1_hat / t - 1.0).abs().max((clean.t2.t2_hat / t - 1.0).abs());
        worst_clean = worst_clean.max(rel);
        let noisy = measure_relaxation(
            &p,
            &proto,
            Some(NoiseSpec {
                seed: 1 + 2 * i as u64,
                sigma: 0.01,
            }),
        )
        .map_err(err)?;
        let dev = (noisy.t1.t1_hat - t).abs().max((noisy.t2.t2_hat - t).abs());
        worst_noisy = worst_noisy.max(dev);
        ok &= rel < 1e-3 && dev <= 1e-3;
    }
    check(
        ok,
        format!(
            "5 samples: noiseless max rel {worst_clean:.1e}; 1% noise max |dev| = {:.3} ms",
            worst_noisy * 1e3
        ),
    )
}

fn criterion_7() -> Outcome {
    let t = 25e-3;
    let weak = SystemParams::single_timescale(hz_to_rad(400e6), 0.01 / t, t, 1.0).map_err(err)?;
    let (lin, exact) = (linear_response_eta(&weak), eta_resonant(&weak));
    // The exact relative gap is (w1 T)^2/(1 + (w1 T)^2) of the linear value,
    // and (w1 T)^2 = 1e-4 of the exact one: the latter sits on the boundary.
    let rel = (lin - exact).abs() / lin;
    let strong = weak.with_omega1(1.0 / t);
    let ratio = linear_response_eta(&strong) / eta_resonant(&strong);
    check(
        rel < 1e-4 && (ratio - 2.0).abs() <= 1e-9,
        format!(
            "w1 T = 0.01: rel gap {rel:.5e} of linear ({:.5e} of exact); w1 T = 1: ratio {ratio:.12}",
            (lin - exact).abs() / exact
        ),
    )
}

fn criterion_8() -> Outcome {
    let w1 = hz_to_rad(6.3);
    let grid = linspace(1e-3, 100e-3, 1000);
    let in_t2 = monotonicity_report(w1, 1.0, FixedAxis::T1(50e-3), &grid).map_err(err)?;
    let in_t1 = monotonicity_report(w1, 1.0, FixedAxis::T2(10e-3), &grid).map_err(err)?;
    let joint = monotonicity_report(w1, 1.0, FixedAxis::Joint, &grid).map_err(err)?;
    // Independent check of the joint curve's maximum position.
    let r = sweep_t12(w1, 1.0, &grid).map_err(err)?;
    let argmax = r
        .response
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    let nearest = (grid[argmax] - 1.0 / w1).abs() <= grid[1] - grid[0];
    check(
        in_t2.direction == Direction::Increasing
            && in_t1.direction == Direction::Decreasing
            && joint.direction == Direction::Mixed
            && joint.interior_maxima == 1
            && argmax > 0
            && argmax < grid.len() - 1
            && nearest,
        format!(
            "T2 sweep {:?}, T1 sweep {:?}, joint {:?} with {} interior max at {:.3} ms",
            in_t2.direction,
            in_t1.direction,
            joint.direction,
            joint.interior_maxima,
            grid[argmax] * 1e3
        ),
    )
}

#[test]
fn acceptance_criteria() {
    // Criterion 4 aggregates over the trajectories of 3 and 5, so it runs last.
    let order: [(usize, fn() -> Outcome); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (4, criterion_4),
    ];
    let mut results: Vec<(usize, Outcome)> = order.iter().map(|&(n, f)| (n, f())).collect();
    results.sort_by_key(|r| r.0);
    let mut failed = Vec::new();
    for (n, r) in &results {
        match r {
            Ok(d) => println!("criterion {n}: PASS  {d}"),
            Err(d) => {
                println!("criterion {n}: FAIL  {d}");
                failed.push(*n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn builtin_manifests_carry_the_reference_values() {
    let fig1 = bloch_sr::io::builtin_manifest("fig1").unwrap();
    let rabi: Vec<f64> = fig1.params.iter().map(|p| rad_to_hz(p.omega1)).collect();
    for (a, b) in rabi.iter().zip(FIG1_RABI_HZ) {
        assert!((a - b).abs() < 1e-12, "{rabi:?}");
    }
    assert_eq!(rabi.len(), 3);

    let table = bloch_sr::io::builtin_manifest("table1").unwrap();
    assert_eq!(table.params.len(), TABLE1.len());
    let conc = table.concentrations_mm.as_deref().unwrap();
    for ((c, p), (c_ref, t_ms)) in conc.iter().zip(&table.params).zip(TABLE1) {
        assert_eq!(*c, c_ref);
        assert_eq!(p.t1, t_ms / 1e3);
        assert_eq!(p.t2, t_ms / 1e3);
    }
}
