// A long resonant pulse from equilibrium: the transverse signal nutates,
// relaxes, and settles at the steady-state amplitude.

use bloch_sr::dynamics::{
    default_window, detect_steady_state, simulate_rotating, uniform_times, IntegratorConfig, STEADY_EPS,
};
use bloch_sr::pulse_sim::long_pulse_response;
use bloch_sr::steady_state::eta_resonant;
use bloch_sr::{hz_to_rad, RotatingState, SystemParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = SystemParams::single_timescale(hz_to_rad(400e6), hz_to_rad(6.3), 25e-3, 1.0)?;
    let rec = long_pulse_response(&p, 0.25, 1e-3)?;
    for i in (0..rec.times.len()).step_by(25) {
        println!("  t = {:5.0} ms  |M_perp| = {:.6}", rec.times[i] * 1e3, rec.values[i]);
    }
    let last = rec.values.last().copied().unwrap_or_default();
    println!("after 250 ms: {last:.6}, steady state {:.6}", eta_resonant(&p));

    // When is the signal constant to 1e-8?
    let span = 40.0 * p.t1;
    let tr = simulate_rotating(
        &p,
        0.0,
        RotatingState::new(0.0, 0.0, p.s_eq),
        (0.0, span),
        &uniform_times(0.0, span, 4000),
        &IntegratorConfig::adaptive(1e-11),
    )?;
    let det = detect_steady_state(&tr, default_window(&p), STEADY_EPS)?;
    println!(
        "converged after {:.0} ms: {} (spread {:.1e})",
        span * 1e3,
        det.converged,
        det.spread
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
