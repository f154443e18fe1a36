// Inversion recovery: invert, wait, read the longitudinal component, and
// fit T1 from the recovery curve.

use bloch_sr::pulse_sim::{fit_t1, inversion_recovery, log_delays};
use bloch_sr::SystemParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = SystemParams::single_timescale(0.0, 0.0, 36.5e-3, 1.0)?;
    let rec = inversion_recovery(&p, &log_delays(1e-3, 0.2, 12))?;
    for (tau, m) in rec.times.iter().zip(&rec.values) {
        println!("  tau = {:7.2} ms  Mz = {m:+.4}", tau * 1e3);
    }
    let clean = fit_t1(&rec)?;
    println!("noiseless fit: T1 = {:.4} ms", clean.t1_hat * 1e3);
    for seed in 0..3 {
        let fit = fit_t1(&rec.clone().with_noise(seed, 0.01))?;
        println!("1% noise, seed {seed}: T1 = {:.3} ms", fit.t1_hat * 1e3);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
