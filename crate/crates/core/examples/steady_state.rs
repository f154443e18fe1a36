// Closed-form steady state of a resonantly driven spin, and the
// absorptive/dispersive lineshape as the drive is detuned.

use bloch_sr::steady_state::{eta_resonant, steady_state_rotating, susceptibility};
use bloch_sr::{hz_to_rad, SystemParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = SystemParams::single_timescale(hz_to_rad(400e6), hz_to_rad(6.3), 18e-3, 1.0)?;
    println!("T12 = 18 ms, drive 6.3 Hz: eta = {:.5}", eta_resonant(&p));

    let ss = steady_state_rotating(&p, 0.0);
    println!("on resonance: u = {:.3e}, v = {:.5}, w = {:.5}", ss.u, ss.v, ss.w);

    println!("{:>12} {:>12} {:>12}", "detuning Hz", "chi'", "chi''");
    for hz in [-20.0, -10.0, -5.0, 0.0, 5.0, 10.0, 20.0] {
        let (chi1, chi2) = susceptibility(&p, hz_to_rad(hz))?;
        println!("{hz:>12.1} {chi1:>12.6} {chi2:>12.6}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
