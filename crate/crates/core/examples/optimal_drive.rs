// Response vs drive amplitude: linear at weak drive, saturating past the
// optimum omega1* = (T1 T2)^(-1/2).

use bloch_sr::sr_analysis::{linear_response_eta, linspace, optimal_omega1, sweep_omega1};
use bloch_sr::steady_state::eta_resonant;
use bloch_sr::{hz_to_rad, rad_to_hz, SystemParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = linspace(hz_to_rad(0.1), hz_to_rad(20.0), 400);
    for t in [18.0e-3, 28.5e-3, 45.5e-3] {
        let r = sweep_omega1(t, t, 1.0, &grid)?;
        println!(
            "T12 = {:.1} ms: peak at {:.4} Hz (closed form {:.4} Hz)",
            t * 1e3,
            rad_to_hz(r.extremum.location),
            rad_to_hz(optimal_omega1(t, t))
        );
    }

    // Where linear response theory stops working.
    let t = 25e-3;
    println!("{:>10} {:>12} {:>12} {:>8}", "w1*T", "eta", "linear", "ratio");
    for x in [0.01, 0.1, 0.3, 1.0, 3.0] {
        let p = SystemParams::resonant(hz_to_rad(400e6), x / t, t, t, 1.0)?;
        let (exact, lin) = (eta_resonant(&p), linear_response_eta(&p));
        println!("{x:>10} {exact:>12.6} {lin:>12.6} {:>8.4}", lin / exact);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
