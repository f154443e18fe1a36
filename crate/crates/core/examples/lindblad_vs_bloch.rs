// The density-matrix master equation and the Bloch equations describe the
// same motion. Integrate both from the same state and compare.

use bloch_sr::dynamics::{simulate_bloch, simulate_lindblad, uniform_times, IntegratorConfig};
use bloch_sr::relaxation::{generator_matrix, psd_check, relaxation_matrix};
use bloch_sr::state::bloch_components;
use bloch_sr::{bloch_to_density, hz_to_rad, BlochState, SystemParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = SystemParams::resonant(hz_to_rad(50.0), hz_to_rad(6.3), 30e-3, 20e-3, 0.8)?;
    for (name, a) in [("textbook", relaxation_matrix(&p)), ("generator", generator_matrix(&p))] {
        let r = psd_check(&a, 1e-12)?;
        println!(
            "{name} matrix: psd = {}, min eigenvalue = {:.4} 1/s",
            r.is_psd, r.min_eigenvalue
        );
    }

    let s0 = BlochState::new(0.3, -0.2, 0.5);
    let span = (0.0, 5.0 * p.t1);
    let times = uniform_times(span.0, span.1, 10);
    let cfg = IntegratorConfig::adaptive(1e-10);
    let bloch = simulate_bloch(&p, s0, span, &times, &cfg)?;
    let lindblad = simulate_lindblad(&p, bloch_to_density(&s0), span, &times, &cfg)?;

    println!(
        "{:>8} {:>12} {:>12} {:>10}",
        "t ms", "s3 (Bloch)", "s3 (rho)", "max diff"
    );
    for ((t, s), rho) in bloch.iter().zip(&lindblad.states) {
        let r = bloch_components(rho);
        let diff = (s.s1 - r.s1).abs().max((s.s2 - r.s2).abs()).max((s.s3 - r.s3).abs());
        println!("{:>8.1} {:>12.8} {:>12.8} {:>10.2e}", t * 1e3, s.s3, r.s3, diff);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
