// Carr-Purcell echoes refocus static inhomogeneity, so their decay
// measures T2 while the free-induction decay falls off faster.

use bloch_sr::pulse_sim::{carr_purcell, fit_t2, free_induction_decay, IsochromatEnsemble};
use bloch_sr::{hz_to_rad, SystemParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = SystemParams::single_timescale(0.0, 0.0, 28.5e-3, 1.0)?;
    let ensemble = IsochromatEnsemble::gaussian(hz_to_rad(30.0), 21);
    let echoes = carr_purcell(&p, &ensemble, 2.5e-3, 12)?;
    let fid = free_induction_decay(&p, &ensemble, &echoes.times)?;
    println!("{:>8} {:>10} {:>10} {:>10}", "t ms", "echo", "FID", "e^-t/T2");
    for ((t, e), f) in echoes.times.iter().zip(&echoes.values).zip(&fid.values) {
        println!("{:>8.1} {e:>10.5} {f:>10.5} {:>10.5}", t * 1e3, (-t / p.t2).exp());
    }
    let fit = fit_t2(&echoes)?;
    println!("fitted T2 = {:.4} ms", fit.t2_hat * 1e3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
