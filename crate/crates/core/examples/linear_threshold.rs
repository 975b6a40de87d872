//! Threshold gain and lasing wavenumber for the first few branches of a slab.
//!
//! cargo run --example linear_threshold -- [eta] [thickness_cm]

use specsing::linear_scattering::{approx_threshold_gain, find_linear_singularity, DEFAULT_ROOT_TOL};

fn main() -> specsing::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>().expect("numeric argument"));
    let eta = args.next().unwrap_or(3.0);
    let a = args.next().unwrap_or(1.0);

    println!("eta = {eta}, a = {a} cm, small-kappa threshold {:.6} 1/cm", approx_threshold_gain(eta, a));
    println!("{:>4} {:>14} {:>14} {:>14} {:>12}", "mode", "kappa0", "k0 (1/cm)", "g0 (1/cm)", "|L|");
    for mode in 1..=8 {
        let s = find_linear_singularity(eta, mode, DEFAULT_ROOT_TOL)?;
        println!(
            "{:>4} {:>14.10} {:>14.8} {:>14.10} {:>12.2e}",
            mode,
            s.kappa0,
            s.ka0 / a,
            s.threshold_gain(a),
            s.residual
        );
    }
    Ok(())
}
