//! Output intensity of a Kerr slab laser slightly above threshold: closed form
//! against the exact inverse problem.

use specsing::linear_scattering::{find_linear_singularity, DEFAULT_ROOT_TOL};
use specsing::perturbation::emitted_intensity;
use specsing::singularity_finder::{intensity_for_gain, FinderConfig};
use specsing::nonlinear_bvp::ShootingConfig;
use specsing::NonlinearitySpec;

fn main() -> specsing::Result<()> {
    let (eta, sigma, a, mode) = (3.0, 1e-13, 1.0, 14);
    let kerr = NonlinearitySpec::kerr(sigma);
    let g0 = find_linear_singularity(eta, mode, DEFAULT_ROOT_TOL)?.threshold_gain(a);
    let cfg = FinderConfig {
        shooting: ShootingConfig::with_steps(8192),
        ..Default::default()
    };

    println!("g0 = {g0:.10} 1/cm");
    println!("{:>10} {:>16} {:>16} {:>10} {:>10}", "g/g0 - 1", "closed (W/cm²)", "exact (W/cm²)", "gap", "σ|N+|²");
    for excess in [1e-4, 1e-3, 5e-3, 2e-2] {
        let g = g0 * (1.0 + excess);
        let closed = emitted_intensity(eta, g, g0, sigma)?;
        let exact = intensity_for_gain(eta, &kerr, g, a, mode, &cfg)?;
        let i_exact = 0.5 * exact.n_plus_sq;
        println!(
            "{excess:>10.1e} {:>16.6e} {i_exact:>16.6e} {:>10.2e} {:>10.2e}{}",
            closed.intensity,
            (closed.intensity - i_exact).abs() / i_exact,
            closed.validity_gauge,
            if closed.reliable { "" } else { "  (outside weak-nonlinearity regime)" }
        );
    }
    Ok(())
}
