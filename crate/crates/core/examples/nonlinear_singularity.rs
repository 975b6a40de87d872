//! Direct search for a Kerr spectral singularity under both closures.

use specsing::singularity_finder::{find_nonlinear_singularity, Closure, FinderConfig, Seed};
use specsing::{Complex64, NonlinearitySpec};

fn main() -> specsing::Result<()> {
    let kerr = NonlinearitySpec::kerr(1e-3);
    let n_plus = Complex64::new(3.0, 0.0);

    for closure in [Closure::FixEta, Closure::FixK] {
        for seed in [Seed::LinearRoot, Seed::PerturbativeShift] {
            let cfg = FinderConfig {
                closure,
                seed,
                ..Default::default()
            };
            let r = find_nonlinear_singularity(3.0, &kerr, n_plus, 1.0, 2, &cfg)?;
            println!(
                "{closure:?}/{:?}: n = {:.10}, K = {:.10}, g/g0 - 1 = {:.3e}, {} iterations, residual {:.1e}",
                r.seed_origin,
                r.index(),
                r.ka_star,
                r.gain.relative_excess(),
                r.iterations,
                r.residual
            );
        }
    }
    Ok(())
}
