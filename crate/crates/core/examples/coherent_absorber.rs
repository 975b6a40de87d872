//! A lossy Kerr slab that swallows a coherent pair of incident waves: the
//! time reverse of the laser, found directly and through the loss inverse.

use specsing::linear_scattering::{find_linear_singularity, reflection_transmission, DEFAULT_ROOT_TOL};
use specsing::nonlinear_bvp::ShootingConfig;
use specsing::singularity_finder::{
    absorber_intensity_for_loss, find_coherent_absorber, intensity_for_gain, Closure, FinderConfig,
};
use specsing::{Complex64, NonlinearitySpec};

fn main() -> specsing::Result<()> {
    let lin = find_linear_singularity(3.0, 3, DEFAULT_ROOT_TOL)?.time_reversed();
    // the passive linear absorber: scattering is finite, but the time-reversed
    // point is where an incident pair vanishes into the slab
    let s = reflection_transmission(lin.index(), lin.ka0, &NonlinearitySpec::none(), Complex64::new(1.0, 0.0), &ShootingConfig::default())?;
    println!("linear absorber n = {:.8}, K = {:.8}, |R| = {:.4}, |T| = {:.4}", lin.index(), lin.ka0, s.r_left.norm(), s.t_left.norm());

    let kerr = NonlinearitySpec::kerr(1e-3);
    let cfg = FinderConfig {
        closure: Closure::FixK,
        ..Default::default()
    };
    let cpa = find_coherent_absorber(3.0, &kerr, Complex64::new(2.0, 0.0), 1.0, 3, &cfg)?;
    println!("Kerr absorber at |N+| = 2: kappa = {:.10}, loss = {:.10} 1/cm", cpa.kappa_star, -cpa.gain.g);

    let alpha = -cpa.gain.g0 * 1.01;
    let absorb = absorber_intensity_for_loss(3.0, &kerr, alpha, 1.0, 3, &cfg)?;
    let lase = intensity_for_gain(3.0, &kerr, alpha, 1.0, 3, &cfg)?;
    println!(
        "loss {alpha:.6} absorbs |N+|² = {:.10}; the same gain emits |N+|² = {:.10}",
        absorb.n_plus_sq, lase.n_plus_sq
    );
    Ok(())
}
