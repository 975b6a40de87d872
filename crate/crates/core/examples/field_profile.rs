//! Interior field at a linear spectral singularity, with and without a Kerr term.
//! Writes two trajectory CSV files into the current directory.

use std::fs::File;

use specsing::linear_scattering::{find_linear_singularity, DEFAULT_ROOT_TOL};
use specsing::nonlinear_bvp::{assemble_left_solution, compute_g, integrate_zeta, ShootingConfig};
use specsing::{Complex64, NonlinearitySpec};

fn main() -> specsing::Result<()> {
    let s = find_linear_singularity(3.0, 2, DEFAULT_ROOT_TOL)?;
    let cfg = ShootingConfig {
        record_trajectory: true,
        ..ShootingConfig::with_steps(400)
    };
    let n_plus = Complex64::new(1.0, 0.0);

    for (name, nl) in [("linear", NonlinearitySpec::none()), ("kerr", NonlinearitySpec::kerr(0.01))] {
        let shot = integrate_zeta(s.index(), s.ka0, nl.gamma(s.ka0), &nl, n_plus, &cfg)?;
        let g = compute_g(&shot.state0, s.ka0)?;
        let amps = assemble_left_solution(g, s.ka0, n_plus);
        let path = format!("field_profile_{name}.csv");
        shot.trajectory.expect("recorded").write_csv(File::create(&path)?)?;
        println!(
            "{name:>6}: |incident| = {:.3e}, |left-going| = {:.6}, written to {path}",
            amps.n_minus_tilde.norm(),
            amps.n_minus.norm()
        );
    }
    Ok(())
}
