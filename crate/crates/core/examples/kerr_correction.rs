//! First-order Kerr correction to the lasing condition, three ways, and the
//! resulting threshold shift at fixed wavelength.

use specsing::linear_scattering::{find_linear_singularity, DEFAULT_ROOT_TOL};
use specsing::perturbation::{
    g1_plus_from_zeta1, g1_plus_kerr_closed, g1_plus_quadrature, kerr_threshold, modified_gain, solve_shift,
    ShiftConstraint,
};
use specsing::{Complex64, NonlinearitySpec};

fn main() -> specsing::Result<()> {
    let (eta, sigma, a) = (3.0, 1e-13, 1.0);
    let kerr = NonlinearitySpec::kerr(sigma);
    let unit = Complex64::new(1.0, 0.0);

    for mode in [1, 5, 20] {
        let s = find_linear_singularity(eta, mode, DEFAULT_ROOT_TOL)?;
        let closed = g1_plus_kerr_closed(s.index(), s.ka0, unit)?;
        let quad = g1_plus_quadrature(s.index(), s.ka0, unit, &kerr)?;
        let field = g1_plus_from_zeta1(s.index(), s.ka0, unit, &kerr)?;
        println!("mode {mode}: G1+ = {closed:.6e}");
        println!("   quadrature gap {:.1e}, perturbed-field gap {:.1e}",
            (quad - closed).norm() / closed.norm(),
            (field - closed).norm() / closed.norm());

        // at |N+|² = 1e9 W/cm²
        let n2 = 1e9;
        let shift = solve_shift(s.index(), s.ka0, unit, &kerr, ShiftConstraint::FixK)?;
        let m = modified_gain(&shift, &s, a, kerr.gamma(s.ka0) * n2);
        let t = kerr_threshold(eta, s.ka0, sigma, n2.sqrt(), a);
        println!(
            "   g/g0 - 1: first order {:.4e}, closed form {:.4e}, large-K form {:.4e}",
            m.report.relative_excess(),
            t.bracket_leading,
            t.bracket_large_ka
        );
    }
    Ok(())
}
