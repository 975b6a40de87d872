//! Closed-form scattering by the linear slab (`γ = 0`) and its spectral
//! singularities.
//!
//! The interior solution carrying a purely outgoing wave `N₊ e^{i ka x}` on the
//! right is
//!
//! ```text
//! ζ₀(x) = N₊ e^{i ka} / (2n) · [ (n+1) e^{i n ka (x−1)} + (n−1) e^{−i n ka (x−1)} ]
//! ```
//!
//! and the slab lases (or, time reversed, absorbs perfectly) where
//! `L(n, ka) = e^{−2 i n ka} − ((n−1)/(n+1))²` vanishes. Only the family
//! `e^{−i n ka} = +(n−1)/(n+1)` emits the same amplitude and phase from both
//! faces; `mode` counts the roots of that family, `n ka = 2π·mode + i·Log ℛ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinear_bvp::{self, GPair, ShootingConfig};
use crate::slab_model::{FieldState, NonlinearitySpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `|G₊|` below this is treated as sitting on the singularity.
pub const G_PLUS_FLOOR: f64 = 1e-300;

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
const MAX_NEWTON_ITER: usize = 100;
const MAX_HALVINGS: usize = 40;

/// A root of `L(η₀ + iκ₀, ka₀) = 0` on the emitting branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearSingularity {
    pub eta0: f64,
    pub kappa0: f64,
    pub ka0: f64,
    pub mode: u32,
    pub residual: f64,
}

impl LinearSingularity {
    pub fn index(&self) -> Complex64 {
        Complex64::new(self.eta0, self.kappa0)
    }

    /// Amplitude reflection ratio `ℛ = (n₀−1)/(n₀+1)`.
    pub fn reflection_ratio(&self) -> Complex64 {
        let n = self.index();
        (n - 1.0) / (n + 1.0)
    }

    pub fn threshold_gain(&self, thickness_a: f64) -> f64 {
        threshold_gain_g0(self, thickness_a)
    }

    /// The same root viewed as a coherent perfect absorber (loss instead of gain).
    pub fn time_reversed(&self) -> LinearSingularity {
        LinearSingularity {
            kappa0: -self.kappa0,
            ..*self
        }
    }
}

fn check_index(n: Complex64) -> Result<()> {
    if n.norm() == 0.0 {
        Err(Error::SingularParameter("refractive index n = 0"))
    } else {
        Ok(())
    }
}

/// `ζ₀(x)` and `ζ₀′(x)` for the outgoing terminal data at `x = 1`.
pub fn zeta0(x: f64, n: Complex64, ka: f64, n_plus: Complex64) -> Result<FieldState> {
    check_index(n)?;
    if !(ka > 0.0) {
        return Err(Error::invalid("K must be > 0"));
    }
    let amp = n_plus * (I * ka).exp() / (2.0 * n);
    let phase = I * n * ka * (x - 1.0);
    let fwd = (n + 1.0) * phase.exp();
    let bwd = (n - 1.0) * (-phase).exp();
    Ok(FieldState {
        x,
        psi: amp * (fwd + bwd),
        dpsi: amp * I * n * ka * (fwd - bwd),
    })
}

/// `L(n, ka) = e^{−2 i n ka} − ((n−1)/(n+1))²`.
pub fn l_function(n: Complex64, ka: f64) -> Result<Complex64> {
    if n == Complex64::new(-1.0, 0.0) {
        return Err(Error::Pole);
    }
    let r = (n - 1.0) / (n + 1.0);
    Ok((-2.0 * I * n * ka).exp() - r * r)
}

/// `(∂L/∂n, ∂L/∂ka)`.
pub fn l_derivatives(n: Complex64, ka: f64) -> Result<(Complex64, Complex64)> {
    if n == Complex64::new(-1.0, 0.0) {
        return Err(Error::Pole);
    }
    let e = (-2.0 * I * n * ka).exp();
    let r = (n - 1.0) / (n + 1.0);
    let dr = 2.0 / ((n + 1.0) * (n + 1.0));
    Ok((-2.0 * I * ka * e - 2.0 * r * dr, -2.0 * I * n * e))
}

/// `G∓⁽⁰⁾` in closed form.
///
/// `G₋⁽⁰⁾ = N₊ e^{i ka} ka (n²−1) sin(n ka) / n` and
/// `G₊⁽⁰⁾ = i ka N₊ e^{i(n+1)ka} (n+1)² L(n, ka) / (2n)`.
pub fn g_pm_linear(n: Complex64, ka: f64, n_plus: Complex64) -> Result<GPair> {
    check_index(n)?;
    let lead = n_plus * (I * ka).exp();
    let minus = lead * ka * (n * n - 1.0) * (n * ka).sin() / n;
    let plus = I * ka * lead * (I * n * ka).exp() * (n + 1.0) * (n + 1.0) / (2.0 * n)
        * l_function(n, ka)?;
    Ok(GPair { plus, minus })
}

/// Left reflection and transmission coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scattering {
    pub r_left: Complex64,
    pub t_left: Complex64,
    pub g: GPair,
}

impl Scattering {
    pub fn flux_sum(&self) -> f64 {
        self.r_left.norm_sqr() + self.t_left.norm_sqr()
    }
}

/// `Rˡ = −G₋/G₊`, `Tˡ = 2i ka N₊ / G₊`.
///
/// The linear case uses the closed form; otherwise the interior is integrated
/// numerically with `cfg`.
pub fn reflection_transmission(
    n: Complex64,
    ka: f64,
    nl: &NonlinearitySpec,
    n_plus: Complex64,
    cfg: &ShootingConfig,
) -> Result<Scattering> {
    if !(ka > 0.0) {
        return Err(Error::invalid("K must be > 0"));
    }
    let g = if nl.is_linear() {
        g_pm_linear(n, ka, n_plus)?
    } else {
        let shot = nonlinear_bvp::integrate_zeta(n, ka, nl.gamma(ka), nl, n_plus, cfg)?;
        nonlinear_bvp::compute_g(&shot.state0, ka)?
    };
    let g_plus_abs = g.plus.norm();
    if !(g_plus_abs >= G_PLUS_FLOOR) {
        return Err(Error::SingularityProximity { g_plus_abs });
    }
    Ok(Scattering {
        r_left: -g.minus / g.plus,
        t_left: 2.0 * I * ka * n_plus / g.plus,
        g,
    })
}

/// Starting point for branch `mode`: `n ka ≈ 2π·mode + i ln((η−1)/(η+1))`.
pub fn linear_seed(eta0: f64, mode: u32) -> (f64, f64) {
    let ka = 2.0 * PI * mode as f64 / eta0;
    let kappa = ((eta0 - 1.0) / (eta0 + 1.0)).ln() / ka;
    (kappa, ka)
}

/// Damped 2-D Newton on `(Re L, Im L)` over `(κ₀, ka₀)` at fixed `η₀`.
pub fn find_linear_singularity(eta0: f64, mode: u32, tol: f64) -> Result<LinearSingularity> {
    if !(eta0 > 1.0) || !eta0.is_finite() {
        return Err(Error::invalid(format!("eta0 must be > 1, got {eta0}")));
    }
    if mode == 0 {
        return Err(Error::invalid("mode index must be >= 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be > 0"));
    }

    let (mut kappa, mut ka) = linear_seed(eta0, mode);
    let index = |kappa: f64| Complex64::new(eta0, kappa);
    let mut l = l_function(index(kappa), ka)?;
    let mut iterations = 0;

    while l.norm() > tol {
        if iterations == MAX_NEWTON_ITER {
            return Err(Error::Convergence {
                what: "linear singularity",
                iterations,
                residual: l.norm(),
                last_0: kappa,
                last_1: ka,
            });
        }
        iterations += 1;

        let (dn, dka) = l_derivatives(index(kappa), ka)?;
        let dkappa = I * dn;
        let det = dkappa.re * dka.im - dka.re * dkappa.im;
        if det.abs() < 1e-300 {
            return Err(Error::Degenerate("singular Jacobian of L".into()));
        }
        let step_kappa = (-l.re * dka.im + l.im * dka.re) / det;
        let step_ka = (-dkappa.re * l.im + dkappa.im * l.re) / det;

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let (k_try, ka_try) = (kappa + lambda * step_kappa, ka + lambda * step_ka);
            if ka_try > 0.0 {
                let l_try = l_function(index(k_try), ka_try)?;
                if l_try.norm() < l.norm() {
                    kappa = k_try;
                    ka = ka_try;
                    l = l_try;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // stalled at the rounding floor of L
            return Err(Error::Convergence {
                what: "linear singularity",
                iterations,
                residual: l.norm(),
                last_0: kappa,
                last_1: ka,
            });
        }
    }

    let n0 = index(kappa);
    let r = (n0 - 1.0) / (n0 + 1.0);
    let e = (-I * n0 * ka).exp();
    if (e - r).norm() > (e + r).norm() || kappa >= 0.0 {
        return Err(Error::Convergence {
            what: "linear singularity on the emitting branch",
            iterations,
            residual: l.norm(),
            last_0: kappa,
            last_1: ka,
        });
    }

    Ok(LinearSingularity {
        eta0,
        kappa0: kappa,
        ka0: ka,
        mode,
        residual: l.norm(),
    })
}

/// `g₀ = (1/a) ln(1/|ℛ|²)`, which equals `−2 ka₀ κ₀ / a` at the root.
pub fn threshold_gain_g0(sing: &LinearSingularity, thickness_a: f64) -> f64 {
    (1.0 / sing.reflection_ratio().norm_sqr()).ln() / thickness_a
}

/// Small-`κ₀` threshold `g₀ ≈ (2/a) ln((η₀+1)/(η₀−1))`.
pub fn approx_threshold_gain(eta0: f64, thickness_a: f64) -> f64 {
    2.0 * ((eta0 + 1.0) / (eta0 - 1.0)).ln() / thickness_a
}
