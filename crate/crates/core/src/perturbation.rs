//! First-order perturbation theory in the scaled nonlinearity strength `γ`.
//!
//! Writing the interior field as `ζ ≈ ζ₀ + γ ζ₁` with
//!
//! ```text
//! ζ₁(x) = ∫₁ˣ G(x−y) f(|ζ₀(y)|) ζ₀(y) dy,   G(u) = sin(n ka u) / (n ka),
//! ```
//!
//! the lasing condition `G₊ = 0` becomes, to first order around a linear root
//! `(n₀, ka₀)`,
//!
//! ```text
//! ∂ₙG₊⁽⁰⁾ · n₁ + ∂_ka G₊⁽⁰⁾ · ka₁ + G₊⁽¹⁾ = 0.
//! ```
//!
//! This is one complex equation in three real unknowns, so a [`ShiftConstraint`]
//! closes it. The Kerr closed forms below hold only at a root on the emitting
//! branch and are guarded accordingly; the raw expressions are available in
//! [`formulas`] for off-root evaluation.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear_scattering::{self, approx_threshold_gain, threshold_gain_g0, LinearSingularity};
use crate::nonlinear_bvp::{self, ShootingConfig};
use crate::quadrature::{self, QuadratureOptions};
use crate::slab_model::{FieldState, GainReport, NonlinearityKind, NonlinearitySpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Maximum `|L(n₀, ka₀)|` accepted as "at a linear singularity".
pub const ROOT_RESIDUAL_GUARD: f64 = 1e-10;

/// `|γ|·max(|κ₁/κ₀|, |ka₁/ka₀|)` above this flags the first-order gain as unreliable.
pub const FIRST_ORDER_GUARD: f64 = 0.1;

/// `σ|N₊|²` above this flags the emitted intensity as outside the weak-nonlinearity regime.
pub const INTENSITY_GAUGE_LIMIT: f64 = 1e-3;

/// `G(u) = sin(n ka u) / (n ka)`.
pub fn green_kernel(u: f64, n: Complex64, ka: f64) -> Result<Complex64> {
    let nk = n * ka;
    if nk.norm() == 0.0 {
        return Err(Error::SingularParameter("n·K = 0 in the Green's function"));
    }
    Ok((nk * u).sin() / nk)
}

/// `ζ₁(x)` and `ζ₁′(x)` by adaptive quadrature.
pub fn zeta1(
    x: f64,
    n0: Complex64,
    ka0: f64,
    n_plus: Complex64,
    nl: &NonlinearitySpec,
) -> Result<FieldState> {
    let nk = n0 * ka0;
    if nk.norm() == 0.0 {
        return Err(Error::SingularParameter("n·K = 0 in the Green's function"));
    }
    let source = |y: f64| -> Complex64 {
        let z0 = linear_scattering::zeta0(y, n0, ka0, n_plus)
            .expect("index checked above")
            .psi;
        nl.response(z0.norm()) * z0
    };
    let opts = QuadratureOptions::default();
    let psi = quadrature::integrate(|y| (nk * (x - y)).sin() / nk * source(y), 1.0, x, &opts)?;
    let dpsi = quadrature::integrate(|y| (nk * (x - y)).cos() * source(y), 1.0, x, &opts)?;
    Ok(FieldState {
        x,
        psi: psi.value,
        dpsi: dpsi.value,
    })
}

/// `G₊⁽¹⁾ = ζ₁′(0) + i ka₀ ζ₁(0)` straight from the definition of `ζ₁`.
pub fn g1_plus_from_zeta1(
    n0: Complex64,
    ka0: f64,
    n_plus: Complex64,
    nl: &NonlinearitySpec,
) -> Result<Complex64> {
    let z = zeta1(0.0, n0, ka0, n_plus, nl)?;
    Ok(z.dpsi + I * ka0 * z.psi)
}

/// Fails unless `(n₀, ka₀)` is a root of `L` on the emitting branch.
pub fn check_linear_singularity(n0: Complex64, ka0: f64) -> Result<()> {
    let l = linear_scattering::l_function(n0, ka0)?;
    let r = (n0 - 1.0) / (n0 + 1.0);
    let e = (-I * n0 * ka0).exp();
    if l.norm() > ROOT_RESIDUAL_GUARD || (e - r).norm() > (e + r).norm() {
        return Err(Error::InvalidRegime {
            l_residual: l.norm(),
        });
    }
    Ok(())
}

/// `G₊⁽¹⁾` at a linear root, for any response `f`:
///
/// `−N₊ e^{i ka₀} c² ∫₀¹ f(|N₊ c h(x)|) h(x)² dx` with `c = (n₀+1)/(2n₀)` and
/// `h(x) = e^{i n₀ ka₀ (x−1)} + e^{−i n₀ ka₀ x}`.
pub fn g1_plus_quadrature(
    n0: Complex64,
    ka0: f64,
    n_plus: Complex64,
    nl: &NonlinearitySpec,
) -> Result<Complex64> {
    check_linear_singularity(n0, ka0)?;
    let c = (n0 + 1.0) / (2.0 * n0);
    let w = n0 * ka0;
    let h = |x: f64| (I * w * (x - 1.0)).exp() + (-I * w * x).exp();
    let integral = quadrature::integrate(
        |x| {
            let hx = h(x);
            nl.response((n_plus * c * hx).norm()) * hx * hx
        },
        0.0,
        1.0,
        &QuadratureOptions::default(),
    )?;
    Ok(-n_plus * (I * ka0).exp() * c * c * integral.value)
}

/// Kerr `G₊⁽¹⁾` in closed form at a linear root.
pub fn g1_plus_kerr_closed(n0: Complex64, ka0: f64, n_plus: Complex64) -> Result<Complex64> {
    check_linear_singularity(n0, ka0)?;
    formulas::g1_plus_kerr(n0, ka0, n_plus)
}

/// `(∂ₙG₊⁽⁰⁾, ∂_ka G₊⁽⁰⁾)` at a linear root.
pub fn dg0_derivatives(n0: Complex64, ka0: f64, n_plus: Complex64) -> Result<(Complex64, Complex64)> {
    check_linear_singularity(n0, ka0)?;
    Ok((
        formulas::dg0_dn(n0, ka0, n_plus),
        formulas::dg0_dka(n0, ka0, n_plus),
    ))
}

/// Closed-form expressions evaluated without the root guard.
pub mod formulas {
    use super::*;

    /// `N₊ e^{i ka₀} ka₀ [(n₀²−1) ka₀ − 2i] / n₀`.
    pub fn dg0_dn(n0: Complex64, ka0: f64, n_plus: Complex64) -> Complex64 {
        n_plus * (I * ka0).exp() * ka0 * ((n0 * n0 - 1.0) * ka0 - 2.0 * I) / n0
    }

    /// `N₊ e^{i ka₀} ka₀ (n₀²−1)`.
    pub fn dg0_dka(n0: Complex64, ka0: f64, n_plus: Complex64) -> Complex64 {
        n_plus * (I * ka0).exp() * ka0 * (n0 * n0 - 1.0)
    }

    /// `8i |N₊|² N₊ e^{i ka₀} (4n₀² − n₀*² − 3) / (ka₀ (9n₀⁴ + n₀*⁴ − 10|n₀|⁴))`.
    pub fn g1_plus_kerr(n0: Complex64, ka0: f64, n_plus: Complex64) -> Result<Complex64> {
        let nc = n0.conj();
        let n2 = n0 * n0;
        let nc2 = nc * nc;
        let abs4 = n0.norm_sqr() * n0.norm_sqr();
        let den = ka0 * (9.0 * n2 * n2 + nc2 * nc2 - 10.0 * abs4);
        if den.norm() <= 1e-14 * ka0 * abs4 {
            return Err(Error::Degenerate(
                "Kerr correction denominator vanishes (real index)".into(),
            ));
        }
        Ok(8.0 * I * n_plus.norm_sqr() * n_plus * (I * ka0).exp() * (4.0 * n2 - nc2 - 3.0) / den)
    }

    /// Leading small-`κ₀` form of [`dg0_dn`].
    pub fn dg0_dn_small_kappa(eta0: f64, ka0: f64, n_plus: Complex64) -> Complex64 {
        n_plus * (I * ka0).exp() * ka0 * ((eta0 * eta0 - 1.0) * ka0 - 2.0 * I) / eta0
    }

    /// Leading small-`κ₀` form of [`dg0_dka`].
    pub fn dg0_dka_small_kappa(eta0: f64, ka0: f64, n_plus: Complex64) -> Complex64 {
        n_plus * (I * ka0).exp() * ka0 * (eta0 * eta0 - 1.0)
    }

    /// Leading small-`κ₀` form of [`g1_plus_kerr`]: `3|N₊|²N₊e^{i ka₀}(η₀²−1)/(4η₀³ ka₀ κ₀)`.
    pub fn g1_plus_kerr_small_kappa(eta0: f64, kappa0: f64, ka0: f64, n_plus: Complex64) -> Complex64 {
        3.0 * n_plus.norm_sqr() * n_plus * (I * ka0).exp() * (eta0 * eta0 - 1.0)
            / (4.0 * eta0.powi(3) * ka0 * kappa0)
    }
}

/// How the single complex first-order equation is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftConstraint {
    /// `ka₁ = 0`: the nonlinear singularity keeps the linear wavelength; `n₁` is free.
    FixK,
    /// `Re n₁ = 0`: solve for `κ₁` and `ka₁`.
    FixEta,
    /// `ka₁ = ratio · Re n₁`; solve for `n₁`.
    KPerEta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstOrderShift {
    /// Index shift per unit `γ`.
    pub n1: Complex64,
    /// Scaled-wavenumber shift per unit `γ`.
    pub ka1: f64,
    pub constraint: ShiftConstraint,
    /// `|∂ₙG₊⁽⁰⁾ n₁ + ∂_ka G₊⁽⁰⁾ ka₁ + G₊⁽¹⁾|`.
    pub residual: f64,
    pub g1_plus: Complex64,
}

impl FirstOrderShift {
    pub fn kappa1(&self) -> f64 {
        self.n1.im
    }

    /// `(n₀ + γ n₁, ka₀ + γ ka₁)`.
    pub fn apply(&self, sing: &LinearSingularity, gamma: f64) -> (Complex64, f64) {
        (sing.index() + gamma * self.n1, sing.ka0 + gamma * self.ka1)
    }
}

/// `G₊⁽¹⁾` for a response: zero when linear, closed form for Kerr, quadrature otherwise.
pub fn g1_plus(n0: Complex64, ka0: f64, n_plus: Complex64, nl: &NonlinearitySpec) -> Result<Complex64> {
    match nl.kind {
        NonlinearityKind::None => {
            check_linear_singularity(n0, ka0)?;
            Ok(Complex64::new(0.0, 0.0))
        }
        NonlinearityKind::Kerr => g1_plus_kerr_closed(n0, ka0, n_plus),
        NonlinearityKind::Custom => g1_plus_quadrature(n0, ka0, n_plus, nl),
    }
}

/// Solve the first-order equation under `constraint`.
pub fn solve_shift(
    n0: Complex64,
    ka0: f64,
    n_plus: Complex64,
    nl: &NonlinearitySpec,
    constraint: ShiftConstraint,
) -> Result<FirstOrderShift> {
    let (dn, dka) = dg0_derivatives(n0, ka0, n_plus)?;
    let g1 = g1_plus(n0, ka0, n_plus, nl)?;

    // n₁ = α₀u₀ + α₁u₁, ka₁ = β₀u₀ + β₁u₁ with real unknowns u
    let (alpha, beta) = match constraint {
        ShiftConstraint::FixK => ([Complex64::new(1.0, 0.0), I], [0.0, 0.0]),
        ShiftConstraint::FixEta => ([Complex64::new(0.0, 0.0), I], [1.0, 0.0]),
        ShiftConstraint::KPerEta(ratio) => ([Complex64::new(1.0, 0.0), I], [ratio, 0.0]),
    };
    let c0 = dn * alpha[0] + dka * beta[0];
    let c1 = dn * alpha[1] + dka * beta[1];
    let det = c0.re * c1.im - c1.re * c0.im;
    if det.abs() <= 1e-14 * c0.norm() * c1.norm() {
        return Err(Error::Degenerate(format!(
            "first-order system is singular under {constraint:?}"
        )));
    }
    let u0 = (-g1.re * c1.im + c1.re * g1.im) / det;
    let u1 = (-c0.re * g1.im + c0.im * g1.re) / det;

    let n1 = alpha[0] * u0 + alpha[1] * u1;
    let ka1 = beta[0] * u0 + beta[1] * u1;
    let residual = (dn * n1 + dka * ka1 + g1).norm();
    Ok(FirstOrderShift {
        n1,
        ka1,
        constraint,
        residual,
        g1_plus: g1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModifiedGain {
    pub report: GainReport,
    /// Set when the first-order correction is too large to trust.
    pub out_of_regime: bool,
}

/// `g ≈ g₀ [1 + γ (κ₁/κ₀ + ka₁/ka₀)]`.
pub fn modified_gain(
    shift: &FirstOrderShift,
    sing: &LinearSingularity,
    thickness_a: f64,
    gamma: f64,
) -> ModifiedGain {
    let g0 = threshold_gain_g0(sing, thickness_a);
    let rk = shift.kappa1() / sing.kappa0;
    let rka = shift.ka1 / sing.ka0;
    let g = g0 * (1.0 + gamma * (rk + rka));
    ModifiedGain {
        report: GainReport::new(g, g0),
        out_of_regime: gamma.abs() * rk.abs().max(rka.abs()) > FIRST_ORDER_GUARD,
    }
}

/// Closed-form Kerr threshold at fixed wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KerrThreshold {
    /// Small-`κ₀` threshold `(2/a) ln((η₀+1)/(η₀−1))`.
    pub g0: f64,
    /// `g/g₀ − 1` to leading order in `κ₀`, keeping the `4` next to `(η₀²−1)² ka₀²`.
    pub bracket_leading: f64,
    /// `g/g₀ − 1` once `4 / ((η₀²−1)² ka₀²)` is dropped.
    pub bracket_large_ka: f64,
    pub g_leading: f64,
    pub g_large_ka: f64,
}

/// Modified threshold for a Kerr slab emitting `|N₊|` at the linear wavelength.
pub fn kerr_threshold(eta0: f64, ka0: f64, sigma: f64, n_plus_mag: f64, thickness_a: f64) -> KerrThreshold {
    let g0 = approx_threshold_gain(eta0, thickness_a);
    let e2 = eta0 * eta0 - 1.0;
    let log2 = ((eta0 + 1.0) / (eta0 - 1.0)).ln().powi(2);
    let n2 = n_plus_mag * n_plus_mag;
    let gamma = -ka0 * ka0 * sigma;
    let bracket_leading = -6.0 * e2 * gamma * n2 / (4.0 * eta0 * eta0 * (e2 * e2 * ka0 * ka0 + 4.0) * log2);
    let bracket_large_ka = 3.0 * sigma * n2 / (2.0 * eta0 * eta0 * e2 * log2);
    KerrThreshold {
        g0,
        bracket_leading,
        bracket_large_ka,
        g_leading: g0 * (1.0 + bracket_leading),
        g_large_ka: g0 * (1.0 + bracket_large_ka),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmittedIntensity {
    /// `½|N₊|²`.
    pub intensity: f64,
    pub n_plus_sq: f64,
    /// `σ|N₊|²`; first-order theory needs this ≪ 1.
    pub validity_gauge: f64,
    pub below_threshold: bool,
    pub reliable: bool,
}

/// `½|N₊|² = (g − g₀) η₀²(η₀²−1) ln²((η₀+1)/(η₀−1)) / (3 σ g₀)`.
pub fn emitted_intensity(eta0: f64, g: f64, g0: f64, sigma: f64) -> Result<EmittedIntensity> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!(
            "emitted intensity needs a positive Kerr coefficient, got sigma = {sigma}"
        )));
    }
    if !(eta0 > 1.0) || !(g0 > 0.0) {
        return Err(Error::invalid("need eta0 > 1 and g0 > 0"));
    }
    if g <= g0 {
        return Ok(EmittedIntensity {
            intensity: 0.0,
            n_plus_sq: 0.0,
            validity_gauge: 0.0,
            below_threshold: true,
            reliable: true,
        });
    }
    let e2 = eta0 * eta0 - 1.0;
    let log2 = ((eta0 + 1.0) / (eta0 - 1.0)).ln().powi(2);
    let intensity = (g - g0) * eta0 * eta0 * e2 * log2 / (3.0 * sigma * g0);
    let n_plus_sq = 2.0 * intensity;
    let gauge = sigma * n_plus_sq;
    Ok(EmittedIntensity {
        intensity,
        n_plus_sq,
        validity_gauge: gauge,
        below_threshold: false,
        reliable: gauge <= INTENSITY_GAUGE_LIMIT,
    })
}

/// `|N₋ / (N₊ e^{i ka}) − 1|` from a direct shot at `(n, ka)`.
pub fn left_emission_check(
    n: Complex64,
    ka: f64,
    gamma: f64,
    nl: &NonlinearitySpec,
    n_plus: Complex64,
    cfg: &ShootingConfig,
) -> Result<f64> {
    let shot = nonlinear_bvp::integrate_zeta(n, ka, gamma, nl, n_plus, cfg)?;
    let g = nonlinear_bvp::compute_g(&shot.state0, ka)?;
    let amps = nonlinear_bvp::assemble_left_solution(g, ka, n_plus);
    Ok((amps.n_minus / (n_plus * (I * ka).exp()) - 1.0).norm())
}
