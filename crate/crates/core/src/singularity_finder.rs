//! Non-perturbative search for nonlinear spectral singularities.
//!
//! For a fixed emitted amplitude `N₊` the interior equation is integrated from
//! the right face (or evaluated in closed form when there is no nonlinearity)
//! and a damped Newton iteration drives the normalized residual
//! `G₊ / (|N₊| ka)` to zero. Two of the three real parameters `(η, κ, ka)` are
//! unknowns; the third is pinned by the [`Closure`].
//!
//! The same machinery run with incoming terminal data (and `G₋` as the residual)
//! finds the time-reversed configuration: a lossy slab that absorbs a coherent
//! pair of incident waves completely.

use std::io::Write;

use log::{debug, info};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear_scattering::{
    find_linear_singularity, g_pm_linear, threshold_gain_g0, LinearSingularity, DEFAULT_ROOT_TOL,
};
use crate::nonlinear_bvp::{self, ShootingConfig, Terminal};
use crate::output::fmt_f64;
use crate::perturbation::{self, ShiftConstraint};
use crate::slab_model::{GainReport, NonlinearitySpec};

/// Which parameter is held fixed while the other two are solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// Hold `η`; unknowns `(κ, ka)`.
    FixEta,
    /// Hold `ka` at its linear value; unknowns `(η, κ)`. The emitted wavelength
    /// does not move, which is the setting of the closed-form Kerr threshold.
    FixK,
}

impl Closure {
    fn shift_constraint(self) -> ShiftConstraint {
        match self {
            Closure::FixEta => ShiftConstraint::FixEta,
            Closure::FixK => ShiftConstraint::FixK,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Seed {
    LinearRoot,
    PerturbativeShift,
    User { eta: f64, kappa: f64, ka: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedOrigin {
    LinearRoot,
    PerturbativeShift,
    UserSupplied,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinderConfig {
    pub shooting: ShootingConfig,
    /// Bound on `|G| / (|N₊| ka)`.
    pub tol: f64,
    pub max_iter: usize,
    pub closure: Closure,
    pub seed: Seed,
    /// Central-difference step for the Jacobian.
    pub jacobian_step: f64,
    /// Tolerance for the linear root used as reference and seed.
    pub root_tol: f64,
}

impl Default for FinderConfig {
    fn default() -> Self {
        FinderConfig {
            shooting: ShootingConfig::default(),
            tol: 1e-10,
            max_iter: 50,
            closure: Closure::FixEta,
            seed: Seed::PerturbativeShift,
            jacobian_step: 1e-7,
            root_tol: DEFAULT_ROOT_TOL,
        }
    }
}

impl FinderConfig {
    pub fn validate(&self) -> Result<()> {
        self.shooting.validate()?;
        if !(self.tol > 0.0) {
            return Err(Error::invalid("finder tolerance must be > 0"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be >= 1"));
        }
        if !(self.jacobian_step > 0.0) {
            return Err(Error::invalid("jacobian_step must be > 0"));
        }
        Ok(())
    }
}

/// A converged solution of the outgoing (or, for absorbers, incoming) boundary-value problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularityResult {
    pub eta: f64,
    pub kappa_star: f64,
    pub ka_star: f64,
    pub n_plus: Complex64,
    /// `|G| / (|N₊| ka)` at the solution.
    pub residual: f64,
    pub gain: GainReport,
    pub iterations: usize,
    pub seed_origin: SeedOrigin,
    pub closure: Closure,
    pub terminal: Terminal,
    pub mode: u32,
}

impl SingularityResult {
    pub const CSV_HEADER: &'static str =
        "eta,kappa_star,K_star,N_plus_re,N_plus_im,intensity,g,g0,residual,iterations";

    pub fn index(&self) -> Complex64 {
        Complex64::new(self.eta, self.kappa_star)
    }

    /// `½|N₊|²`.
    pub fn intensity(&self) -> f64 {
        0.5 * self.n_plus.norm_sqr()
    }

    pub fn csv_row(&self) -> String {
        [
            self.eta,
            self.kappa_star,
            self.ka_star,
            self.n_plus.re,
            self.n_plus.im,
            self.intensity(),
            self.gain.g,
            self.gain.g0,
            self.residual,
        ]
        .iter()
        .map(|v| fmt_f64(*v))
        .chain(std::iter::once(self.iterations.to_string()))
        .collect::<Vec<_>>()
        .join(",")
    }
}

pub fn write_results_csv<W: Write>(results: &[SingularityResult], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", SingularityResult::CSV_HEADER)?;
    for r in results {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

struct Problem<'a> {
    nl: &'a NonlinearitySpec,
    n_plus: Complex64,
    thickness_a: f64,
    terminal: Terminal,
    reference: LinearSingularity,
}

impl Problem<'_> {
    /// Normalized boundary mismatch at `(η, κ, ka)`.
    fn residual(&self, eta: f64, kappa: f64, ka: f64, shooting: &ShootingConfig) -> Result<[f64; 2]> {
        let n = Complex64::new(eta, kappa);
        if self.nl.is_linear() {
            // closed form; the incoming field is the conjugate of an outgoing one
            let mismatch = match self.terminal {
                Terminal::Outgoing => g_pm_linear(n, ka, self.n_plus)?.plus,
                Terminal::Incoming => g_pm_linear(n.conj(), ka, self.n_plus.conj())?.plus.conj(),
            } / (self.n_plus.norm() * ka);
            return Ok([mismatch.re, mismatch.im]);
        }
        let g = nonlinear_bvp::shoot_g(
            n,
            ka,
            self.nl.gamma(ka),
            self.nl,
            self.n_plus,
            self.terminal,
            shooting,
        )?;
        let mismatch = match self.terminal {
            Terminal::Outgoing => g.plus,
            Terminal::Incoming => g.minus,
        } / (self.n_plus.norm() * ka);
        Ok([mismatch.re, mismatch.im])
    }

    fn seed(&self, cfg: &FinderConfig) -> Result<([f64; 3], SeedOrigin)> {
        let lin = &self.reference;
        match cfg.seed {
            Seed::LinearRoot => Ok(([lin.eta0, lin.kappa0, lin.ka0], SeedOrigin::LinearRoot)),
            Seed::User { eta, kappa, ka } => Ok(([eta, kappa, ka], SeedOrigin::UserSupplied)),
            Seed::PerturbativeShift => {
                if self.nl.is_linear() {
                    return Ok(([lin.eta0, lin.kappa0, lin.ka0], SeedOrigin::PerturbativeShift));
                }
                // the absorbing problem is the complex conjugate of the emitting one
                let (laser, n_plus) = match self.terminal {
                    Terminal::Outgoing => (*lin, self.n_plus),
                    Terminal::Incoming => (lin.time_reversed(), self.n_plus.conj()),
                };
                let shift = perturbation::solve_shift(
                    laser.index(),
                    laser.ka0,
                    n_plus,
                    self.nl,
                    cfg.closure.shift_constraint(),
                )?;
                let gamma = self.nl.gamma(laser.ka0);
                let (mut n, ka) = shift.apply(&laser, gamma);
                if self.terminal == Terminal::Incoming {
                    n = n.conj();
                }
                Ok(([n.re, n.im, ka], SeedOrigin::PerturbativeShift))
            }
        }
    }
}

fn norm2(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

fn solve(problem: &Problem<'_>, cfg: &FinderConfig) -> Result<SingularityResult> {
    cfg.validate()?;
    if problem.n_plus.norm() == 0.0 {
        return Err(Error::invalid("N+ must be nonzero for a nonlinear singularity"));
    }
    let (start, seed_origin) = problem.seed(cfg)?;
    let [eta_s, kappa_s, ka_s] = start;

    // unknowns p = (p0, p1) mapped onto (η, κ, ka)
    let unpack = |p: [f64; 2]| -> (f64, f64, f64) {
        match cfg.closure {
            Closure::FixEta => (eta_s, p[0], p[1]),
            Closure::FixK => (p[0], p[1], ka_s),
        }
    };
    let mut p = match cfg.closure {
        Closure::FixEta => [kappa_s, ka_s],
        Closure::FixK => [eta_s, kappa_s],
    };
    let eval = |p: [f64; 2]| -> Result<[f64; 2]> {
        let (eta, kappa, ka) = unpack(p);
        if !(ka > 0.0) {
            return Err(Error::invalid(format!("Newton step left the domain (K = {ka})")));
        }
        problem.residual(eta, kappa, ka, &cfg.shooting)
    };

    let mut r = eval(p)?;
    let mut iterations = 0;
    debug!("finder start {:?} residual {:e}", unpack(p), norm2(r));

    while norm2(r) > cfg.tol {
        if iterations == cfg.max_iter {
            return Err(Error::Convergence {
                what: "nonlinear singularity",
                iterations,
                residual: norm2(r),
                last_0: p[0],
                last_1: p[1],
            });
        }
        iterations += 1;

        let h = cfg.jacobian_step;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut plus = p;
            let mut minus = p;
            plus[j] += h;
            minus[j] -= h;
            let rp = eval(plus)?;
            let rm = eval(minus)?;
            for i in 0..2 {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Degenerate("finite-difference Jacobian is singular".into()));
        }
        let step = [
            (-r[0] * jac[1][1] + r[1] * jac[0][1]) / det,
            (-jac[0][0] * r[1] + jac[1][0] * r[0]) / det,
        ];

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = [p[0] + lambda * step[0], p[1] + lambda * step[1]];
            if let Ok(rt) = eval(trial) {
                if norm2(rt) < norm2(r) {
                    p = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::Convergence {
                what: "nonlinear singularity (line search stalled)",
                iterations,
                residual: norm2(r),
                last_0: p[0],
                last_1: p[1],
            });
        }
        debug!("finder iter {iterations}: {:?} residual {:e}", unpack(p), norm2(r));
    }

    let (eta, kappa, ka) = unpack(p);
    let lin = &problem.reference;
    let g0 = threshold_gain_g0(lin, problem.thickness_a) * (-lin.kappa0).signum();
    Ok(SingularityResult {
        eta,
        kappa_star: kappa,
        ka_star: ka,
        n_plus: problem.n_plus,
        residual: norm2(r),
        gain: GainReport::new(-2.0 * ka * kappa / problem.thickness_a, g0),
        iterations,
        seed_origin,
        closure: cfg.closure,
        terminal: problem.terminal,
        mode: lin.mode,
    })
}

fn check_common(eta: f64, thickness_a: f64) -> Result<()> {
    if !(eta > 1.0) || !eta.is_finite() {
        return Err(Error::invalid(format!("eta must be > 1, got {eta}")));
    }
    if !(thickness_a > 0.0) || !thickness_a.is_finite() {
        return Err(Error::invalid(format!("thickness_a must be > 0, got {thickness_a}")));
    }
    Ok(())
}

/// Nonlinear spectral singularity on branch `mode` emitting amplitude `n_plus`.
pub fn find_nonlinear_singularity(
    eta: f64,
    nl: &NonlinearitySpec,
    n_plus: Complex64,
    thickness_a: f64,
    mode: u32,
    cfg: &FinderConfig,
) -> Result<SingularityResult> {
    check_common(eta, thickness_a)?;
    let reference = find_linear_singularity(eta, mode, cfg.root_tol)?;
    solve(
        &Problem {
            nl,
            n_plus,
            thickness_a,
            terminal: Terminal::Outgoing,
            reference,
        },
        cfg,
    )
}

/// Time-reversed counterpart: the loss `κ > 0` at which a slab fed with
/// amplitude `n_plus` from both sides absorbs everything.
pub fn find_coherent_absorber(
    eta: f64,
    nl: &NonlinearitySpec,
    n_plus: Complex64,
    thickness_a: f64,
    mode: u32,
    cfg: &FinderConfig,
) -> Result<SingularityResult> {
    check_common(eta, thickness_a)?;
    let reference = find_linear_singularity(eta, mode, cfg.root_tol)?.time_reversed();
    solve(
        &Problem {
            nl,
            n_plus,
            thickness_a,
            terminal: Terminal::Incoming,
            reference,
        },
        cfg,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntensitySolution {
    /// `|N₊|²` at which the singularity needs exactly the target gain.
    pub n_plus_sq: f64,
    pub result: SingularityResult,
    pub secant_iterations: usize,
}

const SECANT_MAX_ITER: usize = 40;

fn solve_for_gain(
    eta: f64,
    nl: &NonlinearitySpec,
    g_target: f64,
    thickness_a: f64,
    mode: u32,
    cfg: &FinderConfig,
    terminal: Terminal,
) -> Result<IntensitySolution> {
    check_common(eta, thickness_a)?;
    if nl.is_linear() || !(nl.sigma > 0.0) {
        return Err(Error::invalid(
            "the intensity inverse problem needs a nonlinearity with sigma > 0",
        ));
    }
    let lin = find_linear_singularity(eta, mode, cfg.root_tol)?;
    let threshold = threshold_gain_g0(&lin, thickness_a);
    // gains are signed: an absorber targets g = −α
    let sign = match terminal {
        Terminal::Outgoing => 1.0,
        Terminal::Incoming => -1.0,
    };
    let g0 = sign * threshold;
    if !(sign * g_target > threshold) {
        return Err(Error::BelowThreshold { g_target, g0 });
    }

    let mut cfg = *cfg;
    cfg.closure = Closure::FixK;
    let run = |n2: f64, seed: Seed| -> Result<SingularityResult> {
        let mut c = cfg;
        c.seed = seed;
        let n_plus = Complex64::new(n2.sqrt(), 0.0);
        match terminal {
            Terminal::Outgoing => find_nonlinear_singularity(eta, nl, n_plus, thickness_a, mode, &c),
            Terminal::Incoming => find_coherent_absorber(eta, nl, n_plus, thickness_a, mode, &c),
        }
    };
    let seed_of = |r: &SingularityResult| Seed::User {
        eta: r.eta,
        kappa: r.kappa_star,
        ka: r.ka_star,
    };

    let excess = (g_target - g0).abs();
    let guess = perturbation::emitted_intensity(eta, sign * g_target, threshold, nl.sigma)?.n_plus_sq;
    let mut x0 = guess;
    let mut r0 = run(x0, Seed::PerturbativeShift)?;
    let mut h0 = r0.gain.g - g_target;
    let mut x1 = 1.1 * guess;
    let mut r1 = run(x1, seed_of(&r0))?;
    let mut h1 = r1.gain.g - g_target;
    info!("intensity secant start: |N+|^2 {x0:e} -> {h0:e}, {x1:e} -> {h1:e}");

    // the inner solve only pins g to about cfg.tol relative; asking for more stalls the secant
    let tol = 1e-8 * excess + 10.0 * cfg.tol * threshold;
    let mut iterations = 0;
    while h1.abs() > tol {
        if iterations == SECANT_MAX_ITER {
            return Err(Error::Convergence {
                what: "intensity secant",
                iterations,
                residual: h1.abs(),
                last_0: x0,
                last_1: x1,
            });
        }
        iterations += 1;
        if h1 == h0 {
            return Err(Error::Degenerate("secant slope vanished".into()));
        }
        let mut x2 = x1 - h1 * (x1 - x0) / (h1 - h0);
        if !(x2 > 0.0) {
            x2 = 0.5 * x1.min(x0);
        }
        let r2 = run(x2, seed_of(&r1))?;
        x0 = x1;
        h0 = h1;
        r0 = r1;
        x1 = x2;
        r1 = r2;
        h1 = r1.gain.g - g_target;
        debug!("secant {iterations}: |N+|^2 {x1:e} gain mismatch {h1:e}");
    }
    let _ = r0;
    Ok(IntensitySolution {
        n_plus_sq: x1,
        result: r1,
        secant_iterations: iterations,
    })
}

/// Emitted `|N₊|²` at which the slab lases with gain `g_target > g₀`, at the
/// linear wavelength (the search always uses [`Closure::FixK`]).
pub fn intensity_for_gain(
    eta: f64,
    nl: &NonlinearitySpec,
    g_target: f64,
    thickness_a: f64,
    mode: u32,
    cfg: &FinderConfig,
) -> Result<IntensitySolution> {
    solve_for_gain(eta, nl, g_target, thickness_a, mode, cfg, Terminal::Outgoing)
}

/// Incident `|N₊|²` that a lossy slab with loss coefficient `alpha > g₀`
/// absorbs coherently and completely.
pub fn absorber_intensity_for_loss(
    eta: f64,
    nl: &NonlinearitySpec,
    alpha: f64,
    thickness_a: f64,
    mode: u32,
    cfg: &FinderConfig,
) -> Result<IntensitySolution> {
    solve_for_gain(eta, nl, -alpha, thickness_a, mode, cfg, Terminal::Incoming)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Grid of emitted intensities `½|N₊|²` on one branch, solved by continuation.
    Intensity(Vec<f64>),
    /// Grid of branch indices.
    Mode(Vec<u32>),
}

impl SweepAxis {
    fn values(&self) -> Vec<f64> {
        match self {
            SweepAxis::Intensity(v) => v.clone(),
            SweepAxis::Mode(v) => v.iter().map(|m| *m as f64).collect(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Intensity(_) => "intensity",
            SweepAxis::Mode(_) => "mode",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    pub outcome: std::result::Result<SingularityResult, Error>,
}

pub const SWEEP_CSV_HEADER: &str =
    "eta,kappa_star,K_star,N_plus_re,N_plus_im,intensity,g,g0,residual,iterations,parameter,status";

/// Solve along a monotone grid. Failures are recorded per row; the sweep carries on.
pub fn sweep(
    eta: f64,
    nl: &NonlinearitySpec,
    thickness_a: f64,
    mode: u32,
    axis: &SweepAxis,
    cfg: &FinderConfig,
) -> Result<Vec<SweepRow>> {
    check_common(eta, thickness_a)?;
    let values = axis.values();
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if values.len() > 1 && !(increasing || decreasing) {
        return Err(Error::invalid("sweep grid must be strictly monotone"));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid("sweep values must be finite and non-negative"));
    }

    let linear = NonlinearitySpec::none();
    let mut rows = Vec::with_capacity(values.len());
    let mut previous: Option<SingularityResult> = None;
    for (i, &value) in values.iter().enumerate() {
        let outcome = match axis {
            SweepAxis::Intensity(_) => {
                let mut c = *cfg;
                if let Some(prev) = previous {
                    c.seed = Seed::User {
                        eta: prev.eta,
                        kappa: prev.kappa_star,
                        ka: prev.ka_star,
                    };
                }
                if value == 0.0 {
                    // zero amplitude: the linear root itself
                    find_nonlinear_singularity(eta, &linear, Complex64::new(1.0, 0.0), thickness_a, mode, &c)
                        .map(|mut r| {
                            r.n_plus = Complex64::new(0.0, 0.0);
                            r
                        })
                } else {
                    find_nonlinear_singularity(
                        eta,
                        nl,
                        Complex64::new((2.0 * value).sqrt(), 0.0),
                        thickness_a,
                        mode,
                        &c,
                    )
                }
            }
            SweepAxis::Mode(modes) => {
                find_nonlinear_singularity(eta, nl, Complex64::new(1.0, 0.0), thickness_a, modes[i], cfg)
            }
        };
        if let Ok(r) = &outcome {
            previous = Some(*r);
        }
        rows.push(SweepRow {
            parameter: value,
            outcome,
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(eta: f64, rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        match &row.outcome {
            Ok(r) => writeln!(w, "{},{},ok", r.csv_row(), fmt_f64(row.parameter))?,
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                let nan = fmt_f64(f64::NAN);
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},0,{},error: {}",
                    fmt_f64(eta),
                    nan,
                    nan,
                    nan,
                    nan,
                    nan,
                    nan,
                    nan,
                    nan,
                    fmt_f64(row.parameter),
                    msg
                )?
            }
        }
    }
    Ok(())
}
