//! Direct integration of the nonlinear field equation inside the slab.
//!
//! On `[0, 1]` the field obeys `ψ″ = −n² ka² ψ + γ f(|ψ|) ψ`. Exact terminal
//! data is known at `x = 1` (a pure outgoing wave `N₊ e^{i ka x}` to the right),
//! so the equation is integrated backwards to `x = 0` with fixed-step RK4 and
//! the left face is read off through `G± = ζ′(0) ± i ka ζ(0)`.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::fmt_f64;
use crate::slab_model::{FieldState, NonlinearitySpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub const DEFAULT_STEPS: usize = 2048;
pub const MIN_STEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShootingConfig {
    pub steps: usize,
    pub record_trajectory: bool,
    /// Repeat at twice the steps and report the step-doubling error estimate.
    pub richardson_check: bool,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            steps: DEFAULT_STEPS,
            record_trajectory: false,
            richardson_check: false,
        }
    }
}

impl ShootingConfig {
    pub fn with_steps(steps: usize) -> Self {
        ShootingConfig {
            steps,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < MIN_STEPS {
            return Err(Error::invalid(format!(
                "steps must be >= {MIN_STEPS}, got {}",
                self.steps
            )));
        }
        Ok(())
    }
}

/// Which wave the terminal data at `x = 1` describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Terminal {
    /// `ζ(1) = N₊ e^{i ka}`, `ζ′(1) = i ka ζ(1)`: emission to the right.
    Outgoing,
    /// `ζ(1) = N₊ e^{−i ka}`, `ζ′(1) = −i ka ζ(1)`: the time-reversed (absorbing) problem.
    Incoming,
}

impl Terminal {
    fn sign(self) -> f64 {
        match self {
            Terminal::Outgoing => 1.0,
            Terminal::Incoming => -1.0,
        }
    }

    pub fn state(self, ka: f64, n_plus: Complex64) -> FieldState {
        let s = self.sign();
        let psi = n_plus * (I * s * ka).exp();
        FieldState {
            x: 1.0,
            psi,
            dpsi: I * s * ka * psi,
        }
    }
}

/// `G₊` and `G₋` at the left face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GPair {
    pub plus: Complex64,
    pub minus: Complex64,
}

/// Sampled interior solution, ordered by increasing `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldTrajectory {
    pub states: Vec<FieldState>,
}

impl FieldTrajectory {
    pub const CSV_HEADER: &'static str = "x,re_psi,im_psi,re_dpsi,im_dpsi";

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for s in &self.states {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_f64(s.x),
                fmt_f64(s.psi.re),
                fmt_f64(s.psi.im),
                fmt_f64(s.dpsi.re),
                fmt_f64(s.dpsi.im)
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shot {
    pub state0: FieldState,
    pub trajectory: Option<FieldTrajectory>,
    /// Step-doubling estimate of the error in `(ζ(0), ζ′(0)/ka)`, when requested.
    pub error_estimate: Option<f64>,
}

/// Integrate the outgoing solution from `x = 1` down to `x = 0`.
pub fn integrate_zeta(
    n: Complex64,
    ka: f64,
    gamma: f64,
    nl: &NonlinearitySpec,
    n_plus: Complex64,
    cfg: &ShootingConfig,
) -> Result<Shot> {
    integrate_interior(n, ka, gamma, nl, n_plus, Terminal::Outgoing, cfg)
}

pub fn integrate_interior(
    n: Complex64,
    ka: f64,
    gamma: f64,
    nl: &NonlinearitySpec,
    n_plus: Complex64,
    terminal: Terminal,
    cfg: &ShootingConfig,
) -> Result<Shot> {
    cfg.validate()?;
    if !(ka > 0.0) {
        return Err(Error::invalid("K must be > 0"));
    }
    let start = terminal.state(ka, n_plus);
    let (state0, trajectory) = rk4_backward(n, ka, gamma, nl, start, cfg.steps, cfg.record_trajectory)?;

    let error_estimate = if cfg.richardson_check {
        let (fine, _) = rk4_backward(n, ka, gamma, nl, start, 2 * cfg.steps, false)?;
        let d_psi = (state0.psi - fine.psi).norm();
        let d_dpsi = (state0.dpsi - fine.dpsi).norm() / ka;
        Some(d_psi.max(d_dpsi) * 16.0 / 15.0)
    } else {
        None
    };

    Ok(Shot {
        state0,
        trajectory,
        error_estimate,
    })
}

fn rk4_backward(
    n: Complex64,
    ka: f64,
    gamma: f64,
    nl: &NonlinearitySpec,
    start: FieldState,
    steps: usize,
    record: bool,
) -> Result<(FieldState, Option<FieldTrajectory>)> {
    let stiffness = n * n * ka * ka;
    let rhs = |psi: Complex64, dpsi: Complex64| -> (Complex64, Complex64) {
        let nonlinear = if gamma == 0.0 {
            0.0
        } else {
            gamma * nl.response(psi.norm())
        };
        (dpsi, -stiffness * psi + nonlinear * psi)
    };

    let h = -1.0 / steps as f64;
    let mut psi = start.psi;
    let mut dpsi = start.dpsi;
    let mut states = if record {
        let mut v = Vec::with_capacity(steps + 1);
        v.push(start);
        Some(v)
    } else {
        None
    };

    for i in 0..steps {
        let (k1a, k1b) = rhs(psi, dpsi);
        let (k2a, k2b) = rhs(psi + k1a * (0.5 * h), dpsi + k1b * (0.5 * h));
        let (k3a, k3b) = rhs(psi + k2a * (0.5 * h), dpsi + k2b * (0.5 * h));
        let (k4a, k4b) = rhs(psi + k3a * h, dpsi + k3b * h);
        psi += (k1a + 2.0 * k2a + 2.0 * k3a + k4a) * (h / 6.0);
        dpsi += (k1b + 2.0 * k2b + 2.0 * k3b + k4b) * (h / 6.0);

        let x = if i + 1 == steps {
            0.0
        } else {
            1.0 - (i + 1) as f64 / steps as f64
        };
        if !(psi.re.is_finite() && psi.im.is_finite() && dpsi.re.is_finite() && dpsi.im.is_finite())
        {
            return Err(Error::BlowUp { x });
        }
        if let Some(v) = states.as_mut() {
            v.push(FieldState { x, psi, dpsi });
        }
    }

    let state0 = FieldState {
        x: 0.0,
        psi,
        dpsi,
    };
    let trajectory = states.map(|mut v| {
        v.reverse();
        FieldTrajectory { states: v }
    });
    Ok((state0, trajectory))
}

/// `G± = ζ′(0) ± i ka ζ(0)`.
pub fn compute_g(state0: &FieldState, ka: f64) -> Result<GPair> {
    if state0.x != 0.0 {
        return Err(Error::invalid(format!(
            "G± needs the state at x = 0, got x = {}",
            state0.x
        )));
    }
    Ok(GPair {
        plus: state0.dpsi + I * ka * state0.psi,
        minus: state0.dpsi - I * ka * state0.psi,
    })
}

/// Shoot and return `G±` in one call.
pub fn shoot_g(
    n: Complex64,
    ka: f64,
    gamma: f64,
    nl: &NonlinearitySpec,
    n_plus: Complex64,
    terminal: Terminal,
    cfg: &ShootingConfig,
) -> Result<GPair> {
    let shot = integrate_interior(n, ka, gamma, nl, n_plus, terminal, cfg)?;
    compute_g(&shot.state0, ka)
}

/// Plane-wave amplitudes of the left-incident solution
///
/// `Ñ₋` is the incoming amplitude on the left and `N₋` the left-going one, so
/// `Rˡ = N₋/Ñ₋` and `G₊ = 0` means emission with nothing incident.
///
/// ```text
/// ψ(x) = N₋ e^{−i ka x} + Ñ₋ e^{i ka x}   (x < 0)
///        ζ(x)                           (0 ≤ x ≤ 1)
///        N₊ e^{i ka x}                  (x > 1)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringAmplitudes {
    pub n_plus: Complex64,
    pub n_minus: Complex64,
    pub n_minus_tilde: Complex64,
    pub g_plus: Complex64,
    pub g_minus: Complex64,
}

impl ScatteringAmplitudes {
    /// Exterior field on the left.
    pub fn left_field(&self, x: f64, ka: f64) -> Complex64 {
        self.n_minus * (-I * ka * x).exp() + self.n_minus_tilde * (I * ka * x).exp()
    }

    /// Exterior field on the right.
    pub fn right_field(&self, x: f64, ka: f64) -> Complex64 {
        self.n_plus * (I * ka * x).exp()
    }
}

/// `N₋ = i G₋ / (2 ka)`, `Ñ₋ = −i G₊ / (2 ka)`.
pub fn assemble_left_solution(g: GPair, ka: f64, n_plus: Complex64) -> ScatteringAmplitudes {
    ScatteringAmplitudes {
        n_plus,
        n_minus: I * g.minus / (2.0 * ka),
        n_minus_tilde: -I * g.plus / (2.0 * ka),
        g_plus: g.plus,
        g_minus: g.minus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_scattering::{find_linear_singularity, zeta0, DEFAULT_ROOT_TOL};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn linear_limit_matches_closed_form() {
        let (n, ka, np) = (c(3.0, -0.3), 2.1, c(1.0, 0.2));
        let shot = integrate_zeta(
            n,
            ka,
            0.0,
            &NonlinearitySpec::none(),
            np,
            &ShootingConfig::default(),
        )
        .unwrap();
        let exact = zeta0(0.0, n, ka, np).unwrap();
        assert!(rel(shot.state0.psi, exact.psi) < 1e-10);
        assert!(rel(shot.state0.dpsi, exact.dpsi) < 1e-10);
    }

    #[test]
    fn zero_amplitude_stays_zero() {
        let cfg = ShootingConfig {
            record_trajectory: true,
            ..Default::default()
        };
        let shot = integrate_zeta(
            c(3.0, -0.1),
            5.0,
            -0.3,
            &NonlinearitySpec::kerr(0.01),
            c(0.0, 0.0),
            &cfg,
        )
        .unwrap();
        assert!(shot
            .trajectory
            .unwrap()
            .states
            .iter()
            .all(|s| s.psi.norm() == 0.0 && s.dpsi.norm() == 0.0));
    }

    #[test]
    fn trajectory_layout() {
        let cfg = ShootingConfig {
            steps: 64,
            record_trajectory: true,
            richardson_check: false,
        };
        let np = c(0.5, 0.5);
        let ka = 3.0;
        let shot = integrate_zeta(c(2.0, -0.1), ka, 0.0, &NonlinearitySpec::none(), np, &cfg).unwrap();
        let traj = shot.trajectory.unwrap();
        assert_eq!(traj.len(), 65);
        assert_eq!(traj.states[0].x, 0.0);
        assert_eq!(traj.states[64].x, 1.0);
        assert_eq!(traj.states[0], shot.state0);
        let last = traj.states[64];
        assert_eq!(last.psi, np * (I * ka).exp());
        assert!((last.dpsi - I * ka * np * (I * ka).exp()).norm() < 1e-15);
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 66);
        assert!(text.starts_with(FieldTrajectory::CSV_HEADER));
    }

    #[test]
    fn rk4_is_fourth_order() {
        // self-convergence: errors against a 4× reference at 256, 512
        let (n, ka, np) = (c(3.0, -0.1), 6.3, c(1.0, 0.0));
        let kerr = NonlinearitySpec::kerr(1e-3);
        let gamma = kerr.gamma(ka);
        let run = |steps| {
            integrate_zeta(n, ka, gamma, &kerr, np, &ShootingConfig::with_steps(steps))
                .unwrap()
                .state0
                .psi
        };
        let reference = run(4096);
        let e1 = (run(256) - reference).norm();
        let e2 = (run(512) - reference).norm();
        let e3 = (run(1024) - reference).norm();
        let r1 = e1 / e2;
        let r2 = e2 / e3;
        assert!((14.0..=18.0).contains(&r1), "ratio {r1}");
        assert!((14.0..=18.0).contains(&r2), "ratio {r2}");
    }

    #[test]
    fn richardson_estimate_tracks_true_error() {
        let (n, ka, np) = (c(3.0, -0.1), 6.3, c(1.0, 0.0));
        let cfg = ShootingConfig {
            steps: 256,
            record_trajectory: false,
            richardson_check: true,
        };
        let shot = integrate_zeta(n, ka, 0.0, &NonlinearitySpec::none(), np, &cfg).unwrap();
        let exact = zeta0(0.0, n, ka, np).unwrap();
        let err = (shot.state0.psi - exact.psi)
            .norm()
            .max((shot.state0.dpsi - exact.dpsi).norm() / ka);
        let est = shot.error_estimate.unwrap();
        assert!(est > 0.5 * err && est < 2.0 * err, "est {est:e} err {err:e}");
    }

    #[test]
    fn blow_up_is_reported() {
        let r = integrate_zeta(
            c(3.0, 0.0),
            5.0,
            1e6,
            &NonlinearitySpec::kerr(1.0),
            c(10.0, 0.0),
            &ShootingConfig::with_steps(64),
        );
        assert!(matches!(r, Err(Error::BlowUp { .. })));
    }

    #[test]
    fn too_few_steps_rejected() {
        let r = integrate_zeta(
            c(3.0, 0.0),
            5.0,
            0.0,
            &NonlinearitySpec::none(),
            c(1.0, 0.0),
            &ShootingConfig::with_steps(8),
        );
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn compute_g_cases() {
        let ka = 2.5;
        let s = FieldState {
            x: 0.0,
            psi: c(1.0, 0.0),
            dpsi: -I * ka,
        };
        let g = compute_g(&s, ka).unwrap();
        assert!(g.plus.norm() < 1e-15);
        assert!((g.minus - (-2.0 * I * ka)).norm() < 1e-15);
        let s = FieldState {
            x: 0.0,
            psi: c(0.0, 0.0),
            dpsi: c(1.0, 0.0),
        };
        let g = compute_g(&s, ka).unwrap();
        assert_eq!(g.plus, c(1.0, 0.0));
        assert_eq!(g.minus, c(1.0, 0.0));
        let wrong = FieldState { x: 0.5, ..s };
        assert!(compute_g(&wrong, ka).is_err());
    }

    #[test]
    fn shooting_at_linear_root_gives_small_g_plus() {
        let sing = find_linear_singularity(3.0, 1, DEFAULT_ROOT_TOL).unwrap();
        let g = shoot_g(
            sing.index(),
            sing.ka0,
            0.0,
            &NonlinearitySpec::none(),
            c(1.0, 0.0),
            Terminal::Outgoing,
            &ShootingConfig::default(),
        )
        .unwrap();
        assert!(g.plus.norm() <= 1e-8 * sing.ka0);
    }

    #[test]
    fn assemble_amplitudes() {
        let a = assemble_left_solution(
            GPair {
                plus: c(0.0, 0.0),
                minus: c(0.3, -1.0),
            },
            2.0,
            c(1.0, 0.0),
        );
        assert_eq!(a.n_minus_tilde, c(0.0, 0.0));
        assert_eq!(a.n_minus, I * c(0.3, -1.0) / 4.0);

        // empty slab: the incident wave passes unchanged, nothing goes back left
        let ka = 1.7;
        let np = c(0.4, 0.9);
        let shot = integrate_zeta(
            c(1.0, 0.0),
            ka,
            0.0,
            &NonlinearitySpec::none(),
            np,
            &ShootingConfig::default(),
        )
        .unwrap();
        let a = assemble_left_solution(compute_g(&shot.state0, ka).unwrap(), ka, np);
        assert!(a.n_minus.norm() < 1e-12);
        assert!((a.n_minus_tilde - np).norm() < 1e-12);
        // the piecewise field is continuous at both faces
        assert!((a.left_field(0.0, ka) - shot.state0.psi).norm() < 1e-12);
        assert!((a.right_field(1.0, ka) - np * (I * ka).exp()).norm() < 1e-15);
    }
}
