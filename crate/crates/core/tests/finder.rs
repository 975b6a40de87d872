use specsing::linear_scattering::{find_linear_singularity, DEFAULT_ROOT_TOL};
use specsing::nonlinear_bvp::{assemble_left_solution, shoot_g, ShootingConfig, Terminal};
use specsing::perturbation::{solve_shift, ShiftConstraint};
use specsing::singularity_finder::{
    find_coherent_absorber, find_nonlinear_singularity, sweep, write_sweep_csv, Closure, FinderConfig, Seed,
    SeedOrigin, SweepAxis,
};
use specsing::{Complex64, NonlinearitySpec};

const ETA: f64 = 3.0;

fn unit() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn grid() -> Vec<(Closure, u32, f64)> {
    let mut g = vec![];
    for closure in [Closure::FixEta, Closure::FixK] {
        for mode in 1..=4 {
            for sigma in [1e-4, 1e-3, 5e-3] {
                g.push((closure, mode, sigma));
            }
        }
    }
    g
}

fn cfg(closure: Closure, seed: Seed, steps: usize) -> FinderConfig {
    FinderConfig {
        shooting: ShootingConfig::with_steps(steps),
        closure,
        seed,
        ..Default::default()
    }
}

#[test]
fn converged_points_reflect_nothing() {
    for (closure, mode, sigma) in grid() {
        let kerr = NonlinearitySpec::kerr(sigma);
        let c = cfg(closure, Seed::PerturbativeShift, 2048);
        let r = find_nonlinear_singularity(ETA, &kerr, unit(), 1.0, mode, &c).unwrap();
        assert!(r.residual <= 1e-10);
        let g = shoot_g(r.index(), r.ka_star, kerr.gamma(r.ka_star), &kerr, r.n_plus, Terminal::Outgoing, &c.shooting)
            .unwrap();
        let amps = assemble_left_solution(g, r.ka_star, r.n_plus);
        let ratio = amps.n_minus_tilde.norm() / r.n_plus.norm();
        assert!(ratio <= 1e-8, "{closure:?} m={mode} σ={sigma}: {ratio:e}");
    }
}

#[test]
fn perturbative_seed_needs_no_more_iterations() {
    let pts = grid();
    let mut better_or_equal = 0;
    for &(closure, mode, sigma) in &pts {
        let kerr = NonlinearitySpec::kerr(sigma);
        let p = find_nonlinear_singularity(ETA, &kerr, unit(), 1.0, mode, &cfg(closure, Seed::PerturbativeShift, 2048))
            .unwrap();
        let l = find_nonlinear_singularity(ETA, &kerr, unit(), 1.0, mode, &cfg(closure, Seed::LinearRoot, 2048))
            .unwrap();
        assert_eq!(p.seed_origin, SeedOrigin::PerturbativeShift);
        assert_eq!(l.seed_origin, SeedOrigin::LinearRoot);
        if p.iterations <= l.iterations {
            better_or_equal += 1;
        }
    }
    assert!(better_or_equal * 10 >= pts.len() * 9, "{better_or_equal}/{}", pts.len());
}

#[test]
fn results_do_not_depend_on_step_count() {
    for mode in [1, 2] {
        let kerr = NonlinearitySpec::kerr(1e-3);
        let a = find_nonlinear_singularity(ETA, &kerr, unit(), 1.0, mode, &cfg(Closure::FixEta, Seed::PerturbativeShift, 2048))
            .unwrap();
        let b = find_nonlinear_singularity(ETA, &kerr, unit(), 1.0, mode, &cfg(Closure::FixEta, Seed::PerturbativeShift, 4096))
            .unwrap();
        assert!((a.kappa_star - b.kappa_star).abs() <= 1e-9, "{:e}", (a.kappa_star - b.kappa_star).abs());
        assert!((a.ka_star - b.ka_star).abs() <= 1e-9, "{:e}", (a.ka_star - b.ka_star).abs());
    }
}

#[test]
fn kerr_pushes_kappa_further_into_gain() {
    for (closure, mode, sigma) in grid() {
        let kerr = NonlinearitySpec::kerr(sigma);
        let lin = find_linear_singularity(ETA, mode, DEFAULT_ROOT_TOL).unwrap();
        let r = find_nonlinear_singularity(ETA, &kerr, unit(), 1.0, mode, &cfg(closure, Seed::PerturbativeShift, 2048))
            .unwrap();
        assert!(r.kappa_star < lin.kappa0 && lin.kappa0 < 0.0, "{closure:?} m={mode} σ={sigma}");
        assert!(r.gain.g > r.gain.g0);
    }
}

#[test]
fn zero_strength_reproduces_the_linear_root() {
    for mode in 1..=5 {
        let lin = find_linear_singularity(ETA, mode, DEFAULT_ROOT_TOL).unwrap();
        let r = find_nonlinear_singularity(ETA, &NonlinearitySpec::kerr(0.0), unit(), 1.0, mode, &FinderConfig::default())
            .unwrap();
        assert!((r.kappa_star - lin.kappa0).abs() <= 1e-9);
        assert!((r.ka_star - lin.ka0).abs() <= 1e-9);
    }
}

#[test]
fn distance_to_first_order_prediction_is_quadratic() {
    let lin = find_linear_singularity(ETA, 2, DEFAULT_ROOT_TOL).unwrap();
    let dist: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&sigma| {
            let kerr = NonlinearitySpec::kerr(sigma);
            let shift = solve_shift(lin.index(), lin.ka0, unit(), &kerr, ShiftConstraint::FixK).unwrap();
            let (n1, _) = shift.apply(&lin, kerr.gamma(lin.ka0));
            let r = find_nonlinear_singularity(ETA, &kerr, unit(), 1.0, 2, &cfg(Closure::FixK, Seed::LinearRoot, 8192))
                .unwrap();
            (r.index() - n1).norm()
        })
        .collect();
    for w in dist.windows(2) {
        let q = w[0] / w[1];
        assert!((3.5..=4.5).contains(&q), "{q}");
    }
}

#[test]
fn absorber_is_the_conjugate_laser() {
    let kerr = NonlinearitySpec::kerr(2e-3);
    let np = Complex64::new(0.8, 0.3);
    for closure in [Closure::FixEta, Closure::FixK] {
        let c = cfg(closure, Seed::PerturbativeShift, 2048);
        let laser = find_nonlinear_singularity(ETA, &kerr, np.conj(), 1.0, 2, &c).unwrap();
        let cpa = find_coherent_absorber(ETA, &kerr, np, 1.0, 2, &c).unwrap();
        assert_eq!(cpa.terminal, Terminal::Incoming);
        assert!((laser.kappa_star + cpa.kappa_star).abs() <= 1e-10);
        assert!((laser.ka_star - cpa.ka_star).abs() <= 1e-10);
        assert!((laser.gain.g + cpa.gain.g).abs() <= 1e-9);
        assert!(cpa.gain.g0 < 0.0);
    }
}

#[test]
fn intensity_sweep_continues_from_the_previous_point() {
    let kerr = NonlinearitySpec::kerr(1e-3);
    let grid = vec![0.0, 0.5, 1.0, 1.5, 2.0];
    let rows = sweep(ETA, &kerr, 1.0, 1, &SweepAxis::Intensity(grid.clone()), &FinderConfig::default()).unwrap();
    assert_eq!(rows.len(), grid.len());
    let mut last_kappa = 0.0;
    for (row, x) in rows.iter().zip(&grid) {
        let r = row.outcome.as_ref().unwrap();
        assert!((r.intensity() - x).abs() <= 1e-12 * x.max(1.0));
        assert!(r.kappa_star < last_kappa);
        last_kappa = r.kappa_star;
    }
    for row in &rows[1..] {
        assert_eq!(row.outcome.as_ref().unwrap().seed_origin, SeedOrigin::UserSupplied);
    }
    let mut buf = Vec::new();
    write_sweep_csv(ETA, &rows, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), grid.len() + 1);
}

#[test]
fn linear_mode_sweep_reproduces_the_ladder() {
    let rows = sweep(
        ETA,
        &NonlinearitySpec::none(),
        1.0,
        1,
        &SweepAxis::Mode((1..=6).collect()),
        &FinderConfig::default(),
    )
    .unwrap();
    for (row, m) in rows.iter().zip(1..) {
        let r = row.outcome.as_ref().unwrap();
        let lin = find_linear_singularity(ETA, m, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(r.mode, m);
        assert!((r.ka_star - lin.ka0).abs() <= 1e-9);
        assert!((r.kappa_star - lin.kappa0).abs() <= 1e-9);
    }
}

#[test]
fn intensity_sweep_slope_matches_leading_bracket() {
    // fixed-wavelength excess per unit intensity against the closed-form bracket
    use specsing::perturbation::kerr_threshold;
    let mode = 10;
    let sigma = 1e-6;
    let kerr = NonlinearitySpec::kerr(sigma);
    let c = cfg(Closure::FixK, Seed::PerturbativeShift, 8192);
    let rows = sweep(ETA, &kerr, 1.0, mode, &SweepAxis::Intensity(vec![0.0, 50.0, 100.0]), &c).unwrap();
    let g: Vec<f64> = rows.iter().map(|r| r.outcome.as_ref().unwrap().gain.g).collect();
    let slope = (g[2] - g[0]) / 100.0;
    let lin = find_linear_singularity(ETA, mode, DEFAULT_ROOT_TOL).unwrap();
    let t = kerr_threshold(ETA, lin.ka0, sigma, (2.0f64 * 100.0).sqrt(), 1.0);
    let predicted = (t.g_leading - t.g0) / 100.0;
    let rel = (slope - predicted).abs() / predicted;
    assert!(rel < 2e-2, "slope {slope:e} vs {predicted:e} ({rel:e})");
}
