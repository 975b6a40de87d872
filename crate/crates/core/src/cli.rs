//! `specsing` command-line front end.
//!
//! Data goes to `--out` or stdout; diagnostics go to stderr, filtered by the
//! `SPECSING_LOG` environment variable (`error`, `warn`, `info`, `debug`).
//!
//! Exit status: 0 success, 2 invalid input, 3 numerical non-convergence,
//! 4 target gain below threshold (`intensity` only).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{parse_closure, parse_kind, ConfigLayer, OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::linear_scattering::{
    approx_threshold_gain, find_linear_singularity, l_function, threshold_gain_g0, LinearSingularity,
    DEFAULT_ROOT_TOL,
};
use crate::nonlinear_bvp::{self, FieldTrajectory, ShootingConfig, Terminal};
use crate::output::{fmt_f64, json_document};
use crate::perturbation;
use crate::singularity_finder::{
    self, find_coherent_absorber, find_nonlinear_singularity, intensity_for_gain, write_results_csv, Closure,
    FinderConfig, SingularityResult, SweepAxis,
};
use crate::slab_model::{GainReport, NonlinearityKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_BELOW_THRESHOLD: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "specsing", version, about = "Spectral singularities of a planar gain slab")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Write data here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Real part of the refractive index.
    #[arg(long, global = true, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Imaginary part of the refractive index (negative = gain).
    #[arg(long, global = true, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Slab thickness a (cm).
    #[arg(long, global = true)]
    thickness: Option<f64>,
    /// Kerr coefficient (cm²/W); a positive value selects the Kerr response.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Response kind: none or kerr.
    #[arg(long, global = true, value_parser = parse_kind)]
    nonlinearity: Option<NonlinearityKind>,
    /// Emitted amplitude |N+|.
    #[arg(long = "n-plus", global = true)]
    n_plus: Option<f64>,
    /// Branch index m ≥ 1 (K₀ ≈ 2πm/η).
    #[arg(long, global = true)]
    mode: Option<u32>,
    /// RK4 steps across the slab.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Root-finding tolerance on the normalized boundary mismatch.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Scaled wavenumber K = a·k.
    #[arg(long = "ka", global = true)]
    ka: Option<f64>,
    /// Physical wavenumber k (1/cm).
    #[arg(long = "k", global = true)]
    k: Option<f64>,
    /// Which parameter the nonlinear search holds fixed: fix-eta or fix-k.
    #[arg(long, global = true, value_parser = parse_closure)]
    closure: Option<Closure>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    /// Emitted intensity ½|N+|² on the configured branch.
    Intensity,
    /// Branch index m.
    Mode,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Linear threshold gain g₀ and the linear root (κ₀, K₀).
    Threshold,
    /// Linear spectral singularity on the configured branch.
    FindSs,
    /// Nonlinear spectral singularity at amplitude --n-plus.
    FindNss {
        /// Solve the time-reversed problem: a lossy slab absorbing everything.
        #[arg(long)]
        absorber: bool,
    },
    /// Emitted intensity for a gain above threshold, closed form and exact.
    Intensity {
        /// Gain coefficient g (1/cm).
        #[arg(long)]
        gain: f64,
    },
    /// Table of singularities along a monotone grid.
    ///
    /// Columns: eta, kappa_star, K_star, N_plus_re, N_plus_im, intensity
    /// (½|N+|²), g, g0, residual, iterations, parameter (grid value), status
    /// (`ok` or `error: ...`). Failed points keep their row with NaN fields.
    Sweep {
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        /// Number of grid points (0 gives a header-only table).
        #[arg(long)]
        points: usize,
    },
    /// Interior field ζ(x) sampled at every RK4 step, with exterior amplitudes.
    ///
    /// Uses --eta/--kappa and --ka (or --k); with --at-singularity the linear
    /// root of --mode supplies κ and K instead.
    FieldProfile {
        #[arg(long)]
        at_singularity: bool,
    },
}

impl CommonArgs {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            eta: self.eta,
            kappa: self.kappa,
            thickness_a: self.thickness,
            k: self.k,
            ka: self.ka,
            kind: self.nonlinearity,
            sigma: self.sigma,
            n_plus: self.n_plus,
            mode: self.mode,
            steps: self.steps,
            tol: self.tol,
            closure: self.closure,
            format: self.format.map(|f| match f {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            }),
            out: self.out.clone(),
        }
    }

    fn resolve(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        base.overlay(self.layer()).resolve()
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_)
        | Error::SingularParameter(_)
        | Error::Pole
        | Error::InvalidRegime { .. }
        | Error::Config { .. }
        | Error::Io(_) => EXIT_INVALID,
        Error::BelowThreshold { .. } => EXIT_BELOW_THRESHOLD,
        Error::SingularityProximity { .. }
        | Error::Convergence { .. }
        | Error::BlowUp { .. }
        | Error::Quadrature { .. }
        | Error::Degenerate(_) => EXIT_NO_CONVERGENCE,
    }
}

struct Output {
    bytes: Vec<u8>,
    status: i32,
}

impl Output {
    fn ok(bytes: Vec<u8>) -> Self {
        Output { bytes, status: EXIT_OK }
    }
}

fn json_bytes(command: &str, payload: Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(&json_document(command, payload)).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn csv_table(header: &str, rows: &[Vec<String>]) -> Vec<u8> {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s.into_bytes()
}

fn finder_config(rc: &RunConfig) -> FinderConfig {
    FinderConfig {
        shooting: ShootingConfig::with_steps(rc.steps),
        tol: rc.tol,
        closure: rc.closure,
        ..Default::default()
    }
}

fn linear_root(rc: &RunConfig) -> Result<LinearSingularity> {
    find_linear_singularity(rc.slab.eta, rc.mode, DEFAULT_ROOT_TOL.max(rc.tol.min(1e-10)))
}

fn cmd_threshold(rc: &RunConfig, format: OutputFormat) -> Result<Output> {
    let a = rc.slab.thickness_a;
    let lin = linear_root(rc)?;
    let g0 = threshold_gain_g0(&lin, a);
    let g0_approx = approx_threshold_gain(lin.eta0, a);
    let gap = (g0 - g0_approx).abs() / g0;
    let l_residual = l_function(lin.index(), lin.ka0)?.norm();
    Ok(Output::ok(match format {
        OutputFormat::Json => json_bytes(
            "threshold",
            json!({
                "eta": lin.eta0,
                "kappa0": lin.kappa0,
                "K0": lin.ka0,
                "k0": lin.ka0 / a,
                "mode": lin.mode,
                "thickness_a": a,
                "g0": g0,
                "g0_approx": g0_approx,
                "relative_gap": gap,
                "l_residual": l_residual,
            }),
        ),
        OutputFormat::Csv => csv_table(
            "eta,kappa0,K0,k0,mode,g0,g0_approx,relative_gap,l_residual",
            &[vec![
                fmt_f64(lin.eta0),
                fmt_f64(lin.kappa0),
                fmt_f64(lin.ka0),
                fmt_f64(lin.ka0 / a),
                lin.mode.to_string(),
                fmt_f64(g0),
                fmt_f64(g0_approx),
                fmt_f64(gap),
                fmt_f64(l_residual),
            ]],
        ),
    }))
}

fn result_json(r: &SingularityResult) -> Value {
    json!({
        "eta": r.eta,
        "kappa_star": r.kappa_star,
        "K_star": r.ka_star,
        "N_plus_re": r.n_plus.re,
        "N_plus_im": r.n_plus.im,
        "intensity": r.intensity(),
        "g": r.gain.g,
        "g0": r.gain.g0,
        "excess": r.gain.excess,
        "residual": r.residual,
        "iterations": r.iterations,
        "mode": r.mode,
        "closure": r.closure,
        "seed_origin": r.seed_origin,
        "terminal": r.terminal,
    })
}

fn result_output(command: &str, r: &SingularityResult, format: OutputFormat) -> Output {
    Output::ok(match format {
        OutputFormat::Json => json_bytes(command, result_json(r)),
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_results_csv(std::slice::from_ref(r), &mut buf).expect("in-memory write");
            buf
        }
    })
}

fn cmd_find_ss(rc: &RunConfig, format: OutputFormat) -> Result<Output> {
    let a = rc.slab.thickness_a;
    let lin = linear_root(rc)?;
    let g0 = threshold_gain_g0(&lin, a);
    let r = SingularityResult {
        eta: lin.eta0,
        kappa_star: lin.kappa0,
        ka_star: lin.ka0,
        n_plus: Complex64::new(rc.n_plus, 0.0),
        residual: lin.residual,
        gain: GainReport::new(-2.0 * lin.ka0 * lin.kappa0 / a, g0),
        iterations: 0,
        seed_origin: singularity_finder::SeedOrigin::LinearRoot,
        closure: rc.closure,
        terminal: Terminal::Outgoing,
        mode: lin.mode,
    };
    Ok(result_output("find-ss", &r, format))
}

fn cmd_find_nss(rc: &RunConfig, absorber: bool, format: OutputFormat) -> Result<Output> {
    let nl = rc.nonlinearity();
    let n_plus = Complex64::new(rc.n_plus, 0.0);
    let cfg = finder_config(rc);
    let r = if absorber {
        find_coherent_absorber(rc.slab.eta, &nl, n_plus, rc.slab.thickness_a, rc.mode, &cfg)?
    } else {
        find_nonlinear_singularity(rc.slab.eta, &nl, n_plus, rc.slab.thickness_a, rc.mode, &cfg)?
    };
    log::info!("converged in {} iterations, residual {:e}", r.iterations, r.residual);
    Ok(result_output("find-nss", &r, format))
}

fn cmd_intensity(rc: &RunConfig, gain: f64, format: OutputFormat) -> Result<Output> {
    if rc.sigma <= 0.0 || rc.kind != NonlinearityKind::Kerr {
        return Err(Error::Config {
            key: "nonlinearity.sigma".into(),
            message: "the intensity command needs a Kerr response with sigma > 0".into(),
        });
    }
    if !gain.is_finite() {
        return Err(Error::invalid("gain must be finite"));
    }
    let a = rc.slab.thickness_a;
    let lin = linear_root(rc)?;
    let g0 = threshold_gain_g0(&lin, a);
    let closed = perturbation::emitted_intensity(rc.slab.eta, gain, g0, rc.sigma)?;

    let (exact, gap, result, status) = if closed.below_threshold {
        (0.0, 0.0, None, EXIT_BELOW_THRESHOLD)
    } else {
        let sol = intensity_for_gain(rc.slab.eta, &rc.nonlinearity(), gain, a, rc.mode, &finder_config(rc))?;
        let exact = 0.5 * sol.n_plus_sq;
        let gap = (closed.intensity - exact).abs() / exact;
        (exact, gap, Some(sol.result), EXIT_OK)
    };
    if status == EXIT_BELOW_THRESHOLD {
        log::warn!("gain {gain} does not exceed the threshold {g0}; no emission");
    }

    let bytes = match format {
        OutputFormat::Json => json_bytes(
            "intensity",
            json!({
                "g": gain,
                "g0": g0,
                "below_threshold": closed.below_threshold,
                "intensity_closed_form": closed.intensity,
                "intensity_exact": exact,
                "relative_gap": gap,
                "sigma_n_plus_sq": closed.validity_gauge,
                "closed_form_reliable": closed.reliable,
                "singularity": result.as_ref().map(result_json),
            }),
        ),
        OutputFormat::Csv => csv_table(
            "g,g0,below_threshold,intensity_closed_form,intensity_exact,relative_gap,sigma_n_plus_sq",
            &[vec![
                fmt_f64(gain),
                fmt_f64(g0),
                closed.below_threshold.to_string(),
                fmt_f64(closed.intensity),
                fmt_f64(exact),
                fmt_f64(gap),
                fmt_f64(closed.validity_gauge),
            ]],
        ),
    };
    Ok(Output { bytes, status })
}

fn grid(axis: AxisArg, from: f64, to: f64, points: usize) -> Result<SweepAxis> {
    if !from.is_finite() || !to.is_finite() {
        return Err(Error::invalid("sweep bounds must be finite"));
    }
    let values: Vec<f64> = match points {
        0 => vec![],
        1 => vec![from],
        _ => (0..points)
            .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
            .collect(),
    };
    Ok(match axis {
        AxisArg::Intensity => SweepAxis::Intensity(values),
        AxisArg::Mode => {
            let mut modes = Vec::with_capacity(values.len());
            for v in values {
                let m = v.round();
                if m < 1.0 || (v - m).abs() > 1e-9 {
                    return Err(Error::invalid(format!("mode grid hits a non-integer or zero value {v}")));
                }
                modes.push(m as u32);
            }
            SweepAxis::Mode(modes)
        }
    })
}

fn cmd_sweep(rc: &RunConfig, axis: &SweepAxis, format: OutputFormat) -> Result<Output> {
    let rows = singularity_finder::sweep(
        rc.slab.eta,
        &rc.nonlinearity(),
        rc.slab.thickness_a,
        rc.mode,
        axis,
        &finder_config(rc),
    )?;
    let failures = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failures > 0 {
        log::warn!("{failures} of {} sweep points failed", rows.len());
    }
    Ok(Output::ok(match format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            singularity_finder::write_sweep_csv(rc.slab.eta, &rows, &mut buf).expect("in-memory write");
            buf
        }
        OutputFormat::Json => {
            let points: Vec<Value> = rows
                .iter()
                .map(|row| match &row.outcome {
                    Ok(r) => json!({"parameter": row.parameter, "status": "ok", "result": result_json(r)}),
                    Err(e) => json!({"parameter": row.parameter, "status": "error", "message": e.to_string()}),
                })
                .collect();
            json_bytes("sweep", json!({"axis": axis.name(), "points": points}))
        }
    }))
}

fn cmd_field_profile(rc: &RunConfig, at_singularity: bool, format: OutputFormat) -> Result<Output> {
    let (n, ka) = if at_singularity {
        let lin = linear_root(rc)?;
        (lin.index(), lin.ka0)
    } else {
        let ka = rc
            .ka
            .ok_or_else(|| Error::invalid("field-profile needs --ka or --k (or --at-singularity)"))?;
        (rc.slab.index(), ka)
    };
    let nl = rc.nonlinearity();
    let n_plus = Complex64::new(rc.n_plus, 0.0);
    let cfg = ShootingConfig {
        record_trajectory: true,
        ..ShootingConfig::with_steps(rc.steps)
    };
    let shot = nonlinear_bvp::integrate_zeta(n, ka, nl.gamma(ka), &nl, n_plus, &cfg)?;
    let g = nonlinear_bvp::compute_g(&shot.state0, ka)?;
    let amps = nonlinear_bvp::assemble_left_solution(g, ka, n_plus);
    let trajectory = shot.trajectory.unwrap_or(FieldTrajectory { states: vec![] });

    let bytes = match format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            let c = |z: Complex64| format!("{},{}", fmt_f64(z.re), fmt_f64(z.im));
            writeln!(buf, "# eta,kappa,K = {},{},{}", fmt_f64(n.re), fmt_f64(n.im), fmt_f64(ka))?;
            writeln!(buf, "# N_plus = {}", c(amps.n_plus))?;
            writeln!(buf, "# N_minus = {}", c(amps.n_minus))?;
            writeln!(buf, "# N_minus_tilde = {}", c(amps.n_minus_tilde))?;
            trajectory.write_csv(&mut buf)?;
            buf
        }
        OutputFormat::Json => {
            let c = |z: Complex64| json!([z.re, z.im]);
            let samples: Vec<Value> = trajectory
                .states
                .iter()
                .map(|s| json!([s.x, s.psi.re, s.psi.im, s.dpsi.re, s.dpsi.im]))
                .collect();
            json_bytes(
                "field-profile",
                json!({
                    "eta": n.re,
                    "kappa": n.im,
                    "K": ka,
                    "N_plus": c(amps.n_plus),
                    "N_minus": c(amps.n_minus),
                    "N_minus_tilde": c(amps.n_minus_tilde),
                    "columns": ["x", "re_psi", "im_psi", "re_dpsi", "im_dpsi"],
                    "samples": samples,
                }),
            )
        }
    };
    Ok(Output::ok(bytes))
}

fn dispatch(cli: &Cli) -> Result<(Output, Option<PathBuf>)> {
    let rc = cli.common.resolve()?;
    let default_format = match cli.command {
        Command::Sweep { .. } | Command::FieldProfile { .. } => OutputFormat::Csv,
        _ => OutputFormat::Json,
    };
    let format = rc.format.unwrap_or(default_format);
    log::debug!("resolved config: {rc:?}");
    let out = match &cli.command {
        Command::Threshold => cmd_threshold(&rc, format),
        Command::FindSs => cmd_find_ss(&rc, format),
        Command::FindNss { absorber } => cmd_find_nss(&rc, *absorber, format),
        Command::Intensity { gain } => cmd_intensity(&rc, *gain, format),
        Command::Sweep {
            axis,
            from,
            to,
            points,
        } => cmd_sweep(&rc, &grid(*axis, *from, *to, *points)?, format),
        Command::FieldProfile { at_singularity } => cmd_field_profile(&rc, *at_singularity, format),
    }?;
    Ok((out, rc.out))
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SPECSING_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
}

/// Parse `args`, run, write data, and return the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok((out, path)) => {
            let written = match &path {
                Some(path) => std::fs::write(path, &out.bytes)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
                None => std::io::stdout().write_all(&out.bytes).map_err(Error::from),
            };
            match written {
                Ok(()) => out.status,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INVALID
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
