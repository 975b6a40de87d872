//! Flat `key = value` run configuration.
//!
//! ```text
//! # Kerr slab, first branch
//! eta = 3
//! thickness_a = 1.0
//! nonlinearity.kind = kerr
//! nonlinearity.sigma = 1e-13
//! ```
//!
//! Blank lines and `#` comments are ignored. `k` is a physical wavenumber (1/cm),
//! `K` the scaled one `a·k`; at most one may be given. Solver knobs (`mode`,
//! `steps`, `tol`, `n_plus`, `closure`, `format`, `out`) are accepted too.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinear_bvp::{DEFAULT_STEPS, MIN_STEPS};
use crate::singularity_finder::Closure;
use crate::slab_model::{NonlinearityKind, NonlinearitySpec, SlabMedium};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("expected csv or json, got `{s}`")),
        }
    }
}

/// Every recognised setting, each optional. A file and the command line each
/// produce one of these; [`ConfigLayer::overlay`] lets the later one win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub eta: Option<f64>,
    pub kappa: Option<f64>,
    pub thickness_a: Option<f64>,
    pub k: Option<f64>,
    pub ka: Option<f64>,
    pub kind: Option<NonlinearityKind>,
    pub sigma: Option<f64>,
    pub n_plus: Option<f64>,
    pub mode: Option<u32>,
    pub steps: Option<usize>,
    pub tol: Option<f64>,
    pub closure: Option<Closure>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
}

fn cfg_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| cfg_err(key, format!("cannot parse `{raw}`: {e}")))
}

pub fn parse_kind(raw: &str) -> std::result::Result<NonlinearityKind, String> {
    match raw.to_ascii_lowercase().as_str() {
        "none" | "linear" => Ok(NonlinearityKind::None),
        "kerr" => Ok(NonlinearityKind::Kerr),
        "custom" => Err("custom responses are only available through the library API".into()),
        other => Err(format!("unknown nonlinearity kind `{other}` (expected none or kerr)")),
    }
}

pub fn parse_closure(raw: &str) -> std::result::Result<Closure, String> {
    match raw {
        "fix-eta" | "fix_eta" | "eta" => Ok(Closure::FixEta),
        "fix-k" | "fix_k" | "k" | "K" => Ok(Closure::FixK),
        other => Err(format!("unknown closure `{other}` (expected fix-eta or fix-k)")),
    }
}

impl ConfigLayer {
    pub fn parse(text: &str) -> Result<ConfigLayer> {
        let mut layer = ConfigLayer::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                cfg_err(line, format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(cfg_err("", format!("line {}: empty key", lineno + 1)));
            }
            if !seen.insert(key.to_string()) {
                return Err(cfg_err(key, "given more than once"));
            }
            if value.is_empty() {
                return Err(cfg_err(key, "missing value"));
            }
            match key {
                "eta" => layer.eta = Some(parse_value(key, value)?),
                "kappa" => layer.kappa = Some(parse_value(key, value)?),
                "thickness_a" => layer.thickness_a = Some(parse_value(key, value)?),
                "k" => layer.k = Some(parse_value(key, value)?),
                "K" => layer.ka = Some(parse_value(key, value)?),
                "nonlinearity.kind" => layer.kind = Some(parse_kind(value).map_err(|m| cfg_err(key, m))?),
                "nonlinearity.sigma" => layer.sigma = Some(parse_value(key, value)?),
                "n_plus" => layer.n_plus = Some(parse_value(key, value)?),
                "mode" => layer.mode = Some(parse_value(key, value)?),
                "steps" => layer.steps = Some(parse_value(key, value)?),
                "tol" => layer.tol = Some(parse_value(key, value)?),
                "closure" => layer.closure = Some(parse_closure(value).map_err(|m| cfg_err(key, m))?),
                "format" => layer.format = Some(parse_value(key, value)?),
                "out" => layer.out = Some(PathBuf::from(value)),
                _ => return Err(cfg_err(key, "unknown key")),
            }
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<ConfigLayer> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        ConfigLayer::parse(&text)
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: ConfigLayer) -> ConfigLayer {
        // a wavenumber from one layer cancels the other spelling from the layer below
        let wavenumber_overridden = top.k.is_some() || top.ka.is_some();
        ConfigLayer {
            eta: top.eta.or(self.eta),
            kappa: top.kappa.or(self.kappa),
            thickness_a: top.thickness_a.or(self.thickness_a),
            k: if wavenumber_overridden { top.k } else { self.k },
            ka: if wavenumber_overridden { top.ka } else { self.ka },
            kind: top.kind.or(self.kind),
            sigma: top.sigma.or(self.sigma),
            n_plus: top.n_plus.or(self.n_plus),
            mode: top.mode.or(self.mode),
            steps: top.steps.or(self.steps),
            tol: top.tol.or(self.tol),
            closure: top.closure.or(self.closure),
            format: top.format.or(self.format),
            out: top.out.or(self.out),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        RunConfig::from_layer(self)
    }
}

/// Validated parameters for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub slab: SlabMedium,
    pub kind: NonlinearityKind,
    pub sigma: f64,
    /// Scaled wavenumber `a·k`, if pinned.
    pub ka: Option<f64>,
    pub n_plus: f64,
    pub mode: u32,
    pub steps: usize,
    pub tol: f64,
    pub closure: Closure,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_layer(ConfigLayer::default()).expect("defaults are valid")
    }
}

impl RunConfig {
    fn from_layer(l: ConfigLayer) -> Result<RunConfig> {
        let eta = l.eta.unwrap_or(3.0);
        if !(eta.is_finite() && eta > 1.0) {
            return Err(cfg_err("eta", format!("must be > 1, got {eta}")));
        }
        let kappa = l.kappa.unwrap_or(0.0);
        if !kappa.is_finite() {
            return Err(cfg_err("kappa", "must be finite"));
        }
        let thickness_a = l.thickness_a.unwrap_or(1.0);
        if !(thickness_a.is_finite() && thickness_a > 0.0) {
            return Err(cfg_err("thickness_a", format!("must be > 0, got {thickness_a}")));
        }
        let ka = match (l.k, l.ka) {
            (Some(_), Some(_)) => return Err(cfg_err("K", "give either k or K, not both")),
            (Some(k), None) => {
                if !(k.is_finite() && k > 0.0) {
                    return Err(cfg_err("k", format!("must be > 0, got {k}")));
                }
                Some(k * thickness_a)
            }
            (None, Some(ka)) => {
                if !(ka.is_finite() && ka > 0.0) {
                    return Err(cfg_err("K", format!("must be > 0, got {ka}")));
                }
                Some(ka)
            }
            (None, None) => None,
        };
        let sigma = l.sigma.unwrap_or(0.0);
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(cfg_err("nonlinearity.sigma", format!("must be finite and >= 0, got {sigma}")));
        }
        let kind = l.kind.unwrap_or(if sigma > 0.0 {
            NonlinearityKind::Kerr
        } else {
            NonlinearityKind::None
        });
        let n_plus = l.n_plus.unwrap_or(1.0);
        if !(n_plus.is_finite() && n_plus >= 0.0) {
            return Err(cfg_err("n_plus", format!("must be finite and >= 0, got {n_plus}")));
        }
        let mode = l.mode.unwrap_or(1);
        if mode == 0 {
            return Err(cfg_err("mode", "must be >= 1"));
        }
        let steps = l.steps.unwrap_or(DEFAULT_STEPS);
        if steps < MIN_STEPS {
            return Err(cfg_err("steps", format!("must be >= {MIN_STEPS}, got {steps}")));
        }
        let tol = l.tol.unwrap_or(1e-10);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(cfg_err("tol", format!("must be > 0, got {tol}")));
        }
        Ok(RunConfig {
            slab: SlabMedium::new(eta, kappa, thickness_a)?,
            kind,
            sigma,
            ka,
            n_plus,
            mode,
            steps,
            tol,
            closure: l.closure.unwrap_or(Closure::FixEta),
            format: l.format,
            out: l.out,
        })
    }

    pub fn nonlinearity(&self) -> NonlinearitySpec {
        match self.kind {
            NonlinearityKind::Kerr => NonlinearitySpec::kerr(self.sigma),
            _ => NonlinearitySpec::none(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let text = "\
# comment
eta = 3.5
kappa = -0.1   # trailing
thickness_a = 0.5
k = 4
nonlinearity.kind = kerr
nonlinearity.sigma = 1e-13
mode = 2
steps = 4096
tol = 1e-9
closure = fix-k
format = json
";
        let rc = ConfigLayer::parse(text).unwrap().resolve().unwrap();
        assert_eq!(rc.slab.eta, 3.5);
        assert_eq!(rc.slab.kappa, -0.1);
        assert_eq!(rc.ka, Some(2.0));
        assert_eq!(rc.kind, NonlinearityKind::Kerr);
        assert_eq!(rc.mode, 2);
        assert_eq!(rc.steps, 4096);
        assert_eq!(rc.closure, Closure::FixK);
        assert_eq!(rc.format, Some(OutputFormat::Json));
    }

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of(ConfigLayer::parse("eta = three").unwrap_err()), "eta");
        assert_eq!(key_of(ConfigLayer::parse("colour = red").unwrap_err()), "colour");
        assert_eq!(key_of(ConfigLayer::parse("eta = 2\neta = 3").unwrap_err()), "eta");
        assert_eq!(key_of(ConfigLayer::parse("nonlinearity.kind = cubic").unwrap_err()), "nonlinearity.kind");
        assert_eq!(key_of(ConfigLayer::parse("steps = 4").unwrap().resolve().unwrap_err()), "steps");
        assert_eq!(key_of(ConfigLayer::parse("eta = 0.5").unwrap().resolve().unwrap_err()), "eta");
        assert_eq!(key_of(ConfigLayer::parse("k = 1\nK = 1").unwrap().resolve().unwrap_err()), "K");
        assert_eq!(key_of(ConfigLayer::parse("just words").unwrap_err()), "just words");
    }

    #[test]
    fn later_layer_wins() {
        let file = ConfigLayer::parse("eta = 2\nk = 3\nmode = 4").unwrap();
        let flags = ConfigLayer {
            eta: Some(5.0),
            ka: Some(1.5),
            ..Default::default()
        };
        let rc = file.overlay(flags).resolve().unwrap();
        assert_eq!(rc.slab.eta, 5.0);
        assert_eq!(rc.ka, Some(1.5));
        assert_eq!(rc.mode, 4);
    }

    #[test]
    fn sigma_implies_kerr() {
        let rc = ConfigLayer::parse("nonlinearity.sigma = 1e-3").unwrap().resolve().unwrap();
        assert_eq!(rc.kind, NonlinearityKind::Kerr);
        assert!(RunConfig::default().nonlinearity().is_linear());
    }
}
