//! Physical description of the slab and the map to dimensionless variables.
//!
//! Lengths are in cm, wavenumbers and gain coefficients in 1/cm, and the Kerr
//! coefficient `sigma` in cm²/W. Inside the slab the scaled position is
//! `x = z / a ∈ [0, 1]`, the scaled wavenumber is `ka = a·k`, and the field
//! equation reads
//!
//! ```text
//! -ψ'' + z ψ + γ f(|ψ|) ψ = ka² ψ,   z = ka²(1 − n²),   γ = −ka² σ.
//! ```

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Homogeneous slab of thickness `thickness_a` with complex index `eta + i·kappa`.
///
/// `kappa < 0` is gain, `kappa > 0` is loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabMedium {
    pub eta: f64,
    pub kappa: f64,
    pub thickness_a: f64,
}

impl SlabMedium {
    pub fn new(eta: f64, kappa: f64, thickness_a: f64) -> Result<Self> {
        let medium = SlabMedium {
            eta,
            kappa,
            thickness_a,
        };
        medium.validate()?;
        Ok(medium)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 1.0) {
            return Err(Error::invalid(format!("eta must be > 1, got {}", self.eta)));
        }
        if !self.kappa.is_finite() {
            return Err(Error::invalid("kappa must be finite"));
        }
        if !(self.thickness_a.is_finite() && self.thickness_a > 0.0) {
            return Err(Error::invalid(format!(
                "thickness_a must be > 0, got {}",
                self.thickness_a
            )));
        }
        Ok(())
    }

    /// Complex refractive index `n = eta + i·kappa`.
    pub fn index(&self) -> Complex64 {
        Complex64::new(self.eta, self.kappa)
    }

    pub fn with_index(&self, n: Complex64) -> SlabMedium {
        SlabMedium {
            eta: n.re,
            kappa: n.im,
            thickness_a: self.thickness_a,
        }
    }
}

/// A spectral coordinate: physical wavenumber `k` and its scaled form `ka = a·k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePoint {
    pub k: f64,
    pub ka: f64,
}

impl WavePoint {
    pub fn from_k(medium: &SlabMedium, k: f64) -> Result<Self> {
        check_positive("k", k)?;
        Ok(WavePoint {
            k,
            ka: medium.thickness_a * k,
        })
    }

    pub fn from_ka(medium: &SlabMedium, ka: f64) -> Result<Self> {
        check_positive("K", ka)?;
        Ok(WavePoint {
            k: ka / medium.thickness_a,
            ka,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearityKind {
    None,
    Kerr,
    Custom,
}

impl fmt::Display for NonlinearityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NonlinearityKind::None => "none",
            NonlinearityKind::Kerr => "kerr",
            NonlinearityKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

pub type ResponseFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Intensity-dependent index correction `n² → n² + σ f(|ψ|)`.
#[derive(Clone)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    pub sigma: f64,
    custom_f: Option<ResponseFn>,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearitySpec")
            .field("kind", &self.kind)
            .field("sigma", &self.sigma)
            .finish()
    }
}

impl NonlinearitySpec {
    pub fn none() -> Self {
        NonlinearitySpec {
            kind: NonlinearityKind::None,
            sigma: 0.0,
            custom_f: None,
        }
    }

    pub fn kerr(sigma: f64) -> Self {
        NonlinearitySpec {
            kind: NonlinearityKind::Kerr,
            sigma,
            custom_f: None,
        }
    }

    /// A user-supplied response `f`. It must be finite on the amplitudes the
    /// field actually reaches; only sampled values are checked.
    pub fn custom<F>(sigma: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        NonlinearitySpec {
            kind: NonlinearityKind::Custom,
            sigma,
            custom_f: Some(Arc::new(f)),
        }
    }

    pub fn is_linear(&self) -> bool {
        self.kind == NonlinearityKind::None || self.sigma == 0.0
    }

    /// Response `f(|ψ|)`.
    #[inline]
    pub fn response(&self, amplitude: f64) -> f64 {
        match self.kind {
            NonlinearityKind::None => 0.0,
            NonlinearityKind::Kerr => amplitude * amplitude,
            NonlinearityKind::Custom => self.custom_f.as_ref().map_or(0.0, |f| f(amplitude)),
        }
    }

    /// Scaled strength `γ = −ka² σ`; zero for `kind = None`.
    pub fn gamma(&self, ka: f64) -> f64 {
        match self.kind {
            NonlinearityKind::None => 0.0,
            _ => -ka * ka * self.sigma,
        }
    }
}

/// Field value and derivative at a scaled position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub x: f64,
    pub psi: Complex64,
    pub dpsi: Complex64,
}

/// Gain bookkeeping for a singularity. Gains are signed: loss shows up as `g < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub g: f64,
    pub g0: f64,
    pub excess: f64,
}

impl GainReport {
    pub fn new(g: f64, g0: f64) -> Self {
        GainReport {
            g,
            g0,
            excess: g - g0,
        }
    }

    pub fn relative_excess(&self) -> f64 {
        self.excess / self.g0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimensionless {
    pub ka: f64,
    pub z: Complex64,
    pub gamma: f64,
}

pub fn scale_to_dimensionless(
    medium: &SlabMedium,
    k: f64,
    nl: &NonlinearitySpec,
) -> Result<Dimensionless> {
    check_positive("k", k)?;
    check_positive("thickness_a", medium.thickness_a)?;
    let ka = medium.thickness_a * k;
    let n = medium.index();
    Ok(Dimensionless {
        ka,
        z: (1.0 - n * n) * (ka * ka),
        gamma: nl.gamma(ka),
    })
}

/// `g = −2·ka·kappa / a`.
pub fn gain_from_kappa(medium: &SlabMedium, ka: f64) -> f64 {
    -2.0 * ka * medium.kappa / medium.thickness_a
}

/// The time-reversed medium: gain becomes loss of the same magnitude.
pub fn time_reverse_to_cpa(medium: &SlabMedium) -> SlabMedium {
    SlabMedium {
        kappa: -medium.kappa,
        ..*medium
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be > 0, got {v}")))
    }
}
