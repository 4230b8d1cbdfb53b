//! Experiment configuration: per-subcommand sections read from TOML or JSON,
//! merged with command-line flags and validated into resolved parameters.

use std::path::Path;

use aklab_core::surfacefields::scenarios::FieldScenario;
use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

/// Raised for invalid configurations; the binary maps it to a usage exit code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

/// A configuration file. Unknown keys are rejected at every level.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub tol_scale: Option<f64>,
    #[serde(default)]
    pub scalarfuncs: ScalarfuncsArgs,
    #[serde(default)]
    pub pointmodel: PointmodelArgs,
    #[serde(default)]
    pub fields: FieldsArgs,
    #[serde(default)]
    pub wang: WangArgs,
    #[serde(default)]
    pub titeica: TiteicaArgs,
}

impl ConfigFile {
    /// Reads `.json` files as JSON and everything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?
        };
        Ok(parsed)
    }
}

macro_rules! merge {
    ($t:ident { $($f:ident),* }) => {
        impl $t {
            /// Field-wise `self` over `fallback`.
            pub fn or(self, fallback: Self) -> Self {
                Self { $($f: self.$f.or(fallback.$f)),* }
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarfuncsArgs {
    /// Background constant `c < 0`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Upper end of the log-spaced `t` sweep.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of sweep samples.
    #[arg(long)]
    pub samples: Option<usize>,
}
merge!(ScalarfuncsArgs { c, t_max, samples });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointmodelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Random samples for the pseudo-Kähler suite.
    #[arg(long)]
    pub samples: Option<usize>,
}
merge!(PointmodelArgs { c, samples });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsArgs {
    /// titeica | patch-holomorphic | random-smooth
    #[arg(long)]
    pub scenario: Option<String>,
    /// Grid size per side.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
}
merge!(FieldsArgs { scenario, n, c });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WangArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// constant | smooth | cubic
    #[arg(long)]
    pub phi: Option<String>,
    /// Newton tolerance on the sup-norm residual.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Background curvature constant.
    #[arg(long, allow_hyphen_values = true)]
    pub k0: Option<f64>,
}
merge!(WangArgs { n, phi, tol, k0 });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiteicaArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub q_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q_im: Option<f64>,
    /// Half-width of the square `[−extent, extent]²`.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Mesh spacing, at most the integrator step cap.
    #[arg(long)]
    pub step: Option<f64>,
}
merge!(TiteicaArgs { q_re, q_im, extent, step });

fn negative(name: &str, c: f64) -> Result<()> {
    if !(c.is_finite() && c < 0.0) {
        return usage(format!("{name} must be a finite negative number, got {c}"));
    }
    Ok(())
}

fn even_size(n: usize, min: usize) -> Result<()> {
    if n < min || n % 2 != 0 {
        return usage(format!("n must be even and at least {min}, got {n}"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarfuncsParams {
    pub c: f64,
    pub t_max: f64,
    pub samples: usize,
}

impl ScalarfuncsParams {
    pub fn resolve(a: ScalarfuncsArgs) -> Result<Self> {
        let p = Self { c: a.c.unwrap_or(-1.0), t_max: a.t_max.unwrap_or(1e4), samples: a.samples.unwrap_or(1000) };
        negative("c", p.c)?;
        if !(p.t_max.is_finite() && p.t_max > 1e-6) {
            return usage(format!("t_max must exceed 1e-6, got {}", p.t_max));
        }
        if p.samples < 2 {
            return usage("samples must be at least 2");
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointmodelParams {
    pub c: f64,
    pub samples: usize,
    pub seed: u64,
}

impl PointmodelParams {
    pub fn resolve(a: PointmodelArgs, seed: u64) -> Result<Self> {
        let p = Self { c: a.c.unwrap_or(-1.0), samples: a.samples.unwrap_or(1000), seed };
        negative("c", p.c)?;
        if p.samples == 0 {
            return usage("samples must be positive");
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldsParams {
    #[serde(serialize_with = "as_display")]
    pub scenario: FieldScenario,
    pub n: usize,
    pub c: f64,
    pub seed: u64,
}

fn as_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl FieldsParams {
    pub fn resolve(a: FieldsArgs, seed: u64) -> Result<Self> {
        let scenario = match a.scenario.as_deref() {
            None => FieldScenario::Titeica,
            Some(s) => s.parse().map_err(UsageError)?,
        };
        let p = Self { scenario, n: a.n.unwrap_or(64), c: a.c.unwrap_or(-1.0), seed };
        negative("c", p.c)?;
        even_size(p.n, 16)?;
        Ok(p)
    }
}

/// Right-hand sides offered by the `wang` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiScenario {
    /// `φ ≡ 2`.
    Constant,
    /// `φ = 2 + sin 2πx sin 2πy`.
    Smooth,
    /// `φ = 2‖q‖²` for `q = (1 + 0.3 cos 2πx) + 0.4i sin 2πy`.
    Cubic,
}

impl std::str::FromStr for PhiScenario {
    type Err = UsageError;
    fn from_str(s: &str) -> std::result::Result<Self, UsageError> {
        match s {
            "constant" => Ok(Self::Constant),
            "smooth" => Ok(Self::Smooth),
            "cubic" => Ok(Self::Cubic),
            other => Err(UsageError(format!("unknown phi scenario `{other}` (constant | smooth | cubic)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WangParams {
    pub n: usize,
    pub phi: PhiScenario,
    pub tol: f64,
    pub k0: f64,
    pub seed: u64,
}

impl WangParams {
    pub fn resolve(a: WangArgs, seed: u64) -> Result<Self> {
        let phi = match a.phi.as_deref() {
            None => PhiScenario::Smooth,
            Some(s) => s.parse()?,
        };
        let p = Self { n: a.n.unwrap_or(64), phi, tol: a.tol.unwrap_or(1e-10), k0: a.k0.unwrap_or(-1.0), seed };
        even_size(p.n, 4)?;
        if !(p.tol.is_finite() && p.tol > 0.0) {
            return usage(format!("tol must be positive, got {}", p.tol));
        }
        if !(p.k0.is_finite() && p.k0 <= 0.0) {
            return usage(format!("k0 must be non-positive, got {}", p.k0));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiteicaParams {
    pub q_re: f64,
    pub q_im: f64,
    pub extent: f64,
    pub step: f64,
    pub seed: u64,
}

impl TiteicaParams {
    pub fn resolve(a: TiteicaArgs, seed: u64) -> Result<Self> {
        let p = Self {
            q_re: a.q_re.unwrap_or(1.0),
            q_im: a.q_im.unwrap_or(0.0),
            extent: a.extent.unwrap_or(1.0),
            step: a.step.unwrap_or(1.0 / 32.0),
            seed,
        };
        if !(p.q_re.is_finite() && p.q_im.is_finite()) || p.q_re.hypot(p.q_im) == 0.0 {
            return usage("q must be finite and nonzero");
        }
        if !(p.step > 0.0 && p.extent > 0.0 && p.extent.is_finite()) {
            return usage("extent and step must be positive");
        }
        let cells = p.extent / p.step;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
            bail!(UsageError(format!("extent {} is not a multiple of step {}", p.extent, p.step)));
        }
        Ok(p)
    }
}
