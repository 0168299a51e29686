//! Run configuration, read from TOML. Every section is optional; unknown
//! keys are rejected.

use std::path::{Path, PathBuf};

use mdheston::heston::HestonParams;
use mdheston::laws::RandomisationLaw;
use mdheston::oracles::{McConfig, Scheme};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::table::Format;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub heston: HestonSpec,
    pub law: LawSpec,
    pub regime: RegimeSpec,
    /// Maturities.
    pub t: Vec<f64>,
    /// Rescaled strikes or rate arguments.
    pub x: Vec<f64>,
    /// MGF arguments.
    pub u: Vec<f64>,
    pub g: GSpec,
    pub mc: McSpec,
    pub impvol: ImpvolSpec,
    pub verify: VerifySpec,
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            heston: HestonSpec::default(),
            law: LawSpec::default(),
            regime: RegimeSpec::default(),
            t: vec![1e-2, 1e-3, 1e-4],
            x: vec![-1.0, -0.5, 0.5, 1.0],
            u: vec![-1.0, 0.0, 1.0],
            g: GSpec::default(),
            mc: McSpec::default(),
            impvol: ImpvolSpec::default(),
            verify: VerifySpec::default(),
            output: OutputSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct HestonSpec {
    pub kappa: f64,
    pub theta: f64,
    pub xi: f64,
    pub rho: f64,
}

impl Default for HestonSpec {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            theta: 0.04,
            xi: 0.5,
            rho: -0.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LawSpec {
    PointMass {
        v0: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    FoldedGaussian {
        sigma: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    NoncentralChiSquared {
        df: f64,
        noncentrality: f64,
        scale: f64,
    },
    StretchedExponential {
        l1: f64,
        l2: f64,
    },
}

impl Default for LawSpec {
    fn default() -> Self {
        LawSpec::PointMass { v0: 0.04 }
    }
}

impl LawSpec {
    pub fn build(&self) -> mdheston::Result<RandomisationLaw<f64>> {
        match *self {
            LawSpec::PointMass { v0 } => RandomisationLaw::point_mass(v0),
            LawSpec::Uniform { a, b } => RandomisationLaw::uniform(a, b),
            LawSpec::FoldedGaussian { sigma } => RandomisationLaw::folded_gaussian(sigma),
            LawSpec::Gamma { shape, rate } => RandomisationLaw::gamma(shape, rate),
            LawSpec::NoncentralChiSquared {
                df,
                noncentrality,
                scale,
            } => RandomisationLaw::noncentral_chi_squared(df, noncentrality, scale),
            LawSpec::StretchedExponential { l1, l2 } => {
                RandomisationLaw::stretched_exponential(l1, l2)
            }
        }
    }
}

/// Speed exponent: a number, or `"boundary"` for the upper thin-tail
/// exponent. Unset picks a default per tail class.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Speed {
    Exponent(f64),
    Named(NamedSpeed),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedSpeed {
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeSpec {
    pub gamma: Option<Speed>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct GSpec {
    /// `g(t) = t^beta`.
    pub beta: f64,
}

impl Default for GSpec {
    fn default() -> Self {
        Self { beta: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeSpec {
    Euler,
    #[default]
    ExactCir,
}

/// Monte Carlo settings for `price`; `n_paths = 0` disables it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSpec {
    pub n_paths: usize,
    pub n_steps: usize,
    pub scheme: SchemeSpec,
    pub seed: u64,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            n_paths: 0,
            n_steps: 32,
            scheme: SchemeSpec::default(),
            seed: 0,
        }
    }
}

impl McSpec {
    pub fn to_config(self) -> McConfig {
        let scheme = match self.scheme {
            SchemeSpec::Euler => Scheme::FullTruncationEuler,
            SchemeSpec::ExactCir => Scheme::ExactCir,
        };
        McConfig {
            n_paths: self.n_paths,
            n_steps: self.n_steps,
            scheme,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpvolSpec {
    /// Strike exponent for thin and bounded tails: `k = x t^alpha`.
    pub alpha: f64,
}

impl Default for ImpvolSpec {
    fn default() -> Self {
        Self { alpha: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    /// Criterion numbers or names; empty runs all.
    pub criteria: Vec<String>,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        let d = mdheston::experiments::ExperimentOptions::default();
        Self {
            criteria: Vec::new(),
            n_paths: d.n_paths,
            n_steps: d.n_steps,
            seed: d.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Format,
    /// Standard output when unset.
    pub path: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        self.law()?;
        let finite = |name: &str, v: &[f64]| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "{name} grid has non-finite entries"
                )))
            }
        };
        finite("x", &self.x)?;
        finite("u", &self.u)?;
        if self.t.is_empty() || self.t.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
            return Err(CliError::Config(
                "t grid must be non-empty with positive entries".into(),
            ));
        }
        mdheston::sharp::RescalingG::new(self.g.beta).map_err(config_err)?;
        if self.mc.n_steps == 0 || self.verify.n_steps == 0 || self.verify.n_paths < 2 {
            return Err(CliError::Config(
                "Monte Carlo needs n_steps >= 1 and at least two paths".into(),
            ));
        }
        for c in &self.verify.criteria {
            if mdheston::experiments::Criterion::parse(c).is_none() {
                return Err(CliError::Config(format!("unknown criterion {c:?}")));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<HestonParams<f64>, CliError> {
        let h = self.heston;
        HestonParams::new(h.kappa, h.theta, h.xi, h.rho).map_err(config_err)
    }

    pub fn law(&self) -> Result<RandomisationLaw<f64>, CliError> {
        self.law.build().map_err(config_err)
    }
}

pub fn config_err(e: mdheston::Error) -> CliError {
    CliError::Config(e.to_string())
}
