//! Parametric families: normal, lognormal and Fréchet with location 0.

use crate::error::{MtmError, Result};
use crate::special::{norm_cdf, norm_pdf, norm_ppf};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Family tag without parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Lognormal,
    Frechet,
}

impl Family {
    /// Standardized transform the moment constants are built from.
    pub fn base(self) -> Base {
        match self {
            Family::Normal | Family::Lognormal => Base::Normal,
            Family::Frechet => Base::LogNegLog,
        }
    }

    /// Names of the two estimated parameters, in estimator order.
    pub fn parameter_names(self) -> [&'static str; 2] {
        match self {
            Family::Normal | Family::Lognormal => ["theta", "sigma"],
            Family::Frechet => ["beta", "sigma"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Normal => "normal",
            Family::Lognormal => "lognormal",
            Family::Frechet => "frechet",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = MtmError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(Family::Normal),
            "lognormal" => Ok(Family::Lognormal),
            "frechet" | "fréchet" => Ok(Family::Frechet),
            other => Err(MtmError::Validation(format!("unknown model '{other}'"))),
        }
    }
}

/// Standardized transform `s(u)`. After the data transform `h`, every family
/// satisfies `h(F^{-1}(u)) = A + B s(u)` for a pair `(A, B)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    /// `s(u) = Φ^{-1}(u)`.
    Normal,
    /// `s(u) = log(-log u)`.
    LogNegLog,
}

impl Base {
    pub fn transform(self, u: f64) -> f64 {
        match self {
            Base::Normal => norm_ppf(u),
            Base::LogNegLog => (-u.ln()).ln(),
        }
    }

    /// Derivative of [`Base::transform`].
    pub fn transform_deriv(self, u: f64) -> f64 {
        match self {
            Base::Normal => 1.0 / norm_pdf(norm_ppf(u)),
            Base::LogNegLog => 1.0 / (u * u.ln()),
        }
    }
}

/// A fully parameterized model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Model {
    Normal {
        theta: f64,
        sigma: f64,
    },
    /// Normal on the log scale.
    Lognormal {
        theta: f64,
        sigma: f64,
    },
    /// `F(x) = exp(-(x/sigma)^(-1/beta))`, `x > 0`.
    Frechet {
        beta: f64,
        sigma: f64,
    },
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(MtmError::Validation(format!(
            "{name} must be finite and positive, got {v}"
        )))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(MtmError::Validation(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

impl Model {
    pub fn normal(theta: f64, sigma: f64) -> Result<Self> {
        check_finite("theta", theta)?;
        check_positive("sigma", sigma)?;
        Ok(Model::Normal { theta, sigma })
    }

    pub fn lognormal(theta: f64, sigma: f64) -> Result<Self> {
        check_finite("theta", theta)?;
        check_positive("sigma", sigma)?;
        Ok(Model::Lognormal { theta, sigma })
    }

    pub fn frechet(beta: f64, sigma: f64) -> Result<Self> {
        check_positive("beta", beta)?;
        check_positive("sigma", sigma)?;
        Ok(Model::Frechet { beta, sigma })
    }

    /// Builds a model from its family and the estimator-ordered pair
    /// `(theta, sigma)` or `(beta, sigma)`.
    pub fn from_pair(family: Family, pair: [f64; 2]) -> Result<Self> {
        match family {
            Family::Normal => Model::normal(pair[0], pair[1]),
            Family::Lognormal => Model::lognormal(pair[0], pair[1]),
            Family::Frechet => Model::frechet(pair[0], pair[1]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        Model::from_pair(self.family(), self.pair()).map(|_| ())
    }

    pub fn family(&self) -> Family {
        match self {
            Model::Normal { .. } => Family::Normal,
            Model::Lognormal { .. } => Family::Lognormal,
            Model::Frechet { .. } => Family::Frechet,
        }
    }

    /// Parameters in estimator order: `(theta, sigma)` or `(beta, sigma)`.
    pub fn pair(&self) -> [f64; 2] {
        match *self {
            Model::Normal { theta, sigma } | Model::Lognormal { theta, sigma } => [theta, sigma],
            Model::Frechet { beta, sigma } => [beta, sigma],
        }
    }

    /// `(A, B)` with `h(F^{-1}(u)) = A + B s(u)`.
    pub fn affine(&self) -> (f64, f64) {
        match *self {
            Model::Normal { theta, sigma } | Model::Lognormal { theta, sigma } => (theta, sigma),
            Model::Frechet { beta, sigma } => (sigma.ln(), -beta),
        }
    }

    /// Data transform applied before trimmed moments are taken.
    pub fn transform(&self, x: f64) -> f64 {
        data_transform(self.family(), x)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Model::Normal { theta, sigma } => theta + sigma * norm_ppf(u),
            Model::Lognormal { theta, sigma } => (theta + sigma * norm_ppf(u)).exp(),
            Model::Frechet { beta, sigma } => sigma * (-u.ln()).powf(-beta),
        }
    }

    /// `log F^{-1}(u)`, computed without overflow.
    pub fn log_quantile(&self, u: f64) -> f64 {
        match *self {
            Model::Normal { .. } => self.quantile(u).ln(),
            Model::Lognormal { theta, sigma } => theta + sigma * norm_ppf(u),
            Model::Frechet { beta, sigma } => sigma.ln() - beta * (-u.ln()).ln(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Model::Normal { theta, sigma } => norm_cdf((x - theta) / sigma),
            Model::Lognormal { theta, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    norm_cdf((x.ln() - theta) / sigma)
                }
            }
            Model::Frechet { beta, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-(x / sigma).powf(-1.0 / beta)).exp()
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let ln_sqrt_2pi = 0.5 * (2.0 * PI).ln();
        match *self {
            Model::Normal { theta, sigma } => {
                let z = (x - theta) / sigma;
                -0.5 * z * z - sigma.ln() - ln_sqrt_2pi
            }
            Model::Lognormal { theta, sigma } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let lx = x.ln();
                let z = (lx - theta) / sigma;
                -0.5 * z * z - sigma.ln() - ln_sqrt_2pi - lx
            }
            Model::Frechet { beta, sigma } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let lz = -(x.ln() - sigma.ln()) / beta;
                let z = lz.exp();
                lz - z - beta.ln() - x.ln()
            }
        }
    }

    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        data.iter().map(|&x| self.ln_pdf(x)).sum()
    }

    /// Draws `n` observations by inversion.
    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.quantile(open_unit(rng))).collect()
    }
}

/// Uniform draw on the open interval (0, 1).
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// `x` for the normal family and `log x` otherwise.
pub fn data_transform(family: Family, x: f64) -> f64 {
    match family {
        Family::Normal => x,
        Family::Lognormal | Family::Frechet => x.ln(),
    }
}
