use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Prior covariance of the included coefficients, in units of σ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoefCovariance {
    /// V_γ = g I
    Ridge { g: f64 },
    /// V_γ = g (X_γᵀ X_γ)⁻¹
    GPrior { g: f64 },
}

/// Prior on the inclusion indicators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InclusionPrior {
    /// Independent inclusion with probability `h`.
    Fixed { h: f64 },
    /// `h ~ Beta(a, b)`, integrated out.
    BetaHyper { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub coef_cov: CoefCovariance,
    pub inclusion: InclusionPrior,
}

impl PriorSpec {
    pub fn ridge(g: f64, h: f64) -> Self {
        Self {
            coef_cov: CoefCovariance::Ridge { g },
            inclusion: InclusionPrior::Fixed { h },
        }
    }

    pub fn g_prior(g: f64, h: f64) -> Self {
        Self {
            coef_cov: CoefCovariance::GPrior { g },
            inclusion: InclusionPrior::Fixed { h },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = match self.coef_cov {
            CoefCovariance::Ridge { g } | CoefCovariance::GPrior { g } => g,
        };
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Config(format!("g must be positive, got {g}")));
        }
        match self.inclusion {
            InclusionPrior::Fixed { h } if !(h > 0.0 && h < 1.0) => {
                Err(Error::Config(format!("h must lie in (0, 1), got {h}")))
            }
            InclusionPrior::BetaHyper { a, b } if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) => {
                Err(Error::Config(format!("Beta hyperparameters must be positive, got ({a}, {b})")))
            }
            _ => Ok(()),
        }
    }

    /// Prior inclusion probability used to initialise proposals: `h`, or the
    /// Beta prior mean `a / (a + b)`.
    pub fn effective_h(&self) -> f64 {
        match self.inclusion {
            InclusionPrior::Fixed { h } => h,
            InclusionPrior::BetaHyper { a, b } => a / (a + b),
        }
    }

    /// log p(γ) for a model of `size` variables out of `p`.
    pub fn log_model_prior(&self, size: usize, p: usize) -> f64 {
        debug_assert!(size <= p);
        let k = size as f64;
        let rest = (p - size) as f64;
        match self.inclusion {
            InclusionPrior::Fixed { h } => k * h.ln() + rest * (-h).ln_1p(),
            InclusionPrior::BetaHyper { a, b } => ln_beta(a + k, b + rest) - ln_beta(a, b),
        }
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}
