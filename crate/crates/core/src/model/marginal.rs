//! Conjugate marginal likelihood over model space.
//!
//! With `y` and the columns of `X` centred (flat prior on the intercept),
//! `β_γ | σ² ~ N(0, σ² V_γ)` and `p(σ²) ∝ σ⁻²`:
//!
//! ```text
//! Λ_γ = X_γᵀX_γ + V_γ⁻¹
//! S_γ = yᵀy − yᵀX_γ Λ_γ⁻¹ X_γᵀy
//! log p(y|γ) = c − ½ log|V_γ| − ½ log|Λ_γ| − ((n−1)/2) log S_γ
//! ```
//!
//! The constant `c` is shared by every model and dropped.

use nalgebra::{DMatrix, DVector};

use super::data::Dataset;
use super::prior::{CoefCovariance, PriorSpec};
use crate::error::{Error, Result};
use crate::indicator::ModelIndicator;

/// Full Gram matrices are precomputed up to this many columns.
const GRAM_CACHE_MAX_P: usize = 1024;
/// Relative pivot floor below which the g-prior Gram matrix is treated as singular.
const RANK_TOL: f64 = 1e-10;

/// Immutable evaluator of the unnormalised log posterior over models.
#[derive(Debug, Clone)]
pub struct Posterior {
    data: Dataset,
    prior: PriorSpec,
    xty: Vec<f64>,
    yty: f64,
    gram: Option<Vec<f64>>,
}

impl Posterior {
    /// Centres `data` if it is not already centred.
    pub fn new(data: Dataset, prior: PriorSpec) -> Result<Self> {
        prior.validate()?;
        let data = if data.is_centered() { data } else { data.centered() };
        let p = data.p();
        let y = data.y();
        let yty = dot(y, y);
        if yty <= 0.0 {
            return Err(Error::Data("response has zero variance".into()));
        }
        let xty = (0..p).map(|j| dot(data.column(j), y)).collect();
        let gram = (p <= GRAM_CACHE_MAX_P).then(|| {
            let mut g = vec![0.0; p * p];
            for a in 0..p {
                for b in a..p {
                    let v = dot(data.column(a), data.column(b));
                    g[a * p + b] = v;
                    g[b * p + a] = v;
                }
            }
            g
        });
        Ok(Self {
            data,
            prior,
            xty,
            yty,
            gram,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn p(&self) -> usize {
        self.data.p()
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    #[inline]
    fn gram_entry(&self, a: usize, b: usize) -> f64 {
        match &self.gram {
            Some(g) => g[a * self.p() + b],
            None => dot(self.data.column(a), self.data.column(b)),
        }
    }

    pub fn log_model_prior(&self, gamma: &ModelIndicator) -> f64 {
        self.prior.log_model_prior(gamma.size(), self.p())
    }

    pub fn log_marginal_likelihood(&self, gamma: &ModelIndicator) -> Result<f64> {
        if gamma.len() != self.p() {
            return Err(Error::Dimension(format!("model over {} variables, data has {}", gamma.len(), self.p())));
        }
        let idx: Vec<usize> = gamma.to_indices();
        self.log_marginal_for_indices(&idx)
    }

    /// Marginal likelihood of the model given by ascending column indices.
    pub fn log_marginal_for_indices(&self, idx: &[usize]) -> Result<f64> {
        let half_n1 = 0.5 * (self.n() - 1) as f64;
        let k = idx.len();
        if k == 0 {
            return Ok(-half_n1 * self.yty.ln());
        }
        let gram = DMatrix::from_fn(k, k, |a, b| self.gram_entry(idx[a], idx[b]));
        let xty = DVector::from_iterator(k, idx.iter().map(|&j| self.xty[j]));
        let kf = k as f64;
        let (log_det_terms, fit) = match self.prior.coef_cov {
            CoefCovariance::Ridge { g } => {
                let mut lambda = gram;
                for i in 0..k {
                    lambda[(i, i)] += 1.0 / g;
                }
                let chol = match lambda.clone().cholesky() {
                    Some(c) => c,
                    None => {
                        let jitter = 1e-10 * lambda.trace() / kf;
                        for i in 0..k {
                            lambda[(i, i)] += jitter;
                        }
                        lambda.cholesky().ok_or(Error::NumericalFailure { size: k })?
                    }
                };
                let l = chol.l_dirty();
                let log_det_lambda: f64 = 2.0 * (0..k).map(|i| l[(i, i)].ln()).sum::<f64>();
                let z = l.solve_lower_triangular(&xty).ok_or(Error::NumericalFailure { size: k })?;
                (-0.5 * kf * g.ln() - 0.5 * log_det_lambda, z.norm_squared())
            }
            CoefCovariance::GPrior { g } => {
                // Λ = (1 + 1/g) XᵀX, so the determinant terms collapse to −(k/2) log(1+g).
                if k + 1 > self.n() {
                    return Err(Error::RankDeficient { size: k });
                }
                let max_diag = (0..k).map(|i| gram[(i, i)]).fold(0.0f64, f64::max);
                let chol = gram.cholesky().ok_or(Error::RankDeficient { size: k })?;
                let l = chol.l_dirty();
                let min_pivot = (0..k).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
                if !(min_pivot > RANK_TOL * max_diag) {
                    return Err(Error::RankDeficient { size: k });
                }
                let z = l.solve_lower_triangular(&xty).ok_or(Error::RankDeficient { size: k })?;
                (-0.5 * kf * g.ln_1p(), g / (1.0 + g) * z.norm_squared())
            }
        };
        let s = self.yty - fit;
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NumericalFailure { size: k });
        }
        Ok(log_det_terms - half_n1 * s.ln())
    }

    /// log p(y|γ) + log p(γ), computed fresh.
    pub fn log_kernel(&self, gamma: &ModelIndicator) -> Result<f64> {
        Ok(self.log_marginal_likelihood(gamma)? + self.log_model_prior(gamma))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
