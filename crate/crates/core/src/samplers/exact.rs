//! Explicit transition matrices for small p, indexed by model code.

use crate::error::{Error, Result};
use crate::indicator::ModelIndicator;
use crate::model::Posterior;
use crate::proposal::{log_proposal_density, ProposalParams};
use crate::samplers::mcmc::multimove_log_proposal_ratio;

const MAX_EXACT_P: usize = 10;

fn log_kernels(post: &Posterior, temperature: f64) -> Result<Vec<f64>> {
    let p = post.p();
    if p > MAX_EXACT_P {
        return Err(Error::TooManyVariables { p, limit: MAX_EXACT_P });
    }
    (0..1u64 << p)
        .map(|c| {
            let g = ModelIndicator::from_code(p, c);
            match post.log_marginal_likelihood(&g) {
                Ok(l) => Ok(temperature * l + post.log_model_prior(&g)),
                Err(Error::RankDeficient { .. }) => Ok(f64::NEG_INFINITY),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Normalised π_t(γ) ∝ p(y|γ)^t p(γ) over all models.
pub fn tempered_distribution(post: &Posterior, temperature: f64) -> Result<Vec<f64>> {
    let lk = log_kernels(post, temperature)?;
    let m = lk.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lk.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / z).collect())
}

fn accept(log_ratio: f64) -> f64 {
    if log_ratio >= 0.0 {
        1.0
    } else {
        log_ratio.exp()
    }
}

fn fill_diagonal(mut m: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for (i, row) in m.iter_mut().enumerate() {
        let off: f64 = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).sum();
        row[i] = 1.0 - off;
    }
    m
}

/// Kernel of the fixed-η product-Bernoulli Metropolis-Hastings sampler.
pub fn ia_transition_matrix(post: &Posterior, eta: &ProposalParams, temperature: f64) -> Result<Vec<Vec<f64>>> {
    let lk = log_kernels(post, temperature)?;
    let p = post.p();
    let n = lk.len();
    let models: Vec<ModelIndicator> = (0..n as u64).map(|c| ModelIndicator::from_code(p, c)).collect();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let fwd = log_proposal_density(&models[i], &models[j], eta);
            let rev = log_proposal_density(&models[j], &models[i], eta);
            let a = if lk[i] == f64::NEG_INFINITY {
                1.0
            } else {
                accept(lk[j] - lk[i] + rev - fwd)
            };
            m[i][j] = fwd.exp() * a;
        }
    }
    Ok(fill_diagonal(m))
}

/// Kernel of the add/remove/swap baseline.
pub fn multimove_transition_matrix(post: &Posterior, temperature: f64) -> Result<Vec<Vec<f64>>> {
    let lk = log_kernels(post, temperature)?;
    let p = post.p();
    let n = lk.len();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        let g = ModelIndicator::from_code(p, i as u64);
        let k = g.size();
        let nf = ((k < p) as usize + (k > 0) as usize + (k > 0 && k < p) as usize) as f64;
        let mut add = |code: u64, q: f64, ratio: f64| {
            let j = code as usize;
            let a = if lk[i] == f64::NEG_INFINITY {
                1.0
            } else {
                accept(lk[j] - lk[i] + ratio)
            };
            row[j] += q * a;
        };
        let ones = g.to_indices();
        let zeros: Vec<usize> = (0..p).filter(|j| !g.get(*j)).collect();
        for &z in &zeros {
            add(i as u64 | 1 << z, 1.0 / (nf * zeros.len() as f64), multimove_log_proposal_ratio(k, p, Some(true)));
        }
        for &o in &ones {
            add(i as u64 & !(1 << o), 1.0 / (nf * ones.len() as f64), multimove_log_proposal_ratio(k, p, Some(false)));
        }
        for &o in &ones {
            for &z in &zeros {
                add(
                    (i as u64 & !(1 << o)) | 1 << z,
                    1.0 / (nf * (ones.len() * zeros.len()) as f64),
                    0.0,
                );
            }
        }
    }
    Ok(fill_diagonal(m))
}

/// max_j |(πᵀP)_j − π_j|.
pub fn stationarity_error(pi: &[f64], kernel: &[Vec<f64>]) -> f64 {
    (0..pi.len())
        .map(|j| {
            let flow: f64 = (0..pi.len()).map(|i| pi[i] * kernel[i][j]).sum();
            (flow - pi[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// max_{i,j} |π_i P_ij − π_j P_ji|.
pub fn detailed_balance_error(pi: &[f64], kernel: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..pi.len() {
        for j in 0..i {
            worst = worst.max((pi[i] * kernel[i][j] - pi[j] * kernel[j][i]).abs());
        }
    }
    worst
}

/// Rows sum to one and entries are non-negative, up to `tol`.
pub fn is_stochastic(kernel: &[Vec<f64>], tol: f64) -> bool {
    kernel
        .iter()
        .all(|row| row.iter().all(|v| *v >= -tol) && (row.iter().sum::<f64>() - 1.0).abs() <= tol)
}
