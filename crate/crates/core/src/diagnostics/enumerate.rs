use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::indicator::ModelIndicator;
use crate::model::Posterior;

/// Largest p accepted by [`enumerate_posterior`] unless overridden.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoldSource {
    Enumeration,
    LongRun,
}

/// Reference inclusion probabilities θ*.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldStandard {
    pub theta_star: Vec<f64>,
    pub source: GoldSource,
}

impl GoldStandard {
    pub fn long_run(theta_star: Vec<f64>) -> Self {
        Self {
            theta_star,
            source: GoldSource::LongRun,
        }
    }
}

/// Exact posterior over all 2^p models.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub gold: GoldStandard,
    /// log p(y|γ) + log p(γ), indexed by [`ModelIndicator::code`]; `-inf` for unsupported models.
    pub log_kernels: Vec<f64>,
    /// log Σ_γ p(y|γ) p(γ).
    pub log_normalizer: f64,
    pub mean_model_size: f64,
}

impl Enumeration {
    pub fn p(&self) -> usize {
        self.gold.theta_star.len()
    }

    pub fn pips(&self) -> &[f64] {
        &self.gold.theta_star
    }

    pub fn probability(&self, code: u64) -> f64 {
        (self.log_kernels[code as usize] - self.log_normalizer).exp()
    }

    /// Model probabilities indexed by code.
    pub fn probabilities(&self) -> Vec<f64> {
        self.log_kernels.iter().map(|l| (l - self.log_normalizer).exp()).collect()
    }

    /// Highest-probability models, descending.
    pub fn top_models(&self, k: usize) -> Vec<(ModelIndicator, f64)> {
        let mut codes: Vec<u64> = (0..self.log_kernels.len() as u64).collect();
        codes.sort_by(|a, b| self.log_kernels[*b as usize].total_cmp(&self.log_kernels[*a as usize]).then(a.cmp(b)));
        codes
            .into_iter()
            .take(k)
            .map(|c| (ModelIndicator::from_code(self.p(), c), self.probability(c)))
            .collect()
    }
}

#[inline]
fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

fn log_kernel_or_excluded(post: &Posterior, gamma: &ModelIndicator) -> Result<f64> {
    match post.log_kernel(gamma) {
        Err(Error::RankDeficient { .. }) => Ok(f64::NEG_INFINITY),
        other => other,
    }
}

/// Exact PIPs, model probabilities and normalising constant by visiting every model.
///
/// Models are visited in Gray-code order within contiguous chunks, one bit
/// changing per step; chunks are evaluated under `exec`.
pub fn enumerate_posterior(post: &Posterior, limit: usize, exec: Execution) -> Result<Enumeration> {
    let p = post.p();
    if p > limit || p > 30 {
        return Err(Error::TooManyVariables { p, limit: limit.min(30) });
    }
    let total = 1u64 << p;
    let chunk = 1u64 << p.min(10);
    let chunks = (total / chunk) as usize;
    let parts = exec.map_range(chunks, |c| -> Result<Vec<(u64, f64)>> {
        let start = c as u64 * chunk;
        let mut g = ModelIndicator::from_code(p, gray(start));
        let mut out = Vec::with_capacity(chunk as usize);
        for i in start..start + chunk {
            if i > start {
                g.flip((i.trailing_zeros()) as usize);
            }
            out.push((g.code(), log_kernel_or_excluded(post, &g)?));
        }
        Ok(out)
    });
    let mut log_kernels = vec![f64::NEG_INFINITY; total as usize];
    for part in parts {
        for (code, lk) in part? {
            log_kernels[code as usize] = lk;
        }
    }
    let max = log_kernels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NumericalFailure { size: 0 });
    }
    let mut z = 0.0;
    let mut pip_mass = vec![0.0; p];
    let mut size_mass = 0.0;
    for (code, lk) in log_kernels.iter().enumerate() {
        let w = (lk - max).exp();
        if w == 0.0 {
            continue;
        }
        z += w;
        let mut bits = code as u64;
        size_mass += w * bits.count_ones() as f64;
        while bits != 0 {
            pip_mass[bits.trailing_zeros() as usize] += w;
            bits &= bits - 1;
        }
    }
    Ok(Enumeration {
        gold: GoldStandard {
            theta_star: pip_mass.iter().map(|m| (m / z).clamp(0.0, 1.0)).collect(),
            source: GoldSource::Enumeration,
        },
        log_kernels,
        log_normalizer: max + z.ln(),
        mean_model_size: size_mass / z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, PriorSpec};
    use crate::synthetic::{generate, SyntheticSpec};

    fn posterior(p: usize, seed: u64, prior: PriorSpec) -> Posterior {
        let d = generate(&SyntheticSpec {
            n: 40,
            p,
            signals: 2,
            rho: 0.3,
            seed,
            ..Default::default()
        })
        .unwrap()
        .dataset;
        Posterior::new(d, prior).unwrap()
    }

    #[test]
    fn gray_walk_visits_every_model_once() {
        let post = posterior(11, 1, PriorSpec::ridge(10.0, 0.2));
        let e = enumerate_posterior(&post, 20, Execution::Sequential).unwrap();
        assert!(e.log_kernels.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn matches_direct_summation() {
        let post = posterior(12, 2, PriorSpec::ridge(100.0, 5.0 / 12.0));
        let e = enumerate_posterior(&post, 20, Execution::Parallel).unwrap();
        // Plain binary order, no log-sum-exp shortcut sharing.
        let lk: Vec<f64> = (0..4096u64)
            .map(|c| post.log_kernel(&ModelIndicator::from_code(12, c)).unwrap())
            .collect();
        let m = lk.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = lk.iter().map(|l| (l - m).exp()).sum();
        for j in 0..12 {
            let pj: f64 = (0..4096u64).filter(|c| c >> j & 1 == 1).map(|c| (lk[c as usize] - m).exp()).sum::<f64>() / z;
            assert!((pj - e.pips()[j]).abs() < 1e-12);
        }
        assert!((e.log_normalizer - (m + z.ln())).abs() < 1e-10);
        assert!((e.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let post = posterior(10, 3, PriorSpec::g_prior(40.0, 0.3));
        let a = enumerate_posterior(&post, 20, Execution::Sequential).unwrap();
        let b = enumerate_posterior(&post, 20, Execution::Parallel).unwrap();
        assert_eq!(a.log_kernels, b.log_kernels);
        assert_eq!(a.gold, b.gold);
    }

    #[test]
    fn symmetric_single_variable() {
        // x ⟂ y and g → 0: both marginals coincide.
        let y = vec![1.0, -1.0, 1.0, -1.0];
        let x = vec![1.0, 1.0, -1.0, -1.0];
        let d = Dataset::from_columns(y, x, 1, None).unwrap();
        let post = Posterior::new(d, PriorSpec::g_prior(1e-300, 0.5)).unwrap();
        let e = enumerate_posterior(&post, 20, Execution::Sequential).unwrap();
        assert!((e.pips()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn too_many_variables() {
        let post = posterior(12, 1, PriorSpec::ridge(10.0, 0.2));
        assert!(matches!(
            enumerate_posterior(&post, 11, Execution::Sequential),
            Err(Error::TooManyVariables { p: 12, limit: 11 })
        ));
    }

    #[test]
    fn permutation_equivariant() {
        let post = posterior(8, 5, PriorSpec::ridge(50.0, 0.25));
        let perm = [3, 7, 0, 5, 1, 6, 2, 4];
        let permuted = Posterior::new(post.data().with_permuted_columns(&perm), *post.prior()).unwrap();
        let a = enumerate_posterior(&post, 20, Execution::Sequential).unwrap();
        let b = enumerate_posterior(&permuted, 20, Execution::Sequential).unwrap();
        for (j, &k) in perm.iter().enumerate() {
            assert!((a.pips()[j] - b.pips()[k]).abs() < 1e-10);
        }
        assert!((a.log_normalizer - b.log_normalizer).abs() < 1e-9);
    }

    #[test]
    fn top_models_descending() {
        let post = posterior(6, 8, PriorSpec::ridge(50.0, 0.25));
        let e = enumerate_posterior(&post, 20, Execution::Sequential).unwrap();
        let top = e.top_models(13);
        assert_eq!(top.len(), 13);
        assert!(top.windows(2).all(|w| w[0].1 >= w[1].1));
    }
}
