//! Synthetic regression problems with a known generating model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Equicorrelated Gaussian design with `signals` equal nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub signals: usize,
    /// Pairwise correlation between covariates.
    pub rho: f64,
    /// Noise standard deviation.
    pub sigma: f64,
    /// Value of every nonzero coefficient.
    pub coef: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 60,
            p: 12,
            signals: 3,
            rho: 0.0,
            sigma: 1.0,
            coef: 1.0,
            seed: 0,
        }
    }
}

/// The generating model, written next to the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub active: Vec<usize>,
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub rho: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub dataset: Dataset,
    pub truth: Truth,
}

/// Positions of the active variables, spread evenly over `0..p`.
pub fn active_set(p: usize, s: usize) -> Vec<usize> {
    (0..s).map(|k| k * p / s).collect()
}

pub fn generate(spec: &SyntheticSpec) -> Result<Synthetic> {
    let SyntheticSpec {
        n,
        p,
        signals,
        rho,
        sigma,
        coef,
        seed,
    } = *spec;
    if signals > p {
        return Err(Error::Dimension(format!("{signals} signals exceed {p} variables")));
    }
    if !(rho.abs() < 1.0) {
        return Err(Error::Config(format!("correlation must satisfy |rho| < 1, got {rho}")));
    }
    // x = sqrt(1-rho) z + b (Σ_k z_k) 1 has unit variances and correlation rho.
    let pf = p as f64;
    let disc = 1.0 - rho + pf * rho;
    if disc < 0.0 {
        return Err(Error::Config(format!("rho = {rho} is not a valid equicorrelation for p = {p}")));
    }
    let a = (1.0 - rho).sqrt();
    let b = (disc.sqrt() - a) / pf;
    let active = active_set(p, signals);
    let mut beta = vec![0.0; p];
    for &j in &active {
        beta[j] = coef;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; n * p];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; p];
    for i in 0..n {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        let common = b * z.iter().sum::<f64>();
        let mut mean = 0.0;
        for j in 0..p {
            let v = a * z[j] + common;
            x[j * n + i] = v;
            mean += beta[j] * v;
        }
        let e: f64 = rng.sample(StandardNormal);
        y[i] = mean + sigma * e;
    }
    let dataset = Dataset::from_columns(y, x, p, None)?;
    Ok(Synthetic {
        dataset,
        truth: Truth {
            active,
            beta,
            sigma,
            rho,
            seed,
        },
    })
}

/// A design whose posterior has two well-separated modes, `{0, 1}` and `{2, 3}`.
///
/// With `u = x0 + x1` and an independent direction `v`, the columns
/// `x2 = u + v` and `x3 = u - v` reproduce `u` only jointly, so every model
/// between the two modes fits markedly worse. Remaining columns are noise.
pub fn generate_bimodal(n: usize, p: usize, sigma: f64, seed: u64) -> Result<Synthetic> {
    if p < 4 {
        return Err(Error::Dimension("bimodal design needs p >= 4".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.sample(StandardNormal)).collect() };
    let x0 = normal(n);
    let x1 = normal(n);
    let v = normal(n);
    let mut cols: Vec<Vec<f64>> = vec![x0.clone(), x1.clone()];
    cols.push((0..n).map(|i| x0[i] + x1[i] + v[i]).collect());
    cols.push((0..n).map(|i| x0[i] + x1[i] - v[i]).collect());
    for _ in 4..p {
        cols.push(normal(n));
    }
    let noise = normal(n);
    let y: Vec<f64> = (0..n).map(|i| x0[i] + x1[i] + sigma * noise[i]).collect();
    let x: Vec<f64> = cols.into_iter().flatten().collect();
    let mut beta = vec![0.0; p];
    beta[0] = 1.0;
    beta[1] = 1.0;
    Ok(Synthetic {
        dataset: Dataset::from_columns(y, x, p, None)?,
        truth: Truth {
            active: vec![0, 1],
            beta,
            sigma,
            rho: 0.0,
            seed,
        },
    })
}
