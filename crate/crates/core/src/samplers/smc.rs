use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adaptation::Adapter;
use crate::diagnostics::PipAccumulator;
use crate::error::{Error, Result};
use crate::model::Target;
use crate::samplers::chain::{draw_from_prior, ia_step_with, log_ml_or_excluded, stream_rng, ModelState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmcConfig {
    pub particles: usize,
    /// Adaptive IA sweeps over the particles per stage.
    pub steps: usize,
    /// Target ESS fraction c.
    pub ess_frac: f64,
    pub seed: u64,
}

impl Default for SmcConfig {
    fn default() -> Self {
        Self {
            particles: 2000,
            steps: 10,
            ess_frac: 0.9,
            seed: 0,
        }
    }
}

impl SmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 2 || self.steps == 0 || !(self.ess_frac > 0.0 && self.ess_frac < 1.0) {
            return Err(Error::Config(format!(
                "need N >= 2, K >= 1 and 0 < c < 1, got N = {}, K = {}, c = {}",
                self.particles, self.steps, self.ess_frac
            )));
        }
        Ok(())
    }
}

/// One tempering stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmcStage {
    pub t: f64,
    /// ESS of the incremental weights that selected `t`.
    pub ess: f64,
    /// log of the mean incremental weight.
    pub log_mean_weight: f64,
    pub mean_acceptance: f64,
    pub mutation_rate: f64,
}

#[derive(Debug, Clone)]
pub struct SmcRun {
    pub particles: Vec<ModelState>,
    pub stages: Vec<SmcStage>,
    /// log Σ_γ p(y|γ) p(γ), as the sum of stage log mean weights.
    pub log_evidence: f64,
    pub adapter: Adapter,
}

impl SmcRun {
    pub fn pips(&self) -> PipAccumulator {
        let mut acc = PipAccumulator::new(self.adapter.params.p());
        for s in &self.particles {
            acc.push(&s.gamma);
        }
        acc
    }
}

/// (Σw)² / Σw² for non-negative weights.
pub fn weights_ess(w: &[f64]) -> f64 {
    let s: f64 = w.iter().sum();
    let s2: f64 = w.iter().map(|v| v * v).sum();
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

/// Incremental weights exp(Δ ℓ_j − max) with their log normaliser max.
fn incremental_weights(log_ml: &[f64], delta: f64) -> (Vec<f64>, f64) {
    let scaled = |l: f64| if l == f64::NEG_INFINITY { l } else { delta * l };
    let m = log_ml.iter().map(|&l| scaled(l)).fold(f64::NEG_INFINITY, f64::max);
    (log_ml.iter().map(|&l| (scaled(l) - m).exp()).collect(), m)
}

/// Indices selected by one stratified sweep u + i/N over the cumulative weights.
pub fn systematic_resample<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let n = weights.len();
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.random::<f64>() / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    let mut cum = weights[0] / total;
    for i in 0..n {
        let pos = u + i as f64 / n as f64;
        while pos >= cum && j + 1 < n {
            j += 1;
            cum += weights[j] / total;
        }
        out.push(j);
    }
    out
}

fn next_increment(log_ml: &[f64], max_delta: f64, target_ess: f64, n: f64) -> Result<f64> {
    let ess = |d: f64| weights_ess(&incremental_weights(log_ml, d).0);
    if ess(max_delta) >= target_ess {
        return Ok(max_delta);
    }
    let (mut lo, mut hi) = (0.0, max_delta);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let e = ess(mid);
        if !e.is_finite() {
            return Err(Error::DegenerateWeights { t: mid });
        }
        if (e - target_ess).abs() <= 0.005 * n {
            return Ok(mid);
        }
        if e > target_ess {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-6 {
            break;
        }
    }
    Ok(if lo > 0.0 { lo } else { hi })
}

/// Adaptive tempering from the model prior to the posterior with resample-move stages.
///
/// The adapter is shared by all particles, persists across stages, and has
/// its counter reset at the start of each stage's moves.
pub fn smc_run(target: &mut Target, adapter: Adapter, cfg: &SmcConfig) -> Result<SmcRun> {
    cfg.validate()?;
    let n = cfg.particles;
    let p = target.p();
    let prior = *target.posterior().prior();
    let mut rng = stream_rng(cfg.seed, 0);
    let mut adapter = adapter;
    let mut particles = Vec::with_capacity(n);
    for _ in 0..n {
        let gamma = draw_from_prior(&prior, p, &mut rng);
        let log_ml = log_ml_or_excluded(target, &gamma)?;
        let log_prior = target.log_prior(&gamma);
        particles.push(ModelState {
            gamma,
            log_ml,
            log_prior,
            temperature: 0.0,
        });
    }
    let mut t_prev = 0.0;
    let mut stages = Vec::new();
    let mut log_evidence = 0.0;
    while t_prev < 1.0 {
        let log_ml: Vec<f64> = particles.iter().map(|s| s.log_ml).collect();
        let delta = next_increment(&log_ml, 1.0 - t_prev, cfg.ess_frac * n as f64, n as f64)?;
        let t = if delta >= 1.0 - t_prev { 1.0 } else { t_prev + delta };
        let (w, shift) = incremental_weights(&log_ml, t - t_prev);
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0 && sum.is_finite() && shift.is_finite()) {
            return Err(Error::DegenerateWeights { t });
        }
        let ess = weights_ess(&w);
        let log_mean_weight = shift + (sum / n as f64).ln();
        log_evidence += log_mean_weight;
        let picks = systematic_resample(&w, &mut rng);
        particles = picks.iter().map(|&j| particles[j].clone()).collect();
        for s in particles.iter_mut() {
            s.temperature = t;
        }
        adapter.counter.reset();
        let (mut acc_sum, mut moved) = (0.0, 0usize);
        for _ in 0..cfg.steps {
            for s in particles.iter_mut() {
                let rec = ia_step_with(s, &mut adapter, target, &mut rng)?;
                acc_sum += rec.a_fwd;
                moved += rec.mutated() as usize;
            }
        }
        let moves = (cfg.steps * n) as f64;
        stages.push(SmcStage {
            t,
            ess,
            log_mean_weight,
            mean_acceptance: acc_sum / moves,
            mutation_rate: moved as f64 / moves,
        });
        t_prev = t;
    }
    Ok(SmcRun {
        particles,
        stages,
        log_evidence,
        adapter,
    })
}
