use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::adaptation::Adapter;
use crate::diagnostics::{self, EssEstimate, MutationRate, PipAccumulator, PosteriorSummary};
use crate::error::{Error, Result};
use crate::indicator::ModelIndicator;
use crate::model::Target;
use crate::samplers::chain::{ia_step, log_ml_or_excluded, stream_rng, ChainState, InitialModel, ModelState, StepRecord};

/// Seed for replicate `i` of a run seeded with `seed`.
pub fn replicate_seed(seed: u64, i: u64) -> u64 {
    stream_rng(seed, (1 << 40) + i).next_u64()
}

/// Budget and bookkeeping for single- and multiple-chain runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    /// Iterations summed over all chains.
    pub iterations: u64,
    /// Burn-in summed over all chains.
    pub burnin: u64,
    pub thin: u64,
    pub chains: usize,
    pub seed: u64,
    pub init: InitialModel,
    /// Keep every step record (needed for traces and ESS).
    pub keep_records: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 100_000,
            burnin: 10_000,
            thin: 1,
            chains: 1,
            seed: 0,
            init: InitialModel::Prior,
            keep_records: true,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::Config("need at least one chain".into()));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.iterations / self.chains as u64 == 0 {
            return Err(Error::Config(format!(
                "{} iterations cannot be split over {} chains",
                self.iterations, self.chains
            )));
        }
        if self.burnin >= self.iterations {
            return Err(Error::Config("burn-in must be shorter than the run".into()));
        }
        Ok(())
    }

    pub fn per_chain_iterations(&self) -> u64 {
        self.iterations / self.chains as u64
    }

    pub fn per_chain_burnin(&self) -> u64 {
        self.burnin / self.chains as u64
    }
}

/// Output of [`mca_run`] or [`multimove_run`].
#[derive(Debug, Clone)]
pub struct McmcRun {
    pub per_chain_iterations: u64,
    pub per_chain_burnin: u64,
    /// Iterations dropped because the budget was not divisible by the chain count.
    pub truncated: u64,
    /// All step records per chain, burn-in included; empty unless requested.
    pub records: Vec<Vec<StepRecord>>,
    /// Post-burn-in, thinned states pooled over chains.
    pub pips: PipAccumulator,
    /// Final shared adapter; `None` for non-adaptive samplers.
    pub adapter: Option<Adapter>,
    pub final_states: Vec<ModelState>,
    moved: u64,
    rb_sum: f64,
    counted: u64,
}

impl McmcRun {
    pub fn summary(&self, top: usize) -> Result<PosteriorSummary> {
        self.pips.summary(top)
    }

    /// Pooled post-burn-in mutation rate.
    pub fn mutation_rate(&self) -> Result<MutationRate> {
        if self.counted == 0 {
            return Err(Error::EmptyTrace);
        }
        let n = self.counted as f64;
        Ok(MutationRate {
            realized: self.moved as f64 / n,
            rao_blackwell: self.rb_sum / n,
        })
    }

    /// Post-burn-in series of a step statistic, one per chain.
    pub fn post_burnin_series(&self, stat: impl Fn(&StepRecord) -> f64) -> Vec<Vec<f64>> {
        self.records
            .iter()
            .map(|r| r[self.per_chain_burnin as usize..].iter().map(&stat).collect())
            .collect()
    }

    /// ESS of the model-size trace, summed over chains.
    pub fn ess_model_size(&self) -> Result<EssEstimate> {
        diagnostics::pooled_ess(&self.post_burnin_series(|r| r.model_size as f64))
    }

    pub fn ess_log_kernel(&self) -> Result<EssEstimate> {
        diagnostics::pooled_ess(&self.post_burnin_series(|r| r.log_kernel))
    }
}

/// Round-robin driver: each sweep advances chains 0..r in order with `kernel`.
fn run_chains<F>(target: &mut Target, cfg: &McmcConfig, mut kernel: F) -> Result<McmcRun>
where
    F: FnMut(&mut ChainState, &mut Target) -> Result<StepRecord>,
{
    cfg.validate()?;
    let r = cfg.chains;
    let per_chain = cfg.per_chain_iterations();
    let burnin = cfg.per_chain_burnin();
    let mut chains = Vec::with_capacity(r);
    for c in 0..r {
        let mut rng = stream_rng(cfg.seed, c as u64);
        let state = cfg.init.start(target, 1.0, &mut rng)?;
        chains.push(ChainState { state, rng });
    }
    let mut records: Vec<Vec<StepRecord>> = (0..r)
        .map(|_| Vec::with_capacity(if cfg.keep_records { per_chain as usize } else { 0 }))
        .collect();
    let mut pips = PipAccumulator::new(target.p());
    let (mut moved, mut rb_sum, mut counted) = (0u64, 0.0, 0u64);
    for i in 0..per_chain {
        for (c, chain) in chains.iter_mut().enumerate() {
            let rec = kernel(chain, target)?;
            if cfg.keep_records {
                records[c].push(rec);
            }
            if i >= burnin {
                counted += 1;
                moved += rec.mutated() as u64;
                if rec.proposed_change {
                    rb_sum += rec.a_fwd;
                }
                if (i - burnin) % cfg.thin == 0 {
                    pips.push(&chain.state.gamma);
                }
            }
        }
    }
    Ok(McmcRun {
        per_chain_iterations: per_chain,
        per_chain_burnin: burnin,
        truncated: cfg.iterations - per_chain * r as u64,
        records,
        pips,
        adapter: None,
        final_states: chains.into_iter().map(|c| c.state).collect(),
        moved,
        rb_sum,
        counted,
    })
}

/// Multiple chain acceleration: r chains share one adapter updated after every chain's step.
///
/// With r = 1 this is the single-chain adaptive sampler.
pub fn mca_run(target: &mut Target, adapter: Adapter, cfg: &McmcConfig) -> Result<McmcRun> {
    if adapter.params.p() != target.p() {
        return Err(Error::Dimension(format!(
            "proposal has {} variables, target has {}",
            adapter.params.p(),
            target.p()
        )));
    }
    let mut adapter = adapter;
    let mut run = run_chains(target, cfg, |chain, t| ia_step(chain, &mut adapter, t))?;
    run.adapter = Some(adapter);
    Ok(run)
}

/// Add/remove/swap moves feasible at size `k` of `p`.
fn feasible_moves(k: usize, p: usize) -> usize {
    (k < p) as usize + (k > 0) as usize + (k > 0 && k < p) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Add,
    Remove,
    Swap,
}

fn moves_at(k: usize, p: usize) -> impl Iterator<Item = Move> {
    [(Move::Add, k < p), (Move::Remove, k > 0), (Move::Swap, k > 0 && k < p)]
        .into_iter()
        .filter_map(|(m, ok)| ok.then_some(m))
}

/// Uniform draw from the coordinates with bit value `on`; `count` of them exist.
fn pick<R: Rng + ?Sized>(gamma: &ModelIndicator, on: bool, count: usize, rng: &mut R) -> usize {
    let p = gamma.len();
    if 2 * count >= p {
        loop {
            let j = rng.random_range(0..p);
            if gamma.get(j) == on {
                return j;
            }
        }
    }
    let nth = rng.random_range(0..count);
    if on {
        gamma.ones().nth(nth).expect("count matches popcount")
    } else {
        (0..p).filter(|&j| !gamma.get(j)).nth(nth).expect("count matches zeros")
    }
}

/// log q(γ'→γ) − log q(γ→γ') for an add/remove/swap move from size `k`.
pub(crate) fn multimove_log_proposal_ratio(k: usize, p: usize, kind_changes_size: Option<bool>) -> f64 {
    let nf = feasible_moves(k, p) as f64;
    match kind_changes_size {
        // Add: forward 1/(nf (p-k)), reverse remove from k+1: 1/(nf' (k+1)).
        Some(true) => {
            let nr = feasible_moves(k + 1, p) as f64;
            (nf * (p - k) as f64).ln() - (nr * (k + 1) as f64).ln()
        }
        // Remove: forward 1/(nf k), reverse add from k-1: 1/(nf' (p-k+1)).
        Some(false) => {
            let nr = feasible_moves(k - 1, p) as f64;
            (nf * k as f64).ln() - (nr * (p - k + 1) as f64).ln()
        }
        None => 0.0,
    }
}

/// One step of the add/remove/swap Metropolis-Hastings baseline.
pub fn multimove_mh_step(chain: &mut ChainState, target: &mut Target) -> Result<StepRecord> {
    let p = chain.state.gamma.len();
    let k = chain.state.gamma.size();
    let nf = feasible_moves(k, p);
    let kind = moves_at(k, p).nth(chain.rng.random_range(0..nf)).expect("at least one move when p >= 1");
    let mut proposed = chain.state.gamma.clone();
    let (size_change, changes) = match kind {
        Move::Add => {
            proposed.flip(pick(&chain.state.gamma, false, p - k, &mut chain.rng));
            (Some(true), 1)
        }
        Move::Remove => {
            proposed.flip(pick(&chain.state.gamma, true, k, &mut chain.rng));
            (Some(false), 1)
        }
        Move::Swap => {
            proposed.flip(pick(&chain.state.gamma, true, k, &mut chain.rng));
            proposed.flip(pick(&chain.state.gamma, false, p - k, &mut chain.rng));
            (None, 2)
        }
    };
    let log_ml = log_ml_or_excluded(target, &proposed)?;
    let log_prior = target.log_prior(&proposed);
    let new_kernel = if log_ml == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        chain.state.temperature * log_ml + log_prior
    };
    let log_ratio = new_kernel - chain.state.log_kernel() + multimove_log_proposal_ratio(k, p, size_change);
    let a = if log_ratio >= 0.0 { 1.0 } else { log_ratio.exp() };
    let u: f64 = chain.rng.random();
    let accepted = u < a;
    if accepted {
        chain.state.gamma = proposed;
        chain.state.log_ml = log_ml;
        chain.state.log_prior = log_prior;
    }
    Ok(StepRecord {
        a_fwd: a,
        a_rev: if log_ratio <= 0.0 { 1.0 } else { (-log_ratio).exp() },
        proposed_change: true,
        accepted,
        changes,
        model_size: chain.state.gamma.size() as u32,
        log_kernel: chain.state.log_kernel(),
    })
}

/// Independent chains of the add/remove/swap baseline under the same budget rules.
pub fn multimove_run(target: &mut Target, cfg: &McmcConfig) -> Result<McmcRun> {
    run_chains(target, cfg, multimove_mh_step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptation::{AdaptConfig, Scheme};
    use crate::model::{Posterior, PriorSpec};
    use crate::synthetic::{generate, SyntheticSpec};
    use std::sync::Arc;

    fn target(p: usize) -> Target {
        let d = generate(&SyntheticSpec {
            n: 50,
            p,
            signals: 2,
            seed: 11,
            ..Default::default()
        })
        .unwrap()
        .dataset;
        Target::new(Arc::new(Posterior::new(d, PriorSpec::ridge(100.0, 0.25)).unwrap()), 4096)
    }

    fn adapter(p: usize) -> Adapter {
        Adapter::init(p, 0.25, AdaptConfig::default(), Scheme::Rapa).unwrap()
    }

    #[test]
    fn budget_split_over_chains() {
        let mut t = target(6);
        let cfg = McmcConfig {
            iterations: 100_003,
            burnin: 10,
            chains: 5,
            ..Default::default()
        };
        let run = mca_run(&mut t, adapter(6), &cfg).unwrap();
        assert_eq!(run.per_chain_iterations, 20_000);
        assert_eq!(run.truncated, 3);
        assert_eq!(run.records.iter().map(Vec::len).sum::<usize>(), 100_000);
        assert_eq!(run.pips.samples(), 5 * (20_000 - 2));
        assert_eq!(run.adapter.unwrap().counter.get(), 100_001);
    }

    #[test]
    fn single_chain_equals_manual_loop() {
        let cfg = McmcConfig {
            iterations: 3000,
            burnin: 0,
            init: InitialModel::Empty,
            ..Default::default()
        };
        let mut t = target(6);
        let run = mca_run(&mut t, adapter(6), &cfg).unwrap();
        let mut t2 = target(6);
        let mut a = adapter(6);
        let mut chain = ChainState::new(ModelIndicator::empty(6), 1.0, stream_rng(0, 0), &mut t2).unwrap();
        let manual: Vec<_> = (0..3000).map(|_| ia_step(&mut chain, &mut a, &mut t2).unwrap()).collect();
        assert_eq!(run.records[0], manual);
        assert_eq!(run.adapter.unwrap(), a);
    }

    #[test]
    fn same_seed_is_reproducible() {
        let cfg = McmcConfig {
            iterations: 5000,
            burnin: 500,
            chains: 3,
            seed: 8,
            ..Default::default()
        };
        let a = mca_run(&mut target(7), adapter(7), &cfg).unwrap();
        let b = mca_run(&mut target(7), adapter(7), &cfg).unwrap();
        assert_eq!(a.records, b.records);
        let m1 = multimove_run(&mut target(7), &cfg).unwrap();
        let m2 = multimove_run(&mut target(7), &cfg).unwrap();
        assert_eq!(m1.records, m2.records);
    }

    #[test]
    fn feasibility() {
        assert_eq!(moves_at(0, 5).collect::<Vec<_>>(), vec![Move::Add]);
        assert_eq!(moves_at(5, 5).collect::<Vec<_>>(), vec![Move::Remove]);
        assert_eq!(feasible_moves(2, 5), 3);
    }

    #[test]
    fn swap_preserves_size() {
        let mut t = target(8);
        let mut chain = ChainState::new(ModelIndicator::from_indices(8, [1, 2]), 1.0, stream_rng(3, 0), &mut t).unwrap();
        for _ in 0..2000 {
            let before = chain.state.gamma.size();
            let rec = multimove_mh_step(&mut chain, &mut t).unwrap();
            if rec.changes == 2 {
                assert_eq!(chain.state.gamma.size(), before);
            } else if rec.accepted {
                assert_eq!(chain.state.gamma.size().abs_diff(before), 1);
            }
        }
    }

    #[test]
    fn pick_is_uniform() {
        let g = ModelIndicator::from_indices(10, [0, 3, 4]);
        let mut rng = stream_rng(5, 0);
        let mut counts = [0usize; 10];
        for _ in 0..70_000 {
            counts[pick(&g, false, 7, &mut rng)] += 1;
        }
        for j in [1, 2, 5, 6, 7, 8, 9] {
            assert!((counts[j] as f64 - 10_000.0).abs() < 400.0, "{counts:?}");
        }
        assert_eq!(counts[0] + counts[3] + counts[4], 0);
    }

    #[test]
    fn replicate_seeds_distinct() {
        let s: std::collections::HashSet<u64> = (0..100).map(|i| replicate_seed(7, i)).collect();
        assert_eq!(s.len(), 100);
    }
}
