use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adaptation::Adapter;
use crate::diagnostics::PipAccumulator;
use crate::error::{Error, Result};
use crate::model::Target;
use crate::samplers::chain::{ia_step, stream_rng, ChainState, InitialModel, StepRecord};

/// Adaptation settings for the temperature ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    /// ζ_h = ζ_0 h^{-λ}; zero freezes the ladder.
    pub zeta0: f64,
    pub lambda: f64,
    /// Target swap acceptance rate â.
    pub target: f64,
    /// Smallest permitted gap between adjacent temperatures.
    pub rho_min: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            zeta0: 1.0,
            lambda: 0.6,
            target: 0.234,
            rho_min: 1e-4,
        }
    }
}

/// Increasing temperatures t_1 < … < t_m = 1, stored as gaps ρ_j = t_{j+1} − t_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureLadder {
    temps: Vec<f64>,
    rho: Vec<f64>,
    cfg: LadderConfig,
    updates: u64,
}

impl TemperatureLadder {
    /// t_j = 0.5^{m−j}.
    pub fn geometric(m: usize, cfg: LadderConfig) -> Result<Self> {
        Self::from_temperatures((0..m).map(|j| 0.5f64.powi((m - 1 - j) as i32)).collect(), cfg)
    }

    pub fn from_temperatures(temps: Vec<f64>, cfg: LadderConfig) -> Result<Self> {
        if temps.len() < 2 {
            return Err(Error::Config("parallel tempering needs at least two temperatures".into()));
        }
        if !(cfg.rho_min > 0.0) || (temps.len() as f64) * cfg.rho_min >= 1.0 {
            return Err(Error::Config(format!("rho_min = {} is not admissible", cfg.rho_min)));
        }
        if !(cfg.target > 0.0 && cfg.target < 1.0) || !(cfg.zeta0 >= 0.0) || !(cfg.lambda > 0.0) {
            return Err(Error::Config("invalid ladder adaptation settings".into()));
        }
        if *temps.last().unwrap() != 1.0 || !(temps[0] > 0.0) {
            return Err(Error::Config("temperatures must lie in (0, 1] and end at 1".into()));
        }
        let rho: Vec<f64> = temps.windows(2).map(|w| w[1] - w[0]).collect();
        if rho.iter().any(|r| *r < cfg.rho_min) {
            return Err(Error::Config("temperatures must increase by at least rho_min".into()));
        }
        Ok(Self {
            temps,
            rho,
            cfg,
            updates: 0,
        })
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temps
    }

    pub fn increments(&self) -> &[f64] {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.temps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temps.is_empty()
    }

    pub fn config(&self) -> &LadderConfig {
        &self.cfg
    }

    /// Strictly increasing, positive, and ending at 1.
    pub fn is_valid(&self) -> bool {
        self.temps[0] > 0.0
            && *self.temps.last().unwrap() == 1.0
            && self.temps.windows(2).all(|w| w[0] < w[1])
            && self.rho.iter().all(|r| *r >= self.cfg.rho_min * (1.0 - 1e-12))
    }

    /// Move the gap between pair (k, k+1) by ζ_h (a − â) and rebuild the ladder downward from 1.
    pub fn update(&mut self, k: usize, a: f64) {
        self.updates += 1;
        let zeta = self.cfg.zeta0 * (self.updates as f64).powf(-self.cfg.lambda);
        let delta = zeta * (a - self.cfg.target);
        if delta == 0.0 {
            return;
        }
        let rmin = self.cfg.rho_min;
        self.rho[k] = (self.rho[k] + delta).max(rmin);
        // Keep t_1 ≥ rho_min by shrinking the slack above rho_min proportionally.
        let total: f64 = self.rho.iter().sum();
        let cap = 1.0 - rmin;
        if total > cap {
            let slack: f64 = self.rho.iter().map(|r| r - rmin).sum();
            let scale = (slack - (total - cap)) / slack;
            for r in self.rho.iter_mut() {
                *r = rmin + (*r - rmin) * scale;
            }
        }
        let m = self.temps.len();
        self.temps[m - 1] = 1.0;
        for j in (0..m - 1).rev() {
            self.temps[j] = self.temps[j + 1] - self.rho[j];
        }
    }
}

/// Metropolis acceptance for exchanging the states of temperatures t_k and t_l.
pub fn swap_acceptance(t_k: f64, t_l: f64, log_ml_k: f64, log_ml_l: f64) -> f64 {
    if t_k == t_l || log_ml_k == log_ml_l {
        return 1.0;
    }
    let log_r = (t_k - t_l) * (log_ml_l - log_ml_k);
    if log_r.is_nan() || log_r >= 0.0 {
        1.0
    } else {
        log_r.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapRecord {
    /// Lower index of the proposed pair.
    pub pair: usize,
    pub probability: f64,
    pub accepted: bool,
}

/// m temperature levels, each with r replica chains sharing one adapter.
#[derive(Debug, Clone)]
pub struct PtEnsemble {
    /// `chains[k][c]`: replica c at temperature level k.
    pub chains: Vec<Vec<ChainState>>,
    pub adapters: Vec<Adapter>,
    pub ladder: TemperatureLadder,
    swap_rng: ChaCha8Rng,
}

/// Output of one sweep.
#[derive(Debug, Clone)]
pub struct PtSweep {
    /// Step records of the t = 1 chains, one per replica.
    pub cold: Vec<StepRecord>,
    pub swaps: Vec<SwapRecord>,
}

impl PtEnsemble {
    /// Chains start from `init`; all levels use copies of `adapter`.
    pub fn new(
        target: &mut Target,
        ladder: TemperatureLadder,
        adapter: Adapter,
        replicas: usize,
        init: &InitialModel,
        seed: u64,
    ) -> Result<Self> {
        if replicas == 0 {
            return Err(Error::Config("need at least one replica per temperature".into()));
        }
        let m = ladder.len();
        let mut chains = Vec::with_capacity(m);
        for (k, &t) in ladder.temperatures().iter().enumerate() {
            let mut level = Vec::with_capacity(replicas);
            for c in 0..replicas {
                let mut rng = stream_rng(seed, (k * replicas + c) as u64);
                let state = init.start(target, t, &mut rng)?;
                level.push(ChainState { state, rng });
            }
            chains.push(level);
        }
        Ok(Self {
            chains,
            adapters: vec![adapter; m],
            ladder,
            swap_rng: stream_rng(seed, (m * replicas) as u64),
        })
    }

    pub fn replicas(&self) -> usize {
        self.chains[0].len()
    }

    fn sync_temperatures(&mut self) {
        for (level, &t) in self.chains.iter_mut().zip(self.ladder.temperatures()) {
            for chain in level {
                chain.state.temperature = t;
            }
        }
    }
}

/// One sweep: every chain takes an adaptive step, then each replica proposes one adjacent swap.
pub fn pt_step(ens: &mut PtEnsemble, target: &mut Target) -> Result<PtSweep> {
    let m = ens.ladder.len();
    let mut cold = Vec::with_capacity(ens.replicas());
    for (k, level) in ens.chains.iter_mut().enumerate() {
        for chain in level.iter_mut() {
            let rec = ia_step(chain, &mut ens.adapters[k], target)?;
            if k == m - 1 {
                cold.push(rec);
            }
        }
    }
    let mut swaps = Vec::with_capacity(ens.replicas());
    for c in 0..ens.replicas() {
        let k = ens.swap_rng.random_range(0..m - 1);
        let t = ens.ladder.temperatures();
        let a = swap_acceptance(t[k], t[k + 1], ens.chains[k][c].state.log_ml, ens.chains[k + 1][c].state.log_ml);
        let u: f64 = ens.swap_rng.random();
        let accepted = u < a;
        if accepted {
            let (lo, hi) = ens.chains.split_at_mut(k + 1);
            let (x, y) = (&mut lo[k][c].state, &mut hi[0][c].state);
            std::mem::swap(&mut x.gamma, &mut y.gamma);
            std::mem::swap(&mut x.log_ml, &mut y.log_ml);
            std::mem::swap(&mut x.log_prior, &mut y.log_prior);
        }
        ens.ladder.update(k, a);
        ens.sync_temperatures();
        swaps.push(SwapRecord {
            pair: k,
            probability: a,
            accepted,
        });
    }
    Ok(PtSweep { cold, swaps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtConfig {
    pub sweeps: u64,
    pub burnin: u64,
    pub thin: u64,
    pub replicas: usize,
    pub seed: u64,
    pub init: InitialModel,
    /// Record the ladder every this many sweeps; 0 disables.
    pub ladder_every: u64,
}

impl Default for PtConfig {
    fn default() -> Self {
        Self {
            sweeps: 10_000,
            burnin: 1_000,
            thin: 1,
            replicas: 1,
            seed: 0,
            init: InitialModel::Prior,
            ladder_every: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PtRun {
    /// Cold-chain step records per replica.
    pub cold_records: Vec<Vec<StepRecord>>,
    pub swaps: Vec<SwapRecord>,
    pub pips: PipAccumulator,
    pub ladder_history: Vec<Vec<f64>>,
    pub ensemble: PtEnsemble,
    pub burnin: u64,
}

impl PtRun {
    /// Accepted-swap fraction over the last `window` swap proposals.
    pub fn trailing_swap_rate(&self, window: usize) -> f64 {
        let tail = &self.swaps[self.swaps.len().saturating_sub(window)..];
        tail.iter().filter(|s| s.accepted).count() as f64 / tail.len().max(1) as f64
    }

    /// Mean swap acceptance probability over the last `window` proposals.
    pub fn trailing_swap_probability(&self, window: usize) -> f64 {
        let tail = &self.swaps[self.swaps.len().saturating_sub(window)..];
        tail.iter().map(|s| s.probability).sum::<f64>() / tail.len().max(1) as f64
    }
}

pub fn pt_run(target: &mut Target, ladder: TemperatureLadder, adapter: Adapter, cfg: &PtConfig) -> Result<PtRun> {
    if cfg.thin == 0 || cfg.burnin >= cfg.sweeps {
        return Err(Error::Config("need thin >= 1 and burn-in shorter than the run".into()));
    }
    let mut ens = PtEnsemble::new(target, ladder, adapter, cfg.replicas, &cfg.init, cfg.seed)?;
    let mut cold_records = vec![Vec::with_capacity(cfg.sweeps as usize); cfg.replicas];
    let mut swaps = Vec::with_capacity((cfg.sweeps as usize) * cfg.replicas);
    let mut pips = PipAccumulator::new(target.p());
    let mut ladder_history = Vec::new();
    for s in 0..cfg.sweeps {
        let sweep = pt_step(&mut ens, target)?;
        for (c, rec) in sweep.cold.into_iter().enumerate() {
            cold_records[c].push(rec);
        }
        swaps.extend(sweep.swaps);
        if s >= cfg.burnin && (s - cfg.burnin) % cfg.thin == 0 {
            for chain in ens.chains.last().unwrap() {
                pips.push(&chain.state.gamma);
            }
        }
        if cfg.ladder_every > 0 && s % cfg.ladder_every == 0 {
            ladder_history.push(ens.ladder.temperatures().to_vec());
        }
    }
    Ok(PtRun {
        cold_records,
        swaps,
        pips,
        ladder_history,
        ensemble: ens,
        burnin: cfg.burnin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptation::{AdaptConfig, Scheme};
    use crate::model::{Posterior, PriorSpec};
    use crate::synthetic::{generate, SyntheticSpec};
    use proptest::prelude::*;
    use std::sync::Arc;

    #[test]
    fn geometric_start() {
        let l = TemperatureLadder::geometric(4, LadderConfig::default()).unwrap();
        assert_eq!(l.temperatures(), &[0.125, 0.25, 0.5, 1.0]);
        assert_eq!(l.increments(), &[0.125, 0.25, 0.5]);
    }

    #[test]
    fn swap_edge_cases() {
        assert_eq!(swap_acceptance(0.5, 0.5, -10.0, -3.0), 1.0);
        assert_eq!(swap_acceptance(0.2, 1.0, -7.0, -7.0), 1.0);
        // Better state at the hotter level always moves up.
        assert_eq!(swap_acceptance(0.5, 1.0, -1.0, -5.0), 1.0);
        assert!((swap_acceptance(0.5, 1.0, -5.0, -1.0) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn target_rate_keeps_ladder_fixed() {
        let mut l = TemperatureLadder::geometric(5, LadderConfig::default()).unwrap();
        let before = l.clone();
        for h in 0..100 {
            l.update(h % 4, 0.234);
        }
        assert_eq!(l.temperatures(), before.temperatures());
    }

    #[test]
    fn gap_grows_when_swaps_too_easy() {
        let mut l = TemperatureLadder::geometric(3, LadderConfig::default()).unwrap();
        l.update(1, 1.0);
        // 0.5 + 0.766 overshoots, so the slack is rescaled onto t_1 = rho_min.
        assert!(l.increments()[1] > 0.5);
        assert!((l.temperatures()[0] - 1e-4).abs() < 1e-12);
        assert!(l.is_valid());
        assert_eq!(l.temperatures()[2], 1.0);
    }

    proptest! {
        #[test]
        fn ladder_stays_valid(m in 2usize..8, updates in prop::collection::vec((0usize..7, 0.0f64..=1.0), 1..300)) {
            let mut l = TemperatureLadder::geometric(m, LadderConfig::default()).unwrap();
            for (k, a) in updates {
                l.update(k % (m - 1), a);
                prop_assert!(l.is_valid(), "{:?}", l.temperatures());
            }
        }
    }

    #[test]
    fn sweeps_keep_states_consistent() {
        let d = generate(&SyntheticSpec {
            n: 40,
            p: 8,
            signals: 2,
            seed: 1,
            ..Default::default()
        })
        .unwrap()
        .dataset;
        let post = Arc::new(Posterior::new(d, PriorSpec::ridge(100.0, 0.25)).unwrap());
        let mut t = Target::new(post.clone(), 4096);
        let adapter = Adapter::init(8, 0.25, AdaptConfig::default(), Scheme::Ia).unwrap();
        let ladder = TemperatureLadder::geometric(4, LadderConfig::default()).unwrap();
        let mut ens = PtEnsemble::new(&mut t, ladder, adapter, 2, &InitialModel::Empty, 3).unwrap();
        for _ in 0..500 {
            let sweep = pt_step(&mut ens, &mut t).unwrap();
            assert_eq!(sweep.cold.len(), 2);
            assert!(ens.ladder.is_valid());
            for (level, &temp) in ens.chains.iter().zip(ens.ladder.temperatures()) {
                for c in level {
                    assert_eq!(c.state.temperature, temp);
                    let fresh = temp * post.log_marginal_likelihood(&c.state.gamma).unwrap()
                        + post.log_model_prior(&c.state.gamma);
                    assert!((fresh - c.state.log_kernel()).abs() < 1e-9);
                }
            }
        }
    }
}
