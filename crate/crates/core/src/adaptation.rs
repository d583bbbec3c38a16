//! Robbins-Monro adaptation of the proposal parameters toward a target
//! mutation rate τ.
//!
//! Updates act on the ε-logit scale held by [`ProposalParams`]. Only
//! coordinates that were proposed to change are touched. The plain
//! individual-adaptation update moves `ℓ(A_j)` for added and `ℓ(D_j)` for
//! deleted coordinates by `φ_i (a − τ)`. The reverse-acceptance accelerated
//! update splits that step between the forward move, weighted by
//! `1 − w·a`, and the reverse move, weighted by `w·a` with drift `a_rev − τ`.
//! For the reverse move an added coordinate behaves as a deletion, so the
//! reverse term lands on `D_j` for adds and on `A_j` for deletes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proposal::{Acceptance, FlipRecord, ProposalParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptConfig {
    /// Target mutation rate τ.
    pub tau: f64,
    pub epsilon: f64,
    /// Step-size decay exponent λ in (1/2, 1].
    pub lambda: f64,
    /// Base step size φ₀; zero freezes adaptation.
    pub phi0: f64,
    /// Initialisation mass ν: expected number of proposed changes from a prior draw is 2ν.
    pub nu: f64,
    /// Reverse-move weight w in [0, 1].
    pub w: f64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            tau: 0.45,
            epsilon: 0.001,
            lambda: 0.6,
            phi0: 1.0,
            nu: 1.0,
            w: 0.5,
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return bad(format!("epsilon must lie in (0, 1/2), got {}", self.epsilon));
        }
        if !(self.lambda > 0.5 && self.lambda <= 1.0) {
            return bad(format!("lambda must lie in (1/2, 1], got {}", self.lambda));
        }
        if !(self.phi0 >= 0.0 && self.phi0.is_finite()) {
            return bad(format!("phi0 must be non-negative, got {}", self.phi0));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if !(0.0..=1.0).contains(&self.w) {
            return bad(format!("w must lie in [0, 1], got {}", self.w));
        }
        Ok(())
    }

    /// Bound on any single-term logit increment at iteration `i`.
    pub fn increment_bound(&self, i: u64) -> f64 {
        step_size(i, self) * self.tau.max(1.0 - self.tau)
    }
}

/// Iteration counter `i ≥ 1`, reset at each SMC stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptCounter(u64);

impl Default for AdaptCounter {
    fn default() -> Self {
        Self(1)
    }
}

impl AdaptCounter {
    pub fn get(self) -> u64 {
        self.0
    }

    pub fn advance(&mut self) {
        self.0 += 1;
    }

    pub fn reset(&mut self) {
        self.0 = 1;
    }
}

/// φ_i = φ₀ i^(−λ).
pub fn step_size(i: u64, cfg: &AdaptConfig) -> f64 {
    debug_assert!(i >= 1);
    if i == 1 {
        return cfg.phi0;
    }
    cfg.phi0 * (i as f64).powf(-cfg.lambda)
}

/// Uniform starting values `A_j = ν/((1−h)p)`, `D_j = ν/(hp)`.
pub fn init_proposal_params(p: usize, h_effective: f64, cfg: &AdaptConfig) -> Result<ProposalParams> {
    if !(h_effective > 0.0 && h_effective < 1.0) {
        return Err(Error::Config(format!("effective h must lie in (0, 1), got {h_effective}")));
    }
    let pf = p as f64;
    let add = cfg.nu / ((1.0 - h_effective) * pf);
    let del = cfg.nu / (h_effective * pf);
    let eps = cfg.epsilon;
    let inside = |v: f64| v > eps && v < 1.0 - eps;
    if !inside(add) || !inside(del) {
        return Err(Error::InitOutOfRange { add, del, epsilon: eps });
    }
    ProposalParams::uniform(p, add, del, eps)
}

/// Individual adaptation update.
pub fn ia_update(eta: &mut ProposalParams, flips: &FlipRecord, a_fwd: f64, i: u64, cfg: &AdaptConfig) {
    let step = step_size(i, cfg) * (a_fwd - cfg.tau);
    for &j in &flips.add_flips {
        eta.shift_add(j, step);
    }
    for &j in &flips.del_flips {
        eta.shift_del(j, step);
    }
}

/// Reverse-acceptance accelerated update; `w = 0` reproduces [`ia_update`] exactly.
pub fn rapa_update(eta: &mut ProposalParams, flips: &FlipRecord, a_fwd: f64, a_rev: f64, i: u64, cfg: &AdaptConfig) {
    let phi = step_size(i, cfg);
    let forward = phi * (a_fwd - cfg.tau) * (1.0 - cfg.w * a_fwd);
    let reverse = phi * (a_rev - cfg.tau) * (cfg.w * a_fwd);
    for &j in &flips.add_flips {
        eta.shift_add(j, forward);
        eta.shift_del(j, reverse);
    }
    for &j in &flips.del_flips {
        eta.shift_del(j, forward);
        eta.shift_add(j, reverse);
    }
}

/// Which update rule an [`Adapter`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Ia,
    Rapa,
}

/// Proposal parameters together with their update rule and counter.
#[derive(Debug, Clone, PartialEq)]
pub struct Adapter {
    pub params: ProposalParams,
    pub cfg: AdaptConfig,
    pub scheme: Scheme,
    pub counter: AdaptCounter,
}

impl Adapter {
    pub fn new(params: ProposalParams, cfg: AdaptConfig, scheme: Scheme) -> Self {
        Self {
            params,
            cfg,
            scheme,
            counter: AdaptCounter::default(),
        }
    }

    /// Initialise with the uniform starting values.
    pub fn init(p: usize, h_effective: f64, cfg: AdaptConfig, scheme: Scheme) -> Result<Self> {
        cfg.validate()?;
        Ok(Self::new(init_proposal_params(p, h_effective, &cfg)?, cfg, scheme))
    }

    /// Apply one update for the move just evaluated and advance the counter.
    pub fn update(&mut self, flips: &FlipRecord, acc: &Acceptance) {
        let i = self.counter.get();
        match self.scheme {
            Scheme::Ia => ia_update(&mut self.params, flips, acc.forward, i, &self.cfg),
            Scheme::Rapa => rapa_update(&mut self.params, flips, acc.forward, acc.reverse, i, &self.cfg),
        }
        self.counter.advance();
    }
}
