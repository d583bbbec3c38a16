use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::adaptation::Adapter;
use crate::error::{Error, Result};
use crate::indicator::ModelIndicator;
use crate::model::{InclusionPrior, PriorSpec, Target};
use crate::proposal::{self, Acceptance, FlipRecord};

/// Random stream for substream `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Model plus its cached likelihood and prior terms at a given temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub gamma: ModelIndicator,
    /// log p(y|γ); `-inf` marks models outside the support (g-prior rank deficiency).
    pub log_ml: f64,
    pub log_prior: f64,
    /// Power applied to the likelihood, in (0, 1].
    pub temperature: f64,
}

impl ModelState {
    pub fn new(gamma: ModelIndicator, temperature: f64, target: &mut Target) -> Result<Self> {
        let log_ml = log_ml_or_excluded(target, &gamma)?;
        let log_prior = target.log_prior(&gamma);
        Ok(Self {
            gamma,
            log_ml,
            log_prior,
            temperature,
        })
    }

    /// t · log p(y|γ) + log p(γ).
    #[inline]
    pub fn log_kernel(&self) -> f64 {
        tempered(self.temperature, self.log_ml) + self.log_prior
    }
}

#[inline]
fn tempered(t: f64, log_ml: f64) -> f64 {
    if log_ml == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        t * log_ml
    }
}

/// Rank-deficient g-prior models have no posterior mass; any other failure propagates.
pub(crate) fn log_ml_or_excluded(target: &mut Target, gamma: &ModelIndicator) -> Result<f64> {
    match target.log_marginal(gamma) {
        Ok(v) => Ok(v),
        Err(Error::RankDeficient { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// A single chain: model state plus its own random stream.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub state: ModelState,
    pub rng: ChaCha8Rng,
}

impl ChainState {
    pub fn new(gamma: ModelIndicator, temperature: f64, rng: ChaCha8Rng, target: &mut Target) -> Result<Self> {
        Ok(Self {
            state: ModelState::new(gamma, temperature, target)?,
            rng,
        })
    }

    pub fn gamma(&self) -> &ModelIndicator {
        &self.state.gamma
    }
}

/// Starting model for a chain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub enum InitialModel {
    Empty,
    /// A draw from the model prior.
    #[default]
    Prior,
    Given(Vec<usize>),
}

/// Draw γ from the model prior (Beta hyperprior draws h first).
pub fn draw_from_prior<R: Rng + ?Sized>(prior: &PriorSpec, p: usize, rng: &mut R) -> ModelIndicator {
    let h = match prior.inclusion {
        InclusionPrior::Fixed { h } => h,
        InclusionPrior::BetaHyper { a, b } => Beta::new(a, b).expect("validated hyperparameters").sample(rng),
    };
    let mut g = ModelIndicator::empty(p);
    for j in 0..p {
        if rng.random::<f64>() < h {
            g.flip(j);
        }
    }
    g
}

impl InitialModel {
    pub fn build<R: Rng + ?Sized>(&self, prior: &PriorSpec, p: usize, rng: &mut R) -> Result<ModelIndicator> {
        match self {
            InitialModel::Empty => Ok(ModelIndicator::empty(p)),
            InitialModel::Prior => Ok(draw_from_prior(prior, p, rng)),
            InitialModel::Given(idx) => {
                if let Some(j) = idx.iter().find(|j| **j >= p) {
                    return Err(Error::Config(format!("initial variable {j} out of range for p = {p}")));
                }
                Ok(ModelIndicator::from_indices(p, idx.iter().copied()))
            }
        }
    }

    /// Build a starting state; an unsupported prior draw falls back to the empty model.
    pub fn start<R: Rng + ?Sized>(&self, target: &mut Target, temperature: f64, rng: &mut R) -> Result<ModelState> {
        let prior = *target.posterior().prior();
        let gamma = self.build(&prior, target.p(), rng)?;
        let state = ModelState::new(gamma, temperature, target)?;
        if state.log_ml == f64::NEG_INFINITY {
            return ModelState::new(ModelIndicator::empty(target.p()), temperature, target);
        }
        Ok(state)
    }
}

/// Outcome of one Metropolis-Hastings step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub a_fwd: f64,
    pub a_rev: f64,
    /// C(γ, γ'): the proposal differs from the current model.
    pub proposed_change: bool,
    pub accepted: bool,
    /// Number of coordinates proposed to change.
    pub changes: u32,
    /// Model size after the step.
    pub model_size: u32,
    /// Log kernel after the step.
    pub log_kernel: f64,
}

impl StepRecord {
    /// The chain's state changed.
    #[inline]
    pub fn mutated(&self) -> bool {
        self.accepted && self.proposed_change
    }
}

/// One individually adapted Metropolis-Hastings step on `state` using `rng`.
///
/// Proposes from q_η, accepts with one uniform draw, then adapts η from the
/// flip record of the pre-move model and advances the adaptation counter.
pub fn ia_step_with<R: Rng + ?Sized>(
    state: &mut ModelState,
    adapter: &mut Adapter,
    target: &mut Target,
    rng: &mut R,
) -> Result<StepRecord> {
    let mut flips = FlipRecord::default();
    let proposed = proposal::sample_proposal_into(&state.gamma, &adapter.params, rng, &mut flips);
    let (acc, new_ml, new_prior) = if flips.any_flip() {
        let log_ml = log_ml_or_excluded(target, &proposed)?;
        let log_prior = target.log_prior(&proposed);
        let cur = state.log_kernel();
        let prop = tempered(state.temperature, log_ml) + log_prior;
        let log_ratio = if prop == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            prop - cur + proposal::log_proposal_ratio(&flips, &adapter.params)
        };
        (Acceptance::from_log_ratio(log_ratio), log_ml, log_prior)
    } else {
        (Acceptance::from_log_ratio(0.0), state.log_ml, state.log_prior)
    };
    let u: f64 = rng.random();
    let accepted = u < acc.forward;
    adapter.update(&flips, &acc);
    if accepted && flips.any_flip() {
        state.gamma = proposed;
        state.log_ml = new_ml;
        state.log_prior = new_prior;
    }
    Ok(StepRecord {
        a_fwd: acc.forward,
        a_rev: acc.reverse,
        proposed_change: flips.any_flip(),
        accepted,
        changes: flips.count() as u32,
        model_size: state.gamma.size() as u32,
        log_kernel: state.log_kernel(),
    })
}

/// [`ia_step_with`] using the chain's own stream.
pub fn ia_step(chain: &mut ChainState, adapter: &mut Adapter, target: &mut Target) -> Result<StepRecord> {
    ia_step_with(&mut chain.state, adapter, target, &mut chain.rng)
}
