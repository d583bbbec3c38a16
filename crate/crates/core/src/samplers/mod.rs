//! Sampler drivers: adaptive single and multiple chains, the add/remove/swap
//! baseline, parallel tempering and sequential Monte Carlo.

mod chain;
pub mod exact;
mod mcmc;
mod pt;
mod smc;

pub use chain::{
    draw_from_prior, ia_step, ia_step_with, stream_rng, ChainState, InitialModel, ModelState, StepRecord,
};
pub use mcmc::{mca_run, multimove_mh_step, multimove_run, replicate_seed, McmcConfig, McmcRun};
pub use pt::{
    pt_run, pt_step, swap_acceptance, LadderConfig, PtConfig, PtEnsemble, PtRun, PtSweep, SwapRecord,
    TemperatureLadder,
};
pub use smc::{smc_run, systematic_resample, weights_ess, SmcConfig, SmcRun, SmcStage};
