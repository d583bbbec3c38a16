//! Bayesian variable selection in linear regression with individually adapted
//! Metropolis-Hastings samplers.
//!
//! Each variable j carries its own add probability A_j and delete probability
//! D_j. These are tuned on the fly so that the chain's mutation rate tracks a
//! target τ. The crate provides the conjugate model (`model`), the proposal
//! and its adaptation (`proposal`, `adaptation`), sampler drivers
//! (`samplers`) and estimators (`diagnostics`).
//!
//! ```
//! use std::sync::Arc;
//! use bvs_core::adaptation::{AdaptConfig, Adapter, Scheme};
//! use bvs_core::model::{Posterior, PriorSpec, Target};
//! use bvs_core::samplers::{mca_run, McmcConfig};
//! use bvs_core::synthetic::{generate, SyntheticSpec};
//!
//! let data = generate(&SyntheticSpec::default()).unwrap().dataset;
//! let post = Arc::new(Posterior::new(data, PriorSpec::ridge(100.0, 0.25)).unwrap());
//! let mut target = Target::new(post, 1 << 16);
//! let adapter = Adapter::init(12, 0.25, AdaptConfig::default(), Scheme::Rapa).unwrap();
//! let cfg = McmcConfig { iterations: 20_000, burnin: 2_000, ..Default::default() };
//! let run = mca_run(&mut target, adapter, &cfg).unwrap();
//! let pips = run.summary(5).unwrap().pips;
//! assert!(pips[0] > 0.9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptation;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod indicator;
pub mod model;
pub mod proposal;
pub mod samplers;
pub mod synthetic;

pub use error::{Error, Result};
pub use exec::Execution;
pub use indicator::ModelIndicator;
