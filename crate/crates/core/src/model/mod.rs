//! Data, priors, and the log posterior kernel over model space.

mod cache;
mod data;
mod marginal;
mod prior;

pub use cache::{LogKernelCache, Target, DEFAULT_CACHE_CAPACITY};
pub use data::{Dataset, ResponseSelector};
pub use marginal::Posterior;
pub use prior::{CoefCovariance, InclusionPrior, PriorSpec};
