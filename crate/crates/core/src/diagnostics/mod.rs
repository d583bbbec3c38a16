//! Estimators and reference computations: PIPs, mutation rates, ESS, WMSE and exact enumeration.

mod enumerate;
mod ess;
mod metrics;
mod pips;

pub use enumerate::{enumerate_posterior, Enumeration, GoldSource, GoldStandard, DEFAULT_ENUMERATION_LIMIT};
pub use ess::{autocorrelation, ess, pooled_ess, EssEstimate};
pub use metrics::{ad_log_correlation, ad_ratio_report, mutation_rate, pearson, wmse, AdRatioRow, MutationRate};
pub use pips::{estimate_pips, PipAccumulator, PosteriorSummary, DEFAULT_TOP_MODELS};
