use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::indicator::ModelIndicator;

/// Rows in a top-model table unless asked otherwise.
pub const DEFAULT_TOP_MODELS: usize = 13;

/// Posterior inclusion probabilities and model frequencies from a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub pips: Vec<f64>,
    pub mean_model_size: f64,
    /// Most frequent models with their estimated probability, descending.
    pub top_models: Vec<(ModelIndicator, f64)>,
    pub sample_count: u64,
}

/// Running tallies for [`PosteriorSummary`].
#[derive(Debug, Clone, Default)]
pub struct PipAccumulator {
    p: usize,
    counts: Vec<u64>,
    samples: u64,
    size_sum: u64,
    models: HashMap<Box<[u32]>, u64>,
    track_models: bool,
}

impl PipAccumulator {
    pub fn new(p: usize) -> Self {
        Self {
            p,
            counts: vec![0; p],
            samples: 0,
            size_sum: 0,
            models: HashMap::new(),
            track_models: true,
        }
    }

    /// Skip model-frequency bookkeeping; only marginal counts are kept.
    pub fn without_models(p: usize) -> Self {
        Self {
            track_models: false,
            ..Self::new(p)
        }
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn push(&mut self, gamma: &ModelIndicator) {
        debug_assert_eq!(gamma.len(), self.p);
        let mut key = Vec::with_capacity(gamma.size());
        for j in gamma.ones() {
            self.counts[j] += 1;
            key.push(j as u32);
        }
        self.samples += 1;
        self.size_sum += gamma.size() as u64;
        if self.track_models {
            *self.models.entry(key.into_boxed_slice()).or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: &PipAccumulator) {
        assert_eq!(self.p, other.p, "merging accumulators of different dimension");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.samples += other.samples;
        self.size_sum += other.size_sum;
        self.track_models &= other.track_models;
        if self.track_models {
            for (k, v) in &other.models {
                *self.models.entry(k.clone()).or_insert(0) += v;
            }
        } else {
            self.models.clear();
        }
    }

    pub fn pips(&self) -> Vec<f64> {
        let n = self.samples.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn summary(&self, top: usize) -> Result<PosteriorSummary> {
        if self.samples == 0 {
            return Err(Error::EmptyTrace);
        }
        let n = self.samples as f64;
        let mut models: Vec<(&Box<[u32]>, u64)> = self.models.iter().map(|(k, v)| (k, *v)).collect();
        // Ties break on the index list so the table is deterministic.
        models.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let top_models = models
            .into_iter()
            .take(top)
            .map(|(k, c)| {
                (
                    ModelIndicator::from_indices(self.p, k.iter().map(|&j| j as usize)),
                    c as f64 / n,
                )
            })
            .collect();
        Ok(PosteriorSummary {
            pips: self.pips(),
            mean_model_size: self.size_sum as f64 / n,
            top_models,
            sample_count: self.samples,
        })
    }
}

/// Summarise the states after `burnin`.
pub fn estimate_pips(trace: &[ModelIndicator], burnin: usize) -> Result<PosteriorSummary> {
    let kept = trace.get(burnin..).filter(|s| !s.is_empty()).ok_or(Error::EmptyTrace)?;
    let mut acc = PipAccumulator::new(kept[0].len());
    for g in kept {
        acc.push(g);
    }
    acc.summary(DEFAULT_TOP_MODELS)
}
