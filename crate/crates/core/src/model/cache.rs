use std::num::NonZeroUsize;
use std::sync::Arc;

use lru::LruCache;

use super::marginal::Posterior;
use crate::error::Result;
use crate::indicator::ModelIndicator;

pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 20;

/// Bounded least-recently-used store of log marginal likelihoods, keyed by the
/// exact set of included variables.
#[derive(Debug)]
pub struct LogKernelCache {
    map: LruCache<Box<[u32]>, f64>,
    hits: u64,
    misses: u64,
    key_words: usize,
    byte_budget: Option<usize>,
}

impl LogKernelCache {
    pub fn new(capacity: usize) -> Self {
        let cap = NonZeroUsize::new(capacity.max(1)).expect("nonzero");
        Self {
            map: LruCache::new(cap),
            hits: 0,
            misses: 0,
            key_words: 0,
            byte_budget: None,
        }
    }

    /// Also evict least-recently-used entries while [`approx_bytes`](Self::approx_bytes) exceeds `max_bytes`.
    pub fn with_byte_budget(capacity: usize, max_bytes: usize) -> Self {
        Self {
            byte_budget: Some(max_bytes),
            ..Self::new(capacity)
        }
    }

    pub fn byte_budget(&self) -> Option<usize> {
        self.byte_budget
    }

    pub fn capacity(&self) -> usize {
        self.map.cap().get()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    /// Number of fresh evaluations performed.
    pub fn misses(&self) -> u64 {
        self.misses
    }

    /// Rough heap footprint of the stored keys and values.
    pub fn approx_bytes(&self) -> usize {
        self.map.len() * Self::ENTRY_OVERHEAD + self.key_words * 4
    }

    const ENTRY_OVERHEAD: usize =
        std::mem::size_of::<Box<[u32]>>() + std::mem::size_of::<f64>() + 4 * std::mem::size_of::<usize>();

    fn get_or_try_insert(&mut self, key: Box<[u32]>, f: impl FnOnce(&[u32]) -> Result<f64>) -> Result<f64> {
        if let Some(v) = self.map.get(&key) {
            self.hits += 1;
            return Ok(*v);
        }
        self.misses += 1;
        let v = f(&key)?;
        self.key_words += key.len();
        if let Some((old, _)) = self.map.push(key, v) {
            self.key_words -= old.len();
        }
        if let Some(budget) = self.byte_budget {
            while self.approx_bytes() > budget && self.map.len() > 1 {
                if let Some((old, _)) = self.map.pop_lru() {
                    self.key_words -= old.len();
                }
            }
        }
        Ok(v)
    }
}

/// A [`Posterior`] paired with a per-worker cache.
#[derive(Debug)]
pub struct Target {
    posterior: Arc<Posterior>,
    cache: LogKernelCache,
}

impl Target {
    pub fn new(posterior: Arc<Posterior>, capacity: usize) -> Self {
        Self {
            posterior,
            cache: LogKernelCache::new(capacity),
        }
    }

    pub fn with_cache(posterior: Arc<Posterior>, cache: LogKernelCache) -> Self {
        Self { posterior, cache }
    }

    pub fn posterior(&self) -> &Arc<Posterior> {
        &self.posterior
    }

    pub fn cache(&self) -> &LogKernelCache {
        &self.cache
    }

    pub fn p(&self) -> usize {
        self.posterior.p()
    }

    /// Cached log p(y|γ).
    pub fn log_marginal(&mut self, gamma: &ModelIndicator) -> Result<f64> {
        let key: Box<[u32]> = gamma.ones().map(|j| j as u32).collect();
        let post = &self.posterior;
        self.cache.get_or_try_insert(key, |k| {
            let idx: Vec<usize> = k.iter().map(|&j| j as usize).collect();
            post.log_marginal_for_indices(&idx)
        })
    }

    pub fn log_prior(&self, gamma: &ModelIndicator) -> f64 {
        self.posterior.log_model_prior(gamma)
    }

    /// log p(y|γ) + log p(γ), served from the cache when present.
    pub fn log_posterior_kernel(&mut self, gamma: &ModelIndicator) -> Result<f64> {
        Ok(self.log_marginal(gamma)? + self.log_prior(gamma))
    }
}
