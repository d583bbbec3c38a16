//! Product-Bernoulli proposal over model space.
//!
//! Each coordinate is flipped independently: an excluded variable `j` is
//! added with probability `A_j`, an included one is deleted with probability
//! `D_j`. The tuning state is held on the ε-logit scale
//! `ℓ(x) = log((x − ε) / (1 − x − ε))`, which keeps every probability inside
//! `(ε, 1 − ε)` whatever the adaptation does.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicator::ModelIndicator;

/// Logits are held inside ±`LOGIT_LIMIT` so that the mapped probabilities stay
/// strictly inside `(ε, 1 − ε)` in floating point.
pub const LOGIT_LIMIT: f64 = 30.0;

/// Adapted proposal parameters η = (A, D).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalParams {
    add: Vec<f64>,
    del: Vec<f64>,
    add_logit: Vec<f64>,
    del_logit: Vec<f64>,
    epsilon: f64,
}

#[inline]
fn to_logit(x: f64, eps: f64) -> f64 {
    ((x - eps) / (1.0 - x - eps)).ln()
}

#[inline]
fn from_logit(l: f64, eps: f64) -> f64 {
    eps + (1.0 - 2.0 * eps) / (1.0 + (-l).exp())
}

impl ProposalParams {
    pub fn new(add: Vec<f64>, del: Vec<f64>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
        }
        if add.len() != del.len() {
            return Err(Error::Dimension(format!("{} add vs {} delete probabilities", add.len(), del.len())));
        }
        if let Some(bad) = add.iter().chain(&del).find(|v| !(**v > epsilon && **v < 1.0 - epsilon)) {
            return Err(Error::Config(format!("proposal probability {bad} outside ({epsilon}, 1 - {epsilon})")));
        }
        let add_logit: Vec<f64> = add.iter().map(|&v| to_logit(v, epsilon).clamp(-LOGIT_LIMIT, LOGIT_LIMIT)).collect();
        let del_logit: Vec<f64> = del.iter().map(|&v| to_logit(v, epsilon).clamp(-LOGIT_LIMIT, LOGIT_LIMIT)).collect();
        // probabilities are always the image of the stored logits
        let add = add_logit.iter().map(|&l| from_logit(l, epsilon)).collect();
        let del = del_logit.iter().map(|&l| from_logit(l, epsilon)).collect();
        Ok(Self {
            add,
            del,
            add_logit,
            del_logit,
            epsilon,
        })
    }

    /// Same add probability `a` and delete probability `d` for every variable.
    pub fn uniform(p: usize, a: f64, d: f64, epsilon: f64) -> Result<Self> {
        Self::new(vec![a; p], vec![d; p], epsilon)
    }

    pub fn p(&self) -> usize {
        self.add.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn add_prob(&self, j: usize) -> f64 {
        self.add[j]
    }

    #[inline]
    pub fn del_prob(&self, j: usize) -> f64 {
        self.del[j]
    }

    pub fn add_probs(&self) -> &[f64] {
        &self.add
    }

    pub fn del_probs(&self) -> &[f64] {
        &self.del
    }

    pub fn add_logit(&self, j: usize) -> f64 {
        self.add_logit[j]
    }

    pub fn del_logit(&self, j: usize) -> f64 {
        self.del_logit[j]
    }

    /// Shift ℓ(A_j) by `delta`. A zero shift leaves the state untouched.
    #[inline]
    pub fn shift_add(&mut self, j: usize, delta: f64) {
        if delta != 0.0 {
            let l = (self.add_logit[j] + delta).clamp(-LOGIT_LIMIT, LOGIT_LIMIT);
            self.add_logit[j] = l;
            self.add[j] = from_logit(l, self.epsilon);
        }
    }

    /// Shift ℓ(D_j) by `delta`.
    #[inline]
    pub fn shift_del(&mut self, j: usize, delta: f64) {
        if delta != 0.0 {
            let l = (self.del_logit[j] + delta).clamp(-LOGIT_LIMIT, LOGIT_LIMIT);
            self.del_logit[j] = l;
            self.del[j] = from_logit(l, self.epsilon);
        }
    }

    /// Expected number of coordinates proposed to change from `gamma`.
    pub fn expected_changes(&self, gamma: &ModelIndicator) -> f64 {
        (0..self.p())
            .map(|j| if gamma.get(j) { self.del[j] } else { self.add[j] })
            .sum()
    }
}

/// Coordinates that differ between the current and proposed model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlipRecord {
    /// `j` with `γ_j = 0, γ'_j = 1`.
    pub add_flips: Vec<usize>,
    /// `j` with `γ_j = 1, γ'_j = 0`.
    pub del_flips: Vec<usize>,
}

impl FlipRecord {
    pub fn between(from: &ModelIndicator, to: &ModelIndicator) -> Self {
        let mut rec = Self::default();
        for j in 0..from.len() {
            match (from.get(j), to.get(j)) {
                (false, true) => rec.add_flips.push(j),
                (true, false) => rec.del_flips.push(j),
                _ => {}
            }
        }
        rec
    }

    /// C(γ, γ').
    #[inline]
    pub fn any_flip(&self) -> bool {
        !self.add_flips.is_empty() || !self.del_flips.is_empty()
    }

    pub fn count(&self) -> usize {
        self.add_flips.len() + self.del_flips.len()
    }

    pub fn clear(&mut self) {
        self.add_flips.clear();
        self.del_flips.clear();
    }
}

/// Mutation indicator: 1 iff the proposal differs from the current model.
#[inline]
pub fn mutation_indicator(flips: &FlipRecord) -> u8 {
    u8::from(flips.any_flip())
}

/// Draw γ' from q_η(γ, ·). Uses exactly one uniform per coordinate.
pub fn sample_proposal<R: Rng + ?Sized>(
    gamma: &ModelIndicator,
    eta: &ProposalParams,
    rng: &mut R,
) -> (ModelIndicator, FlipRecord) {
    let mut flips = FlipRecord::default();
    let proposed = sample_proposal_into(gamma, eta, rng, &mut flips);
    (proposed, flips)
}

/// As [`sample_proposal`], reusing `flips`' allocations.
pub fn sample_proposal_into<R: Rng + ?Sized>(
    gamma: &ModelIndicator,
    eta: &ProposalParams,
    rng: &mut R,
    flips: &mut FlipRecord,
) -> ModelIndicator {
    assert_eq!(gamma.len(), eta.p(), "model and proposal dimensions differ");
    flips.clear();
    let mut proposed = gamma.clone();
    for j in 0..gamma.len() {
        let u: f64 = rng.random();
        if gamma.get(j) {
            if u < eta.del[j] {
                proposed.flip(j);
                flips.del_flips.push(j);
            }
        } else if u < eta.add[j] {
            proposed.flip(j);
            flips.add_flips.push(j);
        }
    }
    proposed
}

/// log q_η(γ', γ) − log q_η(γ, γ'); unflipped coordinates cancel.
pub fn log_proposal_ratio(flips: &FlipRecord, eta: &ProposalParams) -> f64 {
    let adds: f64 = flips.add_flips.iter().map(|&j| (eta.del[j] / eta.add[j]).ln()).sum();
    let dels: f64 = flips.del_flips.iter().map(|&j| (eta.add[j] / eta.del[j]).ln()).sum();
    adds + dels
}

/// log q_η(γ, γ') as the full product over all coordinates.
pub fn log_proposal_density(from: &ModelIndicator, to: &ModelIndicator, eta: &ProposalParams) -> f64 {
    (0..from.len())
        .map(|j| {
            let p = match (from.get(j), to.get(j)) {
                (false, true) => eta.add[j],
                (false, false) => 1.0 - eta.add[j],
                (true, false) => eta.del[j],
                (true, true) => 1.0 - eta.del[j],
            };
            p.ln()
        })
        .sum()
}

/// Forward and reverse Metropolis-Hastings acceptance probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acceptance {
    /// a_η(γ, γ')
    pub forward: f64,
    /// a_η(γ', γ)
    pub reverse: f64,
    /// Full log acceptance ratio for the forward move.
    pub log_ratio: f64,
}

impl Acceptance {
    /// From the full log ratio `log π(γ') − log π(γ) + log q(γ',γ) − log q(γ,γ')`.
    #[inline]
    pub fn from_log_ratio(log_ratio: f64) -> Self {
        let forward = if log_ratio >= 0.0 { 1.0 } else { log_ratio.exp() };
        let reverse = if log_ratio <= 0.0 { 1.0 } else { (-log_ratio).exp() };
        Self {
            forward,
            reverse,
            log_ratio,
        }
    }
}

/// min(1, exp(Δ log π + log proposal ratio)) and its reverse-move counterpart.
pub fn acceptance_probability(
    log_target_cur: f64,
    log_target_prop: f64,
    flips: &FlipRecord,
    eta: &ProposalParams,
) -> Acceptance {
    if !flips.any_flip() {
        return Acceptance::from_log_ratio(0.0);
    }
    Acceptance::from_log_ratio(log_target_prop - log_target_cur + log_proposal_ratio(flips, eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn near_degenerate_proposal_rarely_moves() {
        let eta = ProposalParams::uniform(10, 1e-6 * 1.5, 1e-6 * 1.5, 1e-6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gamma = ModelIndicator::from_indices(10, [2, 5]);
        let stayed = (0..10_000)
            .filter(|_| !sample_proposal(&gamma, &eta, &mut rng).1.any_flip())
            .count();
        assert!(stayed >= 9_990);
    }

    #[test]
    fn add_rate_within_binomial_bound() {
        let eps = 1e-3;
        let a = 1.0 - eps - 1e-9;
        let eta = ProposalParams::uniform(3, a, 0.5, eps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gamma = ModelIndicator::empty(3);
        let draws = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            let (g, _) = sample_proposal(&gamma, &eta, &mut rng);
            for j in g.ones() {
                counts[j] += 1;
            }
        }
        let p = eta.add_prob(0);
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * p).abs() <= 3.0 * sd + 1.0, "count {c}");
        }
    }

    #[test]
    fn joint_distribution_chi_square() {
        let eta = ProposalParams::new(vec![0.3, 0.6], vec![0.2, 0.7], 0.01).unwrap();
        let gamma = ModelIndicator::from_indices(2, [1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 1_000_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            counts[sample_proposal(&gamma, &eta, &mut rng).0.code() as usize] += 1;
        }
        let chi2: f64 = (0..4u64)
            .map(|code| {
                let target = ModelIndicator::from_code(2, code);
                let expected = draws as f64 * log_proposal_density(&gamma, &target, &eta).exp();
                (counts[code as usize] as f64 - expected).powi(2) / expected
            })
            .sum();
        // 3 degrees of freedom; 16.27 is the 0.999 quantile
        assert!(chi2 < 16.27, "chi2 {chi2}");
    }

    #[test]
    fn ratio_edge_cases() {
        let eta = ProposalParams::new(vec![0.2, 0.3], vec![0.4, 0.3], 0.001).unwrap();
        assert_eq!(log_proposal_ratio(&FlipRecord::default(), &eta), 0.0);
        let sym = FlipRecord {
            add_flips: vec![1],
            del_flips: vec![],
        };
        assert_eq!(log_proposal_ratio(&sym, &eta), 0.0);
        let one = FlipRecord {
            add_flips: vec![0],
            del_flips: vec![],
        };
        assert_relative_eq!(log_proposal_ratio(&one, &eta), 2f64.ln(), max_relative = 1e-12);
        let from = ModelIndicator::empty(2);
        let to = ModelIndicator::from_indices(2, [0]);
        let full = log_proposal_density(&to, &from, &eta) - log_proposal_density(&from, &to, &eta);
        assert_relative_eq!(full, 2f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn acceptance_examples() {
        let eta = ProposalParams::new(vec![0.2], vec![0.4], 0.001).unwrap();
        let none = acceptance_probability(-3.0, -1.0, &FlipRecord::default(), &eta);
        assert_eq!(none.forward, 1.0);
        let add = FlipRecord {
            add_flips: vec![0],
            del_flips: vec![],
        };
        let acc = acceptance_probability(-5.0, -5.0, &add, &eta);
        assert_eq!(acc.forward, 1.0);
        assert_relative_eq!(acc.reverse, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn mutation_indicator_cases() {
        let g = ModelIndicator::from_indices(4, [0, 2]);
        assert_eq!(mutation_indicator(&FlipRecord::between(&g, &g)), 0);
        assert_eq!(mutation_indicator(&FlipRecord::between(&g, &ModelIndicator::from_indices(4, [0]))), 1);
        let all = ModelIndicator::from_indices(4, [1, 3]);
        let rec = FlipRecord::between(&g, &all);
        assert_eq!(rec.count(), 4);
        assert_eq!(mutation_indicator(&rec), 1);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ProposalParams::uniform(3, 0.0005, 0.2, 0.001).is_err());
        assert!(ProposalParams::uniform(3, 0.2, 0.9995, 0.001).is_err());
        assert!(ProposalParams::uniform(3, 0.2, 0.2, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn flip_formula_matches_full_product(
            probs in proptest::collection::vec((0.01f64..0.99, 0.01f64..0.99), 1..12),
            seed in any::<u64>(),
        ) {
            let p = probs.len();
            let eta = ProposalParams::new(
                probs.iter().map(|x| x.0).collect(),
                probs.iter().map(|x| x.1).collect(),
                0.005,
            ).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let code: u64 = rng.random_range(0..(1u64 << p));
            let gamma = ModelIndicator::from_code(p, code);
            let (prop, flips) = sample_proposal(&gamma, &eta, &mut rng);
            prop_assert_eq!(&flips, &FlipRecord::between(&gamma, &prop));
            let full = log_proposal_density(&prop, &gamma, &eta) - log_proposal_density(&gamma, &prop, &eta);
            prop_assert!((log_proposal_ratio(&flips, &eta) - full).abs() < 1e-10);
            // exactly one direction saturates at 1
            let acc = acceptance_probability(0.3, -0.2, &flips, &eta);
            prop_assert!(acc.forward == 1.0 || acc.reverse == 1.0);
            prop_assert!((0.0..=1.0).contains(&acc.forward) && (0.0..=1.0).contains(&acc.reverse));
        }

        #[test]
        fn logit_state_stays_in_bounds(shifts in proptest::collection::vec(-50.0f64..50.0, 1..200)) {
            let eps = 1e-3;
            let mut eta = ProposalParams::uniform(1, 0.2, 0.2, eps).unwrap();
            for s in shifts {
                eta.shift_add(0, s);
                eta.shift_del(0, -s);
                prop_assert!(eta.add_prob(0) > eps && eta.add_prob(0) < 1.0 - eps);
                prop_assert!(eta.del_prob(0) > eps && eta.del_prob(0) < 1.0 - eps);
            }
        }
    }
}
