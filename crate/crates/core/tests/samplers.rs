//! Sampler output checked against exhaustive enumeration.

use std::sync::Arc;

use bvs_core::adaptation::{AdaptConfig, Adapter, Scheme};
use bvs_core::diagnostics::{enumerate_posterior, ess, Enumeration};
use bvs_core::model::{Posterior, PriorSpec, Target};
use bvs_core::proposal::ProposalParams;
use bvs_core::samplers::{
    ia_step, mca_run, multimove_run, pt_run, replicate_seed, smc_run, stream_rng, ChainState, LadderConfig,
    McmcConfig, PtConfig, SmcConfig, TemperatureLadder,
};
use bvs_core::synthetic::{generate, SyntheticSpec};
use bvs_core::{Execution, ModelIndicator};

fn posterior(p: usize, seed: u64) -> Arc<Posterior> {
    let spec = SyntheticSpec {
        n: 60,
        p,
        signals: 3.min(p),
        rho: 0.3,
        coef: 0.5,
        seed,
        ..Default::default()
    };
    let data = generate(&spec).unwrap().dataset;
    Arc::new(Posterior::new(data, PriorSpec::ridge(100.0, 5.0 / 12.0)).unwrap())
}

fn gold(post: &Posterior) -> Enumeration {
    enumerate_posterior(post, 20, Execution::Sequential).unwrap()
}

fn max_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rapa(post: &Posterior) -> Adapter {
    Adapter::init(post.p(), post.prior().effective_h(), AdaptConfig::default(), Scheme::Rapa).unwrap()
}

#[test]
fn frozen_kernel_visits_models_in_proportion() {
    let post = posterior(4, 3);
    let e = gold(&post);
    let eta = ProposalParams::new(vec![0.3, 0.5, 0.2, 0.6], vec![0.4, 0.3, 0.7, 0.5], 0.001).unwrap();
    let cfg = AdaptConfig {
        phi0: 0.0,
        ..Default::default()
    };
    let mut ad = Adapter::new(eta.clone(), cfg, Scheme::Ia);
    let mut target = Target::new(post.clone(), 64);
    let mut chain = ChainState::new(ModelIndicator::empty(4), 1.0, stream_rng(5, 0), &mut target).unwrap();
    let steps = 1_000_000;
    let mut codes = Vec::with_capacity(steps);
    for _ in 0..steps {
        ia_step(&mut chain, &mut ad, &mut target).unwrap();
        codes.push(chain.gamma().code());
    }
    assert_eq!(ad.params, eta);
    for (code, &prob) in e.probabilities().iter().enumerate() {
        let series: Vec<f64> = codes.iter().map(|&c| (c == code as u64) as u8 as f64).collect();
        let freq = series.iter().sum::<f64>() / steps as f64;
        let n_eff = ess(&series).unwrap().ess;
        let sd = (prob * (1.0 - prob) / n_eff).sqrt();
        assert!((freq - prob).abs() <= 3.0 * sd + 1e-9, "model {code}: {freq} vs {prob} (sd {sd:.2e})");
    }
}

#[test]
fn shared_adaptation_across_chain_counts() {
    let post = posterior(12, 1);
    let e = gold(&post);
    for chains in [1, 5, 25] {
        let mut target = Target::new(post.clone(), 1 << 16);
        let cfg = McmcConfig {
            iterations: 500_000,
            burnin: 50_000,
            chains,
            seed: 11,
            keep_records: false,
            ..Default::default()
        };
        let run = mca_run(&mut target, rapa(&post), &cfg).unwrap();
        assert_eq!(run.pips.samples(), (cfg.per_chain_iterations() - cfg.per_chain_burnin()) * chains as u64);
        let err = max_err(&run.pips.pips(), e.pips());
        assert!(err < 0.03, "r = {chains}: max error {err}");
    }
}

#[test]
fn multimove_baseline_agrees_with_enumeration() {
    let post = posterior(12, 1);
    let e = gold(&post);
    let mut target = Target::new(post.clone(), 1 << 16);
    let cfg = McmcConfig {
        iterations: 400_000,
        burnin: 20_000,
        seed: 4,
        keep_records: false,
        ..Default::default()
    };
    let run = multimove_run(&mut target, &cfg).unwrap();
    assert!(max_err(&run.pips.pips(), e.pips()) < 0.03);
}

#[test]
fn tempering_cold_chain_agrees_with_enumeration() {
    let post = posterior(12, 1);
    let e = gold(&post);
    let mut target = Target::new(post.clone(), 1 << 16);
    let ladder = TemperatureLadder::geometric(4, LadderConfig::default()).unwrap();
    let cfg = PtConfig {
        sweeps: 150_000,
        burnin: 10_000,
        seed: 8,
        ..Default::default()
    };
    let run = pt_run(&mut target, ladder, rapa(&post), &cfg).unwrap();
    assert!(max_err(&run.pips.pips(), e.pips()) < 0.03);
    assert!(run.ensemble.ladder.is_valid());
}

#[test]
fn smc_stages_increase_to_one() {
    let post = posterior(12, 1);
    let mut target = Target::new(post.clone(), 1 << 16);
    let cfg = SmcConfig {
        particles: 500,
        steps: 3,
        seed: 2,
        ..Default::default()
    };
    let run = smc_run(&mut target, rapa(&post), &cfg).unwrap();
    assert!(run.stages.windows(2).all(|w| w[0].t < w[1].t));
    assert_eq!(run.stages.last().unwrap().t, 1.0);
    assert!(run.stages.iter().all(|s| s.ess >= 1.0 && s.ess <= 500.0 + 1e-9));
    assert_eq!(run.particles.len(), 500);
}

fn fingerprint(post: &Arc<Posterior>, seed: u64) -> Vec<(u32, bool, u64)> {
    let mut target = Target::new(post.clone(), 1 << 12);
    let cfg = McmcConfig {
        iterations: 5_000,
        burnin: 500,
        chains: 3,
        seed,
        ..Default::default()
    };
    let run = mca_run(&mut target, rapa(post), &cfg).unwrap();
    run.records
        .iter()
        .flatten()
        .map(|r| (r.model_size, r.accepted, r.log_kernel.to_bits()))
        .collect()
}

#[test]
fn replicates_do_not_depend_on_scheduling() {
    let post = posterior(12, 1);
    let seeds: Vec<u64> = (0..6).map(|i| replicate_seed(77, i)).collect();
    let seq = Execution::Sequential.map_slice(&seeds, |&s| fingerprint(&post, s));
    let par = Execution::Parallel.map_slice(&seeds, |&s| fingerprint(&post, s));
    assert_eq!(seq, par);
    assert_ne!(seq[0], seq[1]);
}

#[test]
fn every_sampler_is_reproducible() {
    let post = posterior(12, 1);
    assert_eq!(fingerprint(&post, 3), fingerprint(&post, 3));

    let pt = || {
        let mut target = Target::new(post.clone(), 1 << 12);
        let ladder = TemperatureLadder::geometric(3, LadderConfig::default()).unwrap();
        let cfg = PtConfig {
            sweeps: 2_000,
            burnin: 100,
            replicas: 2,
            seed: 5,
            ..Default::default()
        };
        let run = pt_run(&mut target, ladder, rapa(&post), &cfg).unwrap();
        (run.pips.pips(), run.ensemble.ladder.temperatures().to_vec())
    };
    assert_eq!(pt(), pt());

    let smc = || {
        let mut target = Target::new(post.clone(), 1 << 12);
        let cfg = SmcConfig {
            particles: 200,
            steps: 2,
            seed: 6,
            ..Default::default()
        };
        let run = smc_run(&mut target, rapa(&post), &cfg).unwrap();
        (run.log_evidence.to_bits(), run.pips().pips())
    };
    assert_eq!(smc(), smc());
}
