use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use bvs_core::adaptation::{Adapter, Scheme};
use bvs_core::diagnostics::{
    ad_ratio_report, enumerate_posterior, pooled_ess, GoldSource, GoldStandard, MutationRate, PosteriorSummary,
    DEFAULT_TOP_MODELS,
};
use bvs_core::model::{Dataset, Posterior, Target, DEFAULT_CACHE_CAPACITY};
use bvs_core::samplers::{
    mca_run, multimove_run, pt_run, replicate_seed, smc_run, McmcConfig, PtConfig, SmcConfig, StepRecord,
    TemperatureLadder,
};
use bvs_core::{Execution, ModelIndicator};

use crate::config::{Algorithm, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{create_dir, write_csv, write_json};

/// Problems with at most this many variables get an exact reference for the A/D report.
const EXACT_REFERENCE_MAX_P: usize = 16;
const SWAP_WINDOW: usize = 10_000;

#[derive(Debug, Serialize)]
struct Manifest {
    algorithm: &'static str,
    seed: u64,
    replicate: usize,
    replicate_seed: u64,
    n: usize,
    p: usize,
    config: BTreeMap<&'static str, String>,
    mutation_rate: Option<MutationRate>,
    ess_model_size: Option<f64>,
    mean_model_size: f64,
    reference: Option<GoldSource>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    extra: BTreeMap<&'static str, serde_json::Value>,
    runtime_seconds: f64,
    created_unix: u64,
}

#[derive(Debug, Serialize)]
struct RunIndex {
    algorithm: &'static str,
    seed: u64,
    replicates: Vec<IndexEntry>,
    runtime_seconds: f64,
    created_unix: u64,
}

#[derive(Debug, Serialize)]
struct IndexEntry {
    replicate: usize,
    replicate_seed: u64,
    dir: String,
}

/// What a single sampler run produces, before it is written out.
struct Outcome {
    summary: PosteriorSummary,
    trace: Vec<(usize, Vec<StepRecord>)>,
    burnin: usize,
    adapter: Option<Adapter>,
    mutation_rate: Option<MutationRate>,
    extra: BTreeMap<&'static str, serde_json::Value>,
    stages: Option<Vec<bvs_core::samplers::SmcStage>>,
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn load_data(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg.data.as_ref().ok_or_else(|| CliError::Config("no data file given".into()))?;
    let data = Dataset::from_csv_path(path, &cfg.response)?;
    Ok(if cfg.standardize { data.standardized() } else { data })
}

pub fn execute(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let start = Instant::now();
    let data = load_data(cfg)?;
    let names = data.column_names().to_vec();
    let prior = cfg.prior_spec(data.p());
    let post = Arc::new(Posterior::new(data, prior)?);
    create_dir(&cfg.out)?;

    let exact = if post.p() <= EXACT_REFERENCE_MAX_P || cfg.algorithm == Algorithm::Enumerate {
        Some(enumerate_posterior(&post, bvs_core::diagnostics::DEFAULT_ENUMERATION_LIMIT, Execution::Parallel)?)
    } else {
        None
    };

    if cfg.algorithm == Algorithm::Enumerate {
        let e = exact.expect("enumeration computed above");
        let summary = PosteriorSummary {
            pips: e.pips().to_vec(),
            mean_model_size: e.mean_model_size,
            top_models: e.top_models(DEFAULT_TOP_MODELS),
            sample_count: 0,
        };
        write_pips(&cfg.out, &names, &summary.pips)?;
        write_top_models(&cfg.out, &names, &summary.top_models)?;
        let mut extra = BTreeMap::new();
        extra.insert("log_normalizer", e.log_normalizer.into());
        let manifest = Manifest {
            algorithm: cfg.algorithm.name(),
            seed: cfg.seed,
            replicate: 0,
            replicate_seed: cfg.seed,
            n: post.n(),
            p: post.p(),
            config: cfg.entries(),
            mutation_rate: None,
            ess_model_size: None,
            mean_model_size: e.mean_model_size,
            reference: Some(GoldSource::Enumeration),
            extra,
            runtime_seconds: start.elapsed().as_secs_f64(),
            created_unix: now_unix(),
        };
        return write_json(&cfg.out.join("manifest.json"), &manifest);
    }

    let gold = exact.map(|e| e.gold);
    let dirs: Vec<PathBuf> = if cfg.replicates == 1 {
        vec![cfg.out.clone()]
    } else {
        (0..cfg.replicates).map(|i| cfg.out.join(format!("replicate-{i:03}"))).collect()
    };
    let results = Execution::Parallel.map_range(cfg.replicates, |i| {
        replicate(cfg, &post, &names, gold.as_ref(), i, &dirs[i])
    });
    results.into_iter().collect::<Result<Vec<_>>>()?;

    if cfg.replicates > 1 {
        let index = RunIndex {
            algorithm: cfg.algorithm.name(),
            seed: cfg.seed,
            replicates: (0..cfg.replicates)
                .map(|i| IndexEntry {
                    replicate: i,
                    replicate_seed: replicate_seed(cfg.seed, i as u64),
                    dir: dirs[i].file_name().unwrap_or_default().to_string_lossy().into_owned(),
                })
                .collect(),
            runtime_seconds: start.elapsed().as_secs_f64(),
            created_unix: now_unix(),
        };
        write_json(&cfg.out.join("manifest.json"), &index)?;
    }
    Ok(())
}

fn replicate(
    cfg: &RunConfig,
    post: &Arc<Posterior>,
    names: &[String],
    gold: Option<&GoldStandard>,
    i: usize,
    dir: &Path,
) -> Result<()> {
    let start = Instant::now();
    let seed = replicate_seed(cfg.seed, i as u64);
    create_dir(dir)?;
    let mut target = Target::new(post.clone(), DEFAULT_CACHE_CAPACITY);
    let out = sample(cfg, post, &mut target, seed)?;

    write_pips(dir, names, &out.summary.pips)?;
    write_top_models(dir, names, &out.summary.top_models)?;
    if !out.trace.is_empty() {
        write_trace(dir, &out.trace, cfg.thin)?;
    }
    if let Some(stages) = &out.stages {
        write_csv(
            &dir.join("stages.csv"),
            &["stage", "t", "ess", "log_mean_weight", "mean_acceptance", "mutation_rate"],
            stages.iter().enumerate().map(|(k, s)| {
                vec![
                    k.to_string(),
                    s.t.to_string(),
                    s.ess.to_string(),
                    s.log_mean_weight.to_string(),
                    s.mean_acceptance.to_string(),
                    s.mutation_rate.to_string(),
                ]
            }),
        )?;
    }
    let own_gold;
    let reference = match gold {
        Some(g) => g,
        None => {
            own_gold = GoldStandard::long_run(out.summary.pips.clone());
            &own_gold
        }
    };
    if let Some(ad) = &out.adapter {
        write_csv(
            &dir.join("eta.csv"),
            &["j", "name", "add_prob", "del_prob"],
            (0..ad.params.p()).map(|j| {
                vec![
                    j.to_string(),
                    names[j].clone(),
                    ad.params.add_prob(j).to_string(),
                    ad.params.del_prob(j).to_string(),
                ]
            }),
        )?;
        write_csv(
            &dir.join("ad_ratio.csv"),
            &["j", "name", "ad_ratio", "pip_odds", "log_discrepancy"],
            ad_ratio_report(&ad.params, reference).into_iter().map(|r| {
                vec![
                    r.j.to_string(),
                    names[r.j].clone(),
                    r.ad_ratio.to_string(),
                    r.pip_odds.to_string(),
                    r.log_discrepancy.to_string(),
                ]
            }),
        )?;
    }

    let ess = if out.trace.is_empty() {
        None
    } else {
        let series: Vec<Vec<f64>> = out
            .trace
            .iter()
            .map(|(_, r)| r.get(out.burnin..).unwrap_or(&[]).iter().map(|s| s.model_size as f64).collect())
            .collect();
        Some(pooled_ess(&series)?.ess)
    };
    let manifest = Manifest {
        algorithm: cfg.algorithm.name(),
        seed: cfg.seed,
        replicate: i,
        replicate_seed: seed,
        n: post.n(),
        p: post.p(),
        config: cfg.entries(),
        mutation_rate: out.mutation_rate,
        ess_model_size: ess,
        mean_model_size: out.summary.mean_model_size,
        reference: Some(reference.source),
        extra: out.extra,
        runtime_seconds: start.elapsed().as_secs_f64(),
        created_unix: now_unix(),
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

fn sample(cfg: &RunConfig, post: &Posterior, target: &mut Target, seed: u64) -> Result<Outcome> {
    let adapter = |scheme| Adapter::init(post.p(), post.prior().effective_h(), cfg.adapt(), scheme);
    let mcmc = McmcConfig {
        iterations: cfg.iters,
        burnin: cfg.burnin,
        thin: cfg.thin,
        chains: cfg.chains,
        seed,
        ..McmcConfig::default()
    };
    match cfg.algorithm {
        Algorithm::Ia | Algorithm::IaRapa | Algorithm::MhBaseline => {
            let run = match cfg.algorithm {
                Algorithm::Ia => mca_run(target, adapter(Scheme::Ia)?, &mcmc)?,
                Algorithm::IaRapa => mca_run(target, adapter(Scheme::Rapa)?, &mcmc)?,
                _ => multimove_run(target, &mcmc)?,
            };
            let mut extra = BTreeMap::new();
            if run.truncated > 0 {
                extra.insert("truncated_iterations", run.truncated.into());
            }
            Ok(Outcome {
                summary: run.summary(DEFAULT_TOP_MODELS)?,
                mutation_rate: Some(run.mutation_rate()?),
                burnin: run.per_chain_burnin as usize,
                trace: run.records.into_iter().enumerate().collect(),
                adapter: run.adapter,
                extra,
                stages: None,
            })
        }
        Algorithm::Pt => {
            let ladder = TemperatureLadder::geometric(cfg.temps, cfg.ladder())?;
            let pt = PtConfig {
                sweeps: cfg.iters,
                burnin: cfg.burnin,
                thin: cfg.thin,
                replicas: cfg.chains,
                seed,
                ..PtConfig::default()
            };
            let run = pt_run(target, ladder, adapter(Scheme::Rapa)?, &pt)?;
            let burnin = run.burnin as usize;
            let cold: Vec<StepRecord> = run.cold_records.iter().flat_map(|r| r[burnin..].iter().copied()).collect();
            let mut extra = BTreeMap::new();
            extra.insert("swap_rate_last_10000", run.trailing_swap_rate(SWAP_WINDOW).into());
            extra.insert("temperatures", run.ensemble.ladder.temperatures().to_vec().into());
            Ok(Outcome {
                summary: run.pips.summary(DEFAULT_TOP_MODELS)?,
                mutation_rate: Some(bvs_core::diagnostics::mutation_rate(&cold, 0)?),
                burnin,
                adapter: run.ensemble.adapters.last().cloned(),
                trace: run.cold_records.into_iter().enumerate().collect(),
                extra,
                stages: None,
            })
        }
        Algorithm::Smc => {
            let smc = SmcConfig {
                particles: cfg.particles,
                steps: cfg.smc_steps,
                ess_frac: cfg.ess_frac,
                seed,
            };
            let run = smc_run(target, adapter(Scheme::Rapa)?, &smc)?;
            let mut extra = BTreeMap::new();
            extra.insert("log_evidence", run.log_evidence.into());
            extra.insert("stages", run.stages.len().into());
            let last = run.stages.last().map(|s| s.mutation_rate).unwrap_or(0.0);
            Ok(Outcome {
                summary: run.pips().summary(DEFAULT_TOP_MODELS)?,
                mutation_rate: Some(MutationRate {
                    realized: last,
                    rao_blackwell: run.stages.last().map(|s| s.mean_acceptance).unwrap_or(0.0),
                }),
                burnin: 0,
                trace: Vec::new(),
                adapter: Some(run.adapter),
                extra,
                stages: Some(run.stages),
            })
        }
        Algorithm::Enumerate => unreachable!("handled before sampling"),
    }
}

fn write_pips(dir: &Path, names: &[String], pips: &[f64]) -> Result<()> {
    write_csv(
        &dir.join("pips.csv"),
        &["j", "name", "pip"],
        pips.iter().enumerate().map(|(j, v)| vec![j.to_string(), names[j].clone(), v.to_string()]),
    )
}

fn write_top_models(dir: &Path, names: &[String], top: &[(ModelIndicator, f64)]) -> Result<()> {
    write_csv(
        &dir.join("top_models.csv"),
        &["rank", "size", "probability", "variables"],
        top.iter().enumerate().map(|(k, (m, prob))| {
            let vars: Vec<&str> = m.ones().map(|j| names[j].as_str()).collect();
            vec![(k + 1).to_string(), m.size().to_string(), prob.to_string(), vars.join(" ")]
        }),
    )
}

fn write_trace(dir: &Path, trace: &[(usize, Vec<StepRecord>)], thin: u64) -> Result<()> {
    let thin = thin.max(1) as usize;
    let rows = trace.iter().flat_map(|(c, recs)| {
        recs.iter().enumerate().step_by(thin).map(move |(i, r)| {
            vec![
                c.to_string(),
                i.to_string(),
                r.model_size.to_string(),
                r.accepted.to_string(),
                r.mutated().to_string(),
                r.log_kernel.to_string(),
            ]
        })
    });
    write_csv(
        &dir.join("trace.csv"),
        &["chain", "iteration", "model_size", "accepted", "mutated", "log_kernel"],
        rows,
    )
}
