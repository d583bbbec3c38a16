//! `bvs`: adaptive Bayesian variable selection from the command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure, 5 i/o error while writing results.

mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bvs_core::synthetic::{generate, SyntheticSpec};

use config::{Algorithm, BetaParams, PriorKind, RunConfig};
use error::Result;

#[derive(Debug, Parser)]
#[command(name = "bvs", version, about = "Bayesian variable selection with individually adapted proposals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the posterior over models for a CSV data set.
    Run(Box<RunArgs>),
    /// Write a synthetic regression data set and its generating model.
    GenerateSynthetic(SynthArgs),
}

/// Every option overrides the same key in `--config`.
#[derive(Debug, Args)]
struct RunArgs {
    /// `key = value` file; keys are the long option names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the merged configuration and exit.
    #[arg(long)]
    print_config: bool,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Response column, by header name or 0-based index.
    #[arg(long)]
    response: Option<String>,
    #[arg(long, value_enum)]
    algorithm: Option<Algorithm>,
    #[arg(long, value_enum)]
    prior: Option<PriorKind>,
    #[arg(long)]
    g: Option<f64>,
    /// Prior inclusion probability (default 5/p).
    #[arg(long)]
    h: Option<f64>,
    /// Beta(a, b) hyperprior on h, as `a,b`.
    #[arg(long)]
    h_beta: Option<BetaParams>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    phi0: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    w: Option<f64>,
    /// Chains sharing one adapter (PT: independent replicas).
    #[arg(long)]
    chains: Option<usize>,
    /// Iterations summed over chains (PT: sweeps).
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    burnin: Option<u64>,
    #[arg(long)]
    thin: Option<u64>,
    /// Number of tempering levels.
    #[arg(long)]
    temps: Option<usize>,
    #[arg(long)]
    swap_target: Option<f64>,
    #[arg(long)]
    zeta0: Option<f64>,
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long)]
    smc_steps: Option<usize>,
    #[arg(long)]
    ess_frac: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        fn s<T: ToString>(v: &Option<T>) -> Option<String> {
            v.as_ref().map(T::to_string)
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        [
            ("data", path(&self.data)),
            ("response", self.response.clone()),
            ("algorithm", self.algorithm.map(|a| a.name().to_string())),
            ("prior", self.prior.map(|p| p.name().to_string())),
            ("g", s(&self.g)),
            ("h", s(&self.h)),
            ("h-beta", s(&self.h_beta)),
            ("tau", s(&self.tau)),
            ("epsilon", s(&self.epsilon)),
            ("lambda", s(&self.lambda)),
            ("phi0", s(&self.phi0)),
            ("nu", s(&self.nu)),
            ("w", s(&self.w)),
            ("chains", s(&self.chains)),
            ("iters", s(&self.iters)),
            ("burnin", s(&self.burnin)),
            ("thin", s(&self.thin)),
            ("temps", s(&self.temps)),
            ("swap-target", s(&self.swap_target)),
            ("zeta0", s(&self.zeta0)),
            ("particles", s(&self.particles)),
            ("smc-steps", s(&self.smc_steps)),
            ("ess-frac", s(&self.ess_frac)),
            ("replicates", s(&self.replicates)),
            ("seed", s(&self.seed)),
            ("standardize", self.standardize.then(|| "true".to_string())),
            ("out", path(&self.out)),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }

    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        for (k, v) in self.overrides() {
            cfg.set(k, &v)?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 60)]
    n: usize,
    #[arg(long, default_value_t = 12)]
    p: usize,
    #[arg(long, default_value_t = 3)]
    signals: usize,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    coef: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Data CSV; the response is the first column, named `y`.
    #[arg(long)]
    out: PathBuf,
    /// Generating model as JSON (default: `<out>.truth.json`).
    #[arg(long)]
    truth: Option<PathBuf>,
}

fn generate_synthetic(args: &SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        n: args.n,
        p: args.p,
        signals: args.signals,
        rho: args.rho,
        sigma: args.sigma,
        coef: args.coef,
        seed: args.seed,
    };
    let synth = generate(&spec)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        output::create_dir(dir)?;
    }
    output::write_atomic(&args.out, |w| synth.dataset.write_csv(w).map_err(std::io::Error::other))?;
    let truth = args.truth.clone().unwrap_or_else(|| {
        let mut s = args.out.clone().into_os_string();
        s.push(".truth.json");
        PathBuf::from(s)
    });
    output::write_json(&truth, &synth.truth)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => args.resolve().and_then(|cfg| {
            if args.print_config {
                print!("{}", cfg.to_kv_string());
                Ok(())
            } else {
                run::execute(&cfg)
            }
        }),
        Command::GenerateSynthetic(args) => generate_synthetic(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bvs: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

