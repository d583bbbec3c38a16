//! Run configuration as a flat `key = value` file.
//!
//! Keys match the long command-line flags without the leading dashes. Blank
//! lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bvs_core::adaptation::AdaptConfig;
use bvs_core::model::{CoefCovariance, InclusionPrior, PriorSpec, ResponseSelector};
use bvs_core::samplers::LadderConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Algorithm {
    Ia,
    IaRapa,
    MhBaseline,
    Pt,
    Smc,
    Enumerate,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ia => "ia",
            Algorithm::IaRapa => "ia-rapa",
            Algorithm::MhBaseline => "mh-baseline",
            Algorithm::Pt => "pt",
            Algorithm::Smc => "smc",
            Algorithm::Enumerate => "enumerate",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PriorKind {
    Ridge,
    Gprior,
}

impl PriorKind {
    pub fn name(self) -> &'static str {
        match self {
            PriorKind::Ridge => "ridge",
            PriorKind::Gprior => "gprior",
        }
    }
}

impl FromStr for PriorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, true)
    }
}

/// Beta(a, b) hyperprior on h, written `a,b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub a: f64,
    pub b: f64,
}

impl FromStr for BetaParams {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        Ok(BetaParams { a: num(a)?, b: num(b)? })
    }
}

impl fmt::Display for BetaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub response: ResponseSelector,
    pub algorithm: Algorithm,
    pub prior: PriorKind,
    pub g: f64,
    /// Prior inclusion probability; defaults to 5/p when unset.
    pub h: Option<f64>,
    pub h_beta: Option<BetaParams>,
    pub tau: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub phi0: f64,
    pub nu: f64,
    pub w: f64,
    pub chains: usize,
    pub iters: u64,
    pub burnin: u64,
    pub thin: u64,
    pub temps: usize,
    pub swap_target: f64,
    pub zeta0: f64,
    pub particles: usize,
    pub smc_steps: usize,
    pub ess_frac: f64,
    pub replicates: usize,
    pub seed: u64,
    pub standardize: bool,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let adapt = AdaptConfig::default();
        let ladder = LadderConfig::default();
        Self {
            data: None,
            response: ResponseSelector::Index(0),
            algorithm: Algorithm::IaRapa,
            prior: PriorKind::Ridge,
            g: 100.0,
            h: None,
            h_beta: None,
            tau: adapt.tau,
            epsilon: adapt.epsilon,
            lambda: adapt.lambda,
            phi0: adapt.phi0,
            nu: adapt.nu,
            w: adapt.w,
            chains: 1,
            iters: 100_000,
            burnin: 10_000,
            thin: 1,
            temps: 6,
            swap_target: ladder.target,
            zeta0: ladder.zeta0,
            particles: 2000,
            smc_steps: 10,
            ess_frac: 0.9,
            replicates: 1,
            seed: 0,
            standardize: false,
            out: PathBuf::from("bvs-out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Config(format!("bad value `{value}` for `{key}`: {e}")))
}

impl RunConfig {
    /// Set one key; unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "data" => self.data = (!v.is_empty()).then(|| PathBuf::from(v)),
            "response" => self.response = parse(key, v)?,
            "algorithm" => self.algorithm = parse(key, v)?,
            "prior" => self.prior = parse(key, v)?,
            "g" => self.g = parse(key, v)?,
            "h" => self.h = if v.is_empty() { None } else { Some(parse(key, v)?) },
            "h-beta" => self.h_beta = if v.is_empty() { None } else { Some(parse(key, v)?) },
            "tau" => self.tau = parse(key, v)?,
            "epsilon" => self.epsilon = parse(key, v)?,
            "lambda" => self.lambda = parse(key, v)?,
            "phi0" => self.phi0 = parse(key, v)?,
            "nu" => self.nu = parse(key, v)?,
            "w" => self.w = parse(key, v)?,
            "chains" => self.chains = parse(key, v)?,
            "iters" => self.iters = parse(key, v)?,
            "burnin" => self.burnin = parse(key, v)?,
            "thin" => self.thin = parse(key, v)?,
            "temps" => self.temps = parse(key, v)?,
            "swap-target" => self.swap_target = parse(key, v)?,
            "zeta0" => self.zeta0 = parse(key, v)?,
            "particles" => self.particles = parse(key, v)?,
            "smc-steps" => self.smc_steps = parse(key, v)?,
            "ess-frac" => self.ess_frac = parse(key, v)?,
            "replicates" => self.replicates = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "standardize" => self.standardize = parse(key, v)?,
            "out" => self.out = PathBuf::from(v),
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order.
    pub fn entries(&self) -> BTreeMap<&'static str, String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        BTreeMap::from([
            ("data", opt(self.data.as_ref().map(|p| p.display().to_string()))),
            ("response", self.response.to_string()),
            ("algorithm", self.algorithm.name().to_string()),
            ("prior", self.prior.name().to_string()),
            ("g", self.g.to_string()),
            ("h", opt(self.h.map(|h| h.to_string()))),
            ("h-beta", opt(self.h_beta.map(|b| b.to_string()))),
            ("tau", self.tau.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("lambda", self.lambda.to_string()),
            ("phi0", self.phi0.to_string()),
            ("nu", self.nu.to_string()),
            ("w", self.w.to_string()),
            ("chains", self.chains.to_string()),
            ("iters", self.iters.to_string()),
            ("burnin", self.burnin.to_string()),
            ("thin", self.thin.to_string()),
            ("temps", self.temps.to_string()),
            ("swap-target", self.swap_target.to_string()),
            ("zeta0", self.zeta0.to_string()),
            ("particles", self.particles.to_string()),
            ("smc-steps", self.smc_steps.to_string()),
            ("ess-frac", self.ess_frac.to_string()),
            ("replicates", self.replicates.to_string()),
            ("seed", self.seed.to_string()),
            ("standardize", self.standardize.to_string()),
            ("out", self.out.display().to_string()),
        ])
    }

    pub fn to_kv_string(&self) -> String {
        self.entries().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Apply `key = value` lines on top of `self`.
    pub fn merge_kv(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_kv(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_kv_str(&text)
    }

    pub fn adapt(&self) -> AdaptConfig {
        AdaptConfig {
            tau: self.tau,
            epsilon: self.epsilon,
            lambda: self.lambda,
            phi0: self.phi0,
            nu: self.nu,
            w: self.w,
        }
    }

    pub fn ladder(&self) -> LadderConfig {
        LadderConfig {
            zeta0: self.zeta0,
            target: self.swap_target,
            ..LadderConfig::default()
        }
    }

    pub fn prior_spec(&self, p: usize) -> PriorSpec {
        let coef_cov = match self.prior {
            PriorKind::Ridge => CoefCovariance::Ridge { g: self.g },
            PriorKind::Gprior => CoefCovariance::GPrior { g: self.g },
        };
        let inclusion = match self.h_beta {
            Some(BetaParams { a, b }) => InclusionPrior::BetaHyper { a, b },
            None => InclusionPrior::Fixed {
                h: self.h.unwrap_or_else(|| (5.0 / p as f64).min(0.5)),
            },
        };
        PriorSpec { coef_cov, inclusion }
    }

    /// Checks that do not need the data.
    pub fn validate(&self) -> Result<()> {
        if self.data.is_none() {
            return Err(CliError::Config("no data file given".into()));
        }
        if self.h.is_some() && self.h_beta.is_some() {
            return Err(CliError::Config("give either h or h-beta, not both".into()));
        }
        if self.replicates == 0 {
            return Err(CliError::Config("replicates must be at least 1".into()));
        }
        if self.algorithm == Algorithm::Pt && self.temps < 2 {
            return Err(CliError::Config("parallel tempering needs at least 2 temperatures".into()));
        }
        self.adapt().validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_kv_str(&cfg.to_kv_string()).unwrap(), cfg);
    }

    #[test]
    fn comments_and_unknown_keys() {
        let cfg = RunConfig::from_kv_str("# sweep\n\ntau = 0.3\nalgorithm=smc\n").unwrap();
        assert_eq!(cfg.tau, 0.3);
        assert_eq!(cfg.algorithm, Algorithm::Smc);
        assert!(matches!(RunConfig::from_kv_str("bogus = 1"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::from_kv_str("tau"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::from_kv_str("chains = -1"), Err(CliError::Config(_))));
    }

    #[test]
    fn default_h_is_five_over_p() {
        let spec = RunConfig::default().prior_spec(100);
        assert_eq!(spec.inclusion, InclusionPrior::Fixed { h: 0.05 });
    }

    fn algorithms() -> impl Strategy<Value = Algorithm> {
        prop_oneof![
            Just(Algorithm::Ia),
            Just(Algorithm::IaRapa),
            Just(Algorithm::MhBaseline),
            Just(Algorithm::Pt),
            Just(Algorithm::Smc),
            Just(Algorithm::Enumerate),
        ]
    }

    prop_compose! {
        fn configs()(
            algorithm in algorithms(),
            gprior in any::<bool>(),
            g in 0.01f64..1e4,
            h in proptest::option::of(0.001f64..0.999),
            beta in proptest::option::of((0.1f64..10.0, 0.1f64..10.0)),
            tau in 0.01f64..0.99,
            epsilon in 1e-9f64..0.1,
            lambda in 0.51f64..=1.0,
            w in 0.0f64..=1.0,
            chains in 1usize..50,
            iters in 1u64..10_000_000,
            seed in any::<u64>(),
            temps in 2usize..12,
            particles in 2usize..10_000,
            ess_frac in 0.01f64..0.99,
            standardize in any::<bool>(),
            response in prop_oneof![(0usize..20).prop_map(ResponseSelector::Index), "[a-z][a-z0-9_]{0,8}".prop_map(ResponseSelector::Name)],
            out in "[a-z][a-z0-9_/]{0,12}",
        ) -> RunConfig {
            RunConfig {
                algorithm,
                prior: if gprior { PriorKind::Gprior } else { PriorKind::Ridge },
                g,
                h,
                h_beta: beta.map(|(a, b)| BetaParams { a, b }),
                tau,
                epsilon,
                lambda,
                w,
                chains,
                iters,
                burnin: iters / 10,
                seed,
                temps,
                particles,
                ess_frac,
                standardize,
                response,
                data: Some(PathBuf::from("data.csv")),
                out: PathBuf::from(out),
                ..RunConfig::default()
            }
        }
    }

    proptest! {
        #[test]
        fn kv_round_trip(cfg in configs()) {
            prop_assert_eq!(RunConfig::from_kv_str(&cfg.to_kv_string()).unwrap(), cfg);
        }
    }
}
