//! Experiment configuration: JSON ingestion and the tiny rule grammar for
//! deriving N from p and y from N. The grammar intentionally covers only
//! powers, log-powers, and fixed values; anything else is a config error.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    Table,
    Q,
    R,
    #[serde(rename = "PM")]
    Pm,
    TypeI,
    Incomplete,
    Jcount,
    VerifyT12,
    VerifyT15,
    VerifyLemmas,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrimeSpec {
    /// Explicit list of primes.
    List { list: Vec<u64> },
    /// The first `first` primes >= `min`.
    First { first: usize, min: u64 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EllSpec {
    Even(u32),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OutputFormat {
    #[default]
    #[serde(rename = "csv")]
    Csv,
    #[serde(rename = "json")]
    Json,
}

/// Extra parameters for the Jcount experiment: box size H, power-residue
/// range D, and exponent r. Defaults put A*D near 2p so the leading term of
/// the count bound is exercised.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct JParams {
    pub h: Option<u64>,
    pub d: Option<u64>,
    pub r: Option<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub primes: PrimeSpec,
    #[serde(default = "default_s_values")]
    pub s_values: Vec<u32>,
    #[serde(rename = "N_rule", default = "default_n_rule")]
    pub n_rule: String,
    #[serde(default)]
    pub y_rule: Option<String>,
    #[serde(default)]
    pub ell: Option<EllSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "C", default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// 0 means "let the pool pick"; output is identical either way.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub j_params: Option<JParams>,
    /// Draw count for Incomplete / VerifyLemmas scans.
    #[serde(default = "default_draws")]
    pub draws: usize,
}

fn default_s_values() -> Vec<u32> {
    vec![2]
}

fn default_n_rule() -> String {
    "p".to_string()
}

fn default_c() -> f64 {
    10.0
}

fn default_draws() -> usize {
    50
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        parse_n_rule(&self.n_rule)?;
        if let Some(y) = &self.y_rule {
            parse_y_rule(y)?;
        }
        if self.s_values.is_empty() {
            bail!("s_values must be nonempty");
        }
        if self.s_values.contains(&0) {
            bail!("dimension s must be >= 1");
        }
        if let Some(EllSpec::Even(e)) = self.ell {
            if e < 2 || e % 2 != 0 {
                bail!("ell must be an even integer >= 2 or \"auto\"");
            }
        }
        if let (Experiment::R | Experiment::VerifyT15, None) = (self.experiment, &self.y_rule) {
            bail!("experiment requires a y_rule")
        }
        Ok(())
    }

    pub fn primes(&self) -> Vec<u64> {
        match &self.primes {
            PrimeSpec::List { list } => list.clone(),
            PrimeSpec::First { first, min } => klooster::fields::primes_from(*min, *first),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum NRule {
    P,
    PPow(f64),
    Fixed(u64),
}

impl NRule {
    pub fn apply(&self, p: u64) -> u64 {
        match self {
            NRule::P => p,
            NRule::PPow(e) => (p as f64).powf(*e).floor() as u64,
            NRule::Fixed(v) => *v,
        }
    }
}

pub fn parse_n_rule(rule: &str) -> anyhow::Result<NRule> {
    if rule == "p" {
        return Ok(NRule::P);
    }
    if let Some(exp) = rule.strip_prefix("p^") {
        let e: f64 = exp.parse().context("exponent in N_rule")?;
        if e.is_nan() || e <= 0.0 {
            bail!("N_rule exponent must be positive");
        }
        return Ok(NRule::PPow(e));
    }
    if let Some(v) = rule.strip_prefix("fixed:") {
        return Ok(NRule::Fixed(v.parse().context("fixed value in N_rule")?));
    }
    bail!("unrecognized N_rule {rule:?}; expected \"p\", \"p^<exp>\", or \"fixed:<int>\"")
}

#[derive(Clone, Copy, Debug)]
pub enum YRule {
    LogPow(f64),
    NPow(f64),
    Fixed(f64),
}

impl YRule {
    pub fn apply(&self, n: u64) -> f64 {
        match self {
            YRule::LogPow(k) => (n as f64).ln().powf(*k),
            YRule::NPow(e) => (n as f64).powf(*e),
            YRule::Fixed(v) => *v,
        }
    }
}

pub fn parse_y_rule(rule: &str) -> anyhow::Result<YRule> {
    if let Some(k) = rule.strip_prefix("log_power:") {
        return Ok(YRule::LogPow(k.parse().context("exponent in y_rule")?));
    }
    if let Some(e) = rule.strip_prefix("n_power:") {
        return Ok(YRule::NPow(e.parse().context("exponent in y_rule")?));
    }
    if let Some(v) = rule.strip_prefix("fixed:") {
        return Ok(YRule::Fixed(v.parse().context("fixed value in y_rule")?));
    }
    bail!("unrecognized y_rule {rule:?}; expected \"log_power:<k>\", \"n_power:<e>\", or \"fixed:<v>\"")
}
