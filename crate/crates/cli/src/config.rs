//! Experiment configuration: defaults, a flat key=value file, the cache
//! directory environment override, then command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mixlab::eigenvalues::MAX_CUTOFF;
use mixlab::mixing::MAX_ELL;

pub const CACHE_ENV: &str = "MIXLAB_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ShiftPolicy {
    All,
    /// The non-identity class of least minimal norm.
    MinimalQ,
    /// Explicit class indices; indices beyond h are skipped.
    Explicit(Vec<usize>),
}

impl ShiftPolicy {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => ShiftPolicy::All,
            "min-q" => ShiftPolicy::MinimalQ,
            list => ShiftPolicy::Explicit(
                list.split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .with_context(|| format!("shift_policy must be all, min-q or a list of indices, got {list:?}"))?,
            ),
        })
    }
}

impl fmt::Display for ShiftPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShiftPolicy::All => write!(f, "all"),
            ShiftPolicy::MinimalQ => write!(f, "min-q"),
            ShiftPolicy::Explicit(v) => {
                let s: Vec<String> = v.iter().map(|i| i.to_string()).collect();
                write!(f, "{}", s.join(","))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub d_min: u64,
    pub d_max: u64,
    pub squarefree_only: bool,
    pub l_max: u32,
    pub tau_cutoff: usize,
    pub shift_policy: ShiftPolicy,
    /// Largest prime tried as a packet generator.
    pub prime_cap: u64,
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    /// Seeds the sampled group elements of the local checks (nothing else is random).
    pub seed: u64,
    pub local_samples: usize,
    /// Worker threads for the d-sweeps; 0 lets rayon decide.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            d_min: 10,
            d_max: 500,
            squarefree_only: true,
            l_max: 8,
            tau_cutoff: 100_000,
            shift_policy: ShiftPolicy::All,
            prime_cap: 2000,
            out_dir: PathBuf::from("out"),
            cache_dir: PathBuf::from("cache"),
            seed: 20240917,
            local_samples: 1000,
            threads: 0,
        }
    }
}

pub const KEYS: [&str; 12] = [
    "d_min",
    "d_max",
    "squarefree_only",
    "l_max",
    "tau_cutoff",
    "shift_policy",
    "prime_cap",
    "out_dir",
    "cache_dir",
    "seed",
    "local_samples",
    "threads",
];

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let num = || v.parse::<u64>().with_context(|| format!("{key}: expected an integer, got {v:?}"));
        match key {
            "d_min" => self.d_min = num()?,
            "d_max" => self.d_max = num()?,
            "squarefree_only" => {
                self.squarefree_only = v.parse().with_context(|| format!("{key}: expected true or false"))?
            }
            "l_max" => self.l_max = num()? as u32,
            "tau_cutoff" => self.tau_cutoff = num()? as usize,
            "shift_policy" => self.shift_policy = ShiftPolicy::parse(v)?,
            "prime_cap" => self.prime_cap = num()?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "cache_dir" => self.cache_dir = PathBuf::from(v),
            "seed" => self.seed = num()?,
            "local_samples" => self.local_samples = num()? as usize,
            "threads" => self.threads = num()? as usize,
            _ => bail!("unknown config key {key:?}"),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key = value", i + 1))?;
            self.set(k.trim(), v).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_str(&text)
    }

    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(CACHE_ENV) {
            self.cache_dir = PathBuf::from(dir);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_min > self.d_max {
            bail!("empty d range [{}, {}]", self.d_min, self.d_max);
        }
        if self.l_max > MAX_ELL {
            bail!("l_max {} exceeds {MAX_ELL}", self.l_max);
        }
        if self.tau_cutoff > MAX_CUTOFF {
            bail!("tau_cutoff {} exceeds {MAX_CUTOFF}", self.tau_cutoff);
        }
        if self.prime_cap < 3 {
            bail!("prime_cap must be at least 3");
        }
        Ok(())
    }

    /// The effective configuration in file syntax.
    pub fn to_kv_string(&self) -> String {
        format!(
            "d_min = {}\nd_max = {}\nsquarefree_only = {}\nl_max = {}\ntau_cutoff = {}\nshift_policy = {}\n\
             prime_cap = {}\nseed = {}\nlocal_samples = {}\n",
            self.d_min,
            self.d_max,
            self.squarefree_only,
            self.l_max,
            self.tau_cutoff,
            self.shift_policy,
            self.prime_cap,
            self.seed,
            self.local_samples
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_override() {
        let mut c = ExperimentConfig::default();
        c.apply_str("# sweep\nd_min = 20\nd_max=40  # inline\nshift_policy = 0,2\n\n").unwrap();
        assert_eq!((c.d_min, c.d_max), (20, 40));
        assert_eq!(c.shift_policy, ShiftPolicy::Explicit(vec![0, 2]));
        c.set("shift_policy", "min-q").unwrap();
        assert_eq!(c.shift_policy, ShiftPolicy::MinimalQ);
        assert!(c.apply_str("bogus = 1").is_err());
        assert!(c.apply_str("d_min").is_err());
        assert!(c.set("l_max", "x").is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::default();
        c.validate().unwrap();
        c.l_max = 17;
        assert!(c.validate().is_err());
        c.l_max = 8;
        c.tau_cutoff = 10_000_001;
        assert!(c.validate().is_err());
        c.tau_cutoff = 10;
        c.d_min = 50;
        c.d_max = 40;
        assert!(c.validate().is_err());
    }
}
