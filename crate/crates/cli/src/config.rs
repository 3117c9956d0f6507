//! Benchmark configuration (TOML).
//!
//! ```toml
//! tuples = [[2, 4], [30, 24]]   # (n, d) cells
//! g = "d2"                      # "d2", "pow2" or a fixed count
//! seed = 1
//! repetitions = 3
//! objectives = ["cost", "peak"]
//! demand_csv = "demand.csv"     # optional, `t,q_1,...,q_N`
//! prices_csv = "prices.csv"     # optional, `t,price`
//! exact_threshold = 1000        # skip the exact LP when n * d exceeds this
//! zero_column = true
//! tolerance = 1e-9              # degenerate-baseline test for UPR
//! out_dir = "results"
//! redraws = 50                  # sign-vector redraws for `bench robustness`
//! ```
//!
//! Synthetic demand is used when `demand_csv` is absent: every household has
//! a base load of 0.2 to 0.5 kW plus a morning and an evening bump, giving
//! levels of roughly 0.2 to 2 kW across a day sampled at `d` points.
//! Synthetic prices follow a two-peak curve between 0.10 and 0.40 per kWh.

use std::path::{Path, PathBuf};

use flexhull_core::ObjectiveKind;
use serde::{Deserialize, Serialize};

/// Environment variable overriding `seed`.
pub const SEED_ENV: &str = "FLEXHULL_SEED";
/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FLEXHULL_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GRuleName {
    /// `g = d^2`
    D2,
    /// `g = 2^d` (all sign vectors)
    Pow2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GRule {
    Rule(GRuleName),
    Fixed(usize),
}

impl GRule {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            GRule::Rule(GRuleName::D2) => d * d,
            GRule::Rule(GRuleName::Pow2) => {
                if d >= usize::BITS as usize - 1 {
                    usize::MAX
                } else {
                    1 << d
                }
            }
            GRule::Fixed(g) => g,
        }
    }
}

impl Default for GRule {
    fn default() -> Self {
        GRule::Rule(GRuleName::D2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Cost,
    Peak,
}

impl Objective {
    pub fn kind(self) -> ObjectiveKind {
        match self {
            Objective::Cost => ObjectiveKind::Cost,
            Objective::Peak => ObjectiveKind::Peak,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub tuples: Vec<(usize, usize)>,
    pub g: GRule,
    pub seed: u64,
    pub repetitions: usize,
    pub objectives: Vec<Objective>,
    pub demand_csv: Option<PathBuf>,
    pub prices_csv: Option<PathBuf>,
    pub exact_threshold: usize,
    pub zero_column: bool,
    pub tolerance: f64,
    pub out_dir: PathBuf,
    pub redraws: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            tuples: Vec::new(),
            g: GRule::default(),
            seed: 1,
            repetitions: 1,
            objectives: vec![Objective::Cost, Objective::Peak],
            demand_csv: None,
            prices_csv: None,
            exact_threshold: 1000,
            zero_column: true,
            tolerance: 1e-9,
            out_dir: PathBuf::from("results"),
            redraws: 50,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl BenchConfig {
    /// Parses a config file. Relative CSV and output paths are resolved
    /// against the file's directory.
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: Self = toml::from_str(&text).map_err(|source| ConfigError::Toml {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.demand_csv.as_mut().map(rebase);
        cfg.prices_csv.as_mut().map(rebase);
        rebase(&mut cfg.out_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `FLEXHULL_SEED` if set.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            self.seed = raw
                .trim()
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("{SEED_ENV}={raw:?} is not a u64")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.tuples.is_empty() {
            return bad("`tuples` must list at least one (n, d) pair");
        }
        if self.tuples.iter().any(|&(n, d)| n == 0 || d == 0) {
            return bad("every tuple needs n >= 1 and d >= 1");
        }
        if self.repetitions == 0 {
            return bad("`repetitions` must be >= 1");
        }
        if self.objectives.is_empty() {
            return bad("`objectives` must not be empty");
        }
        if self.g == GRule::Fixed(0) {
            return bad("`g` must be >= 1");
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return bad("`tolerance` must be a finite non-negative number");
        }
        if self.redraws == 0 {
            return bad("`redraws` must be >= 1");
        }
        Ok(())
    }
}

/// Thread cap from `FLEXHULL_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n > 0)
}
