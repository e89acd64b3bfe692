//! Experiment configuration: a TOML key/value file merged with command-line
//! overrides, resolved against per-dataset defaults.
//!
//! File schema (all keys optional; flags take precedence):
//!
//! ```toml
//! dataset = "synthetic"        # or "wine"
//! method = "pooled"            # baseline | pooled | stratified
//! seed = 42
//! games = 50
//! iters = 100
//! replications = 20
//! n_sample = 1000              # baseline draws per player per game
//! n_pool = 5000                # pooled/stratified pool size
//! n_boot = 1000                # pooled/stratified bootstrap size
//! alpha = 0.5                  # stratified allocation ceiling fraction
//! wine_csv = "data/winequality-white.csv"
//! players = 10                 # synthetic player count
//! validation_points = 1000
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use probshap::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Synthetic,
    Wine,
}

impl DatasetKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "synthetic" => Ok(DatasetKind::Synthetic),
            "wine" => Ok(DatasetKind::Wine),
            other => Err(Error::InvalidConfig(format!(
                "unknown dataset '{other}' (expected synthetic | wine)"
            ))),
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Synthetic => "synthetic",
            DatasetKind::Wine => "wine",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Baseline,
    Pooled,
    Stratified,
}

impl MethodKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(MethodKind::Baseline),
            "pooled" => Ok(MethodKind::Pooled),
            "stratified" => Ok(MethodKind::Stratified),
            other => Err(Error::InvalidConfig(format!(
                "unknown method '{other}' (expected baseline | pooled | stratified)"
            ))),
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodKind::Baseline => "baseline",
            MethodKind::Pooled => "pooled",
            MethodKind::Stratified => "stratified",
        })
    }
}

/// Raw key/value document; every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub dataset: Option<String>,
    pub method: Option<String>,
    pub seed: Option<u64>,
    pub games: Option<usize>,
    pub iters: Option<usize>,
    pub replications: Option<usize>,
    pub n_sample: Option<usize>,
    pub n_pool: Option<usize>,
    pub n_boot: Option<usize>,
    pub alpha: Option<f64>,
    pub wine_csv: Option<PathBuf>,
    pub players: Option<usize>,
    pub validation_points: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::MalformedData {
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }
}

/// Fully resolved experiment parameters; this struct is what output
/// manifests embed. Execution knobs (threads, output directory) are
/// deliberately not part of it, so outputs are byte-identical across
/// worker counts.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    pub method: MethodKind,
    pub seed: u64,
    pub games: usize,
    pub iters: usize,
    pub replications: usize,
    pub n_sample: usize,
    pub n_pool: usize,
    pub n_boot: usize,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wine_csv: Option<PathBuf>,
    pub players: usize,
    pub validation_points: usize,
}

#[derive(Default)]
pub struct Overrides<'a> {
    pub dataset: Option<&'a str>,
    pub method: Option<&'a str>,
    pub seed: Option<u64>,
    pub games: Option<usize>,
    pub iters: Option<usize>,
    pub replications: Option<usize>,
    pub n_sample: Option<usize>,
    pub n_pool: Option<usize>,
    pub n_boot: Option<usize>,
    pub alpha: Option<f64>,
    pub wine_csv: Option<&'a Path>,
    pub players: Option<usize>,
    pub validation_points: Option<usize>,
}

/// Flags beat file values beat per-dataset defaults. The method defaults
/// mirror the reference experiment settings: synthetic runs use
/// n_pool = 5000 / n_boot = 1000, wine runs use n_pool = 250 / n_boot = 60
/// with alpha = 0.5.
pub fn resolve(file: &FileConfig, flags: &Overrides) -> Result<ExperimentConfig> {
    let dataset = match flags.dataset.map(str::to_owned).or_else(|| file.dataset.clone()) {
        Some(s) => DatasetKind::parse(&s)?,
        None => DatasetKind::Synthetic,
    };
    let method = match flags.method.map(str::to_owned).or_else(|| file.method.clone()) {
        Some(s) => MethodKind::parse(&s)?,
        None => MethodKind::Baseline,
    };
    let (default_sample, default_pool, default_boot) = match dataset {
        DatasetKind::Synthetic => (1000, 5000, 1000),
        DatasetKind::Wine => (60, 250, 60),
    };
    let config = ExperimentConfig {
        dataset,
        method,
        seed: flags.seed.or(file.seed).unwrap_or(42),
        games: flags.games.or(file.games).unwrap_or(50),
        iters: flags.iters.or(file.iters).unwrap_or(100),
        replications: flags.replications.or(file.replications).unwrap_or(1),
        n_sample: flags.n_sample.or(file.n_sample).unwrap_or(default_sample),
        n_pool: flags.n_pool.or(file.n_pool).unwrap_or(default_pool),
        n_boot: flags.n_boot.or(file.n_boot).unwrap_or(default_boot),
        alpha: flags.alpha.or(file.alpha).unwrap_or(0.5),
        wine_csv: flags
            .wine_csv
            .map(Path::to_path_buf)
            .or_else(|| file.wine_csv.clone()),
        players: flags.players.or(file.players).unwrap_or(10),
        validation_points: flags
            .validation_points
            .or(file.validation_points)
            .unwrap_or(1000),
    };
    if config.replications == 0 {
        return Err(Error::InvalidConfig("replications must be at least 1".into()));
    }
    Ok(config)
}

impl ExperimentConfig {
    pub fn wine_csv_path(&self) -> Result<PathBuf> {
        match &self.wine_csv {
            Some(p) => Ok(p.clone()),
            None => Err(Error::InvalidConfig(
                "wine dataset selected but no wine_csv path provided".into(),
            )),
        }
    }
}
