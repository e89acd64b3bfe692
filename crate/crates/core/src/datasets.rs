//! Data sources for the estimation experiments: synthetic players sampling
//! a composite curve, and the white-wine quality table partitioned into ten
//! players by alcohol deciles.

use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{PlayerSampler, Sample};
use crate::rng::{self, StreamKey, StreamPurpose, StreamRng};
use crate::utilities::ValidationSet;

/// Parameters of the composite label curve
/// `f(x) = c0 + c1 x + c2 x^2 + A sin(2 pi nu x + phase) + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub offset: f64,
}

impl Default for CurveParams {
    fn default() -> Self {
        Self {
            c0: 0.0,
            c1: 0.3,
            c2: -0.02,
            amplitude: 2.0,
            frequency: 0.5,
            phase: std::f64::consts::FRAC_PI_4,
            offset: 3.0,
        }
    }
}

impl CurveParams {
    pub fn value(&self, x: f64) -> f64 {
        self.c0
            + self.c1 * x
            + self.c2 * x * x
            + self.amplitude * (2.0 * std::f64::consts::PI * self.frequency * x + self.phase).sin()
            + self.offset
    }
}

/// Construction recipe for the synthetic player population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub curve: CurveParams,
    pub n_players: usize,
    /// Player centers are evenly spaced over this interval.
    pub mu_range: (f64, f64),
    /// Player standard deviations are drawn uniformly from this interval.
    pub sigma_range: (f64, f64),
    /// Sampled x values are truncated to this interval.
    pub clip: (f64, f64),
    pub master_seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            curve: CurveParams::default(),
            n_players: 10,
            mu_range: (-7.0, 7.0),
            sigma_range: (0.5, 2.5),
            clip: (-10.0, 10.0),
            master_seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_players == 0 {
            return Err(Error::InvalidConfig("n_players must be at least 1".into()));
        }
        for (name, (lo, hi)) in [
            ("mu_range", self.mu_range),
            ("sigma_range", self.sigma_range),
            ("clip", self.clip),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::InvalidConfig(format!(
                    "{name} ({lo}, {hi}) is not a valid interval"
                )));
            }
        }
        if self.sigma_range.0 < 0.0 {
            return Err(Error::InvalidConfig("sigma_range must be nonnegative".into()));
        }
        if self.clip.0 >= self.clip.1 {
            return Err(Error::InvalidConfig("clip interval must be nondegenerate".into()));
        }
        Ok(())
    }
}

/// The label curve evaluated at `x`.
pub fn truth_function(spec: &SyntheticSpec, x: f64) -> f64 {
    spec.curve.value(x)
}

/// A sampling source owned by one player.
#[derive(Debug, Clone)]
pub enum PlayerDistribution {
    /// Draws `x ~ N(mean, std_dev^2)` truncated to `clip`, labeled by the
    /// curve.
    GaussianCurve {
        mean: f64,
        std_dev: f64,
        clip: (f64, f64),
        curve: CurveParams,
    },
    /// Draws without replacement from a frozen set of table rows.
    Partition { rows: Arc<Vec<Sample>> },
}

impl PlayerSampler for PlayerDistribution {
    fn draw(&self, n: usize, rng: &mut StreamRng) -> Vec<Sample> {
        match self {
            PlayerDistribution::GaussianCurve {
                mean,
                std_dev,
                clip,
                curve,
            } => (0..n)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    let x = (mean + std_dev * z).clamp(clip.0, clip.1);
                    Sample::scalar(x, curve.value(x))
                })
                .collect(),
            PlayerDistribution::Partition { rows } => {
                rng::sample_indices_without_replacement(rng, rows.len(), n)
                    .into_iter()
                    .map(|i| rows[i].clone())
                    .collect()
            }
        }
    }
}

/// Builds the synthetic players: centers evenly spaced over `mu_range`
/// (the midpoint for a single player), standard deviations drawn uniformly
/// from `sigma_range` on a stream derived from the master seed.
pub fn make_synthetic_players(spec: &SyntheticSpec) -> Result<Vec<PlayerDistribution>> {
    spec.validate()?;
    let n = spec.n_players;
    let (lo, hi) = spec.mu_range;
    let mut rng = StreamKey::new(spec.master_seed, StreamPurpose::PlayerSetup, 0, 0).stream();
    let (s_lo, s_hi) = spec.sigma_range;
    Ok((0..n)
        .map(|i| {
            let mean = if n == 1 {
                (lo + hi) / 2.0
            } else {
                lo + (hi - lo) * (i as f64 / (n - 1) as f64)
            };
            let std_dev = s_lo + (s_hi - s_lo) * rng::unit_f64(&mut rng);
            PlayerDistribution::GaussianCurve {
                mean,
                std_dev,
                clip: spec.clip,
                curve: spec.curve,
            }
        })
        .collect())
}

/// `count` evenly spaced points over the clip interval (endpoints included),
/// labeled by the curve.
pub fn validation_grid(spec: &SyntheticSpec, count: usize) -> Result<ValidationSet> {
    spec.validate()?;
    if count < 2 {
        return Err(Error::InvalidConfig(
            "validation grid needs at least two points".into(),
        ));
    }
    let (lo, hi) = spec.clip;
    let points = (0..count)
        .map(|i| {
            let x = lo + (hi - lo) * (i as f64 / (count - 1) as f64);
            Sample::scalar(x, spec.curve.value(x))
        })
        .collect();
    ValidationSet::new(points)
}

// ---------------------------------------------------------------------------
// Wine Quality table
// ---------------------------------------------------------------------------

/// Column order of the UCI white-wine file: eleven physicochemical features
/// followed by the quality score.
pub const WINE_COLUMNS: [&str; 12] = [
    "fixed acidity",
    "volatile acidity",
    "citric acid",
    "residual sugar",
    "chlorides",
    "free sulfur dioxide",
    "total sulfur dioxide",
    "density",
    "pH",
    "sulphates",
    "alcohol",
    "quality",
];

/// Feature index of the alcohol column used for partitioning.
pub const ALCOHOL_FEATURE: usize = 10;

/// The wine table: rows of eleven features plus the quality label.
#[derive(Debug, Clone, PartialEq)]
pub struct WineTable {
    rows: Vec<Sample>,
}

impl WineTable {
    /// Builds a table directly from rows (eleven features each). Used by
    /// tests and synthetic drivers; file loading goes through [`load_wine`].
    pub fn from_rows(rows: Vec<Sample>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("wine table"));
        }
        for r in &rows {
            if r.features.len() != WINE_COLUMNS.len() - 1 {
                return Err(Error::DimensionMismatch {
                    expected: WINE_COLUMNS.len() - 1,
                    got: r.features.len(),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Sample] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn alcohol(&self, row: usize) -> f64 {
        self.rows[row].features[ALCOHOL_FEATURE]
    }
}

/// Loads the semicolon-delimited UCI white-wine file, validating the header
/// and that every cell parses as a finite number.
pub fn load_wine(path: &Path) -> Result<WineTable> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b';')
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::MalformedData {
            path: shown.clone(),
            detail: e.to_string(),
        })?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::MalformedData {
            path: shown.clone(),
            detail: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect();
    if header != WINE_COLUMNS {
        return Err(Error::SchemaMismatch {
            path: shown,
            detail: format!("expected columns {WINE_COLUMNS:?}, found {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedData {
            path: shown.clone(),
            detail: format!("row {}: {e}", row_idx + 1),
        })?;
        let mut values = Vec::with_capacity(WINE_COLUMNS.len());
        for (col, cell) in record.iter().enumerate() {
            let parsed: f64 = cell.trim().parse().map_err(|_| Error::MalformedData {
                path: shown.clone(),
                detail: format!(
                    "row {}, column '{}': '{}' is not numeric",
                    row_idx + 1,
                    WINE_COLUMNS.get(col).copied().unwrap_or("?"),
                    cell
                ),
            })?;
            if !parsed.is_finite() {
                return Err(Error::MalformedData {
                    path: shown.clone(),
                    detail: format!(
                        "row {}, column '{}': non-finite value",
                        row_idx + 1,
                        WINE_COLUMNS.get(col).copied().unwrap_or("?")
                    ),
                });
            }
            values.push(parsed);
        }
        if values.len() != WINE_COLUMNS.len() {
            return Err(Error::MalformedData {
                path: shown.clone(),
                detail: format!(
                    "row {}: expected {} fields, found {}",
                    row_idx + 1,
                    WINE_COLUMNS.len(),
                    values.len()
                ),
            });
        }
        let label = values.pop().expect("12 fields checked above");
        rows.push(Sample::new(values, label));
    }
    WineTable::from_rows(rows)
}

/// Result of splitting the wine table and partitioning the training rows by
/// alcohol deciles.
#[derive(Debug, Clone)]
pub struct WinePartitions {
    /// Table row indices of the training split, in shuffled order.
    pub train_indices: Vec<usize>,
    /// The held-out rows as the validation set.
    pub validation: ValidationSet,
    /// One partition-backed sampling source per player.
    pub players: Vec<PlayerDistribution>,
    /// Table row indices owned by each player (ascending within a player).
    pub player_indices: Vec<Vec<usize>>,
    /// Alcohol deciles `q_0..q_10` of the training split.
    pub deciles: Vec<f64>,
    pub seed: u64,
}

/// Empirical quantile by linear interpolation on a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    debug_assert!(m > 0);
    let h = p * (m - 1) as f64;
    let lo = h.floor() as usize;
    if lo + 1 >= m {
        sorted[m - 1]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
    }
}

const WINE_PLAYERS: usize = 10;

/// Shuffles the table with the given seed, splits off the training fraction
/// (rounding half up), computes alcohol deciles on the training rows, and
/// assigns each training row to the player whose decile interval contains
/// its alcohol value. Intervals are closed below and open above, the last
/// closed on both sides; with duplicated decile boundaries the assignment
/// stays deterministic and empty intervals stay empty.
pub fn split_and_partition(
    table: &WineTable,
    seed: u64,
    train_frac: f64,
) -> Result<WinePartitions> {
    if !(0.0 < train_frac && train_frac < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction {train_frac} outside (0, 1)"
        )));
    }
    let n = table.len();
    if n < 2 {
        return Err(Error::InvalidConfig(
            "wine table needs at least two rows to split".into(),
        ));
    }
    let mut rng = StreamKey::new(seed, StreamPurpose::DatasetSplit, 0, 0).stream();
    let shuffled = rng::random_permutation(&mut rng, n);
    let train_count = ((train_frac * n as f64).round() as usize).clamp(1, n - 1);
    let train_indices: Vec<usize> = shuffled[..train_count].to_vec();
    let val_rows: Vec<Sample> = shuffled[train_count..]
        .iter()
        .map(|&i| table.rows()[i].clone())
        .collect();
    let validation = ValidationSet::new(val_rows)?;

    let mut alcohol_sorted: Vec<f64> = train_indices.iter().map(|&i| table.alcohol(i)).collect();
    alcohol_sorted.sort_unstable_by(f64::total_cmp);
    let deciles: Vec<f64> = (0..=WINE_PLAYERS)
        .map(|j| quantile(&alcohol_sorted, j as f64 / WINE_PLAYERS as f64))
        .collect();

    let mut player_indices: Vec<Vec<usize>> = vec![Vec::new(); WINE_PLAYERS];
    for &row in &train_indices {
        let a = table.alcohol(row);
        // Number of interior boundaries at or below the value: the bin index
        // under lower-closed intervals, with the top bin absorbing the max.
        let bin = deciles[1..WINE_PLAYERS]
            .iter()
            .filter(|&&q| q <= a)
            .count();
        player_indices[bin].push(row);
    }
    for indices in &mut player_indices {
        indices.sort_unstable();
    }
    let players = player_indices
        .iter()
        .map(|indices| PlayerDistribution::Partition {
            rows: Arc::new(indices.iter().map(|&i| table.rows()[i].clone()).collect()),
        })
        .collect();

    Ok(WinePartitions {
        train_indices,
        validation,
        players,
        player_indices,
        deciles,
        seed,
    })
}
