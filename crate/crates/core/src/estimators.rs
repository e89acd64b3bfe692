//! The three Monte Carlo estimators for the expectation and variance of
//! probabilistic Shapley values, plus sampling-cost accounting.
//!
//! * Baseline: every game draws fresh samples from each player's
//!   distribution. Unbiased but expensive: `n * n_sample * n_games` draws.
//! * Pooled: each player's distribution is queried once for a pool of
//!   `n_pool` samples; games bootstrap from the pools, so distribution
//!   access drops to `n * n_pool` regardless of the number of games.
//! * Stratified pooled: like pooled, but the per-game bootstrap size of each
//!   player is set from a normalized variance score of its pool, directing
//!   budget toward high-variance players without raising the sampling cost.
//!
//! Games run in parallel; every game derives its own data and permutation
//! streams from the master seed, so results are identical for any worker
//! count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    sample_permutation, Coalition, GameData, Permutation, PlayerSampler, Sample, UtilityFunction,
};
use crate::rng::{self, StreamKey, StreamPurpose, StreamRng};
use crate::stats;

/// Parameters of the baseline estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Fresh samples drawn per player per game.
    pub n_sample: usize,
    pub n_games: usize,
    pub n_iter: usize,
    pub master_seed: u64,
    /// Index of this run within a replication study; folded into every
    /// derived stream.
    pub replication: u64,
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sample < 1 {
            return Err(Error::InvalidConfig("n_sample must be at least 1".into()));
        }
        check_games_and_iters(self.n_games, self.n_iter)
    }
}

/// Parameters of the pooled estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledConfig {
    pub n_pool: usize,
    /// Bootstrap resample size per player per game.
    pub n_boot: usize,
    pub n_games: usize,
    pub n_iter: usize,
    pub master_seed: u64,
    pub replication: u64,
}

impl PooledConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pool < 1 {
            return Err(Error::InvalidConfig("n_pool must be at least 1".into()));
        }
        if self.n_boot < 1 {
            return Err(Error::InvalidConfig("n_boot must be at least 1".into()));
        }
        if self.n_pool < 5 * self.n_boot {
            log::warn!(
                "n_pool = {} is below 5 * n_boot = {}; pooled estimates may be unstable",
                self.n_pool,
                5 * self.n_boot
            );
        }
        check_games_and_iters(self.n_games, self.n_iter)
    }
}

/// Parameters of the stratified pooled estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedConfig {
    pub pooled: PooledConfig,
    /// Fraction of the pool size that caps the per-player bootstrap size.
    pub alpha: f64,
}

impl StratifiedConfig {
    pub fn validate(&self) -> Result<()> {
        self.pooled.validate()?;
        if !(0.5..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha {} outside [0.5, 1.0]",
                self.alpha
            )));
        }
        Ok(())
    }
}

fn check_games_and_iters(n_games: usize, n_iter: usize) -> Result<()> {
    if n_games < 2 {
        return Err(Error::InvalidConfig(
            "n_games must be at least 2 (the across-game variance needs it)".into(),
        ));
    }
    if n_iter < 1 {
        return Err(Error::InvalidConfig("n_iter must be at least 1".into()));
    }
    Ok(())
}

/// A player's frozen sample pool with the distribution-access count spent
/// building it.
#[derive(Debug, Clone, PartialEq)]
pub struct Pool {
    samples: Vec<Sample>,
    draws_used: u64,
}

impl Pool {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn draws_used(&self) -> u64 {
        self.draws_used
    }
}

/// Which estimator produced a run, with its full parameter echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MethodConfig {
    Baseline {
        n_sample: usize,
        n_games: usize,
        n_iter: usize,
    },
    Pooled {
        n_pool: usize,
        n_boot: usize,
        n_games: usize,
        n_iter: usize,
    },
    Stratified {
        n_pool: usize,
        n_boot: usize,
        n_games: usize,
        n_iter: usize,
        alpha: f64,
    },
}

impl MethodConfig {
    pub fn n_games(&self) -> usize {
        match *self {
            MethodConfig::Baseline { n_games, .. }
            | MethodConfig::Pooled { n_games, .. }
            | MethodConfig::Stratified { n_games, .. } => n_games,
        }
    }

    pub fn n_iter(&self) -> usize {
        match *self {
            MethodConfig::Baseline { n_iter, .. }
            | MethodConfig::Pooled { n_iter, .. }
            | MethodConfig::Stratified { n_iter, .. } => n_iter,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::Baseline { .. } => "baseline",
            MethodConfig::Pooled { .. } => "pooled",
            MethodConfig::Stratified { .. } => "stratified",
        }
    }
}

/// Everything one estimation run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub method_config: MethodConfig,
    pub master_seed: u64,
    pub replication: u64,
    pub n_players: usize,
    /// Per-game mean marginal contribution of each player,
    /// `[n_games][n_players]`.
    pub per_game_means: Vec<Vec<f64>>,
    /// Mean over games of `per_game_means`.
    pub overall_mean: Vec<f64>,
    /// Unbiased variance over games of `per_game_means`.
    pub across_game_variance: Vec<f64>,
    /// `v(N) - v(empty)` of each game's frozen data; the per-game player
    /// sums must telescope to this (efficiency).
    pub per_game_total_value: Vec<f64>,
    /// Distribution accesses attributed to this run (bootstrap reuse is
    /// free).
    pub draw_count: u64,
    /// Per-player bootstrap sizes, present for the stratified method.
    pub allocation: Option<Vec<usize>>,
}

/// Recorded distribution-access count of a run: `n * n_sample * n_games`
/// for the baseline, the one-time pool construction cost for the pooled and
/// stratified methods.
pub fn sampling_cost(result: &RunResult) -> u64 {
    result.draw_count
}

struct GameOutcome {
    means: Vec<f64>,
    total_value: f64,
    samples_drawn: u64,
}

/// Shared game loop: draws data, samples permutations, walks marginals, and
/// aggregates per-game means. `draw` receives a stream private to the game.
fn run_games<U, F>(
    n_players: usize,
    n_games: usize,
    n_iter: usize,
    master_seed: u64,
    replication: u64,
    utility: &U,
    draw: F,
) -> Result<(Vec<GameOutcome>, Vec<f64>, Vec<f64>)>
where
    U: UtilityFunction + ?Sized,
    F: Fn(&mut StreamRng) -> GameData + Sync,
{
    let outcomes: Vec<GameOutcome> = (0..n_games)
        .into_par_iter()
        .map(|g| -> Result<GameOutcome> {
            let mut data_rng =
                StreamKey::new(master_seed, StreamPurpose::GameDraw, replication, g as u64)
                    .stream();
            let data = draw(&mut data_rng);
            debug_assert_eq!(data.n_players(), n_players);
            let samples_drawn = data.total_samples() as u64;
            let mut perm_rng =
                StreamKey::new(master_seed, StreamPurpose::Permutation, replication, g as u64)
                    .stream();
            let perms: Vec<Permutation> = (0..n_iter)
                .map(|_| sample_permutation(&mut perm_rng, n_players))
                .collect();
            let sums = utility
                .marginal_sums(&perms, &data)
                .map_err(|e| e.in_game(g))?;
            let means: Vec<f64> = sums.iter().map(|s| s / n_iter as f64).collect();
            let full = utility
                .evaluate(Coalition::full(n_players), &data)
                .map_err(|e| e.in_game(g))?;
            let empty = utility
                .evaluate(Coalition::empty(), &data)
                .map_err(|e| e.in_game(g))?;
            Ok(GameOutcome {
                means,
                total_value: full - empty,
                samples_drawn,
            })
        })
        .collect::<Result<_>>()?;

    let mut overall_mean = vec![0.0; n_players];
    for outcome in &outcomes {
        for (acc, m) in overall_mean.iter_mut().zip(&outcome.means) {
            *acc += m;
        }
    }
    for acc in &mut overall_mean {
        *acc /= n_games as f64;
    }
    let across_game_variance: Vec<f64> = (0..n_players)
        .map(|i| {
            let column: Vec<f64> = outcomes.iter().map(|o| o.means[i]).collect();
            stats::sample_variance(&column)
        })
        .collect();
    Ok((outcomes, overall_mean, across_game_variance))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    method_config: MethodConfig,
    master_seed: u64,
    replication: u64,
    n_players: usize,
    outcomes: Vec<GameOutcome>,
    overall_mean: Vec<f64>,
    across_game_variance: Vec<f64>,
    draw_count: u64,
    allocation: Option<Vec<usize>>,
) -> RunResult {
    RunResult {
        method_config,
        master_seed,
        replication,
        n_players,
        per_game_means: outcomes.iter().map(|o| o.means.clone()).collect(),
        per_game_total_value: outcomes.iter().map(|o| o.total_value).collect(),
        overall_mean,
        across_game_variance,
        draw_count,
        allocation,
    }
}

/// Baseline estimation: fresh draws from every player's distribution in
/// every game.
pub fn run_baseline<P, U>(
    cfg: &BaselineConfig,
    players: &[P],
    utility: &U,
) -> Result<RunResult>
where
    P: PlayerSampler,
    U: UtilityFunction + ?Sized,
{
    cfg.validate()?;
    if players.is_empty() {
        return Err(Error::EmptyInput("player list"));
    }
    let n = players.len();
    let (outcomes, mean, variance) = run_games(
        n,
        cfg.n_games,
        cfg.n_iter,
        cfg.master_seed,
        cfg.replication,
        utility,
        |rng| GameData::new(players.iter().map(|p| p.draw(cfg.n_sample, rng)).collect()),
    )?;
    let draw_count = outcomes.iter().map(|o| o.samples_drawn).sum();
    Ok(assemble(
        MethodConfig::Baseline {
            n_sample: cfg.n_sample,
            n_games: cfg.n_games,
            n_iter: cfg.n_iter,
        },
        cfg.master_seed,
        cfg.replication,
        n,
        outcomes,
        mean,
        variance,
        draw_count,
        None,
    ))
}

/// Builds one reusable pool per player. Each pool has its own stream keyed
/// by the player index, so construction may be parallelized freely. Players
/// backed by finite partitions smaller than `n_pool` contribute their whole
/// partition.
pub fn build_pools<P: PlayerSampler>(
    players: &[P],
    n_pool: usize,
    master_seed: u64,
    replication: u64,
) -> Result<Vec<Pool>> {
    if players.is_empty() {
        return Err(Error::EmptyInput("player list"));
    }
    if n_pool < 1 {
        return Err(Error::InvalidConfig("n_pool must be at least 1".into()));
    }
    Ok(players
        .iter()
        .enumerate()
        .map(|(i, player)| {
            let mut rng =
                StreamKey::new(master_seed, StreamPurpose::PoolBuild, replication, i as u64)
                    .stream();
            let samples = player.draw(n_pool, &mut rng);
            let draws_used = samples.len() as u64;
            Pool {
                samples,
                draws_used,
            }
        })
        .collect())
}

fn bootstrap_from(pool: &Pool, size: usize, rng: &mut StreamRng) -> Vec<Sample> {
    if pool.is_empty() {
        return Vec::new();
    }
    (0..size)
        .map(|_| pool.samples[rng::uniform_index(rng, pool.len())].clone())
        .collect()
}

/// Pooled estimation: every game bootstraps `n_boot` samples per player
/// (with replacement) from the prebuilt pools. Only pool construction
/// counts as distribution access.
pub fn run_pooled<U>(cfg: &PooledConfig, pools: &[Pool], utility: &U) -> Result<RunResult>
where
    U: UtilityFunction + ?Sized,
{
    cfg.validate()?;
    if pools.is_empty() {
        return Err(Error::EmptyInput("pool list"));
    }
    let n = pools.len();
    let (outcomes, mean, variance) = run_games(
        n,
        cfg.n_games,
        cfg.n_iter,
        cfg.master_seed,
        cfg.replication,
        utility,
        |rng| GameData::new(pools.iter().map(|p| bootstrap_from(p, cfg.n_boot, rng)).collect()),
    )?;
    let draw_count = pools.iter().map(Pool::draws_used).sum();
    Ok(assemble(
        MethodConfig::Pooled {
            n_pool: cfg.n_pool,
            n_boot: cfg.n_boot,
            n_games: cfg.n_games,
            n_iter: cfg.n_iter,
        },
        cfg.master_seed,
        cfg.replication,
        n,
        outcomes,
        mean,
        variance,
        draw_count,
        None,
    ))
}

/// Standardized total variance of each pool: per-feature variances under a
/// shared (global) standardization, summed over features. Standardizing with
/// statistics pooled over all players keeps the scores comparable across
/// heterogeneous features while still separating players; features that are
/// globally constant contribute nothing.
pub fn variance_scores(pools: &[Pool]) -> Result<Vec<f64>> {
    if pools.is_empty() {
        return Err(Error::EmptyInput("pool list"));
    }
    let dim = match pools
        .iter()
        .flat_map(|p| p.samples().first())
        .map(|s| s.features.len())
        .next()
    {
        Some(d) => d,
        // No pool has any samples: no feature evidence, all scores zero.
        None => return Ok(vec![0.0; pools.len()]),
    };
    for pool in pools {
        for s in pool.samples() {
            if s.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.features.len(),
                });
            }
        }
    }
    let total: usize = pools.iter().map(Pool::len).sum();
    let mut global_variance = vec![0.0; dim];
    for k in 0..dim {
        let mut mean = 0.0;
        for pool in pools {
            for s in pool.samples() {
                mean += s.features[k];
            }
        }
        mean /= total as f64;
        if total >= 2 {
            let mut ss = 0.0;
            for pool in pools {
                for s in pool.samples() {
                    let d = s.features[k] - mean;
                    ss += d * d;
                }
            }
            global_variance[k] = ss / (total as f64 - 1.0);
        }
    }
    Ok(pools
        .iter()
        .map(|pool| {
            (0..dim)
                .map(|k| {
                    if global_variance[k] <= 0.0 {
                        return 0.0;
                    }
                    let column: Vec<f64> =
                        pool.samples().iter().map(|s| s.features[k]).collect();
                    stats::sample_variance(&column) / global_variance[k]
                })
                .sum()
        })
        .collect())
}

/// Min-max rescaling of the scores onto `[0, 1]`. When every score is equal
/// there is no ranking information; all players get the midpoint, which
/// keeps the total allocation budget-neutral.
pub fn normalize_scores(scores: &[f64]) -> Vec<f64> {
    if scores.is_empty() {
        return Vec::new();
    }
    let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return vec![0.5; scores.len()];
    }
    scores.iter().map(|s| (s - min) / (max - min)).collect()
}

/// Per-player bootstrap sizes from normalized variance scores:
/// `floor(n_min + score * (n_max - n_min))` with
/// `n_min = max(1, floor(n_boot / 2))` and
/// `n_max = max(n_min, floor(alpha * n_pool))`.
pub fn allocate_bootstrap_sizes(
    norm_scores: &[f64],
    n_boot: usize,
    n_pool: usize,
    alpha: f64,
) -> Vec<usize> {
    let n_min = (n_boot / 2).max(1);
    let n_max = n_min.max((alpha * n_pool as f64).floor() as usize);
    norm_scores
        .iter()
        .map(|&s| (n_min as f64 + s * (n_max - n_min) as f64).floor() as usize)
        .collect()
}

/// Stratified pooled estimation: computes variance scores, normalization,
/// and the per-player allocation once, then proceeds as the pooled method
/// with player-specific bootstrap sizes. The sampling cost is unchanged;
/// only the per-game resample budget is redistributed.
pub fn run_stratified<U>(cfg: &StratifiedConfig, pools: &[Pool], utility: &U) -> Result<RunResult>
where
    U: UtilityFunction + ?Sized,
{
    cfg.validate()?;
    if pools.is_empty() {
        return Err(Error::EmptyInput("pool list"));
    }
    let n = pools.len();
    let scores = variance_scores(pools)?;
    let normalized = normalize_scores(&scores);
    let allocation =
        allocate_bootstrap_sizes(&normalized, cfg.pooled.n_boot, cfg.pooled.n_pool, cfg.alpha);
    let (outcomes, mean, variance) = run_games(
        n,
        cfg.pooled.n_games,
        cfg.pooled.n_iter,
        cfg.pooled.master_seed,
        cfg.pooled.replication,
        utility,
        |rng| {
            GameData::new(
                pools
                    .iter()
                    .zip(&allocation)
                    .map(|(p, &size)| bootstrap_from(p, size, rng))
                    .collect(),
            )
        },
    )?;
    let draw_count = pools.iter().map(Pool::draws_used).sum();
    Ok(assemble(
        MethodConfig::Stratified {
            n_pool: cfg.pooled.n_pool,
            n_boot: cfg.pooled.n_boot,
            n_games: cfg.pooled.n_games,
            n_iter: cfg.pooled.n_iter,
            alpha: cfg.alpha,
        },
        cfg.pooled.master_seed,
        cfg.pooled.replication,
        n,
        outcomes,
        mean,
        variance,
        draw_count,
        Some(allocation),
    ))
}
