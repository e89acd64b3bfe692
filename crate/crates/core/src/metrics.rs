//! Replication-level and cross-replication reliability metrics.
//!
//! A replication is one full estimation run. Repeating it with fresh
//! randomness and taking variances across replications of the per-run mean
//! and variance estimates yields the two reliability metrics reported per
//! player and averaged over players.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::RunResult;
use crate::stats;

/// A set of runs of the same experiment differing only in replication
/// randomness.
#[derive(Debug, Clone)]
pub struct ReplicationSet {
    runs: Vec<RunResult>,
}

impl ReplicationSet {
    pub fn new(runs: Vec<RunResult>) -> Result<Self> {
        if runs.len() < 2 {
            return Err(Error::InvalidConfig(
                "cross-replication metrics need at least two replications".into(),
            ));
        }
        let first = &runs[0];
        for r in &runs[1..] {
            if r.n_players != first.n_players || r.method_config != first.method_config {
                return Err(Error::InvalidConfig(
                    "replications must share the method configuration and player count".into(),
                ));
            }
        }
        Ok(Self { runs })
    }

    pub fn runs(&self) -> &[RunResult] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }
}

/// Per-replication mean and unbiased variance over games, recomputed from
/// the per-game means. Matches the run's own aggregate fields.
pub fn per_replication_stats(run: &RunResult) -> Result<(Vec<f64>, Vec<f64>)> {
    let games = run.per_game_means.len();
    if games < 2 {
        return Err(Error::InvalidConfig(
            "per-replication statistics need at least two games".into(),
        ));
    }
    let n = run.n_players;
    let mut means = Vec::with_capacity(n);
    let mut variances = Vec::with_capacity(n);
    for i in 0..n {
        let column: Vec<f64> = run.per_game_means.iter().map(|g| g[i]).collect();
        means.push(stats::mean(&column));
        variances.push(stats::sample_variance(&column));
    }
    Ok((means, variances))
}

/// Cross-replication reliability summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Variance across replications of the per-replication mean, per player.
    pub per_player_var_of_mean: Vec<f64>,
    /// Variance across replications of the per-replication variance, per
    /// player.
    pub per_player_var_of_var: Vec<f64>,
    /// Player averages of the two vectors above.
    pub avg_var_of_mean: f64,
    pub avg_var_of_var: f64,
    pub replications: usize,
    pub master_seed: u64,
    /// Replication indices that produced the runs, in order.
    pub replication_indices: Vec<u64>,
}

/// Variances across replications of the per-replication means and variances
/// (denominator `R - 1`), with player averages.
pub fn cross_replication_report(reps: &ReplicationSet) -> Result<MetricsReport> {
    let n = reps.runs()[0].n_players;
    let mut rep_means: Vec<Vec<f64>> = Vec::with_capacity(reps.len());
    let mut rep_vars: Vec<Vec<f64>> = Vec::with_capacity(reps.len());
    for run in reps.runs() {
        let (m, v) = per_replication_stats(run)?;
        rep_means.push(m);
        rep_vars.push(v);
    }
    let per_player_var_of_mean: Vec<f64> = (0..n)
        .map(|i| {
            let column: Vec<f64> = rep_means.iter().map(|m| m[i]).collect();
            stats::sample_variance(&column)
        })
        .collect();
    let per_player_var_of_var: Vec<f64> = (0..n)
        .map(|i| {
            let column: Vec<f64> = rep_vars.iter().map(|v| v[i]).collect();
            stats::sample_variance(&column)
        })
        .collect();
    Ok(MetricsReport {
        avg_var_of_mean: stats::mean(&per_player_var_of_mean),
        avg_var_of_var: stats::mean(&per_player_var_of_var),
        per_player_var_of_mean,
        per_player_var_of_var,
        replications: reps.len(),
        master_seed: reps.runs()[0].master_seed,
        replication_indices: reps.runs().iter().map(|r| r.replication).collect(),
    })
}
