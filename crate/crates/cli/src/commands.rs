//! Implementations of the five subcommands.

use std::fs;
use std::path::Path;

use probshap::analytic::{
    estimator_mean_variance, expected_shapley_additive, expected_shapley_mixture,
    gaussian_fourth_central_moment, variance_of_sample_variance, variance_shapley_additive,
    variance_shapley_mixture, AdditiveGaussianGameSpec, MixtureGameSpec, MomentSummary,
};
use probshap::datasets::{make_synthetic_players, validation_grid, PlayerDistribution};
use probshap::estimators::{
    build_pools, run_baseline, run_pooled, run_stratified, BaselineConfig, PooledConfig,
    RunResult, StratifiedConfig,
};
use probshap::metrics::{cross_replication_report, MetricsReport, ReplicationSet};
use probshap::report::{
    format_float, render_sweep_table, run_summary_json, write_run_csv, write_sweep_grid_csv,
    write_sweep_long_csv, SweepCell, SweepMetric, SweepOutcome,
};
use probshap::{Error, Result};
use serde_json::json;

use crate::config::{self, ExperimentConfig, FileConfig, MethodKind, Overrides};
use crate::data::{self, Prepared};
use crate::{GenArgs, OracleArgs, ReportArgs, RunArgs, SweepArgs};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn resolve_config(
    shared: &crate::SharedArgs,
    method: Option<&crate::MethodArgs>,
    games: Option<usize>,
    iters: Option<usize>,
    players: Option<usize>,
    validation_points: Option<usize>,
) -> Result<ExperimentConfig> {
    let file = FileConfig::load(shared.config.as_deref())?;
    let overrides = Overrides {
        dataset: shared.dataset.as_deref(),
        method: method.and_then(|m| m.method.as_deref()),
        seed: shared.seed,
        games,
        iters,
        replications: method.and_then(|m| m.replications),
        n_sample: method.and_then(|m| m.n_sample),
        n_pool: method.and_then(|m| m.n_pool),
        n_boot: method.and_then(|m| m.n_boot),
        alpha: method.and_then(|m| m.alpha),
        wine_csv: shared.wine_csv.as_deref(),
        players,
        validation_points,
    };
    config::resolve(&file, &overrides)
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

/// Runs replication `r` of the configured experiment. Pools are built once
/// per experiment (pool streams keyed at replication zero) and shared by
/// all replications: pool construction is the one-time data-access stage of
/// the pooled methods, while per-game bootstrap and permutation streams
/// stay keyed by the replication index so games differ across replications.
pub fn run_one_replication(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    replication: u64,
) -> Result<RunResult> {
    let utility = prepared.utility.as_ref();
    match cfg.method {
        MethodKind::Baseline => run_baseline(
            &BaselineConfig {
                n_sample: cfg.n_sample,
                n_games: cfg.games,
                n_iter: cfg.iters,
                master_seed: cfg.seed,
                replication,
            },
            &prepared.players,
            utility,
        ),
        MethodKind::Pooled => {
            let pools = build_pools(&prepared.players, cfg.n_pool, cfg.seed, 0)?;
            run_pooled(
                &PooledConfig {
                    n_pool: cfg.n_pool,
                    n_boot: cfg.n_boot,
                    n_games: cfg.games,
                    n_iter: cfg.iters,
                    master_seed: cfg.seed,
                    replication,
                },
                &pools,
                utility,
            )
        }
        MethodKind::Stratified => {
            let pools = build_pools(&prepared.players, cfg.n_pool, cfg.seed, 0)?;
            run_stratified(
                &StratifiedConfig {
                    pooled: PooledConfig {
                        n_pool: cfg.n_pool,
                        n_boot: cfg.n_boot,
                        n_games: cfg.games,
                        n_iter: cfg.iters,
                        master_seed: cfg.seed,
                        replication,
                    },
                    alpha: cfg.alpha,
                },
                &pools,
                utility,
            )
        }
    }
}

pub fn run_replications(cfg: &ExperimentConfig, prepared: &Prepared) -> Result<Vec<RunResult>> {
    (0..cfg.replications as u64)
        .map(|r| run_one_replication(cfg, prepared, r))
        .collect()
}

pub fn run(args: RunArgs) -> Result<()> {
    let cfg = resolve_config(&args.shared, Some(&args.method), args.games, args.iters, None, None)?;
    let prepared = data::prepare(&cfg)?;
    let runs = run_replications(&cfg, &prepared)?;
    fs::create_dir_all(&args.out)?;
    for (r, run) in runs.iter().enumerate() {
        let mut buf = Vec::new();
        write_run_csv(run, &mut buf)?;
        write_atomic(&args.out.join(format!("replication_{r:03}.csv")), &buf)?;
    }
    let summary = json!({
        "tool_version": TOOL_VERSION,
        "command": "run",
        "config": cfg,
        "master_seed": cfg.seed,
        "runs": runs.iter().map(|r| run_summary_json(r, TOOL_VERSION)).collect::<Vec<_>>(),
    });
    write_atomic(
        &args.out.join("summary.json"),
        format!("{:#}\n", summary).as_bytes(),
    )?;
    for run in &runs {
        println!(
            "replication {}: draws = {}, mean = [{}]",
            run.replication,
            run.draw_count,
            run.overall_mean
                .iter()
                .map(|v| format!("{v:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    println!("wrote {} replication file(s) to {}", runs.len(), args.out.display());
    Ok(())
}

fn parse_grid_list(label: &str, raw: Option<&str>) -> Result<Vec<usize>> {
    let raw = raw.ok_or_else(|| {
        Error::InvalidConfig(format!("sweep requires --{label} (comma-separated values)"))
    })?;
    let values: Vec<usize> = raw
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("invalid {label} value '{s}'")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::InvalidConfig(format!("--{label} list is empty")));
    }
    Ok(values)
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    let games_list = parse_grid_list("games", args.games.as_deref())?;
    let iters_list = parse_grid_list("iters", args.iters.as_deref())?;
    let mut cfg = resolve_config(&args.shared, Some(&args.method), None, None, None, None)?;
    if args.method.replications.is_none() {
        // Cross-replication variances need several runs; default higher
        // than `run`'s single replication.
        cfg.replications = cfg.replications.max(20);
    }
    if cfg.replications < 2 {
        return Err(Error::InvalidConfig(
            "sweep needs at least two replications".into(),
        ));
    }
    let prepared = data::prepare(&cfg)?;
    let mut cells = Vec::new();
    for &g in &games_list {
        for &it in &iters_list {
            let mut cell_cfg = cfg.clone();
            cell_cfg.games = g;
            cell_cfg.iters = it;
            let outcome = run_replications(&cell_cfg, &prepared)
                .and_then(ReplicationSet::new)
                .and_then(|reps| cross_replication_report(&reps));
            match outcome {
                Ok(metrics) => cells.push(SweepCell {
                    n_games: g,
                    n_iter: it,
                    outcome: SweepOutcome::Metrics(metrics),
                }),
                Err(e) => {
                    log::warn!("sweep cell (games={g}, iters={it}) failed: {e}");
                    cells.push(SweepCell {
                        n_games: g,
                        n_iter: it,
                        outcome: SweepOutcome::Failed(e.to_string()),
                    });
                }
            }
        }
    }
    fs::create_dir_all(&args.out)?;
    let mut buf = Vec::new();
    write_sweep_grid_csv(&cells, SweepMetric::VarOfMean, &mut buf)?;
    write_atomic(&args.out.join("grid_var_of_mean.csv"), &buf)?;
    buf.clear();
    write_sweep_grid_csv(&cells, SweepMetric::VarOfVar, &mut buf)?;
    write_atomic(&args.out.join("grid_var_of_var.csv"), &buf)?;
    buf.clear();
    write_sweep_long_csv(&cells, &mut buf)?;
    write_atomic(&args.out.join("sweep_long.csv"), &buf)?;
    let metrics_json = json!({
        "tool_version": TOOL_VERSION,
        "config": cfg,
        "master_seed": cfg.seed,
        "cells": cells
            .iter()
            .map(|c| match &c.outcome {
                SweepOutcome::Metrics(m) => json!({
                    "n_games": c.n_games,
                    "n_iter": c.n_iter,
                    "status": "ok",
                    "metrics": m,
                }),
                SweepOutcome::Failed(reason) => json!({
                    "n_games": c.n_games,
                    "n_iter": c.n_iter,
                    "status": "failed",
                    "reason": reason,
                }),
            })
            .collect::<Vec<_>>(),
    });
    write_atomic(
        &args.out.join("metrics.json"),
        format!("{:#}\n", metrics_json).as_bytes(),
    )?;
    let manifest = json!({
        "tool_version": TOOL_VERSION,
        "command": "sweep",
        "config": cfg,
        "master_seed": cfg.seed,
        "games": games_list,
        "iters": iters_list,
    });
    write_atomic(
        &args.out.join("manifest.json"),
        format!("{:#}\n", manifest).as_bytes(),
    )?;
    print!("{}", render_sweep_table(&cells));
    println!("wrote sweep outputs to {}", args.out.display());
    Ok(())
}

pub fn gen(args: GenArgs) -> Result<()> {
    let cfg = resolve_config(
        &args.shared,
        None,
        None,
        None,
        args.players,
        args.validation_points,
    )?;
    fs::create_dir_all(&args.out)?;
    match cfg.dataset {
        crate::config::DatasetKind::Synthetic => gen_synthetic(&cfg, &args),
        crate::config::DatasetKind::Wine => gen_wine(&cfg, &args),
    }
}

fn gen_synthetic(cfg: &ExperimentConfig, args: &GenArgs) -> Result<()> {
    let spec = data::synthetic_spec(cfg);
    let players = make_synthetic_players(&spec)?;
    let params: Vec<(usize, f64, f64)> = players
        .iter()
        .enumerate()
        .map(|(i, p)| match p {
            PlayerDistribution::GaussianCurve { mean, std_dev, .. } => (i, *mean, *std_dev),
            PlayerDistribution::Partition { .. } => unreachable!("synthetic players only"),
        })
        .collect();

    let mut players_csv = String::from("player_id,mu,sigma\n");
    for &(i, mu, sigma) in &params {
        players_csv.push_str(&format!("{i},{},{}\n", format_float(mu), format_float(sigma)));
    }
    write_atomic(&args.out.join("players.csv"), players_csv.as_bytes())?;

    let pool_size = args.pool_size.unwrap_or(cfg.n_pool);
    let pools = build_pools(&players, pool_size, cfg.seed, 0)?;
    let mut samples_csv = String::from("player_id,x,y\n");
    for (i, pool) in pools.iter().enumerate() {
        for s in pool.samples() {
            samples_csv.push_str(&format!(
                "{i},{},{}\n",
                format_float(s.features[0]),
                format_float(s.label)
            ));
        }
    }
    write_atomic(&args.out.join("samples.csv"), samples_csv.as_bytes())?;

    let grid = validation_grid(&spec, cfg.validation_points)?;
    let mut val_csv = String::from("x,y\n");
    for p in grid.points() {
        val_csv.push_str(&format!(
            "{},{}\n",
            format_float(p.features[0]),
            format_float(p.label)
        ));
    }
    write_atomic(&args.out.join("validation.csv"), val_csv.as_bytes())?;

    let manifest = json!({
        "tool_version": TOOL_VERSION,
        "command": "gen",
        "dataset": "synthetic",
        "master_seed": cfg.seed,
        "spec": spec,
        "pool_size": pool_size,
        "validation_points": cfg.validation_points,
        "players": params
            .iter()
            .map(|&(i, mu, sigma)| json!({"player_id": i, "mu": mu, "sigma": sigma}))
            .collect::<Vec<_>>(),
    });
    write_atomic(
        &args.out.join("manifest.json"),
        format!("{:#}\n", manifest).as_bytes(),
    )?;
    println!(
        "generated {} synthetic players (pool {} each) in {}",
        params.len(),
        pool_size,
        args.out.display()
    );
    Ok(())
}

fn gen_wine(cfg: &ExperimentConfig, args: &GenArgs) -> Result<()> {
    let table = probshap::datasets::load_wine(&cfg.wine_csv_path()?)?;
    let parts = probshap::datasets::split_and_partition(&table, cfg.seed, 0.7)?;

    let mut partitions_csv = String::from("player_id,row_index,alcohol\n");
    for (player, indices) in parts.player_indices.iter().enumerate() {
        for &row in indices {
            partitions_csv.push_str(&format!(
                "{player},{row},{}\n",
                format_float(table.alcohol(row))
            ));
        }
    }
    write_atomic(&args.out.join("partitions.csv"), partitions_csv.as_bytes())?;

    let mut val_csv = String::from("row_index\n");
    let train: std::collections::HashSet<usize> = parts.train_indices.iter().copied().collect();
    for row in 0..table.len() {
        if !train.contains(&row) {
            val_csv.push_str(&format!("{row}\n"));
        }
    }
    write_atomic(&args.out.join("validation_rows.csv"), val_csv.as_bytes())?;

    let manifest = json!({
        "tool_version": TOOL_VERSION,
        "command": "gen",
        "dataset": "wine",
        "master_seed": cfg.seed,
        "wine_csv": cfg.wine_csv_path()?.display().to_string(),
        "rows": table.len(),
        "train_size": parts.train_indices.len(),
        "validation_size": parts.validation.len(),
        "deciles": parts.deciles,
        "partition_sizes": parts.player_indices.iter().map(Vec::len).collect::<Vec<_>>(),
    });
    write_atomic(
        &args.out.join("manifest.json"),
        format!("{:#}\n", manifest).as_bytes(),
    )?;
    println!(
        "partitioned {} training rows into {} players in {}",
        parts.train_indices.len(),
        parts.player_indices.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleFile {
    additive: Option<AdditiveGaussianGameSpec>,
    mixture: Option<MixtureGameSpec>,
}

pub fn oracle(args: OracleArgs) -> Result<()> {
    if !args.spec.exists() {
        return Err(Error::MissingFile(args.spec.clone()));
    }
    let text = fs::read_to_string(&args.spec)?;
    let file: OracleFile = toml::from_str(&text).map_err(|e| Error::MalformedData {
        path: args.spec.display().to_string(),
        detail: e.to_string(),
    })?;
    let m = args.games;
    let (label, expected, variance) = match (&file.additive, &file.mixture) {
        (Some(spec), None) => {
            let spec = AdditiveGaussianGameSpec::new(spec.players.clone())?;
            (
                "additive",
                expected_shapley_additive(&spec),
                variance_shapley_additive(&spec),
            )
        }
        (None, Some(spec)) => {
            let spec = MixtureGameSpec::new(spec.components.clone())?;
            (
                "mixture",
                expected_shapley_mixture(&spec),
                variance_shapley_mixture(&spec),
            )
        }
        _ => {
            return Err(Error::InvalidConfig(
                "spec file must define exactly one of [additive] or [mixture]".into(),
            ))
        }
    };
    // Both game families have Gaussian Shapley distributions, so the
    // variance-of-variance identity can use mu_4 = 3 sigma^4.
    let var_of_mean: Vec<f64> = variance
        .iter()
        .map(|&v| estimator_mean_variance(v, m))
        .collect::<Result<_>>()?;
    let var_of_var: Vec<f64> = expected
        .iter()
        .zip(&variance)
        .map(|(&mu, &v)| {
            variance_of_sample_variance(&MomentSummary::new(
                mu,
                v,
                gaussian_fourth_central_moment(v),
                m.max(2),
            )?)
        })
        .collect::<Result<_>>()?;
    if args.json {
        let out = json!({
            "tool_version": TOOL_VERSION,
            "game": label,
            "games": m,
            "players": expected
                .iter()
                .enumerate()
                .map(|(i, &e)| json!({
                    "player": i,
                    "expected_shapley": e,
                    "shapley_variance": variance[i],
                    "mean_estimator_variance": var_of_mean[i],
                    "variance_estimator_variance": var_of_var[i],
                }))
                .collect::<Vec<_>>(),
        });
        println!("{out:#}");
    } else {
        println!("{label} game, m = {m} games");
        println!(
            "{:>7} {:>14} {:>14} {:>14} {:>14}",
            "player", "E[phi]", "Var(phi)", "Var(E^)", "Var(Var^)"
        );
        for i in 0..expected.len() {
            println!(
                "{:>7} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
                i, expected[i], variance[i], var_of_mean[i], var_of_var[i]
            );
        }
    }
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<()> {
    let path = if args.input.is_dir() {
        args.input.join("sweep_long.csv")
    } else {
        args.input.clone()
    };
    if !path.exists() {
        return Err(Error::MissingFile(path));
    }
    let text = fs::read_to_string(&path)?;
    let cells = parse_long_csv(&path, &text)?;
    print!("{}", render_sweep_table(&cells));
    if let Some(plot) = &args.plot_data {
        let mut out = String::from("n_games,n_iter,avg_var_of_mean,avg_var_of_var\n");
        for cell in &cells {
            if let SweepOutcome::Metrics(m) = &cell.outcome {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    cell.n_games,
                    cell.n_iter,
                    format_float(m.avg_var_of_mean),
                    format_float(m.avg_var_of_var)
                ));
            }
        }
        write_atomic(plot, out.as_bytes())?;
        println!("wrote plot data to {}", plot.display());
    }
    Ok(())
}

fn parse_long_csv(path: &Path, text: &str) -> Result<Vec<SweepCell>> {
    let shown = path.display().to_string();
    let malformed = |line: usize, detail: String| Error::MalformedData {
        path: shown.clone(),
        detail: format!("line {}: {detail}", line + 1),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "n_games,n_iter,replications,status,avg_var_of_mean,avg_var_of_var")) => {}
        Some((_, header)) => {
            return Err(Error::SchemaMismatch {
                path: shown,
                detail: format!("unexpected header '{header}'"),
            })
        }
        None => return Err(Error::EmptyInput("sweep long CSV")),
    }
    let mut cells = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(malformed(idx, format!("expected 6 fields, found {}", fields.len())));
        }
        let n_games: usize = fields[0]
            .parse()
            .map_err(|_| malformed(idx, format!("bad n_games '{}'", fields[0])))?;
        let n_iter: usize = fields[1]
            .parse()
            .map_err(|_| malformed(idx, format!("bad n_iter '{}'", fields[1])))?;
        let outcome = if fields[3] == "ok" {
            let replications: usize = fields[2]
                .parse()
                .map_err(|_| malformed(idx, format!("bad replications '{}'", fields[2])))?;
            let avg_var_of_mean: f64 = fields[4]
                .parse()
                .map_err(|_| malformed(idx, format!("bad avg_var_of_mean '{}'", fields[4])))?;
            let avg_var_of_var: f64 = fields[5]
                .parse()
                .map_err(|_| malformed(idx, format!("bad avg_var_of_var '{}'", fields[5])))?;
            SweepOutcome::Metrics(MetricsReport {
                per_player_var_of_mean: Vec::new(),
                per_player_var_of_var: Vec::new(),
                avg_var_of_mean,
                avg_var_of_var,
                replications,
                master_seed: 0,
                replication_indices: Vec::new(),
            })
        } else {
            SweepOutcome::Failed(fields[3].trim_start_matches("failed:").to_string())
        };
        cells.push(SweepCell {
            n_games,
            n_iter,
            outcome,
        });
    }
    Ok(cells)
}
