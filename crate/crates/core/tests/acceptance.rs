//! Acceptance suite: one test per criterion, each printing a `[PASS]` line
//! with its measured quantities (visible with `--nocapture`).
//!
//! Criteria 1-7 and 9 live here; criterion 8 (byte-identical CLI output
//! across worker counts) lives in the CLI crate's acceptance target.

use std::path::{Path, PathBuf};
use std::time::Instant;

use probshap::analytic::{
    additive_gaussian_players, expected_shapley_additive, gaussian_fourth_central_moment,
    variance_of_sample_variance, variance_shapley_additive, AdditiveGaussianGameSpec,
    AdditiveMeanUtility, GaussianPlayer, GaussianValuePlayer, MomentSummary,
};
use probshap::datasets::{
    load_wine, make_synthetic_players, split_and_partition, validation_grid, PlayerDistribution,
    SyntheticSpec, WineTable, ALCOHOL_FEATURE,
};
use probshap::estimators::{
    allocate_bootstrap_sizes, build_pools, normalize_scores, run_baseline, run_pooled,
    run_stratified, sampling_cost, BaselineConfig, PooledConfig, StratifiedConfig,
};
use probshap::metrics::{cross_replication_report, MetricsReport, ReplicationSet};
use probshap::rng::{unit_f64, StreamKey, StreamPurpose};
use probshap::utilities::{
    nn_utility, ols_utility, LeastSquaresUtility, NearestNeighborUtility, ValidationSet,
};
use probshap::{
    exact_shapley, exact_shapley_by_permutations, mc_shapley, Coalition, GameData, PlayerSampler,
    Result as ShapResult, Sample, UtilityFunction,
};

fn wine_path() -> PathBuf {
    if let Ok(p) = std::env::var("PROBSHAP_WINE_CSV") {
        return p.into();
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/winequality-white.csv")
}

/// The five-player additive Gaussian reference game.
fn reference_game() -> AdditiveGaussianGameSpec {
    let mus = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let sigmas = [0.5, 1.0, 1.5, 2.0, 2.5];
    AdditiveGaussianGameSpec::new(
        mus.iter()
            .zip(&sigmas)
            .map(|(&mean, &std_dev)| GaussianPlayer { mean, std_dev })
            .collect(),
    )
    .unwrap()
}

#[test]
fn criterion_1_closed_form_oracle_agreement() {
    let start = Instant::now();
    let spec = reference_game();
    let players = additive_gaussian_players(&spec);
    let cfg = BaselineConfig {
        n_sample: 1,
        n_games: 2000,
        n_iter: 1,
        master_seed: 42,
        replication: 0,
    };
    let result = run_baseline(&cfg, &players, &AdditiveMeanUtility).unwrap();
    let mu = expected_shapley_additive(&spec);
    let sigma2 = variance_shapley_additive(&spec);
    let mut worst_mean_z = 0.0f64;
    let mut worst_var_rel = 0.0f64;
    for i in 0..5 {
        let se = (sigma2[i] / 2000.0).sqrt();
        let z = (result.overall_mean[i] - mu[i]).abs() / se;
        worst_mean_z = worst_mean_z.max(z);
        assert!(
            z <= 4.0,
            "player {i}: mean {} deviates {z:.2} standard errors from {}",
            result.overall_mean[i],
            mu[i]
        );
        let rel = (result.across_game_variance[i] - sigma2[i]).abs() / sigma2[i];
        worst_var_rel = worst_var_rel.max(rel);
        assert!(
            rel <= 0.10,
            "player {i}: variance {} deviates {:.1}% from {}",
            result.across_game_variance[i],
            rel * 100.0,
            sigma2[i]
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget is 1 minute");
    println!(
        "[PASS] criterion 1: closed-form agreement over 2000 games \
         (worst mean deviation {worst_mean_z:.2} se, worst variance deviation {:.1}%, {elapsed:?})",
        worst_var_rel * 100.0
    );
}

#[test]
fn criterion_2_estimator_variance_identities() {
    let start = Instant::now();
    let spec = reference_game();
    let players = additive_gaussian_players(&spec);
    let m = 50usize;
    let reps = 500u64;
    let n = spec.n_players();
    let mut means: Vec<Vec<f64>> = vec![Vec::with_capacity(reps as usize); n];
    let mut variances: Vec<Vec<f64>> = vec![Vec::with_capacity(reps as usize); n];
    for r in 0..reps {
        let cfg = BaselineConfig {
            n_sample: 1,
            n_games: m,
            n_iter: 1,
            master_seed: 42,
            replication: r,
        };
        let result = run_baseline(&cfg, &players, &AdditiveMeanUtility).unwrap();
        for i in 0..n {
            means[i].push(result.overall_mean[i]);
            variances[i].push(result.across_game_variance[i]);
        }
    }
    let sigma2 = variance_shapley_additive(&spec);
    let sample_var = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
    };
    let mut worst_mean_rel = 0.0f64;
    let mut worst_var_rel = 0.0f64;
    for i in 0..n {
        // Var(E^[phi_i]) = sigma_i^2 / m.
        let expected_mean_var = sigma2[i] / m as f64;
        let observed_mean_var = sample_var(&means[i]);
        let rel = (observed_mean_var - expected_mean_var).abs() / expected_mean_var;
        worst_mean_rel = worst_mean_rel.max(rel);
        assert!(
            rel <= 0.25,
            "player {i}: Var(mean) {observed_mean_var} vs {expected_mean_var} ({:.1}% off)",
            rel * 100.0
        );
        // Var(Var^(phi_i)) = (1/m)(mu_4 - ((m-3)/(m-1)) sigma^4), mu_4 = 3 sigma^4.
        let summary = MomentSummary::new(
            0.0,
            sigma2[i],
            gaussian_fourth_central_moment(sigma2[i]),
            m,
        )
        .unwrap();
        let expected_var_var = variance_of_sample_variance(&summary).unwrap();
        let observed_var_var = sample_var(&variances[i]);
        let rel = (observed_var_var - expected_var_var).abs() / expected_var_var;
        worst_var_rel = worst_var_rel.max(rel);
        assert!(
            rel <= 0.30,
            "player {i}: Var(variance) {observed_var_var} vs {expected_var_var} ({:.1}% off)",
            rel * 100.0
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget is 2 minutes");
    println!(
        "[PASS] criterion 2: estimator identities over 500 replications at m=50 \
         (worst Var(mean) off {:.1}%, worst Var(var) off {:.1}%, {elapsed:?})",
        worst_mean_rel * 100.0,
        worst_var_rel * 100.0
    );
}

/// Deterministic utility with per-player base values and pairwise
/// interactions, backed by a precomputed coalition table.
struct TableUtility {
    values: Vec<f64>,
}

impl UtilityFunction for TableUtility {
    fn evaluate(&self, coalition: Coalition, _data: &GameData) -> ShapResult<f64> {
        Ok(self.values[coalition.mask() as usize])
    }
}

fn structured_utility(seed: u64, n: usize) -> TableUtility {
    let mut rng = StreamKey::new(seed, StreamPurpose::GameDraw, 0, 0).stream();
    let base: Vec<f64> = (0..n).map(|_| 1.0 + unit_f64(&mut rng)).collect();
    let mut pair = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let b = 0.2 * unit_f64(&mut rng) - 0.1;
            pair[i][j] = b;
            pair[j][i] = b;
        }
    }
    let values = (0..(1u64 << n))
        .map(|mask| {
            let mut total = 0.0;
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    total += base[i];
                    for j in (i + 1)..n {
                        if mask & (1 << j) != 0 {
                            total += pair[i][j];
                        }
                    }
                }
            }
            total
        })
        .collect();
    TableUtility { values }
}

#[test]
fn criterion_3_exact_forms_and_monte_carlo_agree() {
    let start = Instant::now();
    let n = 6usize;
    let data = GameData::new(vec![Vec::new(); n]);
    let mut worst_form_gap = 0.0f64;
    let mut worst_mc_rel = 0.0f64;
    for t in 0..20u64 {
        let u = structured_utility(1000 + t, n);
        let by_subsets = exact_shapley(&u, &data).unwrap();
        let by_perms = exact_shapley_by_permutations(&u, &data).unwrap();
        for (a, b) in by_subsets.values.iter().zip(&by_perms.values) {
            let gap = (a - b).abs();
            worst_form_gap = worst_form_gap.max(gap);
            assert!(gap < 1e-12, "forms disagree: {a} vs {b}");
        }
        let mut rng = StreamKey::new(2000 + t, StreamPurpose::Permutation, 0, 0).stream();
        let mc = mc_shapley(&u, &data, 50_000, &mut rng).unwrap();
        for (m, e) in mc.values.iter().zip(&by_subsets.values) {
            let rel = (m - e).abs() / e.abs();
            worst_mc_rel = worst_mc_rel.max(rel);
            assert!(rel <= 0.01, "mc {m} vs exact {e} ({:.2}% off)", rel * 100.0);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget is 1 minute");
    println!(
        "[PASS] criterion 3: 20 utilities, subset vs permutation forms within {worst_form_gap:.2e}, \
         MC(k=50000) within {:.3}% of exact ({elapsed:?})",
        worst_mc_rel * 100.0
    );
}

#[test]
fn criterion_4_sampling_cost_accounting() {
    let players: Vec<GaussianValuePlayer> = (0..10)
        .map(|i| GaussianValuePlayer {
            mean: i as f64,
            std_dev: 1.0,
        })
        .collect();
    let baseline = run_baseline(
        &BaselineConfig {
            n_sample: 1000,
            n_games: 200,
            n_iter: 1,
            master_seed: 42,
            replication: 0,
        },
        &players,
        &AdditiveMeanUtility,
    )
    .unwrap();
    assert_eq!(sampling_cost(&baseline), 2_000_000);

    let pools = build_pools(&players, 5000, 42, 0).unwrap();
    let pooled = run_pooled(
        &PooledConfig {
            n_pool: 5000,
            n_boot: 1000,
            n_games: 2,
            n_iter: 1,
            master_seed: 42,
            replication: 0,
        },
        &pools,
        &AdditiveMeanUtility,
    )
    .unwrap();
    assert_eq!(sampling_cost(&pooled), 50_000);

    let stratified = run_stratified(
        &StratifiedConfig {
            pooled: PooledConfig {
                n_pool: 5000,
                n_boot: 1000,
                n_games: 2,
                n_iter: 1,
                master_seed: 42,
                replication: 0,
            },
            alpha: 0.5,
        },
        &pools,
        &AdditiveMeanUtility,
    )
    .unwrap();
    assert_eq!(sampling_cost(&stratified), sampling_cost(&pooled));

    let reduction = (sampling_cost(&baseline) - sampling_cost(&pooled)) as f64
        / sampling_cost(&baseline) as f64;
    assert_eq!(reduction, 0.975);
    println!(
        "[PASS] criterion 4: baseline 2,000,000 draws vs pooled 50,000 draws, 97.5% reduction"
    );
}

// ---------------------------------------------------------------------------
// Desk-scale replication studies (criteria 5-7)
// ---------------------------------------------------------------------------

enum Method {
    Baseline { n_sample: usize },
    Pooled { n_pool: usize, n_boot: usize },
    Stratified { n_pool: usize, n_boot: usize, alpha: f64 },
}

fn replicate<P, U>(
    method: &Method,
    players: &[P],
    utility: &U,
    n_games: usize,
    n_iter: usize,
    seed: u64,
    replications: u64,
) -> MetricsReport
where
    P: PlayerSampler,
    U: UtilityFunction + ?Sized,
{
    let runs: Vec<_> = (0..replications)
        .map(|r| match method {
            Method::Baseline { n_sample } => run_baseline(
                &BaselineConfig {
                    n_sample: *n_sample,
                    n_games,
                    n_iter,
                    master_seed: seed,
                    replication: r,
                },
                players,
                utility,
            )
            .unwrap(),
            Method::Pooled { n_pool, n_boot } => {
                // Pools are the one-time data-access stage: built once per
                // experiment and shared by all replications.
                let pools = build_pools(players, *n_pool, seed, 0).unwrap();
                run_pooled(
                    &PooledConfig {
                        n_pool: *n_pool,
                        n_boot: *n_boot,
                        n_games,
                        n_iter,
                        master_seed: seed,
                        replication: r,
                    },
                    &pools,
                    utility,
                )
                .unwrap()
            }
            Method::Stratified {
                n_pool,
                n_boot,
                alpha,
            } => {
                let pools = build_pools(players, *n_pool, seed, 0).unwrap();
                run_stratified(
                    &StratifiedConfig {
                        pooled: PooledConfig {
                            n_pool: *n_pool,
                            n_boot: *n_boot,
                            n_games,
                            n_iter,
                            master_seed: seed,
                            replication: r,
                        },
                        alpha: *alpha,
                    },
                    &pools,
                    utility,
                )
                .unwrap()
            }
        })
        .collect();
    cross_replication_report(&ReplicationSet::new(runs).unwrap()).unwrap()
}

fn synthetic_setup(seed: u64) -> (Vec<PlayerDistribution>, NearestNeighborUtility) {
    let spec = SyntheticSpec {
        master_seed: seed,
        ..SyntheticSpec::default()
    };
    let players = make_synthetic_players(&spec).unwrap();
    let validation = validation_grid(&spec, 1000).unwrap();
    let utility = NearestNeighborUtility::new(&validation).unwrap();
    (players, utility)
}

fn wine_setup(seed: u64) -> (Vec<PlayerDistribution>, LeastSquaresUtility) {
    let table = load_wine(&wine_path()).unwrap();
    let parts = split_and_partition(&table, seed, 0.7).unwrap();
    let utility = LeastSquaresUtility::new(&parts.validation).unwrap();
    (parts.players, utility)
}

#[test]
fn criterion_5_baseline_variance_trend() {
    let start = Instant::now();
    let (players, utility) = synthetic_setup(42);
    let method = Method::Baseline { n_sample: 1000 };
    let few = replicate(&method, &players, &utility, 10, 100, 42, 20);
    let many = replicate(&method, &players, &utility, 200, 100, 42, 20);
    let reduction = 1.0 - many.avg_var_of_mean / few.avg_var_of_mean;
    assert!(
        reduction >= 0.80,
        "avg_var_of_mean fell only {:.1}% from n_games=10 ({:.3e}) to n_games=200 ({:.3e})",
        reduction * 100.0,
        few.avg_var_of_mean,
        many.avg_var_of_mean
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 900,
        "took {elapsed:?}, budget is 15 minutes"
    );
    println!(
        "[PASS] criterion 5: baseline avg_var_of_mean {:.3e} -> {:.3e}, {:.1}% reduction ({elapsed:?})",
        few.avg_var_of_mean,
        many.avg_var_of_mean,
        reduction * 100.0
    );
}

#[test]
fn criterion_6_pooled_matches_baseline_quality() {
    let start = Instant::now();
    let (players, utility) = synthetic_setup(42);
    let baseline = replicate(
        &Method::Baseline { n_sample: 1000 },
        &players,
        &utility,
        50,
        200,
        42,
        20,
    );
    let pooled = replicate(
        &Method::Pooled {
            n_pool: 5000,
            n_boot: 1000,
        },
        &players,
        &utility,
        50,
        200,
        42,
        20,
    );
    let ratio = pooled.avg_var_of_mean / baseline.avg_var_of_mean;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "pooled avg_var_of_mean {:.3e} vs baseline {:.3e}: ratio {ratio:.2} outside [0.5, 2]",
        pooled.avg_var_of_mean,
        baseline.avg_var_of_mean
    );
    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 6: pooled/baseline avg_var_of_mean ratio {ratio:.2} \
         (pooled {:.3e}, baseline {:.3e}, {elapsed:?})",
        pooled.avg_var_of_mean, baseline.avg_var_of_mean
    );
}

#[test]
fn criterion_7_stratified_improves_on_pooled_wine() {
    let start = Instant::now();
    let (players, utility) = wine_setup(42);
    let grid = [(10usize, 100usize), (50, 100), (10, 1000), (50, 1000)];
    let mut mean_wins = 0usize;
    let mut var_wins = 0usize;
    let mut lines = Vec::new();
    for &(n_games, n_iter) in &grid {
        let pooled = replicate(
            &Method::Pooled {
                n_pool: 250,
                n_boot: 60,
            },
            &players,
            &utility,
            n_games,
            n_iter,
            42,
            20,
        );
        let stratified = replicate(
            &Method::Stratified {
                n_pool: 250,
                n_boot: 60,
                alpha: 0.5,
            },
            &players,
            &utility,
            n_games,
            n_iter,
            42,
            20,
        );
        if stratified.avg_var_of_mean <= pooled.avg_var_of_mean {
            mean_wins += 1;
        }
        if stratified.avg_var_of_var <= pooled.avg_var_of_var {
            var_wins += 1;
        }
        lines.push(format!(
            "  ({n_games},{n_iter}): var_of_mean {:.3e} vs {:.3e}, var_of_var {:.3e} vs {:.3e}",
            stratified.avg_var_of_mean,
            pooled.avg_var_of_mean,
            stratified.avg_var_of_var,
            pooled.avg_var_of_var
        ));
    }
    for line in &lines {
        println!("{line}");
    }
    assert!(
        mean_wins >= 3,
        "stratified lowered avg_var_of_mean in only {mean_wins}/4 cells"
    );
    assert!(
        var_wins >= 3,
        "stratified lowered avg_var_of_var in only {var_wins}/4 cells"
    );
    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 7: stratified beat pooled in {mean_wins}/4 (mean) and {var_wins}/4 (variance) cells ({elapsed:?})"
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: randomized property suite
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_randomized_property_suite() {
    let cases = 100usize;
    let mut rng = StreamKey::new(9, StreamPurpose::GameDraw, 0, 0).stream();

    // Efficiency: the exact values distribute v(N) - v(empty).
    for _ in 0..cases {
        let n = 1 + (unit_f64(&mut rng) * 6.0) as usize;
        let values: Vec<f64> = (0..(1u64 << n))
            .map(|_| unit_f64(&mut rng) * 10.0 - 5.0)
            .collect();
        let grand = values[(1usize << n) - 1];
        let empty = values[0];
        let u = TableUtility { values };
        let phi = exact_shapley(&u, &GameData::new(vec![Vec::new(); n])).unwrap();
        assert!((phi.sum() - (grand - empty)).abs() < 1e-9);
    }

    // Symmetry: players 0 and 1 made interchangeable by symmetrizing the
    // table.
    for _ in 0..cases {
        let n = 2 + (unit_f64(&mut rng) * 5.0) as usize;
        let size = 1usize << n;
        let mut values: Vec<f64> = (0..size).map(|_| unit_f64(&mut rng) * 4.0).collect();
        for mask in 0..size {
            let has0 = mask & 1 != 0;
            let has1 = mask & 2 != 0;
            if has0 != has1 {
                let swapped = (mask & !3) | (usize::from(has0) << 1) | usize::from(has1);
                let v = values[mask.min(swapped)];
                values[mask] = v;
                values[swapped] = v;
            }
        }
        let u = TableUtility { values };
        let phi = exact_shapley(&u, &GameData::new(vec![Vec::new(); n])).unwrap();
        assert!((phi.values[0] - phi.values[1]).abs() < 1e-12);
    }

    // Null player: the last player's bit is ignored by the utility.
    for _ in 0..cases {
        let n = 2 + (unit_f64(&mut rng) * 5.0) as usize;
        let size = 1usize << n;
        let bit = 1usize << (n - 1);
        let mut values: Vec<f64> = (0..size).map(|_| unit_f64(&mut rng) * 4.0).collect();
        for mask in 0..size {
            values[mask] = values[mask & !bit];
        }
        let u = TableUtility { values };
        let phi = exact_shapley(&u, &GameData::new(vec![Vec::new(); n])).unwrap();
        assert!(phi.values[n - 1].abs() < 1e-12);
    }

    // Allocation monotonicity and bounds.
    for _ in 0..cases {
        let n = 1 + (unit_f64(&mut rng) * 11.0) as usize;
        let scores = normalize_scores(
            &(0..n)
                .map(|_| unit_f64(&mut rng) * 30.0)
                .collect::<Vec<_>>(),
        );
        let n_boot = 1 + (unit_f64(&mut rng) * 199.0) as usize;
        let n_pool = 1 + (unit_f64(&mut rng) * 499.0) as usize;
        let alpha = 0.5 + 0.5 * unit_f64(&mut rng);
        let sizes = allocate_bootstrap_sizes(&scores, n_boot, n_pool, alpha);
        let n_min = (n_boot / 2).max(1);
        let n_max = n_min.max((alpha * n_pool as f64).floor() as usize);
        for i in 0..n {
            assert!((n_min..=n_max).contains(&sizes[i]));
            for j in 0..n {
                if scores[i] <= scores[j] {
                    assert!(sizes[i] <= sizes[j]);
                }
            }
        }
    }

    // Partition coverage and disjointness on random wine-like tables.
    for case in 0..cases {
        let rows = 20 + (unit_f64(&mut rng) * 180.0) as usize;
        let levels = 1 + (unit_f64(&mut rng) * 25.0) as usize;
        let table = WineTable::from_rows(
            (0..rows)
                .map(|i| {
                    let mut features = vec![0.0; 11];
                    features[ALCOHOL_FEATURE] = 8.0 + ((i * 7) % levels) as f64 * 0.4;
                    features[0] = i as f64;
                    Sample::new(features, (i % 9) as f64)
                })
                .collect(),
        )
        .unwrap();
        let parts = split_and_partition(&table, case as u64, 0.7).unwrap();
        let mut seen = std::collections::HashSet::new();
        let mut covered = 0;
        for indices in &parts.player_indices {
            for &i in indices {
                assert!(seen.insert(i));
                covered += 1;
            }
        }
        assert_eq!(covered, parts.train_indices.len());
        for w in parts.deciles.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    // Utility range on random coalitions and validation sets.
    for _ in 0..cases {
        let n_data = (unit_f64(&mut rng) * 15.0) as usize;
        let data: Vec<Sample> = (0..n_data)
            .map(|_| Sample::scalar(unit_f64(&mut rng) * 20.0 - 10.0, unit_f64(&mut rng) * 8.0))
            .collect();
        let n_val = 1 + (unit_f64(&mut rng) * 8.0) as usize;
        let val = ValidationSet::new(
            (0..n_val)
                .map(|_| {
                    Sample::scalar(unit_f64(&mut rng) * 20.0 - 10.0, unit_f64(&mut rng) * 8.0)
                })
                .collect(),
        )
        .unwrap();
        let nn = nn_utility(&data, &val).unwrap();
        let ols = ols_utility(&data, &val).unwrap();
        assert!((0.0..=1.0).contains(&nn));
        assert!((0.0..=1.0).contains(&ols));
    }

    println!(
        "[PASS] criterion 9: efficiency, symmetry, null-player, allocation, partition, \
         and utility-range properties over {cases} randomized cases each"
    );
}
