//! Coalition utility functions: nearest-neighbor regression for
//! one-dimensional synthetic data and least-squares regression for tabular
//! data, both scored as `1 / (1 + MSE)` on a fixed validation set.
//!
//! Scores therefore live in `[0, 1]`: zero only for degenerate coalitions
//! (empty data, or fewer than two samples for the regression utility), one
//! exactly when the validation set is predicted perfectly. The empty
//! coalition scores zero, matching the `v(empty) = 0` convention of the
//! marginal-contribution walk.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::game::{Coalition, GameData, Permutation, Sample, UtilityFunction};

/// Fixed evaluation points for utility scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSet {
    points: Vec<Sample>,
    dim: usize,
}

impl ValidationSet {
    /// Requires a nonempty set with a consistent feature dimension.
    pub fn new(points: Vec<Sample>) -> Result<Self> {
        let dim = points
            .first()
            .ok_or(Error::EmptyInput("validation set"))?
            .features
            .len();
        for p in &points {
            if p.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.features.len(),
                });
            }
        }
        Ok(Self { points, dim })
    }

    pub fn points(&self) -> &[Sample] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Mean squared error between matching prediction/truth lists.
pub fn mse(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("prediction list"));
    }
    let total: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(total / predictions.len() as f64)
}

fn score_from_mse(mse: f64) -> f64 {
    1.0 / (1.0 + mse)
}

// ---------------------------------------------------------------------------
// Nearest-neighbor utility (one-dimensional features)
// ---------------------------------------------------------------------------

/// A coalition point prepared for 1-NN lookup. `key` is the position in the
/// canonical aggregation order (ascending player, then sample order); on
/// duplicate `x` the smallest key wins, which fixes the declared
/// tie-breaking rule.
#[derive(Debug, Clone, Copy)]
struct NnPoint {
    x: f64,
    y: f64,
    key: u64,
}

/// Sorts by `x` (then insertion key) and collapses duplicate `x` values to
/// their earliest-inserted point.
fn sort_dedup(mut points: Vec<NnPoint>) -> Vec<NnPoint> {
    points.sort_unstable_by(|a, b| a.x.total_cmp(&b.x).then(a.key.cmp(&b.key)));
    points.dedup_by(|next, kept| next.x.total_cmp(&kept.x).is_eq());
    points
}

/// MSE of 1-NN predictions over validation points sorted ascending by `x`.
/// Ties at equal distance resolve to the smaller `x` (the strict `<` below
/// never advances past an equidistant right neighbor).
fn nn_mse(points: &[NnPoint], val_sorted: &[(f64, f64)]) -> f64 {
    debug_assert!(!points.is_empty());
    let mut j = 0usize;
    let mut total = 0.0;
    for &(xv, yv) in val_sorted {
        while j + 1 < points.len() && (points[j + 1].x - xv).abs() < (points[j].x - xv).abs() {
            j += 1;
        }
        let err = points[j].y - yv;
        total += err * err;
    }
    total / val_sorted.len() as f64
}

fn check_one_dimensional(samples: &[Sample]) -> Result<()> {
    for s in samples {
        if s.features.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: s.features.len(),
            });
        }
    }
    Ok(())
}

fn sorted_validation_xy(val: &ValidationSet) -> Result<Vec<(f64, f64)>> {
    if val.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: val.dim(),
        });
    }
    let mut xy: Vec<(f64, f64)> = val.points().iter().map(|p| (p.features[0], p.label)).collect();
    xy.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    Ok(xy)
}

/// Nearest-neighbor regression utility: predicts each validation label by
/// the label of the coalition sample with the closest `x`, and scores
/// `1 / (1 + MSE)`. An empty coalition scores `0`.
pub fn nn_utility(coalition_data: &[Sample], val: &ValidationSet) -> Result<f64> {
    check_one_dimensional(coalition_data)?;
    let val_sorted = sorted_validation_xy(val)?;
    if coalition_data.is_empty() {
        return Ok(0.0);
    }
    let points = sort_dedup(
        coalition_data
            .iter()
            .enumerate()
            .map(|(k, s)| NnPoint {
                x: s.features[0],
                y: s.label,
                key: k as u64,
            })
            .collect(),
    );
    Ok(score_from_mse(nn_mse(&points, &val_sorted)))
}

/// [`nn_utility`] as a reusable [`UtilityFunction`]; the validation set is
/// sorted once at construction.
#[derive(Debug, Clone)]
pub struct NearestNeighborUtility {
    val_sorted: Vec<(f64, f64)>,
}

impl NearestNeighborUtility {
    pub fn new(val: &ValidationSet) -> Result<Self> {
        Ok(Self {
            val_sorted: sorted_validation_xy(val)?,
        })
    }

    /// Per-player points presorted for merging, with canonical keys.
    fn prepare(&self, data: &GameData) -> Result<Vec<Vec<NnPoint>>> {
        (0..data.n_players())
            .map(|p| {
                let samples = data.samples(crate::game::PlayerId(p));
                check_one_dimensional(samples)?;
                Ok(sort_dedup(
                    samples
                        .iter()
                        .enumerate()
                        .map(|(k, s)| NnPoint {
                            x: s.features[0],
                            y: s.label,
                            key: ((p as u64) << 32) | k as u64,
                        })
                        .collect(),
                ))
            })
            .collect()
    }
}

/// Merges two sorted deduplicated runs; on equal `x` the smaller key wins,
/// so the result depends only on the merged set, not merge order.
fn merge_dedup(left: &[NnPoint], right: &[NnPoint], out: &mut Vec<NnPoint>) {
    out.clear();
    out.reserve(left.len() + right.len());
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        match left[i].x.total_cmp(&right[j].x) {
            std::cmp::Ordering::Less => {
                out.push(left[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(right[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(if left[i].key <= right[j].key {
                    left[i]
                } else {
                    right[j]
                });
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&left[i..]);
    out.extend_from_slice(&right[j..]);
}

impl UtilityFunction for NearestNeighborUtility {
    fn evaluate(&self, coalition: Coalition, data: &GameData) -> Result<f64> {
        let gathered: Vec<NnPoint> = data
            .coalition_samples(coalition)
            .enumerate()
            .map(|(k, s)| {
                if s.features.len() != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        got: s.features.len(),
                    });
                }
                Ok(NnPoint {
                    x: s.features[0],
                    y: s.label,
                    key: k as u64,
                })
            })
            .collect::<Result<_>>()?;
        if gathered.is_empty() {
            return Ok(0.0);
        }
        Ok(score_from_mse(nn_mse(&sort_dedup(gathered), &self.val_sorted)))
    }

    /// Incremental prefix walk: at each step the new player's presorted run
    /// is merged into the coalition's, so a permutation costs one linear
    /// merge pass instead of a fresh sort per prefix.
    fn marginal_sums(&self, perms: &[Permutation], data: &GameData) -> Result<Vec<f64>> {
        let n = data.n_players();
        let players = self.prepare(data)?;
        let mut acc = vec![0.0; n];
        let mut merged: Vec<NnPoint> = Vec::new();
        let mut scratch: Vec<NnPoint> = Vec::new();
        for perm in perms {
            merged.clear();
            let mut previous = 0.0;
            for &p in perm.order() {
                merge_dedup(&merged, &players[p.index()], &mut scratch);
                std::mem::swap(&mut merged, &mut scratch);
                let current = if merged.is_empty() {
                    0.0
                } else {
                    score_from_mse(nn_mse(&merged, &self.val_sorted))
                };
                acc[p.index()] += current - previous;
                previous = current;
            }
        }
        Ok(acc)
    }
}

// ---------------------------------------------------------------------------
// Least-squares utility
// ---------------------------------------------------------------------------

/// Relative eigenvalue cutoff of the rank-revealing solve.
pub const MIN_NORM_REL_TOL: f64 = 1e-10;

/// Minimum-norm solution of the normal equations `gram * beta = rhs` via a
/// symmetric eigendecomposition, treating eigenvalues at or below
/// `MIN_NORM_REL_TOL` times the largest as zero. `pinv(X^T X) X^T y` equals
/// the minimum-norm least-squares solution `pinv(X) y`.
fn solve_min_norm(gram: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(gram.clone());
    let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut beta = DVector::zeros(rhs.len());
    if lambda_max <= 0.0 {
        return beta;
    }
    let threshold = MIN_NORM_REL_TOL * lambda_max;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > threshold {
            let v = eig.eigenvectors.column(k);
            beta += v * (v.dot(rhs) / lambda);
        }
    }
    beta
}

/// Accumulated normal equations of a sample set under the design
/// `z = [1, features..]`.
#[derive(Debug, Clone)]
struct GramSystem {
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
    count: usize,
}

impl GramSystem {
    fn zero(dim: usize) -> Self {
        Self {
            gram: DMatrix::zeros(dim + 1, dim + 1),
            rhs: DVector::zeros(dim + 1),
            count: 0,
        }
    }

    fn add_sample(&mut self, features: &[f64], label: f64) {
        let d = features.len();
        debug_assert_eq!(d + 1, self.rhs.len());
        let z = |i: usize| if i == 0 { 1.0 } else { features[i - 1] };
        for i in 0..=d {
            let zi = z(i);
            for j in 0..=d {
                self.gram[(i, j)] += zi * z(j);
            }
            self.rhs[i] += zi * label;
        }
        self.count += 1;
    }

    fn add_system(&mut self, other: &GramSystem) {
        self.gram += &other.gram;
        self.rhs += &other.rhs;
        self.count += other.count;
    }

    fn reset(&mut self) {
        self.gram.fill(0.0);
        self.rhs.fill(0.0);
        self.count = 0;
    }
}

fn gram_from_samples<'a, I>(samples: I, dim: usize) -> Result<GramSystem>
where
    I: IntoIterator<Item = &'a Sample>,
{
    let mut system = GramSystem::zero(dim);
    for s in samples {
        if s.features.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.features.len(),
            });
        }
        system.add_sample(&s.features, s.label);
    }
    Ok(system)
}

fn ols_score(
    system: &GramSystem,
    val_design: &DMatrix<f64>,
    val_labels: &DVector<f64>,
) -> f64 {
    // Coalitions with fewer than two samples cannot support a fit.
    if system.count < 2 {
        return 0.0;
    }
    let beta = solve_min_norm(&system.gram, &system.rhs);
    let residual = val_design * beta - val_labels;
    score_from_mse(residual.norm_squared() / val_labels.len() as f64)
}

/// Ordinary-least-squares regression utility with an intercept column:
/// fits the coalition samples (minimum-norm solution when rank-deficient),
/// predicts the validation labels, and scores `1 / (1 + MSE)`. Coalitions
/// with fewer than two samples score `0`.
pub fn ols_utility(coalition_data: &[Sample], val: &ValidationSet) -> Result<f64> {
    if coalition_data.len() < 2 {
        // The dimension check still applies to whatever was provided.
        for s in coalition_data {
            if s.features.len() != val.dim() {
                return Err(Error::DimensionMismatch {
                    expected: val.dim(),
                    got: s.features.len(),
                });
            }
        }
        return Ok(0.0);
    }
    let system = gram_from_samples(coalition_data, val.dim())?;
    let (design, labels) = validation_design(val);
    Ok(ols_score(&system, &design, &labels))
}

fn validation_design(val: &ValidationSet) -> (DMatrix<f64>, DVector<f64>) {
    let d = val.dim();
    let design = DMatrix::from_fn(val.len(), d + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            val.points()[r].features[c - 1]
        }
    });
    let labels = DVector::from_iterator(val.len(), val.points().iter().map(|p| p.label));
    (design, labels)
}

/// [`ols_utility`] as a reusable [`UtilityFunction`]; the validation design
/// matrix is built once at construction.
#[derive(Debug, Clone)]
pub struct LeastSquaresUtility {
    dim: usize,
    val_design: DMatrix<f64>,
    val_labels: DVector<f64>,
}

impl LeastSquaresUtility {
    pub fn new(val: &ValidationSet) -> Result<Self> {
        if val.dim() == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        let (val_design, val_labels) = validation_design(val);
        Ok(Self {
            dim: val.dim(),
            val_design,
            val_labels,
        })
    }
}

impl UtilityFunction for LeastSquaresUtility {
    fn evaluate(&self, coalition: Coalition, data: &GameData) -> Result<f64> {
        let system = gram_from_samples(data.coalition_samples(coalition), self.dim)?;
        Ok(ols_score(&system, &self.val_design, &self.val_labels))
    }

    /// Incremental prefix walk: per-player normal equations are accumulated
    /// once per game, and each prefix step adds one player's block before a
    /// small `(d+1) x (d+1)` solve.
    fn marginal_sums(&self, perms: &[Permutation], data: &GameData) -> Result<Vec<f64>> {
        let n = data.n_players();
        let players: Vec<GramSystem> = (0..n)
            .map(|p| gram_from_samples(data.samples(crate::game::PlayerId(p)), self.dim))
            .collect::<Result<_>>()?;
        let mut acc = vec![0.0; n];
        let mut running = GramSystem::zero(self.dim);
        for perm in perms {
            running.reset();
            let mut previous = 0.0;
            for &p in perm.order() {
                running.add_system(&players[p.index()]);
                let current = ols_score(&running, &self.val_design, &self.val_labels);
                acc[p.index()] += current - previous;
                previous = current;
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{exact_shapley, GameData, PlayerId, Sample};
    use crate::rng::{unit_f64, StreamKey, StreamPurpose};

    fn val_1d(points: &[(f64, f64)]) -> ValidationSet {
        ValidationSet::new(points.iter().map(|&(x, y)| Sample::scalar(x, y)).collect()).unwrap()
    }

    #[test]
    fn mse_basics() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(mse(&[3.0], &[0.0]).unwrap(), 9.0);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn nn_exact_coverage_scores_one() {
        let val = val_1d(&[(0.0, 1.0), (2.0, 3.0), (5.0, -1.0)]);
        let data = vec![
            Sample::scalar(5.0, -1.0),
            Sample::scalar(0.0, 1.0),
            Sample::scalar(2.0, 3.0),
        ];
        assert_eq!(nn_utility(&data, &val).unwrap(), 1.0);
    }

    #[test]
    fn nn_empty_coalition_scores_zero() {
        let val = val_1d(&[(0.0, 0.0)]);
        assert_eq!(nn_utility(&[], &val).unwrap(), 0.0);
    }

    #[test]
    fn nn_hand_worked_cases() {
        let data = vec![Sample::scalar(0.0, 0.0), Sample::scalar(10.0, 5.0)];
        assert_eq!(nn_utility(&data, &val_1d(&[(4.0, 0.0)])).unwrap(), 1.0);
        assert_eq!(nn_utility(&data, &val_1d(&[(6.0, 5.0)])).unwrap(), 1.0);
        // Equidistant: the smaller x wins.
        assert_eq!(nn_utility(&data, &val_1d(&[(5.0, 0.0)])).unwrap(), 1.0);
    }

    #[test]
    fn nn_duplicate_x_resolves_to_earliest_insertion() {
        let val = val_1d(&[(5.0, 1.0)]);
        let forward = vec![Sample::scalar(5.0, 1.0), Sample::scalar(5.0, 2.0)];
        let reversed = vec![Sample::scalar(5.0, 2.0), Sample::scalar(5.0, 1.0)];
        assert_eq!(nn_utility(&forward, &val).unwrap(), 1.0);
        assert_eq!(nn_utility(&reversed, &val).unwrap(), 0.5);
    }

    #[test]
    fn nn_rejects_wrong_dimension() {
        let val = val_1d(&[(0.0, 0.0)]);
        let bad = vec![Sample::new(vec![1.0, 2.0], 0.0)];
        assert!(matches!(
            nn_utility(&bad, &val),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn nn_is_order_invariant_for_distinct_x() {
        let mut rng = StreamKey::new(21, StreamPurpose::GameDraw, 0, 0).stream();
        let val = val_1d(&[(-1.0, 0.5), (0.5, 2.0), (3.0, -1.0)]);
        for _ in 0..50 {
            let mut data: Vec<Sample> = (0..8)
                .map(|i| Sample::scalar(i as f64 + unit_f64(&mut rng) * 0.5, unit_f64(&mut rng)))
                .collect();
            let a = nn_utility(&data, &val).unwrap();
            data.reverse();
            let b = nn_utility(&data, &val).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ols_degenerate_coalitions_score_zero() {
        let val = val_1d(&[(1.0, 2.0)]);
        assert_eq!(ols_utility(&[], &val).unwrap(), 0.0);
        assert_eq!(ols_utility(&[Sample::scalar(1.0, 2.0)], &val).unwrap(), 0.0);
    }

    #[test]
    fn ols_perfect_line_scores_one() {
        let val = val_1d(&[(0.5, 1.0), (2.0, 4.0)]);
        let data: Vec<Sample> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&x| Sample::scalar(x, 2.0 * x))
            .collect();
        let score = ols_utility(&data, &val).unwrap();
        assert!((score - 1.0).abs() < 1e-9, "{score}");
    }

    #[test]
    fn ols_hand_solved_normal_equations() {
        // Fit {(1,1),(2,2),(3,2)} with intercept: prediction at x=2 is 5/3,
        // so MSE = 1/9 and the score is 0.9.
        let val = val_1d(&[(2.0, 2.0)]);
        let data = vec![
            Sample::scalar(1.0, 1.0),
            Sample::scalar(2.0, 2.0),
            Sample::scalar(3.0, 2.0),
        ];
        let score = ols_utility(&data, &val).unwrap();
        assert!((score - 0.9).abs() < 1e-9, "{score}");
    }

    #[test]
    fn ols_duplicated_dataset_leaves_score_unchanged() {
        let val = val_1d(&[(2.0, 2.0), (0.0, 1.0)]);
        let data = vec![
            Sample::scalar(1.0, 1.0),
            Sample::scalar(2.0, 2.0),
            Sample::scalar(3.0, 2.0),
        ];
        let mut doubled = data.clone();
        doubled.extend(data.iter().cloned());
        let a = ols_utility(&data, &val).unwrap();
        let b = ols_utility(&doubled, &val).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn ols_rank_deficient_is_finite_and_deterministic() {
        // Two identical high-dimensional samples: rank-1 normal equations,
        // resolved by the minimum-norm rule.
        let features: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let data = vec![
            Sample::new(features.clone(), 1.0),
            Sample::new(features.clone(), 1.0),
        ];
        let val = ValidationSet::new(vec![Sample::new(features.clone(), 1.0)]).unwrap();
        let a = ols_utility(&data, &val).unwrap();
        let b = ols_utility(&data, &val).unwrap();
        assert!(a.is_finite() && (0.0..=1.0).contains(&a));
        assert_eq!(a, b);
        // The validation point lies in the fitted subspace, so the
        // prediction there is exact.
        assert!((a - 1.0).abs() < 1e-9, "{a}");
    }

    #[test]
    fn ols_rejects_inconsistent_dimensions() {
        let val = val_1d(&[(0.0, 0.0)]);
        let data = vec![Sample::scalar(1.0, 1.0), Sample::new(vec![1.0, 2.0], 1.0)];
        assert!(ols_utility(&data, &val).is_err());
    }

    #[test]
    fn lower_mse_strictly_raises_the_score() {
        // One validation point at (0, 0); coalitions at increasing distance
        // from the truth produce MSE 0, 1, and 9.
        let val = val_1d(&[(0.0, 0.0)]);
        let perfect = nn_utility(&[Sample::scalar(0.0, 0.0)], &val).unwrap();
        let off_one = nn_utility(&[Sample::scalar(0.0, 1.0)], &val).unwrap();
        let off_three = nn_utility(&[Sample::scalar(0.0, 3.0)], &val).unwrap();
        assert_eq!(perfect, 1.0);
        assert_eq!(off_one, 0.5);
        assert_eq!(off_three, 0.1);
        assert!(perfect > off_one && off_one > off_three);
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        let mut rng = StreamKey::new(22, StreamPurpose::GameDraw, 0, 0).stream();
        let val = val_1d(&[(0.0, 3.0), (1.0, -2.0), (2.0, 0.5)]);
        for _ in 0..100 {
            let data: Vec<Sample> = (0..6)
                .map(|_| {
                    Sample::scalar(unit_f64(&mut rng) * 10.0 - 5.0, unit_f64(&mut rng) * 8.0 - 4.0)
                })
                .collect();
            let a = nn_utility(&data, &val).unwrap();
            let b = ols_utility(&data, &val).unwrap();
            assert!((0.0..=1.0).contains(&a));
            assert!((0.0..=1.0).contains(&b));
        }
    }

    /// Random small game for cross-checking the accelerated walks.
    fn random_game(seed: u64, n_players: usize, per_player: usize) -> GameData {
        let mut rng = StreamKey::new(seed, StreamPurpose::GameDraw, 0, 0).stream();
        GameData::new(
            (0..n_players)
                .map(|_| {
                    (0..per_player)
                        .map(|_| {
                            Sample::scalar(
                                unit_f64(&mut rng) * 12.0 - 6.0,
                                unit_f64(&mut rng) * 4.0,
                            )
                        })
                        .collect()
                })
                .collect(),
        )
    }

    #[test]
    fn nn_fast_walk_matches_default_walk() {
        let val = val_1d(&[(-3.0, 1.0), (0.0, 2.0), (4.0, 0.0)]);
        let u = NearestNeighborUtility::new(&val).unwrap();
        let data = random_game(31, 5, 7);
        let mut rng = StreamKey::new(32, StreamPurpose::Permutation, 0, 0).stream();
        let perms: Vec<_> = (0..40).map(|_| crate::game::sample_permutation(&mut rng, 5)).collect();
        let fast = u.marginal_sums(&perms, &data).unwrap();
        let mut slow = vec![0.0; 5];
        for perm in &perms {
            let d = crate::game::marginal_contributions_along(perm, &u, &data).unwrap();
            for (s, x) in slow.iter_mut().zip(&d) {
                *s += x;
            }
        }
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).abs() < 1e-9, "{f} vs {s}");
        }
    }

    #[test]
    fn ols_fast_walk_matches_default_walk() {
        let val = val_1d(&[(-1.0, 0.0), (1.0, 2.0), (2.0, 3.0)]);
        let u = LeastSquaresUtility::new(&val).unwrap();
        let data = random_game(33, 4, 6);
        let mut rng = StreamKey::new(34, StreamPurpose::Permutation, 0, 0).stream();
        let perms: Vec<_> = (0..40).map(|_| crate::game::sample_permutation(&mut rng, 4)).collect();
        let fast = u.marginal_sums(&perms, &data).unwrap();
        let mut slow = vec![0.0; 4];
        for perm in &perms {
            let d = crate::game::marginal_contributions_along(perm, &u, &data).unwrap();
            for (s, x) in slow.iter_mut().zip(&d) {
                *s += x;
            }
        }
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).abs() < 1e-9, "{f} vs {s}");
        }
    }

    #[test]
    fn empty_player_contributes_nothing_under_nn() {
        let val = val_1d(&[(0.0, 0.0), (1.0, 1.0)]);
        let u = NearestNeighborUtility::new(&val).unwrap();
        // Player 1 has no samples; its marginal contribution is zero in any
        // permutation.
        let data = GameData::new(vec![
            vec![Sample::scalar(0.0, 0.0), Sample::scalar(1.0, 1.0)],
            vec![],
        ]);
        let phi = exact_shapley(&u, &data).unwrap();
        assert_eq!(phi.get(PlayerId(1)), 0.0);
        assert!((phi.get(PlayerId(0)) - 1.0).abs() < 1e-12);
    }
}
