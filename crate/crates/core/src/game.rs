//! Coalitions, permutations, and Shapley value computation for one frozen
//! realization of player data.
//!
//! A game here is fully deterministic: the randomness lives upstream, in how
//! [`GameData`] was sampled. Exact computation is offered in the two
//! classical equivalent forms (coalition-weighted sum and permutation
//! average) which cross-check each other in the tests, plus the Monte Carlo
//! permutation-sampling approximation used by the estimators.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Index of a player in the game, in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlayerId(pub usize);

impl PlayerId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of players, stored as a bitmask. Supports up to 64 players, far
/// beyond what exact computation allows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Coalition(u64);

impl Coalition {
    pub const MAX_PLAYERS: usize = 64;

    pub const fn empty() -> Self {
        Coalition(0)
    }

    /// The grand coalition `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= Self::MAX_PLAYERS);
        if n == Self::MAX_PLAYERS {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << n) - 1)
        }
    }

    pub fn from_mask(mask: u64) -> Self {
        Coalition(mask)
    }

    pub fn from_members<I: IntoIterator<Item = PlayerId>>(members: I) -> Self {
        let mut c = Coalition::empty();
        for p in members {
            c = c.with(p);
        }
        c
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    /// This coalition with `player` added (no-op if already present).
    pub fn with(self, player: PlayerId) -> Self {
        assert!(player.0 < Self::MAX_PLAYERS);
        Coalition(self.0 | (1u64 << player.0))
    }

    pub fn contains(self, player: PlayerId) -> bool {
        player.0 < Self::MAX_PLAYERS && self.0 & (1u64 << player.0) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Members in ascending index order.
    pub fn members(self) -> impl Iterator<Item = PlayerId> {
        let mut mask = self.0;
        std::iter::from_fn(move || {
            if mask == 0 {
                None
            } else {
                let i = mask.trailing_zeros() as usize;
                mask &= mask - 1;
                Some(PlayerId(i))
            }
        })
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.members().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// An ordering of all `n` players.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<PlayerId>,
}

impl Permutation {
    /// Validates that `order` is a bijection on `{0, .., n-1}`.
    pub fn new(order: Vec<PlayerId>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for p in &order {
            if p.0 >= n || seen[p.0] {
                return Err(Error::InvalidConfig(format!(
                    "order of length {n} is not a permutation of 0..{n}"
                )));
            }
            seen[p.0] = true;
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> &[PlayerId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// One data point: a feature vector and a scalar label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: f64,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: f64) -> Self {
        Self { features, label }
    }

    /// A one-dimensional sample `(x, y)`.
    pub fn scalar(x: f64, y: f64) -> Self {
        Self {
            features: vec![x],
            label: y,
        }
    }

    /// A sample carrying only a label, for games whose utility reads values
    /// rather than fitted models.
    pub fn label_only(y: f64) -> Self {
        Self {
            features: Vec::new(),
            label: y,
        }
    }
}

/// The frozen per-player sample sets used within one game. Immutable after
/// construction, so it can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct GameData {
    per_player: Vec<Vec<Sample>>,
}

impl GameData {
    /// One entry per player, in player-index order. Entries may be empty.
    pub fn new(per_player: Vec<Vec<Sample>>) -> Self {
        Self { per_player }
    }

    pub fn n_players(&self) -> usize {
        self.per_player.len()
    }

    pub fn samples(&self, player: PlayerId) -> &[Sample] {
        &self.per_player[player.0]
    }

    pub fn total_samples(&self) -> usize {
        self.per_player.iter().map(Vec::len).sum()
    }

    /// Samples of a coalition in canonical aggregation order: ascending
    /// player index, then sample order within the player. Utilities must
    /// depend only on the coalition as a set, so every evaluation of the
    /// same coalition sees the same sequence.
    pub fn coalition_samples(&self, coalition: Coalition) -> impl Iterator<Item = &Sample> {
        coalition
            .members()
            .flat_map(move |p| self.per_player[p.0].iter())
    }
}

/// Coalition utility `v(S | data)`: deterministic given the coalition and the
/// frozen game data, with `v(empty) = 0` by convention.
pub trait UtilityFunction: Sync {
    fn evaluate(&self, coalition: Coalition, data: &GameData) -> Result<f64>;

    /// Sum over `perms` of the marginal-contribution vectors. The default
    /// walks each permutation through [`marginal_contributions_along`];
    /// implementations may override with an incrementally prepared walk that
    /// computes the same quantities faster. Overrides must agree with the
    /// default up to floating-point summation order.
    fn marginal_sums(&self, perms: &[Permutation], data: &GameData) -> Result<Vec<f64>> {
        let n = data.n_players();
        let mut acc = vec![0.0; n];
        for (t, perm) in perms.iter().enumerate() {
            let deltas =
                marginal_contributions_along(perm, self, data).map_err(|e| e.in_iteration(t))?;
            for (a, d) in acc.iter_mut().zip(&deltas) {
                *a += d;
            }
        }
        Ok(acc)
    }
}

/// A player-owned sampling source: each call draws fresh samples from the
/// player's distribution. Finite sources (dataset partitions) may return
/// fewer than `n` samples.
pub trait PlayerSampler: Sync {
    fn draw(&self, n: usize, rng: &mut StreamRng) -> Vec<Sample>;
}

/// Shapley values indexed by player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyVector {
    pub values: Vec<f64>,
}

impl ShapleyVector {
    pub fn get(&self, player: PlayerId) -> f64 {
        self.values[player.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total distributed value; equals `v(N) - v(empty)` for exact
    /// computation (efficiency).
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Draws a uniformly random permutation of `n` players via Fisher-Yates on
/// the provided stream. Identical stream state gives identical output.
pub fn sample_permutation(rng: &mut StreamRng, n: usize) -> Permutation {
    let order = rng::random_permutation(rng, n)
        .into_iter()
        .map(PlayerId)
        .collect();
    Permutation { order }
}

/// Marginal contribution of every player along one permutation:
/// `delta_i = v(P_i ∪ {i}) - v(P_i)` where `P_i` is the prefix before `i`.
///
/// Walks the prefix incrementally, reusing the previous value, for exactly
/// `n + 1` utility evaluations (the empty coalition plus one per step).
pub fn marginal_contributions_along<U: UtilityFunction + ?Sized>(
    perm: &Permutation,
    utility: &U,
    data: &GameData,
) -> Result<Vec<f64>> {
    let n = data.n_players();
    if perm.len() != n {
        return Err(Error::InvalidConfig(format!(
            "permutation of length {} does not match {} players",
            perm.len(),
            n
        )));
    }
    let mut deltas = vec![0.0; n];
    let mut coalition = Coalition::empty();
    let mut previous = utility
        .evaluate(coalition, data)
        .map_err(|e| e.in_coalition(coalition))?;
    for &p in perm.order() {
        coalition = coalition.with(p);
        let current = utility
            .evaluate(coalition, data)
            .map_err(|e| e.in_coalition(coalition))?;
        deltas[p.0] = current - previous;
        previous = current;
    }
    Ok(deltas)
}

/// Default cap on exact computation; beyond it the `2^n` coalition table and
/// `n!` permutation enumeration are refused.
pub const DEFAULT_EXACT_CAP: usize = 12;

fn check_exact_size(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyInput("player set"));
    }
    if n > cap {
        return Err(Error::PlayerCountExceedsCap { n, cap });
    }
    Ok(())
}

/// Evaluates the utility on every coalition of `n` players, indexed by mask.
fn utility_table<U: UtilityFunction + ?Sized>(utility: &U, data: &GameData) -> Result<Vec<f64>> {
    let n = data.n_players();
    let mut table = Vec::with_capacity(1 << n);
    for mask in 0..(1u64 << n) {
        let coalition = Coalition::from_mask(mask);
        let v = utility
            .evaluate(coalition, data)
            .map_err(|e| e.in_coalition(coalition))?;
        table.push(v);
    }
    Ok(table)
}

/// `|S|! (n - |S| - 1)! / n!` computed as `1 / (n * C(n-1, |S|))`. Both
/// factors are exact integers for `n <= 12`, so the single division is
/// accurate to one ulp.
fn coalition_weight(n: usize, coalition_size: usize) -> f64 {
    1.0 / (n as f64 * binomial(n - 1, coalition_size) as f64)
}

fn binomial(n: usize, k: usize) -> u64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut acc = 1u64;
    for j in 0..k {
        acc = acc * (n - j) as u64 / (j + 1) as u64;
    }
    acc
}

/// Exact Shapley values via the coalition-weighted sum over all subsets.
pub fn exact_shapley<U: UtilityFunction + ?Sized>(
    utility: &U,
    data: &GameData,
) -> Result<ShapleyVector> {
    exact_shapley_with_cap(utility, data, DEFAULT_EXACT_CAP)
}

pub fn exact_shapley_with_cap<U: UtilityFunction + ?Sized>(
    utility: &U,
    data: &GameData,
    cap: usize,
) -> Result<ShapleyVector> {
    let n = data.n_players();
    check_exact_size(n, cap)?;
    let table = utility_table(utility, data)?;
    let weights: Vec<f64> = (0..n).map(|s| coalition_weight(n, s)).collect();
    let mut values = vec![0.0; n];
    for mask in 0..(1u64 << n) {
        let size = mask.count_ones() as usize;
        for i in 0..n {
            let bit = 1u64 << i;
            if mask & bit == 0 {
                values[i] +=
                    weights[size] * (table[(mask | bit) as usize] - table[mask as usize]);
            }
        }
    }
    Ok(ShapleyVector { values })
}

/// Exact Shapley values via full enumeration of all `n!` permutations,
/// averaging the marginal contribution of each player. Kept as a second,
/// independent route to the same quantity as [`exact_shapley`].
pub fn exact_shapley_by_permutations<U: UtilityFunction + ?Sized>(
    utility: &U,
    data: &GameData,
) -> Result<ShapleyVector> {
    exact_shapley_by_permutations_with_cap(utility, data, DEFAULT_EXACT_CAP)
}

pub fn exact_shapley_by_permutations_with_cap<U: UtilityFunction + ?Sized>(
    utility: &U,
    data: &GameData,
    cap: usize,
) -> Result<ShapleyVector> {
    use itertools::Itertools;

    let n = data.n_players();
    check_exact_size(n, cap)?;
    let table = utility_table(utility, data)?;
    let mut values = vec![0.0; n];
    let mut count = 0u64;
    for perm in (0..n).permutations(n) {
        let mut mask = 0u64;
        let mut previous = table[0];
        for &i in &perm {
            mask |= 1u64 << i;
            let current = table[mask as usize];
            values[i] += current - previous;
            previous = current;
        }
        count += 1;
    }
    for v in &mut values {
        *v /= count as f64;
    }
    Ok(ShapleyVector { values })
}

/// Monte Carlo Shapley estimate: the average marginal-contribution vector
/// over `k` permutations sampled uniformly from the provided stream.
/// Unbiased for [`exact_shapley`].
pub fn mc_shapley<U: UtilityFunction + ?Sized>(
    utility: &U,
    data: &GameData,
    k: usize,
    rng: &mut StreamRng,
) -> Result<ShapleyVector> {
    let n = data.n_players();
    if n == 0 {
        return Err(Error::EmptyInput("player set"));
    }
    if k == 0 {
        return Err(Error::InvalidConfig(
            "mc_shapley requires at least one permutation".into(),
        ));
    }
    let mut values = vec![0.0; n];
    for _ in 0..k {
        let perm = sample_permutation(rng, n);
        let deltas = marginal_contributions_along(&perm, utility, data)?;
        for (v, d) in values.iter_mut().zip(&deltas) {
            *v += d;
        }
    }
    for v in &mut values {
        *v /= k as f64;
    }
    Ok(ShapleyVector { values })
}
