//! Closed-form oracles for the expectation and variance of probabilistic
//! Shapley values, and the estimator-variance identities used to validate
//! the empirical estimators.
//!
//! Two game families admit closed forms. In the additive Gaussian game each
//! player carries `X_i ~ N(mu_i, sigma_i^2)` and `u(S) = sum of X_i over S`,
//! so the marginal contribution of player `i` is exactly `X_i` and
//! `E[phi_i] = mu_i`, `Var(phi_i) = sigma_i^2`. In the mixture game the
//! coalition utility is a weighted Gaussian mixture with one component per
//! player, giving `E[phi_i] = w_i mu_i` and `Var(phi_i) = w_i^2 sigma_i^2`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Coalition, GameData, PlayerId, PlayerSampler, Sample, UtilityFunction};
use crate::rng::StreamRng;

/// One player of the additive Gaussian game: `X_i ~ N(mean, std_dev^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPlayer {
    pub mean: f64,
    pub std_dev: f64,
}

/// The additive Gaussian game `u(S) = sum of X_i over S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveGaussianGameSpec {
    pub players: Vec<GaussianPlayer>,
}

impl AdditiveGaussianGameSpec {
    pub fn new(players: Vec<GaussianPlayer>) -> Result<Self> {
        if players.is_empty() {
            return Err(Error::EmptyInput("player list"));
        }
        for p in &players {
            if !p.mean.is_finite() || !p.std_dev.is_finite() || p.std_dev < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "invalid Gaussian player (mean {}, std_dev {})",
                    p.mean, p.std_dev
                )));
            }
        }
        Ok(Self { players })
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }
}

/// One component of the mixture game, tied to one player.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub std_dev: f64,
}

/// Gaussian-mixture coalition utility with one component per player; the
/// components of a coalition's members are the ones active for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureGameSpec {
    pub components: Vec<MixtureComponent>,
}

impl MixtureGameSpec {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyInput("component list"));
        }
        for c in &components {
            if !c.weight.is_finite() || !c.mean.is_finite() || !c.std_dev.is_finite()
                || c.std_dev < 0.0
            {
                return Err(Error::InvalidConfig(format!(
                    "invalid mixture component (weight {}, mean {}, std_dev {})",
                    c.weight, c.mean, c.std_dev
                )));
            }
        }
        Ok(Self { components })
    }
}

/// Moments of one player's Shapley distribution across `games` realizations,
/// as needed by the variance-of-sample-variance identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    /// Fourth central moment `mu_4`.
    pub fourth_central_moment: f64,
    pub games: usize,
}

impl MomentSummary {
    pub fn new(mean: f64, variance: f64, fourth_central_moment: f64, games: usize) -> Result<Self> {
        if variance < 0.0 || fourth_central_moment < 0.0 {
            return Err(Error::InvalidConfig(
                "variance and fourth central moment must be nonnegative".into(),
            ));
        }
        // Jensen: mu_4 >= sigma^4 for any distribution.
        if fourth_central_moment < variance * variance * (1.0 - 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "fourth central moment {fourth_central_moment} below variance^2 {}",
                variance * variance
            )));
        }
        if games < 2 {
            return Err(Error::InvalidConfig(
                "moment summary requires at least two games".into(),
            ));
        }
        Ok(Self {
            mean,
            variance,
            fourth_central_moment,
            games,
        })
    }

    /// Summary for a Gaussian Shapley distribution, where `mu_4 = 3 sigma^4`.
    pub fn gaussian(mean: f64, variance: f64, games: usize) -> Result<Self> {
        Self::new(mean, variance, gaussian_fourth_central_moment(variance), games)
    }
}

/// `mu_4 = 3 sigma^4` for a Gaussian.
pub fn gaussian_fourth_central_moment(variance: f64) -> f64 {
    3.0 * variance * variance
}

/// `E[phi_i] = mu_i` for the additive Gaussian game.
pub fn expected_shapley_additive(spec: &AdditiveGaussianGameSpec) -> Vec<f64> {
    spec.players.iter().map(|p| p.mean).collect()
}

/// `Var(phi_i) = sigma_i^2` for the additive Gaussian game.
pub fn variance_shapley_additive(spec: &AdditiveGaussianGameSpec) -> Vec<f64> {
    spec.players.iter().map(|p| p.std_dev * p.std_dev).collect()
}

/// `E[phi_i] = w_i mu_i` for the mixture game.
pub fn expected_shapley_mixture(spec: &MixtureGameSpec) -> Vec<f64> {
    spec.components.iter().map(|c| c.weight * c.mean).collect()
}

/// `Var(phi_i) = w_i^2 sigma_i^2` for the mixture game: every marginal gain
/// of player `i` has variance `w_i^2 sigma_i^2` and the same pairwise
/// covariance, so the coalition-weighted double sum collapses (the weights
/// sum to one).
pub fn variance_shapley_mixture(spec: &MixtureGameSpec) -> Vec<f64> {
    spec.components
        .iter()
        .map(|c| c.weight * c.weight * c.std_dev * c.std_dev)
        .collect()
}

/// Variance of the sample-mean estimator over `m` games:
/// `Var(E^[phi_i]) = Var(phi_i) / m`.
pub fn estimator_mean_variance(var_phi: f64, m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidConfig(
            "mean-estimator variance requires m >= 1".into(),
        ));
    }
    if var_phi < 0.0 {
        return Err(Error::InvalidConfig("variance must be nonnegative".into()));
    }
    Ok(var_phi / m as f64)
}

/// Variance of the unbiased sample variance over `m` realizations:
/// `(1/m) (mu_4 - ((m-3)/(m-1)) sigma^4)`. For Gaussian `phi_i` this reduces
/// to `2 sigma^4 / (m - 1)`.
pub fn variance_of_sample_variance(ms: &MomentSummary) -> Result<f64> {
    let m = ms.games;
    if m < 2 {
        return Err(Error::InvalidConfig(
            "variance of the sample variance requires m >= 2".into(),
        ));
    }
    let m_f = m as f64;
    let sigma4 = ms.variance * ms.variance;
    Ok((ms.fourth_central_moment - (m_f - 3.0) / (m_f - 1.0) * sigma4) / m_f)
}

/// General Shapley-variance evaluator: given the variance of each marginal
/// gain `u(S ∪ {i}) - u(S)` and the covariance of each pair, evaluates the
/// coalition-weighted double sum numerically. Intended for small games
/// (`n <= 12`); the closed-form game families above are its only validation
/// targets.
pub fn shapley_variance_from_marginal_moments(
    n: usize,
    player: PlayerId,
    var: &dyn Fn(Coalition) -> f64,
    cov: &dyn Fn(Coalition, Coalition) -> f64,
) -> Result<f64> {
    if n == 0 || player.index() >= n {
        return Err(Error::InvalidConfig(format!(
            "player {player} outside game of size {n}"
        )));
    }
    if n > crate::game::DEFAULT_EXACT_CAP {
        return Err(Error::PlayerCountExceedsCap {
            n,
            cap: crate::game::DEFAULT_EXACT_CAP,
        });
    }
    // Enumerate subsets of N \ {i} as masks over the other n-1 players.
    let others: Vec<usize> = (0..n).filter(|&j| j != player.index()).collect();
    let subsets: Vec<Coalition> = (0..(1u64 << others.len()))
        .map(|mask| {
            let mut c = Coalition::empty();
            for (bit, &j) in others.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    c = c.with(PlayerId(j));
                }
            }
            c
        })
        .collect();
    let weight = |s: Coalition| {
        let k = s.len();
        // |S|! (n-|S|-1)! / n!
        let mut w = 1.0f64;
        for j in 1..=k {
            w *= j as f64;
        }
        for j in 1..=(n - k - 1) {
            w *= j as f64;
        }
        for j in 1..=n {
            w /= j as f64;
        }
        w
    };
    let mut total = 0.0;
    for (a, &s) in subsets.iter().enumerate() {
        let ws = weight(s);
        total += ws * ws * var(s);
        for &t in subsets.iter().skip(a + 1) {
            total += 2.0 * ws * weight(t) * cov(s, t);
        }
    }
    Ok(total)
}

/// The additive utility `u(S) = sum over members of mean(labels)`. With one
/// sample per player this is exactly the additive game on the drawn values;
/// players with no samples contribute nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdditiveMeanUtility;

impl UtilityFunction for AdditiveMeanUtility {
    fn evaluate(&self, coalition: Coalition, data: &GameData) -> Result<f64> {
        let mut total = 0.0;
        for p in coalition.members() {
            let samples = data.samples(p);
            if !samples.is_empty() {
                total += samples.iter().map(|s| s.label).sum::<f64>() / samples.len() as f64;
            }
        }
        Ok(total)
    }
}

/// A player of the additive Gaussian game as a sampling source: each draw is
/// a label-only sample `X ~ N(mean, std_dev^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianValuePlayer {
    pub mean: f64,
    pub std_dev: f64,
}

impl PlayerSampler for GaussianValuePlayer {
    fn draw(&self, n: usize, rng: &mut StreamRng) -> Vec<Sample> {
        (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                Sample::label_only(self.mean + self.std_dev * z)
            })
            .collect()
    }
}

/// The game's players as sampling sources for the estimators.
pub fn additive_gaussian_players(spec: &AdditiveGaussianGameSpec) -> Vec<GaussianValuePlayer> {
    spec.players
        .iter()
        .map(|p| GaussianValuePlayer {
            mean: p.mean,
            std_dev: p.std_dev,
        })
        .collect()
}

/// Materializes one realization of the additive Gaussian game: draws each
/// `X_i` once and returns the additive utility with the frozen data. The
/// exact Shapley values of the realization equal the drawn `X_i`.
pub fn sample_additive_game_realization(
    spec: &AdditiveGaussianGameSpec,
    rng: &mut StreamRng,
) -> (AdditiveMeanUtility, GameData) {
    let per_player = spec
        .players
        .iter()
        .map(|p| {
            let z: f64 = rng.sample(StandardNormal);
            vec![Sample::label_only(p.mean + p.std_dev * z)]
        })
        .collect();
    (AdditiveMeanUtility, GameData::new(per_player))
}
