//! Shapley values under stochastic data sampling.
//!
//! In the classical data-valuation setting every player contributes a fixed
//! dataset and the Shapley value of a player is a single number. Here each
//! player owns a *sampling distribution*: every game draws fresh data, so the
//! Shapley value becomes a random variable. This crate estimates both its
//! expectation (average contribution) and its variance (contribution
//! stability), and ships the closed-form oracles needed to validate the
//! estimators.
//!
//! The pieces:
//!
//! * [`game`] - coalitions, permutations, exact and Monte Carlo Shapley
//!   computation for one frozen data realization.
//! * [`analytic`] - closed-form expectation/variance for additive Gaussian
//!   and Gaussian-mixture games, plus the estimator-variance identities.
//! * [`utilities`] - the two coalition utilities: 1-NN regression and
//!   least-squares regression, both scored as `1 / (1 + MSE)`.
//! * [`datasets`] - synthetic curve players and the white-wine table with
//!   its alcohol-decile partition.
//! * [`estimators`] - the baseline, pooled, and stratified pooled Monte
//!   Carlo estimators with sampling-cost accounting.
//! * [`metrics`] - cross-replication reliability metrics.
//! * [`report`] - CSV/JSON serialization of run results and sweep tables.
//!
//! All randomness flows through [`rng::StreamKey`], which derives an
//! independent ChaCha stream per (seed, purpose, replication, game) work
//! unit, so results are bit-identical regardless of thread count.

pub mod analytic;
pub mod datasets;
pub mod error;
pub mod estimators;
pub mod game;
pub mod metrics;
pub mod report;
pub mod rng;
pub(crate) mod stats;
pub mod utilities;

pub use error::{Error, Result};
pub use game::{
    exact_shapley, exact_shapley_by_permutations, marginal_contributions_along, mc_shapley,
    sample_permutation, Coalition, GameData, Permutation, PlayerId, PlayerSampler, Sample,
    ShapleyVector, UtilityFunction,
};
pub use rng::{StreamKey, StreamPurpose, StreamRng};
