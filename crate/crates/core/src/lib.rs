//! Optimal measurement scheduling for noisy finite-state Markov chains.
//!
//! A decision maker watches a Markov chain through a noisy channel but pays
//! for every look. At each decision epoch it either announces that the chain
//! has entered its target state (stopping) or picks one of `L` sampling
//! intervals and waits that long before the next measurement. The belief
//! state (posterior distribution over the chain state) is a sufficient
//! statistic, so the problem is a partially observed Markov decision process
//! on the probability simplex.
//!
//! The crate provides:
//!
//! - [`models`]: belief states, transition/observation models, the Bayesian
//!   filter and predictor, phase-type change-time laws, and the stochastic
//!   order predicates (MLR, first-order dominance, TP2, transition-matrix
//!   and Blackwell orderings) that drive every structural result.
//! - [`costs`]: per-action expected-cost vectors for generic and
//!   quickest-detection objectives, plus the two cost transformations that
//!   make myopic bounding arguments go through.
//! - [`solver`]: belief-simplex grids and value iteration for Bellman's
//!   equation, with threshold extraction and stopping-set analysis.
//! - [`bounds`]: structural-assumption checking, myopic lower/upper bound
//!   policies, and randomized probes of the filter-dominance properties.
//! - [`analysis`]: model comparison under the dominance orderings and
//!   mismatched-model sensitivity bounds (total-variation and KL forms).
//! - [`sim`]: Monte-Carlo simulation of the sampling protocol with
//!   reproducible per-episode RNG streams.
//! - [`cli`]: scenario configs, command implementations, and JSON/CSV
//!   artifact export for the `lookout` binary.
//!
//! States, observations, and grid points are 0-indexed throughout; action
//! `0` always means "stop/announce" and actions `1..=L` select the sampling
//! intervals in increasing order.

pub mod analysis;
pub mod bounds;
pub mod cli;
pub mod costs;
pub mod models;
pub mod sim;
pub mod solver;
