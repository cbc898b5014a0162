//! Exact value iteration over explicit models and tabular Q-learning.

mod invariance;
mod qlearning;
mod value_iteration;

use thiserror::Error;

use crate::envs::EnvError;
use crate::episode::EpisodeError;
use crate::shaping::ShapingError;
use crate::task::UnknownVariable;

pub use invariance::{check_invariance, InvarianceReport};
pub use qlearning::{
    evaluate_greedy, first_sustained, q_learning, summarize_curves, CurvePoint, CurveSummary,
    QLearningConfig, QLearningRun,
};
pub use value_iteration::{value_iteration, ValueIteration};

/// Actions within this distance of the best Q value count as greedy.
pub const TIE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("transition row P(.|{state}, {action}) sums to {sum}")]
    NonStochasticRow { state: usize, action: usize, sum: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("environment `{0}` has no finite state space")]
    NonDiscreteEnvironment(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Shaping(#[from] ShapingError),
    #[error(transparent)]
    Episode(#[from] EpisodeError),
    #[error(transparent)]
    UnknownVariable(#[from] UnknownVariable),
}

/// Q table with its per-state greedy action sets.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    pub q: Vec<Vec<f64>>,
    /// Actions whose Q value is within [`TIE_TOLERANCE`] of the state's best.
    pub greedy: Vec<Vec<usize>>,
}

impl TabularPolicy {
    pub fn from_q(q: Vec<Vec<f64>>) -> Self {
        let greedy = q.iter().map(|row| argmax_set(row, TIE_TOLERANCE)).collect();
        Self { q, greedy }
    }

    /// Lowest-numbered greedy action.
    pub fn action(&self, state: usize) -> usize {
        self.greedy[state][0]
    }

    /// First state whose greedy set differs from `other`'s.
    pub fn first_difference(&self, other: &TabularPolicy) -> Option<usize> {
        self.greedy
            .iter()
            .zip(&other.greedy)
            .position(|(a, b)| a != b)
    }
}

pub fn argmax_set(row: &[f64], tol: f64) -> Vec<usize> {
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..row.len()).filter(|&a| row[a] >= best - tol).collect()
}
