use super::{value_iteration, SolverError};
use crate::envs::FiniteMDP;
use crate::shaping::{base_reward, potential_at, TerminalPotential};
use crate::task::TaskSpec;

/// Outcome of solving one model under the sparse reward and under its
/// discounted potential-shaped counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub states: usize,
    /// First state whose greedy action sets differ.
    pub first_difference: Option<usize>,
    /// `max |Q'(s, a) - (Q(s, a) - Ψ(s))|` over all state-action pairs.
    pub max_value_gap: f64,
    pub sweeps: (usize, usize),
}

impl InvarianceReport {
    pub fn passes(&self, value_tolerance: f64) -> bool {
        self.first_difference.is_none() && self.max_value_gap <= value_tolerance
    }
}

/// Solves `mdp` under `R` and `R + γΨ(s') - Ψ(s)`, with `Ψ = 0` at absorbing
/// states, and compares the two optimal Q tables.
pub fn check_invariance(
    mdp: &FiniteMDP,
    task: &TaskSpec,
    gamma: f64,
    epsilon: f64,
) -> Result<InvarianceReport, SolverError> {
    let values = mdp.bind(task)?;
    let psi: Vec<f64> = (0..mdp.n_states)
        .map(|s| potential_at(task, &values[s], mdp.terminal[s], TerminalPotential::Zero))
        .collect();
    let base = |_: usize, _: usize, t: usize| base_reward(task, &values[t]);
    let plain = value_iteration(mdp, base, gamma, epsilon)?;
    let shaped = value_iteration(
        mdp,
        |s, a, t| base(s, a, t) + gamma * psi[t] - psi[s],
        gamma,
        epsilon,
    )?;
    let mut gap: f64 = 0.0;
    for (s, (q, q_shaped)) in plain.policy.q.iter().zip(&shaped.policy.q).enumerate() {
        for (a, b) in q.iter().zip(q_shaped) {
            gap = gap.max((b - (a - psi[s])).abs());
        }
    }
    Ok(InvarianceReport {
        states: mdp.n_states,
        first_difference: plain.policy.first_difference(&shaped.policy),
        max_value_gap: gap,
        sweeps: (plain.sweeps(), shaped.sweeps()),
    })
}
