use super::{SolverError, TabularPolicy};
use crate::envs::FiniteMDP;

const ROW_TOLERANCE: f64 = 1e-9;
const MAX_SWEEPS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueIteration {
    pub policy: TabularPolicy,
    /// Sup-norm change of Q after each sweep.
    pub residuals: Vec<f64>,
}

impl ValueIteration {
    pub fn sweeps(&self) -> usize {
        self.residuals.len()
    }
}

/// Synchronous value iteration on Q for `reward(s, a, s')` and discount
/// `gamma`, stopping once a sweep changes Q by at most `epsilon`. Terminal
/// states are absorbing with value 0.
pub fn value_iteration(
    mdp: &FiniteMDP,
    reward: impl Fn(usize, usize, usize) -> f64,
    gamma: f64,
    epsilon: f64,
) -> Result<ValueIteration, SolverError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(SolverError::InvalidParameter(format!(
            "discount {gamma} outside (0, 1)"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(SolverError::InvalidParameter(format!(
            "tolerance {epsilon} must be positive"
        )));
    }
    let (n, m) = (mdp.n_states, mdp.n_actions);
    for s in 0..n {
        for a in 0..m {
            let row = &mdp.transitions[s][a];
            let sum: f64 = row.iter().map(|(_, p)| p).sum();
            let bad_entry = row.iter().any(|&(t, p)| t >= n || !(0.0..=1.0).contains(&p));
            if bad_entry || (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(SolverError::NonStochasticRow {
                    state: s,
                    action: a,
                    sum,
                });
            }
        }
    }
    let expected_reward: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            (0..m)
                .map(|a| {
                    mdp.transitions[s][a]
                        .iter()
                        .map(|&(t, p)| p * reward(s, a, t))
                        .sum()
                })
                .collect()
        })
        .collect();

    let mut q = vec![vec![0.0; m]; n];
    let mut v = vec![0.0; n];
    let mut residuals = Vec::new();
    for _ in 0..MAX_SWEEPS {
        let mut residual: f64 = 0.0;
        let mut next = q.clone();
        for s in 0..n {
            if mdp.terminal[s] {
                continue;
            }
            for a in 0..m {
                let backup: f64 = mdp.transitions[s][a].iter().map(|&(t, p)| p * v[t]).sum();
                let value = expected_reward[s][a] + gamma * backup;
                residual = residual.max((value - q[s][a]).abs());
                next[s][a] = value;
            }
        }
        q = next;
        for s in 0..n {
            v[s] = if mdp.terminal[s] {
                0.0
            } else {
                q[s].iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
        }
        residuals.push(residual);
        if residual <= epsilon {
            break;
        }
    }
    Ok(ValueIteration {
        policy: TabularPolicy::from_q(q),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::StateSample;

    /// s0 -> s1 (absorbing goal) with reward 1 on entering the goal.
    fn chain() -> FiniteMDP {
        FiniteMDP {
            n_states: 2,
            n_actions: 1,
            transitions: vec![vec![vec![(1, 1.0)]], vec![vec![(1, 1.0)]]],
            initial: vec![1.0, 0.0],
            horizon: 1,
            features: vec![StateSample::default(); 2],
            terminal: vec![false, true],
        }
    }

    #[test]
    fn two_state_chain_by_hand() {
        let vi = value_iteration(&chain(), |_, _, t| if t == 1 { 1.0 } else { 0.0 }, 0.5, 1e-12)
            .unwrap();
        assert_eq!(vi.policy.q[0][0], 1.0);
        assert_eq!(vi.policy.q[1][0], 0.0);
    }

    #[test]
    fn deterministic_output() {
        let r = |s: usize, _: usize, t: usize| (s + 2 * t) as f64 * 0.1;
        let a = value_iteration(&chain(), r, 0.9, 1e-10).unwrap();
        let b = value_iteration(&chain(), r, 0.9, 1e-10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_rows_and_parameters() {
        let mut bad = chain();
        bad.transitions[0][0] = vec![(1, 0.7)];
        assert!(matches!(
            value_iteration(&bad, |_, _, _| 0.0, 0.9, 1e-6),
            Err(SolverError::NonStochasticRow { state: 0, action: 0, .. })
        ));
        assert!(value_iteration(&chain(), |_, _, _| 0.0, 1.0, 1e-6).is_err());
        assert!(value_iteration(&chain(), |_, _, _| 0.0, 0.9, 0.0).is_err());
    }
}
