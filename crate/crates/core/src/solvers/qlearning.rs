use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SolverError, TabularPolicy};
use crate::assessment::{pam, AssessmentReport};
use crate::envs::{DiscreteEnvironment, Environment};
use crate::episode::EpisodeController;
use crate::shaping::RewardVariant;
use crate::spec_lang::RequirementClass;
use crate::task::TaskSpec;
use crate::trace::{BoundTrace, Termination};

#[derive(Debug, Clone, PartialEq)]
pub struct QLearningConfig {
    pub episodes: usize,
    pub alpha: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Episodes over which exploration decays linearly; defaults to all.
    pub epsilon_decay_episodes: Option<usize>,
    pub gamma: f64,
    /// Greedy evaluation every this many training episodes.
    pub eval_interval: usize,
    pub eval_episodes: usize,
    pub seed: u64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self {
            episodes: 1000,
            alpha: 0.1,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_episodes: None,
            gamma: 0.99,
            eval_interval: 25,
            eval_episodes: 5,
            seed: 0,
        }
    }
}

impl QLearningConfig {
    fn validate(&self) -> Result<(), SolverError> {
        let bad = |what: &str| Err(SolverError::InvalidParameter(what.to_string()));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("learning rate must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_end) {
            return bad("exploration rates must lie in [0, 1]");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("discount must lie in (0, 1]");
        }
        if self.eval_interval == 0 || self.eval_episodes == 0 {
            return bad("evaluation interval and episode count must be positive");
        }
        Ok(())
    }

    fn epsilon(&self, episode: usize) -> f64 {
        let span = self.epsilon_decay_episodes.unwrap_or(self.episodes).max(1);
        let frac = (episode as f64 / span as f64).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

/// Mean PAM of the greedy policy after `episode` training episodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub episode: usize,
    pub f: f64,
    pub comfort_avg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QLearningRun {
    pub policy: TabularPolicy,
    pub curve: Vec<CurvePoint>,
}

struct Bound {
    reward: Vec<Vec<f64>>,
    assess: Vec<Vec<f64>>,
}

fn bind_states(
    env: &dyn DiscreteEnvironment,
    reward_task: &TaskSpec,
    assess_task: &TaskSpec,
) -> Result<Bound, SolverError> {
    let mut reward = Vec::with_capacity(env.n_states());
    let mut assess = Vec::with_capacity(env.n_states());
    for s in 0..env.n_states() {
        let f = env.features(s);
        reward.push(reward_task.bind(&f)?.0);
        assess.push(assess_task.bind(&f)?.0);
    }
    Ok(Bound { reward, assess })
}

/// Whether a verdict ends the task for good, so no value is bootstrapped
/// from the successor. Timeouts and a `conquer` target decided at the horizon
/// only cut the episode short.
fn ends_task(task: &TaskSpec, verdict: Termination) -> bool {
    match verdict {
        Termination::SafetyViolation => true,
        Termination::GoalAchieved => task.target().class == RequirementClass::TargetAchieve,
        Termination::Timeout | Termination::Running => false,
    }
}

/// Tabular Q-learning with ε-greedy exploration.
///
/// The reward comes from `reward` evaluated against `reward_task`; episode
/// termination and the learning curve use `assess_task`. Both tasks must bind
/// the environment's features. The run is fully determined by `config.seed`.
pub fn q_learning(
    env: &mut dyn Environment,
    reward_task: &TaskSpec,
    assess_task: &TaskSpec,
    reward: &RewardVariant,
    config: &QLearningConfig,
) -> Result<QLearningRun, SolverError> {
    config.validate()?;
    let name = env.name().to_string();
    let env = env
        .as_discrete()
        .ok_or(SolverError::NonDiscreteEnvironment(name))?;
    let bound = bind_states(env, reward_task, assess_task)?;
    let (n, m) = (env.n_states(), env.n_actions());
    let horizon = env.horizon();
    let mut session = reward.session(reward_task)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut q = vec![vec![0.0; m]; n];
    let mut curve = Vec::new();

    for episode in 0..config.episodes {
        let epsilon = config.epsilon(episode);
        let mut s = env.reset_index(rng.gen());
        session.reset(&bound.reward[s]);
        let mut controller = EpisodeController::new(assess_task, horizon)?;
        loop {
            let a = if rng.gen::<f64>() < epsilon {
                rng.gen_range(0..m)
            } else {
                let greedy = super::argmax_set(&q[s], super::TIE_TOLERANCE);
                greedy[rng.gen_range(0..greedy.len())]
            };
            let next = env.step_index(a)?;
            let verdict = controller.step_verdict(&bound.assess[next])?;
            let absorbing = ends_task(assess_task, verdict) || env.is_terminal(next);
            let r = session.step(&bound.reward[next], absorbing, verdict.is_terminal());
            let bootstrap = if absorbing {
                0.0
            } else {
                q[next].iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            q[s][a] += config.alpha * (r + config.gamma * bootstrap - q[s][a]);
            s = next;
            if verdict.is_terminal() {
                break;
            }
        }
        let done = episode + 1;
        if done % config.eval_interval == 0 || done == config.episodes {
            let policy = TabularPolicy::from_q(q.clone());
            let eval_seed = config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ done as u64;
            let reports = greedy_reports(env, &policy, assess_task, &bound.assess, config.eval_episodes, eval_seed)?;
            let k = reports.len() as f64;
            curve.push(CurvePoint {
                episode: done,
                f: reports.iter().map(|r| r.f).sum::<f64>() / k,
                comfort_avg: reports.iter().map(|r| r.comfort_avg).sum::<f64>() / k,
            });
        }
    }
    Ok(QLearningRun {
        policy: TabularPolicy::from_q(q),
        curve,
    })
}

fn greedy_reports(
    env: &mut dyn DiscreteEnvironment,
    policy: &TabularPolicy,
    task: &TaskSpec,
    values: &[Vec<f64>],
    episodes: usize,
    seed: u64,
) -> Result<Vec<AssessmentReport>, SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = env.horizon();
    let mut reports = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut s = env.reset_index(rng.gen());
        let mut visited = vec![values[s].clone()];
        let mut controller = EpisodeController::new(task, horizon)?;
        loop {
            s = env.step_index(policy.action(s))?;
            visited.push(values[s].clone());
            if controller.step_verdict(&values[s])?.is_terminal() {
                break;
            }
        }
        let trace = BoundTrace::from_values(visited, controller.termination())
            .expect("episode has states");
        reports.push(pam(task, &trace));
    }
    Ok(reports)
}

/// PAM reports of `episodes` greedy rollouts of `policy`.
pub fn evaluate_greedy(
    env: &mut dyn Environment,
    policy: &TabularPolicy,
    task: &TaskSpec,
    episodes: usize,
    seed: u64,
) -> Result<Vec<AssessmentReport>, SolverError> {
    let name = env.name().to_string();
    let env = env
        .as_discrete()
        .ok_or(SolverError::NonDiscreteEnvironment(name))?;
    if policy.q.len() != env.n_states() {
        return Err(SolverError::InvalidParameter(format!(
            "policy covers {} states, environment has {}",
            policy.q.len(),
            env.n_states()
        )));
    }
    let values = bind_states(env, task, task)?.assess;
    greedy_reports(env, policy, task, &values, episodes, seed)
}

/// Mean and population standard deviation of F across runs, per evaluation
/// point. Curves must share their evaluation episodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSummary {
    pub episode: usize,
    pub f_mean: f64,
    pub f_std: f64,
}

pub fn summarize_curves(curves: &[Vec<CurvePoint>]) -> Vec<CurveSummary> {
    let Some(first) = curves.first() else {
        return Vec::new();
    };
    (0..first.len())
        .map(|i| {
            let fs: Vec<f64> = curves.iter().map(|c| c[i].f).collect();
            let k = fs.len() as f64;
            let mean = fs.iter().sum::<f64>() / k;
            let var = fs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / k;
            CurveSummary {
                episode: first[i].episode,
                f_mean: mean,
                f_std: var.sqrt(),
            }
        })
        .collect()
}

/// Episode count at the start of the first run of `run` consecutive
/// evaluations with F at or above `threshold`.
pub fn first_sustained(curve: &[CurvePoint], threshold: f64, run: usize) -> Option<usize> {
    if run == 0 {
        return curve.first().map(|p| p.episode);
    }
    curve
        .windows(run)
        .find(|w| w.iter().all(|p| p.f >= threshold))
        .map(|w| w[0].episode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::envs::{GridDriveEnv, PointMassConfig, PointMassEnv};
    use crate::task::load_task;

    #[test]
    fn zero_episodes_is_a_no_op() {
        let task = load_task(bundled::GRIDDRIVE).unwrap();
        let mut env = GridDriveEnv::parse(bundled::GRID_CORNER).unwrap();
        let cfg = QLearningConfig {
            episodes: 0,
            ..Default::default()
        };
        let run = q_learning(&mut env, &task, &task, &RewardVariant::hprs(), &cfg).unwrap();
        assert!(run.curve.is_empty());
        assert!(run.policy.q.iter().flatten().all(|&v| v == 0.0));
        assert!(run.policy.greedy.iter().all(|g| g.len() == 5));
    }

    #[test]
    fn same_seed_same_curve() {
        let task = load_task(bundled::GRIDDRIVE).unwrap();
        let cfg = QLearningConfig {
            episodes: 60,
            eval_interval: 20,
            seed: 11,
            ..Default::default()
        };
        let run = || {
            let mut env = GridDriveEnv::parse(bundled::GRID_CORNER).unwrap();
            q_learning(&mut env, &task, &task, &RewardVariant::hprs(), &cfg).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.curve.len(), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn continuous_env_rejected() {
        let task = load_task(bundled::POINTMASS).unwrap();
        let mut env = PointMassEnv::new(PointMassConfig::default());
        let err = q_learning(
            &mut env,
            &task,
            &task,
            &RewardVariant::Sparse,
            &QLearningConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::NonDiscreteEnvironment(_)));
    }

    #[test]
    fn sustained_detection() {
        let pts = |fs: &[f64]| {
            fs.iter()
                .enumerate()
                .map(|(i, &f)| CurvePoint {
                    episode: (i + 1) * 10,
                    f,
                    comfort_avg: 0.0,
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(first_sustained(&pts(&[1.6, 0.5, 1.5, 1.7, 1.6, 1.0]), 1.5, 3), Some(30));
        assert_eq!(first_sustained(&pts(&[1.6, 1.6, 0.5]), 1.5, 3), None);
    }
}
