//! Small environments that produce traces for a task: a driving gridworld with
//! an exact transition model and a continuous point mass.

mod config;
mod grid;
mod pointmass;

use rand::Rng;
use thiserror::Error;

use crate::episode::{EpisodeController, EpisodeError};
use crate::task::{TaskSpec, UnknownVariable};
use crate::trace::{BoundTrace, StateSample, Trace};

pub use config::EnvConfig;
pub use grid::{GridAction, GridDriveEnv, Heading};
pub use pointmass::{PointMassConfig, PointMassEnv};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("layout: {0}")]
    Layout(String),
    #[error("step called before reset")]
    NotReset,
    #[error(transparent)]
    UnknownVariable(#[from] UnknownVariable),
    #[error(transparent)]
    Episode(#[from] EpisodeError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Discrete(usize),
    Continuous(Vec<f64>),
}

pub trait Environment {
    fn name(&self) -> &str;

    /// Initial state; the same seed always gives the same state.
    fn reset(&mut self, seed: u64) -> StateSample;

    /// Samples a successor of the current state.
    fn step(&mut self, action: &Action) -> Result<StateSample, EnvError>;

    fn horizon(&self) -> usize;

    /// Random valid action, used for exploration and smoke runs.
    fn random_action(&self, rng: &mut dyn rand::RngCore) -> Action;

    fn as_discrete(&mut self) -> Option<&mut dyn DiscreteEnvironment> {
        None
    }
}

/// An environment over finitely many indexed states and actions.
pub trait DiscreteEnvironment: Environment {
    fn n_states(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn reset_index(&mut self, seed: u64) -> usize;
    fn step_index(&mut self, action: usize) -> Result<usize, EnvError>;
    fn features(&self, state: usize) -> StateSample;
    /// Absorbing states where every episode ends.
    fn is_terminal(&self, state: usize) -> bool;
    fn transition_matrix(&self) -> FiniteMDP;
}

/// Explicit tabular model. `transitions[s][a]` lists `(successor, probability)`
/// pairs with distinct successors.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMDP {
    pub n_states: usize,
    pub n_actions: usize,
    pub transitions: Vec<Vec<Vec<(usize, f64)>>>,
    pub initial: Vec<f64>,
    pub horizon: usize,
    pub features: Vec<StateSample>,
    /// Absorbing states where episodes end.
    pub terminal: Vec<bool>,
}

impl FiniteMDP {
    /// Dense probability row `P(· | s, a)`.
    pub fn row(&self, s: usize, a: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.n_states];
        for &(t, p) in &self.transitions[s][a] {
            row[t] += p;
        }
        row
    }

    /// Binds every state's features against the task declarations.
    pub fn bind(&self, task: &TaskSpec) -> Result<Vec<Vec<f64>>, UnknownVariable> {
        self.features
            .iter()
            .map(|f| task.bind(f).map(|(v, _)| v))
            .collect()
    }
}

/// Parses an environment configuration: `grid` layouts need a `layout:`
/// section, the point mass takes only key-value settings.
pub fn from_config(kind: &str, text: &str) -> Result<Box<dyn Environment>, EnvError> {
    let cfg = EnvConfig::parse(text)?;
    match kind {
        "grid" => Ok(Box::new(GridDriveEnv::from_config(&cfg)?)),
        "pointmass" => Ok(Box::new(PointMassEnv::new(PointMassConfig::from_config(&cfg)?))),
        other => Err(EnvError::Config {
            line: 0,
            message: format!("unknown environment kind `{other}` (expected grid or pointmass)"),
        }),
    }
}

/// One finished episode: the raw trace and its binding against the task.
#[derive(Debug, Clone)]
pub struct Episode {
    pub trace: Trace,
    pub bound: BoundTrace,
}

/// Runs one episode under `policy` until the controller ends it.
pub fn run_episode(
    env: &mut dyn Environment,
    task: &TaskSpec,
    seed: u64,
    mut policy: impl FnMut(&StateSample, usize) -> Action,
) -> Result<Episode, EnvError> {
    let horizon = env.horizon();
    let mut controller = EpisodeController::new(task, horizon)?;
    let mut state = env.reset(seed);
    task.bind(&state)?;
    let mut states = vec![state.clone()];
    let mut actions = vec![None];
    let mut t = 0;
    while !controller.termination().is_terminal() {
        let action = policy(&state, t);
        state = env.step(&action)?;
        let v = task.bind(&state)?.0;
        controller
            .step_verdict(&v)
            .expect("loop stops at termination");
        actions.push(Some(action_sample(&action)));
        states.push(state.clone());
        t += 1;
    }
    let termination = controller.termination();
    let trace = Trace::new(states, actions, horizon, termination)
        .expect("controller keeps episodes within the horizon");
    let bound = trace
        .bind_task(task)
        .expect("every state was bound during the episode");
    Ok(Episode { trace, bound })
}

/// Episode under uniformly random actions.
pub fn random_episode(
    env: &mut dyn Environment,
    task: &TaskSpec,
    seed: u64,
    rng: &mut impl Rng,
) -> Result<Episode, EnvError> {
    let mut actions = Vec::new();
    for _ in 0..env.horizon() {
        actions.push(env.random_action(rng));
    }
    run_episode(env, task, seed, |_, t| actions[t].clone())
}

fn action_sample(action: &Action) -> StateSample {
    match action {
        Action::Discrete(a) => StateSample::from_pairs([("action", *a as f64)]),
        Action::Continuous(v) => {
            StateSample::from_pairs(v.iter().enumerate().map(|(i, x)| (format!("u{i}"), *x)))
        }
    }
}
