//! Per-requirement scores, the hierarchical potential and the rewards built on
//! it, plus the baseline reward formulations used for comparison.
//!
//! All evaluators take dense valuations ordered like the task declarations
//! (see [`TaskSpec::bind`]).

use thiserror::Error;

use crate::semantics::{task_robustness_on, ComfortRobustness, Combination};
use crate::spec_lang::{RequirementSpec, Tier};
use crate::task::TaskSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShapingError {
    #[error("MORL weights: {0}")]
    WeightDimensionMismatch(String),
    #[error("window must hold at least one state")]
    EmptyWindow,
}

/// Indicator score `b`: 1 iff `f(s) >= 0`.
pub fn score_b(req: &RequirementSpec, values: &[f64]) -> f64 {
    if req.signal(values) >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Continuous score `c = 1 - min(0, f) / l` with `f` clamped to `[l, u]`:
/// 1 when satisfied, 0 at the worst violation, linear in between.
pub fn score_c(req: &RequirementSpec, values: &[f64]) -> f64 {
    let f = req.bounds.clamp(req.signal(values));
    1.0 - f.min(0.0) / req.bounds.lo
}

/// `b` for safety requirements, `c` for everything else.
pub fn score(req: &RequirementSpec, values: &[f64]) -> f64 {
    match req.tier() {
        Tier::Safety => score_b(req, values),
        Tier::Target | Tier::Comfort => score_c(req, values),
    }
}

/// Scores of every requirement at one state, in task order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub names: Vec<String>,
    pub scores: Vec<f64>,
}

impl ScoreVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.scores[i])
    }
}

pub fn scores(task: &TaskSpec, values: &[f64]) -> ScoreVector {
    let reqs = task.requirements();
    ScoreVector {
        names: reqs.iter().map(|r| r.name.clone()).collect(),
        scores: reqs.iter().map(|r| score(r, values)).collect(),
    }
}

/// Hierarchical potential from precomputed scores in task order:
/// every requirement's score weighted by the product of the scores of the
/// requirements preceding it.
///
/// With safety product `P_S` and target score `r_T` this factors into
/// `Σ_S r_s + P_S r_T + P_S r_T Σ_C r_c`.
pub fn potential_from_scores(task: &TaskSpec, scores: &[f64]) -> f64 {
    let mut safety_sum = 0.0;
    let mut safety_prod = 1.0;
    let mut comfort_sum = 0.0;
    let mut target = 0.0;
    for (r, &s) in task.requirements().iter().zip(scores) {
        match r.tier() {
            Tier::Safety => {
                safety_sum += s;
                safety_prod *= s;
            }
            Tier::Target => target = s,
            Tier::Comfort => comfort_sum += s,
        }
    }
    let gated_target = safety_prod * target;
    safety_sum + gated_target + gated_target * comfort_sum
}

/// Ψ(s), in `[0, |Φ|]`.
pub fn potential(task: &TaskSpec, values: &[f64]) -> f64 {
    let s: Vec<f64> = task.requirements().iter().map(|r| score(r, values)).collect();
    potential_from_scores(task, &s)
}

/// Sparse reward: 1 iff the target predicate holds at the successor state.
pub fn base_reward(task: &TaskSpec, next: &[f64]) -> f64 {
    score_b(task.target(), next)
}

/// Potential assigned to terminal (absorbing) states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TerminalPotential {
    /// Ψ is 0 at terminal states.
    #[default]
    Zero,
    /// Ψ evaluated on the terminal state like any other.
    Free,
}

/// One shaped transition: `shaped = base + potential_after - potential_before`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapingStep {
    pub base: f64,
    pub potential_before: f64,
    pub potential_after: f64,
    pub shaped: f64,
}

pub fn potential_at(
    task: &TaskSpec,
    values: &[f64],
    terminal: bool,
    convention: TerminalPotential,
) -> f64 {
    if terminal && convention == TerminalPotential::Zero {
        0.0
    } else {
        potential(task, values)
    }
}

/// `R'(s, a, s') = R(s, a, s') + Ψ(s') - Ψ(s)`. `next_terminal` marks `s'` as
/// absorbing, whose potential follows `convention`.
pub fn shaped_reward(
    task: &TaskSpec,
    prev: &[f64],
    next: &[f64],
    next_terminal: bool,
    convention: TerminalPotential,
) -> ShapingStep {
    let base = base_reward(task, next);
    let potential_before = potential(task, prev);
    let potential_after = potential_at(task, next, next_terminal, convention);
    ShapingStep {
        base,
        potential_before,
        potential_after,
        shaped: base + potential_after - potential_before,
    }
}

/// Discounted form `R + γ Ψ(s') - Ψ(s)` used against discounted solvers.
pub fn discounted_shaped_reward(
    task: &TaskSpec,
    prev: &[f64],
    next: &[f64],
    next_terminal: bool,
    convention: TerminalPotential,
    gamma: f64,
) -> f64 {
    base_reward(task, next) + gamma * potential_at(task, next, next_terminal, convention)
        - potential(task, prev)
}

/// Linear-scalarization weights.
#[derive(Debug, Clone, PartialEq)]
pub enum MorlWeights {
    Uniform,
    /// Class weights proportional to `(safety, target, comfort)`, split evenly
    /// inside each class; absent classes drop out before normalizing.
    Decreasing { safety: f64, target: f64, comfort: f64 },
    /// One weight per requirement in task order.
    Explicit(Vec<f64>),
}

impl MorlWeights {
    pub fn decreasing() -> Self {
        MorlWeights::Decreasing {
            safety: 4.0,
            target: 2.0,
            comfort: 1.0,
        }
    }

    /// Resolves to one weight per requirement, validated to be non-negative
    /// and to sum to 1.
    pub fn resolve(&self, task: &TaskSpec) -> Result<Vec<f64>, ShapingError> {
        let n = task.len();
        let weights = match self {
            MorlWeights::Uniform => vec![1.0 / n as f64; n],
            MorlWeights::Decreasing {
                safety,
                target,
                comfort,
            } => {
                let class_weight = |t: Tier| match t {
                    Tier::Safety => *safety,
                    Tier::Target => *target,
                    Tier::Comfort => *comfort,
                };
                let counts = |t: Tier| task.requirements().iter().filter(|r| r.tier() == t).count();
                let total: f64 = [Tier::Safety, Tier::Target, Tier::Comfort]
                    .into_iter()
                    .filter(|&t| counts(t) > 0)
                    .map(class_weight)
                    .sum();
                if !(total > 0.0) {
                    return Err(ShapingError::WeightDimensionMismatch(
                        "class weights must have a positive sum".into(),
                    ));
                }
                task.requirements()
                    .iter()
                    .map(|r| class_weight(r.tier()) / total / counts(r.tier()) as f64)
                    .collect()
            }
            MorlWeights::Explicit(w) => {
                if w.len() != n {
                    return Err(ShapingError::WeightDimensionMismatch(format!(
                        "{} weights for {n} requirements",
                        w.len()
                    )));
                }
                w.clone()
            }
        };
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(ShapingError::WeightDimensionMismatch(
                "weights must be non-negative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ShapingError::WeightDimensionMismatch(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(weights)
    }
}

/// `Σ_φ w_φ r(φ, s')`.
pub fn morl_reward(
    task: &TaskSpec,
    next: &[f64],
    weights: &MorlWeights,
) -> Result<f64, ShapingError> {
    let w = weights.resolve(task)?;
    Ok(task
        .requirements()
        .iter()
        .zip(&w)
        .map(|(r, w)| w * score(r, next))
        .sum())
}

/// Robustness of the task (min-conjunction) on a window of recent states.
pub fn bhnr_reward(
    task: &TaskSpec,
    window: &[Vec<f64>],
    comfort: ComfortRobustness,
) -> Result<f64, ShapingError> {
    task_robustness_on(task, window, comfort, Combination::Min).map_err(|_| ShapingError::EmptyWindow)
}

/// BHNR value at every step `t`, over states `max(0, t+1-H) ..= t`.
pub fn bhnr_series(
    task: &TaskSpec,
    values: &[Vec<f64>],
    window: usize,
    comfort: ComfortRobustness,
) -> Result<Vec<f64>, ShapingError> {
    if window == 0 {
        return Err(ShapingError::EmptyWindow);
    }
    (0..values.len())
        .map(|t| bhnr_reward(task, &values[(t + 1).saturating_sub(window)..=t], comfort))
        .collect()
}

/// Reward formulations selectable for training and benchmarking.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardVariant {
    /// Hierarchical potential shaping on top of the sparse reward.
    /// `discount: Some(γ)` uses `γΨ(s') - Ψ(s)`, `None` uses `Ψ(s') - Ψ(s)`.
    Hprs {
        terminal: TerminalPotential,
        discount: Option<f64>,
    },
    Sparse,
    Morl(MorlWeights),
    /// Episode robustness, paid once on the last step.
    Tltl {
        comfort: ComfortRobustness,
        combine: Combination,
    },
    /// Robustness over a sliding window of the last `window` states.
    Bhnr {
        window: usize,
        comfort: ComfortRobustness,
    },
}

impl RewardVariant {
    /// Shaping as written, `Ψ(s') - Ψ(s)`, with the terminal state evaluated
    /// like any other state.
    pub fn hprs() -> Self {
        RewardVariant::Hprs {
            terminal: TerminalPotential::Free,
            discount: None,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "hprs" => Self::hprs(),
            "sparse" => RewardVariant::Sparse,
            "morl-unif" => RewardVariant::Morl(MorlWeights::Uniform),
            "morl-decr" => RewardVariant::Morl(MorlWeights::decreasing()),
            "tltl" => RewardVariant::Tltl {
                comfort: ComfortRobustness::Min,
                combine: Combination::Min,
            },
            "bhnr" => RewardVariant::Bhnr {
                window: 10,
                comfort: ComfortRobustness::Min,
            },
            _ => return None,
        })
    }

    pub fn names() -> &'static [&'static str] {
        &["hprs", "sparse", "morl-unif", "morl-decr", "tltl", "bhnr"]
    }

    pub fn session<'a>(&self, task: &'a TaskSpec) -> Result<RewardSession<'a>, ShapingError> {
        let kind = match self {
            RewardVariant::Morl(w) => SessionKind::Morl(w.resolve(task)?),
            RewardVariant::Bhnr { window: 0, .. } => return Err(ShapingError::EmptyWindow),
            other => SessionKind::Plain(other.clone()),
        };
        Ok(RewardSession {
            task,
            kind,
            history: Vec::new(),
            prev_potential: 0.0,
        })
    }
}

#[derive(Debug, Clone)]
enum SessionKind {
    Plain(RewardVariant),
    Morl(Vec<f64>),
}

/// Streaming reward over one episode. Holds the previous state, so one session
/// belongs to one episode at a time.
#[derive(Debug, Clone)]
pub struct RewardSession<'a> {
    task: &'a TaskSpec,
    kind: SessionKind,
    history: Vec<Vec<f64>>,
    prev_potential: f64,
}

impl RewardSession<'_> {
    pub fn reset(&mut self, initial: &[f64]) {
        self.history.clear();
        self.history.push(initial.to_vec());
        self.prev_potential = potential(self.task, initial);
    }

    /// Reward for the transition into `next`. `terminal` marks an absorbing
    /// state; `last` marks the final step of the episode for any reason.
    pub fn step(&mut self, next: &[f64], terminal: bool, last: bool) -> f64 {
        let task = self.task;
        let reward = match &self.kind {
            SessionKind::Morl(w) => task
                .requirements()
                .iter()
                .zip(w)
                .map(|(r, w)| w * score(r, next))
                .sum(),
            SessionKind::Plain(variant) => match variant {
                RewardVariant::Sparse => base_reward(task, next),
                RewardVariant::Hprs { terminal: conv, discount } => {
                    let after = potential_at(task, next, terminal, *conv);
                    let r = base_reward(task, next) + discount.unwrap_or(1.0) * after
                        - self.prev_potential;
                    self.prev_potential = after;
                    r
                }
                RewardVariant::Tltl { comfort, combine } => {
                    self.history.push(next.to_vec());
                    return if last {
                        task_robustness_on(task, &self.history, *comfort, *combine)
                            .expect("history is non-empty")
                    } else {
                        0.0
                    };
                }
                RewardVariant::Bhnr { window, comfort } => {
                    self.history.push(next.to_vec());
                    let start = self.history.len().saturating_sub(*window);
                    return bhnr_reward(task, &self.history[start..], *comfort)
                        .expect("window is non-empty");
                }
                RewardVariant::Morl(_) => unreachable!("resolved at session creation"),
            },
        };
        reward
    }
}
