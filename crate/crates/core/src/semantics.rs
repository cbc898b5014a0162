//! Boolean satisfaction, time-averaged satisfaction and infinity-norm
//! robustness of requirements over finite traces.
//!
//! The slice-level functions work on the signal values `f(s_0), ..., f(s_n)`
//! of one requirement; the trace-level wrappers compute those values first.

use thiserror::Error;

use crate::spec_lang::{RequirementClass, RequirementSpec, Tier};
use crate::task::TaskSpec;
use crate::trace::BoundTrace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("requirement \"{0}\" is not a comfort requirement")]
    NotComfort(String),
    #[error("empty trace")]
    EmptyTrace,
}

/// How `encourage` requirements are scored by [`robustness`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComfortRobustness {
    /// Worst step, like `ensure`.
    #[default]
    Min,
    /// Average signal over the trace.
    Mean,
}

/// How per-requirement robustness values combine into one task value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combination {
    /// Conjunction: the minimum over requirements.
    #[default]
    Min,
    /// Arithmetic mean over requirements. Not sign-consistent with `sigma_task`.
    Mean,
}

/// Satisfaction of a requirement class on its signal values.
///
/// `conquer` asks for a suffix on which the signal stays non-negative; on a
/// finite prefix the suffix ends at the last sample.
pub fn holds(class: RequirementClass, signal: &[f64]) -> bool {
    match class {
        RequirementClass::TargetAchieve => signal.iter().any(|&f| f >= 0.0),
        RequirementClass::TargetConquer => {
            // scan from the end for the longest satisfied suffix
            signal.iter().rev().take_while(|&&f| f >= 0.0).count() > 0
        }
        RequirementClass::Safety => signal.iter().all(|&f| f >= 0.0),
        RequirementClass::Comfort => true,
    }
}

/// Infinity-norm robustness on signal values. `None` for an empty slice.
pub fn robustness_of(
    class: RequirementClass,
    signal: &[f64],
    comfort: ComfortRobustness,
) -> Option<f64> {
    if signal.is_empty() {
        return None;
    }
    let min = || signal.iter().copied().fold(f64::INFINITY, f64::min);
    Some(match class {
        RequirementClass::TargetAchieve => signal.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        RequirementClass::TargetConquer => {
            // max over suffix starts of the suffix minimum
            let mut suffix_min = f64::INFINITY;
            let mut best = f64::NEG_INFINITY;
            for &f in signal.iter().rev() {
                suffix_min = suffix_min.min(f);
                best = best.max(suffix_min);
            }
            best
        }
        RequirementClass::Safety => min(),
        RequirementClass::Comfort => match comfort {
            ComfortRobustness::Min => min(),
            ComfortRobustness::Mean => signal.iter().sum::<f64>() / signal.len() as f64,
        },
    })
}

/// Fraction of samples with a non-negative signal. `None` for an empty slice.
pub fn average_satisfaction(signal: &[f64]) -> Option<f64> {
    if signal.is_empty() {
        return None;
    }
    let hits = signal.iter().filter(|&&f| f >= 0.0).count();
    Some(hits as f64 / signal.len() as f64)
}

/// `f(s_i)` for every state of the trace.
pub fn signal(req: &RequirementSpec, trace: &BoundTrace) -> Vec<f64> {
    trace.values().iter().map(|v| req.signal(v)).collect()
}

pub fn sigma(req: &RequirementSpec, trace: &BoundTrace) -> bool {
    holds(req.class, &signal(req, trace))
}

/// Conjunction over all requirements of the task.
pub fn sigma_task(task: &TaskSpec, trace: &BoundTrace) -> bool {
    task.requirements().iter().all(|r| sigma(r, trace))
}

/// Conjunction over one tier; an empty tier is satisfied.
pub fn sigma_tier(task: &TaskSpec, tier: Tier, trace: &BoundTrace) -> bool {
    task.requirements()
        .iter()
        .filter(|r| r.tier() == tier)
        .all(|r| sigma(r, trace))
}

pub fn sigma_avg(req: &RequirementSpec, trace: &BoundTrace) -> Result<f64, SemanticsError> {
    if req.class != RequirementClass::Comfort {
        return Err(SemanticsError::NotComfort(req.name.clone()));
    }
    average_satisfaction(&signal(req, trace)).ok_or(SemanticsError::EmptyTrace)
}

/// Mean of [`sigma_avg`] over the comfort requirements. A task without comfort
/// requirements scores 1.
pub fn sigma_avg_comfort(task: &TaskSpec, trace: &BoundTrace) -> f64 {
    let n = task.comfort_count();
    if n == 0 {
        return 1.0;
    }
    task.comfort()
        .map(|r| sigma_avg(r, trace).expect("comfort requirement on non-empty trace"))
        .sum::<f64>()
        / n as f64
}

pub fn robustness(req: &RequirementSpec, trace: &BoundTrace, comfort: ComfortRobustness) -> f64 {
    robustness_of(req.class, &signal(req, trace), comfort).expect("bound traces are non-empty")
}

/// Robustness of the whole task read as one formula over a window of valuations.
pub fn task_robustness_on(
    task: &TaskSpec,
    window: &[Vec<f64>],
    comfort: ComfortRobustness,
    combine: Combination,
) -> Result<f64, SemanticsError> {
    if window.is_empty() {
        return Err(SemanticsError::EmptyTrace);
    }
    let per_req = task.requirements().iter().map(|r| {
        let sig: Vec<f64> = window.iter().map(|v| r.signal(v)).collect();
        robustness_of(r.class, &sig, comfort).expect("non-empty window")
    });
    Ok(match combine {
        Combination::Min => per_req.fold(f64::INFINITY, f64::min),
        Combination::Mean => per_req.sum::<f64>() / task.len() as f64,
    })
}

pub fn task_robustness(
    task: &TaskSpec,
    trace: &BoundTrace,
    comfort: ComfortRobustness,
    combine: Combination,
) -> f64 {
    task_robustness_on(task, trace.values(), comfort, combine).expect("bound traces are non-empty")
}
