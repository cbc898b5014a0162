//! Policy-assessment metric and success-rate aggregation.

use std::fmt;

use thiserror::Error;

use crate::semantics::{sigma_avg_comfort, sigma_tier};
use crate::spec_lang::Tier;
use crate::task::TaskSpec;
use crate::trace::BoundTrace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssessmentError {
    #[error("no reports to aggregate")]
    EmptyInput,
}

/// Threshold on F for safety satisfaction.
pub const SAFE_THRESHOLD: f64 = 1.0;
/// Threshold on F for satisfaction of the whole task.
pub const TASK_THRESHOLD: f64 = 1.5;
/// Largest possible F.
pub const MAX_F: f64 = 1.75;
/// Default `comfort_avg` cutoff for counting an episode as comfortable.
pub const DEFAULT_COMFORT_CUTOFF: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Unsafe,
    SafeOnly,
    TaskSatisfied,
}

impl Category {
    pub fn from_f(f: f64) -> Self {
        if f >= TASK_THRESHOLD {
            Category::TaskSatisfied
        } else if f >= SAFE_THRESHOLD {
            Category::SafeOnly
        } else {
            Category::Unsafe
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Unsafe => "unsafe",
            Category::SafeOnly => "safe-only",
            Category::TaskSatisfied => "task-satisfied",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssessmentReport {
    pub f: f64,
    pub sat_safety: bool,
    pub sat_target: bool,
    pub comfort_avg: f64,
    pub category: Category,
}

/// `F = σ_S + σ_T / 2 + comfort_avg / 4`.
pub fn pam_value(sat_safety: bool, sat_target: bool, comfort_avg: f64) -> f64 {
    let b = |x: bool| if x { 1.0 } else { 0.0 };
    b(sat_safety) + 0.5 * b(sat_target) + 0.25 * comfort_avg
}

pub fn pam(task: &TaskSpec, trace: &BoundTrace) -> AssessmentReport {
    let sat_safety = sigma_tier(task, Tier::Safety, trace);
    let sat_target = sigma_tier(task, Tier::Target, trace);
    let comfort_avg = sigma_avg_comfort(task, trace);
    let f = pam_value(sat_safety, sat_target, comfort_avg);
    AssessmentReport {
        f,
        sat_safety,
        sat_target,
        comfort_avg,
        category: Category::from_f(f),
    }
}

/// Fractions of episodes satisfying safety, safety and target, and safety,
/// target and the comfort cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessRates {
    pub s: f64,
    pub s_t: f64,
    pub s_t_c: f64,
}

pub fn aggregate(
    reports: &[AssessmentReport],
    comfort_cutoff: f64,
) -> Result<SuccessRates, AssessmentError> {
    if reports.is_empty() {
        return Err(AssessmentError::EmptyInput);
    }
    let n = reports.len() as f64;
    let count = |pred: &dyn Fn(&AssessmentReport) -> bool| {
        reports.iter().filter(|r| pred(r)).count() as f64 / n
    };
    Ok(SuccessRates {
        s: count(&|r| r.sat_safety),
        s_t: count(&|r| r.sat_safety && r.sat_target),
        s_t_c: count(&|r| r.sat_safety && r.sat_target && r.comfort_avg >= comfort_cutoff),
    })
}
