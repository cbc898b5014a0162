//! Episode termination: safety violation, goal achievement or timeout.

use thiserror::Error;

use crate::spec_lang::RequirementClass;
use crate::task::TaskSpec;
use crate::trace::Termination;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EpisodeError {
    #[error("episode already ended ({0})")]
    AlreadyTerminated(Termination),
    #[error("horizon must be positive")]
    ZeroHorizon,
}

/// Decides after every transition whether the episode goes on.
///
/// Checks run on the successor state in this order: any safety signal below
/// zero ends the episode as a violation (even if the target holds at the same
/// state); an `achieve` target ends it at the first satisfying state; at the
/// horizon a `conquer` target counts as achieved iff it holds on the final
/// state, and any other episode times out.
#[derive(Debug, Clone)]
pub struct EpisodeController<'a> {
    task: &'a TaskSpec,
    horizon: usize,
    steps: usize,
    termination: Termination,
}

impl<'a> EpisodeController<'a> {
    pub fn new(task: &'a TaskSpec, horizon: usize) -> Result<Self, EpisodeError> {
        if horizon == 0 {
            return Err(EpisodeError::ZeroHorizon);
        }
        Ok(Self {
            task,
            horizon,
            steps: 0,
            termination: Termination::Running,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// Verdict for the state reached by the next transition, as a dense
    /// valuation in declaration order.
    pub fn step_verdict(&mut self, next: &[f64]) -> Result<Termination, EpisodeError> {
        if self.termination.is_terminal() {
            return Err(EpisodeError::AlreadyTerminated(self.termination));
        }
        self.steps += 1;
        let target = self.task.target();
        let at_horizon = self.steps >= self.horizon;
        self.termination = if self.task.safety().any(|r| r.signal(next) < 0.0) {
            Termination::SafetyViolation
        } else {
            let target_holds = target.signal(next) >= 0.0;
            match target.class {
                RequirementClass::TargetAchieve if target_holds => Termination::GoalAchieved,
                RequirementClass::TargetConquer if at_horizon && target_holds => {
                    Termination::GoalAchieved
                }
                _ if at_horizon => Termination::Timeout,
                _ => Termination::Running,
            }
        };
        Ok(self.termination)
    }
}
