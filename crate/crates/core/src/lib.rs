//! Hierarchical potential-based reward shaping compiled from requirement files.
//!
//! A task is a set of `ensure` (safety), `achieve`/`conquer` (target) and
//! `encourage` (comfort) requirements written in a small line-oriented
//! language. The crate parses and validates such tasks, monitors traces
//! against them, turns them into a shaped reward, and checks the result on
//! small tabular environments.
//!
//! ```
//! use reqshape::{load_task, potential};
//!
//! let task = load_task(
//!     "var d in [-1, 4]\nvar L in [0, 1]\n\
//!      ensure \"safe\": d > 0\nachieve \"goal\": L >= 0.9",
//! )
//! .unwrap();
//! // valuations follow the declaration order: d, L
//! assert_eq!(potential(&task, &[1.0, 1.0]), 2.0);
//! assert_eq!(potential(&task, &[-0.5, 1.0]), 0.0);
//! ```

pub mod assessment;
pub mod bundled;
pub mod envs;
pub mod episode;
pub mod semantics;
pub mod shaping;
pub mod solvers;
pub mod spec_lang;
pub mod task;
pub mod trace;

pub use assessment::{aggregate, pam, AssessmentError, AssessmentReport, Category, SuccessRates};
pub use episode::{EpisodeController, EpisodeError};
pub use semantics::{
    robustness, sigma, sigma_avg, sigma_task, ComfortRobustness, Combination, SemanticsError,
};
pub use shaping::{
    base_reward, morl_reward, potential, score, score_b, score_c, shaped_reward, MorlWeights,
    RewardVariant, ShapingError, ShapingStep, TerminalPotential,
};
pub use spec_lang::{parse_spec, Diagnostic, Diagnostics, RequirementClass, RequirementSpec, Tier, VarDecl};
pub use task::{load_task, precedes, validate, LoadError, TaskError, TaskSpec};
pub use trace::{BoundTrace, StateSample, Termination, Trace, TraceError};
