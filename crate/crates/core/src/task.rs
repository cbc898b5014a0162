//! A validated task: the requirement partition and the strict precedence order
//! induced by requirement classes.

use thiserror::Error;

use crate::spec_lang::{parse_spec, Diagnostics, RequirementSpec, TaskSpecDraft, Tier, VarDecl};
use crate::trace::StateSample;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaskError {
    #[error("task has no requirements")]
    EmptyTask,
    #[error("task has no target requirement (`achieve` or `conquer`)")]
    NoTarget,
    #[error("task must have exactly one target requirement, found {}: {}", .0.len(), .0.join(", "))]
    MultipleTargets(Vec<String>),
    #[error("unknown requirement \"{0}\"")]
    UnknownRequirement(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("state does not bind variable `{0}`")]
pub struct UnknownVariable(pub String);

/// Parse or validation failure when loading a spec from text.
#[derive(Debug, Clone, Error)]
pub enum LoadError {
    #[error("{0}")]
    Parse(Diagnostics),
    #[error(transparent)]
    Task(#[from] TaskError),
}

/// A task `(Φ, ≺)`: exactly one target, any number of safety and comfort
/// requirements. Requirements keep their spec-file order.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    decls: Vec<VarDecl>,
    requirements: Vec<RequirementSpec>,
    safety: Vec<usize>,
    target: usize,
    comfort: Vec<usize>,
    warnings: Vec<String>,
}

pub fn validate(draft: TaskSpecDraft) -> Result<TaskSpec, TaskError> {
    if draft.requirements.is_empty() {
        return Err(TaskError::EmptyTask);
    }
    let mut safety = Vec::new();
    let mut targets = Vec::new();
    let mut comfort = Vec::new();
    for (i, r) in draft.requirements.iter().enumerate() {
        match r.tier() {
            Tier::Safety => safety.push(i),
            Tier::Target => targets.push(i),
            Tier::Comfort => comfort.push(i),
        }
    }
    let target = match targets.as_slice() {
        [] => return Err(TaskError::NoTarget),
        [t] => *t,
        many => {
            return Err(TaskError::MultipleTargets(
                many.iter()
                    .map(|&i| draft.requirements[i].name.clone())
                    .collect(),
            ))
        }
    };
    let mut warnings = Vec::new();
    if safety.is_empty() {
        warnings.push("task has no safety requirement".to_string());
    }
    Ok(TaskSpec {
        decls: draft.decls,
        requirements: draft.requirements,
        safety,
        target,
        comfort,
        warnings,
    })
}

/// Parses and validates a spec in one step.
pub fn load_task(text: &str) -> Result<TaskSpec, LoadError> {
    let draft = parse_spec(text).map_err(LoadError::Parse)?;
    Ok(validate(draft)?)
}

/// `a ≺ b`: safety precedes everything that is not safety, and the target
/// precedes every comfort requirement.
pub fn precedes(a: Tier, b: Tier) -> bool {
    matches!(
        (a, b),
        (Tier::Safety, Tier::Target | Tier::Comfort) | (Tier::Target, Tier::Comfort)
    )
}

impl TaskSpec {
    pub fn decls(&self) -> &[VarDecl] {
        &self.decls
    }

    /// All requirements in spec-file order.
    pub fn requirements(&self) -> &[RequirementSpec] {
        &self.requirements
    }

    pub fn len(&self) -> usize {
        self.requirements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requirements.is_empty()
    }

    pub fn safety(&self) -> impl Iterator<Item = &RequirementSpec> + '_ {
        self.safety.iter().map(|&i| &self.requirements[i])
    }

    pub fn target(&self) -> &RequirementSpec {
        &self.requirements[self.target]
    }

    pub fn comfort(&self) -> impl Iterator<Item = &RequirementSpec> + '_ {
        self.comfort.iter().map(|&i| &self.requirements[i])
    }

    pub fn safety_count(&self) -> usize {
        self.safety.len()
    }

    pub fn comfort_count(&self) -> usize {
        self.comfort.len()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn requirement(&self, name: &str) -> Result<&RequirementSpec, TaskError> {
        self.requirements
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| TaskError::UnknownRequirement(name.to_string()))
    }

    /// Requirements strictly preceding `name`, in spec-file order.
    pub fn predecessors(&self, name: &str) -> Result<Vec<&RequirementSpec>, TaskError> {
        let tier = self.requirement(name)?.tier();
        Ok(self
            .requirements
            .iter()
            .filter(|r| precedes(r.tier(), tier))
            .collect())
    }

    /// Same task with every comfort requirement dropped.
    pub fn without_comfort(&self) -> TaskSpec {
        let requirements: Vec<_> = self
            .requirements
            .iter()
            .filter(|r| r.tier() != Tier::Comfort)
            .cloned()
            .collect();
        validate(TaskSpecDraft {
            decls: self.decls.clone(),
            requirements,
            warnings: Vec::new(),
        })
        .expect("dropping comfort keeps the target")
    }

    /// Dense valuation ordered like [`Self::decls`], with each value clamped to
    /// its declared range. Returns the valuation and the number of clamped values.
    pub fn bind(&self, sample: &StateSample) -> Result<(Vec<f64>, usize), UnknownVariable> {
        bind_decls(&self.decls, sample)
    }
}

pub(crate) fn bind_decls(
    decls: &[VarDecl],
    sample: &StateSample,
) -> Result<(Vec<f64>, usize), UnknownVariable> {
    let mut clamped = 0;
    let values = decls
        .iter()
        .map(|d| {
            let v = sample
                .get(&d.name)
                .ok_or_else(|| UnknownVariable(d.name.clone()))?;
            let c = d.clamp(v);
            if c != v {
                clamped += 1;
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((values, clamped))
}
