//! Recorded episodes and their JSON-lines file format.
//!
//! One object per step:
//!
//! ```text
//! {"t": 0, "state": {"v": 0.0, "d_walls": 1.2}, "done": false}
//! {"t": 1, "state": {"v": 2.1, "d_walls": 0.4}, "action": {"steer": 0.05}, "done": false}
//! {"t": 2, "state": {"v": 2.3, "d_walls": -0.1}, "action": {"steer": 0.2}, "done": true, "why": "safety"}
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spec_lang::VarDecl;
use crate::task::{bind_decls, TaskSpec, UnknownVariable};

/// Named real-valued observation of one state.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateSample(pub BTreeMap<String, f64>);

impl StateSample {
    pub fn from_pairs<K: Into<String>>(pairs: impl IntoIterator<Item = (K, f64)>) -> Self {
        Self(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        self.0.insert(name.into(), value);
    }
}

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    SafetyViolation,
    GoalAchieved,
    Timeout,
    Running,
}

impl Termination {
    pub fn is_terminal(self) -> bool {
        self != Termination::Running
    }

    /// Value of the `why` field of the final trace record.
    pub fn why(self) -> Option<&'static str> {
        match self {
            Termination::SafetyViolation => Some("safety"),
            Termination::GoalAchieved => Some("goal"),
            Termination::Timeout => Some("timeout"),
            Termination::Running => None,
        }
    }

    pub fn from_why(why: &str) -> Option<Self> {
        Some(match why {
            "safety" => Termination::SafetyViolation,
            "goal" => Termination::GoalAchieved,
            "timeout" => Termination::Timeout,
            _ => return None,
        })
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.why().unwrap_or("running"))
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace has no states")]
    EmptyTrace,
    #[error("trace has {states} states but horizon {horizon} allows at most {}", .horizon + 1)]
    TooLong { states: usize, horizon: usize },
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("step {step}: {source}")]
    UnknownVariable {
        step: usize,
        #[source]
        source: UnknownVariable,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A finite episode `s0, a1, s1, ...` with at most `horizon + 1` states.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    states: Vec<StateSample>,
    /// `actions[i]` led into `states[i]`; `actions[0]` is always `None`.
    actions: Vec<Option<StateSample>>,
    horizon: usize,
    termination: Termination,
}

#[derive(Serialize, Deserialize)]
struct Record {
    t: usize,
    state: StateSample,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    action: Option<StateSample>,
    #[serde(default)]
    done: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    why: Option<String>,
}

impl Trace {
    pub fn new(
        states: Vec<StateSample>,
        actions: Vec<Option<StateSample>>,
        horizon: usize,
        termination: Termination,
    ) -> Result<Self, TraceError> {
        if states.is_empty() {
            return Err(TraceError::EmptyTrace);
        }
        if horizon == 0 {
            return Err(TraceError::ZeroHorizon);
        }
        if states.len() > horizon + 1 {
            return Err(TraceError::TooLong {
                states: states.len(),
                horizon,
            });
        }
        let mut actions = actions;
        actions.resize(states.len(), None);
        Ok(Self {
            states,
            actions,
            horizon,
            termination,
        })
    }

    /// Trace of bare states, horizon `len - 1` (at least 1), still running.
    pub fn from_states(states: Vec<StateSample>) -> Result<Self, TraceError> {
        let horizon = states.len().saturating_sub(1).max(1);
        Self::new(states, Vec::new(), horizon, Termination::Running)
    }

    pub fn states(&self) -> &[StateSample] {
        &self.states
    }

    pub fn actions(&self) -> &[Option<StateSample>] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// Reads a JSON-lines trace. `horizon` defaults to the number of
    /// transitions in the file (at least 1).
    pub fn read_jsonl(reader: impl BufRead, horizon: Option<usize>) -> Result<Self, TraceError> {
        let mut states = Vec::new();
        let mut actions = Vec::new();
        let mut termination = Termination::Running;
        let mut last_t: Option<usize> = None;
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fmt_err = |message: String| TraceError::Format {
                line: line_no,
                message,
            };
            if termination.is_terminal() {
                return Err(fmt_err("record after the final `done: true` record".into()));
            }
            let rec: Record = serde_json::from_str(&line).map_err(|e| fmt_err(e.to_string()))?;
            if let Some(prev) = last_t {
                if rec.t <= prev {
                    return Err(fmt_err(format!("`t` must increase, got {} after {prev}", rec.t)));
                }
            }
            last_t = Some(rec.t);
            if rec.done {
                let why = rec
                    .why
                    .as_deref()
                    .ok_or_else(|| fmt_err("final record needs a `why` field".into()))?;
                termination = Termination::from_why(why).ok_or_else(|| {
                    fmt_err(format!(
                        "unknown `why` value \"{why}\" (expected safety, goal or timeout)"
                    ))
                })?;
            }
            states.push(rec.state);
            actions.push(if states.len() == 1 { None } else { rec.action });
        }
        let horizon = horizon.unwrap_or_else(|| states.len().saturating_sub(1).max(1));
        Self::new(states, actions, horizon, termination)
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        let n = self.states.len();
        for (t, (state, action)) in self.states.iter().zip(&self.actions).enumerate() {
            let last = t + 1 == n;
            let done = last && self.termination.is_terminal();
            let rec = Record {
                t,
                state: state.clone(),
                action: action.clone(),
                done,
                why: if done {
                    self.termination.why().map(str::to_string)
                } else {
                    None
                },
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Binds every state against `decls`, clamping values into their ranges.
    pub fn bind(&self, decls: &[VarDecl]) -> Result<BoundTrace, TraceError> {
        let mut clamped = 0;
        let mut values = Vec::with_capacity(self.states.len());
        for (step, s) in self.states.iter().enumerate() {
            let (v, c) =
                bind_decls(decls, s).map_err(|source| TraceError::UnknownVariable { step, source })?;
            clamped += c;
            values.push(v);
        }
        Ok(BoundTrace {
            values,
            clamped,
            horizon: self.horizon,
            termination: self.termination,
        })
    }

    pub fn bind_task(&self, task: &TaskSpec) -> Result<BoundTrace, TraceError> {
        self.bind(task.decls())
    }
}

/// A trace resolved against a task's declarations: one dense valuation per
/// state. Never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTrace {
    values: Vec<Vec<f64>>,
    clamped: usize,
    horizon: usize,
    termination: Termination,
}

impl BoundTrace {
    pub fn from_values(
        values: Vec<Vec<f64>>,
        termination: Termination,
    ) -> Result<Self, TraceError> {
        if values.is_empty() {
            return Err(TraceError::EmptyTrace);
        }
        let horizon = values.len().saturating_sub(1).max(1);
        Ok(Self {
            values,
            clamped: 0,
            horizon,
            termination,
        })
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of state values clamped into their declared range.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let text = r#"{"t": 0, "state": {"v": 0.0, "d": 1.0}, "done": false}
{"t": 1, "state": {"v": 2.1, "d": 0.4}, "action": {"steer": 0.05}, "done": false}
{"t": 2, "state": {"v": 2.3, "d": -0.1}, "action": {"steer": 0.2}, "done": true, "why": "safety"}
"#;
        let tr = Trace::read_jsonl(text.as_bytes(), None).unwrap();
        assert_eq!(tr.len(), 3);
        assert_eq!(tr.horizon(), 2);
        assert_eq!(tr.termination(), Termination::SafetyViolation);
        assert_eq!(tr.actions()[1].as_ref().unwrap().get("steer"), Some(0.05));
        let mut out = Vec::new();
        tr.write_jsonl(&mut out).unwrap();
        let again = Trace::read_jsonl(out.as_slice(), None).unwrap();
        assert_eq!(tr, again);
    }

    #[test]
    fn rejects_malformed_files() {
        let bad = [
            "",
            "{\"t\": 0}",
            "{\"t\": 1, \"state\": {}}\n{\"t\": 1, \"state\": {}}",
            "{\"t\": 0, \"state\": {}, \"done\": true}",
            "{\"t\": 0, \"state\": {}, \"done\": true, \"why\": \"bored\"}",
            "{\"t\": 0, \"state\": {}, \"done\": true, \"why\": \"goal\"}\n{\"t\": 1, \"state\": {}}",
        ];
        for text in bad {
            assert!(Trace::read_jsonl(text.as_bytes(), None).is_err(), "{text}");
        }
        assert!(matches!(
            Trace::read_jsonl("".as_bytes(), None),
            Err(TraceError::EmptyTrace)
        ));
    }

    #[test]
    fn horizon_limits_length() {
        let s = StateSample::from_pairs([("x", 0.0)]);
        assert!(Trace::new(vec![s.clone(); 4], vec![], 3, Termination::Running).is_ok());
        assert!(matches!(
            Trace::new(vec![s; 5], vec![], 3, Termination::Running),
            Err(TraceError::TooLong { .. })
        ));
    }

    #[test]
    fn binding_clamps_and_counts() {
        let decls = vec![VarDecl::new("x", 0.0, 1.0)];
        let tr = Trace::from_states(vec![
            StateSample::from_pairs([("x", 2.0)]),
            StateSample::from_pairs([("x", 0.5)]),
            StateSample::from_pairs([("x", -3.0)]),
        ])
        .unwrap();
        let b = tr.bind(&decls).unwrap();
        assert_eq!(b.values(), &[vec![1.0], vec![0.5], vec![0.0]]);
        assert_eq!(b.clamped(), 2);
        let missing = Trace::from_states(vec![StateSample::from_pairs([("y", 0.0)])]).unwrap();
        assert!(matches!(
            missing.bind(&decls),
            Err(TraceError::UnknownVariable { step: 0, .. })
        ));
    }
}
