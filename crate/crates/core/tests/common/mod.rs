//! Random task generators and reference evaluators written independently of
//! the library's own implementations.
#![allow(dead_code)]

use rand::Rng;
use reqshape::{load_task, RequirementClass, RequirementSpec, TaskSpec};

/// A random valid task over 1 to 4 variables: 0 to 3 safety requirements,
/// one target and 0 to 4 comfort requirements, built from text so the parser
/// is exercised as well.
pub fn random_task(rng: &mut impl Rng) -> TaskSpec {
    loop {
        if let Ok(task) = load_task(&random_task_text(rng)) {
            return task;
        }
    }
}

pub fn random_task_text(rng: &mut impl Rng) -> String {
    let n_vars = rng.gen_range(1..=4);
    let mut text = String::new();
    let mut ranges = Vec::new();
    for i in 0..n_vars {
        let lo: f64 = rng.gen_range(-5.0..1.0);
        let hi = lo + rng.gen_range(0.5..6.0);
        ranges.push((lo, hi));
        text.push_str(&format!("var x{i} in [{lo}, {hi}]\n"));
    }
    let n_safety = rng.gen_range(0..=3);
    let n_comfort = rng.gen_range(0..=4);
    let target_kw = if rng.gen_bool(0.5) { "achieve" } else { "conquer" };
    let mut keywords = vec!["ensure"; n_safety];
    keywords.push(target_kw);
    keywords.extend(std::iter::repeat("encourage").take(n_comfort));
    // shuffle so the file order does not follow the tiers
    for i in (1..keywords.len()).rev() {
        keywords.swap(i, rng.gen_range(0..=i));
    }
    for (k, kw) in keywords.iter().enumerate() {
        text.push_str(&format!("{kw} \"r{k}\": {}\n", random_predicate(rng, &ranges)));
    }
    text
}

fn random_predicate(rng: &mut impl Rng, ranges: &[(f64, f64)]) -> String {
    let i = rng.gen_range(0..ranges.len());
    let j = rng.gen_range(0..ranges.len());
    let (lo, hi) = ranges[i];
    let inner = |rng: &mut dyn rand::RngCore| lo + (hi - lo) * rng.gen_range(0.1..0.9);
    let c = inner(rng);
    match rng.gen_range(0..7) {
        0 => format!("x{i} >= {c}"),
        1 => format!("x{i} <= {c}"),
        2 => format!("x{i} > {c}"),
        3 => format!("|x{i}| <= {}", c.abs().max(0.05)),
        4 => format!("x{i} - x{j} >= {}", rng.gen_range(-1.0..1.0)),
        5 => format!("min(x{i}, x{j}) >= {c}"),
        _ => format!("x{i} == {c} tol {}", (hi - lo) * rng.gen_range(0.05..0.4)),
    }
}

/// Uniform valuation inside the task's declared box.
pub fn random_state(rng: &mut impl Rng, task: &TaskSpec) -> Vec<f64> {
    task.decls()
        .iter()
        .map(|d| rng.gen_range(d.lo..=d.hi))
        .collect()
}

pub fn random_values(rng: &mut impl Rng, task: &TaskSpec, len: usize) -> Vec<Vec<f64>> {
    (0..len).map(|_| random_state(rng, task)).collect()
}

// ---- reference evaluators -------------------------------------------------

fn is_safety(c: RequirementClass) -> bool {
    c == RequirementClass::Safety
}

fn is_target(c: RequirementClass) -> bool {
    matches!(
        c,
        RequirementClass::TargetAchieve | RequirementClass::TargetConquer
    )
}

fn is_comfort(c: RequirementClass) -> bool {
    c == RequirementClass::Comfort
}

/// Precedence written directly from its definition.
pub fn oracle_precedes(a: RequirementClass, b: RequirementClass) -> bool {
    (is_safety(a) && !is_safety(b)) || (is_target(a) && is_comfort(b))
}

/// Piecewise score: indicator for safety, otherwise 1 above zero, 0 at or
/// below the lower bound and `1 - f / l` in between.
pub fn oracle_score(req: &RequirementSpec, values: &[f64]) -> f64 {
    let f = req.f.eval(values);
    if is_safety(req.class) {
        return if f >= 0.0 { 1.0 } else { 0.0 };
    }
    let l = req.bounds.lo;
    if f >= 0.0 {
        1.0
    } else if f <= l {
        0.0
    } else {
        1.0 - f / l
    }
}

/// Potential as an explicit sum of per-requirement terms, each weighted by
/// the product over its predecessors.
pub fn oracle_terms(task: &TaskSpec, scores: &[f64]) -> Vec<f64> {
    let reqs = task.requirements();
    (0..reqs.len())
        .map(|i| {
            let mut w = 1.0;
            for k in 0..reqs.len() {
                if oracle_precedes(reqs[k].class, reqs[i].class) {
                    w *= scores[k];
                }
            }
            w * scores[i]
        })
        .collect()
}

pub fn oracle_potential(task: &TaskSpec, values: &[f64]) -> f64 {
    let scores: Vec<f64> = task
        .requirements()
        .iter()
        .map(|r| oracle_score(r, values))
        .collect();
    oracle_terms(task, &scores).iter().sum()
}

/// Quantifier semantics by nested loops over time indices.
pub fn oracle_sigma(class: RequirementClass, f: &[f64]) -> bool {
    let n = f.len();
    match class {
        RequirementClass::TargetAchieve => {
            let mut found = false;
            for i in 0..n {
                if f[i] >= 0.0 {
                    found = true;
                }
            }
            found
        }
        RequirementClass::TargetConquer => {
            let mut exists = false;
            for i in 0..n {
                let mut all = true;
                for j in i..n {
                    if f[j] < 0.0 {
                        all = false;
                    }
                }
                if all {
                    exists = true;
                }
            }
            exists
        }
        RequirementClass::Safety => {
            let mut all = true;
            for i in 0..n {
                if f[i] < 0.0 {
                    all = false;
                }
            }
            all
        }
        RequirementClass::Comfort => true,
    }
}

pub fn oracle_signal(req: &RequirementSpec, values: &[Vec<f64>]) -> Vec<f64> {
    values.iter().map(|v| req.f.eval(v)).collect()
}

/// `F` recomputed from the nested-loop semantics.
pub fn oracle_pam(task: &TaskSpec, values: &[Vec<f64>]) -> f64 {
    let reqs = task.requirements();
    let holds = |pred: fn(RequirementClass) -> bool| {
        reqs.iter()
            .filter(|r| pred(r.class))
            .all(|r| oracle_sigma(r.class, &oracle_signal(r, values)))
    };
    let comfort: Vec<&RequirementSpec> = reqs.iter().filter(|r| is_comfort(r.class)).collect();
    let comfort_avg = if comfort.is_empty() {
        1.0
    } else {
        let mut total = 0.0;
        for r in &comfort {
            let sig = oracle_signal(r, values);
            let mut hits = 0;
            for f in &sig {
                if *f >= 0.0 {
                    hits += 1;
                }
            }
            total += hits as f64 / sig.len() as f64;
        }
        total / comfort.len() as f64
    };
    let s = if holds(is_safety) { 1.0 } else { 0.0 };
    let t = if holds(is_target) { 1.0 } else { 0.0 };
    s + t / 2.0 + comfort_avg / 4.0
}
