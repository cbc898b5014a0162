//! Canonical text form of a draft. Reparsing the output yields a draft with
//! the same structure.

use std::fmt::Write;

use super::ast::{RequirementSpec, TaskSpecDraft};

pub fn pretty_requirement(r: &RequirementSpec) -> String {
    let mut s = format!(
        "{} \"{}\": {} {} 0",
        r.class.keyword(),
        r.name,
        r.f,
        if r.strict { ">" } else { ">=" }
    );
    if r.explicit_bounds {
        let _ = write!(s, " bounds [{}, {}]", r.bounds.lo, r.bounds.hi);
    }
    s
}

pub fn pretty_print(draft: &TaskSpecDraft) -> String {
    let mut out = String::new();
    for d in &draft.decls {
        let _ = writeln!(out, "var {} in [{}, {}]", d.name, d.lo, d.hi);
    }
    for r in &draft.requirements {
        out.push_str(&pretty_requirement(r));
        out.push('\n');
    }
    out
}
