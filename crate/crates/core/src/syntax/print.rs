use std::collections::BTreeMap;
use std::fmt::Write;

use super::ast::{Definition, Rule, Schema, Update};
use crate::kernel::{
    canonical_theory, canonicalize, name, Apply, Denial, Literal, Name, Subst, Term,
};

/// Canonical one-line form of a denial.
pub fn print_denial(d: &Denial) -> String {
    canonicalize(d).to_string()
}

/// One canonical denial per line; the empty theory prints as `true.`.
pub fn print_theory(t: &[Denial]) -> String {
    print_listing(&canonical_theory(t))
}

/// One denial per line in the given order and naming; `true.` when empty.
pub fn print_listing(t: &[Denial]) -> String {
    if t.is_empty() {
        return "true.\n".to_string();
    }
    let mut out = String::new();
    for d in t {
        writeln!(out, "{d}").unwrap();
    }
    out
}

fn conj(lits: &[Literal]) -> String {
    if lits.is_empty() {
        return "true".into();
    }
    lits.iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Variables renamed `V1..` by first occurrence, head first.
pub fn canonical_rule(r: &Rule) -> Rule {
    let mut map: BTreeMap<Name, Name> = BTreeMap::new();
    let terms = r
        .head
        .args
        .iter()
        .chain(r.body.iter().flat_map(|l| &l.atom.args));
    for t in terms {
        if let Term::Var(v) = t {
            if !map.contains_key(v) {
                let k = map.len() + 1;
                map.insert(v.clone(), name(&format!("V{k}")));
            }
        }
    }
    let s = Subst::from_pairs(map.into_iter().map(|(k, v)| (k, Term::Var(v))));
    // a renaming onto V-names may chain (V1 -> V2 -> ...), so apply once
    // through fresh intermediates
    let tmp: Vec<(Name, Term)> = s
        .iter()
        .map(|(k, _)| (k.clone(), Term::Var(name(&format!("#{k}")))))
        .collect();
    let back: Vec<(Name, Term)> = s
        .iter()
        .map(|(k, v)| (name(&format!("#{k}")), v.clone()))
        .collect();
    let (s1, s2) = (Subst::from_pairs(tmp), Subst::from_pairs(back));
    Rule {
        head: r.head.apply(&s1).apply(&s2),
        body: r.body.apply(&s1).apply(&s2),
    }
}

pub fn print_rule(r: &Rule) -> String {
    let r = canonical_rule(r);
    format!("{} :- {}.", r.head, conj(&r.body))
}

/// The canonical variant of a schema: the value `print_schema` denotes.
pub fn canonical_schema(s: &Schema) -> Schema {
    Schema {
        rules: s.rules.iter().map(canonical_rule).collect(),
        constraints: canonical_theory(&s.constraints),
        hypotheses: canonical_theory(&s.hypotheses),
    }
}

pub fn print_schema(s: &Schema) -> String {
    let mut out = String::new();
    for r in &s.rules {
        writeln!(out, "{}", print_rule(r)).unwrap();
    }
    for h in canonical_theory(&s.hypotheses) {
        writeln!(out, "hyp {h}").unwrap();
    }
    for d in canonical_theory(&s.constraints) {
        writeln!(out, "{d}").unwrap();
    }
    out
}

pub fn print_definition(d: &Definition) -> String {
    let head: Vec<String> = d.head_vars.iter().map(|v| v.to_string()).collect();
    let body = if d.disjuncts.is_empty() {
        "false".to_string()
    } else {
        d.disjuncts
            .iter()
            .map(|c| conj(c))
            .collect::<Vec<_>>()
            .join(" | ")
    };
    if head.is_empty() {
        format!("{} <= {body}", d.pred)
    } else {
        format!("{}({}) <= {body}", d.pred, head.join(","))
    }
}

pub fn print_update(u: &Update) -> String {
    let mut out = String::new();
    for e in &u.entries {
        writeln!(out, "update {}.", print_definition(e)).unwrap();
    }
    out
}

pub fn print_subst(s: &Subst) -> String {
    s.to_string()
}
