//! Range restriction for rules, update formulas and extended denials.
//!
//! A variable is bound when it occurs in a positive database literal of
//! its own scope, or when a positive equality pins it to a constant, a
//! parameter, an outer variable or an already bound variable.

use std::collections::BTreeSet;

use super::ast::{Definition, Rule};
use crate::kernel::{Denial, GenLit, Literal, Name, Term};

fn pinned_closure<'a>(
    lits: impl Iterator<Item = &'a Literal> + Clone,
    outer: &BTreeSet<Name>,
) -> BTreeSet<Name> {
    let mut bound: BTreeSet<Name> = BTreeSet::new();
    for l in lits.clone() {
        if l.positive && l.is_database() {
            l.vars(&mut bound);
        }
    }
    let fixed = |t: &Term, bound: &BTreeSet<Name>| match t {
        Term::Var(v) => bound.contains(v) || outer.contains(v),
        _ => true,
    };
    loop {
        let mut changed = false;
        for l in lits.clone().filter(|l| l.positive && l.is_builtin()) {
            let (a, b) = (&l.atom.args[0], &l.atom.args[1]);
            for (x, y) in [(a, b), (b, a)] {
                if let Term::Var(v) = x {
                    if !bound.contains(v) && !outer.contains(v) && fixed(y, &bound) {
                        bound.insert(v.clone());
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return bound;
        }
    }
}

fn check_scope(body: &[GenLit], local: &BTreeSet<Name>, outer: &BTreeSet<Name>) -> Option<Name> {
    let bound = pinned_closure(body.iter().filter_map(GenLit::as_lit), outer);
    if let Some(v) = local.iter().find(|v| !bound.contains(*v)) {
        return Some(v.clone());
    }
    let visible: BTreeSet<Name> = outer.union(local).cloned().collect();
    for n in body.iter().filter_map(GenLit::as_nee) {
        let quantified: BTreeSet<Name> = n.vars.iter().cloned().collect();
        let inner_outer: BTreeSet<Name> = visible.difference(&quantified).cloned().collect();
        if let Some(v) = check_scope(&n.body, &quantified, &inner_outer) {
            return Some(v);
        }
    }
    None
}

/// First variable of `d` that violates safety, if any.
pub fn unsafe_denial_var(d: &Denial) -> Option<Name> {
    check_scope(&d.body, &d.level0_vars(), &BTreeSet::new())
}

pub fn is_safe(d: &Denial) -> bool {
    unsafe_denial_var(d).is_none()
}

pub fn unsafe_rule_var(r: &Rule) -> Option<Name> {
    let mut local = BTreeSet::new();
    r.head.vars(&mut local);
    for l in &r.body {
        l.vars(&mut local);
    }
    let bound = pinned_closure(r.body.iter(), &BTreeSet::new());
    local.into_iter().find(|v| !bound.contains(v))
}

/// Every disjunct must bind the head variables and its own variables.
pub fn unsafe_definition_var(def: &Definition) -> Option<Name> {
    for conj in &def.disjuncts {
        let mut local: BTreeSet<Name> = def.head_vars.iter().cloned().collect();
        for l in conj {
            l.vars(&mut local);
        }
        let bound = pinned_closure(conj.iter(), &BTreeSet::new());
        if let Some(v) = local.into_iter().find(|v| !bound.contains(v)) {
            return Some(v);
        }
    }
    None
}
