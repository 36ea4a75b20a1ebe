//! Subsumption and extended subsumption by backtracking literal matching.
//!
//! Matching is one-way: only the `flex` variables of the subsuming side
//! may be bound, every other term of it (parameters, constants, variables
//! bound further out) must occur verbatim on the subsumed side. The
//! subsumed side is never instantiated.

use std::collections::{BTreeMap, BTreeSet};

use crate::kernel::{
    fresh_name, is_variant, rename_body, standardize, Apply, Denial, GenLit, Literal, Name, Subst,
    Term,
};

pub(crate) type Matcher = BTreeMap<Name, Term>;

fn match_term(p: &Term, t: &Term, flex: &BTreeSet<Name>, m: &mut Matcher) -> bool {
    match p {
        Term::Var(v) if flex.contains(v) => match m.get(v) {
            Some(b) => b == t,
            None => {
                m.insert(v.clone(), t.clone());
                true
            }
        },
        _ => p == t,
    }
}

fn match_args(ps: &[Term], ts: &[Term], flex: &BTreeSet<Name>, m: &Matcher) -> Option<Matcher> {
    let mut m = m.clone();
    ps.iter()
        .zip(ts)
        .all(|(p, t)| match_term(p, t, flex, &mut m))
        .then_some(m)
}

/// All ways of extending `m` so that `p` maps onto `t`.
pub(crate) fn match_literal(
    p: &Literal,
    t: &Literal,
    flex: &BTreeSet<Name>,
    m: &Matcher,
) -> Vec<Matcher> {
    if p.positive != t.positive || p.atom.pred != t.atom.pred || p.atom.arity() != t.atom.arity() {
        return Vec::new();
    }
    let mut out = Vec::new();
    if let Some(m1) = match_args(&p.atom.args, &t.atom.args, flex, m) {
        out.push(m1);
    }
    if p.atom.is_equality() {
        let swapped = [t.atom.args[1].clone(), t.atom.args[0].clone()];
        if let Some(m2) = match_args(&p.atom.args, &swapped, flex, m) {
            if !out.contains(&m2) {
                out.push(m2);
            }
        }
    }
    out
}

pub(crate) fn matcher_subst(m: &Matcher) -> Subst {
    Subst::matcher(m.iter().map(|(k, v)| (k.clone(), v.clone())))
}

/// Every literal of `phi` has a literal of `psi` with the same predicate,
/// arity and polarity; unaffected by renaming.
fn lits_covered(phi: &[GenLit], psi: &[GenLit]) -> bool {
    phi.iter().filter_map(GenLit::as_lit).all(|l| {
        psi.iter().filter_map(GenLit::as_lit).any(|t| {
            t.positive == l.positive
                && t.atom.pred == l.atom.pred
                && t.atom.arity() == l.atom.arity()
        })
    })
}

/// Extended-subsumption search: `<- phi` (flex variables `flex`) against
/// `<- psi`. Returns a matcher for the literal part under which every NEE
/// of `phi` is covered by an NEE of `psi`.
pub(crate) fn match_body(
    phi: &[GenLit],
    flex: &BTreeSet<Name>,
    psi: &[GenLit],
    m: Matcher,
) -> Option<Matcher> {
    if !lits_covered(phi, psi) {
        return None;
    }
    let lits: Vec<&Literal> = phi.iter().filter_map(GenLit::as_lit).collect();
    let targets: Vec<&Literal> = psi.iter().filter_map(GenLit::as_lit).collect();
    let nees: Vec<_> = phi.iter().filter_map(GenLit::as_nee).collect();
    let psi_nees: Vec<_> = psi.iter().filter_map(GenLit::as_nee).collect();
    if !nees.is_empty() && psi_nees.is_empty() {
        return None;
    }
    let leaf = |m: &Matcher| -> bool {
        let s = matcher_subst(m);
        nees.iter().all(|n| {
            let ns = n.apply(&s);
            psi_nees.iter().any(|mm| {
                let inner: BTreeSet<Name> = mm.vars.iter().cloned().collect();
                match_body(&mm.body, &inner, &ns.body, Matcher::new()).is_some()
            })
        })
    };
    // expands the literal with fewest candidate matches first
    fn dfs(
        todo: &[&Literal],
        targets: &[&Literal],
        flex: &BTreeSet<Name>,
        m: Matcher,
        leaf: &dyn Fn(&Matcher) -> bool,
    ) -> Option<Matcher> {
        if todo.is_empty() {
            return leaf(&m).then_some(m);
        }
        let mut best: Option<(usize, Vec<Matcher>)> = None;
        for (i, l) in todo.iter().enumerate() {
            let ms: Vec<Matcher> = targets
                .iter()
                .flat_map(|t| match_literal(l, t, flex, &m))
                .collect();
            if ms.is_empty() {
                return None;
            }
            if best.as_ref().is_none_or(|(_, b)| ms.len() < b.len()) {
                let done = ms.len() == 1;
                best = Some((i, ms));
                if done {
                    break;
                }
            }
        }
        let (i, ms) = best.expect("todo is non-empty");
        let rest: Vec<&Literal> = todo
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, l)| *l)
            .collect();
        ms.into_iter()
            .find_map(|m1| dfs(&rest, targets, flex, m1, leaf))
    }
    dfs(&lits, &targets, flex, m, &leaf)
}

/// Result of a successful subsumption test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subsumption {
    pub sigma: Subst,
    /// The subsuming denial is not a variant of the subsumed one.
    pub strict: bool,
}

/// Standardizes both sides and renames `phi` apart from `psi`; returns
/// the map from new names back to the names of `phi`.
fn prepare(phi: &Denial, psi: &Denial) -> (Denial, Denial, BTreeMap<Name, Name>) {
    let psi = standardize(psi);
    let phi = standardize(phi);
    let theirs = psi.vars();
    let mine = phi.vars();
    let mut used: BTreeSet<Name> = theirs.union(&mine).cloned().collect();
    let mut map = BTreeMap::new();
    let mut back = BTreeMap::new();
    for v in mine.iter().filter(|v| theirs.contains(*v)) {
        let fresh = fresh_name(v, &used);
        used.insert(fresh.clone());
        map.insert(v.clone(), fresh.clone());
        back.insert(fresh, v.clone());
    }
    let phi = Denial {
        body: rename_body(&phi.body, &map),
    };
    (phi, psi, back)
}

/// Extended subsumption test returning the level-0 substitution, expressed
/// over the variables of `phi` as given.
pub fn extended_subsumes_with(phi: &Denial, psi: &Denial) -> Option<Subsumption> {
    if !lits_covered(&phi.body, &psi.body) {
        return None;
    }
    let (phi_r, psi_s, back) = prepare(phi, psi);
    let flex = phi_r.level0_vars();
    let m = match_body(&phi_r.body, &flex, &psi_s.body, Matcher::new())?;
    let sigma = Subst::matcher(m.into_iter().map(|(k, v)| {
        let orig = back.get(&k).cloned().unwrap_or(k);
        (orig, v)
    }));
    Some(Subsumption {
        sigma,
        strict: !is_variant(phi, psi),
    })
}

/// `phi` extended-subsumes `psi`; sound: then `phi` entails `psi`.
pub fn extended_subsumes(phi: &Denial, psi: &Denial) -> bool {
    extended_subsumes_with(phi, psi).is_some()
}

/// `phi` extended-subsumes `psi` and `psi` does not extended-subsume
/// `phi`, which rules out variants and mutual subsumers such as
/// `<- p(X), p(Y)` against `<- p(X)`.
pub fn strictly_extended_subsumes(phi: &Denial, psi: &Denial) -> bool {
    extended_subsumes(phi, psi) && !extended_subsumes(psi, phi)
}

/// Plain subsumption: every literal of `d1 sigma` occurs in `d2`. On
/// NEE-free denials this is exactly extended subsumption.
pub fn subsumes(d1: &Denial, d2: &Denial) -> Option<Subsumption> {
    extended_subsumes_with(d1, d2)
}

/// Extended subsumption between two bodies in a shared scope, with the
/// given flex variables on the subsuming side. Used for NEE bodies, whose
/// free variables behave as parameters.
pub fn body_subsumes(phi: &[GenLit], flex: &BTreeSet<Name>, psi: &[GenLit]) -> bool {
    match_body(phi, flex, psi, Matcher::new()).is_some()
}
