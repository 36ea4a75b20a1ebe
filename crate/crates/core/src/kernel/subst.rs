use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::clause::{body_free_vars, Denial, GenLit, Nee};
use super::term::{name, Atom, Literal, Name, Term};

/// Finite map from variables to terms, kept idempotent: no variable of the
/// range is also in the domain.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Subst {
    map: BTreeMap<Name, Term>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn single(var: Name, t: Term) -> Subst {
        let mut s = Subst::new();
        s.bind(var, t);
        s
    }

    pub fn from_pairs<I: IntoIterator<Item = (Name, Term)>>(pairs: I) -> Subst {
        let mut s = Subst::new();
        for (v, t) in pairs {
            s.bind(v, t);
        }
        s
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, v: &str) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn contains(&self, v: &str) -> bool {
        self.map.contains_key(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.map.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Name> {
        self.map.keys()
    }

    pub fn resolve(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        }
    }

    /// Composes `{var/t}` onto the substitution, preserving idempotence.
    /// A binding of a variable to itself is ignored.
    pub fn bind(&mut self, var: Name, t: Term) {
        let t = self.resolve(&t);
        if t == Term::Var(var.clone()) {
            return;
        }
        let step = Subst {
            map: BTreeMap::from([(var.clone(), t.clone())]),
        };
        for v in self.map.values_mut() {
            *v = step.resolve(v);
        }
        self.map.insert(var, t);
    }

    /// One-way matcher applied once, simultaneously. Unlike [`Subst::bind`]
    /// this does not compose bindings, so the result need not be
    /// idempotent when domain and range share names.
    pub fn matcher(pairs: impl IntoIterator<Item = (Name, Term)>) -> Subst {
        Subst {
            map: pairs
                .into_iter()
                .filter(|(v, t)| *t != Term::Var(v.clone()))
                .collect(),
        }
    }

    pub fn without(&self, vars: &[Name]) -> Subst {
        let mut s = self.clone();
        for v in vars {
            s.map.remove(v);
        }
        s
    }

    pub fn restrict(&self, keep: &BTreeSet<Name>) -> Subst {
        Subst {
            map: self
                .map
                .iter()
                .filter(|(k, _)| keep.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    fn range_vars(&self) -> BTreeSet<Name> {
        self.map
            .values()
            .filter_map(|t| t.as_var().cloned())
            .collect()
    }

    /// True when every binding maps a variable to a distinct variable.
    pub fn is_renaming(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.map
            .values()
            .all(|t| t.is_var() && seen.insert(t.clone()))
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}/{t}")?;
        }
        write!(f, "}}")
    }
}

/// Simultaneous replacement of the free occurrences of domain variables.
pub trait Apply: Sized {
    fn apply(&self, s: &Subst) -> Self;
}

impl Apply for Term {
    fn apply(&self, s: &Subst) -> Term {
        s.resolve(self)
    }
}

impl Apply for Atom {
    fn apply(&self, s: &Subst) -> Atom {
        let mut a = Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|t| s.resolve(t)).collect(),
        };
        a.normalize();
        a
    }
}

impl Apply for Literal {
    fn apply(&self, s: &Subst) -> Literal {
        Literal {
            atom: self.atom.apply(s),
            positive: self.positive,
        }
    }
}

impl Apply for Nee {
    fn apply(&self, s: &Subst) -> Nee {
        let inner = s.without(&self.vars);
        if inner.is_empty() {
            return self.clone();
        }
        let free = self.free_vars();
        let relevant = inner.restrict(&free);
        if relevant.is_empty() {
            return self.clone();
        }
        let range = relevant.range_vars();
        let mut nee = self.clone();
        if nee.vars.iter().any(|q| range.contains(q)) {
            // quantified variable would capture an incoming term: rename it
            let mut used = BTreeSet::new();
            for g in &nee.body {
                g.all_vars(&mut used);
            }
            used.extend(range.iter().cloned());
            used.extend(relevant.domain().cloned());
            let mut ren = Subst::new();
            let mut vars = Vec::with_capacity(nee.vars.len());
            for q in &nee.vars {
                if range.contains(q) {
                    let fresh = fresh_name(q, &used);
                    used.insert(fresh.clone());
                    ren.bind(q.clone(), Term::Var(fresh.clone()));
                    vars.push(fresh);
                } else {
                    vars.push(q.clone());
                }
            }
            nee.body = nee.body.apply(&ren);
            nee.vars = vars;
        }
        nee.body = nee.body.apply(&relevant);
        nee
    }
}

impl Apply for GenLit {
    fn apply(&self, s: &Subst) -> GenLit {
        match self {
            GenLit::Lit(l) => GenLit::Lit(l.apply(s)),
            GenLit::Nee(n) => GenLit::Nee(n.apply(s)),
        }
    }
}

impl Apply for Denial {
    fn apply(&self, s: &Subst) -> Denial {
        Denial {
            body: self.body.apply(s),
        }
    }
}

impl<T: Apply> Apply for Vec<T> {
    fn apply(&self, s: &Subst) -> Vec<T> {
        self.iter().map(|x| x.apply(s)).collect()
    }
}

/// First name of the form `<stem><n>` that is not in `used`.
pub fn fresh_name(base: &str, used: &BTreeSet<Name>) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "V" } else { stem };
    (1..)
        .map(|n| format!("{stem}{n}"))
        .find(|cand| !used.contains(cand.as_str()))
        .map(|s| name(&s))
        .expect("unbounded search")
}

/// Unifies two terms under `s`, extending it. Parameters behave like
/// distinct fresh constants.
pub fn unify_terms(a: &Term, b: &Term, s: &mut Subst) -> bool {
    let a = s.resolve(a);
    let b = s.resolve(b);
    if a == b {
        return true;
    }
    match (&a, &b) {
        (Term::Var(v), _) => {
            s.bind(v.clone(), b);
            true
        }
        (_, Term::Var(v)) => {
            s.bind(v.clone(), a);
            true
        }
        _ => false,
    }
}

fn unify_args(a: &[Term], b: &[Term], s: &mut Subst) -> bool {
    a.iter().zip(b).all(|(x, y)| unify_terms(x, y, s))
}

/// Extends `s` to a unifier of the two atoms, trying both argument orders
/// for equality atoms.
pub fn unify_atoms_with(a1: &Atom, a2: &Atom, s: &Subst) -> Option<Subst> {
    if a1.pred != a2.pred || a1.arity() != a2.arity() {
        return None;
    }
    let mut s1 = s.clone();
    if unify_args(&a1.args, &a2.args, &mut s1) {
        return Some(s1);
    }
    if a1.is_equality() {
        let mut s2 = s.clone();
        let swapped = [a2.args[1].clone(), a2.args[0].clone()];
        if unify_args(&a1.args, &swapped, &mut s2) {
            return Some(s2);
        }
    }
    None
}

/// Most general unifier of two atoms, if any.
pub fn mgu(a1: &Atom, a2: &Atom) -> Option<Subst> {
    unify_atoms_with(a1, a2, &Subst::new())
}

/// Unification over general literals. An NEE whose body is a single atom
/// unifies with a negated literal; its quantified variables are then
/// treated as ordinary variables and may become instantiated.
pub fn unify_genlits(g1: &GenLit, g2: &GenLit, s: &Subst) -> Option<Subst> {
    match (g1, g2) {
        (GenLit::Lit(l1), GenLit::Lit(l2)) => {
            if l1.positive != l2.positive {
                return None;
            }
            unify_atoms_with(&l1.atom, &l2.atom, s)
        }
        (GenLit::Nee(n), GenLit::Lit(l)) | (GenLit::Lit(l), GenLit::Nee(n)) => {
            if l.positive {
                return None;
            }
            match n.body.as_slice() {
                [GenLit::Lit(inner)] if inner.positive => unify_atoms_with(&inner.atom, &l.atom, s),
                _ => None,
            }
        }
        (GenLit::Nee(n1), GenLit::Nee(n2)) => {
            if n1.body.len() != n2.body.len() {
                return None;
            }
            let mut cur = s.clone();
            for (a, b) in n1.body.iter().zip(&n2.body) {
                cur = unify_genlits(a, b, &cur)?;
            }
            Some(cur)
        }
    }
}

/// Applies a substitution to every occurrence, quantified ones included.
/// Quantifiers of instantiated variables disappear; NEEs left without
/// quantifiers keep their body as is.
pub fn instantiate(g: &GenLit, s: &Subst) -> GenLit {
    match g {
        GenLit::Lit(l) => GenLit::Lit(l.apply(s)),
        GenLit::Nee(n) => {
            let body: Vec<GenLit> = n.body.iter().map(|b| instantiate(b, s)).collect();
            let mut vars = Vec::new();
            for v in &n.vars {
                if let Term::Var(w) = s.resolve(&Term::Var(v.clone())) {
                    if !vars.contains(&w) {
                        vars.push(w);
                    }
                }
            }
            let mut nee = Nee { vars, body };
            nee.prune_vars();
            GenLit::Nee(nee)
        }
    }
}

/// Renames every variable occurrence, binders included, by `map`.
/// Only meaningful on standardized input.
pub fn rename_all(g: &GenLit, map: &BTreeMap<Name, Name>) -> GenLit {
    let term = |t: &Term| match t {
        Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
        other => other.clone(),
    };
    match g {
        GenLit::Lit(l) => {
            let mut atom = Atom {
                pred: l.atom.pred.clone(),
                args: l.atom.args.iter().map(term).collect(),
            };
            atom.normalize();
            GenLit::Lit(Literal {
                atom,
                positive: l.positive,
            })
        }
        GenLit::Nee(n) => GenLit::Nee(Nee {
            vars: n
                .vars
                .iter()
                .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone()))
                .collect(),
            body: n.body.iter().map(|b| rename_all(b, map)).collect(),
        }),
    }
}

pub fn rename_body(body: &[GenLit], map: &BTreeMap<Name, Name>) -> Vec<GenLit> {
    body.iter().map(|g| rename_all(g, map)).collect()
}

/// Renamed copy of `c2` sharing no variable with `c1`.
pub fn standardize_apart(c1: &Denial, c2: &Denial) -> Denial {
    let avoid = c1.vars();
    rename_away(c2, &avoid)
}

/// Renames every variable of `d` that occurs in `avoid`.
pub fn rename_away(d: &Denial, avoid: &BTreeSet<Name>) -> Denial {
    let d = standardize(d);
    let own = d.vars();
    let clash: Vec<&Name> = own.iter().filter(|v| avoid.contains(*v)).collect();
    if clash.is_empty() {
        return d;
    }
    let mut used: BTreeSet<Name> = avoid.union(&own).cloned().collect();
    let mut map = BTreeMap::new();
    for v in clash {
        let fresh = fresh_name(v, &used);
        used.insert(fresh.clone());
        map.insert(v.clone(), fresh);
    }
    Denial {
        body: rename_body(&d.body, &map),
    }
}

/// Variant of `d` in which no NEE-quantified variable occurs outside its
/// NEE and no two NEEs quantify the same name.
pub fn standardize(d: &Denial) -> Denial {
    let mut seen = d.level0_vars();
    let mut used = d.vars();
    used.extend(seen.iter().cloned());
    Denial {
        body: standardize_body(&d.body, &mut seen, &mut used),
    }
}

/// Standardizes a body whose visible variables are already in `seen`.
pub fn standardize_body(
    body: &[GenLit],
    seen: &mut BTreeSet<Name>,
    used: &mut BTreeSet<Name>,
) -> Vec<GenLit> {
    body.iter()
        .map(|g| match g {
            GenLit::Lit(_) => g.clone(),
            GenLit::Nee(n) => GenLit::Nee(standardize_nee(n, seen, used)),
        })
        .collect()
}

fn standardize_nee(n: &Nee, seen: &mut BTreeSet<Name>, used: &mut BTreeSet<Name>) -> Nee {
    let mut ren = Subst::new();
    let mut vars = Vec::with_capacity(n.vars.len());
    for q in &n.vars {
        if seen.contains(q) || vars.contains(q) {
            let fresh = fresh_name(q, used);
            used.insert(fresh.clone());
            ren.bind(q.clone(), Term::Var(fresh.clone()));
            vars.push(fresh);
        } else {
            vars.push(q.clone());
        }
    }
    // rename bound occurrences only: inner binders shadow as usual
    let inner = Nee {
        vars: Vec::new(),
        body: n.body.clone(),
    };
    let renamed = if ren.is_empty() {
        inner.body
    } else {
        inner.body.apply(&ren)
    };
    seen.extend(vars.iter().cloned());
    let body = standardize_body(&renamed, seen, used);
    Nee { vars, body }
}

/// Free variables of a body seen as a conjunction.
pub fn free_vars_of(body: &[GenLit]) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    body_free_vars(body, &mut out);
    out
}
