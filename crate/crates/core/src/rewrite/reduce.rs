//! Reduction of extended denials.
//!
//! A denial body is reduced together with the set of variables that are
//! fixed from outside (`rigid`): empty at level 0, the enclosing scopes'
//! variables inside an NEE. Rigid variables behave exactly like
//! parameters. Because (non-)equality elimination splits a body in two,
//! reduction maps one body to a set of bodies; the denial `<- B` is
//! equivalent to the set of denials over the returned bodies, and an empty
//! set means `true`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::subsume::{body_subsumes, match_literal, matcher_subst, Matcher};
use crate::kernel::{
    canonical_theory, free_vars_of, fresh_name, rename_body, standardize, Apply, Denial, GenLit,
    Literal, Name, Nee, Subst, Term,
};

/// One rule application, as printed bodies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: &'static str,
    pub before: String,
    pub after: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub steps: Vec<TraceStep>,
}

impl fmt::Display for RewriteTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            let after = if s.after.is_empty() {
                "true".to_string()
            } else {
                s.after.join(" ; ")
            };
            writeln!(f, "{}: {} => {}", s.rule, s.before, after)?;
        }
        Ok(())
    }
}

enum Out {
    False,
    Bodies(Vec<Vec<GenLit>>),
}

type Bodies = Vec<Vec<GenLit>>;

/// Reduction engine with counters, an optional trace and a step cap.
#[derive(Clone, Debug)]
pub struct Reducer {
    pub parameter_rule: bool,
    pub max_steps: usize,
    pub steps: usize,
    pub cap_hit: bool,
    pub counts: BTreeMap<&'static str, usize>,
    pub trace: Option<RewriteTrace>,
    /// Results of earlier body reductions, keyed by body and rigid set.
    memo: HashMap<(Vec<GenLit>, BTreeSet<Name>), Bodies>,
}

impl Default for Reducer {
    fn default() -> Self {
        Reducer {
            parameter_rule: true,
            max_steps: 100_000,
            steps: 0,
            cap_hit: false,
            counts: BTreeMap::new(),
            trace: None,
            memo: HashMap::new(),
        }
    }
}

fn show(body: &[GenLit]) -> String {
    Denial {
        body: body.to_vec(),
    }
    .to_string()
}

fn lit_vars(l: &Literal) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    l.vars(&mut out);
    out
}

fn gen_vars(g: &GenLit) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    g.free_vars(&mut out);
    out
}

fn without(b: &[GenLit], i: usize) -> Vec<GenLit> {
    let mut out = b.to_vec();
    out.remove(i);
    out
}

fn replace_at(b: &[GenLit], i: usize, with: Vec<GenLit>) -> Vec<GenLit> {
    let mut out = Vec::with_capacity(b.len() + with.len());
    out.extend_from_slice(&b[..i]);
    out.extend(with);
    out.extend_from_slice(&b[i + 1..]);
    out
}

/// Quantifier list for a rewritten NEE body: the old binders still in use,
/// then any new local variables, sorted.
fn requantify(old: &[Name], body: &[GenLit], outer: &BTreeSet<Name>) -> Vec<Name> {
    let free = free_vars_of(body);
    let mut vars: Vec<Name> = old.iter().filter(|v| free.contains(*v)).cloned().collect();
    for v in &free {
        if !outer.contains(v) && !vars.contains(v) {
            vars.push(v.clone());
        }
    }
    vars
}

/// Replaces free occurrences of a parameter or rigid variable by `to`.
pub(crate) fn replace_term(body: &[GenLit], from: &Term, to: &Term) -> Vec<GenLit> {
    body.iter()
        .map(|g| match g {
            GenLit::Lit(l) => {
                let mut atom = l.atom.clone();
                for t in atom.args.iter_mut() {
                    if t == from {
                        *t = to.clone();
                    }
                }
                atom = atom.apply(&Subst::new());
                GenLit::Lit(Literal {
                    atom,
                    positive: l.positive,
                })
            }
            GenLit::Nee(n) => {
                if let Term::Var(v) = from {
                    if n.vars.contains(v) {
                        return g.clone();
                    }
                }
                GenLit::Nee(Nee {
                    vars: n.vars.clone(),
                    body: replace_term(&n.body, from, to),
                })
            }
        })
        .collect()
}

/// Body of `m` with its binders renamed away from `avoid`, ready to be
/// lifted one level up.
fn lift(m: &Nee, avoid: &BTreeSet<Name>) -> Vec<GenLit> {
    let mut used = avoid.clone();
    for g in &m.body {
        g.all_vars(&mut used);
    }
    let mut map = BTreeMap::new();
    for v in &m.vars {
        if avoid.contains(v) {
            let f = fresh_name(v, &used);
            used.insert(f.clone());
            map.insert(v.clone(), f);
        }
    }
    rename_body(&m.body, &map)
}

fn negate(g: &GenLit, avoid: &BTreeSet<Name>) -> Vec<GenLit> {
    match g {
        GenLit::Lit(l) => vec![GenLit::Lit(l.negated())],
        GenLit::Nee(m) => lift(m, avoid),
    }
}

fn all_names(b: &[GenLit], rigid: &BTreeSet<Name>) -> BTreeSet<Name> {
    let mut out = rigid.clone();
    for g in b {
        g.all_vars(&mut out);
    }
    out
}

impl Reducer {
    pub fn new() -> Reducer {
        Reducer::default()
    }

    pub fn with_trace(mut self) -> Reducer {
        self.trace = Some(RewriteTrace::default());
        self
    }

    /// Reduces a body whose variables in `rigid` are fixed from outside.
    pub fn reduce_body(&mut self, body: Vec<GenLit>, rigid: &BTreeSet<Name>) -> Vec<Vec<GenLit>> {
        let key = (body, rigid.clone());
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let capped = self.cap_hit;
        let mut work = vec![key.0.clone()];
        let mut done: Vec<Vec<GenLit>> = Vec::new();
        while let Some(b) = work.pop() {
            if self.steps >= self.max_steps {
                self.cap_hit = true;
                done.push(b);
                continue;
            }
            match self.step(&b, rigid) {
                None => {
                    if !done.contains(&b) {
                        done.push(b)
                    }
                }
                Some((rule, out)) => {
                    self.steps += 1;
                    *self.counts.entry(rule).or_default() += 1;
                    if let Some(t) = self.trace.as_mut() {
                        t.steps.push(TraceStep {
                            rule,
                            before: show(&b),
                            after: match &out {
                                Out::False => Vec::new(),
                                Out::Bodies(bs) => bs.iter().map(|x| show(x)).collect(),
                            },
                        });
                    }
                    if let Out::Bodies(bs) = out {
                        work.extend(bs.into_iter().rev());
                    }
                }
            }
        }
        if self.cap_hit == capped {
            self.memo.insert(key, done.clone());
        }
        done
    }

    fn step(&mut self, b: &[GenLit], rigid: &BTreeSet<Name>) -> Option<(&'static str, Out)> {
        let free = free_vars_of(b);
        let flex: BTreeSet<Name> = free.difference(rigid).cloned().collect();
        let visible: BTreeSet<Name> = free.union(rigid).cloned().collect();

        // reduce NEE bodies, innermost first
        let mut changed = false;
        let mut next = Vec::with_capacity(b.len());
        for g in b {
            let GenLit::Nee(n) = g else {
                next.push(g.clone());
                continue;
            };
            let inner: BTreeSet<Name> = visible
                .iter()
                .filter(|v| !n.vars.contains(*v))
                .cloned()
                .collect();
            let r = self.reduce_body(n.body.clone(), &inner);
            if r.len() == 1 && r[0] == n.body {
                next.push(g.clone());
                continue;
            }
            changed = true;
            if r.iter().any(Vec::is_empty) {
                return Some(("nee-false", Out::False));
            }
            for body in r {
                let vars = requantify(&n.vars, &body, &inner);
                next.push(GenLit::Nee(Nee { vars, body }));
            }
        }
        if changed {
            return Some(("nee-reduce", Out::Bodies(vec![next])));
        }

        // NEE normal form: binders in use; no empty quantifier lists
        for (i, g) in b.iter().enumerate() {
            let GenLit::Nee(n) = g else { continue };
            let mut p = n.clone();
            p.prune_vars();
            if !p.vars.is_empty() {
                if p.vars != n.vars {
                    return Some((
                        "nee-prune",
                        Out::Bodies(vec![replace_at(b, i, vec![GenLit::Nee(p)])]),
                    ));
                }
                continue;
            }
            let avoid = all_names(b, rigid);
            return match p.body.as_slice() {
                [] => Some(("nee-false", Out::False)),
                [single] => Some((
                    "nee-unwrap",
                    Out::Bodies(vec![replace_at(b, i, negate(single, &avoid))]),
                )),
                items => {
                    let bodies = items
                        .iter()
                        .map(|x| replace_at(b, i, negate(x, &avoid)))
                        .collect();
                    Some(("nee-split", Out::Bodies(bodies)))
                }
            };
        }

        // trivial built-ins
        for (i, g) in b.iter().enumerate() {
            let GenLit::Lit(l) = g else { continue };
            if !l.is_builtin() {
                continue;
            }
            let (x, y) = (&l.atom.args[0], &l.atom.args[1]);
            let decided = if x == y {
                Some(true)
            } else if x.is_const() && y.is_const() {
                Some(false)
            } else {
                None
            };
            if let Some(holds) = decided {
                return if holds == l.positive {
                    Some(("trivial", Out::Bodies(vec![without(b, i)])))
                } else {
                    Some(("trivial-false", Out::False))
                };
            }
        }

        // inline X = t for a variable of this level
        for (i, g) in b.iter().enumerate() {
            let GenLit::Lit(l) = g else { continue };
            if !l.is_builtin() || !l.positive {
                continue;
            }
            let (x, y) = (&l.atom.args[0], &l.atom.args[1]);
            let pick = match (x, y) {
                (Term::Var(v), t) if flex.contains(v) => Some((v, t)),
                (t, Term::Var(v)) if flex.contains(v) => Some((v, t)),
                _ => None,
            };
            if let Some((v, t)) = pick {
                let s = Subst::single(v.clone(), t.clone());
                return Some(("inline", Out::Bodies(vec![without(b, i).apply(&s)])));
            }
        }

        // parameter rule: $a = c propagates c
        if self.parameter_rule {
            for (i, g) in b.iter().enumerate() {
                let GenLit::Lit(l) = g else { continue };
                if !l.is_builtin() || !l.positive {
                    continue;
                }
                let (x, y) = (&l.atom.args[0], &l.atom.args[1]);
                let (s, c) = match (x, y) {
                    (s, c @ Term::Const(_)) if !s.is_const() => (s, c),
                    (c @ Term::Const(_), s) if !s.is_const() => (s, c),
                    _ => continue,
                };
                let rest = without(b, i);
                let replaced = replace_term(&rest, s, c);
                if replaced != rest {
                    let mut out = replaced;
                    out.insert(i, g.clone());
                    return Some(("parameter", Out::Bodies(vec![out])));
                }
            }
        }

        // complementary pair
        let lits: Vec<(usize, &Literal)> = b
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.as_lit().map(|l| (i, l)))
            .collect();
        for (_, l1) in &lits {
            if lits
                .iter()
                .any(|(_, l2)| l2.atom == l1.atom && l2.positive != l1.positive)
            {
                return Some(("complementary", Out::False));
            }
        }

        // duplicates
        for i in 0..b.len() {
            if b[..i].contains(&b[i]) {
                return Some(("factoring", Out::Bodies(vec![without(b, i)])));
            }
        }

        // (non-)equality elimination out of NEE bodies; a literal already
        // decided at this level leaves one branch
        for (i, g) in b.iter().enumerate() {
            let GenLit::Nee(n) = g else { continue };
            for (j, h) in n.body.iter().enumerate() {
                let GenLit::Lit(l) = h else { continue };
                if !l.is_builtin() || lit_vars(l).iter().any(|v| n.vars.contains(v)) {
                    continue;
                }
                let mut rest = Nee {
                    vars: n.vars.clone(),
                    body: without(&n.body, j),
                };
                rest.prune_vars();
                let rule = if l.positive {
                    "equality-elimination"
                } else {
                    "nonequality-elimination"
                };
                let here = |x: &Literal| b.iter().any(|g| g.as_lit() == Some(x));
                if here(l) {
                    return Some((
                        rule,
                        Out::Bodies(vec![replace_at(b, i, vec![GenLit::Nee(rest)])]),
                    ));
                }
                if here(&l.negated()) {
                    return Some((rule, Out::Bodies(vec![without(b, i)])));
                }
                let keep = replace_at(b, i, vec![GenLit::Lit(l.clone()), GenLit::Nee(rest)]);
                let flip = replace_at(b, i, vec![GenLit::Lit(l.negated())]);
                return Some((rule, Out::Bodies(vec![keep, flip])));
            }
        }

        // NEE against NEE: not exists M entails not exists G
        for (i, gi) in b.iter().enumerate() {
            let GenLit::Nee(m) = gi else { continue };
            let mflex: BTreeSet<Name> = m.vars.iter().cloned().collect();
            for (j, gj) in b.iter().enumerate() {
                if i == j {
                    continue;
                }
                let GenLit::Nee(g) = gj else { continue };
                if body_subsumes(&m.body, &mflex, &g.body) {
                    return Some(("factoring", Out::Bodies(vec![without(b, j)])));
                }
            }
        }

        // subsumption factoring at this level
        if let Some(d) = factor_search(b, &flex) {
            return Some(("factoring", Out::Bodies(vec![d])));
        }
        None
    }
}

fn moved(m: &Matcher) -> BTreeSet<Name> {
    m.iter()
        .filter(|(k, v)| **v != Term::Var((*k).clone()))
        .map(|(k, _)| k.clone())
        .collect()
}

/// Looks for `<- C and D  ~>  <- D` where `<- C` extended-subsumes `<- D`
/// through a substitution moving only variables absent from `D`.
fn factor_search(b: &[GenLit], flex: &BTreeSet<Name>) -> Option<Vec<GenLit>> {
    let lits: Vec<(usize, &Literal)> = b
        .iter()
        .enumerate()
        .filter_map(|(i, g)| g.as_lit().map(|l| (i, l)))
        .collect();
    for &(i, l) in &lits {
        if lit_vars(l).is_disjoint(flex) {
            continue;
        }
        for &(k, t) in &lits {
            if k == i {
                continue;
            }
            for m in match_literal(l, t, flex, &Matcher::new()) {
                let mut chosen = BTreeMap::from([(i, k)]);
                if let Some(d) = grow(b, flex, m, &mut chosen) {
                    return Some(d);
                }
            }
        }
    }
    None
}

fn grow(
    b: &[GenLit],
    flex: &BTreeSet<Name>,
    m: Matcher,
    chosen: &mut BTreeMap<usize, usize>,
) -> Option<Vec<GenLit>> {
    let dom = moved(&m);
    if dom.is_empty() {
        return None;
    }
    // idempotent: nothing is mapped onto a moved variable
    if m.values()
        .any(|t| matches!(t, Term::Var(v) if dom.contains(v)))
    {
        return None;
    }
    let touches = |g: &GenLit| !gen_vars(g).is_disjoint(&dom);
    if chosen.values().any(|&k| touches(&b[k])) {
        return None;
    }
    let pending = b
        .iter()
        .enumerate()
        .find(|(i, g)| g.as_lit().is_some() && touches(g) && !chosen.contains_key(i));
    match pending {
        None => {
            let s = matcher_subst(&m);
            let d_nees: Vec<&Nee> = b
                .iter()
                .filter(|g| !touches(g))
                .filter_map(GenLit::as_nee)
                .collect();
            let covered = b
                .iter()
                .filter(|g| touches(g))
                .filter_map(GenLit::as_nee)
                .all(|n| {
                    let ns = n.apply(&s);
                    d_nees.iter().any(|mm| {
                        let mflex: BTreeSet<Name> = mm.vars.iter().cloned().collect();
                        body_subsumes(&mm.body, &mflex, &ns.body)
                    })
                });
            covered.then(|| b.iter().filter(|g| !touches(g)).cloned().collect())
        }
        Some((pi, g)) => {
            let p = g.as_lit().unwrap();
            for (k, t) in b.iter().enumerate() {
                let GenLit::Lit(t) = t else { continue };
                if k == pi || touches(&b[k]) {
                    continue;
                }
                for m1 in match_literal(p, t, flex, &m) {
                    chosen.insert(pi, k);
                    if let Some(d) = grow(b, flex, m1, chosen) {
                        return Some(d);
                    }
                    chosen.remove(&pi);
                }
            }
            None
        }
    }
}

/// Reduction of a denial with a caller-supplied engine.
pub fn reduce_with(d: &Denial, r: &mut Reducer) -> Vec<Denial> {
    let d = standardize(d);
    let bodies = r.reduce_body(d.body, &BTreeSet::new());
    canonical_theory(&bodies.into_iter().map(Denial::new).collect::<Vec<_>>())
}

/// `d` reduced to an equivalent set of denials; empty means `true`.
pub fn reduce(d: &Denial) -> Vec<Denial> {
    reduce_with(d, &mut Reducer::default())
}

/// Reduction without the parameter rule.
pub fn reduce_plain(d: &Denial) -> Vec<Denial> {
    let mut r = Reducer {
        parameter_rule: false,
        ..Reducer::default()
    };
    reduce_with(d, &mut r)
}

pub fn reduces_to_true(d: &Denial) -> bool {
    reduce(d).is_empty()
}

/// Expansion: each constant, parameter or repeated variable in a level-0
/// database literal is replaced by a fresh variable and an equality.
pub fn expand(d: &Denial) -> Denial {
    let mut used = d.vars();
    let mut seen: BTreeSet<Name> = BTreeSet::new();
    let mut body = Vec::with_capacity(d.body.len());
    let mut eqs = Vec::new();
    for g in &d.body {
        match g {
            GenLit::Lit(l) if l.is_database() => {
                let mut atom = l.atom.clone();
                for t in atom.args.iter_mut() {
                    if let Term::Var(v) = t {
                        if seen.insert(v.clone()) {
                            continue;
                        }
                    }
                    let f = fresh_name("V", &used);
                    used.insert(f.clone());
                    seen.insert(f.clone());
                    eqs.push(GenLit::Lit(Literal::eq(Term::Var(f.clone()), t.clone())));
                    *t = Term::Var(f);
                }
                body.push(GenLit::Lit(Literal {
                    atom,
                    positive: l.positive,
                }));
            }
            _ => body.push(g.clone()),
        }
    }
    body.extend(eqs);
    Denial { body }
}

/// Position of a built-in literal inside nested NEEs: `path` indexes the
/// NEE in the denial body and then inside each enclosing NEE body;
/// `literal` indexes the body of the last one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Site {
    pub path: Vec<usize>,
    pub literal: usize,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RewriteError {
    #[error("no NEE at the given path")]
    BadPath,
    #[error("the literal at the site is not of the required form")]
    BadLiteral,
    #[error("the literal mentions a variable quantified by its own NEE")]
    SameLevel,
}

fn split_site(
    body: &[GenLit],
    path: &[usize],
    lit: usize,
    positive: bool,
) -> Result<(Vec<GenLit>, Vec<GenLit>), RewriteError> {
    let i = *path.first().ok_or(RewriteError::BadPath)?;
    let Some(GenLit::Nee(n)) = body.get(i) else {
        return Err(RewriteError::BadPath);
    };
    if path.len() == 1 {
        let Some(GenLit::Lit(l)) = n.body.get(lit) else {
            return Err(RewriteError::BadLiteral);
        };
        if !l.is_builtin() || l.positive != positive {
            return Err(RewriteError::BadLiteral);
        }
        if lit_vars(l).iter().any(|v| n.vars.contains(v)) {
            return Err(RewriteError::SameLevel);
        }
        let mut rest = Nee {
            vars: n.vars.clone(),
            body: without(&n.body, lit),
        };
        rest.prune_vars();
        let keep = replace_at(body, i, vec![GenLit::Lit(l.clone()), GenLit::Nee(rest)]);
        let flip = replace_at(body, i, vec![GenLit::Lit(l.negated())]);
        return Ok((keep, flip));
    }
    let (b1, b2) = split_site(&n.body, &path[1..], lit, positive)?;
    let mk = |body: Vec<GenLit>| {
        let mut x = Nee {
            vars: n.vars.clone(),
            body,
        };
        x.prune_vars();
        GenLit::Nee(x)
    };
    let joined = replace_at(body, i, vec![mk(b1), mk(b2)]);
    Ok((joined, Vec::new()))
}

fn eliminate(d: &Denial, site: &Site, positive: bool) -> Result<Vec<Denial>, RewriteError> {
    let d = standardize(d);
    let (a, b) = split_site(&d.body, &site.path, site.literal, positive)?;
    if site.path.len() == 1 {
        Ok(vec![Denial::new(a), Denial::new(b)])
    } else {
        Ok(vec![Denial::new(a)])
    }
}

/// One equality elimination step at `site`. At level 1 the result is two
/// denials; deeper, the enclosing NEE is split in place.
pub fn eliminate_equality(d: &Denial, site: &Site) -> Result<Vec<Denial>, RewriteError> {
    eliminate(d, site, true)
}

pub fn eliminate_nonequality(d: &Denial, site: &Site) -> Result<Vec<Denial>, RewriteError> {
    eliminate(d, site, false)
}
