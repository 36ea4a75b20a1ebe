//! `After` and unfolding.
//!
//! `After` renames every updated predicate `p` to a fresh intensional `p'`
//! defined by the update, and every intensional predicate depending on an
//! updated one to a primed copy. Unfolding then replaces intensional atoms
//! by their defining formulas (negated ones under an explicit existential)
//! and brings the result back to a set of extended denials.

use std::collections::{BTreeMap, BTreeSet};

use crate::analysis::{build_graph, classify_graph, Lang};
use crate::kernel::{
    canonical_theory, fresh_name, name, standardize, Apply, Atom, Denial, GenLit, Literal, Name,
    Nee, Subst, Term, Theory,
};
use crate::syntax::{Definition, Rule, Schema, Update};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("schema is recursive (cycle {0}); unfolding does not terminate")]
    Recursive(String),
    #[error("schema is not in L_S (odd-parity star path {0})")]
    NotLs(String),
    #[error("update of {0}, which is not extensional")]
    IntensionalUpdate(String),
}

/// First-order formula over literals, used between replacement and
/// normalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Lit(Literal),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Exists(Vec<Name>, Box<Formula>),
}

impl Formula {
    fn from_body(body: &[GenLit]) -> Formula {
        Formula::And(body.iter().map(Formula::from_genlit).collect())
    }

    fn from_genlit(g: &GenLit) -> Formula {
        match g {
            GenLit::Lit(l) => Formula::Lit(l.clone()),
            GenLit::Nee(n) => Formula::Not(Box::new(Formula::Exists(
                n.vars.clone(),
                Box::new(Formula::from_body(&n.body)),
            ))),
        }
    }
}

/// `After^U(S)` in general form together with its unfolding.
#[derive(Clone, Debug)]
pub struct WPResult {
    pub schema: Schema,
    pub theory: Theory,
}

fn primed(p: &str, taken: &BTreeSet<Name>) -> Name {
    let mut n = format!("{p}'");
    while taken.contains(n.as_str()) {
        n.push('\'');
    }
    name(&n)
}

/// The schema `<IDB*, Gamma^U>`; hypotheses are carried over unchanged.
pub fn after_schema(s: &Schema, u: &Update) -> Schema {
    let mut taken: BTreeSet<Name> = s.predicates().into_keys().collect();
    for e in &u.entries {
        taken.insert(e.pred.clone());
    }
    // predicates whose meaning changes: updated ones and those above them
    let mut changed: BTreeSet<Name> = u.entries.iter().map(|e| e.pred.clone()).collect();
    loop {
        let before = changed.len();
        for r in &s.rules {
            if r.body
                .iter()
                .any(|l| l.is_database() && changed.contains(&l.atom.pred))
            {
                changed.insert(r.head.pred.clone());
            }
        }
        if changed.len() == before {
            break;
        }
    }
    let mut rename: BTreeMap<Name, Name> = BTreeMap::new();
    for p in &changed {
        let q = primed(p, &taken);
        taken.insert(q.clone());
        rename.insert(p.clone(), q);
    }
    let ren_atom = |a: &Atom| -> Atom {
        match rename.get(&a.pred) {
            Some(q) => Atom {
                pred: q.clone(),
                args: a.args.clone(),
            },
            None => a.clone(),
        }
    };
    let ren_lit = |l: &Literal| Literal {
        atom: ren_atom(&l.atom),
        positive: l.positive,
    };
    fn ren_body(b: &[GenLit], f: &dyn Fn(&Literal) -> Literal) -> Vec<GenLit> {
        b.iter()
            .map(|g| match g {
                GenLit::Lit(l) => GenLit::Lit(f(l)),
                GenLit::Nee(n) => GenLit::Nee(Nee {
                    vars: n.vars.clone(),
                    body: ren_body(&n.body, f),
                }),
            })
            .collect()
    }
    let mut rules = s.rules.clone();
    for r in &s.rules {
        if changed.contains(&r.head.pred) {
            rules.push(Rule {
                head: ren_atom(&r.head),
                body: r.body.iter().map(ren_lit).collect(),
            });
        }
    }
    for e in &u.entries {
        let head = Atom {
            pred: rename[&e.pred].clone(),
            args: e.head_vars.iter().map(|v| Term::Var(v.clone())).collect(),
        };
        for conj in &e.disjuncts {
            rules.push(Rule {
                head: head.clone(),
                body: conj.clone(),
            });
        }
    }
    let constraints = s
        .constraints
        .iter()
        .map(|d| Denial {
            body: ren_body(&d.body, &ren_lit),
        })
        .collect();
    let mut out = Schema {
        rules,
        constraints,
        hypotheses: s.hypotheses.clone(),
    };
    restrict_idb(&mut out);
    out
}

/// Keeps only the rules the constraints and hypotheses depend on.
fn restrict_idb(s: &mut Schema) {
    let mut need: BTreeSet<Name> = BTreeSet::new();
    for d in s.constraints.iter().chain(&s.hypotheses) {
        need.extend(d.predicates().into_iter().map(|(p, _)| p));
    }
    loop {
        let before = need.len();
        for r in &s.rules {
            if need.contains(&r.head.pred) {
                for l in r.body.iter().filter(|l| l.is_database()) {
                    need.insert(l.atom.pred.clone());
                }
            }
        }
        if need.len() == before {
            break;
        }
    }
    s.rules.retain(|r| need.contains(&r.head.pred));
}

/// `After^U(S)` with its theory unfolded in the extended language.
pub fn after(s: &Schema, u: &Update) -> Result<WPResult, TransformError> {
    for e in &u.entries {
        if s.is_intensional(&e.pred) {
            return Err(TransformError::IntensionalUpdate(e.pred.to_string()));
        }
    }
    let schema = after_schema(s, u);
    let theory = unfold_constraints(&schema, &schema.constraints)?;
    Ok(WPResult { schema, theory })
}

/// `After_L^U(S)`: the unfolded `After` theory, checked against `lang`.
pub fn after_lang(s: &Schema, u: &Update, lang: Lang) -> Result<Theory, TransformError> {
    let r = after(s, u)?;
    check_lang(&r.schema, lang)?;
    Ok(r.theory)
}

fn check_lang(s: &Schema, lang: Lang) -> Result<(), TransformError> {
    let g = build_graph(s, None);
    if let Some(c) = g.find_cycle() {
        return Err(TransformError::Recursive(g.render_path(&c)));
    }
    if lang == Lang::Ls {
        let v = classify_graph(&g);
        if !v.in_ls() {
            return Err(TransformError::NotLs(
                v.rendered_witness.unwrap_or_default(),
            ));
        }
    }
    Ok(())
}

/// `Unfold_LS(S)`; fails outside L_S.
pub fn unfold_ls(s: &Schema) -> Result<Theory, TransformError> {
    check_lang(s, Lang::Ls)?;
    unfold_constraints(s, &s.constraints)
}

/// `Unfold_LSext(S)`; fails on recursive schemata.
pub fn unfold_lsext(s: &Schema) -> Result<Theory, TransformError> {
    unfold_constraints(s, &s.constraints)
}

/// Unfolded hypotheses of `s`.
pub fn unfold_hypotheses(s: &Schema) -> Result<Theory, TransformError> {
    unfold_constraints(s, &s.hypotheses)
}

/// Unfolds arbitrary denials against the rules of `s`.
pub fn unfold_constraints(s: &Schema, ds: &[Denial]) -> Result<Theory, TransformError> {
    let g = build_graph(s, None);
    if let Some(c) = g.find_cycle() {
        return Err(TransformError::Recursive(g.render_path(&c)));
    }
    let defs: BTreeMap<Name, Definition> = s
        .definitions()
        .into_iter()
        .map(|d| (d.pred.clone(), d))
        .collect();
    let mut out = Vec::new();
    for d in ds {
        out.extend(unfold_denial(&defs, d));
    }
    Ok(canonical_theory(&out))
}

fn unfold_denial(defs: &BTreeMap<Name, Definition>, d: &Denial) -> Vec<Denial> {
    let d = standardize(d);
    let mut used = d.vars();
    let f = replace(&Formula::from_body(&d.body), defs, &mut used);
    let mut fresh = used;
    to_bodies(&f, &mut BTreeSet::new(), &mut fresh)
        .into_iter()
        .map(Denial::new)
        .collect()
}

/// Replaces every intensional atom by its defining formula, recursively.
fn replace(f: &Formula, defs: &BTreeMap<Name, Definition>, used: &mut BTreeSet<Name>) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Lit(l) => match defs.get(&l.atom.pred) {
            Some(def) if l.is_database() => {
                let body = instantiate_def(def, &l.atom.args, used);
                let body = replace(&body, defs, used);
                if l.positive {
                    body
                } else {
                    Formula::Not(Box::new(body))
                }
            }
            _ => f.clone(),
        },
        Formula::And(fs) => Formula::And(fs.iter().map(|x| replace(x, defs, used)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|x| replace(x, defs, used)).collect()),
        Formula::Not(x) => Formula::Not(Box::new(replace(x, defs, used))),
        Formula::Exists(vs, x) => Formula::Exists(vs.clone(), Box::new(replace(x, defs, used))),
    }
}

/// `exists Y F^p{X/t}` with every variable of the definition renamed fresh.
fn instantiate_def(def: &Definition, args: &[Term], used: &mut BTreeSet<Name>) -> Formula {
    let mut vars = BTreeSet::new();
    for conj in &def.disjuncts {
        for l in conj {
            l.vars(&mut vars);
        }
    }
    vars.extend(def.head_vars.iter().cloned());
    let mut ren = BTreeMap::new();
    for v in &vars {
        let f = fresh_name(v, used);
        used.insert(f.clone());
        ren.insert(v.clone(), f);
    }
    let head: BTreeSet<&Name> = def.head_vars.iter().collect();
    let rename = Subst::matcher(
        vars.iter()
            .map(|v| (v.clone(), Term::Var(ren[v].clone())))
            .collect::<Vec<_>>(),
    );
    let bind = Subst::matcher(
        def.head_vars
            .iter()
            .zip(args)
            .map(|(h, t)| (ren[h].clone(), t.clone()))
            .collect::<Vec<_>>(),
    );
    let local: Vec<Name> = vars
        .iter()
        .filter(|v| !head.contains(v))
        .map(|v| ren[v].clone())
        .collect();
    let disjuncts: Vec<Formula> = def
        .disjuncts
        .iter()
        .map(|conj| {
            Formula::And(
                conj.iter()
                    .map(|l| Formula::Lit(l.apply(&rename).apply(&bind)))
                    .collect(),
            )
        })
        .collect();
    let body = Formula::Or(disjuncts);
    if local.is_empty() {
        body
    } else {
        Formula::Exists(local, Box::new(body))
    }
}

/// Disjunctive normal form at the current level: each returned body is a
/// conjunction of general literals, the whole a disjunction. Variables
/// introduced by existentials at this level are recorded in `bound`; they
/// become free in the bodies and are quantified by the enclosing NEE.
fn to_bodies(
    f: &Formula,
    bound: &mut BTreeSet<Name>,
    used: &mut BTreeSet<Name>,
) -> Vec<Vec<GenLit>> {
    match f {
        Formula::True => vec![Vec::new()],
        Formula::False => Vec::new(),
        Formula::Lit(l) => vec![vec![GenLit::Lit(l.clone())]],
        Formula::And(fs) => {
            let mut acc: Vec<Vec<GenLit>> = vec![Vec::new()];
            for x in fs {
                let part = to_bodies(x, bound, used);
                acc = product(&acc, &part);
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        Formula::Or(fs) => fs.iter().flat_map(|x| to_bodies(x, bound, used)).collect(),
        Formula::Exists(vs, x) => {
            let (x, fresh) = rename_bound(vs, x, used);
            bound.extend(fresh);
            to_bodies(&x, bound, used)
        }
        Formula::Not(x) => {
            if let Formula::Lit(l) = &**x {
                return vec![vec![GenLit::Lit(l.negated())]];
            }
            if let Formula::Not(y) = &**x {
                return to_bodies(y, bound, used);
            }
            // not (B1 | B2 | ..) = not B1 and not B2 and ..
            let mut inner_bound = BTreeSet::new();
            let inner = to_bodies(x, &mut inner_bound, used);
            let mut acc: Vec<Vec<GenLit>> = vec![Vec::new()];
            for b in inner {
                let local: Vec<Name> = vars_in_order(&b)
                    .into_iter()
                    .filter(|v| inner_bound.contains(v))
                    .collect();
                let part: Vec<Vec<GenLit>> = if !local.is_empty() {
                    vec![vec![GenLit::Nee(Nee {
                        vars: local,
                        body: b,
                    })]]
                } else {
                    // not (L1 and L2 ..) splits into one body per conjunct
                    b.iter().map(|g| negate_closed(g, bound)).collect()
                };
                acc = product(&acc, &part);
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
    }
}

fn product(acc: &[Vec<GenLit>], part: &[Vec<GenLit>]) -> Vec<Vec<GenLit>> {
    let mut next = Vec::with_capacity(acc.len() * part.len());
    for a in acc {
        for p in part {
            let mut c = a.clone();
            c.extend(p.iter().cloned());
            next.push(c);
        }
    }
    next
}

/// `not g` as a conjunction, for a general literal with no local variables.
fn negate_closed(g: &GenLit, bound: &mut BTreeSet<Name>) -> Vec<GenLit> {
    match g {
        GenLit::Lit(l) => vec![GenLit::Lit(l.negated())],
        GenLit::Nee(n) => {
            // binders are globally fresh, so they can move up a level as is
            bound.extend(n.vars.iter().cloned());
            n.body.clone()
        }
    }
}

fn rename_bound(vs: &[Name], x: &Formula, used: &mut BTreeSet<Name>) -> (Formula, Vec<Name>) {
    let mut pairs = Vec::new();
    let mut fresh = Vec::new();
    for v in vs {
        let f = fresh_name(v, used);
        used.insert(f.clone());
        fresh.push(f.clone());
        pairs.push((v.clone(), Term::Var(f)));
    }
    let s = Subst::matcher(pairs);
    (subst_formula(x, &s), fresh)
}

fn subst_formula(f: &Formula, s: &Subst) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Lit(l) => Formula::Lit(l.apply(s)),
        Formula::And(fs) => Formula::And(fs.iter().map(|x| subst_formula(x, s)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|x| subst_formula(x, s)).collect()),
        Formula::Not(x) => Formula::Not(Box::new(subst_formula(x, s))),
        Formula::Exists(vs, x) => {
            Formula::Exists(vs.clone(), Box::new(subst_formula(x, &s.without(vs))))
        }
    }
}

fn vars_in_order(b: &[GenLit]) -> Vec<Name> {
    let mut out: Vec<Name> = Vec::new();
    for g in b {
        let mut vs = BTreeSet::new();
        g.free_vars(&mut vs);
        for v in vs {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}
