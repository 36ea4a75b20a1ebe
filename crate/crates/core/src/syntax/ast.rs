use std::collections::{BTreeMap, BTreeSet};

use crate::kernel::{fresh_name, name, Apply, Atom, Denial, Literal, Name, Subst, Term};

/// `head :- body`, body a conjunction of literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Literal>,
}

/// Disjunctive defining formula of an intensional predicate or of an
/// update: `pred(head_vars) <- D1 | D2 | ...`, each disjunct a conjunction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub pred: Name,
    pub head_vars: Vec<Name>,
    pub disjuncts: Vec<Vec<Literal>>,
}

impl Definition {
    pub fn arity(&self) -> usize {
        self.head_vars.len()
    }

    /// Variables of some disjunct that are not head variables.
    pub fn has_nondistinguished(&self) -> bool {
        let head: BTreeSet<&Name> = self.head_vars.iter().collect();
        self.disjuncts.iter().any(|conj| {
            let mut vs = BTreeSet::new();
            for l in conj {
                l.vars(&mut vs);
            }
            vs.iter().any(|v| !head.contains(v))
        })
    }

    pub fn body_predicates(&self) -> impl Iterator<Item = &Literal> {
        self.disjuncts.iter().flatten().filter(|l| l.is_database())
    }
}

/// A database schema: rules, integrity constraints and trusted hypotheses.
///
/// Hypotheses are extra denials known to hold before and after any update
/// (`hyp <- ...` in the concrete syntax).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    pub rules: Vec<Rule>,
    pub constraints: Vec<Denial>,
    pub hypotheses: Vec<Denial>,
}

impl Schema {
    pub fn intensional(&self) -> BTreeSet<Name> {
        self.rules.iter().map(|r| r.head.pred.clone()).collect()
    }

    pub fn is_intensional(&self, p: &str) -> bool {
        self.rules.iter().any(|r| &*r.head.pred == p)
    }

    /// Every database predicate with its arity.
    pub fn predicates(&self) -> BTreeMap<Name, usize> {
        let mut out = BTreeMap::new();
        for r in &self.rules {
            out.insert(r.head.pred.clone(), r.head.arity());
            for l in r.body.iter().filter(|l| l.is_database()) {
                out.insert(l.atom.pred.clone(), l.atom.arity());
            }
        }
        for d in self.constraints.iter().chain(&self.hypotheses) {
            for (p, n) in d.predicates() {
                out.insert(p, n);
            }
        }
        out
    }

    pub fn extensional(&self) -> BTreeMap<Name, usize> {
        let idb = self.intensional();
        self.predicates()
            .into_iter()
            .filter(|(p, _)| !idb.contains(p))
            .collect()
    }

    /// Rules grouped into one disjunctive definition per head predicate,
    /// in order of first appearance.
    pub fn definitions(&self) -> Vec<Definition> {
        let mut order: Vec<Name> = Vec::new();
        let mut groups: BTreeMap<Name, Vec<&Rule>> = BTreeMap::new();
        for r in &self.rules {
            if !groups.contains_key(&r.head.pred) {
                order.push(r.head.pred.clone());
            }
            groups.entry(r.head.pred.clone()).or_default().push(r);
        }
        order
            .into_iter()
            .map(|p| merge_rules(&groups[&p]))
            .collect()
    }

    pub fn definition(&self, p: &str) -> Option<Definition> {
        self.definitions().into_iter().find(|d| &*d.pred == p)
    }

    pub fn constants(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for d in self.constraints.iter().chain(&self.hypotheses) {
            out.extend(d.constants());
        }
        for r in &self.rules {
            for t in r
                .head
                .args
                .iter()
                .chain(r.body.iter().flat_map(|l| &l.atom.args))
            {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        }
        out
    }
}

fn merge_rules(rules: &[&Rule]) -> Definition {
    let first = rules[0];
    let arity = first.head.arity();
    let mut used = BTreeSet::new();
    let distinct_vars = {
        let vs: BTreeSet<_> = first.head.args.iter().filter_map(Term::as_var).collect();
        vs.len() == arity && first.head.args.iter().all(Term::is_var)
    };
    let head_vars: Vec<Name> = if distinct_vars {
        first
            .head
            .args
            .iter()
            .map(|t| t.as_var().unwrap().clone())
            .collect()
    } else {
        (0..arity)
            .map(|_| {
                let v = fresh_name("H", &used);
                used.insert(v.clone());
                v
            })
            .collect()
    };
    used.extend(head_vars.iter().cloned());
    let mut disjuncts = Vec::new();
    for r in rules {
        // rename the rule apart from the head variables
        let mut rule_vars = BTreeSet::new();
        r.head.vars(&mut rule_vars);
        for l in &r.body {
            l.vars(&mut rule_vars);
        }
        let mut avoid = used.clone();
        avoid.extend(rule_vars.iter().cloned());
        let mut ren = Subst::new();
        for v in &rule_vars {
            let fresh = fresh_name(v, &avoid);
            avoid.insert(fresh.clone());
            ren.bind(v.clone(), Term::Var(fresh));
        }
        let head = r.head.apply(&ren);
        let mut body: Vec<Literal> = r.body.apply(&ren);
        let mut bind = Subst::new();
        let mut eqs = Vec::new();
        for (hv, t) in head_vars.iter().zip(&head.args) {
            let t = bind.resolve(t);
            match &t {
                Term::Var(v) if !head_vars.contains(v) && !bind.contains(v) => {
                    bind.bind(v.clone(), Term::Var(hv.clone()));
                }
                _ => eqs.push(Literal::eq(Term::Var(hv.clone()), t)),
            }
        }
        body = body.apply(&bind);
        let eqs: Vec<Literal> = eqs.apply(&bind);
        body.extend(eqs);
        disjuncts.push(tidy_names(body, &head_vars));
    }
    Definition {
        pred: first.head.pred.clone(),
        head_vars,
        disjuncts,
    }
}

/// Renames the non-head variables of a disjunct back to short names.
fn tidy_names(body: Vec<Literal>, head: &[Name]) -> Vec<Literal> {
    let mut vs = BTreeSet::new();
    for l in &body {
        l.vars(&mut vs);
    }
    let mut used: BTreeSet<Name> = head.iter().cloned().collect();
    let mut ren = Subst::new();
    for v in vs.iter().filter(|v| !head.contains(v)) {
        let stem = v.trim_end_matches(|c: char| c.is_ascii_digit());
        let target = if !stem.is_empty() && !used.contains(stem) {
            name(stem)
        } else {
            fresh_name(v, &used)
        };
        used.insert(target.clone());
        if &target != v {
            ren.bind(v.clone(), Term::Var(target));
        }
    }
    body.apply(&ren)
}

pub type UpdateEntry = Definition;

/// A set of predicate updates `p(X..) <= F`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Update {
    pub entries: Vec<UpdateEntry>,
}

impl Update {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, p: &str) -> Option<&UpdateEntry> {
        self.entries.iter().find(|e| &*e.pred == p)
    }

    pub fn params(&self) -> BTreeSet<Name> {
        self.entries
            .iter()
            .flat_map(|e| e.disjuncts.iter().flatten())
            .flat_map(|l| l.atom.args.iter())
            .filter_map(|t| match t {
                Term::Param(p) => Some(p.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn constants(&self) -> BTreeSet<Name> {
        self.entries
            .iter()
            .flat_map(|e| e.disjuncts.iter().flatten())
            .flat_map(|l| l.atom.args.iter())
            .filter_map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                _ => None,
            })
            .collect()
    }

    /// Insertion `p(t..)`: `p(X..) <= p(X..) | X.. = t..`.
    pub fn insertion(atom: &Atom) -> UpdateEntry {
        let vars = head_vars_for(atom.arity());
        let head_terms: Vec<Term> = vars.iter().map(|v| Term::Var(v.clone())).collect();
        let keep = vec![Literal::pos(Atom {
            pred: atom.pred.clone(),
            args: head_terms.clone(),
        })];
        let pin: Vec<Literal> = head_terms
            .iter()
            .zip(&atom.args)
            .map(|(x, t)| Literal::eq(x.clone(), t.clone()))
            .collect();
        Definition {
            pred: atom.pred.clone(),
            head_vars: vars,
            disjuncts: vec![keep, pin],
        }
    }

    /// Deletion `not p(t..)`: `p(X..) <= p(X..) & X.. != t..`, with the
    /// vector non-equality spread over one disjunct per position.
    pub fn deletion(atom: &Atom) -> UpdateEntry {
        let vars = head_vars_for(atom.arity());
        let head_terms: Vec<Term> = vars.iter().map(|v| Term::Var(v.clone())).collect();
        let keep = Literal::pos(Atom {
            pred: atom.pred.clone(),
            args: head_terms.clone(),
        });
        let disjuncts = if atom.arity() == 0 {
            Vec::new()
        } else {
            head_terms
                .iter()
                .zip(&atom.args)
                .map(|(x, t)| vec![keep.clone(), Literal::neq(x.clone(), t.clone())])
                .collect()
        };
        Definition {
            pred: atom.pred.clone(),
            head_vars: vars,
            disjuncts,
        }
    }
}

fn head_vars_for(n: usize) -> Vec<Name> {
    if n == 1 {
        return vec![name("X")];
    }
    (1..=n).map(|i| name(&format!("X{i}"))).collect()
}
