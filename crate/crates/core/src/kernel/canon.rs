//! Deterministic canonical forms.
//!
//! Literal order: database literals, then built-ins, then NEEs. Within a
//! group literals sort by predicate name, arity, polarity (positive first)
//! and argument text. Variables are renamed `V1, V2, ...` by first
//! occurrence. Because numbering and ordering depend on each other, the two
//! steps alternate until the printed form stops changing.

use std::collections::{BTreeMap, BTreeSet};

use super::clause::{Denial, GenLit, Nee, Theory};
use super::subst::{rename_body, standardize};
use super::term::{name, Literal, Name, Term};

const MAX_ROUNDS: usize = 8;

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    group: u8,
    pred: String,
    arity: usize,
    negative: bool,
    text: String,
}

fn term_text(t: &Term, erase: bool) -> String {
    match t {
        Term::Var(_) if erase => "_".to_string(),
        other => other.to_string(),
    }
}

fn body_text(body: &[GenLit], erase: bool) -> String {
    body.iter()
        .map(|g| key_of(g, erase).text)
        .collect::<Vec<_>>()
        .join(",")
}

fn key_of(g: &GenLit, erase: bool) -> Key {
    match g {
        GenLit::Lit(l) => {
            let args: Vec<String> = l.atom.args.iter().map(|t| term_text(t, erase)).collect();
            Key {
                group: if l.atom.is_equality() { 1 } else { 0 },
                pred: l.atom.pred.to_string(),
                arity: l.atom.arity(),
                negative: !l.positive,
                text: format!(
                    "{}{}({})",
                    if l.positive { "" } else { "~" },
                    l.atom.pred,
                    args.join(",")
                ),
            }
        }
        GenLit::Nee(n) => Key {
            group: 2,
            pred: String::new(),
            arity: n.vars.len(),
            negative: true,
            text: format!("!E{}[{}]", n.vars.len(), body_text(&n.body, erase)),
        },
    }
}

fn sort_body(body: &mut [GenLit], erase: bool) {
    for g in body.iter_mut() {
        if let GenLit::Nee(n) = g {
            sort_body(&mut n.body, erase);
        }
    }
    body.sort_by_cached_key(|g| key_of(g, erase));
}

fn number_vars(body: &[GenLit], map: &mut BTreeMap<Name, Name>) {
    for g in body {
        match g {
            GenLit::Lit(l) => {
                for t in &l.atom.args {
                    if let Term::Var(v) = t {
                        if !map.contains_key(v) {
                            let n = map.len() + 1;
                            map.insert(v.clone(), name(&format!("V{n}")));
                        }
                    }
                }
            }
            GenLit::Nee(n) => number_vars(&n.body, map),
        }
    }
}

fn order_quantifiers(body: &mut [GenLit]) {
    for g in body.iter_mut() {
        if let GenLit::Nee(n) = g {
            order_quantifiers(&mut n.body);
            n.vars.sort_by_key(|v| var_index(v));
        }
    }
}

fn var_index(v: &str) -> (usize, String) {
    match v.strip_prefix('V').and_then(|s| s.parse::<usize>().ok()) {
        Some(i) => (i, String::new()),
        None => (usize::MAX, v.to_string()),
    }
}

fn renumber(body: &[GenLit]) -> Vec<GenLit> {
    let mut map = BTreeMap::new();
    number_vars(body, &mut map);
    // quantified variables absent from their body still need a name
    collect_unused_binders(body, &mut map);
    rename_body(body, &map)
}

fn collect_unused_binders(body: &[GenLit], map: &mut BTreeMap<Name, Name>) {
    for g in body {
        if let GenLit::Nee(n) = g {
            for v in &n.vars {
                if !map.contains_key(v) {
                    let k = map.len() + 1;
                    map.insert(v.clone(), name(&format!("V{k}")));
                }
            }
            collect_unused_binders(&n.body, map);
        }
    }
}

/// Canonical variant of a denial.
pub fn canonicalize(d: &Denial) -> Denial {
    let d = standardize(d);
    let mut body = d.body;
    sort_body(&mut body, true);
    body = renumber(&body);
    for _ in 0..MAX_ROUNDS {
        let before = body.clone();
        sort_body(&mut body, false);
        body = renumber(&body);
        if body == before {
            break;
        }
    }
    order_quantifiers(&mut body);
    Denial { body }
}

/// Canonical NEE, as if it were the body of a denial whose free variables
/// are kept by name.
pub fn canonicalize_nee(n: &Nee) -> Nee {
    let mut body = n.body.clone();
    sort_body(&mut body, false);
    Nee {
        vars: n.vars.clone(),
        body,
    }
}

/// True iff the denials are variants of each other (modulo literal order).
pub fn is_variant(a: &Denial, b: &Denial) -> bool {
    canonicalize(a) == canonicalize(b)
}

/// Canonical theory: members canonicalized, sorted by printed form and
/// deduplicated.
pub fn canonical_theory(t: &[Denial]) -> Theory {
    let mut items: Vec<(String, Denial)> = t
        .iter()
        .map(|d| {
            let c = canonicalize(d);
            (c.to_string(), c)
        })
        .collect();
    items.sort_by(|a, b| a.0.cmp(&b.0));
    items.dedup_by(|a, b| a.0 == b.0);
    items.into_iter().map(|(_, d)| d).collect()
}

fn flat_literals<'a>(body: &'a [GenLit], depth: usize, out: &mut Vec<(usize, &'a Literal)>) {
    for g in body {
        match g {
            GenLit::Lit(l) => out.push((depth, l)),
            GenLit::Nee(n) => flat_literals(&n.body, depth + 1, out),
        }
    }
}

const NICE: [&str; 8] = ["X", "Y", "Z", "W", "T", "U", "S", "R"];

/// A variant of `d` with readable variable names, borrowed where possible
/// from aligned literals of the `hints` and otherwise picked from X, Y, Z...
pub fn present(d: &Denial, hints: &[Denial]) -> Denial {
    let d = standardize(d);
    let mut lits = Vec::new();
    flat_literals(&d.body, 0, &mut lits);
    let mut map: BTreeMap<Name, Name> = BTreeMap::new();
    let mut taken: BTreeSet<Name> = BTreeSet::new();
    for h in hints {
        let h = standardize(h);
        let mut hl = Vec::new();
        flat_literals(&h.body, 0, &mut hl);
        for (depth, l) in &lits {
            for (hd, k) in &hl {
                if hd != depth
                    || k.positive != l.positive
                    || k.atom.pred != l.atom.pred
                    || k.atom.args.len() != l.atom.args.len()
                {
                    continue;
                }
                let mut add: Vec<(Name, Name)> = Vec::new();
                let fits = l
                    .atom
                    .args
                    .iter()
                    .zip(&k.atom.args)
                    .all(|(a, b)| match (a, b) {
                        (Term::Var(v), Term::Var(w)) => match map.get(v) {
                            Some(m) => m == w,
                            None => {
                                !taken.contains(w)
                                    && var_index(w).0 == usize::MAX
                                    && add.iter().all(|(v2, w2)| (v2 == v) == (w2 == w))
                                    && {
                                        add.push((v.clone(), w.clone()));
                                        true
                                    }
                            }
                        },
                        _ => true,
                    });
                if fits && !add.is_empty() {
                    for (v, w) in add {
                        if let std::collections::btree_map::Entry::Vacant(e) = map.entry(v) {
                            taken.insert(w.clone());
                            e.insert(w);
                        }
                    }
                    break;
                }
            }
        }
    }
    let mut pool = NICE
        .iter()
        .map(|s| name(s))
        .chain((1..).map(|i| name(&format!("X{i}"))));
    for v in d.vars() {
        if map.contains_key(&v) {
            continue;
        }
        let w = pool.find(|w| !taken.contains(w)).expect("endless pool");
        taken.insert(w.clone());
        map.insert(v, w);
    }
    Denial {
        body: rename_body(&d.body, &map),
    }
}
