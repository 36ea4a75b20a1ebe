//! Seeded generators of denials, schemata, updates and databases.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use icsimp::kernel::{name, Atom, Denial, Name, Term};
use icsimp::oracle::{DatabaseInstance, ParamAssignment};
use icsimp::syntax::{parse_denial, parse_schema, parse_update, Schema, Update};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const DOMAIN: [&str; 3] = ["a", "b", "c"];

pub fn domain() -> Vec<Name> {
    DOMAIN.iter().map(|c| name(c)).collect()
}

/// Extensional predicates of generated denials.
pub const EDB: [(&str, usize); 3] = [("p", 1), ("q", 1), ("r", 2)];

fn pick<'a, T>(r: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    xs.choose(r).unwrap()
}

fn term(r: &mut ChaCha8Rng, vars: &[String], consts: &[&str]) -> String {
    if !vars.is_empty() && r.gen_bool(0.75) {
        pick(r, vars).clone()
    } else {
        pick(r, consts).to_string()
    }
}

fn atom(r: &mut ChaCha8Rng, preds: &[(&str, usize)], vars: &[String], consts: &[&str]) -> String {
    let (p, n) = *pick(r, preds);
    let args: Vec<String> = (0..n).map(|_| term(r, vars, consts)).collect();
    format!("{p}({})", args.join(","))
}

/// Conjunction text over `outer` variables plus fresh ones named
/// `{stem}1..`, nesting NEEs up to `depth`.
fn body(
    r: &mut ChaCha8Rng,
    outer: &[String],
    stem: &str,
    depth: usize,
    consts: &[&str],
) -> (Vec<String>, Vec<String>) {
    let locals: Vec<String> = (1..=r.gen_range(1..=2))
        .map(|i| format!("{stem}{i}"))
        .collect();
    let mut vars: Vec<String> = outer.to_vec();
    vars.extend(locals.iter().cloned());
    let mut lits = Vec::new();
    // positive literals mention every local
    for l in &locals {
        let (p, n) = *pick(r, &EDB);
        let mut args: Vec<String> = (0..n).map(|_| term(r, &vars, consts)).collect();
        let k = r.gen_range(0..n);
        args[k] = l.clone();
        lits.push(format!("{p}({})", args.join(",")));
    }
    if r.gen_bool(0.4) {
        lits.push(atom(r, &EDB, &vars, consts));
    }
    if r.gen_bool(0.5) {
        let op = if r.gen_bool(0.5) { "=" } else { "!=" };
        lits.push(format!(
            "{} {op} {}",
            pick(r, &vars),
            term(r, &vars, consts)
        ));
    }
    if r.gen_bool(0.3) {
        lits.push(format!("not {}", atom(r, &EDB, &vars, consts)));
    }
    if depth > 0 && r.gen_bool(0.5) {
        let inner_stem = if stem == "U" { "W" } else { "U" };
        let (iv, ib) = body(r, &vars, inner_stem, depth - 1, consts);
        lits.push(format!("not exists({})[{}]", iv.join(","), ib.join(", ")));
    }
    lits.shuffle(r);
    (locals, lits)
}

/// A random safe extended denial over p/1, q/1, r/2 with constants a, b
/// and parameter $x.
pub fn denial(r: &mut ChaCha8Rng, nee_depth: usize) -> Denial {
    loop {
        let consts = ["a", "b", "$x"];
        let (_, mut lits) = body(r, &[], "X", 0, &consts);
        let vars: Vec<String> = ["X1", "X2"]
            .iter()
            .filter(|v| lits.iter().any(|l| l.contains(*v)))
            .map(|v| v.to_string())
            .collect();
        for _ in 0..r.gen_range(0..=2) {
            if nee_depth == 0 {
                break;
            }
            let (iv, ib) = body(r, &vars, "U", nee_depth - 1, &consts);
            lits.push(format!("not exists({})[{}]", iv.join(","), ib.join(", ")));
        }
        let src = format!("<- {}.", lits.join(", "));
        if let Ok(d) = parse_denial(&src) {
            return d;
        }
    }
}

/// A plain denial (no NEEs, no negative database literals).
pub fn plain_denial(r: &mut ChaCha8Rng) -> Denial {
    loop {
        let d = denial(r, 0);
        if d.literals().all(|l| l.positive || l.is_builtin()) {
            return d;
        }
    }
}

pub fn database(r: &mut ChaCha8Rng, preds: &[(&str, usize)]) -> DatabaseInstance {
    let mut facts = BTreeSet::new();
    for (p, n) in preds {
        let tuples = DOMAIN.len().pow(*n as u32);
        for i in 0..tuples {
            if r.gen_bool(0.4) {
                let mut k = i;
                let args = (0..*n)
                    .map(|_| {
                        let c = DOMAIN[k % DOMAIN.len()];
                        k /= DOMAIN.len();
                        Term::constant(c)
                    })
                    .collect();
                facts.insert(Atom::new(p, args));
            }
        }
    }
    DatabaseInstance {
        domain: domain(),
        edb: facts,
    }
}

pub fn params(r: &mut ChaCha8Rng, names: &[&str]) -> ParamAssignment {
    names
        .iter()
        .map(|p| (name(p), name(pick(r, &DOMAIN))))
        .collect()
}

/// Extensional predicates of generated schemata: 15 ground atoms over a
/// 3-constant domain.
pub const SCHEMA_EDB: [(&str, usize); 3] = [("e", 2), ("p", 1), ("q", 1)];

/// Positive literals from `avail`; negation only over `negatable`.
fn rule_body(
    r: &mut ChaCha8Rng,
    head_vars: &[&str],
    avail: &[(&str, usize)],
    negatable: &[(&str, usize)],
) -> Vec<String> {
    let mut vars: Vec<String> = head_vars.iter().map(|v| v.to_string()).collect();
    if r.gen_bool(0.5) {
        vars.push("Z".into());
    }
    let mut lits = Vec::new();
    for v in vars.clone() {
        let (p, n) = *pick(r, avail);
        let mut args: Vec<String> = (0..n).map(|_| term(r, &vars, &["a"])).collect();
        args[r.gen_range(0..n)] = v;
        lits.push(format!("{p}({})", args.join(",")));
    }
    if !negatable.is_empty() && r.gen_bool(0.5) {
        lits.push(format!("not {}", atom(r, negatable, &vars, &["a"])));
    }
    if r.gen_bool(0.25) {
        let x = pick(r, &vars).clone();
        let others: Vec<String> = vars.iter().filter(|v| **v != x).cloned().collect();
        lits.push(format!("{x} != {}", term(r, &others, &["a", "b"])));
    }
    lits.shuffle(r);
    lits
}

/// A random stratified, non-recursive schema with a random update, as
/// source text and parsed. Sizes are kept to those of textbook examples:
/// at most two intensional predicates, one constraint, and negation only
/// in the constraint.
pub fn schema_case(r: &mut ChaCha8Rng) -> (String, String, Schema, Update) {
    loop {
        let mut src = String::new();
        let mut avail: Vec<(&str, usize)> = SCHEMA_EDB.to_vec();
        let idb: [(&str, usize); 3] = [("s", 1), ("w", 1), ("v", 2)];
        for &(h, n) in idb.iter().take(r.gen_range(1..=2)) {
            let head_vars: &[&str] = if n == 1 { &["X"] } else { &["X", "Y"] };
            for _ in 0..r.gen_range(1..=2) {
                let b = rule_body(r, head_vars, &avail, &[]);
                src += &format!("{h}({}) :- {}.\n", head_vars.join(","), b.join(", "));
            }
            avail.push((h, n));
        }
        let b = rule_body(r, &["X"], &avail, &avail);
        src += &format!("<- {}.\n", b.join(", "));
        let upd = match r.gen_range(0..7) {
            0 => "add p($x).".to_string(),
            1 => "del q($x).".to_string(),
            2 => "add e($x,a).".to_string(),
            3 => "del e(a,$x).".to_string(),
            4 => "update q(X) <= q(X) | p(X).".to_string(),
            5 => "update e(X,Y) <= e(X,Y) & X != $x.".to_string(),
            _ => "add q(a).\ndel p(b).".to_string(),
        };
        let (Ok(s), Ok(u)) = (parse_schema(&src), parse_update(&upd)) else {
            continue;
        };
        if icsimp::syntax::check_update(&s, &u).is_err() {
            continue;
        }
        if !icsimp::analysis::check_stratified(&s).stratified {
            continue;
        }
        return (src, upd, s, u);
    }
}
