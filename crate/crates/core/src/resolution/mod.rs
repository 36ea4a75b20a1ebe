//! Binary resolution over extended denials and the bounded derivation
//! relation used by the optimizer.
//!
//! Resolution acts on level-0 literals; NEEs are carried along. One NEE
//! case is supported: when `<- A, not exists(Z)[L, R]` meets `<- C, K`
//! and `K` matches `L` without touching `Z`, the NEE is true whenever
//! `C` holds, which gives `<- A, C`.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::rc::Rc;

use crate::kernel::{
    canonicalize, mgu, standardize, standardize_apart, unify_atoms_with, Apply, Atom, Denial,
    GenLit, Literal, Name, Subst, Term,
};
use crate::rewrite::{expand, extended_subsumes, reduce};

/// Limits on a derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerivationBudget {
    /// Largest admitted clause, in general literals.
    pub max_literals: usize,
    /// Saturation cap on stored clauses.
    pub max_clauses: usize,
}

pub const DEFAULT_MAX_CLAUSES: usize = 5_000;

impl DerivationBudget {
    /// The size of the largest expanded hypothesis.
    pub fn for_hypotheses(hyps: &[Denial]) -> DerivationBudget {
        DerivationBudget {
            max_literals: hyps.iter().map(|h| expand(h).size()).max().unwrap_or(0),
            max_clauses: DEFAULT_MAX_CLAUSES,
        }
    }
}

/// Unifiers of two atoms, trying both orientations of an equality.
fn atom_unifiers(a: &Atom, b: &Atom) -> Vec<Subst> {
    let mut out = Vec::new();
    if let Some(s) = mgu(a, b) {
        out.push(s);
    }
    if a.is_equality() && b.is_equality() {
        let flipped = Atom {
            pred: b.pred.clone(),
            args: vec![b.args[1].clone(), b.args[0].clone()],
        };
        if let Some(s) = mgu(a, &flipped) {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

fn rest(body: &[GenLit], i: usize) -> Vec<GenLit> {
    body.iter()
        .enumerate()
        .filter(|(k, _)| *k != i)
        .map(|(_, g)| g.clone())
        .collect()
}

/// Binary resolvents of `phi1` and `phi2` on the general literals at
/// positions `i` and `j`. Empty when the pair does not resolve.
pub fn binary_resolvents(phi1: &Denial, phi2: &Denial, i: usize, j: usize) -> Vec<Denial> {
    let phi1 = standardize(phi1);
    let phi2 = standardize_apart(&phi1, phi2);
    let (Some(g1), Some(g2)) = (phi1.body.get(i), phi2.body.get(j)) else {
        return Vec::new();
    };
    match (g1, g2) {
        (GenLit::Lit(l1), GenLit::Lit(l2)) if l1.positive != l2.positive => {
            atom_unifiers(&l1.atom, &l2.atom)
                .into_iter()
                .map(|s| {
                    let mut body = rest(&phi1.body, i);
                    body.extend(rest(&phi2.body, j));
                    Denial::new(body.apply(&s))
                })
                .collect()
        }
        (GenLit::Nee(_), GenLit::Lit(_)) => nee_resolvents(&phi1, i, &phi2, j),
        (GenLit::Lit(_), GenLit::Nee(_)) => nee_resolvents(&phi2, j, &phi1, i),
        _ => Vec::new(),
    }
}

/// `<- A, not exists(Z)[.., L, ..]` with `<- C, K`, where `K` and `L` have
/// the same polarity and some unifier leaves `Z` unbound and out of `C`.
fn nee_resolvents(host: &Denial, i: usize, other: &Denial, j: usize) -> Vec<Denial> {
    let (GenLit::Nee(n), GenLit::Lit(k)) = (&host.body[i], &other.body[j]) else {
        return Vec::new();
    };
    let z: BTreeSet<Name> = n.vars.iter().cloned().collect();
    // Z is frozen as parameters so that unification cannot bind it
    let freeze = Subst::matcher(
        n.vars
            .iter()
            .map(|v| (v.clone(), Term::Param(frozen(v))))
            .collect::<Vec<_>>(),
    );
    let thaw = |t: &Term| match t {
        Term::Param(p) if p.starts_with('#') => Term::Var(crate::kernel::name(&p[1..])),
        other => other.clone(),
    };
    let mut out = Vec::new();
    for g in &n.body {
        let GenLit::Lit(l) = g else { continue };
        if l.positive != k.positive {
            continue;
        }
        for s in atom_unifiers(&l.atom.apply(&freeze), &k.atom) {
            let s = Subst::matcher(
                s.iter()
                    .map(|(v, t)| (v.clone(), thaw(t)))
                    .collect::<Vec<_>>(),
            );
            let mut body = rest(&host.body, i);
            body.extend(rest(&other.body, j));
            let body: Vec<GenLit> = body.apply(&s);
            let mut vars = BTreeSet::new();
            for g in &body {
                g.free_vars(&mut vars);
            }
            if vars.is_disjoint(&z) {
                out.push(Denial::new(body));
            }
        }
    }
    out
}

fn frozen(v: &str) -> Name {
    crate::kernel::name(&format!("#{v}"))
}

/// All binary resolvents of two clauses.
pub fn all_resolvents(phi1: &Denial, phi2: &Denial) -> Vec<Denial> {
    let phi1 = standardize(phi1);
    let phi2 = standardize_apart(&phi1, phi2);
    let mut out = Vec::new();
    for i in 0..phi1.body.len() {
        for j in 0..phi2.body.len() {
            out.extend(binary_resolvents(&phi1, &phi2, i, j));
        }
    }
    out
}

/// Result of a bounded saturation.
#[derive(Clone, Debug, Default)]
pub struct Derivation {
    /// The reduced clause that met the goal.
    pub found: Option<Denial>,
    /// Clauses stored during saturation.
    pub clauses: usize,
    pub resolvents: usize,
    pub cap_hit: bool,
    /// Derivation of `found`, one clause per line, parents first.
    pub proof: Vec<String>,
}

struct Node {
    clause: Denial,
    parents: Option<(usize, usize)>,
}

fn proof_of(nodes: &[Node], k: usize) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    fn walk(nodes: &[Node], k: usize, seen: &mut BTreeSet<usize>, order: &mut Vec<usize>) {
        if !seen.insert(k) {
            return;
        }
        if let Some((a, b)) = nodes[k].parents {
            walk(nodes, a, seen, order);
            walk(nodes, b, seen, order);
        }
        order.push(k);
    }
    walk(nodes, k, &mut seen, &mut order);
    order
        .into_iter()
        .map(|k| match nodes[k].parents {
            None => format!("[{k}] {} (hypothesis)", nodes[k].clause),
            Some((a, b)) => format!("[{k}] {} (from {a}, {b})", nodes[k].clause),
        })
        .collect()
}

/// Reductions of a clause, each with its canonical expansion.
type Reduced = Rc<Vec<(Denial, Denial)>>;

thread_local! {
    static REDUCED: RefCell<HashMap<String, Reduced>> = RefCell::default();
}

const REDUCED_CACHE: usize = 100_000;

/// The reductions of `clause`, each paired with its canonical expansion.
/// Cached per thread: the saturations of one simplification repeat many
/// resolvents.
fn reduced_expanded(clause: &Denial, key: String) -> Reduced {
    if let Some(hit) = REDUCED.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let out: Reduced = Rc::new(
        reduce(clause)
            .into_iter()
            .map(|r| {
                let e = canonicalize(&expand(&r));
                (r, e)
            })
            .collect(),
    );
    REDUCED.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= REDUCED_CACHE {
            c.clear();
        }
        c.insert(key, out.clone());
    });
    out
}

/// Saturates the expanded hypotheses under binary resolution within the
/// budget, stopping at the first reduced clause satisfying `goal`.
pub fn saturate(
    hyps: &[Denial],
    budget: DerivationBudget,
    goal: &dyn Fn(&Denial) -> bool,
) -> Derivation {
    let mut d = Derivation::default();
    let mut nodes: Vec<Node> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    // resolvents already reduced, before reduction
    let mut raw: HashSet<String> = HashSet::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    // returns Some(goal node) when the goal is met
    let mut admit = |clause: Denial,
                     parents: Option<(usize, usize)>,
                     nodes: &mut Vec<Node>,
                     queue: &mut VecDeque<usize>,
                     d: &mut Derivation|
     -> Option<Denial> {
        let key = canonicalize(&clause).to_string();
        if parents.is_some() && !raw.insert(key.clone()) {
            return None;
        }
        for (r, e) in reduced_expanded(&clause, key).iter() {
            if goal(r) {
                nodes.push(Node {
                    clause: r.clone(),
                    parents,
                });
                return Some(r.clone());
            }
            if parents.is_some() && e.size() > budget.max_literals {
                continue;
            }
            if !seen.insert(e.to_string()) {
                continue;
            }
            if nodes.iter().any(|n| extended_subsumes(&n.clause, e)) {
                continue;
            }
            if nodes.len() >= budget.max_clauses {
                d.cap_hit = true;
                continue;
            }
            nodes.push(Node {
                clause: e.clone(),
                parents,
            });
            queue.push_back(nodes.len() - 1);
        }
        None
    };

    for h in hyps {
        if let Some(f) = admit(h.clone(), None, &mut nodes, &mut queue, &mut d) {
            d.proof = proof_of(&nodes, nodes.len() - 1);
            d.found = Some(f);
            d.clauses = nodes.len();
            return d;
        }
    }
    while let Some(k) = queue.pop_front() {
        for other in 0..=k {
            let (a, b) = (nodes[k].clause.clone(), nodes[other].clause.clone());
            for r in all_resolvents(&a, &b) {
                d.resolvents += 1;
                if let Some(f) = admit(r, Some((other, k)), &mut nodes, &mut queue, &mut d) {
                    d.proof = proof_of(&nodes, nodes.len() - 1);
                    d.found = Some(f);
                    d.clauses = nodes.len();
                    return d;
                }
            }
            if d.cap_hit {
                break;
            }
        }
        if d.cap_hit {
            break;
        }
    }
    d.clauses = nodes.len();
    d
}

/// `gamma |-fbr phi` with the default budget, reporting the derivation.
pub fn derive_fbr_with(gamma: &[Denial], phi: &Denial) -> Derivation {
    let budget = DerivationBudget::for_hypotheses(gamma);
    saturate(gamma, budget, &|psi| extended_subsumes(psi, phi))
}

/// True when a clause derivable from `gamma` within the size bound reduces
/// to something extended-subsuming `phi`. Sound: then `gamma` entails `phi`.
pub fn derive_fbr(gamma: &[Denial], phi: &Denial) -> bool {
    derive_fbr_with(gamma, phi).found.is_some()
}

/// Literal-level helper: `<- l1` and `<- l2` clash as complementary.
pub fn complementary(l1: &Literal, l2: &Literal) -> bool {
    l1.positive != l2.positive && unify_atoms_with(&l1.atom, &l2.atom, &Subst::new()).is_some()
}
