//! Compiled evaluation over an explicit finite domain.
//!
//! Constants are interned as small integers, each relation is a bitset
//! over `domain^arity`, and every body is compiled into a plan of
//! variable bindings and checks placed as early as their variables allow.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::kernel::{Atom, Denial, GenLit, Literal, Name, Term};
use crate::syntax::{Definition, Schema};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CTerm {
    Var(u16),
    Const(u8),
    Param(u16),
}

#[derive(Clone, Debug)]
struct CLit {
    /// `None` is equality.
    pred: Option<usize>,
    args: Vec<CTerm>,
    positive: bool,
}

#[derive(Clone, Debug)]
enum Step {
    Bind(u16),
    Check(CLit),
    Nee(Vec<Step>),
}

/// Relation extents over a fixed domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interp {
    pub(crate) rels: Vec<Vec<u64>>,
}

impl Interp {
    #[inline]
    pub(crate) fn get(&self, pred: usize, idx: usize) -> bool {
        self.rels[pred][idx / 64] >> (idx % 64) & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, pred: usize, idx: usize) -> bool {
        let w = &mut self.rels[pred][idx / 64];
        let bit = 1u64 << (idx % 64);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    pub(crate) fn clear(&mut self, pred: usize) {
        for w in self.rels[pred].iter_mut() {
            *w = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("constant {0} is not in the domain")]
    UnknownConstant(String),
    #[error("the schema is not stratified")]
    Unstratified,
    #[error("parameter {0} has no value")]
    MissingParam(String),
    #[error("{edbs} databases to enumerate exceed the cap of {cap}; allow subsampling or shrink the domain")]
    TooLarge { edbs: u128, cap: u64 },
    #[error("domain too large for the evaluator (at most 255 constants)")]
    DomainTooLarge,
}

/// Predicates, constants and parameters of everything evaluated together.
#[derive(Clone, Debug)]
pub struct Signature {
    pub domain: Vec<Name>,
    consts: HashMap<Name, u8>,
    pub preds: Vec<(Name, usize)>,
    pred_ids: HashMap<Name, usize>,
    pub params: Vec<Name>,
    param_ids: HashMap<Name, u16>,
}

impl Signature {
    pub fn new(
        domain: &[Name],
        preds: &BTreeMap<Name, usize>,
        params: &BTreeSet<Name>,
    ) -> Result<Signature, OracleError> {
        if domain.len() > 255 {
            return Err(OracleError::DomainTooLarge);
        }
        let consts = domain
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i as u8))
            .collect();
        let preds_v: Vec<(Name, usize)> = preds.iter().map(|(p, a)| (p.clone(), *a)).collect();
        let pred_ids = preds_v
            .iter()
            .enumerate()
            .map(|(i, (p, _))| (p.clone(), i))
            .collect();
        let params_v: Vec<Name> = params.iter().cloned().collect();
        let param_ids = params_v
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u16))
            .collect();
        Ok(Signature {
            domain: domain.to_vec(),
            consts,
            preds: preds_v,
            pred_ids,
            params: params_v,
            param_ids,
        })
    }

    pub fn n(&self) -> usize {
        self.domain.len()
    }

    pub fn pred_id(&self, p: &str) -> Option<usize> {
        self.pred_ids.get(p).copied()
    }

    pub fn arity(&self, pred: usize) -> usize {
        self.preds[pred].1
    }

    pub fn tuples(&self, pred: usize) -> usize {
        self.n().pow(self.arity(pred) as u32)
    }

    pub fn empty_interp(&self) -> Interp {
        Interp {
            rels: (0..self.preds.len())
                .map(|p| vec![0u64; self.tuples(p).div_ceil(64).max(1)])
                .collect(),
        }
    }

    pub fn const_id(&self, c: &str) -> Option<u8> {
        self.consts.get(c).copied()
    }

    pub(crate) fn tuple_index(&self, args: &[u8]) -> usize {
        let n = self.n();
        args.iter().rev().fold(0, |acc, &a| acc * n + a as usize)
    }

    pub(crate) fn decode(&self, mut idx: usize, arity: usize) -> Vec<u8> {
        let n = self.n();
        (0..arity)
            .map(|_| {
                let a = (idx % n) as u8;
                idx /= n;
                a
            })
            .collect()
    }

    /// Ground atom at a tuple index.
    pub fn atom(&self, pred: usize, idx: usize) -> Atom {
        let (p, arity) = &self.preds[pred];
        let args = self
            .decode(idx, *arity)
            .into_iter()
            .map(|c| Term::Const(self.domain[c as usize].clone()))
            .collect();
        Atom {
            pred: p.clone(),
            args,
        }
    }

    pub fn facts(&self, m: &Interp) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for p in 0..self.preds.len() {
            for idx in 0..self.tuples(p) {
                if m.get(p, idx) {
                    out.insert(self.atom(p, idx));
                }
            }
        }
        out
    }

    pub fn interp_of(&self, facts: &BTreeSet<Atom>) -> Result<Interp, OracleError> {
        let mut m = self.empty_interp();
        for a in facts {
            let Some(p) = self.pred_id(&a.pred) else {
                continue;
            };
            let mut args = Vec::with_capacity(a.args.len());
            for t in &a.args {
                match t {
                    Term::Const(c) => args.push(
                        self.const_id(c)
                            .ok_or_else(|| OracleError::UnknownConstant(c.to_string()))?,
                    ),
                    other => return Err(OracleError::UnknownConstant(other.to_string())),
                }
            }
            m.set(p, self.tuple_index(&args));
        }
        Ok(m)
    }

    /// Parameter values in signature order.
    pub fn param_values(&self, pa: &BTreeMap<Name, Name>) -> Result<Vec<u8>, OracleError> {
        self.params
            .iter()
            .map(|p| {
                let c = pa
                    .get(p)
                    .ok_or_else(|| OracleError::MissingParam(p.to_string()))?;
                self.const_id(c)
                    .ok_or_else(|| OracleError::UnknownConstant(c.to_string()))
            })
            .collect()
    }

    /// Every total assignment of the parameters to domain constants.
    pub fn all_param_values(&self) -> Vec<Vec<u8>> {
        let n = self.n() as u8;
        let mut out = vec![Vec::new()];
        for _ in &self.params {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..n).map(move |c| {
                        let mut w = v.clone();
                        w.push(c);
                        w
                    })
                })
                .collect();
        }
        out
    }

    pub fn param_map(&self, vals: &[u8]) -> BTreeMap<Name, Name> {
        self.params
            .iter()
            .zip(vals)
            .map(|(p, &c)| (p.clone(), self.domain[c as usize].clone()))
            .collect()
    }
}

struct Compiler<'a> {
    sig: &'a Signature,
    slots: HashMap<Name, u16>,
}

impl<'a> Compiler<'a> {
    fn slot(&mut self, v: &Name) -> u16 {
        let k = self.slots.len() as u16;
        *self.slots.entry(v.clone()).or_insert(k)
    }

    fn term(&mut self, t: &Term) -> Result<CTerm, OracleError> {
        Ok(match t {
            Term::Var(v) => CTerm::Var(self.slot(v)),
            Term::Const(c) => CTerm::Const(
                self.sig
                    .const_id(c)
                    .ok_or_else(|| OracleError::UnknownConstant(c.to_string()))?,
            ),
            Term::Param(p) => CTerm::Param(
                *self
                    .sig
                    .param_ids
                    .get(p)
                    .ok_or_else(|| OracleError::MissingParam(p.to_string()))?,
            ),
        })
    }

    fn lit(&mut self, l: &Literal) -> Result<CLit, OracleError> {
        let pred = if l.is_builtin() {
            None
        } else {
            Some(
                self.sig
                    .pred_id(&l.atom.pred)
                    .expect("predicate missing from signature"),
            )
        };
        let args = l
            .atom
            .args
            .iter()
            .map(|t| self.term(t))
            .collect::<Result<_, _>>()?;
        Ok(CLit {
            pred,
            args,
            positive: l.positive,
        })
    }

    /// Plan for a body whose variables in `bound` are already bound.
    fn plan(&mut self, body: &[GenLit], bound: &BTreeSet<Name>) -> Result<Vec<Step>, OracleError> {
        let mut own: Vec<Name> = Vec::new();
        // bind variables of positive database literals first
        let mut order: Vec<&GenLit> = body.iter().collect();
        order.sort_by_key(|g| match g {
            GenLit::Lit(l) if l.positive && l.is_database() => 0,
            GenLit::Lit(_) => 1,
            GenLit::Nee(_) => 2,
        });
        for g in &order {
            let mut vs = BTreeSet::new();
            g.free_vars(&mut vs);
            let mut ordered: Vec<Name> = Vec::new();
            if let GenLit::Lit(l) = g {
                for t in &l.atom.args {
                    if let Term::Var(v) = t {
                        if !ordered.contains(v) {
                            ordered.push(v.clone());
                        }
                    }
                }
            } else {
                ordered.extend(vs.iter().cloned());
            }
            for v in ordered {
                if !bound.contains(&v) && !own.contains(&v) {
                    own.push(v);
                }
            }
        }
        let mut steps = Vec::new();
        let mut cur = bound.clone();
        let mut pending: Vec<&GenLit> = order;
        let place = |cur: &BTreeSet<Name>,
                     pending: &mut Vec<&GenLit>,
                     steps: &mut Vec<Step>,
                     me: &mut Compiler|
         -> Result<(), OracleError> {
            let mut keep = Vec::new();
            for g in pending.drain(..) {
                let mut vs = BTreeSet::new();
                g.free_vars(&mut vs);
                if vs.is_subset(cur) {
                    match g {
                        GenLit::Lit(l) => steps.push(Step::Check(me.lit(l)?)),
                        GenLit::Nee(n) => {
                            let inner = me.plan(&n.body, cur)?;
                            steps.push(Step::Nee(inner));
                        }
                    }
                } else {
                    keep.push(g);
                }
            }
            *pending = keep;
            Ok(())
        };
        place(&cur, &mut pending, &mut steps, self)?;
        for v in own {
            steps.push(Step::Bind(self.slot(&v)));
            cur.insert(v);
            place(&cur, &mut pending, &mut steps, self)?;
        }
        debug_assert!(pending.is_empty());
        Ok(steps)
    }
}

struct Ctx<'a> {
    n: u8,
    m: &'a Interp,
    params: &'a [u8],
}

impl Ctx<'_> {
    #[inline]
    fn val(&self, t: CTerm, env: &[u8]) -> u8 {
        match t {
            CTerm::Var(v) => env[v as usize],
            CTerm::Const(c) => c,
            CTerm::Param(p) => self.params[p as usize],
        }
    }

    fn check(&self, l: &CLit, env: &[u8]) -> bool {
        let holds = match l.pred {
            None => self.val(l.args[0], env) == self.val(l.args[1], env),
            Some(p) => {
                let n = self.n as usize;
                let mut idx = 0usize;
                for t in l.args.iter().rev() {
                    idx = idx * n + self.val(*t, env) as usize;
                }
                self.m.get(p, idx)
            }
        };
        holds == l.positive
    }

    fn run(&self, steps: &[Step], env: &mut [u8]) -> bool {
        let Some((first, rest)) = steps.split_first() else {
            return true;
        };
        match first {
            Step::Bind(v) => {
                for c in 0..self.n {
                    env[*v as usize] = c;
                    if self.run(rest, env) {
                        return true;
                    }
                }
                false
            }
            Step::Check(l) => self.check(l, env) && self.run(rest, env),
            Step::Nee(inner) => !self.run(inner, env) && self.run(rest, env),
        }
    }
}

/// A compiled denial.
#[derive(Clone, Debug)]
pub struct CDenial {
    steps: Vec<Step>,
    slots: usize,
}

/// A compiled defining formula.
#[derive(Clone, Debug)]
struct CDef {
    pred: usize,
    head: Vec<u16>,
    disjuncts: Vec<Vec<Step>>,
    slots: usize,
}

fn compile_denial(sig: &Signature, d: &Denial) -> Result<CDenial, OracleError> {
    let d = crate::kernel::standardize(d);
    let mut c = Compiler {
        sig,
        slots: HashMap::new(),
    };
    let steps = c.plan(&d.body, &BTreeSet::new())?;
    Ok(CDenial {
        steps,
        slots: c.slots.len(),
    })
}

fn compile_def(sig: &Signature, def: &Definition) -> Result<CDef, OracleError> {
    let mut c = Compiler {
        sig,
        slots: HashMap::new(),
    };
    let head: Vec<u16> = def.head_vars.iter().map(|v| c.slot(v)).collect();
    let bound: BTreeSet<Name> = def.head_vars.iter().cloned().collect();
    let mut disjuncts = Vec::new();
    for conj in &def.disjuncts {
        let body: Vec<GenLit> = conj.iter().cloned().map(GenLit::Lit).collect();
        disjuncts.push(c.plan(&body, &bound)?);
    }
    Ok(CDef {
        pred: sig.pred_id(&def.pred).expect("defined predicate missing"),
        head,
        disjuncts,
        slots: c.slots.len(),
    })
}

/// Compiled theory.
#[derive(Clone, Debug)]
pub struct CTheory {
    items: Vec<CDenial>,
}

impl CTheory {
    pub fn new(sig: &Signature, t: &[Denial]) -> Result<CTheory, OracleError> {
        Ok(CTheory {
            items: t
                .iter()
                .map(|d| compile_denial(sig, d))
                .collect::<Result<_, _>>()?,
        })
    }

    /// True iff every denial holds in `m`.
    pub fn holds(&self, sig: &Signature, m: &Interp, params: &[u8]) -> bool {
        self.items.iter().all(|d| denial_holds(sig, d, m, params))
    }

    /// Index of the first violated denial.
    pub fn first_violation(&self, sig: &Signature, m: &Interp, params: &[u8]) -> Option<usize> {
        self.items
            .iter()
            .position(|d| !denial_holds(sig, d, m, params))
    }
}

pub fn denial_holds(sig: &Signature, d: &CDenial, m: &Interp, params: &[u8]) -> bool {
    let ctx = Ctx {
        n: sig.n() as u8,
        m,
        params,
    };
    let mut env = vec![0u8; d.slots.max(1)];
    !ctx.run(&d.steps, &mut env)
}

/// Compiled intensional definitions in evaluation order.
#[derive(Clone, Debug)]
pub struct CProgram {
    strata: Vec<Vec<CDef>>,
}

impl CProgram {
    pub fn new(sig: &Signature, s: &Schema) -> Result<CProgram, OracleError> {
        let st = crate::analysis::check_stratified(s);
        if !st.stratified {
            return Err(OracleError::Unstratified);
        }
        let mut by_level: BTreeMap<usize, Vec<CDef>> = BTreeMap::new();
        for def in s.definitions() {
            let level = st.strata.get(&def.pred).copied().unwrap_or(0);
            by_level
                .entry(level)
                .or_default()
                .push(compile_def(sig, &def)?);
        }
        Ok(CProgram {
            strata: by_level.into_values().collect(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// Standard model: stratum by stratum, each to its fixpoint.
    pub fn model(&self, sig: &Signature, edb: &Interp, params: &[u8]) -> Interp {
        let mut m = edb.clone();
        for stratum in &self.strata {
            for def in stratum {
                m.clear(def.pred);
            }
            loop {
                let mut grew = false;
                for def in stratum {
                    grew |= derive(sig, def, &mut m, params);
                }
                if !grew {
                    break;
                }
            }
        }
        m
    }
}

/// Adds every tuple satisfying `def` in `m`; true if something was new.
fn derive(sig: &Signature, def: &CDef, m: &mut Interp, params: &[u8]) -> bool {
    let found = answers(sig, def, m, params);
    let mut grew = false;
    for idx in found {
        grew |= m.set(def.pred, idx);
    }
    grew
}

fn answers(sig: &Signature, def: &CDef, m: &Interp, params: &[u8]) -> Vec<usize> {
    let ctx = Ctx {
        n: sig.n() as u8,
        m,
        params,
    };
    let mut env = vec![0u8; def.slots.max(1)];
    let arity = def.head.len();
    let mut out = Vec::new();
    for idx in 0..sig.n().pow(arity as u32) {
        let t = sig.decode(idx, arity);
        for (slot, c) in def.head.iter().zip(&t) {
            env[*slot as usize] = *c;
        }
        if def.disjuncts.iter().any(|steps| ctx.run(steps, &mut env)) {
            out.push(idx);
        }
    }
    out
}

/// Compiled update: new extents computed on the pre-update model.
#[derive(Clone, Debug)]
pub struct CUpdate {
    defs: Vec<CDef>,
}

impl CUpdate {
    pub fn new(sig: &Signature, u: &crate::syntax::Update) -> Result<CUpdate, OracleError> {
        Ok(CUpdate {
            defs: u
                .entries
                .iter()
                .map(|e| compile_def(sig, e))
                .collect::<Result<_, _>>()?,
        })
    }

    /// The updated EDB, given the pre-update model and EDB.
    pub fn apply(&self, sig: &Signature, model: &Interp, edb: &Interp, params: &[u8]) -> Interp {
        let mut out = edb.clone();
        let new: Vec<(usize, Vec<usize>)> = self
            .defs
            .iter()
            .map(|d| (d.pred, answers(sig, d, model, params)))
            .collect();
        for (p, idxs) in new {
            out.clear(p);
            for i in idxs {
                out.set(p, i);
            }
        }
        out
    }
}
