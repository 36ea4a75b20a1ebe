//! Brute-force semantics on explicit finite domains.
//!
//! Quantifiers in NEEs range over the given domain. [`verify`] enumerates
//! every extensional database over the domain (or a seeded sample of them
//! when the space is too large) and every parameter assignment, and checks
//! the weakest or conditional weakest precondition property of a candidate
//! theory.

mod eval;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use eval::{CProgram, CTheory, CUpdate, Interp, OracleError, Signature};

use crate::kernel::{Atom, Denial, GenLit, Name, Term};
use crate::syntax::{Schema, Update};

pub type ParamAssignment = BTreeMap<Name, Name>;

/// Extensional facts over an explicit domain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DatabaseInstance {
    pub domain: Vec<Name>,
    pub edb: BTreeSet<Atom>,
}

impl DatabaseInstance {
    pub fn new(domain: &[&str], facts: impl IntoIterator<Item = Atom>) -> DatabaseInstance {
        DatabaseInstance {
            domain: domain.iter().map(|c| crate::kernel::name(c)).collect(),
            edb: facts.into_iter().collect(),
        }
    }
}

impl fmt::Display for DatabaseInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let facts: Vec<String> = self.edb.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", facts.join(", "))
    }
}

fn atom_consts(a: &Atom, out: &mut BTreeSet<Name>) {
    for t in &a.args {
        if let Term::Const(c) = t {
            out.insert(c.clone());
        }
    }
}

fn update_preds(u: &Update, out: &mut BTreeMap<Name, usize>) {
    for e in &u.entries {
        out.insert(e.pred.clone(), e.arity());
        for l in e.disjuncts.iter().flatten().filter(|l| l.is_database()) {
            out.insert(l.atom.pred.clone(), l.atom.arity());
        }
    }
}

fn theory_preds(t: &[Denial], out: &mut BTreeMap<Name, usize>) {
    for d in t {
        out.extend(d.predicates());
    }
}

fn theory_params(t: &[Denial], out: &mut BTreeSet<Name>) {
    for d in t {
        out.extend(d.params());
    }
}

/// Domain extended with any constant it is missing, in order.
fn full_domain(domain: &[Name], extra: BTreeSet<Name>) -> Vec<Name> {
    let mut out = domain.to_vec();
    for c in extra {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

struct Setup {
    sig: Signature,
    program: CProgram,
}

fn setup(
    s: &Schema,
    u: Option<&Update>,
    theories: &[&[Denial]],
    domain: &[Name],
    facts: &BTreeSet<Atom>,
    params: &BTreeSet<Name>,
) -> Result<Setup, OracleError> {
    let mut preds = s.predicates();
    let mut consts = s.constants();
    if let Some(u) = u {
        update_preds(u, &mut preds);
        consts.extend(u.constants());
    }
    for t in theories {
        theory_preds(t, &mut preds);
        for d in t.iter() {
            consts.extend(d.constants());
        }
    }
    for a in facts {
        preds.entry(a.pred.clone()).or_insert(a.arity());
        let mut cs = BTreeSet::new();
        atom_consts(a, &mut cs);
        if let Some(c) = cs.iter().find(|c| !domain.contains(c)) {
            return Err(OracleError::UnknownConstant(c.to_string()));
        }
    }
    let sig = Signature::new(&full_domain(domain, consts), &preds, params)?;
    let program = CProgram::new(&sig, s)?;
    Ok(Setup { sig, program })
}

fn all_params(s: &Schema, u: Option<&Update>, theories: &[&[Denial]]) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    theory_params(&s.constraints, &mut out);
    theory_params(&s.hypotheses, &mut out);
    if let Some(u) = u {
        out.extend(u.params());
    }
    for t in theories {
        theory_params(t, &mut out);
    }
    out
}

/// Standard model of the schema rules over `d`.
pub fn standard_model(s: &Schema, d: &DatabaseInstance) -> Result<BTreeSet<Atom>, OracleError> {
    let st = setup(s, None, &[], &d.domain, &d.edb, &BTreeSet::new())?;
    let edb = st.sig.interp_of(&d.edb)?;
    Ok(st.sig.facts(&st.program.model(&st.sig, &edb, &[])))
}

/// Whether the theory holds in the standard model of `d` under `pa`.
pub fn eval_theory(
    s: &Schema,
    d: &DatabaseInstance,
    t: &[Denial],
    pa: &ParamAssignment,
) -> Result<bool, OracleError> {
    let params = all_params(s, None, &[t]);
    let st = setup(s, None, &[t], &d.domain, &d.edb, &params)?;
    let pv = st.sig.param_values(pa)?;
    let edb = st.sig.interp_of(&d.edb)?;
    let m = st.program.model(&st.sig, &edb, &pv);
    Ok(CTheory::new(&st.sig, t)?.holds(&st.sig, &m, &pv))
}

/// Whether `phi` holds (is not violated) in the standard model of `d`.
pub fn eval(
    s: &Schema,
    d: &DatabaseInstance,
    phi: &Denial,
    pa: &ParamAssignment,
) -> Result<bool, OracleError> {
    eval_theory(s, d, std::slice::from_ref(phi), pa)
}

/// The database after the update: updated predicates get the extent of
/// their defining formula evaluated in the standard model of `d`.
pub fn apply_update(
    s: &Schema,
    u: &Update,
    d: &DatabaseInstance,
    pa: &ParamAssignment,
) -> Result<DatabaseInstance, OracleError> {
    let params = all_params(s, Some(u), &[]);
    let st = setup(s, Some(u), &[], &d.domain, &d.edb, &params)?;
    let pv = st.sig.param_values(pa)?;
    let edb = st.sig.interp_of(&d.edb)?;
    let m = st.program.model(&st.sig, &edb, &pv);
    let cu = CUpdate::new(&st.sig, u)?;
    let after = cu.apply(&st.sig, &m, &edb, &pv);
    let idb = s.intensional();
    Ok(DatabaseInstance {
        domain: d.domain.clone(),
        edb: st
            .sig
            .facts(&after)
            .into_iter()
            .filter(|a| !idb.contains(&a.pred))
            .collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// The candidate holds in D iff the constraints hold after the update.
    Wp,
    /// As `Wp`, restricted to databases satisfying constraints and hypotheses.
    Cwp,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Wp => "WP",
            Mode::Cwp => "CWP",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Strategy {
    fn default() -> Strategy {
        #[cfg(feature = "parallel")]
        return Strategy::Parallel;
        #[cfg(not(feature = "parallel"))]
        return Strategy::Sequential;
    }
}

pub const DEFAULT_MAX_EDBS: u64 = 1 << 20;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub mode: Mode,
    pub domain: Vec<Name>,
    /// Largest number of databases enumerated.
    pub max_edbs: u64,
    /// Sample `max_edbs` databases when the space is larger instead of failing.
    pub subsample: bool,
    pub seed: u64,
    pub max_counterexamples: usize,
    pub strategy: Strategy,
}

impl VerifyOptions {
    pub fn new(mode: Mode, domain: &[&str]) -> VerifyOptions {
        VerifyOptions {
            mode,
            domain: domain.iter().map(|c| crate::kernel::name(c)).collect(),
            max_edbs: DEFAULT_MAX_EDBS,
            subsample: false,
            seed: 0,
            max_counterexamples: 5,
            strategy: Strategy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub edb: BTreeSet<Atom>,
    pub params: ParamAssignment,
    /// Whether the candidate holds in D.
    pub candidate: bool,
    /// Whether the constraints hold after the update.
    pub after: bool,
    index: u64,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let facts: Vec<String> = self.edb.iter().map(|a| a.to_string()).collect();
        let pa: Vec<String> = self
            .params
            .iter()
            .map(|(p, c)| format!("${p}={c}"))
            .collect();
        write!(
            f,
            "D = {{{}}}, {{{}}}: candidate {}, constraints after update {}",
            facts.join(", "),
            pa.join(", "),
            if self.candidate { "holds" } else { "fails" },
            if self.after { "hold" } else { "fail" },
        )
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub mode: Mode,
    pub domain: Vec<Name>,
    pub edb_atoms: usize,
    pub edbs: u64,
    pub exhaustive: bool,
    pub param_assignments: usize,
    /// Database and parameter pairs that were compared.
    pub checked: u64,
    pub counterexamples: Vec<Counterexample>,
    /// Total mismatches, including those not kept.
    pub failures: u64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dom: Vec<&str> = self.domain.iter().map(|c| &**c).collect();
        writeln!(
            f,
            "{} over {{{}}}: {} databases ({}), {} parameter assignments, {} cases compared",
            self.mode,
            dom.join(","),
            self.edbs,
            if self.exhaustive {
                "exhaustive"
            } else {
                "sampled"
            },
            self.param_assignments,
            self.checked
        )?;
        if self.passed() {
            write!(f, "no counterexample")
        } else {
            write!(f, "{} counterexamples", self.failures)?;
            for c in &self.counterexamples {
                write!(f, "\n  {c}")?;
            }
            Ok(())
        }
    }
}

/// Enumeration of extensional databases as bit vectors over ground atoms.
pub struct Space {
    pub sig: Signature,
    atoms: Vec<(usize, usize)>,
}

impl Space {
    pub fn new(sig: Signature, intensional: &BTreeSet<Name>) -> Space {
        let mut atoms = Vec::new();
        for p in 0..sig.preds.len() {
            if intensional.contains(&sig.preds[p].0) {
                continue;
            }
            for idx in 0..sig.tuples(p) {
                atoms.push((p, idx));
            }
        }
        Space { sig, atoms }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Number of databases, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        if self.atoms.len() >= 128 {
            u128::MAX
        } else {
            1u128 << self.atoms.len()
        }
    }

    pub fn interp(&self, bits: &[u64]) -> Interp {
        let mut m = self.sig.empty_interp();
        for (i, (p, idx)) in self.atoms.iter().enumerate() {
            if bits.get(i / 64).is_some_and(|w| w >> (i % 64) & 1 == 1) {
                m.set(*p, *idx);
            }
        }
        m
    }

    fn random_bits(&self, rng: &mut ChaCha8Rng) -> Vec<u64> {
        let n = self.atoms.len();
        (0..n.div_ceil(64).max(1))
            .map(|w| {
                let r: u64 = rng.gen();
                let live = n.saturating_sub(w * 64).min(64);
                if live == 64 {
                    r
                } else {
                    r & ((1u64 << live) - 1)
                }
            })
            .collect()
    }

    /// Bit vectors to visit: all of them, or a seeded sample.
    pub fn plan(&self, cap: u64, subsample: bool, seed: u64) -> Result<Plan, OracleError> {
        let size = self.size();
        if size <= cap as u128 {
            return Ok(Plan::All(size as u64));
        }
        if !subsample {
            return Err(OracleError::TooLarge { edbs: size, cap });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Plan::Sample(
            (0..cap).map(|_| self.random_bits(&mut rng)).collect(),
        ))
    }
}

pub enum Plan {
    All(u64),
    Sample(Vec<Vec<u64>>),
}

impl Plan {
    pub fn len(&self) -> u64 {
        match self {
            Plan::All(n) => *n,
            Plan::Sample(v) => v.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bits(&self, i: u64) -> Vec<u64> {
        match self {
            Plan::All(_) => vec![i],
            Plan::Sample(v) => v[i as usize].clone(),
        }
    }

    pub fn exhaustive(&self) -> bool {
        matches!(self, Plan::All(_))
    }
}

const CHUNK: u64 = 1024;

/// Runs `f` on every index of the plan, chunked, and folds the results.
pub fn scan<T, F, M>(strategy: Strategy, total: u64, f: F, merge: M, zero: T) -> T
where
    T: Send + Sync + Clone,
    F: Fn(u64, u64) -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    let chunks = total.div_ceil(CHUNK);
    let run = |c: u64| f(c * CHUNK, ((c + 1) * CHUNK).min(total));
    match strategy {
        Strategy::Sequential => (0..chunks).map(run).fold(zero, &merge),
        #[cfg(feature = "parallel")]
        Strategy::Parallel => {
            use rayon::prelude::*;
            (0..chunks)
                .into_par_iter()
                .map(run)
                .reduce(|| zero.clone(), &merge)
        }
    }
}

#[derive(Clone, Default)]
struct Tally {
    checked: u64,
    failures: u64,
    found: Vec<(u64, Vec<u8>, bool, bool)>,
}

fn merge_tally(keep: usize) -> impl Fn(Tally, Tally) -> Tally {
    move |mut a, b| {
        a.checked += b.checked;
        a.failures += b.failures;
        a.found.extend(b.found);
        a.found.sort_by(|x, y| (x.0, &x.1).cmp(&(y.0, &y.1)));
        a.found.truncate(keep);
        a
    }
}

/// Checks that `candidate` is a WP (or CWP) of the constraints of `s`
/// for `u` on every database over the domain.
pub fn verify(
    s: &Schema,
    u: &Update,
    candidate: &[Denial],
    opts: &VerifyOptions,
) -> Result<VerifyReport, OracleError> {
    let params = all_params(s, Some(u), &[candidate]);
    let st = setup(
        s,
        Some(u),
        &[candidate],
        &opts.domain,
        &BTreeSet::new(),
        &params,
    )?;
    let sig = st.sig;
    let program = st.program;
    let gamma = CTheory::new(&sig, &s.constraints)?;
    let hyps = CTheory::new(&sig, &s.hypotheses)?;
    let cand = CTheory::new(&sig, candidate)?;
    let cu = CUpdate::new(&sig, u)?;
    let space = Space::new(sig, &s.intensional());
    let plan = space.plan(opts.max_edbs, opts.subsample, opts.seed)?;
    let sig = &space.sig;
    let pvs = sig.all_param_values();
    let mode = opts.mode;
    let keep = opts.max_counterexamples;

    let chunk = |lo: u64, hi: u64| {
        let mut t = Tally::default();
        for i in lo..hi {
            let edb = space.interp(&plan.bits(i));
            for pv in &pvs {
                let m = program.model(sig, &edb, pv);
                if mode == Mode::Cwp && !(gamma.holds(sig, &m, pv) && hyps.holds(sig, &m, pv)) {
                    continue;
                }
                let before = cand.holds(sig, &m, pv);
                let new_edb = cu.apply(sig, &m, &edb, pv);
                let after = gamma.holds(sig, &program.model(sig, &new_edb, pv), pv);
                t.checked += 1;
                if before != after {
                    t.failures += 1;
                    if t.found.len() < keep {
                        t.found.push((i, pv.clone(), before, after));
                    }
                }
            }
        }
        t
    };
    let tally = scan(
        opts.strategy,
        plan.len(),
        chunk,
        merge_tally(keep),
        Tally::default(),
    );
    let idb = s.intensional();
    let counterexamples = tally
        .found
        .into_iter()
        .map(|(i, pv, candidate, after)| Counterexample {
            edb: sig
                .facts(&space.interp(&plan.bits(i)))
                .into_iter()
                .filter(|a| !idb.contains(&a.pred))
                .collect(),
            params: sig.param_map(&pv),
            candidate,
            after,
            index: i,
        })
        .collect();
    Ok(VerifyReport {
        mode,
        domain: sig.domain.clone(),
        edb_atoms: space.atom_count(),
        edbs: plan.len(),
        exhaustive: plan.exhaustive(),
        param_assignments: pvs.len(),
        checked: tally.checked,
        counterexamples,
        failures: tally.failures,
    })
}

/// A database (over extensional predicates only) with a parameter
/// assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub edb: BTreeSet<Atom>,
    pub params: ParamAssignment,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let facts: Vec<String> = self.edb.iter().map(|a| a.to_string()).collect();
        let pa: Vec<String> = self
            .params
            .iter()
            .map(|(p, c)| format!("${p}={c}"))
            .collect();
        write!(f, "D = {{{}}}, {{{}}}", facts.join(", "), pa.join(", "))
    }
}

/// Searches for a database with parameters on which `premises` hold but
/// `a` and `b` disagree. Rule-free: every predicate is extensional.
pub fn disagreement(
    premises: &[Denial],
    a: &[Denial],
    b: &[Denial],
    domain: &[Name],
    cap: u64,
) -> Result<Option<Witness>, OracleError> {
    search(premises, a, b, domain, cap, |x, y| x != y)
}

/// Searches for a database where `premises` and `a` hold but `b` fails.
pub fn non_entailment(
    premises: &[Denial],
    a: &[Denial],
    b: &[Denial],
    domain: &[Name],
    cap: u64,
) -> Result<Option<Witness>, OracleError> {
    search(premises, a, b, domain, cap, |x, y| x && !y)
}

fn search(
    premises: &[Denial],
    a: &[Denial],
    b: &[Denial],
    domain: &[Name],
    cap: u64,
    bad: fn(bool, bool) -> bool,
) -> Result<Option<Witness>, OracleError> {
    let s = Schema::default();
    let ts: [&[Denial]; 3] = [premises, a, b];
    let params = all_params(&s, None, &ts);
    let st = setup(&s, None, &ts, domain, &BTreeSet::new(), &params)?;
    let sig = st.sig;
    let (cp, ca, cb) = (
        CTheory::new(&sig, premises)?,
        CTheory::new(&sig, a)?,
        CTheory::new(&sig, b)?,
    );
    let space = Space::new(sig, &BTreeSet::new());
    let plan = space.plan(cap, true, 0)?;
    let sig = &space.sig;
    let pvs = sig.all_param_values();
    let chunk = |lo: u64, hi: u64| -> Option<(u64, Vec<u8>)> {
        for i in lo..hi {
            let m = space.interp(&plan.bits(i));
            for pv in &pvs {
                if cp.holds(sig, &m, pv) && bad(ca.holds(sig, &m, pv), cb.holds(sig, &m, pv)) {
                    return Some((i, pv.clone()));
                }
            }
        }
        None
    };
    let first = scan(
        Strategy::default(),
        plan.len(),
        chunk,
        |x, y| match (x, y) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        },
        None,
    );
    Ok(first.map(|(i, pv)| Witness {
        edb: sig.facts(&space.interp(&plan.bits(i))),
        params: sig.param_map(&pv),
    }))
}

/// Whether a body is satisfiable in a rule-free database.
pub fn satisfiable_in(
    body: &[GenLit],
    d: &DatabaseInstance,
    pa: &ParamAssignment,
) -> Result<bool, OracleError> {
    let d2 = Denial::new(body.to_vec());
    eval(&Schema::default(), d, &d2, pa).map(|ok| !ok)
}
