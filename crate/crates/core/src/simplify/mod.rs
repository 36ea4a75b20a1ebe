//! Redundancy elimination under trusted hypotheses, and the `Simp`
//! pipelines built on it.
//!
//! Rules, in schedule order, applied round-robin over the working set in
//! canonical order until none fires:
//!
//! | name | effect |
//! |------|--------|
//! | `drop-true` | drop a member that reduces to `true` |
//! | `reduce` | replace a member by its reduction |
//! | `drop-derived` | drop a member derivable from the others and `Delta` |
//! | `nee-drop-derived` | replace an NEE by `true` when its body, read as a denial, is derivable |
//! | `nee-replace-derived` | replace an NEE body by a derived body that strictly subsumes it |
//! | `replace-derived` | replace a member by a derived clause that strictly subsumes it |

use std::collections::BTreeMap;
use std::fmt;

use crate::analysis::{classify, Lang};
use crate::kernel::{
    canonical_theory, canonicalize, name, rename_away, standardize, Apply, Denial, GenLit, Name,
    Nee, Subst, Term, Theory,
};
use crate::oracle::{self, OracleError};
use crate::resolution::{saturate, Derivation, DerivationBudget, DEFAULT_MAX_CLAUSES};
use crate::rewrite::{
    extended_subsumes, reduce, reduce_with, replace_term, strictly_extended_subsumes, Reducer,
};
use crate::syntax::{print_denial, Schema, Update};
use crate::transform::{after_lang, unfold_constraints, unfold_hypotheses, TransformError};

pub const DEFAULT_MAX_FIRINGS: usize = 10_000;

#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    /// Hard cap on rule firings.
    pub max_firings: usize,
    /// Saturation cap per derivation.
    pub max_clauses: usize,
    /// Check every firing against the oracle over this domain.
    pub paranoid: Option<Vec<Name>>,
    /// Database cap for each paranoid check (sampled above it).
    pub paranoid_edbs: u64,
}

impl Default for OptimizeOptions {
    fn default() -> OptimizeOptions {
        OptimizeOptions {
            max_firings: DEFAULT_MAX_FIRINGS,
            max_clauses: DEFAULT_MAX_CLAUSES,
            paranoid: None,
            paranoid_edbs: 1 << 14,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimplifyError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("optimizer stopped after {0} rule firings")]
    FiringCap(usize),
    #[error("rule {rule} changed the meaning of the theory: {witness}")]
    Unsound { rule: &'static str, witness: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("schema and update are outside {0}")]
    Language(String),
}

/// One rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Firing {
    pub rule: &'static str,
    pub before: String,
    pub after: Vec<String>,
    /// Derivation backing the step, when there is one.
    pub proof: Vec<String>,
}

impl fmt::Display for Firing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let after = if self.after.is_empty() {
            "true".to_string()
        } else {
            self.after.join(" ; ")
        };
        write!(f, "{}: {} => {}", self.rule, self.before, after)?;
        for line in &self.proof {
            write!(f, "\n    {line}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub firings: BTreeMap<&'static str, usize>,
    pub total_firings: usize,
    /// Saturations run.
    pub derivations: usize,
    /// Largest clause store reached by any saturation.
    pub max_saturation: usize,
    /// Saturations stopped by the clause cap.
    pub saturation_cap_hits: usize,
    pub reduction_steps: usize,
    /// Reductions stopped by their step cap.
    pub reduction_cap_hits: usize,
    pub firing_cap: usize,
    pub saturation_cap: usize,
}

impl Stats {
    fn fire(&mut self, rule: &'static str) {
        *self.firings.entry(rule).or_default() += 1;
        self.total_firings += 1;
    }

    fn saw(&mut self, d: &Derivation) {
        self.derivations += 1;
        self.max_saturation = self.max_saturation.max(d.clauses);
        self.saturation_cap_hits += usize::from(d.cap_hit);
    }

    /// No cap was reached.
    pub fn within_caps(&self) -> bool {
        self.saturation_cap_hits == 0
            && self.reduction_cap_hits == 0
            && self.total_firings < self.firing_cap
    }
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rules: Vec<String> = self
            .firings
            .iter()
            .map(|(r, n)| format!("{r}={n}"))
            .collect();
        write!(
            f,
            "firings {}/{} [{}], derivations {}, max saturation {}/{}, saturation cap hits {}, reduction steps {}",
            self.total_firings,
            self.firing_cap,
            rules.join(" "),
            self.derivations,
            self.max_saturation,
            self.saturation_cap,
            self.saturation_cap_hits,
            self.reduction_steps
        )
    }
}

#[derive(Clone, Debug)]
pub struct Optimized {
    pub theory: Theory,
    pub trace: Vec<Firing>,
    pub stats: Stats,
}

const WRAP: &str = "%";

/// The NEE at `j` of `host` as a denial, its free variables made parameters.
fn wrap(host: &Denial, j: usize) -> Denial {
    let GenLit::Nee(n) = &host.body[j] else {
        unreachable!("not an NEE position")
    };
    let free = n.free_vars();
    let s = Subst::from_pairs(
        free.iter()
            .map(|v| (v.clone(), Term::Param(name(&format!("{WRAP}{v}"))))),
    );
    standardize(&Denial::new(n.body.clone()).apply(&s))
}

/// Inverse of [`wrap`]: a body for the NEE at `j`, quantifying whatever
/// is not a host variable.
fn unwrap_into(host: &Denial, j: usize, psi: &Denial) -> Denial {
    let psi = rename_away(psi, &host.vars());
    let vars: Vec<Name> = psi.level0_vars().into_iter().collect();
    let mut body = psi.body.clone();
    for p in psi.params() {
        if let Some(v) = p.strip_prefix(WRAP) {
            body = replace_term(&body, &Term::Param(p.clone()), &Term::Var(name(v)));
        }
    }
    let mut out = host.clone();
    out.body[j] = GenLit::Nee(Nee::new(vars, body));
    out
}

fn without(work: &[Denial], i: usize) -> Vec<Denial> {
    work.iter()
        .enumerate()
        .filter(|(k, _)| *k != i)
        .map(|(_, d)| d.clone())
        .collect()
}

struct Engine<'a> {
    delta: &'a [Denial],
    opts: &'a OptimizeOptions,
    stats: Stats,
    trace: Vec<Firing>,
}

impl Engine<'_> {
    fn budget(&self, hyps: &[Denial]) -> DerivationBudget {
        DerivationBudget {
            max_clauses: self.opts.max_clauses,
            ..DerivationBudget::for_hypotheses(hyps)
        }
    }

    fn hyps(&self, extra: Option<&Denial>, others: &[Denial]) -> Vec<Denial> {
        extra
            .into_iter()
            .cloned()
            .chain(others.iter().cloned())
            .chain(self.delta.iter().cloned())
            .collect()
    }

    /// A derivation of something extended-subsuming `phi`.
    fn discharges(&mut self, others: &[Denial], phi: &Denial) -> Option<Derivation> {
        let hyps = self.hyps(None, others);
        let d = saturate(&hyps, self.budget(&hyps), &|psi| {
            extended_subsumes(psi, phi)
        });
        self.stats.saw(&d);
        d.found.is_some().then_some(d)
    }

    /// A derivation from `{phi} + others + Delta` of a clause strictly
    /// extended-subsuming `phi`.
    fn strengthens(&mut self, others: &[Denial], phi: &Denial) -> Option<Derivation> {
        let hyps = self.hyps(Some(phi), others);
        let d = saturate(&hyps, self.budget(&hyps), &|psi| {
            strictly_extended_subsumes(psi, phi)
        });
        self.stats.saw(&d);
        d.found.is_some().then_some(d)
    }

    fn reduce(&mut self, d: &Denial) -> Vec<Denial> {
        let mut r = Reducer::default();
        let out = reduce_with(d, &mut r);
        self.stats.reduction_steps += r.steps;
        self.stats.reduction_cap_hits += usize::from(r.cap_hit);
        out
    }

    fn fire(
        &mut self,
        rule: &'static str,
        old: &[Denial],
        new: &[Denial],
        before: &Denial,
        after: &[Denial],
        proof: Vec<String>,
    ) -> Result<(), SimplifyError> {
        self.stats.fire(rule);
        self.trace.push(Firing {
            rule,
            before: print_denial(before),
            after: after.iter().map(print_denial).collect(),
            proof,
        });
        if self.stats.total_firings >= self.opts.max_firings {
            return Err(SimplifyError::FiringCap(self.stats.total_firings));
        }
        if let Some(domain) = &self.opts.paranoid {
            if let Some(w) =
                oracle::disagreement(self.delta, old, new, domain, self.opts.paranoid_edbs)?
            {
                return Err(SimplifyError::Unsound {
                    rule,
                    witness: w.to_string(),
                });
            }
        }
        Ok(())
    }

    /// One rule firing, or `None` at the fixpoint.
    fn step(&mut self, work: &[Denial]) -> Result<Option<Theory>, SimplifyError> {
        // drop-true / reduce
        for (i, phi) in work.iter().enumerate() {
            let r = self.reduce(phi);
            if r.len() != 1 || r[0] != *phi {
                let rule = if r.is_empty() { "drop-true" } else { "reduce" };
                let mut new = without(work, i);
                new.extend(r.iter().cloned());
                let new = canonical_theory(&new);
                self.fire(rule, work, &new, phi, &r, Vec::new())?;
                return Ok(Some(new));
            }
        }
        // drop-derived
        for (i, phi) in work.iter().enumerate() {
            let others = without(work, i);
            if let Some(d) = self.discharges(&others, phi) {
                let new = canonical_theory(&others);
                self.fire("drop-derived", work, &new, phi, &[], d.proof)?;
                return Ok(Some(new));
            }
        }
        // NEE variants, innermost-first is not needed: reduction reaches nested ones
        for (i, phi) in work.iter().enumerate() {
            let others = without(work, i);
            for j in 0..phi.body.len() {
                if !matches!(phi.body[j], GenLit::Nee(_)) {
                    continue;
                }
                let wrapped = wrap(phi, j);
                if let Some(d) = self.discharges(&others, &wrapped) {
                    let mut host = phi.clone();
                    host.body.remove(j);
                    let host = canonicalize(&standardize(&host));
                    let mut new = others.clone();
                    new.push(host.clone());
                    let new = canonical_theory(&new);
                    self.fire("nee-drop-derived", work, &new, phi, &[host], d.proof)?;
                    return Ok(Some(new));
                }
                if let Some(d) = self.strengthens(&others, &wrapped) {
                    let psi = d.found.clone().expect("found");
                    let host = canonicalize(&standardize(&unwrap_into(phi, j, &psi)));
                    let mut new = others.clone();
                    new.push(host.clone());
                    let new = canonical_theory(&new);
                    self.fire("nee-replace-derived", work, &new, phi, &[host], d.proof)?;
                    return Ok(Some(new));
                }
            }
        }
        // replace-derived
        for (i, phi) in work.iter().enumerate() {
            let others = without(work, i);
            if let Some(d) = self.strengthens(&others, phi) {
                let psi = d.found.clone().expect("found");
                let mut new = others.clone();
                new.push(psi.clone());
                let new = canonical_theory(&new);
                self.fire("replace-derived", work, &new, phi, &[psi], d.proof)?;
                return Ok(Some(new));
            }
        }
        Ok(None)
    }
}

/// `Optimize^Delta(gamma)`: rewrites `gamma` to a fixpoint of the rules,
/// keeping it equivalent to `gamma` on every database satisfying `delta`.
pub fn optimize(
    delta: &[Denial],
    gamma: &[Denial],
    opts: &OptimizeOptions,
) -> Result<Optimized, SimplifyError> {
    // reduced hypotheses keep resolvents and the size budget small
    let delta = canonical_theory(&delta.iter().flat_map(reduce).collect::<Vec<_>>());
    let mut e = Engine {
        delta: &delta,
        opts,
        stats: Stats {
            firing_cap: opts.max_firings,
            saturation_cap: opts.max_clauses,
            ..Stats::default()
        },
        trace: Vec::new(),
    };
    let mut work = canonical_theory(gamma);
    while let Some(next) = e.step(&work)? {
        work = next;
    }
    Ok(Optimized {
        theory: work,
        trace: e.trace,
        stats: e.stats,
    })
}

/// Which language to simplify in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LangChoice {
    /// The smallest language containing schema and update.
    #[default]
    Auto,
    Ls,
    LsExt,
}

#[derive(Clone, Debug)]
pub struct SimplificationResult {
    pub lang: Lang,
    /// The conditional weakest precondition.
    pub theory: Theory,
    /// The unoptimized `After` theory.
    pub after: Theory,
    /// `Delta`: the unfolded constraints and hypotheses.
    pub delta: Theory,
    pub trace: Vec<Firing>,
    pub stats: Stats,
}

/// Language the pair is simplified in.
pub fn choose_lang(s: &Schema, u: &Update, choice: LangChoice) -> Result<Lang, SimplifyError> {
    let v = classify(s, Some(u));
    let joint = v.joint();
    match (choice, joint) {
        (_, None) => Err(SimplifyError::Language(
            v.schema
                .rendered_witness
                .or_else(|| v.update.and_then(|g| g.rendered_witness))
                .unwrap_or_else(|| "recursive".into()),
        )),
        (LangChoice::Auto, Some(l)) => Ok(l),
        (LangChoice::LsExt, Some(_)) => Ok(Lang::LsExt),
        (LangChoice::Ls, Some(Lang::Ls)) => Ok(Lang::Ls),
        (LangChoice::Ls, Some(Lang::LsExt)) => Err(SimplifyError::Language(format!(
            "L_S ({})",
            v.schema
                .rendered_witness
                .or_else(|| v.update.and_then(|g| g.rendered_witness))
                .unwrap_or_default()
        ))),
    }
}

/// `Simp^U(S) = Optimize^Delta(After^U(S))` with `Delta` the unfolded
/// constraints and hypotheses of `s`.
pub fn simp(
    s: &Schema,
    u: &Update,
    choice: LangChoice,
    opts: &OptimizeOptions,
) -> Result<SimplificationResult, SimplifyError> {
    let lang = choose_lang(s, u, choice)?;
    let after = after_lang(s, u, lang)?;
    let mut delta = unfold_constraints(s, &s.constraints)?;
    delta.extend(unfold_hypotheses(s)?);
    let delta = canonical_theory(&delta);
    let o = optimize(&delta, &after, opts)?;
    Ok(SimplificationResult {
        lang,
        theory: o.theory,
        after: canonical_theory(&after),
        delta,
        trace: o.trace,
        stats: o.stats,
    })
}
