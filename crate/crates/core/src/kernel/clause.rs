use std::collections::BTreeSet;
use std::fmt;

use super::term::{Atom, Literal, Name, Term};

/// Negated existential expression `not exists(X..)[body]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Nee {
    pub vars: Vec<Name>,
    pub body: Vec<GenLit>,
}

/// A literal or an NEE.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenLit {
    Lit(Literal),
    Nee(Nee),
}

/// Extended denial `<- body`. A plain denial is the NEE-free case.
/// An empty body is the always-violated denial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Denial {
    pub body: Vec<GenLit>,
}

pub type Theory = Vec<Denial>;

impl Nee {
    pub fn new(vars: Vec<Name>, body: Vec<GenLit>) -> Nee {
        Nee { vars, body }
    }

    /// Variables occurring free in the NEE (those of lower level).
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        body_free_vars(&self.body, &mut out);
        for v in &self.vars {
            out.remove(v);
        }
        out
    }

    /// Drops quantified variables that no longer occur in the body.
    pub fn prune_vars(&mut self) {
        let mut occ = BTreeSet::new();
        body_free_vars(&self.body, &mut occ);
        self.vars.retain(|v| occ.contains(v));
    }

    pub fn size(&self) -> usize {
        1 + body_size(&self.body)
    }
}

impl GenLit {
    pub fn lit(l: Literal) -> GenLit {
        GenLit::Lit(l)
    }

    pub fn pos(a: Atom) -> GenLit {
        GenLit::Lit(Literal::pos(a))
    }

    pub fn neg(a: Atom) -> GenLit {
        GenLit::Lit(Literal::neg(a))
    }

    pub fn as_lit(&self) -> Option<&Literal> {
        match self {
            GenLit::Lit(l) => Some(l),
            GenLit::Nee(_) => None,
        }
    }

    pub fn as_nee(&self) -> Option<&Nee> {
        match self {
            GenLit::Nee(n) => Some(n),
            GenLit::Lit(_) => None,
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            GenLit::Lit(l) => l.vars(out),
            GenLit::Nee(n) => out.extend(n.free_vars()),
        }
    }

    /// Every variable name, bound or free, including quantifier lists.
    pub fn all_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            GenLit::Lit(l) => l.vars(out),
            GenLit::Nee(n) => {
                out.extend(n.vars.iter().cloned());
                for g in &n.body {
                    g.all_vars(out);
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            GenLit::Lit(_) => 1,
            GenLit::Nee(n) => n.size(),
        }
    }

    pub fn collect_terms(&self, out: &mut BTreeSet<Term>) {
        match self {
            GenLit::Lit(l) => out.extend(l.atom.args.iter().cloned()),
            GenLit::Nee(n) => n.body.iter().for_each(|g| g.collect_terms(out)),
        }
    }

    pub fn predicates(&self, out: &mut BTreeSet<(Name, usize)>) {
        match self {
            GenLit::Lit(l) => {
                if !l.atom.is_equality() {
                    out.insert((l.atom.pred.clone(), l.atom.arity()));
                }
            }
            GenLit::Nee(n) => n.body.iter().for_each(|g| g.predicates(out)),
        }
    }
}

pub fn body_free_vars(body: &[GenLit], out: &mut BTreeSet<Name>) {
    for g in body {
        g.free_vars(out);
    }
}

pub fn body_size(body: &[GenLit]) -> usize {
    body.iter().map(GenLit::size).sum()
}

impl Denial {
    pub fn new(body: Vec<GenLit>) -> Denial {
        Denial { body }
    }

    pub fn from_literals(lits: Vec<Literal>) -> Denial {
        Denial {
            body: lits.into_iter().map(GenLit::Lit).collect(),
        }
    }

    /// Level-0 variables (implicitly universally quantified).
    pub fn level0_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        body_free_vars(&self.body, &mut out);
        out
    }

    /// All bound variables of the denial: level-0 and NEE-quantified.
    /// Parameters are never included.
    pub fn vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for g in &self.body {
            g.all_vars(&mut out);
        }
        out
    }

    pub fn has_nee(&self) -> bool {
        self.body.iter().any(|g| matches!(g, GenLit::Nee(_)))
    }

    /// General-literal count, an NEE counting as one plus its body.
    pub fn size(&self) -> usize {
        body_size(&self.body)
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().filter_map(GenLit::as_lit)
    }

    pub fn nees(&self) -> impl Iterator<Item = &Nee> {
        self.body.iter().filter_map(GenLit::as_nee)
    }

    pub fn params(&self) -> BTreeSet<Name> {
        let mut terms = BTreeSet::new();
        for g in &self.body {
            g.collect_terms(&mut terms);
        }
        terms
            .into_iter()
            .filter_map(|t| match t {
                Term::Param(p) => Some(p),
                _ => None,
            })
            .collect()
    }

    pub fn constants(&self) -> BTreeSet<Name> {
        let mut terms = BTreeSet::new();
        for g in &self.body {
            g.collect_terms(&mut terms);
        }
        terms
            .into_iter()
            .filter_map(|t| match t {
                Term::Const(c) => Some(c),
                _ => None,
            })
            .collect()
    }

    pub fn predicates(&self) -> BTreeSet<(Name, usize)> {
        let mut out = BTreeSet::new();
        for g in &self.body {
            g.predicates(&mut out);
        }
        out
    }
}

pub(crate) fn fmt_body(body: &[GenLit], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if body.is_empty() {
        return write!(f, "true");
    }
    for (i, g) in body.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{g}")?;
    }
    Ok(())
}

impl fmt::Display for Nee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not exists(")?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")[")?;
        fmt_body(&self.body, f)?;
        write!(f, "]")
    }
}

impl fmt::Display for GenLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenLit::Lit(l) => write!(f, "{l}"),
            GenLit::Nee(n) => write!(f, "{n}"),
        }
    }
}

impl fmt::Display for Denial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<- ")?;
        fmt_body(&self.body, f)?;
        write!(f, ".")
    }
}
