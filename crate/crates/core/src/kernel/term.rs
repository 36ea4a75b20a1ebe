use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Interned-ish identifier. Cheap to clone and safe to share across threads.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Function-free term. Variant order matters: equality atoms keep their
/// arguments sorted by the derived `Ord`, which puts variables first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    /// Free variable standing for an unknown but fixed constant (`$a`).
    Param(Name),
    Const(Name),
}

impl Term {
    pub fn var(s: &str) -> Term {
        Term::Var(name(s))
    }

    pub fn param(s: &str) -> Term {
        Term::Param(name(s))
    }

    pub fn constant(s: &str) -> Term {
        Term::Const(name(s))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Term::Const(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Param(p) => write!(f, "${p}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// Predicate name reserved for the built-in equality.
pub const EQ: &str = "=";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Name,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Atom {
        Atom {
            pred: name(pred),
            args,
        }
    }

    /// Builds `a = b` with arguments in canonical order.
    pub fn equality(a: Term, b: Term) -> Atom {
        let args = if b < a { vec![b, a] } else { vec![a, b] };
        Atom {
            pred: name(EQ),
            args,
        }
    }

    pub fn is_equality(&self) -> bool {
        &*self.pred == EQ
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub(crate) fn normalize(&mut self) {
        if self.is_equality() && self.args.len() == 2 && self.args[1] < self.args[0] {
            self.args.swap(0, 1);
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<Name>) {
        for t in &self.args {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_equality() {
            return write!(f, "{} = {}", self.args[0], self.args[1]);
        }
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// An atom or a negated atom. `s != t` is the negative equality literal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal {
            atom,
            positive: false,
        }
    }

    pub fn eq(a: Term, b: Term) -> Literal {
        Literal::pos(Atom::equality(a, b))
    }

    pub fn neq(a: Term, b: Term) -> Literal {
        Literal::neg(Atom::equality(a, b))
    }

    pub fn negated(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }

    pub fn is_builtin(&self) -> bool {
        self.atom.is_equality()
    }

    pub fn is_database(&self) -> bool {
        !self.atom.is_equality()
    }

    pub fn vars(&self, out: &mut BTreeSet<Name>) {
        self.atom.vars(out)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.positive, self.atom.is_equality()) {
            (true, _) => write!(f, "{}", self.atom),
            (false, true) => write!(f, "{} != {}", self.atom.args[0], self.atom.args[1]),
            (false, false) => write!(f, "not {}", self.atom),
        }
    }
}
