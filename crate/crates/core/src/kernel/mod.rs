//! Syntactic substrate: terms, literals, extended denials, substitutions,
//! unification, renaming and canonical forms.

mod canon;
mod clause;
mod subst;
mod term;

pub use canon::{canonical_theory, canonicalize, canonicalize_nee, is_variant, present};
pub use clause::{body_free_vars, body_size, Denial, GenLit, Nee, Theory};
pub use subst::{
    free_vars_of, fresh_name, instantiate, mgu, rename_all, rename_away, rename_body, standardize,
    standardize_apart, standardize_body, unify_atoms_with, unify_genlits, unify_terms, Apply,
    Subst,
};
pub use term::{name, Atom, Literal, Name, Term, EQ};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_denial;
    use std::collections::BTreeSet;

    fn d(s: &str) -> Denial {
        parse_denial(s).unwrap()
    }

    fn names(xs: &[&str]) -> BTreeSet<Name> {
        xs.iter().map(|x| name(x)).collect()
    }

    #[test]
    fn apply_binds_free_variables() {
        let s = Subst::single(name("X"), Term::constant("b"));
        let a = Atom::new("p", vec![Term::var("X"), Term::var("Y")]);
        assert_eq!(a.apply(&s).to_string(), "p(b,Y)");
        assert_eq!(a.apply(&Subst::new()), a);
    }

    #[test]
    fn apply_on_denial_body() {
        let s = Subst::single(name("Y"), Term::constant("b"));
        let out = d("<- p(X,Y), q(Y).").apply(&s);
        assert_eq!(out.to_string(), "<- p(X,b), q(b).");
    }

    #[test]
    fn apply_leaves_quantified_variables_alone() {
        let s = Subst::single(name("Y"), Term::constant("c"));
        let out = d("<- p(X), not exists(Y)[q(X,Y)].").apply(&s);
        assert_eq!(out.to_string(), "<- p(X), not exists(Y)[q(X,Y)].");
    }

    #[test]
    fn apply_avoids_capture() {
        let s = Subst::single(name("X"), Term::var("Y"));
        let out = d("<- p(X), not exists(Y)[q(X,Y)].").apply(&s);
        let nee = out.nees().next().unwrap();
        assert_ne!(&*nee.vars[0], "Y");
        assert_eq!(out.level0_vars(), names(&["Y"]));
    }

    #[test]
    fn mgu_textbook() {
        let a = Atom::new("p", vec![Term::var("X"), Term::constant("b")]);
        let b = Atom::new("p", vec![Term::constant("a"), Term::var("Y")]);
        let s = mgu(&a, &b).unwrap();
        assert_eq!(s.to_string(), "{X/a, Y/b}");
        assert_eq!(a.apply(&s), b.apply(&s));
    }

    #[test]
    fn mgu_failures() {
        let pa = Atom::new("p", vec![Term::constant("a")]);
        let pb = Atom::new("p", vec![Term::constant("b")]);
        assert!(mgu(&pa, &pb).is_none());
        let ppar = Atom::new("p", vec![Term::param("a")]);
        assert!(mgu(&pa, &ppar).is_none());
        let pq = Atom::new("p", vec![Term::param("b")]);
        assert!(mgu(&ppar, &pq).is_none());
        assert!(mgu(&ppar, &ppar).is_some());
        let q = Atom::new("q", vec![Term::constant("a")]);
        assert!(mgu(&pa, &q).is_none());
    }

    #[test]
    fn mgu_over_general_literals() {
        // p(X,b), not exists(Z)[q(Z,X)]  vs  p(a,Y), not q(c,a)
        let left = d("<- p(X,b), not exists(Z)[q(Z,X)].");
        let right = d("<- p(a,Y), not q(c,a).");
        let mut s = Subst::new();
        for (g1, g2) in left.body.iter().zip(&right.body) {
            s = unify_genlits(g1, g2, &s).unwrap();
        }
        assert_eq!(s.to_string(), "{X/a, Y/b, Z/c}");
        let inst: Vec<GenLit> = left.body.iter().map(|g| instantiate(g, &s)).collect();
        // quantifier of Z vanishes once Z is bound to a constant
        assert!(matches!(&inst[1], GenLit::Nee(n) if n.vars.is_empty()));
    }

    #[test]
    fn standardize_apart_renames_clashes() {
        let out = standardize_apart(&d("<- p(X)."), &d("<- q(X)."));
        assert_eq!(out.to_string(), "<- q(X1).");
        let out = standardize_apart(&d("<- p(X)."), &d("<- q(Y)."));
        assert_eq!(out.to_string(), "<- q(Y).");
        let c1 = d("<- p(X), not exists(Y)[r(X,Y)].");
        let out = standardize_apart(&c1, &d("<- p(Y)."));
        assert!(c1.vars().is_disjoint(&out.vars()));
        assert_eq!(out.to_string(), "<- p(Y1).");
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(
            canonicalize(&d("<- q(Z), p(Z).")).to_string(),
            "<- p(V1), q(V1)."
        );
        assert_eq!(canonicalize(&d("<- p(X).")).to_string(), "<- p(V1).");
        let c = canonicalize(&d("<- Y != $t, b($i,Y)."));
        assert_eq!(c.to_string(), "<- b($i,V1), V1 != $t.");
        let x = d("<- r(X,Y), not exists(Z)[s(Z), q(Y,Z)], X = a.");
        assert_eq!(canonicalize(&canonicalize(&x)), canonicalize(&x));
    }

    #[test]
    fn vars_excludes_parameters() {
        assert_eq!(d("<- p(X,$a).").vars(), names(&["X"]));
        assert!(d("<- p(a,b).").vars().is_empty());
        assert_eq!(
            d("<- p(X), not exists(Y)[q(X,Y)].").vars(),
            names(&["X", "Y"])
        );
    }

    #[test]
    fn equality_orientation() {
        let e = Atom::equality(Term::constant("a"), Term::var("X"));
        assert_eq!(e.to_string(), "X = a");
        let e = Atom::equality(Term::param("t"), Term::var("Z"));
        assert_eq!(e.to_string(), "Z = $t");
    }
}
