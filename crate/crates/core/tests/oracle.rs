use std::collections::BTreeMap;
use std::path::PathBuf;

use icsimp::kernel::{name, Atom, Denial, Term};
use icsimp::oracle::{
    apply_update, eval, standard_model, verify, DatabaseInstance, Mode, ParamAssignment,
    VerifyOptions,
};
use icsimp::simplify::{simp, LangChoice, OptimizeOptions};
use icsimp::syntax::{
    parse_denial, parse_facts, parse_schema, parse_theory, parse_update, Rule, Schema, Update,
};
use icsimp::transform::after;

fn corpus(file: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(file);
    std::fs::read_to_string(p).unwrap()
}

fn db(domain: &[&str], facts: &str) -> DatabaseInstance {
    DatabaseInstance::new(domain, parse_facts(facts).unwrap())
}

fn no_params() -> ParamAssignment {
    BTreeMap::new()
}

fn facts(m: &std::collections::BTreeSet<Atom>) -> Vec<String> {
    m.iter().map(|a| a.to_string()).collect()
}

#[test]
fn childless_parent_violates() {
    let phi = parse_denial("<- parent(X), not exists(Y)[child_of(X,Y)].").unwrap();
    let s = Schema::default();
    assert!(!eval(&s, &db(&["a", "b"], "parent(a)."), &phi, &no_params()).unwrap());
    assert!(eval(
        &s,
        &db(&["a", "b"], "parent(a). child_of(a,b)."),
        &phi,
        &no_params()
    )
    .unwrap());
}

#[test]
fn book_key_constraint() {
    let phi = parse_denial("<- b(X,Y), b(X,Z), Y != Z.").unwrap();
    let s = Schema::default();
    let dom = ["1", "2", "x", "y"];
    assert!(!eval(&s, &db(&dom, "b(1,x). b(1,y)."), &phi, &no_params()).unwrap());
    assert!(eval(&s, &db(&dom, "b(1,x). b(2,x)."), &phi, &no_params()).unwrap());
}

#[test]
fn primed_rules_model() {
    let s = parse_schema("pp(X) :- p(X).\npp(X) :- X = a.").unwrap();
    let m = standard_model(&s, &db(&["a", "b"], "p(b).")).unwrap();
    assert_eq!(facts(&m), ["p(b)", "pp(a)", "pp(b)"]);
    let m = standard_model(&Schema::default(), &db(&["a", "b"], "p(b).")).unwrap();
    assert_eq!(facts(&m), ["p(b)"]);
}

#[test]
fn ld98_model() {
    let s = parse_schema(&corpus("ld98.sch")).unwrap();
    let d = db(
        &["ann", "bob", "cy", "kid"],
        "man(bob). woman(ann). parent(bob,kid). parent(ann,kid). man(cy).",
    );
    let m = standard_model(&s, &d).unwrap();
    let derived: Vec<String> = facts(&m)
        .into_iter()
        .filter(|f| f.starts_with("married") || f.starts_with("unmarried"))
        .collect();
    let want = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/golden/ld98_model.txt"),
    )
    .unwrap();
    assert_eq!(derived.join("\n") + "\n", want);
}

#[test]
fn model_ignores_rule_order() {
    let s = parse_schema(&corpus("ld98.sch")).unwrap();
    let mut r = s.clone();
    r.rules.reverse();
    let rot: Vec<Rule> = s
        .rules
        .iter()
        .cycle()
        .skip(2)
        .take(s.rules.len())
        .cloned()
        .collect();
    let rot = Schema {
        rules: rot,
        ..s.clone()
    };
    let d = db(
        &["a", "b", "c"],
        "man(a). woman(b). parent(a,c). parent(b,c). woman(c).",
    );
    let m = standard_model(&s, &d).unwrap();
    assert_eq!(standard_model(&r, &d).unwrap(), m);
    assert_eq!(standard_model(&rot, &d).unwrap(), m);
}

#[test]
fn updates() {
    let s = Schema::default();
    let u = parse_update("add p(a).").unwrap();
    let d = apply_update(&s, &u, &db(&["a", "b"], "p(b)."), &no_params()).unwrap();
    assert_eq!(facts(&d.edb), ["p(a)", "p(b)"]);

    let u = parse_update(&corpus("ll96.upd")).unwrap();
    let d = apply_update(
        &s,
        &u,
        &db(&["1", "2", "3", "5"], "b(5,1). b(2,3)."),
        &no_params(),
    )
    .unwrap();
    assert_eq!(facts(&d.edb), ["b(2,3)"]);

    let d0 = db(&["a", "b"], "p(a). q(b).");
    let d = apply_update(&s, &Update::default(), &d0, &no_params()).unwrap();
    assert_eq!(d, d0);
}

#[test]
fn parametric_update() {
    let s = parse_schema(&corpus("book.sch")).unwrap();
    let u = parse_update(&corpus("book.upd")).unwrap();
    let pa: ParamAssignment = [(name("i"), name("1")), (name("t"), name("y"))].into();
    let d = apply_update(&s, &u, &db(&["1", "x", "y"], "b(1,x)."), &pa).unwrap();
    assert_eq!(facts(&d.edb), ["b(1,x)", "b(1,y)"]);
    let phi = &s.constraints[0];
    assert!(!eval(&s, &d, phi, &pa).unwrap());
}

#[test]
fn mutex_candidate_is_cwp_not_wp() {
    let s = parse_schema(&corpus("mutex.sch")).unwrap();
    let u = parse_update(&corpus("mutex.upd")).unwrap();
    let cand = parse_theory("<- q(a).").unwrap();
    let cwp = verify(&s, &u, &cand, &VerifyOptions::new(Mode::Cwp, &["a", "b"])).unwrap();
    assert!(cwp.passed(), "{cwp}");
    assert!(cwp.exhaustive);
    let wp = verify(&s, &u, &cand, &VerifyOptions::new(Mode::Wp, &["a", "b"])).unwrap();
    assert!(!wp.passed());
    // every mismatch is an inconsistent D without q(a); p(a),q(a) agrees on both sides
    for c in &wp.counterexamples {
        let d = facts(&c.edb);
        assert!(d.contains(&"p(b)".to_string()) && d.contains(&"q(b)".to_string()));
        assert!(!d.contains(&"q(a)".to_string()));
        assert!(c.candidate && !c.after);
    }
    assert_eq!(facts(&wp.counterexamples[0].edb), ["p(b)", "q(b)"]);
    assert_eq!(wp.failures, 2);
}

#[test]
fn identity_update_keeps_constraints() {
    for stem in ["book", "mutex", "ld98"] {
        let s = parse_schema(&corpus(&format!("{stem}.sch"))).unwrap();
        let r = verify(
            &s,
            &Update::default(),
            &s.constraints,
            &VerifyOptions::new(Mode::Cwp, &["a", "b"]),
        )
        .unwrap();
        assert!(r.passed(), "{stem}: {r}");
    }
}

fn domain_for(stem: &str) -> &'static [&'static str] {
    match stem {
        "book" => &["a", "b", "c"],
        "ll96" => &["1", "5"],
        _ => &["a", "b", "c"],
    }
}

#[test]
fn after_is_a_wp_on_the_corpus() {
    for stem in ["book", "mutex", "ll96", "ld98"] {
        let s = parse_schema(&corpus(&format!("{stem}.sch"))).unwrap();
        let u = parse_update(&corpus(&format!("{stem}.upd"))).unwrap();
        let a = after(&s, &u).unwrap();
        let r = verify(
            &s,
            &u,
            &a.theory,
            &VerifyOptions::new(Mode::Wp, domain_for(stem)),
        )
        .unwrap();
        assert!(r.passed(), "{stem}: {r}");
        assert!(r.exhaustive);
    }
}

#[test]
fn simp_is_a_cwp_on_the_corpus() {
    for stem in ["book", "mutex", "ll96", "ld98"] {
        let s = parse_schema(&corpus(&format!("{stem}.sch"))).unwrap();
        let u = parse_update(&corpus(&format!("{stem}.upd"))).unwrap();
        let out = simp(&s, &u, LangChoice::Auto, &OptimizeOptions::default()).unwrap();
        let r = verify(
            &s,
            &u,
            &out.theory,
            &VerifyOptions::new(Mode::Cwp, domain_for(stem)),
        )
        .unwrap();
        assert!(r.passed(), "{stem}: {r}");
        assert!(r.checked > 0);
    }
}

#[test]
fn oversized_space_needs_sampling() {
    let s = parse_schema("<- r(X,Y,Z), r(Z,Y,X), X != Z.").unwrap();
    let u = parse_update("add r(a,b,c).").unwrap();
    let a = after(&s, &u).unwrap();
    let mut o = VerifyOptions::new(Mode::Wp, &["a", "b", "c"]);
    assert!(verify(&s, &u, &a.theory, &o).is_err());
    o.subsample = true;
    o.max_edbs = 2000;
    let r = verify(&s, &u, &a.theory, &o).unwrap();
    assert!(!r.exhaustive);
    assert_eq!(r.edbs, 2000);
    assert!(r.passed(), "{r}");
}

#[test]
fn plain_denial_agrees_with_expansion() {
    let phi = parse_denial("<- p(X,X), q(a,X,Y), not p(Y,b).").unwrap();
    let e: Denial = icsimp::rewrite::expand(&phi);
    let s = Schema::default();
    let dom = ["a", "b"];
    for f in [
        "p(a,a). q(a,a,b).",
        "p(a,a). q(a,a,b). p(b,b).",
        "p(b,b). q(a,b,a).",
        "p(b,b). q(a,b,a). p(a,b).",
        "",
    ] {
        let d = db(&dom, f);
        assert_eq!(
            eval(&s, &d, &phi, &no_params()).unwrap(),
            eval(&s, &d, &e, &no_params()).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn negation_free_models_grow() {
    let s = parse_schema("p(X,Y) :- a(X,Z), b(Z,Y).\nq(X,Y) :- p(X,Z), c(Z,Y).").unwrap();
    let dom = ["1", "2"];
    let base = "a(1,2). b(2,1). c(1,1).";
    let m0 = standard_model(&s, &db(&dom, base)).unwrap();
    for extra in ["a(2,2).", "b(2,2).", "c(2,1).", "a(1,1)."] {
        let m1 = standard_model(&s, &db(&dom, &format!("{base} {extra}"))).unwrap();
        assert!(m0.is_subset(&m1), "{extra}");
    }
}

#[test]
fn constants_outside_the_domain_are_rejected() {
    let phi = parse_denial("<- p(X).").unwrap();
    let d = db(&["a"], "p(z).");
    assert!(eval(&Schema::default(), &d, &phi, &no_params()).is_err());
    let _ = Term::constant("z");
}
