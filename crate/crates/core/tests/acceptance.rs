//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use icsimp::analysis::{classify, Lang};
use icsimp::kernel::{canonical_theory, is_variant, Denial, GenLit, Name, Theory};
use icsimp::oracle::{eval_theory, non_entailment, verify, Mode, VerifyOptions, VerifyReport};
use icsimp::rewrite::{
    eliminate_equality, eliminate_nonequality, expand, extended_subsumes, reduce, Site,
};
use icsimp::simplify::{simp, LangChoice, OptimizeOptions, SimplificationResult, Stats};
use icsimp::syntax::{parse_schema, parse_theory, parse_update, print_theory, Schema, Update};
use icsimp::transform::{after_lang, unfold_ls, unfold_lsext};

fn corpus(file: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(file);
    std::fs::read_to_string(p).unwrap()
}

struct Case {
    label: String,
    schema: Schema,
    update: Update,
    lang: Lang,
    simp: Result<SimplificationResult, String>,
    elapsed: Duration,
}

impl Case {
    fn new(label: String, schema: Schema, update: Update) -> Case {
        let t = Instant::now();
        let simp = simp(
            &schema,
            &update,
            LangChoice::Auto,
            &OptimizeOptions::default(),
        )
        .map_err(|e| e.to_string());
        let elapsed = t.elapsed();
        let lang = classify(&schema, Some(&update))
            .joint()
            .expect("non-recursive");
        Case {
            label,
            schema,
            update,
            lang,
            simp,
            elapsed,
        }
    }

    fn out(&self) -> Result<&SimplificationResult, String> {
        self.simp
            .as_ref()
            .map_err(|e| format!("{}: {e}", self.label))
    }

    /// Domains the oracle runs on, with whether sampling is allowed.
    fn domains(&self) -> Vec<(Vec<&'static str>, bool)> {
        if self.label == "ll96" {
            // 27 atoms over three constants: exhaustive on {1,5}, sampled on three
            vec![(vec!["1", "5"], false), (vec!["1", "5", "c"], true)]
        } else {
            vec![(common::DOMAIN.to_vec(), false)]
        }
    }
}

const CORPUS: [&str; 4] = ["book", "mutex", "ll96", "ld98"];
const WANT_LS: usize = 20;
const WANT_LSEXT: usize = 10;

fn corpus_case(stem: &str) -> Case {
    let s = parse_schema(&corpus(&format!("{stem}.sch"))).unwrap();
    let u = parse_update(&corpus(&format!("{stem}.upd"))).unwrap();
    Case::new(stem.to_string(), s, u)
}

static CASES: OnceLock<Vec<Case>> = OnceLock::new();

/// Corpus items followed by the generated cases.
fn cases() -> &'static [Case] {
    CASES.get_or_init(|| {
        let mut out: Vec<Case> = CORPUS.iter().map(|s| corpus_case(s)).collect();
        let (mut ls, mut ext) = (0, 0);
        let mut r = common::rng(7);
        let mut n = 0;
        while ls < WANT_LS || ext < WANT_LSEXT {
            let (src, upd, s, u) = common::schema_case(&mut r);
            n += 1;
            let lang = classify(&s, Some(&u)).joint();
            let keep = match lang {
                Some(Lang::Ls) if ls < WANT_LS => {
                    ls += 1;
                    true
                }
                Some(Lang::LsExt) if ext < WANT_LSEXT => {
                    ext += 1;
                    true
                }
                _ => false,
            };
            if keep {
                let label = format!("gen#{n}\n{src}{upd}");
                out.push(Case::new(label, s, u));
            }
        }
        out
    })
}

fn short(label: &str) -> &str {
    label.lines().next().unwrap_or(label)
}

fn same_theory(a: &[Denial], b: &[Denial]) -> bool {
    print_theory(&canonical_theory(a)) == print_theory(&canonical_theory(b))
}

fn variants_match(a: &[Denial], b: &[Denial]) -> bool {
    a.iter().all(|x| b.iter().any(|y| is_variant(x, y)))
        && b.iter().all(|y| a.iter().any(|x| is_variant(x, y)))
}

type Verdict = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Verdict {
    let c = &cases()[0];
    let out = c.out()?;
    let want = parse_theory("<- b($i,Y), Y != $t.").unwrap();
    check(same_theory(&out.theory, &want), || {
        format!("simplify gave {}", print_theory(&out.theory))
    })?;
    let raw = after_lang(&c.schema, &c.update, Lang::Ls).map_err(|e| e.to_string())?;
    let paper = parse_theory(
        "<- b(X,Y), b(X,Z), Y != Z.
         <- b(X,Y), X = $i, Z = $t, Y != Z.
         <- X = $i, Y = $t, b(X,Z), Y != Z.
         <- X = $i, Y = $t, X = $i, Z = $t, Y != Z.",
    )
    .unwrap();
    check(variants_match(&raw, &paper), || {
        format!(
            "After_LS gave {} denials: {}",
            raw.len(),
            print_theory(&raw)
        )
    })?;
    check(c.elapsed < Duration::from_secs(1), || {
        format!("took {:?}", c.elapsed)
    })?;
    let mut msg = format!(
        "After_LS matches the 4 displayed denials; simplify in {:?}",
        c.elapsed
    );
    if raw.len() != paper.len() {
        let merged: Vec<String> = paper
            .iter()
            .enumerate()
            .filter(|(i, x)| paper[..*i].iter().any(|y| is_variant(x, y)))
            .map(|(i, _)| (i + 1).to_string())
            .collect();
        msg += &format!(
            "; deviation: {} distinct denials, displayed denial(s) {} repeat an earlier one \
             up to renaming and symmetry of !=",
            raw.len(),
            merged.join(",")
        );
    }
    Ok(msg)
}

fn criterion_2() -> Verdict {
    let c = &cases()[1];
    let t = Instant::now();
    let out = c.out()?;
    check(print_theory(&out.theory) == "<- q(a).\n", || {
        format!("simp gave {}", print_theory(&out.theory))
    })?;
    let cwp = verify(
        &c.schema,
        &c.update,
        &out.theory,
        &VerifyOptions::new(Mode::Cwp, &["a", "b"]),
    )
    .map_err(|e| e.to_string())?;
    check(cwp.passed() && cwp.exhaustive, || cwp.to_string())?;
    let mut o = VerifyOptions::new(Mode::Wp, &["a", "b"]);
    o.max_counterexamples = 16;
    let wp = verify(&c.schema, &c.update, &out.theory, &o).map_err(|e| e.to_string())?;
    check(!wp.passed(), || "WP not refuted".into())?;
    let claimed = wp
        .counterexamples
        .iter()
        .any(|x| x.edb.iter().map(|a| a.to_string()).collect::<Vec<_>>() == ["p(a)", "q(a)"]);
    let elapsed = c.elapsed + t.elapsed();
    check(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    let mut msg = format!(
        "CWP holds over {{a,b}}; WP refuted ({} counterexamples, first {})",
        wp.failures, wp.counterexamples[0]
    );
    if !claimed {
        msg += "; deviation: D = {p(a), q(a)} is not a counterexample (candidate and \
                post-update constraints are both false there)";
    }
    Ok(msg)
}

fn criterion_3() -> Verdict {
    let c = &cases()[2];
    let out = c.out()?;
    check(out.theory.is_empty(), || print_theory(&out.theory))?;
    check(c.elapsed < Duration::from_secs(5), || {
        format!("took {:?}", c.elapsed)
    })?;
    Ok(format!("empty theory in {:?}", c.elapsed))
}

fn criterion_4() -> Verdict {
    let c = &cases()[3];
    let out = c.out()?;
    let want = parse_theory(
        "<- woman($a).
         <- parent($a,Y), not exists(T,Z)[parent($a,Z), parent(T,Z), woman(T)].",
    )
    .unwrap();
    check(same_theory(&out.theory, &want), || {
        print_theory(&out.theory)
    })?;
    let unfolded = unfold_lsext(&c.schema).map_err(|e| e.to_string())?;
    let paper = parse_theory(
        "<- man(X), woman(X).
         <- parent(X,Y), man(X), not exists(T,Z)[parent(X,Z), parent(T,Z), man(X), woman(T)].
         <- parent(X,Y), woman(X), not exists(T,Z)[parent(X,Z), parent(T,Z), woman(X), man(T)].",
    )
    .unwrap();
    check(same_theory(&unfolded, &paper), || print_theory(&unfolded))?;
    check(c.elapsed < Duration::from_secs(5), || {
        format!("took {:?}", c.elapsed)
    })?;
    Ok(format!(
        "two constraints, 3-denial unfolding, in {:?}",
        c.elapsed
    ))
}

fn criterion_5() -> Verdict {
    let s1 = parse_schema(&corpus("s1.sch")).unwrap();
    let s2 = parse_schema(&corpus("s2.sch")).unwrap();
    let v1 = classify(&s1, None).schema;
    let v2 = classify(&s2, None).schema;
    check(v1.class == Some(Lang::LsExt), || format!("S1: {v1}"))?;
    let w = v1.rendered_witness.clone().unwrap_or_default();
    check(w == "s1* -> ⊥", || format!("S1 witness {w}"))?;
    check(v2.class == Some(Lang::Ls), || format!("S2: {v2}"))?;
    Ok(format!("S1: {v1}; S2: {v2}"))
}

/// Runs the oracle on every case; `candidate` picks the theory to check.
fn suite(mode: Mode, candidate: impl Fn(&Case) -> Result<Theory, String>) -> Verdict {
    let t = Instant::now();
    let (mut edbs, mut runs, mut sampled) = (0u64, 0, Vec::new());
    for c in cases() {
        let cand = candidate(c)?;
        for (dom, sample) in c.domains() {
            let mut o = VerifyOptions::new(mode, &dom);
            o.subsample = sample;
            o.seed = 1;
            let r: VerifyReport = verify(&c.schema, &c.update, &cand, &o)
                .map_err(|e| format!("{}: {e}", short(&c.label)))?;
            check(r.passed(), || format!("{}:\n{r}", c.label))?;
            check(r.exhaustive || sample, || {
                format!("{}: not exhaustive", c.label)
            })?;
            if !r.exhaustive {
                sampled.push(format!("{} over {{{}}}", short(&c.label), dom.join(",")));
            }
            edbs += r.edbs;
            runs += 1;
        }
    }
    let elapsed = t.elapsed();
    check(elapsed < Duration::from_secs(600), || {
        format!("took {elapsed:?}")
    })?;
    let (ls, ext) = generated_counts();
    let mut msg = format!(
        "{} corpus + {ls} L_S + {ext} L_Sext generated cases, {runs} runs, {edbs} databases, \
         zero counterexamples, {elapsed:.1?}",
        CORPUS.len()
    );
    if !sampled.is_empty() {
        msg += &format!("; sampled 2^20 of the space for {}", sampled.join(", "));
    }
    Ok(msg)
}

fn generated_counts() -> (usize, usize) {
    let g = &cases()[CORPUS.len()..];
    (
        g.iter().filter(|c| c.lang == Lang::Ls).count(),
        g.iter().filter(|c| c.lang == Lang::LsExt).count(),
    )
}

fn criterion_6() -> Verdict {
    suite(Mode::Wp, |c| {
        after_lang(&c.schema, &c.update, c.lang).map_err(|e| format!("{}: {e}", c.label))
    })
}

fn criterion_7() -> Verdict {
    suite(Mode::Cwp, |c| c.out().map(|o| o.theory.clone()))
}

fn sites(body: &[GenLit], path: &mut Vec<usize>, out: &mut Vec<(Site, bool)>) {
    for (i, g) in body.iter().enumerate() {
        let GenLit::Nee(n) = g else { continue };
        path.push(i);
        for (k, h) in n.body.iter().enumerate() {
            if let GenLit::Lit(l) = h {
                if l.is_builtin() {
                    let site = Site {
                        path: path.clone(),
                        literal: k,
                    };
                    out.push((site, l.positive));
                }
            }
        }
        sites(&n.body, path, out);
        path.pop();
    }
}

fn criterion_8() -> Verdict {
    let t = Instant::now();
    let mut r = common::rng(8);
    let empty = Schema::default();
    let (mut checks, mut elims, mut unfolds) = (0, 0, 0);
    for i in 0..1000 {
        let phi = common::denial(&mut r, 2);
        let d = common::database(&mut r, &common::EDB);
        let pa = common::params(&mut r, &["x"]);
        let holds = |t: &[Denial]| eval_theory(&empty, &d, t, &pa).map_err(|e| e.to_string());
        let base = holds(std::slice::from_ref(&phi))?;
        let fail = |what: &str, t: &[Denial]| {
            format!("pair {i}: {what} changed {phi} into {}", print_theory(t))
        };
        let red = reduce(&phi);
        check(holds(&red)? == base, || fail("reduce", &red))?;
        let exp = [expand(&phi)];
        check(holds(&exp)? == base, || fail("expand", &exp))?;
        checks += 2;
        let mut ss = Vec::new();
        sites(&phi.body, &mut Vec::new(), &mut ss);
        for (site, positive) in ss {
            let step = if positive {
                eliminate_equality(&phi, &site)
            } else {
                eliminate_nonequality(&phi, &site)
            };
            if let Ok(out) = step {
                check(holds(&out)? == base, || fail("elimination", &out))?;
                elims += 1;
            }
        }
        let (src, _, s, _) = common::schema_case(&mut r);
        let d = common::database(&mut r, &common::SCHEMA_EDB);
        let none = Default::default();
        let want = eval_theory(&s, &d, &s.constraints, &none).map_err(|e| e.to_string())?;
        let mut unfolded = vec![("unfold_lsext", unfold_lsext(&s))];
        if classify(&s, None).schema.in_ls() {
            unfolded.push(("unfold_ls", unfold_ls(&s)));
        }
        for (what, u) in unfolded {
            let u = u.map_err(|e| format!("pair {i}: {e}"))?;
            let got = eval_theory(&empty, &d, &u, &none).map_err(|e| e.to_string())?;
            check(got == want, || {
                format!("pair {i}: {what} of\n{src}gave {}", print_theory(&u))
            })?;
            unfolds += 1;
        }
    }
    Ok(format!(
        "1000 pairs: {} reduce/expand, {elims} elimination, {unfolds} unfold checks, zero violations, {:.1?}",
        checks,
        t.elapsed()
    ))
}

fn specialize(r: &mut rand_chacha::ChaCha8Rng, phi: &Denial) -> Denial {
    use icsimp::kernel::{instantiate, rename_away, Subst, Term};
    use rand::Rng;
    let vars: Vec<Name> = phi.level0_vars().into_iter().collect();
    let mut s = Subst::new();
    for v in &vars {
        let t = match r.gen_range(0..4) {
            0 => Term::constant(common::DOMAIN[r.gen_range(0..3)]),
            1 => Term::Var(vars[r.gen_range(0..vars.len())].clone()),
            _ => continue,
        };
        if t != Term::Var(v.clone()) && !s.contains(v) {
            s.bind(v.clone(), t);
        }
    }
    let mut body: Vec<GenLit> = phi.body.iter().map(|g| instantiate(g, &s)).collect();
    if r.gen_bool(0.6) {
        let extra = rename_away(&common::denial(r, 1), &phi.vars());
        body.extend(extra.body);
    }
    // drop a literal from inside an NEE: the NEE gets stronger
    if r.gen_bool(0.3) {
        if let Some(GenLit::Nee(n)) = body
            .iter_mut()
            .find(|g| matches!(g, GenLit::Nee(n) if n.body.len() > 1))
        {
            let k = r.gen_range(0..n.body.len());
            n.body.remove(k);
            n.prune_vars();
        }
    }
    Denial::new(body)
}

fn criterion_9() -> Verdict {
    let t = Instant::now();
    let mut r = common::rng(9);
    let dom: Vec<Name> = common::domain();
    let (mut pairs, mut tried) = (0, 0);
    while pairs < 1000 {
        tried += 1;
        check(tried < 200_000, || {
            format!("only {pairs} subsuming pairs found")
        })?;
        let phi = common::denial(&mut r, 1);
        let psi = if tried % 5 == 0 {
            common::denial(&mut r, 1)
        } else {
            specialize(&mut r, &phi)
        };
        if !extended_subsumes(&phi, &psi) {
            continue;
        }
        pairs += 1;
        let w = non_entailment(&[], &[phi.clone()], &[psi.clone()], &dom, 1 << 20)
            .map_err(|e| e.to_string())?;
        check(w.is_none(), || {
            format!("{phi} subsumes {psi} but {} separates them", w.unwrap())
        })?;
    }
    Ok(format!(
        "1000 subsuming pairs ({tried} tried), zero violations, {:.1?}",
        t.elapsed()
    ))
}

fn criterion_10() -> Verdict {
    let mut worst = Stats::default();
    let mut total = 0;
    for c in cases() {
        let st = &c.out()?.stats;
        check(st.within_caps(), || format!("{}: {st}", c.label))?;
        check(st.max_saturation < st.saturation_cap, || {
            format!("{}: {st}", c.label)
        })?;
        worst.firing_cap = st.firing_cap;
        worst.saturation_cap = st.saturation_cap;
        worst.total_firings = worst.total_firings.max(st.total_firings);
        worst.max_saturation = worst.max_saturation.max(st.max_saturation);
        total += 1;
    }
    Ok(format!(
        "{total} inputs; max firings {}/{}, max saturation {}/{}, no cap hits",
        worst.total_firings, worst.firing_cap, worst.max_saturation, worst.saturation_cap
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("book end-to-end", criterion_1),
        ("mutual exclusion", criterion_2),
        ("LL96", criterion_3),
        ("LD98", criterion_4),
        ("language classification", criterion_5),
        ("WP suite", criterion_6),
        ("CWP suite", criterion_7),
        ("equivalence preservation", criterion_8),
        ("subsumption soundness", criterion_9),
        ("termination discipline", criterion_10),
    ];
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let v = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|p| Err(format!("panic: {:?}", p.downcast_ref::<String>())));
        match v {
            Ok(m) => println!("PASS {n:>2} {title}: {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL {n:>2} {title}: {m}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
