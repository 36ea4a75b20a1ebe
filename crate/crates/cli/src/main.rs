use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use icsimp::analysis::{check_stratified, classify, GraphVerdict, Lang};
use icsimp::kernel::{canonical_theory, name, present, Denial, Name, Theory};
use icsimp::oracle::{self, DatabaseInstance, Mode, VerifyOptions, VerifyReport};
use icsimp::simplify::{choose_lang, simp, LangChoice, OptimizeOptions, Stats};
use icsimp::syntax::{
    check_update, parse_facts, parse_schema, parse_theory, parse_update, print_listing, Schema,
    Update,
};
use icsimp::transform::{after_lang, unfold_constraints, unfold_ls, unfold_lsext};

#[derive(Parser, Debug)]
#[command(
    name = "icsimp",
    version,
    about = "Simplified integrity checking for deductive databases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print rule firings, derivations and counters.
    #[arg(long, global = true)]
    trace: bool,
    /// Check every optimizer step with the oracle.
    #[arg(long, global = true)]
    paranoid: bool,
    /// Comma-separated domain for the oracle.
    #[arg(long, global = true, value_delimiter = ',')]
    domain: Option<Vec<String>>,
    #[arg(long, global = true, default_value_t = icsimp::simplify::DEFAULT_MAX_FIRINGS)]
    max_firings: usize,
    #[arg(long, global = true, default_value_t = icsimp::resolution::DEFAULT_MAX_CLAUSES)]
    max_clauses: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, global = true, value_enum, default_value_t = LangArg::Auto)]
    lang: LangArg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Language membership and stratification.
    Check {
        schema: PathBuf,
        update: Option<PathBuf>,
    },
    /// Constraints unfolded to extensional predicates.
    Unfold { schema: PathBuf },
    /// The weakest precondition After.
    After { schema: PathBuf, update: PathBuf },
    /// The simplified conditional weakest precondition.
    Simplify { schema: PathBuf, update: PathBuf },
    /// Brute-force check of a candidate precondition.
    Verify {
        schema: PathBuf,
        update: PathBuf,
        /// Theory to check; defaults to the simplified theory (cwp) or After (wp).
        #[arg(long)]
        candidate: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Cwp)]
        mode: ModeArg,
        #[arg(long, default_value_t = oracle::DEFAULT_MAX_EDBS)]
        max_edbs: u64,
        /// Sample databases when the space exceeds --max-edbs.
        #[arg(long)]
        sample: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate the constraints (or --theory) on a database instance.
    Eval {
        schema: PathBuf,
        edb: PathBuf,
        #[arg(long)]
        theory: Option<PathBuf>,
        /// Parameter value, `name=constant`.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, String)>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LangArg {
    Auto,
    Ls,
    Lsext,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Wp,
    Cwp,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    let (p, c) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=constant, got {s}"))?;
    Ok((p.trim_start_matches('$').to_string(), c.to_string()))
}

/// Failure of a run: usage and input errors, or a property that does not hold.
enum Failure {
    Usage(String),
    Property(String),
}

type Run = Result<Outcome, Failure>;

struct Outcome {
    text: String,
    json: Value,
    ok: bool,
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(p: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn load_schema(p: &Path) -> Result<Schema, Failure> {
    parse_schema(&read(p)?).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn load_update(p: &Path, s: &Schema) -> Result<Update, Failure> {
    let u = parse_update(&read(p)?).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
    check_update(s, &u).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
    Ok(u)
}

fn load_theory(p: &Path) -> Result<Theory, Failure> {
    parse_theory(&read(p)?).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn lang_choice(l: LangArg) -> LangChoice {
    match l {
        LangArg::Auto => LangChoice::Auto,
        LangArg::Ls => LangChoice::Ls,
        LangArg::Lsext => LangChoice::LsExt,
    }
}

fn lang_name(l: Lang) -> &'static str {
    match l {
        Lang::Ls => "L_S",
        Lang::LsExt => "L_Sext",
    }
}

fn theory_json(t: &[Denial]) -> Value {
    json!(t.iter().map(|d| d.to_string()).collect::<Vec<_>>())
}

fn verdict_json(v: &GraphVerdict) -> Value {
    json!({
        "verdict": v.to_string(),
        "lang": v.class.map(lang_name),
        "witness": v.rendered_witness,
    })
}

fn stats_json(s: &Stats) -> Value {
    json!({
        "firings": s.firings,
        "total_firings": s.total_firings,
        "firing_cap": s.firing_cap,
        "derivations": s.derivations,
        "max_saturation": s.max_saturation,
        "saturation_cap": s.saturation_cap,
        "saturation_cap_hits": s.saturation_cap_hits,
        "reduction_steps": s.reduction_steps,
    })
}

/// Canonical order, readable names borrowed from the schema's own constraints.
fn shown(s: &Schema, t: &[Denial]) -> Theory {
    let hints = hints(s);
    canonical_theory(t)
        .iter()
        .map(|d| present(d, &hints))
        .collect()
}

fn hints(s: &Schema) -> Theory {
    let mut hints = s.constraints.clone();
    if let Ok(u) = unfold_constraints(s, &s.constraints) {
        hints.extend(u);
    }
    hints
}

fn theory_outcome(s: &Schema, t: &[Denial]) -> Outcome {
    let t = shown(s, t);
    Outcome {
        text: print_listing(&t),
        json: json!({ "theory": theory_json(&t) }),
        ok: true,
    }
}

fn domain_of(cli: &Cli) -> Vec<Name> {
    cli.domain
        .clone()
        .unwrap_or_else(|| vec!["a".into(), "b".into(), "c".into()])
        .iter()
        .map(|c| name(c))
        .collect()
}

fn opt_options(cli: &Cli) -> OptimizeOptions {
    OptimizeOptions {
        max_firings: cli.max_firings,
        max_clauses: cli.max_clauses,
        paranoid: cli.paranoid.then(|| domain_of(cli)),
        ..OptimizeOptions::default()
    }
}

fn check(schema: &Path, update: Option<&Path>) -> Run {
    let s = load_schema(schema)?;
    let u = update.map(|p| load_update(p, &s)).transpose()?;
    let v = classify(&s, u.as_ref());
    let st = check_stratified(&s);
    let mut text = format!("{}\n", v.schema);
    if let Some(uv) = &v.update {
        text += &format!("update: {uv}\n");
    }
    text += &format!("{st}\n");
    Ok(Outcome {
        text,
        json: json!({
            "schema": verdict_json(&v.schema),
            "update": v.update.as_ref().map(verdict_json),
            "stratified": st.stratified,
            "strata": st.strata.iter().map(|(p, k)| (p.to_string(), *k)).collect::<BTreeMap<_, _>>(),
        }),
        ok: true,
    })
}

fn unfold(cli: &Cli, schema: &Path) -> Run {
    let s = load_schema(schema)?;
    let lang = match cli.lang {
        LangArg::Ls => Lang::Ls,
        LangArg::Lsext => Lang::LsExt,
        LangArg::Auto => classify(&s, None)
            .schema
            .class
            .ok_or_else(|| Failure::Property(classify(&s, None).schema.to_string()))?,
    };
    let t = match lang {
        Lang::Ls => unfold_ls(&s),
        Lang::LsExt => unfold_lsext(&s),
    }
    .map_err(|e| Failure::Property(e.to_string()))?;
    Ok(theory_outcome(&s, &t))
}

fn after_cmd(cli: &Cli, schema: &Path, update: &Path) -> Run {
    let s = load_schema(schema)?;
    let u = load_update(update, &s)?;
    let lang =
        choose_lang(&s, &u, lang_choice(cli.lang)).map_err(|e| Failure::Property(e.to_string()))?;
    let t = after_lang(&s, &u, lang).map_err(|e| Failure::Property(e.to_string()))?;
    Ok(theory_outcome(&s, &t))
}

fn simplify_cmd(cli: &Cli, schema: &Path, update: &Path) -> Run {
    let s = load_schema(schema)?;
    let u = load_update(update, &s)?;
    let r = simp(&s, &u, lang_choice(cli.lang), &opt_options(cli))
        .map_err(|e| Failure::Property(e.to_string()))?;
    let theory = shown(&s, &r.theory);
    let mut text = print_listing(&theory);
    if cli.trace {
        text += &format!("% language {}\n", lang_name(r.lang));
        for f in &r.trace {
            for line in f.to_string().lines() {
                text += &format!("% {line}\n");
            }
        }
        text += &format!("% {}\n", r.stats);
    }
    let mut json = json!({
        "lang": lang_name(r.lang),
        "theory": theory_json(&theory),
    });
    if cli.trace {
        json["after"] = theory_json(&r.after);
        json["delta"] = theory_json(&r.delta);
        json["trace"] = json!(r
            .trace
            .iter()
            .map(
                |f| json!({"rule": f.rule, "before": f.before, "after": f.after, "proof": f.proof})
            )
            .collect::<Vec<_>>());
        json["stats"] = stats_json(&r.stats);
    }
    Ok(Outcome {
        text,
        json,
        ok: true,
    })
}

fn report_json(r: &VerifyReport) -> Value {
    json!({
        "mode": r.mode.to_string(),
        "domain": r.domain.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "edb_atoms": r.edb_atoms,
        "edbs": r.edbs,
        "exhaustive": r.exhaustive,
        "param_assignments": r.param_assignments,
        "checked": r.checked,
        "failures": r.failures,
        "passed": r.passed(),
        "counterexamples": r.counterexamples.iter().map(|c| json!({
            "edb": c.edb.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            "params": c.params.iter().map(|(p, v)| (p.to_string(), v.to_string())).collect::<BTreeMap<_, _>>(),
            "candidate": c.candidate,
            "after": c.after,
        })).collect::<Vec<_>>(),
    })
}

#[allow(clippy::too_many_arguments)]
fn verify_cmd(
    cli: &Cli,
    schema: &Path,
    update: &Path,
    candidate: Option<&Path>,
    mode: ModeArg,
    max_edbs: u64,
    sample: bool,
    seed: u64,
) -> Run {
    let s = load_schema(schema)?;
    let u = load_update(update, &s)?;
    let mode = match mode {
        ModeArg::Wp => Mode::Wp,
        ModeArg::Cwp => Mode::Cwp,
    };
    let cand = match candidate {
        Some(p) => load_theory(p)?,
        None => match mode {
            Mode::Cwp => {
                simp(&s, &u, lang_choice(cli.lang), &opt_options(cli))
                    .map_err(|e| Failure::Property(e.to_string()))?
                    .theory
            }
            Mode::Wp => {
                let lang = choose_lang(&s, &u, lang_choice(cli.lang))
                    .map_err(|e| Failure::Property(e.to_string()))?;
                after_lang(&s, &u, lang).map_err(|e| Failure::Property(e.to_string()))?
            }
        },
    };
    let opts = VerifyOptions {
        mode,
        domain: domain_of(cli),
        max_edbs,
        subsample: sample,
        seed,
        ..VerifyOptions::new(mode, &[])
    };
    let r = oracle::verify(&s, &u, &cand, &opts).map_err(usage)?;
    let cand = shown(&s, &cand);
    let mut text = format!("candidate:\n{}", print_listing(&cand));
    text += &format!("{r}\n{}\n", if r.passed() { "PASS" } else { "FAIL" });
    let mut json = report_json(&r);
    json["candidate"] = theory_json(&cand);
    Ok(Outcome {
        text,
        json,
        ok: r.passed(),
    })
}

fn eval_cmd(
    cli: &Cli,
    schema: &Path,
    edb: &Path,
    theory: Option<&Path>,
    params: &[(String, String)],
) -> Run {
    let s = load_schema(schema)?;
    let facts =
        parse_facts(&read(edb)?).map_err(|e| Failure::Usage(format!("{}: {e}", edb.display())))?;
    let t = match theory {
        Some(p) => load_theory(p)?,
        None => s.constraints.clone(),
    };
    let mut domain: Vec<Name> = cli.domain.iter().flatten().map(|c| name(c)).collect();
    let mut consts: Vec<Name> = facts
        .iter()
        .flat_map(|a| a.args.iter())
        .filter_map(|t| match t {
            icsimp::kernel::Term::Const(c) => Some(c.clone()),
            _ => None,
        })
        .collect();
    consts.extend(params.iter().map(|(_, c)| name(c)));
    for c in consts {
        if !domain.contains(&c) {
            domain.push(c);
        }
    }
    let d = DatabaseInstance {
        domain,
        edb: facts.into_iter().collect(),
    };
    let pa: BTreeMap<Name, Name> = params.iter().map(|(p, c)| (name(p), name(c))).collect();
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut all = true;
    let hints = hints(&s);
    for phi in &t {
        let ok = oracle::eval(&s, &d, phi, &pa).map_err(usage)?;
        all &= ok;
        let shown = present(phi, &hints).to_string();
        text += &format!("{} {shown}\n", if ok { "holds" } else { "violated" });
        rows.push(json!({"denial": shown, "holds": ok}));
    }
    text += if all {
        "consistent\n"
    } else {
        "inconsistent\n"
    };
    Ok(Outcome {
        text,
        json: json!({"results": rows, "consistent": all}),
        ok: all,
    })
}

fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::Check { schema, update } => check(schema, update.as_deref()),
        Command::Unfold { schema } => unfold(cli, schema),
        Command::After { schema, update } => after_cmd(cli, schema, update),
        Command::Simplify { schema, update } => simplify_cmd(cli, schema, update),
        Command::Verify {
            schema,
            update,
            candidate,
            mode,
            max_edbs,
            sample,
            seed,
        } => verify_cmd(
            cli,
            schema,
            update,
            candidate.as_deref(),
            *mode,
            *max_edbs,
            *sample,
            *seed,
        ),
        Command::Eval {
            schema,
            edb,
            theory,
            params,
        } => eval_cmd(cli, schema, edb, theory.as_deref(), params),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            match cli.format {
                Format::Text => print!("{}", o.text),
                Format::Structured => {
                    println!("{}", serde_json::to_string_pretty(&o.json).unwrap())
                }
            }
            if o.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Property(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
    }
}
