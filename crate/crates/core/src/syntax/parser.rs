use std::collections::BTreeMap;

use super::ast::{Rule, Schema, Update};
use super::lexer::{tokenize, Spanned, Tok};
use super::safety;
use super::ParseError;
use crate::kernel::{name, Atom, Denial, GenLit, Literal, Name, Nee, Term};
use crate::syntax::ast::Definition;

/// Conjunction/disjunction tree used for rule bodies and update formulas.
#[derive(Clone, Debug)]
enum Form {
    Lit(Literal),
    And(Vec<Form>),
    Or(Vec<Form>),
}

impl Form {
    fn dnf(&self) -> Vec<Vec<Literal>> {
        match self {
            Form::Lit(l) => vec![vec![l.clone()]],
            Form::Or(fs) => fs.iter().flat_map(Form::dnf).collect(),
            Form::And(fs) => {
                let mut acc: Vec<Vec<Literal>> = vec![Vec::new()];
                for f in fs {
                    let parts = f.dnf();
                    let mut next = Vec::with_capacity(acc.len() * parts.len());
                    for a in &acc {
                        for p in &parts {
                            let mut c = a.clone();
                            c.extend(p.iter().cloned());
                            next.push(c);
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.pos];
        Err(ParseError::Syntax {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            let found = self.peek().describe();
            self.error(format!("expected {}, found {found}", t.describe()))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn term(&mut self) -> PResult<Term> {
        match self.next() {
            Tok::Var(v) => Ok(Term::Var(name(&v))),
            Tok::Param(p) => Ok(Term::Param(name(&p))),
            Tok::Ident(c) => Ok(Term::Const(name(&c))),
            other => {
                self.pos -= 1;
                self.error(format!("expected a term, found {}", other.describe()))
            }
        }
    }

    fn args(&mut self) -> PResult<Vec<Term>> {
        let mut args = Vec::new();
        if *self.peek() != Tok::LParen {
            return Ok(args);
        }
        self.next();
        if *self.peek() == Tok::RParen {
            self.next();
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.next() {
                Tok::Comma => continue,
                Tok::RParen => break,
                other => {
                    self.pos -= 1;
                    return self.error(format!("expected `,` or `)`, found {}", other.describe()));
                }
            }
        }
        Ok(args)
    }

    fn atom(&mut self) -> PResult<Atom> {
        match self.peek().clone() {
            Tok::Ident(p) => {
                self.next();
                let args = self.args()?;
                Ok(Atom::new(&p, args))
            }
            other => self.error(format!("expected a predicate, found {}", other.describe())),
        }
    }

    /// Atom, or `s = t` / `s != t`.
    fn plain_literal(&mut self) -> PResult<Literal> {
        let is_term_start = match self.peek() {
            Tok::Var(_) | Tok::Param(_) => true,
            Tok::Ident(_) => matches!(self.peek_at(1), Tok::Eq | Tok::Neq),
            _ => false,
        };
        if is_term_start {
            let a = self.term()?;
            let positive = match self.next() {
                Tok::Eq => true,
                Tok::Neq => false,
                other => {
                    self.pos -= 1;
                    return self.error(format!("expected `=` or `!=`, found {}", other.describe()));
                }
            };
            let b = self.term()?;
            let atom = Atom::equality(a, b);
            return Ok(Literal { atom, positive });
        }
        let atom = self.atom()?;
        if matches!(self.peek(), Tok::Eq | Tok::Neq) {
            return self.error("a compound atom cannot appear in an equality");
        }
        Ok(Literal::pos(atom))
    }

    fn literal(&mut self) -> PResult<Literal> {
        if self.at_keyword("not") {
            self.next();
            let l = self.plain_literal()?;
            return Ok(l.negated());
        }
        self.plain_literal()
    }

    fn genlit(&mut self) -> PResult<GenLit> {
        if self.at_keyword("not")
            && matches!(self.peek_at(1), Tok::Ident(s) if s == "exists")
            && matches!(self.peek_at(2), Tok::LParen)
        {
            self.next();
            self.next();
            self.expect(Tok::LParen)?;
            let mut vars = Vec::new();
            if *self.peek() == Tok::RParen {
                self.next();
            } else {
                loop {
                    match self.next() {
                        Tok::Var(v) => vars.push(name(&v)),
                        other => {
                            self.pos -= 1;
                            return self.error(format!(
                                "expected a quantified variable, found {}",
                                other.describe()
                            ));
                        }
                    }
                    match self.next() {
                        Tok::Comma => continue,
                        Tok::RParen => break,
                        other => {
                            self.pos -= 1;
                            return self
                                .error(format!("expected `,` or `)`, found {}", other.describe()));
                        }
                    }
                }
            }
            self.expect(Tok::LBrack)?;
            let body = self.body(&Tok::RBrack)?;
            self.expect(Tok::RBrack)?;
            return Ok(GenLit::Nee(Nee { vars, body }));
        }
        Ok(GenLit::Lit(self.literal()?))
    }

    /// Conjunction of general literals, or `true`, up to `end`.
    fn body(&mut self, end: &Tok) -> PResult<Vec<GenLit>> {
        if self.at_keyword("true") && (self.peek_at(1) == end) {
            self.next();
            return Ok(Vec::new());
        }
        let mut body = vec![self.genlit()?];
        while matches!(self.peek(), Tok::Comma | Tok::Amp) {
            self.next();
            body.push(self.genlit()?);
        }
        Ok(body)
    }

    fn formula(&mut self) -> PResult<Form> {
        let mut alts = vec![self.conjunction()?];
        while *self.peek() == Tok::Bar {
            self.next();
            alts.push(self.conjunction()?);
        }
        Ok(if alts.len() == 1 {
            alts.pop().unwrap()
        } else {
            Form::Or(alts)
        })
    }

    fn conjunction(&mut self) -> PResult<Form> {
        let mut parts = vec![self.factor()?];
        while matches!(self.peek(), Tok::Comma | Tok::Amp) {
            self.next();
            parts.push(self.factor()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Form::And(parts)
        })
    }

    fn factor(&mut self) -> PResult<Form> {
        if *self.peek() == Tok::LParen {
            self.next();
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        if self.at_keyword("true") {
            self.next();
            return Ok(Form::And(Vec::new()));
        }
        if self.at_keyword("false") {
            self.next();
            return Ok(Form::Or(Vec::new()));
        }
        Ok(Form::Lit(self.literal()?))
    }

    fn optional_dot(&mut self) {
        if *self.peek() == Tok::Dot {
            self.next();
        }
    }
}

fn check_arities<'a>(
    atoms: impl Iterator<Item = &'a Atom>,
    seen: &mut BTreeMap<Name, usize>,
) -> PResult<()> {
    for a in atoms {
        if a.is_equality() {
            continue;
        }
        match seen.get(&a.pred) {
            Some(&n) if n != a.arity() => {
                return Err(ParseError::Arity {
                    pred: a.pred.to_string(),
                    first: n,
                    second: a.arity(),
                })
            }
            Some(_) => {}
            None => {
                seen.insert(a.pred.clone(), a.arity());
            }
        }
    }
    Ok(())
}

fn body_atoms<'a>(body: &'a [GenLit], out: &mut Vec<&'a Atom>) {
    for g in body {
        match g {
            GenLit::Lit(l) => out.push(&l.atom),
            GenLit::Nee(n) => body_atoms(&n.body, out),
        }
    }
}

/// Parses a `.sch` schema: rules, denials and `hyp` hypotheses.
pub fn parse_schema(src: &str) -> PResult<Schema> {
    let mut p = Parser::new(src)?;
    let mut schema = Schema::default();
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Deny => {
                p.next();
                let body = p.body(&Tok::Dot)?;
                p.expect(Tok::Dot)?;
                schema.constraints.push(Denial { body });
            }
            Tok::Ident(kw) if kw == "hyp" && *p.peek_at(1) == Tok::Deny => {
                p.next();
                p.next();
                let body = p.body(&Tok::Dot)?;
                p.expect(Tok::Dot)?;
                schema.hypotheses.push(Denial { body });
            }
            Tok::Ident(kw) if kw == "true" && *p.peek_at(1) == Tok::Dot => {
                p.next();
                p.next();
            }
            Tok::Ident(_) => {
                let head = p.atom()?;
                if *p.peek() != Tok::If {
                    let found = p.peek().describe();
                    return p.error(format!("expected `:-` after rule head, found {found}"));
                }
                p.next();
                let f = p.formula()?;
                p.expect(Tok::Dot)?;
                for body in f.dnf() {
                    schema.rules.push(Rule {
                        head: head.clone(),
                        body,
                    });
                }
            }
            other => {
                return p.error(format!(
                    "expected a rule or a denial, found {}",
                    other.describe()
                ))
            }
        }
    }
    validate_schema(&schema)?;
    Ok(schema)
}

fn validate_schema(s: &Schema) -> PResult<()> {
    let mut seen = BTreeMap::new();
    for r in &s.rules {
        check_arities(
            std::iter::once(&r.head).chain(r.body.iter().map(|l| &l.atom)),
            &mut seen,
        )?;
    }
    for d in s.constraints.iter().chain(&s.hypotheses) {
        let mut atoms = Vec::new();
        body_atoms(&d.body, &mut atoms);
        check_arities(atoms.into_iter(), &mut seen)?;
    }
    for r in &s.rules {
        if let Some(v) = safety::unsafe_rule_var(r) {
            return Err(ParseError::Unsafe {
                what: format!("rule for {}", r.head.pred),
                var: v.to_string(),
            });
        }
    }
    for d in s.constraints.iter().chain(&s.hypotheses) {
        if let Some(v) = safety::unsafe_denial_var(d) {
            return Err(ParseError::Unsafe {
                what: format!("denial `{d}`"),
                var: v.to_string(),
            });
        }
    }
    Ok(())
}

/// Parses a single denial, checking safety.
pub fn parse_denial(src: &str) -> PResult<Denial> {
    let d = parse_denial_unchecked(src)?;
    if let Some(v) = safety::unsafe_denial_var(&d) {
        return Err(ParseError::Unsafe {
            what: format!("denial `{d}`"),
            var: v.to_string(),
        });
    }
    Ok(d)
}

/// Parses a single denial without the safety check.
pub fn parse_denial_unchecked(src: &str) -> PResult<Denial> {
    let mut p = Parser::new(src)?;
    p.expect(Tok::Deny)?;
    let body = p.body(&Tok::Dot)?;
    p.optional_dot();
    if *p.peek() != Tok::Eof {
        let found = p.peek().describe();
        return p.error(format!("trailing input: {found}"));
    }
    Ok(Denial { body })
}

/// Parses a theory file: denials only (`true.` for the empty theory).
pub fn parse_theory(src: &str) -> PResult<Vec<Denial>> {
    let s = parse_schema(src)?;
    if !s.rules.is_empty() {
        return Err(ParseError::Syntax {
            line: 1,
            col: 1,
            msg: "a theory may not contain rules".into(),
        });
    }
    Ok(s.constraints)
}

/// Parses a `.upd` file. Accepted items, `.` optional:
/// `add p(t..)`, `del p(t..)`, `update p(X..) <= formula`.
pub fn parse_update(src: &str) -> PResult<Update> {
    let mut p = Parser::new(src)?;
    let mut update = Update::default();
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "add" || kw == "del" => {
                p.next();
                let atom = p.atom()?;
                p.optional_dot();
                update.entries.push(if kw == "add" {
                    Update::insertion(&atom)
                } else {
                    Update::deletion(&atom)
                });
            }
            Tok::Ident(kw) if kw == "update" => {
                p.next();
                let head = p.atom()?;
                let mut head_vars = Vec::new();
                for t in &head.args {
                    match t {
                        Term::Var(v) if !head_vars.contains(v) => head_vars.push(v.clone()),
                        _ => {
                            return p.error(format!(
                                "update head {head} must have distinct variables as arguments"
                            ))
                        }
                    }
                }
                p.expect(Tok::Defines)?;
                let f = p.formula()?;
                p.optional_dot();
                update.entries.push(Definition {
                    pred: head.pred.clone(),
                    head_vars,
                    disjuncts: f.dnf(),
                });
            }
            other => {
                return p.error(format!(
                    "expected `add`, `del` or `update`, found {}",
                    other.describe()
                ))
            }
        }
    }
    let mut targets = std::collections::BTreeSet::new();
    let mut seen = BTreeMap::new();
    for e in &update.entries {
        if !targets.insert(e.pred.clone()) {
            return Err(ParseError::Syntax {
                line: 1,
                col: 1,
                msg: format!("predicate {} updated twice", e.pred),
            });
        }
        seen.insert(e.pred.clone(), e.arity());
        check_arities(e.disjuncts.iter().flatten().map(|l| &l.atom), &mut seen)?;
        if let Some(v) = safety::unsafe_definition_var(e) {
            return Err(ParseError::Unsafe {
                what: format!("update of {}", e.pred),
                var: v.to_string(),
            });
        }
    }
    Ok(update)
}

/// Checks an update against a schema: only extensional predicates may be
/// updated and arities must agree.
pub fn check_update(schema: &Schema, update: &Update) -> PResult<()> {
    let preds = schema.predicates();
    for e in &update.entries {
        if schema.is_intensional(&e.pred) {
            return Err(ParseError::IntensionalUpdate(e.pred.to_string()));
        }
        for l in e.disjuncts.iter().flatten() {
            if l.is_database() {
                if let Some(&n) = preds.get(&l.atom.pred) {
                    if n != l.atom.arity() {
                        return Err(ParseError::Arity {
                            pred: l.atom.pred.to_string(),
                            first: n,
                            second: l.atom.arity(),
                        });
                    }
                }
            }
        }
        match preds.get(&e.pred) {
            Some(&n) if n != e.arity() => {
                return Err(ParseError::Arity {
                    pred: e.pred.to_string(),
                    first: n,
                    second: e.arity(),
                })
            }
            None => return Err(ParseError::UnknownPredicate(e.pred.to_string())),
            _ => {}
        }
    }
    Ok(())
}

/// Parses a `.edb` file of ground facts `p(a,b).`.
pub fn parse_facts(src: &str) -> PResult<Vec<Atom>> {
    let mut p = Parser::new(src)?;
    let mut facts = Vec::new();
    let mut seen = BTreeMap::new();
    while *p.peek() != Tok::Eof {
        let atom = p.atom()?;
        if let Some(t) = atom.args.iter().find(|t| !t.is_const()) {
            return p.error(format!("fact {atom} has non-constant argument {t}"));
        }
        p.expect(Tok::Dot)?;
        check_arities(std::iter::once(&atom), &mut seen)?;
        facts.push(atom);
    }
    Ok(facts)
}
