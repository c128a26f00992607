//! Recursive-descent parser. Declarations are collected first so statements
//! may reference names declared further down the file.

use std::collections::BTreeMap;

use super::lexer::{lex, Tok};
use super::{DomainStatement, InitialStatement, LangError, Located, Query, Span, Theory};
use crate::logic::{Action, Agent, AgentSet, Fluent, Formula, Group, Literal, Prop, Signature, Symbol};

const KEYWORDS: &[&str] = &[
    "agents",
    "fluents",
    "actions",
    "executable",
    "if",
    "causes",
    "determines",
    "announces",
    "observes",
    "aware_of",
    "initially",
    "after",
    "true",
    "false",
];

/// Base names that would collide with modal operators in formula position.
const RESERVED_FLUENT_BASES: &[&str] = &["B", "C", "E"];

type Toks = [(Tok, Span)];

fn split_statements(toks: &Toks, semi_terminates: bool) -> Vec<&Toks> {
    let mut out = Vec::new();
    let mut start = 0;
    for (k, (t, _)) in toks.iter().enumerate() {
        let end = *t == Tok::Newline || (semi_terminates && *t == Tok::Semi);
        if end {
            if k > start {
                out.push(&toks[start..k]);
            }
            start = k + 1;
        }
    }
    if start < toks.len() {
        out.push(&toks[start..]);
    }
    out
}

struct Parser<'a> {
    toks: &'a Toks,
    pos: usize,
    sig: Option<&'a Signature>,
}

impl<'a> Parser<'a> {
    fn new(toks: &'a Toks, sig: Option<&'a Signature>) -> Self {
        Parser { toks, pos: 0, sig }
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + k).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, s)| *s)
            .unwrap_or_default()
    }

    fn sig(&self) -> &'a Signature {
        self.sig.expect("signature resolved before statement parsing")
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, LangError> {
        Err(LangError::Syntax { span: self.span(), msg: msg.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, LangError> {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of statement")),
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), LangError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), LangError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn finish(&self) -> Result<(), LangError> {
        if self.pos < self.toks.len() {
            self.unexpected("end of statement")
        } else {
            Ok(())
        }
    }

    /// `ident ( '(' name {',' name} ')' )?`, normalised without spaces.
    fn name(&mut self) -> Result<(String, Span), LangError> {
        let span = self.span();
        let base = match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => s.clone(),
            Some(Tok::Ident(s)) => return self.error(format!("keyword `{s}` cannot be used as a name")),
            _ => return self.unexpected("a name"),
        };
        self.pos += 1;
        let mut out = base;
        if self.eat(&Tok::LParen) {
            out.push('(');
            loop {
                out.push_str(&self.name()?.0);
                if self.eat(&Tok::Comma) {
                    out.push(',');
                } else {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
            out.push(')');
        }
        Ok((out, span))
    }

    fn name_list(&mut self) -> Result<Vec<(String, Span)>, LangError> {
        let mut out = vec![self.name()?];
        while self.eat(&Tok::Comma) {
            out.push(self.name()?);
        }
        Ok(out)
    }

    fn resolve(&self, name: &str, span: Span, kind: &'static str) -> Result<Symbol, LangError> {
        let found = self.sig().lookup(name);
        let matches = matches!(
            (found, kind),
            (Some(Symbol::Agent(_)), "agent") | (Some(Symbol::Fluent(_)), "fluent") | (Some(Symbol::Action(_)), "action")
        );
        match found {
            Some(sym) if matches => Ok(sym),
            Some(_) => Err(LangError::Invalid { span, msg: format!("`{name}` is not a declared {kind}") }),
            None => Err(LangError::Undeclared { span, kind, name: name.to_string() }),
        }
    }

    fn agent(&mut self) -> Result<Agent, LangError> {
        let (n, s) = self.name()?;
        match self.resolve(&n, s, "agent")? {
            Symbol::Agent(a) => Ok(a),
            _ => unreachable!(),
        }
    }

    fn fluent(&mut self) -> Result<Fluent, LangError> {
        let (n, s) = self.name()?;
        match self.resolve(&n, s, "fluent")? {
            Symbol::Fluent(f) => Ok(f),
            _ => unreachable!(),
        }
    }

    fn action(&mut self) -> Result<Action, LangError> {
        let (n, s) = self.name()?;
        match self.resolve(&n, s, "action")? {
            Symbol::Action(a) => Ok(a),
            _ => unreachable!(),
        }
    }

    // formula := or ('->' formula)?
    fn formula(&mut self) -> Result<Formula, LangError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LangError> {
        let mut parts = vec![self.conjunction()?];
        while self.eat(&Tok::Pipe) {
            parts.push(self.conjunction()?);
        }
        Ok(Formula::or(parts))
    }

    fn conjunction(&mut self) -> Result<Formula, LangError> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::Amp) {
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula, LangError> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::not(self.unary()?));
        }
        match self.peek() {
            Some(Tok::Ident(s)) if s == "B" => {
                self.pos += 1;
                self.expect(Tok::LBracket)?;
                let i = self.agent()?;
                self.expect(Tok::RBracket)?;
                Ok(Formula::b(i, self.unary()?))
            }
            Some(Tok::Ident(s)) if s == "C" || s == "E" => {
                let common = s == "C";
                self.pos += 1;
                let group = self.group()?;
                let body = self.unary()?;
                Ok(if common { Formula::c(group, body) } else { Formula::e(group, body) })
            }
            _ => self.atom(),
        }
    }

    fn group(&mut self) -> Result<Group, LangError> {
        if !(self.peek() == Some(&Tok::LBracket) && self.peek_at(1) == Some(&Tok::LBrace)) {
            return Ok(Group::All);
        }
        self.pos += 2;
        let span = self.span();
        let mut set = AgentSet::new();
        if self.peek() != Some(&Tok::RBrace) {
            set.insert(self.agent()?);
            while self.eat(&Tok::Comma) {
                set.insert(self.agent()?);
            }
        }
        self.expect(Tok::RBrace)?;
        self.expect(Tok::RBracket)?;
        if set.is_empty() {
            return Err(LangError::Invalid { span, msg: "agent group must not be empty".into() });
        }
        Ok(Group::Set(set))
    }

    fn atom(&mut self) -> Result<Formula, LangError> {
        if self.eat(&Tok::LParen) {
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        if self.eat_keyword("true") {
            return Ok(Formula::top());
        }
        if self.eat_keyword("false") {
            return Ok(Formula::Prop(Prop::False));
        }
        Ok(Formula::atom(self.fluent()?))
    }

    fn prop(&mut self, what: &str) -> Result<Prop, LangError> {
        let span = self.span();
        match self.condition()? {
            Formula::Prop(p) => Ok(p),
            _ => Err(LangError::Invalid { span, msg: format!("{what} must be a fluent formula") }),
        }
    }

    /// `formula {',' formula}`: commas read as conjunction.
    fn condition(&mut self) -> Result<Formula, LangError> {
        let mut parts = vec![self.formula()?];
        while self.eat(&Tok::Comma) {
            parts.push(self.formula()?);
        }
        Ok(Formula::and(parts))
    }

    fn if_condition(&mut self) -> Result<Formula, LangError> {
        if self.eat_keyword("if") {
            self.condition()
        } else {
            Ok(Formula::top())
        }
    }

    fn literal(&mut self) -> Result<Literal, LangError> {
        let positive = !self.eat(&Tok::Bang);
        let f = self.fluent()?;
        Ok(Literal { fluent: f, positive })
    }

    fn literal_set(&mut self) -> Result<Vec<Literal>, LangError> {
        let braced = self.eat(&Tok::LBrace);
        let mut out = vec![self.literal()?];
        while self.eat(&Tok::Comma) || self.eat(&Tok::Amp) {
            out.push(self.literal()?);
        }
        if braced {
            self.expect(Tok::RBrace)?;
        }
        Ok(out)
    }

    fn statement(&mut self, out: &mut Statements) -> Result<(), LangError> {
        let span = self.span();
        if self.eat_keyword("executable") {
            let action = self.action()?;
            let condition = self.if_condition()?;
            out.domain.push(Located::new(span, DomainStatement::Executable { action, condition }));
        } else if self.eat_keyword("initially") {
            let phi = self.formula()?;
            let st = InitialStatement::classify(phi, self.sig().agent_count());
            out.initial.push(Located::new(span, st));
        } else {
            let (subject, subject_span) = self.name()?;
            let kw = match self.peek() {
                Some(Tok::Ident(k)) => k.clone(),
                _ => return self.unexpected("`causes`, `determines`, `announces`, `observes` or `aware_of`"),
            };
            self.pos += 1;
            match kw.as_str() {
                "causes" | "determines" | "announces" => {
                    let action = match self.resolve(&subject, subject_span, "action")? {
                        Symbol::Action(a) => a,
                        _ => unreachable!(),
                    };
                    match kw.as_str() {
                        "causes" => {
                            let effects = self.literal_set()?;
                            let condition = self.if_condition()?;
                            for effect in effects {
                                out.domain.push(Located::new(
                                    span,
                                    DomainStatement::Causes { action, effect, condition: condition.clone() },
                                ));
                            }
                        }
                        "determines" => {
                            let fluent = self.fluent()?;
                            out.domain.push(Located::new(span, DomainStatement::Determines { action, fluent }));
                        }
                        _ => {
                            let payload = self.prop("announced formula")?;
                            out.domain.push(Located::new(span, DomainStatement::Announces { action, payload }));
                        }
                    }
                }
                "observes" | "aware_of" => {
                    let agent = match self.resolve(&subject, subject_span, "agent")? {
                        Symbol::Agent(a) => a,
                        _ => unreachable!(),
                    };
                    let action = self.action()?;
                    let condition = if self.eat_keyword("if") {
                        self.prop("observability condition")?
                    } else {
                        Prop::True
                    };
                    let st = if kw == "observes" {
                        DomainStatement::Observes { agent, action, condition }
                    } else {
                        DomainStatement::AwareOf { agent, action, condition }
                    };
                    out.domain.push(Located::new(span, st));
                }
                _ => {
                    self.pos -= 1;
                    return self.unexpected("`causes`, `determines`, `announces`, `observes` or `aware_of`");
                }
            }
        }
        self.finish()
    }

    fn plan(&mut self) -> Result<Vec<Action>, LangError> {
        let bracketed = self.eat(&Tok::LBracket);
        let mut plan = Vec::new();
        let stop = if bracketed { Some(&Tok::RBracket) } else { None };
        if self.peek() != stop {
            plan.push(self.action()?);
            while self.eat(&Tok::Semi) {
                plan.push(self.action()?);
            }
        }
        if bracketed {
            self.expect(Tok::RBracket)?;
        }
        Ok(plan)
    }

    fn query(&mut self) -> Result<Query, LangError> {
        let goal = self.formula()?;
        self.expect_keyword("after")?;
        let plan = self.plan()?;
        self.finish()?;
        Ok(Query { goal, plan })
    }
}

#[derive(Default)]
struct Statements {
    domain: Vec<Located<DomainStatement>>,
    initial: Vec<Located<InitialStatement>>,
}

fn declaration_kind(stmt: &Toks) -> Option<usize> {
    match stmt.first() {
        Some((Tok::Ident(s), _)) => ["agents", "fluents", "actions"].iter().position(|k| k == s),
        _ => None,
    }
}

pub fn parse_theory(text: &str) -> Result<Theory, LangError> {
    let toks = lex(text)?;
    let stmts = split_statements(&toks, true);

    let mut decls: [Vec<String>; 3] = Default::default();
    let mut seen: BTreeMap<String, Span> = BTreeMap::new();
    for stmt in &stmts {
        let Some(kind) = declaration_kind(stmt) else { continue };
        let mut p = Parser::new(stmt, None);
        p.pos = 1;
        for (name, span) in p.name_list()? {
            if seen.insert(name.clone(), span).is_some() {
                return Err(LangError::Duplicate { span, name });
            }
            if kind == 1 {
                let base = name.split('(').next().unwrap_or_default();
                if RESERVED_FLUENT_BASES.contains(&base) {
                    return Err(LangError::Invalid {
                        span,
                        msg: format!("`{base}` is reserved for modal operators and cannot name a fluent"),
                    });
                }
            }
            decls[kind].push(name);
        }
        p.finish()?;
    }
    let [agents, fluents, actions] = decls;
    let sig = Signature::new(agents, fluents, actions)?;

    let mut out = Statements::default();
    for stmt in &stmts {
        if declaration_kind(stmt).is_some() {
            continue;
        }
        Parser::new(stmt, Some(&sig)).statement(&mut out)?;
    }
    Ok(Theory::new(sig, out.domain, out.initial))
}

pub fn parse_query(sig: &Signature, text: &str) -> Result<Query, LangError> {
    let toks: Vec<_> = lex(text)?.into_iter().filter(|(t, _)| *t != Tok::Newline).collect();
    Parser::new(&toks, Some(sig)).query()
}

/// One query per line.
pub fn parse_queries(sig: &Signature, text: &str) -> Result<Vec<Query>, LangError> {
    let toks = lex(text)?;
    split_statements(&toks, false)
        .into_iter()
        .map(|stmt| Parser::new(stmt, Some(sig)).query())
        .collect()
}

pub fn parse_formula(sig: &Signature, text: &str) -> Result<Formula, LangError> {
    let toks: Vec<_> = lex(text)?.into_iter().filter(|(t, _)| *t != Tok::Newline).collect();
    let mut p = Parser::new(&toks, Some(sig));
    if toks.is_empty() {
        return p.unexpected("a formula");
    }
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
agents A, B
fluents f, g(A), opened
actions open(A), peek(A), tell
executable open(A) if g(A), B[A] g(A)
open(A) causes opened
peek(A) determines f
tell announces f & !opened
A observes open(A)
B observes open(A) if f
B aware_of peek(A) if f
initially C(!B[A] f & !B[A] !f)
initially C opened; initially f
";

    #[test]
    fn parses_statements_and_classifies_initial() {
        let th = parse_theory(SMALL).unwrap();
        let sig = th.signature();
        assert_eq!(sig.agent_count(), 2);
        assert_eq!(th.domain().len(), 7);
        let open = sig.action("open(A)").unwrap();
        assert!(matches!(
            &th.domain()[1].node,
            DomainStatement::Causes { action, effect, condition }
                if *action == open && effect.positive && condition.is_top()
        ));
        let f = sig.fluent("f").unwrap();
        assert_eq!(
            th.initial().iter().map(|s| s.node.clone()).collect::<Vec<_>>(),
            vec![
                InitialStatement::CommonIgnorant(Agent(0), Prop::Atom(f)),
                InitialStatement::CommonPlain(Prop::Atom(sig.fluent("opened").unwrap())),
                InitialStatement::Plain(Prop::Atom(f)),
            ]
        );
        assert_eq!(th.domain()[0].span, Span { line: 5, col: 1 });
    }

    #[test]
    fn causes_shorthand_expands() {
        let th = parse_theory("agents A\nfluents f, g\nactions a\na causes {f, !g} if g").unwrap();
        assert_eq!(th.domain().len(), 2);
        assert_eq!(th.spec(Action(0)).effects.len(), 2);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_theory("agents A\nfluents f\nactions a\nexecutable b").unwrap_err();
        assert!(matches!(err, LangError::Undeclared { span: Span { line: 4, col: 12 }, .. }), "{err}");
        let err = parse_theory("agents A\nfluents f, f\nactions a").unwrap_err();
        assert!(matches!(err, LangError::Duplicate { .. }));
        let err = parse_theory("agents A\nfluents C\nactions a").unwrap_err();
        assert!(matches!(err, LangError::Invalid { .. }));
        let err = parse_theory("agents A\nfluents f\nactions a\nA observes a if B[A] f").unwrap_err();
        assert!(matches!(err, LangError::Invalid { .. }));
        let err = parse_theory("agents A\nfluents f\nactions a\na causes f if").unwrap_err();
        assert!(matches!(err, LangError::Syntax { .. }));
    }

    #[test]
    fn empty_domain_is_fine() {
        let th = parse_theory("agents A\nfluents f\nactions a\n").unwrap();
        assert!(th.domain().is_empty());
    }

    #[test]
    fn operator_precedence() {
        let sig = Signature::new(["A"], ["f", "g", "h"], ["a"]).unwrap();
        let f = |s| parse_formula(&sig, s).unwrap();
        assert_eq!(f("f | g & h"), f("f | (g & h)"));
        assert_eq!(f("f -> g -> h"), f("f -> (g -> h)"));
        assert_eq!(f("!f & g"), f("(!f) & g"));
        assert_eq!(f("B[A] f & g"), f("(B[A] f) & g"));
        assert_eq!(f("C[{A}] f"), Formula::c(Group::Set(AgentSet::from([Agent(0)])), f("f")));
        assert!(parse_formula(&sig, "").is_err());
        assert!(parse_formula(&sig, "f g").is_err());
    }

    #[test]
    fn queries() {
        let sig = Signature::new(["A"], ["f"], ["a", "b"]).unwrap();
        let q = parse_query(&sig, "B[A] f after a; b").unwrap();
        assert_eq!(q.plan, vec![Action(0), Action(1)]);
        assert_eq!(parse_query(&sig, "f after []").unwrap().plan, vec![]);
        assert_eq!(parse_query(&sig, "f after [a; a]").unwrap().plan.len(), 2);
        assert!(matches!(parse_query(&sig, "f after fly"), Err(LangError::Undeclared { .. })));
        assert_eq!(parse_queries(&sig, "# two\nf after a\n!f after []\n").unwrap().len(), 2);
    }
}
