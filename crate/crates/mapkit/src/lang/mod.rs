//! Concrete syntax for theories and queries.
//!
//! See `docs/grammar.md` for the grammar. Names are ground; `open(A)` is a
//! single atomic name, normalised without whitespace.

mod lexer;
mod parser;
mod print;
mod validate;

use std::fmt;

use thiserror::Error;

use crate::logic::{Action, Agent, Fluent, Formula, Group, Literal, Prop, Signature, SignatureError};

pub use parser::{parse_formula, parse_queries, parse_query, parse_theory};
pub use validate::{validate, Diagnostic, ValidationReport};

/// 1-based source position. `Span::default()` marks synthetic statements.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Located<T> {
    pub span: Span,
    pub node: T,
}

impl<T> Located<T> {
    pub fn new(span: Span, node: T) -> Self {
        Located { span, node }
    }
    pub fn synthetic(node: T) -> Self {
        Located { span: Span::default(), node }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("{span}: syntax error: {msg}")]
    Syntax { span: Span, msg: String },
    #[error("{span}: undeclared {kind} `{name}`")]
    Undeclared { span: Span, kind: &'static str, name: String },
    #[error("{span}: duplicate declaration of `{name}`")]
    Duplicate { span: Span, name: String },
    #[error("{span}: {msg}")]
    Invalid { span: Span, msg: String },
    #[error("signature: {0}")]
    Signature(#[from] SignatureError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainStatement {
    Executable { action: Action, condition: Formula },
    Causes { action: Action, effect: Literal, condition: Formula },
    Determines { action: Action, fluent: Fluent },
    Announces { action: Action, payload: Prop },
    Observes { agent: Agent, action: Action, condition: Prop },
    AwareOf { agent: Agent, action: Action, condition: Prop },
}

impl DomainStatement {
    pub fn action(&self) -> Action {
        match self {
            DomainStatement::Executable { action, .. }
            | DomainStatement::Causes { action, .. }
            | DomainStatement::Determines { action, .. }
            | DomainStatement::Announces { action, .. }
            | DomainStatement::Observes { action, .. }
            | DomainStatement::AwareOf { action, .. } => *action,
        }
    }
}

/// An `initially` statement, classified against the definite forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialStatement {
    /// `initially φ`
    Plain(Prop),
    /// `initially C φ`
    CommonPlain(Prop),
    /// `initially C B[i] φ`
    CommonBelief(Agent, Prop),
    /// `initially C (B[i] φ | B[i] !φ)`
    CommonWhether(Agent, Prop),
    /// `initially C (!B[i] φ & !B[i] !φ)`
    CommonIgnorant(Agent, Prop),
    /// Anything else. Usable for checking explicit states only.
    Generic(Formula),
}

impl InitialStatement {
    pub fn classify(phi: Formula, n_agents: usize) -> InitialStatement {
        fn as_belief(f: &Formula) -> Option<(Agent, &Prop)> {
            match f {
                Formula::B(i, inner) => inner.as_prop().map(|p| (*i, p)),
                _ => None,
            }
        }
        fn negated_belief(f: &Formula) -> Option<(Agent, &Prop)> {
            match f {
                Formula::Not(inner) => as_belief(inner),
                _ => None,
            }
        }
        fn is_negation_of(q: &Prop, p: &Prop) -> bool {
            matches!(q, Prop::Not(inner) if **inner == *p)
        }

        if let Formula::Prop(p) = phi {
            return InitialStatement::Plain(p);
        }
        let classified = match &phi {
            Formula::C(g, body) if g.resolve_n(n_agents).len() == n_agents => match &**body {
                Formula::Prop(p) => Some(InitialStatement::CommonPlain(p.clone())),
                Formula::B(..) => as_belief(body).map(|(i, p)| InitialStatement::CommonBelief(i, p.clone())),
                Formula::Or(parts) if parts.len() == 2 => match (as_belief(&parts[0]), as_belief(&parts[1])) {
                    (Some((i, p)), Some((j, q))) if i == j && is_negation_of(q, p) => {
                        Some(InitialStatement::CommonWhether(i, p.clone()))
                    }
                    _ => None,
                },
                Formula::And(parts) if parts.len() == 2 => {
                    match (negated_belief(&parts[0]), negated_belief(&parts[1])) {
                        (Some((i, p)), Some((j, q))) if i == j && is_negation_of(q, p) => {
                            Some(InitialStatement::CommonIgnorant(i, p.clone()))
                        }
                        _ => None,
                    }
                }
                _ => None,
            },
            _ => None,
        };
        classified.unwrap_or(InitialStatement::Generic(phi))
    }

    /// The belief formula this statement asserts at the initial point.
    pub fn to_formula(&self) -> Formula {
        let bel = |i: Agent, p: &Prop| Formula::b(i, Formula::Prop(p.clone()));
        let neg = |p: &Prop| Prop::not(p.clone());
        match self {
            InitialStatement::Plain(p) => Formula::Prop(p.clone()),
            InitialStatement::CommonPlain(p) => Formula::c(Group::All, Formula::Prop(p.clone())),
            InitialStatement::CommonBelief(i, p) => Formula::c(Group::All, bel(*i, p)),
            InitialStatement::CommonWhether(i, p) => {
                Formula::c(Group::All, Formula::or(vec![bel(*i, p), bel(*i, &neg(p))]))
            }
            InitialStatement::CommonIgnorant(i, p) => Formula::c(
                Group::All,
                Formula::and(vec![Formula::not(bel(*i, p)), Formula::not(bel(*i, &neg(p)))]),
            ),
            InitialStatement::Generic(f) => f.clone(),
        }
    }

    pub fn is_definite(&self) -> bool {
        !matches!(self, InitialStatement::Generic(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    WorldAltering,
    Sensing,
    Announcement,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::WorldAltering => "world-altering",
            Category::Sensing => "sensing",
            Category::Announcement => "announcement",
        })
    }
}

/// Everything the domain says about one action, gathered from its statements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpec {
    /// Conjunction of all `executable` conditions; ⊤ when there are none.
    pub executable: Formula,
    pub effects: Vec<(Literal, Formula)>,
    pub sensed: Vec<Fluent>,
    pub announces: Vec<Prop>,
    pub observes: Vec<(Agent, Prop)>,
    pub aware_of: Vec<(Agent, Prop)>,
}

impl ActionSpec {
    fn empty() -> Self {
        ActionSpec {
            executable: Formula::top(),
            effects: Vec::new(),
            sensed: Vec::new(),
            announces: Vec::new(),
            observes: Vec::new(),
            aware_of: Vec::new(),
        }
    }

    /// Kinds of effect statements present, in a fixed order.
    pub fn categories(&self) -> Vec<Category> {
        let mut out = Vec::new();
        if !self.effects.is_empty() {
            out.push(Category::WorldAltering);
        }
        if !self.sensed.is_empty() {
            out.push(Category::Sensing);
        }
        if !self.announces.is_empty() {
            out.push(Category::Announcement);
        }
        out
    }

    /// The action's category when it is unambiguous.
    pub fn category(&self) -> Option<Category> {
        match self.categories().as_slice() {
            [c] => Some(*c),
            _ => None,
        }
    }

    /// The announced formula (a conjunction if several were given).
    pub fn announced(&self) -> Prop {
        Prop::and(self.announces.clone())
    }
}

/// A parsed action theory `(I, D)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    signature: Signature,
    domain: Vec<Located<DomainStatement>>,
    initial: Vec<Located<InitialStatement>>,
    specs: Vec<ActionSpec>,
}

impl Theory {
    pub fn new(
        signature: Signature,
        domain: Vec<Located<DomainStatement>>,
        initial: Vec<Located<InitialStatement>>,
    ) -> Self {
        let mut specs = vec![ActionSpec::empty(); signature.action_count()];
        let mut exec: Vec<Vec<Formula>> = vec![Vec::new(); signature.action_count()];
        for st in &domain {
            let spec = &mut specs[st.node.action().0];
            match &st.node {
                DomainStatement::Executable { action, condition } => exec[action.0].push(condition.clone()),
                DomainStatement::Causes { effect, condition, .. } => {
                    spec.effects.push((*effect, condition.clone()))
                }
                DomainStatement::Determines { fluent, .. } => {
                    if !spec.sensed.contains(fluent) {
                        spec.sensed.push(*fluent)
                    }
                }
                DomainStatement::Announces { payload, .. } => spec.announces.push(payload.clone()),
                DomainStatement::Observes { agent, condition, .. } => {
                    spec.observes.push((*agent, condition.clone()))
                }
                DomainStatement::AwareOf { agent, condition, .. } => {
                    spec.aware_of.push((*agent, condition.clone()))
                }
            }
        }
        for (spec, conds) in specs.iter_mut().zip(exec) {
            spec.executable = Formula::and(conds);
        }
        Theory { signature, domain, initial, specs }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domain(&self) -> &[Located<DomainStatement>] {
        &self.domain
    }

    pub fn initial(&self) -> &[Located<InitialStatement>] {
        &self.initial
    }

    pub fn spec(&self, a: Action) -> &ActionSpec {
        &self.specs[a.0]
    }

    /// The same domain with a different set of initial statements.
    pub fn with_initial(&self, initial: Vec<Located<InitialStatement>>) -> Theory {
        Theory { initial, ..self.clone() }
    }

    pub fn is_definite(&self) -> bool {
        self.initial.iter().all(|s| s.node.is_definite())
    }
}

/// `goal after a1; ...; an`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub goal: Formula,
    pub plan: Vec<Action>,
}

impl Query {
    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        crate::logic::DisplayFn(move |f: &mut fmt::Formatter<'_>| {
            write!(f, "{} after ", self.goal.display(sig))?;
            if self.plan.is_empty() {
                return f.write_str("[]");
            }
            for (k, a) in self.plan.iter().enumerate() {
                if k > 0 {
                    f.write_str("; ")?;
                }
                f.write_str(sig.action_name(*a))?;
            }
            Ok(())
        })
    }
}
