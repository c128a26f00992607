//! Signatures, literals, fluent formulas, belief formulas and interpretations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Hard ceiling on fluents per signature: interpretations are 64-bit sets.
pub const MAX_SIGNATURE_FLUENTS: usize = 64;

/// Default bound for procedures that enumerate all 2^|F| interpretations.
pub const DEFAULT_FLUENT_CAP: usize = 16;

/// The enumeration bound, overridable with `MAPKIT_MAX_FLUENTS`.
pub fn fluent_cap() -> usize {
    std::env::var("MAPKIT_MAX_FLUENTS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|v| v.min(MAX_SIGNATURE_FLUENTS))
        .unwrap_or(DEFAULT_FLUENT_CAP)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("signature declares no {0}")]
    Empty(&'static str),
    #[error("name `{0}` declared more than once")]
    Duplicate(String),
    #[error("{0} fluents declared; at most {MAX_SIGNATURE_FLUENTS} are supported")]
    TooManyFluents(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{what} needs 2^{fluents} interpretations; the bound is {cap} fluents (MAPKIT_MAX_FLUENTS)")]
pub struct CapacityError {
    pub what: &'static str,
    pub fluents: usize,
    pub cap: usize,
}

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub usize);
    };
}

id_type!(
    /// Index of an agent in declaration order.
    Agent
);
id_type!(
    /// Index of a fluent in declaration order.
    Fluent
);
id_type!(
    /// Index of an action in declaration order.
    Action
);

pub type AgentSet = BTreeSet<Agent>;

/// Ordered agent, fluent and action names. Order is declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    agents: Vec<String>,
    fluents: Vec<String>,
    actions: Vec<String>,
    index: HashMap<String, Symbol>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Agent(Agent),
    Fluent(Fluent),
    Action(Action),
}

impl Signature {
    pub fn new<S: Into<String>>(
        agents: impl IntoIterator<Item = S>,
        fluents: impl IntoIterator<Item = S>,
        actions: impl IntoIterator<Item = S>,
    ) -> Result<Self, SignatureError> {
        let agents: Vec<String> = agents.into_iter().map(Into::into).collect();
        let fluents: Vec<String> = fluents.into_iter().map(Into::into).collect();
        let actions: Vec<String> = actions.into_iter().map(Into::into).collect();
        for (set, what) in [(&agents, "agents"), (&fluents, "fluents"), (&actions, "actions")] {
            if set.is_empty() {
                return Err(SignatureError::Empty(what));
            }
        }
        if fluents.len() > MAX_SIGNATURE_FLUENTS {
            return Err(SignatureError::TooManyFluents(fluents.len()));
        }
        let mut index = HashMap::new();
        let entries = agents
            .iter()
            .enumerate()
            .map(|(i, n)| (n, Symbol::Agent(Agent(i))))
            .chain(fluents.iter().enumerate().map(|(i, n)| (n, Symbol::Fluent(Fluent(i)))))
            .chain(actions.iter().enumerate().map(|(i, n)| (n, Symbol::Action(Action(i)))));
        for (name, sym) in entries {
            if index.insert(name.clone(), sym).is_some() {
                return Err(SignatureError::Duplicate(name.clone()));
            }
        }
        Ok(Signature { agents, fluents, actions, index })
    }

    pub fn agents(&self) -> impl ExactSizeIterator<Item = Agent> + '_ {
        (0..self.agents.len()).map(Agent)
    }
    pub fn fluents(&self) -> impl ExactSizeIterator<Item = Fluent> + '_ {
        (0..self.fluents.len()).map(Fluent)
    }
    pub fn actions(&self) -> impl ExactSizeIterator<Item = Action> + '_ {
        (0..self.actions.len()).map(Action)
    }
    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }
    pub fn fluent_count(&self) -> usize {
        self.fluents.len()
    }
    pub fn action_count(&self) -> usize {
        self.actions.len()
    }
    pub fn all_agents(&self) -> AgentSet {
        self.agents().collect()
    }
    pub fn agent_name(&self, a: Agent) -> &str {
        &self.agents[a.0]
    }
    pub fn fluent_name(&self, f: Fluent) -> &str {
        &self.fluents[f.0]
    }
    pub fn action_name(&self, a: Action) -> &str {
        &self.actions[a.0]
    }
    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        self.index.get(name).copied()
    }
    pub fn agent(&self, name: &str) -> Option<Agent> {
        match self.lookup(name) {
            Some(Symbol::Agent(a)) => Some(a),
            _ => None,
        }
    }
    pub fn fluent(&self, name: &str) -> Option<Fluent> {
        match self.lookup(name) {
            Some(Symbol::Fluent(f)) => Some(f),
            _ => None,
        }
    }
    pub fn action(&self, name: &str) -> Option<Action> {
        match self.lookup(name) {
            Some(Symbol::Action(a)) => Some(a),
            _ => None,
        }
    }
}

/// A total truth assignment, one bit per fluent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Interpretation(pub u64);

impl Interpretation {
    pub fn get(self, f: Fluent) -> bool {
        self.0 >> f.0 & 1 == 1
    }
    pub fn set(&mut self, f: Fluent, value: bool) {
        if value {
            self.0 |= 1 << f.0;
        } else {
            self.0 &= !(1 << f.0);
        }
    }
    pub fn with(mut self, f: Fluent, value: bool) -> Self {
        self.set(f, value);
        self
    }
    pub fn satisfies(self, lit: Literal) -> bool {
        self.get(lit.fluent) == lit.positive
    }
    /// Every interpretation over `n` fluents in ascending bit order.
    pub fn all(n: usize) -> impl Iterator<Item = Interpretation> {
        (0..1u64 << n).map(Interpretation)
    }
    pub fn literals(self, n: usize) -> impl Iterator<Item = Literal> {
        (0..n).map(move |i| Literal { fluent: Fluent(i), positive: self.get(Fluent(i)) })
    }
    pub fn display<'a>(&self, sig: &'a Signature) -> InterpDisplay<'a> {
        InterpDisplay { interp: *self, sig }
    }
}

pub struct InterpDisplay<'a> {
    interp: Interpretation,
    sig: &'a Signature,
}

impl fmt::Display for InterpDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, lit) in self.interp.literals(self.sig.fluent_count()).enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", lit.display(self.sig))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub fluent: Fluent,
    pub positive: bool,
}

impl Literal {
    pub fn pos(f: Fluent) -> Self {
        Literal { fluent: f, positive: true }
    }
    pub fn neg(f: Fluent) -> Self {
        Literal { fluent: f, positive: false }
    }
    pub fn complement(self) -> Self {
        Literal { positive: !self.positive, ..self }
    }
    pub fn to_prop(self) -> Prop {
        if self.positive {
            Prop::Atom(self.fluent)
        } else {
            Prop::Not(Box::new(Prop::Atom(self.fluent)))
        }
    }
    pub fn display<'a>(&self, sig: &'a Signature) -> impl fmt::Display + 'a {
        let lit = *self;
        DisplayFn(move |f: &mut fmt::Formatter<'_>| {
            if !lit.positive {
                f.write_str("!")?;
            }
            f.write_str(sig.fluent_name(lit.fluent))
        })
    }
}

/// A fluent formula. Implication is desugared on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Prop {
    True,
    False,
    Atom(Fluent),
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
}

impl Prop {
    pub fn not(p: Prop) -> Prop {
        Prop::Not(Box::new(p))
    }
    /// `And` of the parts; a single part is returned as is, none gives ⊤.
    pub fn and(mut parts: Vec<Prop>) -> Prop {
        match parts.len() {
            0 => Prop::True,
            1 => parts.pop().unwrap(),
            _ => Prop::And(parts),
        }
    }
    /// `Or` of the parts; a single part is returned as is, none gives ⊥.
    pub fn or(mut parts: Vec<Prop>) -> Prop {
        match parts.len() {
            0 => Prop::False,
            1 => parts.pop().unwrap(),
            _ => Prop::Or(parts),
        }
    }
    pub fn implies(a: Prop, b: Prop) -> Prop {
        Prop::Or(vec![Prop::not(a), b])
    }

    pub fn eval(&self, i: Interpretation) -> bool {
        match self {
            Prop::True => true,
            Prop::False => false,
            Prop::Atom(f) => i.get(*f),
            Prop::Not(p) => !p.eval(i),
            Prop::And(ps) => ps.iter().all(|p| p.eval(i)),
            Prop::Or(ps) => ps.iter().any(|p| p.eval(i)),
        }
    }

    pub fn atoms(&self, out: &mut BTreeSet<Fluent>) {
        match self {
            Prop::True | Prop::False => {}
            Prop::Atom(f) => {
                out.insert(*f);
            }
            Prop::Not(p) => p.atoms(out),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().for_each(|p| p.atoms(out)),
        }
    }

    /// Constant folding for display. Semantics never depend on it.
    pub fn simplify(&self) -> Prop {
        match self {
            Prop::Not(p) => match p.simplify() {
                Prop::True => Prop::False,
                Prop::False => Prop::True,
                Prop::Not(q) => *q,
                q => Prop::not(q),
            },
            Prop::And(ps) => {
                let mut out = Vec::new();
                for p in ps.iter().map(Prop::simplify) {
                    match p {
                        Prop::False => return Prop::False,
                        Prop::True => {}
                        p if !out.contains(&p) => out.push(p),
                        _ => {}
                    }
                }
                Prop::and(out)
            }
            Prop::Or(ps) => {
                let mut out = Vec::new();
                for p in ps.iter().map(Prop::simplify) {
                    match p {
                        Prop::True => return Prop::True,
                        Prop::False => {}
                        p if !out.contains(&p) => out.push(p),
                        _ => {}
                    }
                }
                Prop::or(out)
            }
            p => p.clone(),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DisplayFn(move |f: &mut fmt::Formatter<'_>| write_prop(f, self, sig))
    }

    fn is_compound(&self) -> bool {
        matches!(self, Prop::And(_) | Prop::Or(_))
    }
}

fn write_prop(f: &mut fmt::Formatter<'_>, p: &Prop, sig: &Signature) -> fmt::Result {
    match p {
        Prop::True => f.write_str("true"),
        Prop::False => f.write_str("false"),
        Prop::Atom(a) => f.write_str(sig.fluent_name(*a)),
        Prop::Not(q) => {
            f.write_str("!")?;
            write_prop_child(f, q, sig)
        }
        Prop::And(ps) | Prop::Or(ps) => {
            let op = if matches!(p, Prop::And(_)) { " & " } else { " | " };
            for (k, q) in ps.iter().enumerate() {
                if k > 0 {
                    f.write_str(op)?;
                }
                write_prop_child(f, q, sig)?;
            }
            Ok(())
        }
    }
}

fn write_prop_child(f: &mut fmt::Formatter<'_>, p: &Prop, sig: &Signature) -> fmt::Result {
    if p.is_compound() {
        f.write_str("(")?;
        write_prop(f, p, sig)?;
        f.write_str(")")
    } else {
        write_prop(f, p, sig)
    }
}

/// Agent group of `E` and `C`. `All` is the omitted-group form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Group {
    All,
    Set(AgentSet),
}

impl Group {
    pub fn resolve(&self, sig: &Signature) -> AgentSet {
        match self {
            Group::All => sig.all_agents(),
            Group::Set(s) => s.clone(),
        }
    }
    pub fn resolve_n(&self, n_agents: usize) -> AgentSet {
        match self {
            Group::All => (0..n_agents).map(Agent).collect(),
            Group::Set(s) => s.clone(),
        }
    }
}

/// A belief formula. Modal-free subtrees are kept as `Prop` leaves; the
/// smart constructors maintain that normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Prop(Prop),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    B(Agent, Box<Formula>),
    E(Group, Box<Formula>),
    C(Group, Box<Formula>),
}

impl From<Prop> for Formula {
    fn from(p: Prop) -> Self {
        Formula::Prop(p)
    }
}

impl Formula {
    pub fn top() -> Formula {
        Formula::Prop(Prop::True)
    }
    pub fn atom(f: Fluent) -> Formula {
        Formula::Prop(Prop::Atom(f))
    }
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Prop(p) => Formula::Prop(Prop::not(p)),
            f => Formula::Not(Box::new(f)),
        }
    }
    pub fn and(parts: Vec<Formula>) -> Formula {
        Self::junction(parts, true)
    }
    pub fn or(parts: Vec<Formula>) -> Formula {
        Self::junction(parts, false)
    }
    fn junction(mut parts: Vec<Formula>, conj: bool) -> Formula {
        if parts.len() == 1 {
            return parts.pop().unwrap();
        }
        if parts.iter().all(|p| matches!(p, Formula::Prop(_))) {
            let props = parts
                .into_iter()
                .map(|p| match p {
                    Formula::Prop(p) => p,
                    _ => unreachable!(),
                })
                .collect();
            return Formula::Prop(if conj { Prop::and(props) } else { Prop::or(props) });
        }
        if conj {
            Formula::And(parts)
        } else {
            Formula::Or(parts)
        }
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(vec![Formula::not(a), b])
    }
    pub fn b(i: Agent, f: Formula) -> Formula {
        Formula::B(i, Box::new(f))
    }
    pub fn e(g: Group, f: Formula) -> Formula {
        Formula::E(g, Box::new(f))
    }
    pub fn c(g: Group, f: Formula) -> Formula {
        Formula::C(g, Box::new(f))
    }

    pub fn as_prop(&self) -> Option<&Prop> {
        match self {
            Formula::Prop(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Formula::Prop(Prop::True))
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Prop(_) => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::modal_depth).max().unwrap_or(0),
            Formula::B(_, f) | Formula::E(_, f) | Formula::C(_, f) => 1 + f.modal_depth(),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DisplayFn(move |f: &mut fmt::Formatter<'_>| write_formula(f, self, sig))
    }

    fn is_compound(&self) -> bool {
        match self {
            Formula::Prop(p) => p.is_compound(),
            Formula::And(_) | Formula::Or(_) => true,
            _ => false,
        }
    }
}

fn write_group(f: &mut fmt::Formatter<'_>, g: &Group, sig: &Signature) -> fmt::Result {
    if let Group::Set(s) = g {
        f.write_str("[{")?;
        for (k, a) in s.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            f.write_str(sig.agent_name(*a))?;
        }
        f.write_str("}]")?;
    }
    f.write_str(" ")
}

fn write_formula(f: &mut fmt::Formatter<'_>, phi: &Formula, sig: &Signature) -> fmt::Result {
    match phi {
        Formula::Prop(p) => write_prop(f, p, sig),
        Formula::Not(q) => {
            f.write_str("!")?;
            write_formula_child(f, q, sig)
        }
        Formula::And(ps) | Formula::Or(ps) => {
            let op = if matches!(phi, Formula::And(_)) { " & " } else { " | " };
            for (k, q) in ps.iter().enumerate() {
                if k > 0 {
                    f.write_str(op)?;
                }
                write_formula_child(f, q, sig)?;
            }
            Ok(())
        }
        Formula::B(i, q) => {
            write!(f, "B[{}] ", sig.agent_name(*i))?;
            write_formula_child(f, q, sig)
        }
        Formula::E(g, q) => {
            f.write_str("E")?;
            write_group(f, g, sig)?;
            write_formula_child(f, q, sig)
        }
        Formula::C(g, q) => {
            f.write_str("C")?;
            write_group(f, g, sig)?;
            write_formula_child(f, q, sig)
        }
    }
}

fn write_formula_child(f: &mut fmt::Formatter<'_>, phi: &Formula, sig: &Signature) -> fmt::Result {
    if phi.is_compound() {
        f.write_str("(")?;
        write_formula(f, phi, sig)?;
        f.write_str(")")
    } else {
        write_formula(f, phi, sig)
    }
}

pub(crate) struct DisplayFn<F>(pub F);

impl<F: Fn(&mut fmt::Formatter<'_>) -> fmt::Result> fmt::Display for DisplayFn<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        (self.0)(f)
    }
}

pub fn eval_fluent(interp: Interpretation, phi: &Prop) -> bool {
    phi.eval(interp)
}

fn check_cap(what: &'static str, n: usize) -> Result<(), CapacityError> {
    let cap = fluent_cap();
    if n > cap {
        Err(CapacityError { what, fluents: n, cap })
    } else {
        Ok(())
    }
}

/// Γ ⊨ φ over `n_fluents` fluents, by enumeration.
pub fn prop_entails(gamma: &[Prop], phi: &Prop, n_fluents: usize) -> Result<bool, CapacityError> {
    check_cap("propositional entailment", n_fluents)?;
    Ok(Interpretation::all(n_fluents)
        .filter(|i| gamma.iter().all(|g| g.eval(*i)))
        .all(|i| phi.eval(i)))
}

/// The complete clause falsified exactly by `falsifier`.
pub fn clause_of(falsifier: Interpretation, n_fluents: usize) -> Prop {
    Prop::or(
        falsifier
            .literals(n_fluents)
            .map(|l| l.complement().to_prop())
            .collect(),
    )
}

/// All 2^|F| complete clauses; clause k is falsified exactly by interpretation k.
pub fn complete_clauses(sig: &Signature) -> Result<Vec<Prop>, CapacityError> {
    let n = sig.fluent_count();
    check_cap("complete clause enumeration", n)?;
    Ok(Interpretation::all(n).map(|i| clause_of(i, n)).collect())
}

/// The conjunction of literals pinning `interp`.
pub fn interpretation_formula(interp: Interpretation, n_fluents: usize) -> Prop {
    Prop::and(interp.literals(n_fluents).map(Literal::to_prop).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig2() -> Signature {
        Signature::new(["A"], ["f", "g"], ["a"]).unwrap()
    }

    #[test]
    fn signature_rejects_shared_names() {
        assert_eq!(
            Signature::new(["A"], ["A"], ["a"]).unwrap_err(),
            SignatureError::Duplicate("A".into())
        );
        assert!(matches!(Signature::new(Vec::<String>::new(), vec!["f".into()], vec!["a".into()]), Err(SignatureError::Empty("agents"))));
    }

    #[test]
    fn eval_basics() {
        let f = Fluent(0);
        let g = Fluent(1);
        let i = Interpretation::default().with(f, true);
        assert!(Prop::not(Prop::Atom(g)).eval(i));
        assert!(Prop::True.eval(i));
        assert!(!Prop::implies(Prop::Atom(f), Prop::Atom(g)).eval(i));
    }

    #[test]
    fn entailment_examples() {
        let (f, g) = (Prop::Atom(Fluent(0)), Prop::Atom(Fluent(1)));
        assert!(prop_entails(&[f.clone()], &Prop::or(vec![f.clone(), g.clone()]), 2).unwrap());
        assert!(!prop_entails(&[], &f, 2).unwrap());
    }

    #[test]
    fn clauses_for_one_and_two_fluents() {
        let one = Signature::new(["A"], ["f"], ["a"]).unwrap();
        let cs = complete_clauses(&one).unwrap();
        assert_eq!(cs, vec![Prop::Atom(Fluent(0)), Prop::not(Prop::Atom(Fluent(0)))]);
        let cs = complete_clauses(&sig2()).unwrap();
        assert_eq!(cs.len(), 4);
        let f_or_not_g = Prop::Or(vec![Prop::Atom(Fluent(0)), Prop::not(Prop::Atom(Fluent(1)))]);
        assert!(cs.contains(&f_or_not_g));
    }

    #[test]
    fn formula_constructors_lift_modal_free_parts() {
        let f = Formula::and(vec![Formula::atom(Fluent(0)), Formula::atom(Fluent(1))]);
        assert!(matches!(f, Formula::Prop(Prop::And(_))));
        let g = Formula::and(vec![Formula::atom(Fluent(0)), Formula::b(Agent(0), Formula::top())]);
        assert!(matches!(g, Formula::And(_)));
        assert_eq!(Formula::not(Formula::atom(Fluent(0))), Formula::Prop(Prop::not(Prop::Atom(Fluent(0)))));
    }

    #[test]
    fn display_parenthesises_compound_children() {
        let sig = sig2();
        let (f, g) = (Prop::Atom(Fluent(0)), Prop::Atom(Fluent(1)));
        let p = Prop::And(vec![Prop::Or(vec![f.clone(), g.clone()]), Prop::not(f.clone())]);
        assert_eq!(p.display(&sig).to_string(), "(f | g) & !f");
        let phi = Formula::or(vec![
            Formula::b(Agent(0), Formula::atom(Fluent(0))),
            Formula::b(Agent(0), Formula::not(Formula::atom(Fluent(0)))),
        ]);
        assert_eq!(Formula::c(Group::All, phi).display(&sig).to_string(), "C (B[A] f | B[A] !f)");
    }

    #[test]
    fn simplify_folds_constants() {
        let f = Prop::Atom(Fluent(0));
        let p = Prop::Or(vec![Prop::False, Prop::And(vec![f.clone(), Prop::not(Prop::False)])]);
        assert_eq!(p.simplify(), f);
    }
}
