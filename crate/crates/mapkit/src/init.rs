//! Initial states of definite theories.
//!
//! The canonical construction works on interpretations rather than models:
//!
//! * `surv` are the interpretations meeting every common-knowledge body
//!   (plain `C φ` and the `φ` of `C B[i] φ`);
//! * `i` relates two interpretations when they agree on every `φ` of a
//!   `C B[i] φ` or `C (B[i] φ | B[i] !φ)` statement for `i`;
//! * ignorance statements prune `surv` to the largest subset in which every
//!   interpretation has an `i`-neighbour that differs on `φ`.
//!
//! Designated worlds are the survivors that satisfy the plain statements.
//! Every statement is re-checked on the result before it is returned.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::kripke::{
    bisimilar, quotient, reachable_restriction, worlds_satisfying, Kripke, KripkeError, Pointed, World,
};
use crate::lang::{InitialStatement, Located, Span, Theory};
use crate::logic::{clause_of, interpretation_formula, Agent, CapacityError, Interpretation, Prop, Signature};
use crate::transition::BState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownValue {
    pub agent: Agent,
    pub formula: Prop,
    /// `C B[i] φ` rather than `C (B[i] φ | B[i] !φ)`.
    pub directed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InitialClassification {
    pub plain: Vec<Prop>,
    pub common: Vec<Prop>,
    pub known_value: Vec<KnownValue>,
    pub ignorant: Vec<(Agent, Prop)>,
}

impl InitialClassification {
    /// Formulas true in every world: `C φ` bodies and `C B[i] φ` bodies.
    pub fn global(&self) -> impl Iterator<Item = &Prop> {
        self.common.iter().chain(self.known_value.iter().filter(|k| k.directed).map(|k| &k.formula))
    }

    /// The statements this classification stands for.
    pub fn statements(&self) -> Vec<InitialStatement> {
        let mut out: Vec<InitialStatement> = self.plain.iter().cloned().map(InitialStatement::Plain).collect();
        out.extend(self.common.iter().cloned().map(InitialStatement::CommonPlain));
        for k in &self.known_value {
            out.push(if k.directed {
                InitialStatement::CommonBelief(k.agent, k.formula.clone())
            } else {
                InitialStatement::CommonWhether(k.agent, k.formula.clone())
            });
        }
        out.extend(self.ignorant.iter().map(|(i, p)| InitialStatement::CommonIgnorant(*i, p.clone())));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InitError {
    #[error("{span}: `{statement}` is not one of the definite initial forms")]
    NotDefinite { span: Span, statement: String },
    #[error("inconsistent initial statements: {0}")]
    Inconsistent(String),
    #[error("brute-force enumeration is limited to 2 fluents, 2 agents and 4 worlds")]
    Envelope,
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

pub fn classify(theory: &Theory) -> Result<InitialClassification, InitError> {
    classify_statements(theory.initial(), theory.signature())
}

pub fn classify_statements(
    statements: &[Located<InitialStatement>],
    sig: &Signature,
) -> Result<InitialClassification, InitError> {
    let mut c = InitialClassification::default();
    for st in statements {
        match &st.node {
            InitialStatement::Plain(p) => c.plain.push(p.clone()),
            InitialStatement::CommonPlain(p) => c.common.push(p.clone()),
            InitialStatement::CommonBelief(i, p) => {
                c.known_value.push(KnownValue { agent: *i, formula: p.clone(), directed: true })
            }
            InitialStatement::CommonWhether(i, p) => {
                c.known_value.push(KnownValue { agent: *i, formula: p.clone(), directed: false })
            }
            InitialStatement::CommonIgnorant(i, p) => c.ignorant.push((*i, p.clone())),
            InitialStatement::Generic(_) => {
                return Err(InitError::NotDefinite { span: st.span, statement: st.node.display(sig).to_string() })
            }
        }
    }
    Ok(c)
}

/// The interpretation-level view of a classification.
struct Canon<'a> {
    cls: &'a InitialClassification,
    n_agents: usize,
    /// W*: survivors after ignorance pruning.
    worlds: Vec<Interpretation>,
    /// Statement that removed the last world, if the set became empty that way.
    culprit: Option<(Agent, Prop)>,
}

impl<'a> Canon<'a> {
    fn build(cls: &'a InitialClassification, sig: &Signature) -> Result<Self, InitError> {
        let n = sig.fluent_count();
        if n > crate::logic::fluent_cap() {
            return Err(CapacityError { what: "initial-state generation", fluents: n, cap: crate::logic::fluent_cap() }
                .into());
        }
        let mut worlds: Vec<Interpretation> =
            Interpretation::all(n).filter(|v| cls.global().all(|p| p.eval(*v))).collect();
        let mut canon = Canon { cls, n_agents: sig.agent_count(), worlds: Vec::new(), culprit: None };
        loop {
            let mut culprit = None;
            let keep: Vec<Interpretation> = worlds
                .iter()
                .copied()
                .filter(|&u| {
                    let bad = cls.ignorant.iter().find(|(i, phi)| {
                        !worlds.iter().any(|&v| canon.agree(*i, u, v) && phi.eval(u) != phi.eval(v))
                    });
                    if let Some(b) = bad {
                        culprit = Some(b.clone());
                    }
                    bad.is_none()
                })
                .collect();
            if keep.len() == worlds.len() {
                break;
            }
            if keep.is_empty() {
                canon.culprit = culprit;
            }
            worlds = keep;
        }
        canon.worlds = worlds;
        Ok(canon)
    }

    fn agree(&self, i: Agent, u: Interpretation, v: Interpretation) -> bool {
        self.cls.known_value.iter().filter(|k| k.agent == i).all(|k| k.formula.eval(u) == k.formula.eval(v))
    }

    fn points(&self) -> Vec<Interpretation> {
        self.worlds.iter().copied().filter(|v| self.cls.plain.iter().all(|p| p.eval(*v))).collect()
    }

    fn reach(&self, from: Interpretation) -> BTreeSet<Interpretation> {
        let mut seen = BTreeSet::from([from]);
        let mut todo = vec![from];
        while let Some(u) = todo.pop() {
            for &v in &self.worlds {
                if !seen.contains(&v) && (0..self.n_agents).any(|i| self.agree(Agent(i), u, v)) {
                    seen.insert(v);
                    todo.push(v);
                }
            }
        }
        seen
    }

    /// Is `i` uniform on `phi` in every class reachable from every point?
    fn settled(&self, i: Agent, phi: &Prop) -> bool {
        let reach: BTreeSet<Interpretation> = self.points().into_iter().flat_map(|p| self.reach(p)).collect();
        reach.iter().all(|&u| reach.iter().all(|&v| !self.agree(i, u, v) || phi.eval(u) == phi.eval(v)))
    }
}

/// `Known_i`: complete clauses on which agent `i` is settled in every
/// initial state of the statements.
pub fn known_formulas(cls: &InitialClassification, sig: &Signature, i: Agent) -> Result<Vec<Prop>, InitError> {
    let canon = Canon::build(cls, sig)?;
    let n = sig.fluent_count();
    Ok(Interpretation::all(n).map(|w| clause_of(w, n)).filter(|c| canon.settled(i, c)).collect())
}

/// Adds an ignorance statement for every unsettled complete clause.
pub fn complete_cwa(cls: &InitialClassification, sig: &Signature) -> Result<InitialClassification, InitError> {
    let canon = Canon::build(cls, sig)?;
    let n = sig.fluent_count();
    let mut out = cls.clone();
    for i in sig.agents() {
        for w in Interpretation::all(n) {
            let c = clause_of(w, n);
            if !canon.settled(i, &c) && !out.ignorant.iter().any(|(j, p)| *j == i && *p == c) {
                out.ignorant.push((i, c));
            }
        }
    }
    Ok(out)
}

/// One structure with one or more designated worlds; each designated world
/// gives an initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalInitial {
    pub structure: Kripke,
    pub designated: BTreeSet<World>,
    /// The statements the states were checked against (after completion).
    pub statements: Vec<InitialStatement>,
}

impl CanonicalInitial {
    pub fn states(&self) -> Vec<Pointed> {
        self.designated.iter().map(|&w| Pointed { structure: self.structure.clone(), point: w }).collect()
    }

    pub fn bstate(&self) -> BState {
        BState::States(self.states())
    }
}

pub fn generate_initial(theory: &Theory, cwa: bool) -> Result<CanonicalInitial, InitError> {
    let sig = theory.signature();
    let mut cls = classify(theory)?;
    if cwa {
        cls = complete_cwa(&cls, sig)?;
    }
    generate_from(&cls, sig)
}

pub fn generate_from(cls: &InitialClassification, sig: &Signature) -> Result<CanonicalInitial, InitError> {
    let canon = Canon::build(cls, sig)?;
    if canon.worlds.is_empty() {
        return Err(InitError::Inconsistent(match &canon.culprit {
            Some((i, p)) => format!(
                "`{}` cannot hold in any world",
                InitialStatement::CommonIgnorant(*i, p.clone()).display(sig)
            ),
            None => "no interpretation satisfies the common-knowledge statements".into(),
        }));
    }
    let points = canon.points();
    if points.is_empty() {
        return Err(InitError::Inconsistent(
            "no surviving interpretation satisfies the statements about the actual world".into(),
        ));
    }
    let keep: BTreeSet<Interpretation> = points.iter().flat_map(|p| canon.reach(*p)).collect();
    let mut m = Kripke::new(sig.agent_count());
    let ids: BTreeMap<Interpretation, World> = keep.iter().map(|v| (*v, m.add_world(*v))).collect();
    for i in sig.agents() {
        for (&u, &wu) in &ids {
            for (&v, &wv) in &ids {
                if canon.agree(i, u, v) {
                    m.add_edge(i, wu, wv)?;
                }
            }
        }
    }
    let designated: BTreeSet<World> = points.iter().map(|p| ids[p]).collect();
    let statements = cls.statements();
    for st in &statements {
        let holds = worlds_satisfying(&m, &st.to_formula());
        if let Some(w) = designated.iter().find(|w| !holds.contains(w)) {
            return Err(InitError::Inconsistent(format!(
                "`{}` fails at candidate initial world {w}",
                st.display(sig)
            )));
        }
    }
    Ok(CanonicalInitial { structure: m, designated, statements })
}

/// Reachable part, then one world per interpretation.
pub fn reduce_state(state: &Pointed) -> Pointed {
    quotient(&reachable_restriction(state))
}

/// The conjunction of literals true at `u`.
pub fn world_formula(state: &Pointed, u: World, sig: &Signature) -> Result<Prop, KripkeError> {
    let v = state.structure.valuation(u).ok_or(KripkeError::UnknownWorld(u))?;
    Ok(interpretation_formula(v, sig.fluent_count()))
}

/// Exhaustive search for initial S5 states of the completed statements, over
/// structures of up to `max_worlds` worlds, all reachable from the point.
/// Results are representatives up to bisimilarity.
///
/// Completion here is decided over the same bounded search space, not with
/// the canonical construction, so the two can be compared.
pub fn brute_force_initials(theory: &Theory, max_worlds: usize) -> Result<Vec<Pointed>, InitError> {
    let sig = theory.signature();
    let (nf, na) = (sig.fluent_count(), sig.agent_count());
    if nf > 2 || na > 2 || max_worlds > 4 {
        return Err(InitError::Envelope);
    }
    let base: Vec<_> = theory.initial().iter().map(|s| s.node.to_formula()).collect();
    let models = enumerate_models(nf, na, max_worlds, &base);

    let mut extra = Vec::new();
    for i in sig.agents() {
        for w in Interpretation::all(nf) {
            let c = clause_of(w, nf);
            let whether = InitialStatement::CommonWhether(i, c.clone()).to_formula();
            if models.iter().any(|s| !s.satisfies(&whether)) {
                extra.push(InitialStatement::CommonIgnorant(i, c).to_formula());
            }
        }
    }
    let mut reps: Vec<Pointed> = Vec::new();
    for s in models {
        if extra.iter().all(|phi| s.satisfies(phi)) && !reps.iter().any(|r| bisimilar(r, &s)) {
            reps.push(s);
        }
    }
    Ok(reps)
}

fn enumerate_models(
    nf: usize,
    na: usize,
    max_worlds: usize,
    statements: &[crate::logic::Formula],
) -> Vec<Pointed> {
    let interps: Vec<Interpretation> = Interpretation::all(nf).collect();
    let mut out = Vec::new();
    for k in 1..=max_worlds {
        let partitions = set_partitions(k);
        for multiset in multisets(interps.len(), k) {
            let mut rels = vec![0usize; na];
            loop {
                let mut m = Kripke::new(na);
                let ws: Vec<World> = multiset.iter().map(|&x| m.add_world(interps[x])).collect();
                for (i, &r) in rels.iter().enumerate() {
                    let block = &partitions[r];
                    for a in 0..k {
                        for b in 0..k {
                            if block[a] == block[b] {
                                m.add_edge(Agent(i), ws[a], ws[b]).expect("fresh worlds");
                            }
                        }
                    }
                }
                let mut candidates: BTreeSet<World> = ws.iter().copied().collect();
                for phi in statements {
                    let sat = worlds_satisfying(&m, phi);
                    candidates.retain(|w| sat.contains(w));
                }
                let all = crate::logic::AgentSet::from_iter((0..na).map(Agent));
                for p in candidates {
                    if crate::kripke::reachable(&m, p, &all).len() == k {
                        out.push(Pointed { structure: m.clone(), point: p });
                    }
                }
                if !advance(&mut rels, partitions.len()) {
                    break;
                }
            }
        }
    }
    out
}

/// Odometer step; false once every digit has wrapped.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Non-decreasing sequences of length `k` over `0..n`.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            cur.push(x);
            go(n, k, x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Restricted growth strings: block index per element.
fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max {
            cur.push(b);
            go(k, cur, if b == max { max + 1 } else { max }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, &mut Vec::new(), 0, &mut out);
    out
}
