//! The direct transition function: frames of reference, the three step
//! constructions, b-states and plan execution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::kripke::{
    edge_subtract, extension, restrict, union_k, union_lambda, world_subtract, EdgeSet, Kripke, KripkeError,
    Pointed, Renaming, World,
};
use crate::lang::{Category, Query, Theory};
use crate::logic::{Action, AgentSet, Fluent, Formula, Literal, Prop};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrameOfReference {
    pub full: AgentSet,
    pub partial: AgentSet,
    pub oblivious: AgentSet,
}

impl FrameOfReference {
    pub fn aware(&self) -> AgentSet {
        self.full.union(&self.partial).copied().collect()
    }

    pub fn display<'a>(&'a self, sig: &'a crate::logic::Signature) -> impl fmt::Display + 'a {
        crate::logic::DisplayFn(move |f: &mut fmt::Formatter<'_>| {
            let set = |s: &AgentSet| {
                let names: Vec<&str> = s.iter().map(|a| sig.agent_name(*a)).collect();
                format!("{{{}}}", names.join(","))
            };
            write!(f, "({}, {}, {})", set(&self.full), set(&self.partial), set(&self.oblivious))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("agent `{agent}` is both a full and a partial observer of `{action}`")]
    ObservabilityConflict { action: String, agent: String },
    #[error("agent `{agent}` would partially observe world-altering action `{action}`")]
    PartialObserver { action: String, agent: String },
    #[error("effects of `{action}` on world {world} are inconsistent on `{fluent}`")]
    InconsistentEffects { action: String, world: World, fluent: String },
    #[error("`{0}` has no unique category (exactly one of causes, determines, announces is required)")]
    Uncategorized(String),
    #[error("`{action}` is not a {expected} action")]
    WrongCategory { action: String, expected: Category },
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

/// Why an action produced no successor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Blocked {
    Precondition,
    Untruthful,
}

impl fmt::Display for Blocked {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Blocked::Precondition => "executability condition is false",
            Blocked::Untruthful => "announced formula is false at the designated world",
        })
    }
}

/// Result of one step on one state: the successor set is empty or a singleton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Done(Pointed),
    Blocked(Blocked),
}

impl StepOutcome {
    pub fn successor(&self) -> Option<&Pointed> {
        match self {
            StepOutcome::Done(p) => Some(p),
            StepOutcome::Blocked(_) => None,
        }
    }

    pub fn into_successor(self) -> Option<Pointed> {
        match self {
            StepOutcome::Done(p) => Some(p),
            StepOutcome::Blocked(_) => None,
        }
    }
}

fn world_truth(m: &Kripke, phi: &Formula) -> BTreeMap<World, bool> {
    let d = m.dense();
    d.ids.iter().copied().zip(extension(&d, phi)).collect()
}

fn holds_at(state: &Pointed, phi: &Formula) -> bool {
    state.satisfies(phi)
}

pub fn is_executable(theory: &Theory, a: Action, state: &Pointed) -> bool {
    holds_at(state, &theory.spec(a).executable)
}

pub fn frame_of_reference(theory: &Theory, a: Action, state: &Pointed) -> Result<FrameOfReference, StepError> {
    let spec = theory.spec(a);
    let v = state.valuation();
    let full: AgentSet = spec.observes.iter().filter(|(_, c)| c.eval(v)).map(|(i, _)| *i).collect();
    let partial: AgentSet = spec.aware_of.iter().filter(|(_, c)| c.eval(v)).map(|(i, _)| *i).collect();
    if let Some(i) = full.intersection(&partial).next() {
        let sig = theory.signature();
        return Err(StepError::ObservabilityConflict {
            action: sig.action_name(a).into(),
            agent: sig.agent_name(*i).into(),
        });
    }
    let oblivious = theory
        .signature()
        .agents()
        .filter(|i| !full.contains(i) && !partial.contains(i))
        .collect();
    Ok(FrameOfReference { full, partial, oblivious })
}

/// `e_D(a, M, u)` for every world `u`.
pub fn effects(theory: &Theory, a: Action, m: &Kripke) -> Result<BTreeMap<World, Vec<Literal>>, StepError> {
    let spec = theory.spec(a);
    let mut out: BTreeMap<World, Vec<Literal>> = m.worlds().map(|w| (w, Vec::new())).collect();
    for (lit, cond) in &spec.effects {
        for (w, holds) in world_truth(m, cond) {
            if holds {
                let set = out.get_mut(&w).expect("world of m");
                if set.contains(&lit.complement()) {
                    let sig = theory.signature();
                    return Err(StepError::InconsistentEffects {
                        action: sig.action_name(a).into(),
                        world: w,
                        fluent: sig.fluent_name(lit.fluent).into(),
                    });
                }
                if !set.contains(lit) {
                    set.push(*lit);
                }
            }
        }
    }
    Ok(out)
}

/// `Res(a, M, s)` and the renaming `u ↦ r(a, u)` on executable worlds.
/// New ids are allocated above every id used by `state`.
pub fn res_structure(
    theory: &Theory,
    a: Action,
    state: &Pointed,
    frame: &FrameOfReference,
) -> Result<(Kripke, Renaming), StepError> {
    let m = &state.structure;
    let exec = world_truth(m, &theory.spec(a).executable);
    let eff = effects(theory, a, m)?;
    let mut res = Kripke::new(m.agent_count());
    res.reserve_ids(m.next_id());
    let mut r = Renaming::new();
    for u in m.worlds().filter(|u| exec[u]) {
        let mut v = m.val(u);
        for lit in &eff[&u] {
            v.set(lit.fluent, lit.positive);
        }
        let ru = res.add_world(v);
        res.set_origin(ru, theory.signature().action_name(a), u);
        r.insert(u, ru);
    }
    for i in &frame.full {
        for &(u, v) in m.relation(*i) {
            if let (Some(&ru), Some(&rv)) = (r.get(&u), r.get(&v)) {
                res.add_edge(*i, ru, rv)?;
            }
        }
    }
    Ok((res, r))
}

fn check_category(theory: &Theory, a: Action, expected: Category) -> Result<(), StepError> {
    if theory.spec(a).category() == Some(expected) {
        Ok(())
    } else {
        Err(StepError::WrongCategory { action: theory.signature().action_name(a).into(), expected })
    }
}

pub fn step_world(theory: &Theory, a: Action, state: &Pointed) -> Result<StepOutcome, StepError> {
    check_category(theory, a, Category::WorldAltering)?;
    let frame = frame_of_reference(theory, a, state)?;
    if let Some(i) = frame.partial.iter().next() {
        let sig = theory.signature();
        return Err(StepError::PartialObserver {
            action: sig.action_name(a).into(),
            agent: sig.agent_name(*i).into(),
        });
    }
    if !is_executable(theory, a, state) {
        return Ok(StepOutcome::Blocked(Blocked::Precondition));
    }
    let m = &state.structure;
    let (res, r) = res_structure(theory, a, state, &frame)?;
    let mut out = union_k(m, &res)?;
    for i in &frame.oblivious {
        for &(u, v) in m.relation(*i) {
            if let Some(&ru) = r.get(&u) {
                out.add_edge(*i, ru, v)?;
            }
        }
    }
    Ok(StepOutcome::Done(Pointed { point: r[&state.point], structure: out }))
}

/// `Sensed_D(a)`.
pub fn sensed_set(theory: &Theory, a: Action) -> Result<Vec<Fluent>, StepError> {
    check_category(theory, a, Category::Sensing)?;
    Ok(theory.spec(a).sensed.clone())
}

/// The common tail of the sensing and announcement steps:
/// `(M,s) ⊕^{c⁻¹}_{F∪P} (((Mʳ ⊖s rem_states)|_{F∪P}) ⊖a rem_links, c(s))`,
/// where `split(u, v)` selects F-edges of the replica to remove (evaluated on
/// valuations of the original worlds).
fn epistemic_step(
    theory: &Theory,
    a: Action,
    state: &Pointed,
    frame: &FrameOfReference,
    split: impl Fn(World, World) -> bool,
) -> Result<Pointed, StepError> {
    let m = &state.structure;
    let c = m.fresh_renaming();
    let replica = crate::kripke::replica(state, &c)?;
    let exec = world_truth(m, &theory.spec(a).executable);
    let rem_states: BTreeSet<World> = m.worlds().filter(|u| !exec[u]).map(|u| c[&u]).collect();
    let rem_links: EdgeSet = frame
        .full
        .iter()
        .flat_map(|i| m.relation(*i).iter().map(move |&(u, v)| (u, *i, v)))
        .filter(|&(u, _, v)| split(u, v))
        .map(|(u, i, v)| (c[&u], i, c[&v]))
        .collect();
    let pruned = world_subtract(&replica.structure, &rem_states)?;
    let aware = frame.aware();
    let restricted = restrict(&Pointed { structure: pruned, point: replica.point }, &aware);
    let inner = Pointed { structure: edge_subtract(&restricted.structure, &rem_links), point: replica.point };
    let inverse: Renaming = c
        .iter()
        .filter(|(_, t)| inner.structure.contains(**t))
        .map(|(u, t)| (*t, *u))
        .collect();
    Ok(union_lambda(state, &inner, &inverse, &aware)?)
}

pub fn step_sense(theory: &Theory, a: Action, state: &Pointed) -> Result<StepOutcome, StepError> {
    let sensed = sensed_set(theory, a)?;
    let frame = frame_of_reference(theory, a, state)?;
    if !is_executable(theory, a, state) {
        return Ok(StepOutcome::Blocked(Blocked::Precondition));
    }
    let m = &state.structure;
    let differs = |u: World, v: World| sensed.iter().any(|f| m.val(u).get(*f) != m.val(v).get(*f));
    Ok(StepOutcome::Done(epistemic_step(theory, a, state, &frame, differs)?))
}

pub fn step_announce(theory: &Theory, a: Action, state: &Pointed) -> Result<StepOutcome, StepError> {
    check_category(theory, a, Category::Announcement)?;
    let payload = theory.spec(a).announced();
    let frame = frame_of_reference(theory, a, state)?;
    if !is_executable(theory, a, state) {
        return Ok(StepOutcome::Blocked(Blocked::Precondition));
    }
    if !payload.eval(state.valuation()) {
        return Ok(StepOutcome::Blocked(Blocked::Untruthful));
    }
    let m = &state.structure;
    let differs = |u: World, v: World| payload.eval(m.val(u)) != payload.eval(m.val(v));
    Ok(StepOutcome::Done(epistemic_step(theory, a, state, &frame, differs)?))
}

pub fn step(theory: &Theory, a: Action, state: &Pointed) -> Result<StepOutcome, StepError> {
    match theory.spec(a).category() {
        Some(Category::WorldAltering) => step_world(theory, a, state),
        Some(Category::Sensing) => step_sense(theory, a, state),
        Some(Category::Announcement) => step_announce(theory, a, state),
        None => Err(StepError::Uncategorized(theory.signature().action_name(a).into())),
    }
}

/// A belief state: the failure value or a non-empty set of states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BState {
    Failed,
    States(Vec<Pointed>),
}

impl BState {
    pub fn single(state: Pointed) -> Self {
        BState::States(vec![state])
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, BState::Failed)
    }

    pub fn states(&self) -> &[Pointed] {
        match self {
            BState::Failed => &[],
            BState::States(s) => s,
        }
    }

    pub fn len(&self) -> usize {
        self.states().len()
    }

    pub fn is_empty(&self) -> bool {
        self.states().is_empty()
    }
}

/// Where a plan stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    /// 0-based index into the plan.
    pub step: usize,
    pub action: Action,
    /// Index of the member state that blocked.
    pub member: usize,
    pub reason: Blocked,
}

pub fn step_bstate(theory: &Theory, a: Action, b: &BState) -> Result<BState, StepError> {
    Ok(step_bstate_diagnosed(theory, a, b)?.0)
}

fn step_bstate_diagnosed(
    theory: &Theory,
    a: Action,
    b: &BState,
) -> Result<(BState, Option<(usize, Blocked)>), StepError> {
    let BState::States(states) = b else { return Ok((BState::Failed, None)) };
    let mut out = Vec::with_capacity(states.len());
    for (k, s) in states.iter().enumerate() {
        match step(theory, a, s)? {
            StepOutcome::Done(next) => {
                if !out.contains(&next) {
                    out.push(next)
                }
            }
            StepOutcome::Blocked(why) => return Ok((BState::Failed, Some((k, why)))),
        }
    }
    Ok((BState::States(out), None))
}

/// `Φ*`: a left fold of [`step_bstate`].
pub fn run_plan(theory: &Theory, plan: &[Action], b: &BState) -> Result<BState, StepError> {
    let mut cur = b.clone();
    for a in plan {
        if cur.is_failed() {
            break;
        }
        cur = step_bstate(theory, *a, &cur)?;
    }
    Ok(cur)
}

/// Every intermediate b-state, plus where execution stopped if it failed.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `steps[k]` is the b-state after `plan[..=k]`.
    pub steps: Vec<BState>,
    pub failure: Option<Failure>,
}

impl Trace {
    pub fn last<'a>(&'a self, initial: &'a BState) -> &'a BState {
        self.steps.last().unwrap_or(initial)
    }
}

pub fn trace_plan(theory: &Theory, plan: &[Action], b: &BState) -> Result<Trace, StepError> {
    let mut steps = Vec::new();
    let mut cur = b.clone();
    for (k, a) in plan.iter().enumerate() {
        let (next, blocked) = step_bstate_diagnosed(theory, *a, &cur)?;
        steps.push(next.clone());
        if let Some((member, reason)) = blocked {
            return Ok(Trace { steps, failure: Some(Failure { step: k, action: *a, member, reason }) });
        }
        if next.is_failed() {
            return Ok(Trace { steps, failure: None });
        }
        cur = next;
    }
    Ok(Trace { steps, failure: None })
}

/// `(I, D) ⊨ goal after plan`, relative to the given initial b-state.
pub fn entails(theory: &Theory, query: &Query, initial: &BState) -> Result<bool, StepError> {
    Ok(match run_plan(theory, &query.plan, initial)? {
        BState::Failed => false,
        BState::States(states) => states.iter().all(|s| s.satisfies(&query.goal)),
    })
}

/// No aware agent already settles a sensed fluent anywhere in the structure.
pub fn is_consistency_preserving_sensing(theory: &Theory, a: Action, state: &Pointed) -> Result<bool, StepError> {
    let frame = frame_of_reference(theory, a, state)?;
    let sensed = sensed_set(theory, a)?;
    let mut bad = Vec::new();
    for i in frame.aware() {
        for f in &sensed {
            let atom = Formula::atom(*f);
            bad.push(Formula::or(vec![
                Formula::b(i, atom.clone()),
                Formula::b(i, Formula::not(atom)),
            ]));
        }
    }
    Ok(bad.iter().all(|phi| world_truth(&state.structure, phi).values().all(|b| !b)))
}

/// No aware agent believes the negation of the announced formula anywhere.
pub fn is_consistency_preserving_announcement(
    theory: &Theory,
    a: Action,
    state: &Pointed,
) -> Result<bool, StepError> {
    check_category(theory, a, Category::Announcement)?;
    let frame = frame_of_reference(theory, a, state)?;
    let neg = Formula::Prop(Prop::not(theory.spec(a).announced()));
    Ok(frame
        .aware()
        .into_iter()
        .all(|i| world_truth(&state.structure, &Formula::b(i, neg.clone())).values().all(|b| !b)))
}
