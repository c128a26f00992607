//! Update models and product update, and the encoding of action
//! occurrences as update templates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::kripke::{bisimilar, extension, Kripke, KripkeError, Pointed, World};
use crate::lang::{Category, Theory};
use crate::logic::{Action, Agent, Fluent, Formula, Signature};
use crate::transition::{frame_of_reference, is_executable, step, FrameOfReference, StepError};

pub type Event = usize;

/// `sub(e)`; fluents not in the map keep their value.
pub type Substitution = BTreeMap<Fluent, Formula>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateModel {
    /// Display names, one per event.
    pub events: Vec<String>,
    /// `relations[i]` is `R_i`.
    pub relations: Vec<BTreeSet<(Event, Event)>>,
    pub pre: Vec<Formula>,
    pub sub: Vec<Substitution>,
}

impl UpdateModel {
    pub fn new(n_agents: usize) -> Self {
        UpdateModel { events: Vec::new(), relations: vec![BTreeSet::new(); n_agents], pre: Vec::new(), sub: Vec::new() }
    }

    pub fn add_event(&mut self, name: impl Into<String>, pre: Formula, sub: Substitution) -> Event {
        self.events.push(name.into());
        self.pre.push(pre);
        self.sub.push(sub);
        self.events.len() - 1
    }

    pub fn add_edge(&mut self, i: Agent, e: Event, f: Event) {
        assert!(e < self.events.len() && f < self.events.len(), "event out of range");
        self.relations[i.0].insert((e, f));
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn event(&self, name: &str) -> Option<Event> {
        self.events.iter().position(|e| e == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateInstance {
    pub model: UpdateModel,
    pub designated: Event,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateTemplate {
    pub model: UpdateModel,
    pub designated: BTreeSet<Event>,
}

impl From<UpdateInstance> for UpdateTemplate {
    fn from(u: UpdateInstance) -> Self {
        UpdateTemplate { model: u.model, designated: BTreeSet::from([u.designated]) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UpdateError {
    #[error("`{action}` senses {count} fluents; update models are only built for a single sensed fluent")]
    UnsupportedShape { action: String, count: usize },
    #[error("world-altering action `{0}` has partial observers")]
    PartialObservers(String),
    #[error("`{action}` is not a {expected} action")]
    WrongCategory { action: String, expected: Category },
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

/// `M ⊗ U`. The second component maps each surviving `(s, τ)` to its world.
pub fn product_update(m: &Kripke, u: &UpdateModel) -> (Kripke, BTreeMap<(World, Event), World>) {
    let d = m.dense();
    let pre: Vec<Vec<bool>> = u.pre.iter().map(|p| extension(&d, p)).collect();
    let mut out = Kripke::new(m.agent_count());
    let mut ids = BTreeMap::new();
    for (e, sub) in u.sub.iter().enumerate() {
        let subs: Vec<(Fluent, Vec<bool>)> = sub.iter().map(|(f, phi)| (*f, extension(&d, phi))).collect();
        for (k, &s) in d.ids.iter().enumerate() {
            if !pre[e][k] {
                continue;
            }
            let mut v = m.val(s);
            for (f, ext) in &subs {
                v.set(*f, ext[k]);
            }
            let w = out.add_world(v);
            out.set_origin(w, u.events[e].clone(), s);
            ids.insert((s, e), w);
        }
    }
    for (i, rel) in u.relations.iter().enumerate() {
        let i = Agent(i);
        for &(e, f) in rel {
            for &(s, t) in m.relation(i) {
                if let (Some(&x), Some(&y)) = (ids.get(&(s, e)), ids.get(&(t, f))) {
                    out.add_edge(i, x, y).expect("product worlds exist");
                }
            }
        }
    }
    (out, ids)
}

/// `(M,s) ⊗ (Σ,Γ)`: one result per designated event whose precondition holds
/// at the point.
pub fn apply_template(state: &Pointed, t: &UpdateTemplate) -> Vec<Pointed> {
    let (m, ids) = product_update(&state.structure, &t.model);
    t.designated
        .iter()
        .filter_map(|e| ids.get(&(state.point, *e)))
        .map(|&w| Pointed { structure: m.clone(), point: w })
        .collect()
}

fn require(theory: &Theory, a: Action, expected: Category) -> Result<(), UpdateError> {
    if theory.spec(a).category() == Some(expected) {
        Ok(())
    } else {
        Err(UpdateError::WrongCategory { action: theory.signature().action_name(a).into(), expected })
    }
}

pub fn omega_world(theory: &Theory, a: Action, rho: &FrameOfReference) -> Result<UpdateInstance, UpdateError> {
    require(theory, a, Category::WorldAltering)?;
    if !rho.partial.is_empty() {
        return Err(UpdateError::PartialObservers(theory.signature().action_name(a).into()));
    }
    let spec = theory.spec(a);
    let mut sub = Substitution::new();
    for p in theory.signature().fluents() {
        let psi = |positive: bool| {
            Formula::or(
                spec.effects
                    .iter()
                    .filter(|(l, _)| l.fluent == p && l.positive == positive)
                    .map(|(_, c)| c.clone())
                    .collect(),
            )
        };
        let atom = Formula::atom(p);
        sub.insert(p, Formula::or(vec![psi(true), Formula::and(vec![atom, Formula::not(psi(false))])]));
    }
    let mut u = UpdateModel::new(theory.signature().agent_count());
    let sigma = u.add_event("σ", spec.executable.clone(), sub);
    let eps = u.add_event("ε", Formula::top(), Substitution::new());
    for i in theory.signature().agents() {
        u.add_edge(i, eps, eps);
        if rho.full.contains(&i) {
            u.add_edge(i, sigma, sigma);
        } else {
            u.add_edge(i, sigma, eps);
        }
    }
    Ok(UpdateInstance { model: u, designated: sigma })
}

/// The three-event shape shared by sensing and announcement.
fn epistemic_model(theory: &Theory, a: Action, rho: &FrameOfReference, phi: Formula) -> (UpdateModel, Event, Event) {
    let psi = theory.spec(a).executable.clone();
    let mut u = UpdateModel::new(theory.signature().agent_count());
    let sigma = u.add_event("σ", Formula::and(vec![psi.clone(), phi.clone()]), Substitution::new());
    let tau = u.add_event("τ", Formula::and(vec![psi, Formula::not(phi)]), Substitution::new());
    let eps = u.add_event("ε", Formula::top(), Substitution::new());
    for i in theory.signature().agents() {
        u.add_edge(i, eps, eps);
        if rho.full.contains(&i) || rho.partial.contains(&i) {
            u.add_edge(i, sigma, sigma);
            u.add_edge(i, tau, tau);
            if rho.partial.contains(&i) {
                u.add_edge(i, sigma, tau);
                u.add_edge(i, tau, sigma);
            }
        } else {
            u.add_edge(i, sigma, eps);
            u.add_edge(i, tau, eps);
        }
    }
    (u, sigma, tau)
}

pub fn omega_sense(theory: &Theory, a: Action, rho: &FrameOfReference) -> Result<UpdateTemplate, UpdateError> {
    require(theory, a, Category::Sensing)?;
    let sensed = &theory.spec(a).sensed;
    if sensed.len() != 1 {
        return Err(UpdateError::UnsupportedShape {
            action: theory.signature().action_name(a).into(),
            count: sensed.len(),
        });
    }
    let (model, sigma, tau) = epistemic_model(theory, a, rho, Formula::atom(sensed[0]));
    Ok(UpdateTemplate { model, designated: BTreeSet::from([sigma, tau]) })
}

pub fn omega_announce(theory: &Theory, a: Action, rho: &FrameOfReference) -> Result<UpdateInstance, UpdateError> {
    require(theory, a, Category::Announcement)?;
    let phi = Formula::Prop(theory.spec(a).announced());
    let (model, sigma, _) = epistemic_model(theory, a, rho, phi);
    Ok(UpdateInstance { model, designated: sigma })
}

/// `Ω(a, (M,s))`; `None` when `a` is not executable at the point.
pub fn omega(theory: &Theory, a: Action, state: &Pointed) -> Result<Option<UpdateTemplate>, UpdateError> {
    let rho = frame_of_reference(theory, a, state)?;
    let category = theory.spec(a).category();
    if category.is_none() {
        return Err(StepError::Uncategorized(theory.signature().action_name(a).into()).into());
    }
    if !is_executable(theory, a, state) {
        return Ok(None);
    }
    Ok(Some(match category.unwrap() {
        Category::WorldAltering => omega_world(theory, a, &rho)?.into(),
        Category::Sensing => omega_sense(theory, a, &rho)?,
        Category::Announcement => omega_announce(theory, a, &rho)?.into(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossCheck {
    Match,
    Mismatch,
    /// Sensing of several fluents at once has no update-model encoding here.
    UnsupportedShape,
}

/// Compares the direct transition with the product-update route.
pub fn cross_check(theory: &Theory, a: Action, state: &Pointed) -> Result<CrossCheck, UpdateError> {
    if theory.spec(a).category() == Some(Category::Sensing) && theory.spec(a).sensed.len() != 1 {
        return Ok(CrossCheck::UnsupportedShape);
    }
    let direct = step(theory, a, state)?.into_successor();
    let via_model = match omega(theory, a, state)? {
        None => Vec::new(),
        Some(t) => apply_template(state, &t),
    };
    let ok = match (direct, via_model.as_slice()) {
        (None, []) => true,
        (Some(d), [m]) => bisimilar(&d, m),
        _ => false,
    };
    Ok(if ok { CrossCheck::Match } else { CrossCheck::Mismatch })
}

/// DOT rendering: events are boxes, designated events double boxes.
pub fn template_to_dot(t: &UpdateTemplate, sig: &Signature) -> String {
    let u = &t.model;
    let mut out = String::from("digraph update {\n  rankdir=LR;\n  node [shape=box];\n");
    for (e, name) in u.events.iter().enumerate() {
        let mut label = format!("{name}\\npre: {}", u.pre[e].display(sig));
        let subs: Vec<String> =
            u.sub[e].iter().map(|(f, phi)| format!("{} → {}", sig.fluent_name(*f), phi.display(sig))).collect();
        if !subs.is_empty() {
            let _ = write!(label, "\\nsub: {}", subs.join("; "));
        }
        let label = label.replace('"', "\\\"");
        let peripheries = if t.designated.contains(&e) { 2 } else { 1 };
        let _ = writeln!(out, "  e{e} [label=\"{label}\", peripheries={peripheries}];");
    }
    let mut labels: BTreeMap<(Event, Event), Vec<&str>> = BTreeMap::new();
    for (i, rel) in u.relations.iter().enumerate() {
        for &(e, f) in rel {
            labels.entry((e, f)).or_default().push(sig.agent_name(Agent(i)));
        }
    }
    for ((e, f), names) in labels {
        let _ = writeln!(out, "  e{e} -> e{f} [label=\"{}\"];", names.join(","));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_theory;
    use crate::logic::{Interpretation, Prop};

    fn two_world(n_agents: usize) -> Pointed {
        let mut m = Kripke::new(n_agents);
        let a = m.add_world(Interpretation(0));
        let b = m.add_world(Interpretation(1));
        for i in 0..n_agents {
            m.add_clique(Agent(i), &[a, b]).unwrap();
        }
        Pointed::new(m, a).unwrap()
    }

    #[test]
    fn identity_model_copies_the_structure() {
        let st = two_world(2);
        let mut u = UpdateModel::new(2);
        let e = u.add_event("e", Formula::top(), Substitution::new());
        u.add_edge(Agent(0), e, e);
        u.add_edge(Agent(1), e, e);
        let out = apply_template(&st, &UpdateInstance { model: u, designated: e }.into());
        assert_eq!(out.len(), 1);
        assert!(bisimilar(&out[0], &st));
        assert_eq!(out[0].structure.len(), 2);
    }

    #[test]
    fn false_precondition_contributes_nothing() {
        let st = two_world(1);
        let mut u = UpdateModel::new(1);
        u.add_event("dead", Formula::Prop(Prop::False), Substitution::new());
        let e = u.add_event("live", Formula::top(), Substitution::new());
        let (m, ids) = product_update(&st.structure, &u);
        assert_eq!(m.len(), 2);
        assert!(ids.keys().all(|(_, ev)| *ev == e));
        let empty = UpdateTemplate { model: u, designated: BTreeSet::new() };
        assert!(apply_template(&st, &empty).is_empty());
    }

    #[test]
    fn flip_substitution_negates() {
        let th = parse_theory("agents A, B\nfluents on\nactions flip\nflip causes on if !on\nflip causes !on if on\nB observes flip\n")
            .unwrap();
        let st = two_world(2);
        let rho = frame_of_reference(&th, Action(0), &st).unwrap();
        let inst = omega_world(&th, Action(0), &rho).unwrap();
        let sub = &inst.model.sub[inst.designated][&Fluent(0)];
        for v in [Interpretation(0), Interpretation(1)] {
            assert_eq!(sub.as_prop().unwrap().eval(v), !v.get(Fluent(0)));
        }
        assert_eq!(cross_check(&th, Action(0), &st).unwrap(), CrossCheck::Match);
    }

    #[test]
    fn no_effects_means_identity_substitution() {
        let th = parse_theory("agents A\nfluents f, g\nactions a, b\na causes g if false\n").unwrap();
        let st = two_world(1);
        let rho = frame_of_reference(&th, Action(0), &st).unwrap();
        let inst = omega_world(&th, Action(0), &rho).unwrap();
        let out = apply_template(&st, &inst.into());
        let m = &out[0].structure;
        for w in m.worlds() {
            let parent = m.origin(w).unwrap().parent;
            assert_eq!(m.valuation(w), st.structure.valuation(parent));
        }
    }

    #[test]
    fn multi_fluent_sensing_is_unsupported() {
        let th = parse_theory("agents A\nfluents f, g\nactions a\na determines f\na determines g\nA observes a\n").unwrap();
        let st = two_world(1);
        assert_eq!(cross_check(&th, Action(0), &st).unwrap(), CrossCheck::UnsupportedShape);
        let rho = frame_of_reference(&th, Action(0), &st).unwrap();
        assert!(matches!(omega_sense(&th, Action(0), &rho), Err(UpdateError::UnsupportedShape { count: 2, .. })));
    }

    #[test]
    fn sensing_selects_event_by_point_value() {
        let th = parse_theory("agents A, B\nfluents f\nactions a\na determines f\nA observes a\nB aware_of a\n").unwrap();
        let st = two_world(2);
        let t = omega(&th, Action(0), &st).unwrap().unwrap();
        let out = apply_template(&st, &t);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].structure.origin(out[0].point).unwrap().tag, "τ");
        assert!(template_to_dot(&t, th.signature()).contains("peripheries=2"));
        assert_eq!(cross_check(&th, Action(0), &st).unwrap(), CrossCheck::Match);
    }

    #[test]
    fn inexecutable_gives_no_template() {
        let th = parse_theory("agents A\nfluents f\nactions a\nexecutable a if f\na causes f\n").unwrap();
        assert!(omega(&th, Action(0), &two_world(1)).unwrap().is_none());
        assert_eq!(cross_check(&th, Action(0), &two_world(1)).unwrap(), CrossCheck::Match);
    }
}
