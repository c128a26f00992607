//! Structure-editing operators.

use std::collections::{BTreeMap, BTreeSet};

use super::{reachable, EdgeSet, Kripke, KripkeError, Pointed, Renaming, World};
use crate::logic::{Agent, AgentSet, Interpretation};

/// Removes the worlds in `u` and every edge touching them.
pub fn world_subtract(m: &Kripke, u: &BTreeSet<World>) -> Result<Kripke, KripkeError> {
    if let Some(w) = u.iter().find(|w| !m.contains(**w)) {
        return Err(KripkeError::UnknownWorld(*w));
    }
    let mut out = m.clone();
    out.worlds.retain(|w, _| !u.contains(w));
    out.origins.retain(|w, _| !u.contains(w));
    for r in &mut out.relations {
        r.retain(|(a, b)| !u.contains(a) && !u.contains(b));
    }
    Ok(out)
}

/// Removes the listed labeled edges; absent edges are ignored.
pub fn edge_subtract(m: &Kripke, x: &EdgeSet) -> Kripke {
    let mut out = m.clone();
    for (u, i, v) in x {
        if let Some(r) = out.relations.get_mut(i.0) {
            r.remove(&(*u, *v));
        }
    }
    out
}

pub fn edge_add(m: &Kripke, x: &EdgeSet) -> Result<Kripke, KripkeError> {
    let mut out = m.clone();
    for (u, i, v) in x {
        out.add_edge(*i, *u, *v)?;
    }
    Ok(out)
}

/// Drops every edge labeled by an agent outside `alpha`.
pub fn restrict(state: &Pointed, alpha: &AgentSet) -> Pointed {
    let mut m = state.structure.clone();
    for (i, r) in m.relations.iter_mut().enumerate() {
        if !alpha.contains(&Agent(i)) {
            r.clear();
        }
    }
    Pointed { structure: m, point: state.point }
}

/// An isomorphic copy under `fresh`, whose targets must be unused ids.
pub fn replica(state: &Pointed, fresh: &Renaming) -> Result<Pointed, KripkeError> {
    let m = &state.structure;
    let mut targets = BTreeSet::new();
    for w in m.worlds() {
        let t = *fresh.get(&w).ok_or(KripkeError::Uncovered(w))?;
        if m.contains(t) {
            return Err(KripkeError::Collision(t));
        }
        if !targets.insert(t) {
            return Err(KripkeError::NotInjective);
        }
    }
    let mut out = Kripke::new(m.agent_count());
    out.next = m.next;
    for (w, v) in &m.worlds {
        out.insert_world(fresh[w], *v)?;
        out.set_origin(fresh[w], "c", *w);
    }
    for (i, r) in m.relations.iter().enumerate() {
        for (u, v) in r {
            out.relations[i].insert((fresh[u], fresh[v]));
        }
    }
    Ok(Pointed { structure: out, point: fresh[&state.point] })
}

fn check_agents(a: &Kripke, b: &Kripke) -> Result<(), KripkeError> {
    if a.agent_count() != b.agent_count() {
        return Err(KripkeError::AgentMismatch(a.agent_count(), b.agent_count()));
    }
    Ok(())
}

/// Component-wise union; shared worlds must carry equal valuations.
pub fn union_k(m1: &Kripke, m2: &Kripke) -> Result<Kripke, KripkeError> {
    check_agents(m1, m2)?;
    let mut out = m1.clone();
    for (w, v) in &m2.worlds {
        match m1.worlds.get(w) {
            Some(v1) if v1 != v => return Err(KripkeError::Incompatible(*w)),
            Some(_) => {}
            None => {
                out.worlds.insert(*w, *v);
            }
        }
    }
    for (w, o) in &m2.origins {
        out.origins.entry(*w).or_insert_with(|| o.clone());
    }
    for (i, r) in m2.relations.iter().enumerate() {
        out.relations[i].extend(r.iter().copied());
    }
    out.next = m1.next.max(m2.next);
    Ok(out)
}

/// `(M1 ⊕^λ_α M2, s2)`: disjoint union, plus edges from M2 into M1 for agents
/// outside `alpha`, copied through `lambda` from M1's relation.
///
/// `lambda` must be injective from M2's worlds into M1's worlds. M2 may have
/// fewer worlds than M1 (the sensing and announcement steps prune the copy).
pub fn union_lambda(
    s1: &Pointed,
    s2: &Pointed,
    lambda: &Renaming,
    alpha: &AgentSet,
) -> Result<Pointed, KripkeError> {
    let (m1, m2) = (&s1.structure, &s2.structure);
    check_agents(m1, m2)?;
    if let Some(w) = m2.worlds().find(|w| m1.contains(*w)) {
        return Err(KripkeError::Collision(w));
    }
    let mut seen = BTreeSet::new();
    for u in m2.worlds() {
        let t = *lambda.get(&u).ok_or(KripkeError::Uncovered(u))?;
        if !m1.contains(t) {
            return Err(KripkeError::UnknownWorld(t));
        }
        if !seen.insert(t) {
            return Err(KripkeError::NotInjective);
        }
    }
    let mut out = union_k(m1, m2)?;
    for i in (0..m1.agent_count()).map(Agent).filter(|i| !alpha.contains(i)) {
        for u in m2.worlds() {
            let src = lambda[&u];
            let targets: Vec<World> = m1.successors(i, src).collect();
            for v in targets {
                out.relations[i.0].insert((u, v));
            }
        }
    }
    Ok(Pointed { structure: out, point: s2.point })
}

/// Drops worlds not reachable from the point.
pub fn reachable_restriction(state: &Pointed) -> Pointed {
    let m = &state.structure;
    let all: AgentSet = (0..m.agent_count()).map(Agent).collect();
    let keep = reachable(m, state.point, &all);
    let drop: BTreeSet<World> = m.worlds().filter(|w| !keep.contains(w)).collect();
    let structure = world_subtract(m, &drop).expect("subset of own worlds");
    Pointed { structure, point: state.point }
}

/// Merges worlds with identical interpretations. Class ids are assigned in
/// order of first appearance, so the result is deterministic.
pub fn quotient(state: &Pointed) -> Pointed {
    let m = &state.structure;
    let mut class_of_val: BTreeMap<Interpretation, World> = BTreeMap::new();
    let mut class: BTreeMap<World, World> = BTreeMap::new();
    let mut out = Kripke::new(m.agent_count());
    for (w, v) in &m.worlds {
        let c = *class_of_val.entry(*v).or_insert_with(|| out.add_world(*v));
        class.insert(*w, c);
    }
    for (i, r) in m.relations.iter().enumerate() {
        for (u, v) in r {
            out.relations[i].insert((class[u], class[v]));
        }
    }
    Pointed { point: class[&state.point], structure: out }
}
