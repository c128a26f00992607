//! Finite Kripke structures, pointed states and the satisfaction relation.

mod bisim;
mod dot;
mod ops;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::logic::{Agent, AgentSet, Formula, Interpretation, Prop};

pub use bisim::{bisimilar, bisimulation_classes, bisimulation_quotient};
pub use dot::to_dot;
pub use ops::{
    edge_add, edge_subtract, quotient, reachable_restriction, replica, restrict, union_k,
    union_lambda, world_subtract,
};

/// Opaque world id. Ids are allocated from a per-structure counter and never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct World(pub u32);

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Labeled edges `(u, i, v)`.
pub type EdgeSet = BTreeSet<(World, Agent, World)>;

/// World renaming, used both for replica maps and for λ.
pub type Renaming = BTreeMap<World, World>;

/// Where a world came from, kept for labels and tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub tag: String,
    pub parent: World,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("world {0} is not in the structure")]
    UnknownWorld(World),
    #[error("world {0} already exists")]
    Collision(World),
    #[error("structures disagree on the valuation of shared world {0}")]
    Incompatible(World),
    #[error("structures have different agent counts ({0} vs {1})")]
    AgentMismatch(usize, usize),
    #[error("renaming is not injective")]
    NotInjective,
    #[error("renaming does not cover world {0}")]
    Uncovered(World),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kripke {
    worlds: BTreeMap<World, Interpretation>,
    relations: Vec<BTreeSet<(World, World)>>,
    origins: BTreeMap<World, Origin>,
    next: u32,
}

impl Kripke {
    pub fn new(n_agents: usize) -> Self {
        Kripke {
            worlds: BTreeMap::new(),
            relations: vec![BTreeSet::new(); n_agents],
            origins: BTreeMap::new(),
            next: 0,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.relations.len()
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn add_world(&mut self, v: Interpretation) -> World {
        let w = World(self.next);
        self.next += 1;
        self.worlds.insert(w, v);
        w
    }

    pub fn insert_world(&mut self, w: World, v: Interpretation) -> Result<(), KripkeError> {
        if self.worlds.contains_key(&w) {
            return Err(KripkeError::Collision(w));
        }
        self.worlds.insert(w, v);
        self.next = self.next.max(w.0 + 1);
        Ok(())
    }

    pub fn add_edge(&mut self, i: Agent, u: World, v: World) -> Result<(), KripkeError> {
        for w in [u, v] {
            if !self.worlds.contains_key(&w) {
                return Err(KripkeError::UnknownWorld(w));
            }
        }
        self.relations[i.0].insert((u, v));
        Ok(())
    }

    /// Adds edges between every pair of `ws` (loops included) for agent `i`.
    pub fn add_clique(&mut self, i: Agent, ws: &[World]) -> Result<(), KripkeError> {
        for &u in ws {
            for &v in ws {
                self.add_edge(i, u, v)?;
            }
        }
        Ok(())
    }

    pub fn worlds(&self) -> impl ExactSizeIterator<Item = World> + '_ {
        self.worlds.keys().copied()
    }

    pub fn world_set(&self) -> BTreeSet<World> {
        self.worlds.keys().copied().collect()
    }

    pub fn contains(&self, w: World) -> bool {
        self.worlds.contains_key(&w)
    }

    pub fn valuation(&self, w: World) -> Option<Interpretation> {
        self.worlds.get(&w).copied()
    }

    pub(crate) fn val(&self, w: World) -> Interpretation {
        self.worlds[&w]
    }

    pub fn relation(&self, i: Agent) -> &BTreeSet<(World, World)> {
        &self.relations[i.0]
    }

    pub fn has_edge(&self, i: Agent, u: World, v: World) -> bool {
        self.relations[i.0].contains(&(u, v))
    }

    pub fn successors(&self, i: Agent, u: World) -> impl Iterator<Item = World> + '_ {
        self.relations[i.0]
            .range((u, World(0))..=(u, World(u32::MAX)))
            .map(|&(_, v)| v)
    }

    pub fn edges(&self) -> EdgeSet {
        self.relations
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(u, v)| (u, Agent(i), v)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.relations.iter().map(BTreeSet::len).sum()
    }

    /// Smallest id guaranteed unused by this structure.
    pub fn next_id(&self) -> u32 {
        self.next
    }

    pub fn reserve_ids(&mut self, next: u32) {
        self.next = self.next.max(next);
    }

    /// A renaming of every world onto the next unused block of ids.
    pub fn fresh_renaming(&self) -> Renaming {
        self.worlds
            .keys()
            .enumerate()
            .map(|(k, &w)| (w, World(self.next + k as u32)))
            .collect()
    }

    pub fn origin(&self, w: World) -> Option<&Origin> {
        self.origins.get(&w)
    }

    pub fn set_origin(&mut self, w: World, tag: impl Into<String>, parent: World) {
        self.origins.insert(w, Origin { tag: tag.into(), parent });
    }

    /// Dense view used by the model checker and bisimulation.
    pub(crate) fn dense(&self) -> Dense {
        let ids: Vec<World> = self.worlds.keys().copied().collect();
        let index: BTreeMap<World, usize> = ids.iter().enumerate().map(|(k, &w)| (w, k)).collect();
        let succ = self
            .relations
            .iter()
            .map(|r| {
                let mut adj = vec![Vec::new(); ids.len()];
                for (u, v) in r {
                    adj[index[u]].push(index[v]);
                }
                adj
            })
            .collect();
        let vals = ids.iter().map(|w| self.worlds[w]).collect();
        Dense { ids, index, succ, vals }
    }
}

pub(crate) struct Dense {
    pub ids: Vec<World>,
    pub index: BTreeMap<World, usize>,
    /// `succ[agent][world]`
    pub succ: Vec<Vec<Vec<usize>>>,
    pub vals: Vec<Interpretation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pointed {
    pub structure: Kripke,
    pub point: World,
}

impl Pointed {
    pub fn new(structure: Kripke, point: World) -> Result<Self, KripkeError> {
        if !structure.contains(point) {
            return Err(KripkeError::UnknownWorld(point));
        }
        Ok(Pointed { structure, point })
    }

    pub fn valuation(&self) -> Interpretation {
        self.structure.val(self.point)
    }

    pub fn satisfies(&self, phi: &Formula) -> bool {
        satisfies(self, phi)
    }
}

/// The set of worlds of `m` satisfying `phi`, indexed as `m.dense()`.
pub(crate) fn extension(d: &Dense, phi: &Formula) -> Vec<bool> {
    match phi {
        Formula::Prop(p) => d.vals.iter().map(|v| p.eval(*v)).collect(),
        Formula::Not(f) => extension(d, f).into_iter().map(|b| !b).collect(),
        Formula::And(fs) => {
            let mut acc = vec![true; d.ids.len()];
            for f in fs {
                for (a, b) in acc.iter_mut().zip(extension(d, f)) {
                    *a &= b;
                }
            }
            acc
        }
        Formula::Or(fs) => {
            let mut acc = vec![false; d.ids.len()];
            for f in fs {
                for (a, b) in acc.iter_mut().zip(extension(d, f)) {
                    *a |= b;
                }
            }
            acc
        }
        Formula::B(i, f) => {
            let inner = extension(d, f);
            box_of(d, &[*i], &inner)
        }
        Formula::E(g, f) => {
            let inner = extension(d, f);
            let agents: Vec<Agent> = g.resolve_n(d.succ.len()).into_iter().collect();
            box_of(d, &agents, &inner)
        }
        Formula::C(g, f) => {
            // Greatest fixpoint of X = φ ∧ E_α X; paths of length zero count.
            let agents: Vec<Agent> = g.resolve_n(d.succ.len()).into_iter().collect();
            let mut x = extension(d, f);
            loop {
                let step = box_of(d, &agents, &x);
                let next: Vec<bool> = x.iter().zip(&step).map(|(a, b)| *a && *b).collect();
                if next == x {
                    return x;
                }
                x = next;
            }
        }
    }
}

fn box_of(d: &Dense, agents: &[Agent], inner: &[bool]) -> Vec<bool> {
    (0..d.ids.len())
        .map(|w| agents.iter().all(|i| d.succ[i.0][w].iter().all(|&v| inner[v])))
        .collect()
}

pub fn satisfies(state: &Pointed, phi: &Formula) -> bool {
    let d = state.structure.dense();
    extension(&d, phi)[d.index[&state.point]]
}

/// Worlds of `m` satisfying `phi`.
pub fn worlds_satisfying(m: &Kripke, phi: &Formula) -> BTreeSet<World> {
    let d = m.dense();
    extension(&d, phi)
        .into_iter()
        .zip(&d.ids)
        .filter_map(|(b, w)| b.then_some(*w))
        .collect()
}

pub fn holds_everywhere(m: &Kripke, phi: &Formula) -> bool {
    let d = m.dense();
    extension(&d, phi).into_iter().all(|b| b)
}

/// Convenience for fluent formulas at a single world.
pub fn prop_holds(m: &Kripke, w: World, p: &Prop) -> bool {
    p.eval(m.val(w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameProperty {
    T,
    Four,
    Five,
    D,
    S5,
}

impl fmt::Display for FrameProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameProperty::T => "T",
            FrameProperty::Four => "4",
            FrameProperty::Five => "5",
            FrameProperty::D => "D",
            FrameProperty::S5 => "S5",
        })
    }
}

pub fn frame_class(m: &Kripke) -> BTreeSet<FrameProperty> {
    let d = m.dense();
    let n = d.ids.len();
    let mut t = true;
    let mut four = true;
    let mut five = true;
    let mut serial = true;
    for adj in &d.succ {
        let mut rel = vec![vec![false; n]; n];
        for (u, vs) in adj.iter().enumerate() {
            for &v in vs {
                rel[u][v] = true;
            }
        }
        for u in 0..n {
            t &= rel[u][u];
            serial &= !adj[u].is_empty();
            for &v in &adj[u] {
                for &w in &adj[v] {
                    four &= rel[u][w];
                }
                for &w in &adj[u] {
                    five &= rel[v][w];
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    if t {
        out.insert(FrameProperty::T);
    }
    if four {
        out.insert(FrameProperty::Four);
    }
    if five {
        out.insert(FrameProperty::Five);
    }
    if serial {
        out.insert(FrameProperty::D);
    }
    if t && four && five {
        out.insert(FrameProperty::S5);
    }
    out
}

pub fn is_s5(m: &Kripke) -> bool {
    frame_class(m).contains(&FrameProperty::S5)
}

/// Worlds reachable from `from` along any agent's edges, `from` included.
pub fn reachable(m: &Kripke, from: World, agents: &AgentSet) -> BTreeSet<World> {
    let mut seen = BTreeSet::from([from]);
    let mut stack = vec![from];
    while let Some(u) = stack.pop() {
        for i in agents {
            for v in m.successors(*i, u) {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Fluent, Group};

    fn coin_m0() -> Pointed {
        // tail is fluent 0; three agents, total relations.
        let mut m = Kripke::new(3);
        let s0 = m.add_world(Interpretation(0));
        let s1 = m.add_world(Interpretation(1));
        for i in 0..3 {
            m.add_clique(Agent(i), &[s0, s1]).unwrap();
        }
        Pointed::new(m, s0).unwrap()
    }

    #[test]
    fn common_ignorance_in_initial_coin_box() {
        let tail = Formula::atom(Fluent(0));
        let ign = |i| {
            Formula::and(vec![
                Formula::not(Formula::b(Agent(i), tail.clone())),
                Formula::not(Formula::b(Agent(i), Formula::not(tail.clone()))),
            ])
        };
        let phi = Formula::c(Group::All, Formula::and(vec![ign(0), ign(1), ign(2)]));
        assert!(coin_m0().satisfies(&phi));
    }

    #[test]
    fn reflexive_singleton_believes_its_valuation() {
        let mut m = Kripke::new(1);
        let w = m.add_world(Interpretation(1));
        m.add_edge(Agent(0), w, w).unwrap();
        let st = Pointed::new(m, w).unwrap();
        assert!(st.satisfies(&Formula::b(Agent(0), Formula::atom(Fluent(0)))));
    }

    #[test]
    fn common_knowledge_includes_the_point() {
        let mut m = Kripke::new(1);
        let u = m.add_world(Interpretation(0));
        let v = m.add_world(Interpretation(1));
        m.add_edge(Agent(0), u, v).unwrap();
        m.add_edge(Agent(0), v, v).unwrap();
        let f = Formula::atom(Fluent(0));
        let st = Pointed::new(m, u).unwrap();
        assert!(st.satisfies(&Formula::b(Agent(0), f.clone())));
        assert!(st.satisfies(&Formula::e(Group::All, f.clone())));
        assert!(!st.satisfies(&Formula::c(Group::All, f)));
    }

    #[test]
    fn empty_group_common_knowledge_is_truth_at_point() {
        let st = coin_m0();
        let f = Formula::not(Formula::atom(Fluent(0)));
        assert!(st.satisfies(&Formula::c(Group::Set(AgentSet::new()), f.clone())));
        assert!(st.satisfies(&Formula::e(Group::Set(AgentSet::new()), Formula::not(f))));
    }

    #[test]
    fn frame_classes() {
        assert!(is_s5(&coin_m0().structure));
        let mut m = Kripke::new(2);
        let u = m.add_world(Interpretation(0));
        let v = m.add_world(Interpretation(0));
        m.add_edge(Agent(0), u, v).unwrap();
        let fc = frame_class(&m);
        assert!(!fc.contains(&FrameProperty::T));
        assert!(!fc.contains(&FrameProperty::D));
        assert!(fc.contains(&FrameProperty::Four));
    }

    #[test]
    fn holds_everywhere_examples() {
        let m = coin_m0().structure;
        assert!(holds_everywhere(&m, &Formula::top()));
        assert!(!holds_everywhere(&m, &Formula::atom(Fluent(0))));
    }
}
