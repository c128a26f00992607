//! Seeded random generators for small theories, states and formulas. Used by
//! the cross-check command and by property tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kripke::{Kripke, Pointed};
use crate::lang::{Category, DomainStatement, Located, Theory};
use crate::logic::{Action, Agent, Fluent, Formula, Group, Interpretation, Literal, Prop, Signature};

pub type GenRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub agents: usize,
    pub fluents: usize,
    pub max_worlds: usize,
    /// Draw equivalence relations only.
    pub s5: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { agents: 3, fluents: 3, max_worlds: 4, s5: false }
    }
}

pub fn signature(cfg: &GenConfig, actions: usize) -> Signature {
    Signature::new(
        (0..cfg.agents).map(|i| format!("a{i}")),
        (0..cfg.fluents).map(|i| format!("f{i}")),
        (0..actions).map(|i| format!("act{i}")),
    )
    .expect("generated names are distinct")
}

pub fn prop(rng: &mut GenRng, n_fluents: usize, depth: usize) -> Prop {
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        return match rng.gen_range(0..10) {
            0 => Prop::True,
            1 => Prop::False,
            _ => Prop::Atom(Fluent(rng.gen_range(0..n_fluents))),
        };
    }
    match rng.gen_range(0..3) {
        0 => Prop::not(prop(rng, n_fluents, depth - 1)),
        1 => Prop::And(vec![prop(rng, n_fluents, depth - 1), prop(rng, n_fluents, depth - 1)]),
        _ => Prop::Or(vec![prop(rng, n_fluents, depth - 1), prop(rng, n_fluents, depth - 1)]),
    }
}

fn group(rng: &mut GenRng, n_agents: usize) -> Group {
    if rng.gen_bool(0.4) {
        Group::All
    } else {
        let mut set: crate::logic::AgentSet = (0..n_agents).filter(|_| rng.gen_bool(0.5)).map(Agent).collect();
        if set.is_empty() {
            set.insert(Agent(rng.gen_range(0..n_agents)));
        }
        Group::Set(set)
    }
}

/// A belief formula of modal depth at most `modal`.
pub fn formula(rng: &mut GenRng, n_agents: usize, n_fluents: usize, modal: usize) -> Formula {
    if modal == 0 || rng.gen_bool(0.25) {
        return Formula::Prop(prop(rng, n_fluents, 2));
    }
    let sub = |rng: &mut GenRng| formula(rng, n_agents, n_fluents, modal - 1);
    match rng.gen_range(0..8) {
        0 => Formula::Not(Box::new(sub(rng))),
        1 => Formula::And(vec![sub(rng), formula(rng, n_agents, n_fluents, modal)]),
        2 => Formula::Or(vec![sub(rng), formula(rng, n_agents, n_fluents, modal)]),
        3 => Formula::E(group(rng, n_agents), Box::new(sub(rng))),
        4 => Formula::C(group(rng, n_agents), Box::new(sub(rng))),
        _ => Formula::B(Agent(rng.gen_range(0..n_agents)), Box::new(sub(rng))),
    }
}

/// A state with 1..=max_worlds worlds. Without `s5`, every relation is an
/// arbitrary edge set.
pub fn state(rng: &mut GenRng, cfg: &GenConfig) -> Pointed {
    let n = rng.gen_range(1..=cfg.max_worlds);
    let mut m = Kripke::new(cfg.agents);
    let all: Vec<Interpretation> = Interpretation::all(cfg.fluents).collect();
    let worlds: Vec<_> = (0..n).map(|_| m.add_world(*all.choose(rng).unwrap())).collect();
    for i in 0..cfg.agents {
        let i = Agent(i);
        if cfg.s5 {
            let blocks: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            for a in 0..n {
                for b in 0..n {
                    if blocks[a] == blocks[b] {
                        m.add_edge(i, worlds[a], worlds[b]).unwrap();
                    }
                }
            }
        } else {
            for &u in &worlds {
                for &v in &worlds {
                    if rng.gen_bool(0.4) {
                        m.add_edge(i, u, v).unwrap();
                    }
                }
            }
        }
    }
    let point = *worlds.choose(rng).unwrap();
    Pointed::new(m, point).unwrap()
}

fn stmt(node: DomainStatement) -> Located<DomainStatement> {
    Located::synthetic(node)
}

/// A theory with a single action `act0` of the given category and random
/// executability, effects and observability. Sensing actions sense
/// `sensed` distinct fluents (clamped to the fluent count).
pub fn theory(rng: &mut GenRng, cfg: &GenConfig, category: Category, sensed: usize) -> Theory {
    let sig = signature(cfg, 1);
    let a = Action(0);
    let mut domain = Vec::new();
    if rng.gen_bool(0.6) {
        domain.push(stmt(DomainStatement::Executable { action: a, condition: formula(rng, cfg.agents, cfg.fluents, 1) }));
    }
    match category {
        Category::WorldAltering => {
            // At most one effect literal per fluent, so effects never clash.
            for f in 0..cfg.fluents {
                if rng.gen_bool(0.6) {
                    let effect = Literal { fluent: Fluent(f), positive: rng.gen_bool(0.5) };
                    let condition =
                        if rng.gen_bool(0.5) { Formula::top() } else { formula(rng, cfg.agents, cfg.fluents, 1) };
                    domain.push(stmt(DomainStatement::Causes { action: a, effect, condition }));
                }
            }
            if !domain.iter().any(|s| matches!(s.node, DomainStatement::Causes { .. })) {
                let effect = Literal { fluent: Fluent(0), positive: true };
                domain.push(stmt(DomainStatement::Causes { action: a, effect, condition: Formula::top() }));
            }
        }
        Category::Sensing => {
            let mut fs: Vec<usize> = (0..cfg.fluents).collect();
            fs.shuffle(rng);
            for f in fs.into_iter().take(sensed.clamp(1, cfg.fluents)) {
                domain.push(stmt(DomainStatement::Determines { action: a, fluent: Fluent(f) }));
            }
        }
        Category::Announcement => {
            domain.push(stmt(DomainStatement::Announces { action: a, payload: prop(rng, cfg.fluents, 2) }));
        }
    }
    let partial_ok = category != Category::WorldAltering;
    for i in 0..cfg.agents {
        let agent = Agent(i);
        match rng.gen_range(0..4) {
            0 => domain.push(stmt(DomainStatement::Observes { action: a, agent, condition: Prop::True })),
            1 => {
                let c = prop(rng, cfg.fluents, 1);
                if partial_ok && rng.gen_bool(0.5) {
                    domain.push(stmt(DomainStatement::AwareOf { action: a, agent, condition: Prop::not(c.clone()) }));
                }
                domain.push(stmt(DomainStatement::Observes { action: a, agent, condition: c }));
            }
            2 if partial_ok => {
                domain.push(stmt(DomainStatement::AwareOf { action: a, agent, condition: prop(rng, cfg.fluents, 1) }))
            }
            _ => {}
        }
    }
    Theory::new(sig, domain, Vec::new())
}

pub fn category(rng: &mut GenRng) -> Category {
    *[Category::WorldAltering, Category::Sensing, Category::Announcement].choose(rng).unwrap()
}
