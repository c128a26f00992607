//! State documents: a line-oriented text format and an equivalent JSON form
//! for b-states. See `docs/state-format.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kripke::{Kripke, Pointed, World};
use crate::logic::{Interpretation, Signature};
use crate::transition::BState;

pub const TEXT_MAGIC: &str = "mapkit-state 1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldDoc {
    pub id: u32,
    /// Every fluent, as `name` or `!name`.
    pub literals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDoc {
    pub worlds: Vec<WorldDoc>,
    /// Agent name to `[from, to]` pairs.
    pub edges: BTreeMap<String, Vec<[u32; 2]>>,
    pub point: u32,
}

/// A b-state over a named signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDocument {
    pub agents: Vec<String>,
    pub fluents: Vec<String>,
    pub states: Vec<StateDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid JSON state document: {0}")]
    Json(String),
    #[error("{0}")]
    Mismatch(String),
}

fn syntax(line: usize, msg: impl Into<String>) -> DocError {
    DocError::Syntax { line, msg: msg.into() }
}

impl StateDocument {
    pub fn from_states(sig: &Signature, states: &[Pointed]) -> Self {
        let states = states
            .iter()
            .map(|s| {
                let m = &s.structure;
                let worlds = m
                    .worlds()
                    .map(|w| WorldDoc {
                        id: w.0,
                        literals: sig
                            .fluents()
                            .map(|f| {
                                let name = sig.fluent_name(f);
                                if m.valuation(w).unwrap().get(f) {
                                    name.to_string()
                                } else {
                                    format!("!{name}")
                                }
                            })
                            .collect(),
                    })
                    .collect();
                let edges = sig
                    .agents()
                    .map(|i| (sig.agent_name(i).to_string(), m.relation(i).iter().map(|(u, v)| [u.0, v.0]).collect()))
                    .collect();
                StateDoc { worlds, edges, point: s.point.0 }
            })
            .collect();
        StateDocument {
            agents: sig.agents().map(|a| sig.agent_name(a).to_string()).collect(),
            fluents: sig.fluents().map(|f| sig.fluent_name(f).to_string()).collect(),
            states,
        }
    }

    pub fn from_bstate(sig: &Signature, b: &BState) -> Self {
        StateDocument::from_states(sig, b.states())
    }

    /// Rebuilds the states against `sig`. Names must match the signature as
    /// sets; their order in the document is irrelevant.
    pub fn to_states(&self, sig: &Signature) -> Result<Vec<Pointed>, DocError> {
        let mut doc_agents = self.agents.clone();
        let mut sig_agents: Vec<String> = sig.agents().map(|a| sig.agent_name(a).to_string()).collect();
        doc_agents.sort();
        sig_agents.sort();
        if doc_agents != sig_agents {
            return Err(DocError::Mismatch(format!(
                "document agents {:?} differ from the theory's {:?}",
                self.agents, sig_agents
            )));
        }
        let mut doc_fluents = self.fluents.clone();
        let mut sig_fluents: Vec<String> = sig.fluents().map(|f| sig.fluent_name(f).to_string()).collect();
        doc_fluents.sort();
        sig_fluents.sort();
        if doc_fluents != sig_fluents {
            return Err(DocError::Mismatch(format!(
                "document fluents {:?} differ from the theory's {:?}",
                self.fluents, sig_fluents
            )));
        }
        let mut out = Vec::new();
        for (k, st) in self.states.iter().enumerate() {
            let mut m = Kripke::new(sig.agent_count());
            for w in &st.worlds {
                let mut v = Interpretation(0);
                let mut seen = 0;
                for lit in &w.literals {
                    let (name, positive) = match lit.strip_prefix('!') {
                        Some(n) => (n, false),
                        None => (lit.as_str(), true),
                    };
                    let f = sig
                        .fluent(name)
                        .ok_or_else(|| DocError::Mismatch(format!("state {k}: unknown fluent `{name}`")))?;
                    v.set(f, positive);
                    seen += 1;
                }
                if seen != sig.fluent_count() {
                    return Err(DocError::Mismatch(format!(
                        "state {k}: world {} lists {seen} literals, expected {}",
                        w.id,
                        sig.fluent_count()
                    )));
                }
                m.insert_world(World(w.id), v).map_err(|e| DocError::Mismatch(format!("state {k}: {e}")))?;
            }
            for (name, pairs) in &st.edges {
                let i = sig
                    .agent(name)
                    .ok_or_else(|| DocError::Mismatch(format!("state {k}: unknown agent `{name}`")))?;
                for [u, v] in pairs {
                    m.add_edge(i, World(*u), World(*v)).map_err(|e| DocError::Mismatch(format!("state {k}: {e}")))?;
                }
            }
            out.push(Pointed::new(m, World(st.point)).map_err(|e| DocError::Mismatch(format!("state {k}: {e}")))?);
        }
        Ok(out)
    }

    pub fn to_bstate(&self, sig: &Signature) -> Result<BState, DocError> {
        let states = self.to_states(sig)?;
        Ok(if states.is_empty() { BState::Failed } else { BState::States(states) })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{TEXT_MAGIC}\n");
        let _ = writeln!(out, "agents {}", self.agents.join(" "));
        let _ = writeln!(out, "fluents {}", self.fluents.join(" "));
        for st in &self.states {
            out.push_str("state\n");
            for w in &st.worlds {
                let _ = writeln!(out, "world {} {}", w.id, w.literals.join(" "));
            }
            for (agent, pairs) in &st.edges {
                for [u, v] in pairs {
                    let _ = writeln!(out, "edge {agent} {u} {v}");
                }
            }
            let _ = writeln!(out, "point {}", st.point);
            out.push_str("end\n");
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, DocError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, l)) if l == TEXT_MAGIC => {}
            Some((n, _)) => return Err(syntax(n, format!("expected `{TEXT_MAGIC}`"))),
            None => return Err(syntax(1, "empty document")),
        }
        let mut doc = StateDocument { agents: Vec::new(), fluents: Vec::new(), states: Vec::new() };
        let mut cur: Option<(StateDoc, bool)> = None;
        let number = |n: usize, s: &str| s.parse::<u32>().map_err(|_| syntax(n, format!("`{s}` is not a world id")));
        for (n, line) in lines {
            let mut words = line.split_whitespace();
            let head = words.next().unwrap();
            let rest: Vec<&str> = words.collect();
            match (head, cur.as_mut()) {
                ("agents", None) => doc.agents = rest.iter().map(|s| s.to_string()).collect(),
                ("fluents", None) => doc.fluents = rest.iter().map(|s| s.to_string()).collect(),
                ("state", None) => {
                    cur = Some((StateDoc { worlds: Vec::new(), edges: BTreeMap::new(), point: 0 }, false))
                }
                ("world", Some((st, _))) => {
                    let (id, lits) = rest.split_first().ok_or_else(|| syntax(n, "`world` needs an id"))?;
                    st.worlds.push(WorldDoc { id: number(n, id)?, literals: lits.iter().map(|s| s.to_string()).collect() });
                }
                ("edge", Some((st, _))) => {
                    let [agent, u, v] = rest[..] else { return Err(syntax(n, "`edge` takes an agent and two world ids")) };
                    st.edges.entry(agent.to_string()).or_default().push([number(n, u)?, number(n, v)?]);
                }
                ("point", Some((st, has_point))) => {
                    let [p] = rest[..] else { return Err(syntax(n, "`point` takes one world id")) };
                    st.point = number(n, p)?;
                    *has_point = true;
                }
                ("end", Some((_, has_point))) => {
                    if !*has_point {
                        return Err(syntax(n, "state has no `point` line"));
                    }
                    doc.states.push(cur.take().unwrap().0);
                }
                (other, _) => return Err(syntax(n, format!("unexpected `{other}`"))),
            }
        }
        if cur.is_some() {
            return Err(syntax(text.lines().count(), "unterminated `state` block"));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn parse_json(text: &str) -> Result<Self, DocError> {
        serde_json::from_str(text).map_err(|e| DocError::Json(e.to_string()))
    }

    /// Text or JSON, detected by the first non-blank character.
    pub fn parse(text: &str) -> Result<Self, DocError> {
        if text.trim_start().starts_with('{') {
            StateDocument::parse_json(text)
        } else {
            StateDocument::parse_text(text)
        }
    }
}

/// Worlds with their valuations, then each agent's edges.
pub(crate) fn summary(sig: &Signature, s: &Pointed) -> String {
    let m = &s.structure;
    let mut out = String::new();
    let _ = writeln!(out, "{} worlds, point {}", m.len(), s.point);
    for w in m.worlds() {
        let mark = if w == s.point { "*" } else { " " };
        let _ = writeln!(out, " {mark}{w}: {}", m.valuation(w).unwrap().display(sig));
    }
    for i in sig.agents() {
        let edges: Vec<String> = m.relation(i).iter().map(|(u, v)| format!("{u}->{v}")).collect();
        let _ = writeln!(out, "  {}: {}", sig.agent_name(i), edges.join(" "));
    }
    out
}
