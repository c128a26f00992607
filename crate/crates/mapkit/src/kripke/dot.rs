//! Graphviz export.

use std::fmt::Write;

use super::Pointed;
use crate::logic::Signature;

/// Renders a pointed structure as a `digraph`. The point is drawn as a
/// double circle; parallel edges for several agents are merged into one label.
pub fn to_dot(state: &Pointed, sig: &Signature) -> String {
    let m = &state.structure;
    let mut out = String::from("digraph kripke {\n  rankdir=LR;\n");
    for w in m.worlds() {
        let shape = if w == state.point { "doublecircle" } else { "circle" };
        let label = m.val(w).display(sig).to_string();
        let _ = writeln!(
            out,
            "  \"{w}\" [shape={shape}, label=\"{w}\\n{}\"];",
            label.replace('"', "\\\"")
        );
    }
    let mut merged: std::collections::BTreeMap<(super::World, super::World), Vec<&str>> =
        Default::default();
    for (u, i, v) in m.edges() {
        merged.entry((u, v)).or_default().push(sig.agent_name(i));
    }
    for ((u, v), names) in merged {
        let _ = writeln!(out, "  \"{u}\" -> \"{v}\" [label=\"{}\"];", names.join(","));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::Kripke;
    use crate::logic::{Agent, Interpretation};

    #[test]
    fn marks_point_and_merges_labels() {
        let sig = Signature::new(["A", "B"], ["f"], ["a"]).unwrap();
        let mut m = Kripke::new(2);
        let u = m.add_world(Interpretation(1));
        m.add_edge(Agent(0), u, u).unwrap();
        m.add_edge(Agent(1), u, u).unwrap();
        let dot = to_dot(&Pointed::new(m, u).unwrap(), &sig);
        assert!(dot.contains("doublecircle"));
        assert!(dot.contains("label=\"A,B\""));
    }
}
