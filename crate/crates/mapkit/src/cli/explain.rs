//! Why a formula fails at a world: a chain of witnesses down the formula.

use crate::kripke::{reachable, worlds_satisfying, Kripke, World};
use crate::logic::{Formula, Signature};

fn holds(m: &Kripke, w: World, phi: &Formula) -> bool {
    worlds_satisfying(m, phi).contains(&w)
}

/// One line per step. Empty if `phi` holds at `w`.
pub fn explain(m: &Kripke, w: World, phi: &Formula, sig: &Signature) -> Vec<String> {
    let mut out = Vec::new();
    if !holds(m, w, phi) {
        walk(m, w, phi, sig, 0, &mut out);
    }
    out
}

fn walk(m: &Kripke, w: World, phi: &Formula, sig: &Signature, depth: usize, out: &mut Vec<String>) {
    let pad = "  ".repeat(depth);
    let shown = phi.display(sig).to_string();
    match phi {
        Formula::Prop(_) => {
            let v = m.valuation(w).expect("world of m");
            out.push(format!("{pad}{shown} is false at {w} ({})", v.display(sig)));
        }
        Formula::Not(inner) => out.push(format!("{pad}{shown} fails at {w}: {} holds there", inner.display(sig))),
        Formula::And(parts) => {
            let bad = parts.iter().find(|p| !holds(m, w, p)).expect("a conjunct fails");
            out.push(format!("{pad}{shown} fails at {w}: conjunct {} fails", bad.display(sig)));
            walk(m, w, bad, sig, depth + 1, out);
        }
        Formula::Or(_) => out.push(format!("{pad}{shown} fails at {w}: every disjunct fails")),
        Formula::B(i, inner) => {
            let v = m.successors(*i, w).find(|v| !holds(m, *v, inner)).expect("a successor falsifies");
            out.push(format!("{pad}{shown} fails at {w}: {} considers {v} possible", sig.agent_name(*i)));
            walk(m, v, inner, sig, depth + 1, out);
        }
        Formula::E(g, inner) => {
            let (i, v) = g
                .resolve(sig)
                .into_iter()
                .find_map(|i| m.successors(i, w).find(|v| !holds(m, *v, inner)).map(|v| (i, v)))
                .expect("some agent has a falsifying successor");
            out.push(format!("{pad}{shown} fails at {w}: {} considers {v} possible", sig.agent_name(i)));
            walk(m, v, inner, sig, depth + 1, out);
        }
        Formula::C(g, inner) => {
            let v = reachable(m, w, &g.resolve(sig))
                .into_iter()
                .find(|v| !holds(m, *v, inner))
                .expect("a reachable world falsifies");
            out.push(format!("{pad}{shown} fails at {w}: {v} is reachable"));
            walk(m, v, inner, sig, depth + 1, out);
        }
    }
}
