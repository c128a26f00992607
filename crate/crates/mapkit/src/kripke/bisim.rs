//! Bisimulation by signature-based partition refinement.

use std::collections::{BTreeMap, HashMap};

use super::{Dense, Kripke, Pointed, World};
use crate::logic::Interpretation;

/// Block index per world of `views` taken together (disjoint union).
fn refine(views: &[&Dense]) -> Vec<Vec<usize>> {
    let n_agents = views.first().map_or(0, |d| d.succ.len());
    // Flatten into one graph.
    let mut offset = Vec::new();
    let mut total = 0;
    for d in views {
        offset.push(total);
        total += d.ids.len();
    }
    let mut vals = Vec::with_capacity(total);
    let mut succ: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); total]; n_agents];
    for (k, d) in views.iter().enumerate() {
        vals.extend(d.vals.iter().copied());
        for (i, adj) in d.succ.iter().enumerate() {
            for (u, vs) in adj.iter().enumerate() {
                succ[i][offset[k] + u] = vs.iter().map(|v| offset[k] + v).collect();
            }
        }
    }

    let mut ranks: BTreeMap<Interpretation, usize> = BTreeMap::new();
    for v in &vals {
        let next = ranks.len();
        ranks.entry(*v).or_insert(next);
    }
    let mut block: Vec<usize> = vals.iter().map(|v| ranks[v]).collect();
    let mut count = ranks.len();
    loop {
        let mut ids: HashMap<(usize, Vec<Vec<usize>>), usize> = HashMap::new();
        let mut next = Vec::with_capacity(total);
        for w in 0..total {
            let sig: Vec<Vec<usize>> = (0..n_agents)
                .map(|i| {
                    let mut s: Vec<usize> = succ[i][w].iter().map(|&v| block[v]).collect();
                    s.sort_unstable();
                    s.dedup();
                    s
                })
                .collect();
            let fresh = ids.len();
            next.push(*ids.entry((block[w], sig)).or_insert(fresh));
        }
        let new_count = ids.len();
        block = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    views
        .iter()
        .enumerate()
        .map(|(k, d)| block[offset[k]..offset[k] + d.ids.len()].to_vec())
        .collect()
}

/// True iff the two points are related by the largest bisimulation.
pub fn bisimilar(a: &Pointed, b: &Pointed) -> bool {
    if a.structure.agent_count() != b.structure.agent_count() {
        return false;
    }
    let (da, db) = (a.structure.dense(), b.structure.dense());
    let blocks = refine(&[&da, &db]);
    blocks[0][da.index[&a.point]] == blocks[1][db.index[&b.point]]
}

/// Bisimulation class of every world of `m`.
pub fn bisimulation_classes(m: &Kripke) -> BTreeMap<World, usize> {
    let d = m.dense();
    let blocks = refine(&[&d]);
    d.ids.iter().copied().zip(blocks[0].iter().copied()).collect()
}

/// The bisimulation-minimal quotient of the part reachable from the point.
pub fn bisimulation_quotient(state: &Pointed) -> Pointed {
    let state = super::reachable_restriction(state);
    let m = &state.structure;
    let classes = bisimulation_classes(m);
    let mut rep: BTreeMap<usize, World> = BTreeMap::new();
    let mut out = Kripke::new(m.agent_count());
    for w in m.worlds() {
        let c = classes[&w];
        if !rep.contains_key(&c) {
            rep.insert(c, out.add_world(m.val(w)));
        }
    }
    for (u, i, v) in m.edges() {
        out.add_edge(i, rep[&classes[&u]], rep[&classes[&v]]).expect("known worlds");
    }
    Pointed { point: rep[&classes[&state.point]], structure: out }
}
