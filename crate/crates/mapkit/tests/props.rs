//! Property tests. Each case draws a seed and builds its inputs with the
//! seeded generators in `mapkit::testgen`, so failures shrink to a seed that
//! reproduces them.

use std::collections::BTreeSet;
use std::path::PathBuf;

use proptest::prelude::*;

use mapkit::init::{generate_initial, reduce_state};
use mapkit::kripke::{
    bisimilar, edge_add, edge_subtract, frame_class, is_s5, quotient, reachable_restriction, replica, restrict,
    world_subtract, FrameProperty, Kripke, Pointed, World,
};
use mapkit::lang::{parse_theory, Category, Theory};
use mapkit::logic::{complete_clauses, prop_entails, Action, Agent, Interpretation, Prop, Signature};
use mapkit::testgen::{self, GenConfig};
use mapkit::transition::{is_executable, run_plan, step, BState, StepError, StepOutcome};
use mapkit::update::{omega, product_update, UpdateError};

fn cfg_from(seed: u64) -> GenConfig {
    let k = seed as usize;
    GenConfig { agents: 1 + k % 3, fluents: 1 + (k / 3) % 3, max_worlds: 4, s5: (k / 9) % 2 == 0 }
}

/// Every world duplicated; each copy sees both copies of every successor.
/// Bisimilar to the input by construction.
fn blow_up(s: &Pointed) -> Pointed {
    let m = &s.structure;
    let mut out = Kripke::new(m.agent_count());
    let mut twin = std::collections::BTreeMap::new();
    for w in m.worlds() {
        let v = m.valuation(w).unwrap();
        twin.insert(w, (out.add_world(v), out.add_world(v)));
    }
    for i in 0..m.agent_count() {
        for &(u, v) in m.relation(Agent(i)) {
            let (u0, u1) = twin[&u];
            let (v0, v1) = twin[&v];
            for (x, y) in [(u0, v0), (u0, v1), (u1, v0), (u1, v1)] {
                out.add_edge(Agent(i), x, y).unwrap();
            }
        }
    }
    Pointed::new(out, twin[&s.point].1).unwrap()
}

/// A second truth-table reading of entailment: no interpretation satisfies
/// all of `gamma` and falsifies `phi`.
fn entails_by_table(gamma: &[Prop], phi: &Prop, n: usize) -> bool {
    (0..1u64 << n).map(Interpretation).all(|v| !gamma.iter().all(|g| g.eval(v)) || phi.eval(v))
}

fn corpus_theories() -> Vec<Theory> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "mad") {
            out.push(parse_theory(&std::fs::read_to_string(&path).unwrap()).unwrap());
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn de_morgan_and_double_negation(seed in any::<u64>()) {
        let mut r = testgen::rng(seed);
        let (a, b) = (testgen::prop(&mut r, 3, 3), testgen::prop(&mut r, 3, 3));
        for v in Interpretation::all(3) {
            let lhs = Prop::not(Prop::And(vec![a.clone(), b.clone()]));
            let rhs = Prop::Or(vec![Prop::not(a.clone()), Prop::not(b.clone())]);
            prop_assert_eq!(lhs.eval(v), rhs.eval(v));
            prop_assert_eq!(Prop::not(Prop::not(a.clone())).eval(v), a.eval(v));
            prop_assert_eq!(a.simplify().eval(v), a.eval(v));
        }
    }

    #[test]
    fn prop_entails_matches_truth_table(seed in any::<u64>(), n in 1usize..=4, k in 0usize..3) {
        let mut r = testgen::rng(seed);
        let gamma: Vec<Prop> = (0..k).map(|_| testgen::prop(&mut r, n, 2)).collect();
        let phi = testgen::prop(&mut r, n, 3);
        prop_assert_eq!(prop_entails(&gamma, &phi, n).unwrap(), entails_by_table(&gamma, &phi, n));
    }

    #[test]
    fn satisfaction_is_invariant_under_bisimulation(seed in any::<u64>()) {
        let cfg = cfg_from(seed);
        let mut r = testgen::rng(seed);
        let s = testgen::state(&mut r, &cfg);
        let big = blow_up(&s);
        let small = quotient(&s);
        prop_assert!(bisimilar(&s, &big));
        for _ in 0..6 {
            let phi = testgen::formula(&mut r, cfg.agents, cfg.fluents, 3);
            prop_assert_eq!(s.satisfies(&phi), big.satisfies(&phi));
            if bisimilar(&s, &small) {
                prop_assert_eq!(s.satisfies(&phi), small.satisfies(&phi));
            }
        }
    }

    #[test]
    fn bisimilarity_is_an_equivalence(seed in any::<u64>()) {
        let cfg = GenConfig { agents: 1, fluents: 1, max_worlds: 3, s5: false };
        let mut r = testgen::rng(seed);
        let states: Vec<Pointed> = (0..3).map(|_| testgen::state(&mut r, &cfg)).collect();
        for a in &states {
            prop_assert!(bisimilar(a, a));
            for b in &states {
                prop_assert_eq!(bisimilar(a, b), bisimilar(b, a));
                for c in &states {
                    if bisimilar(a, b) && bisimilar(b, c) {
                        prop_assert!(bisimilar(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn structural_identities(seed in any::<u64>()) {
        let cfg = cfg_from(seed);
        let mut r = testgen::rng(seed);
        let s = testgen::state(&mut r, &cfg);
        let m = &s.structure;
        prop_assert_eq!(&world_subtract(m, &BTreeSet::new()).unwrap(), m);
        let all = (0..cfg.agents).map(Agent).collect();
        prop_assert_eq!(&restrict(&s, &all), &s);
        let w = m.worlds().next().unwrap();
        let fresh: BTreeSet<_> = (0..cfg.agents)
            .map(|i| (w, Agent(i), w))
            .filter(|&(u, i, v)| !m.has_edge(i, u, v))
            .collect();
        let added = edge_add(m, &fresh).unwrap();
        prop_assert_eq!(&edge_subtract(&added, &fresh), m);
    }

    #[test]
    fn replica_corresponds_under_the_renaming(seed in any::<u64>()) {
        let cfg = cfg_from(seed);
        let mut r = testgen::rng(seed);
        let s = testgen::state(&mut r, &cfg);
        let c = s.structure.fresh_renaming();
        let rep = replica(&s, &c).unwrap();
        prop_assert_eq!(rep.point, c[&s.point]);
        prop_assert_eq!(rep.structure.len(), s.structure.len());
        for u in s.structure.worlds() {
            prop_assert!(!s.structure.contains(c[&u]));
            prop_assert_eq!(rep.structure.valuation(c[&u]), s.structure.valuation(u));
        }
        for i in 0..cfg.agents {
            let i = Agent(i);
            let mapped: BTreeSet<(World, World)> =
                s.structure.relation(i).iter().map(|(u, v)| (c[u], c[v])).collect();
            prop_assert_eq!(rep.structure.relation(i), &mapped);
        }
    }

    #[test]
    fn reachable_restriction_preserves_formulas(seed in any::<u64>()) {
        let cfg = cfg_from(seed);
        let mut r = testgen::rng(seed);
        let s = testgen::state(&mut r, &cfg);
        let t = reachable_restriction(&s);
        for _ in 0..6 {
            let phi = testgen::formula(&mut r, cfg.agents, cfg.fluents, 3);
            prop_assert_eq!(s.satisfies(&phi), t.satisfies(&phi));
        }
    }

    #[test]
    fn printed_random_theories_reparse_to_a_fixpoint(seed in any::<u64>()) {
        let cfg = cfg_from(seed);
        let mut r = testgen::rng(seed);
        let category = testgen::category(&mut r);
        let t0 = testgen::theory(&mut r, &cfg, category, 1 + seed as usize % cfg.fluents);
        let t1 = parse_theory(&t0.to_string()).unwrap();
        let t2 = parse_theory(&t1.to_string()).unwrap();
        prop_assert_eq!(t1.signature(), t2.signature());
        let nodes = |t: &Theory| t.domain().iter().map(|s| s.node.clone()).collect::<Vec<_>>();
        prop_assert_eq!(nodes(&t1), nodes(&t2));
    }

    #[test]
    fn steps_are_deterministic_and_singleton(seed in any::<u64>()) {
        let cfg = cfg_from(seed);
        let mut r = testgen::rng(seed);
        let category = testgen::category(&mut r);
        let t = testgen::theory(&mut r, &cfg, category, 1);
        let s = testgen::state(&mut r, &cfg);
        let first = step(&t, Action(0), &s);
        let again = step(&t, Action(0), &s);
        prop_assert_eq!(format!("{first:?}"), format!("{again:?}"));
        if let Ok(out) = first {
            let blocked = matches!(out, StepOutcome::Blocked(_));
            prop_assert_eq!(blocked, !is_executable(&t, Action(0), &s) || out.successor().is_none());
        }
    }

    #[test]
    fn executable_plans_never_fail(seed in any::<u64>(), len in 1usize..4) {
        let cfg = cfg_from(seed);
        let mut r = testgen::rng(seed);
        let t = testgen::theory(&mut r, &cfg, Category::WorldAltering, 1);
        let s = testgen::state(&mut r, &cfg);
        let plan = vec![Action(0); len];
        // Walk the plan by hand; if every step is executable the batch run
        // must not fail.
        let mut cur = s.clone();
        let mut all_executable = true;
        for a in &plan {
            match step(&t, *a, &cur).unwrap() {
                StepOutcome::Done(n) => cur = n,
                StepOutcome::Blocked(_) => { all_executable = false; break; }
            }
        }
        let b = run_plan(&t, &plan, &BState::single(s)).unwrap();
        prop_assert_eq!(b.is_failed(), !all_executable);
    }

    #[test]
    fn product_update_counts_and_valuations(seed in any::<u64>()) {
        let cfg = cfg_from(seed);
        let mut r = testgen::rng(seed);
        let category = testgen::category(&mut r);
        let t = testgen::theory(&mut r, &cfg, category, 1);
        let s = testgen::state(&mut r, &cfg);
        let template = match omega(&t, Action(0), &s) {
            Ok(Some(tm)) => tm,
            Ok(None) | Err(UpdateError::Step(StepError::ObservabilityConflict { .. })) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let m = &s.structure;
        let (product, ids) = product_update(m, &template.model);
        let expected: usize = template
            .model
            .pre
            .iter()
            .map(|pre| m.worlds().filter(|w| Pointed { structure: m.clone(), point: *w }.satisfies(pre)).count())
            .sum();
        prop_assert_eq!(product.len(), expected);
        prop_assert!(product.len() <= m.len() * template.model.len());
        if category != Category::WorldAltering {
            for ((w, _), x) in &ids {
                prop_assert_eq!(product.valuation(*x), m.valuation(*w));
            }
        }
    }
}

#[test]
fn complete_clauses_have_distinct_falsifiers() {
    for n in 1..=4 {
        let names: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
        let sig = Signature::new(vec!["A".to_string()], names, vec!["a".to_string()]).unwrap();
        let clauses = complete_clauses(&sig).unwrap();
        assert_eq!(clauses.len(), 1 << n);
        let falsifiers: BTreeSet<u64> = clauses
            .iter()
            .map(|c| {
                let f: Vec<Interpretation> = Interpretation::all(n).filter(|v| !c.eval(*v)).collect();
                assert_eq!(f.len(), 1);
                f[0].0
            })
            .collect();
        assert_eq!(falsifiers.len(), 1 << n);
    }
}

#[test]
fn world_altering_action_without_effects_keeps_valuations() {
    let t = parse_theory("agents A, B\nfluents f, g\nactions a\na causes f if false\nA observes a\n").unwrap();
    let cfg = GenConfig { agents: 2, fluents: 2, max_worlds: 4, s5: true };
    let mut r = testgen::rng(3);
    for _ in 0..50 {
        let s = testgen::state(&mut r, &cfg);
        let template = omega(&t, Action(0), &s).unwrap().unwrap();
        let (product, ids) = product_update(&s.structure, &template.model);
        for ((w, _), x) in &ids {
            assert_eq!(product.valuation(*x), s.structure.valuation(*w));
        }
    }
}

#[test]
fn corpus_theories_reparse_to_a_fixpoint() {
    for t in corpus_theories() {
        let t1 = parse_theory(&t.to_string()).unwrap();
        let t2 = parse_theory(&t1.to_string()).unwrap();
        let nodes = |t: &Theory| {
            (
                t.domain().iter().map(|s| s.node.clone()).collect::<Vec<_>>(),
                t.initial().iter().map(|s| s.node.clone()).collect::<Vec<_>>(),
            )
        };
        assert_eq!(nodes(&t), nodes(&t1));
        assert_eq!(nodes(&t1), nodes(&t2));
    }
}

#[test]
fn generated_initial_states_are_s5_verified_and_reducible() {
    for t in corpus_theories() {
        let nf = t.signature().fluent_count();
        let init = generate_initial(&t, true).unwrap();
        assert!(!init.designated.is_empty());
        assert!(frame_class(&init.structure).contains(&FrameProperty::S5));
        for s in init.states() {
            for st in &init.statements {
                assert!(s.satisfies(&st.to_formula()));
            }
            let q = reduce_state(&s);
            assert!(is_s5(&q.structure) && bisimilar(&s, &q) && q.structure.len() <= 1 << nf);
        }
    }
}
