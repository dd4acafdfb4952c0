//! Property tests over random terms and random graphs.

mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use pafas::parser::{parse_term, render_term};
use pafas::performance::{
    asymptotic_performance, check_response, find_catastrophic, find_catastrophic_closure,
    reduce_rts, reduce_rts_with, response_performance, Method, Pruning,
};
use pafas::semantics::{build_rts, compose_parallel, is_isomorphic, IsoMode};
use pafas::syntax::canonical_key;
use pafas::{Program, Term};

use common::*;

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn small_rts(t: &Term) -> Option<pafas::Rts> {
    build_rts(&Program::from_term(t.clone()).expect("generator is well formed"), 3_000).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn render_then_parse_preserves_the_key(seed in any::<u64>()) {
        let t = random_term(&mut rng(seed), 5);
        let text = render_term(&t);
        let back = parse_term(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(canonical_key(&back), canonical_key(&t), "{}", text);
    }

    #[test]
    fn each_node_has_one_idempotent_time_step(seed in any::<u64>()) {
        let t = random_term(&mut rng(seed), 4);
        let Some(rts) = small_rts(&t) else { return Ok(()) };
        for u in rts.nodes() {
            if let Some(e) = rts.time_edge(u) {
                if let Some(again) = rts.time_edge(e.target) {
                    prop_assert_eq!(again.target, e.target);
                }
            }
        }
    }

    #[test]
    fn product_matches_direct_build(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_term(&mut r, 3);
        let q = random_term(&mut r, 3);
        let sync = random_sync_set(&mut r);
        let (Some(rp), Some(rq)) = (small_rts(&p), small_rts(&q)) else { return Ok(()) };
        let direct = Program::from_term(Term::parallel(p, q, sync.clone())).unwrap();
        let Ok(direct) = build_rts(&direct, 50_000) else { return Ok(()) };
        let composed = compose_parallel(&rp, &rq, &sync, 50_000).unwrap();
        prop_assert!(is_isomorphic(&direct, &composed, IsoMode::Labelled));
    }

    #[test]
    fn pruning_keeps_full_steps(seed in any::<u64>()) {
        let t = random_term(&mut rng(seed), 4);
        let Some(rts) = small_rts(&t) else { return Ok(()) };
        for pruning in [Pruning::BothInOut, Pruning::Unusable] {
            let rrts = reduce_rts_with(&rts, pruning);
            for v in rrts.nodes() {
                let orig = rts.nodes().find(|&u| rts.label(u) == rrts.label(v)).unwrap();
                if rts.time_edge(orig).is_some_and(|e| e.is_full()) {
                    let kept = rrts.time_edge(v);
                    prop_assert!(kept.is_some_and(|e| e.is_full()));
                    prop_assert_eq!(rrts.label(kept.unwrap().target), rts.label(rts.time_edge(orig).unwrap().target));
                }
            }
        }
    }

    #[test]
    fn scc_detection_matches_cycle_enumeration(seed in any::<u64>(), size in 1usize..=12) {
        let rts = random_graph(&mut rng(seed), size);
        let rrts = reduce_rts(&rts);
        let expected = naive_catastrophic(&rrts);
        let found = find_catastrophic(&rrts);
        prop_assert_eq!(found.is_some(), expected);
        prop_assert_eq!(find_catastrophic_closure(&rrts).is_some(), expected);
        if let Some(w) = found {
            prop_assert!(rrts.replays(&w.cycle) && w.cycle.is_cycle());
            prop_assert!(w.cycle.count_time() >= 1);
            prop_assert_eq!(w.cycle.count_action("in") + w.cycle.count_action("out"), 0);
        }
    }

    #[test]
    fn witnesses_replay(seed in any::<u64>(), size in 3usize..=10) {
        let rts = random_response_graph(&mut rng(seed), size);
        prop_assert!(check_response(&rts).is_ok());
        let rrts = reduce_rts(&rts);
        prop_assume!(find_catastrophic(&rrts).is_none());
        for n in 1..=4 {
            let res = response_performance(&rrts, n).unwrap();
            check_rp_witness(&rrts, n, &res).map_err(TestCaseError::fail)?;
        }
        if let Ok(a) = asymptotic_performance(&rrts, Method::Improved) {
            let c = &a.cycle;
            prop_assert!(rrts.replays(c) && c.is_cycle());
            prop_assert!(c.steps.iter().filter(|s| s.label.is_time()).all(|s| s.label.is_full_time()));
            prop_assert_eq!(
                pafas::Rational::new(c.count_time() as i64, c.count_action("in") as i64),
                a.performance
            );
            prop_assert_eq!(Some(a.performance), naive_bad_cycle(&rrts));
        }
    }

    #[test]
    fn methods_agree_on_random_graphs(seed in any::<u64>(), size in 3usize..=10) {
        let rts = random_response_graph(&mut rng(seed), size);
        let rrts = reduce_rts(&rts);
        prop_assume!(find_catastrophic(&rrts).is_none());
        let b = asymptotic_performance(&rrts, Method::Baseline).map(|a| a.performance);
        let i = asymptotic_performance(&rrts, Method::Improved).map(|a| a.performance);
        prop_assert_eq!(b.is_ok(), i.is_ok());
        if let (Ok(b), Ok(i)) = (b, i) {
            prop_assert_eq!(b, i);
        }
    }

    #[test]
    fn refusal_rules_agree_with_the_engine(seed in any::<u64>()) {
        let t = random_term(&mut rng(seed), 4);
        let program = Program::from_term(t.clone()).unwrap();
        let engine = pafas::semantics::Engine::new(&program);
        let oracle = RefusalOracle::new(&program, &t);
        match (engine.time_step(&t), oracle.refusals(&t)) {
            (None, None) => {}
            (Some(ts), Some(r)) => {
                let u = oracle.mask_of(&ts.forbidden);
                for (x, ok) in r.family.iter().enumerate() {
                    prop_assert_eq!(*ok, x & u == 0);
                }
                prop_assert_eq!(key(&ts.target), key(&r.target));
            }
            (a, b) => prop_assert!(false, "existence differs: {:?} vs {}", a.map(|s| s.forbidden), b.is_some()),
        }
    }
}

#[test]
fn lazy_prefix_is_patient() {
    let mut r = rng(7);
    for _ in 0..200 {
        let t = random_term(&mut r, 3);
        let p = Program::from_term(Term::prefix(pafas::Action::visible("a"), t)).unwrap();
        let step = pafas::semantics::Engine::new(&p).time_step(p.main()).unwrap();
        assert!(step.is_full());
    }
}
