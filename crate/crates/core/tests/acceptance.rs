//! Acceptance run: one `PASS`/`FAIL` line per criterion.
//!
//! Runs without the libtest harness so the lines reach the terminal. The exit
//! status is non-zero when a gating criterion fails. The graph-size
//! calibration against published counts is reported but does not gate.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use pafas::casestudy::{gen_user, BufferKind, BufferSpec};
use pafas::performance::{
    analysis_graph, asymptotic_performance, check_response, find_catastrophic,
    find_catastrophic_closure, g_prime, oracle_rp,
    reduce_rts, response_performance, Method, Rrts,
};
use pafas::semantics::{build_rts, compose_parallel, is_isomorphic, Engine, IsoMode, Rts, StepLabel};
use pafas::syntax::SyncSet;
use pafas::{Program, Rational, Term};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;

type Verdict = Result<String, String>;

struct Criterion {
    id: u32,
    gating: bool,
    title: &'static str,
    run: fn(&Cases) -> Verdict,
}

/// Buffer instances for N = 1..=4, built once.
struct Cases {
    systems: BTreeMap<(BufferKind, usize), (Rts, Rrts)>,
}

impl Cases {
    fn new() -> Self {
        let mut systems = BTreeMap::new();
        for kind in BufferKind::ALL {
            for n in 1..=4 {
                systems.insert((kind, n), buffer(kind, n));
            }
        }
        Cases { systems }
    }

    fn rrts(&self, kind: BufferKind, n: usize) -> &Rrts {
        &self.systems[&(kind, n)].1
    }
}

fn expected_rp(kind: BufferKind, big_n: usize, n: usize) -> u64 {
    let (big_n, n) = (big_n as u64, n as u64);
    match kind {
        BufferKind::Fifo => 2 * n,
        BufferKind::Pipe => 2 * n + big_n + 1,
        BufferKind::Buff => 4 * n,
    }
}

fn expected_slope(kind: BufferKind) -> Rational {
    match kind {
        BufferKind::Fifo | BufferKind::Pipe => Rational::from_integer(2),
        BufferKind::Buff => Rational::from_integer(4),
    }
}

fn within(start: Instant, budget: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    if t <= budget {
        Ok(t)
    } else {
        Err(format!("took {t:.2?}, budget {budget:?}"))
    }
}

// ---------------------------------------------------------------------------

fn closed_forms(c: &Cases) -> Verdict {
    let start = Instant::now();
    let mut checked = 0;
    for kind in BufferKind::ALL {
        for big_n in 1..=4 {
            let rrts = c.rrts(kind, big_n);
            for n in 1..=6 {
                let res = response_performance(rrts, n).map_err(|e| format!("{kind}:{big_n} n={n}: {e}"))?;
                let want = expected_rp(kind, big_n, n);
                if res.value != want {
                    return Err(format!("{kind}:{big_n} rp({n}) = {}, expected {want}", res.value));
                }
                check_rp_witness(rrts, n, &res).map_err(|e| format!("{kind}:{big_n}: {e}"))?;
                checked += 1;
            }
        }
    }
    let t = within(start, Duration::from_secs(10))?;
    Ok(format!("{checked} values exact, witnesses replay ({t:.2?})"))
}

fn asymptotic(c: &Cases) -> Verdict {
    for kind in BufferKind::ALL {
        for big_n in 1..=4 {
            for method in [Method::Baseline, Method::Improved] {
                let a = asymptotic_performance(c.rrts(kind, big_n), method)
                    .map_err(|e| format!("{kind}:{big_n} {method}: {e}"))?;
                if a.performance != expected_slope(kind) {
                    return Err(format!("{kind}:{big_n} {method}: {} expected {}", a.performance, expected_slope(kind)));
                }
                if a.throughput * a.performance != Rational::from_integer(1) {
                    return Err(format!("{kind}:{big_n}: throughput is not the inverse"));
                }
                if !c.rrts(kind, big_n).replays(&a.cycle) || !a.cycle.is_cycle() {
                    return Err(format!("{kind}:{big_n}: bad cycle does not replay"));
                }
            }
        }
    }
    Ok("fifo 2, pipe 2, buff 4 for N=1..4 by both methods".into())
}

fn crossover(c: &Cases) -> Verdict {
    for big_n in 1..=4 {
        for n in 1..=6 {
            let buff = response_performance(c.rrts(BufferKind::Buff, big_n), n).unwrap().value;
            let pipe = response_performance(c.rrts(BufferKind::Pipe, big_n), n).unwrap().value;
            let lhs = buff <= pipe;
            let rhs = n <= (big_n + 1) / 2;
            if lhs != rhs {
                return Err(format!("N={big_n} n={n}: buff {buff}, pipe {pipe}"));
            }
        }
    }
    Ok("rp_buff(n) <= rp_pipe(n) iff n <= floor((N+1)/2) on 24 pairs".into())
}

fn catastrophic(c: &Cases) -> Verdict {
    for ((kind, n), (_, rrts)) in &c.systems {
        if let Some(w) = find_catastrophic(rrts) {
            return Err(format!("{kind}:{n} reported {}", w.cycle.trace()));
        }
        if find_catastrophic_closure(rrts).is_some() {
            return Err(format!("{kind}:{n}: the closure method finds a catastrophic cycle"));
        }
    }
    let rts = build_rts(&program("(rec x. a.x) / {a}"), CAP).unwrap();
    let rrts = reduce_rts(&rts);
    let w = find_catastrophic(&rrts).ok_or("no witness for the hidden loop")?;
    let p = &w.cycle;
    let shape_ok = rrts.replays(p)
        && p.is_cycle()
        && p.count_time() == 1
        && p.steps.iter().filter(|s| s.label == StepLabel::Action { action: pafas::Action::Tau }).count() == 1
        && p.len() == 2;
    if !shape_ok {
        return Err(format!("unexpected hidden-loop witness `{}`", p.trace()));
    }
    Ok(format!("none for 12 buffers; hidden loop witness `{}`", p.trace()))
}

fn oracle(c: &Cases) -> Verdict {
    let start = Instant::now();
    let mut checked = 0;
    for kind in BufferKind::ALL {
        for big_n in 1..=2 {
            let program = BufferSpec::new(kind, big_n).unwrap().program();
            for n in 1..=3 {
                let fast = response_performance(c.rrts(kind, big_n), n).unwrap().value;
                let slow = oracle_rp(&program, n, 2_000_000).map_err(|e| format!("{kind}:{big_n} n={n}: {e}"))?;
                if fast != slow {
                    return Err(format!("{kind}:{big_n} n={n}: dp {fast}, oracle {slow}"));
                }
                checked += 1;
            }
        }
    }
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("{checked} instances agree ({t:.2?})"))
}

fn method_agreement(c: &Cases) -> Verdict {
    let compare = |name: &str, rrts: &Rrts| -> Result<Rational, String> {
        let ag = analysis_graph(rrts);
        if g_prime(&ag, Method::Baseline) != g_prime(&ag, Method::Improved) {
            return Err(format!("{name}: G' differs"));
        }
        let b = asymptotic_performance(rrts, Method::Baseline).map_err(|e| format!("{name}: {e}"))?;
        let i = asymptotic_performance(rrts, Method::Improved).map_err(|e| format!("{name}: {e}"))?;
        if b.throughput != i.throughput {
            return Err(format!("{name}: means {} vs {}", b.throughput, i.throughput));
        }
        Ok(b.performance)
    };
    for ((kind, n), (_, rrts)) in &c.systems {
        compare(&format!("{kind}:{n}"), rrts)?;
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let mut random = 0;
    let mut tries = 0;
    while random < 25 {
        tries += 1;
        if tries > 10_000 {
            return Err("could not sample 25 usable graphs".into());
        }
        let size = rng.gen_range(4..=10);
        let rts = random_response_graph(&mut rng, size);
        let rrts = reduce_rts(&rts);
        if check_response(&rts).is_err() || find_catastrophic(&rrts).is_some() {
            continue;
        }
        let Some(expected) = naive_bad_cycle(&rrts) else { continue };
        let a = compare(&format!("random graph {random}"), &rrts)?;
        if a != expected {
            return Err(format!("random graph {random}: {a}, cycle enumeration {expected}"));
        }
        random += 1;
    }
    Ok(format!(
        "12 buffers and {random} random graphs: identical G' and means, matching cycle enumeration"
    ))
}

/// Published `G` sizes for pipe with 5..=9 cells.
const PUBLISHED_PIPE: [(usize, usize, usize); 5] = [
    (5, 114, 292),
    (6, 272, 759),
    (7, 648, 1958),
    (8, 1544, 5034),
    (9, 3680, 12648),
];

fn g_prime_speedups() -> Vec<String> {
    (1..=3)
        .map(|big_n| {
            let (_, rrts) = buffer(BufferKind::Pipe, big_n);
            let ag = analysis_graph(&rrts);
            let time = |m: Method| {
                (0..3)
                    .map(|_| {
                        let s = Instant::now();
                        std::hint::black_box(g_prime(&ag, m));
                        s.elapsed()
                    })
                    .min()
                    .unwrap()
            };
            let ratio = time(Method::Baseline).as_secs_f64() / time(Method::Improved).as_secs_f64().max(1e-9);
            format!("N={big_n} x{ratio:.1}")
        })
        .collect()
}

fn calibration(_: &Cases) -> Verdict {
    let (cells, nodes, edges) = PUBLISHED_PIPE[0];
    let mut tried = Vec::new();
    let mut matched = None;
    for offset in [2, 1, 0] {
        let big_n = cells - offset;
        let (_, rrts) = buffer(BufferKind::Pipe, big_n);
        let ag = analysis_graph(&rrts);
        tried.push(format!("N={big_n}: {}/{}", ag.node_count(), ag.edge_count()));
        if (ag.node_count(), ag.edge_count()) == (nodes, edges) {
            matched = Some(offset);
        }
    }
    let speedups = format!("G' speedup (not asserted): {}", g_prime_speedups().join(", "));
    let Some(offset) = matched else {
        return Err(format!(
            "pipe with {cells} cells should give G = {nodes}/{edges}; got {}; {speedups}",
            tried.join(", ")
        ));
    };
    let mut notes = vec![format!("calibrated N = cells - {offset}")];
    for &(cells, nodes, edges) in &PUBLISHED_PIPE[1..3] {
        let (_, rrts) = buffer(BufferKind::Pipe, cells - offset);
        let ag = analysis_graph(&rrts);
        notes.push(format!(
            "cells {cells}: {}/{} vs {nodes}/{edges}",
            ag.node_count(),
            ag.edge_count()
        ));
    }
    notes.push(speedups);
    Ok(notes.join("; "))
}

fn sos_suite(_: &Cases) -> Verdict {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    let mut terms = 0;
    let mut states = 0;
    while terms < 150 {
        let t = random_term(&mut rng, 4);
        let program = Program::from_term(t.clone()).map_err(|e| format!("generator: {e}"))?;
        if build_rts(&program, 3_000).is_err() {
            continue;
        }
        terms += 1;
        let engine = Engine::new(&program);
        let oracle = RefusalOracle::new(&program, &t);
        let full = (1usize << oracle.alphabet.len()) - 1;
        let mut seen = std::collections::HashSet::new();
        let mut queue = vec![t.clone()];
        while let Some(s) = queue.pop() {
            if !seen.insert(key(&s)) || seen.len() > 60 {
                continue;
            }
            states += 1;
            let step = engine.time_step(&s);
            let rules = oracle.refusals(&s);
            match (&step, &rules) {
                (None, None) => {}
                (Some(ts), Some(r)) => {
                    let u = oracle.mask_of(&ts.forbidden);
                    for (x, ok) in r.family.iter().enumerate() {
                        if *ok != (x & u == 0) {
                            return Err(format!("refusal of mask {x:b} disagrees at `{}`", key(&s)));
                        }
                    }
                    if key(&ts.target) != key(&r.target) {
                        return Err(format!("time-step targets differ at `{}`", key(&s)));
                    }
                    // a discrete step is a refusal step refusing everything
                    if ts.is_full() != r.family[full] {
                        return Err(format!("full step mismatch at `{}`", key(&s)));
                    }
                    if let Some(again) = engine.time_step(&ts.target) {
                        if key(&again.target) != key(&ts.target) {
                            return Err(format!("urgentification not idempotent at `{}`", key(&s)));
                        }
                    }
                    queue.push(ts.target.clone());
                }
                _ => return Err(format!("time step existence differs at `{}`", key(&s))),
            }
            for (_, next) in engine.action_successors(&s) {
                queue.push(next);
            }
        }
    }

    let mut pairs = 0;
    while pairs < 50 {
        let p = random_term(&mut rng, 3);
        let q = random_term(&mut rng, 3);
        let sync = random_sync_set(&mut rng);
        let (Ok(rp), Ok(rq)) = (
            build_rts(&Program::from_term(p.clone()).unwrap(), 2_000),
            build_rts(&Program::from_term(q.clone()).unwrap(), 2_000),
        ) else {
            continue;
        };
        let direct = Program::from_term(Term::parallel(p, q, sync.clone())).unwrap();
        let Ok(direct) = build_rts(&direct, 50_000) else { continue };
        let composed = compose_parallel(&rp, &rq, &sync, 50_000).map_err(|e| e.to_string())?;
        if !is_isomorphic(&direct, &composed, IsoMode::Labelled) {
            return Err(format!("pair {pairs}: product differs from the direct build"));
        }
        pairs += 1;
    }
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{terms} random terms ({states} states) agree with the refusal rules; {pairs} products match ({t:.2?})"
    ))
}

/// Finds a path from the root labelled `in 1 time out time{..}` where the
/// second time step may forbid anything and the last may not forbid `in`.
fn fifo_refusal_witness(rts: &Rts) -> Option<String> {
    let root = rts.root();
    for (a, s1) in rts.actions(root) {
        if !a.is("in") {
            continue;
        }
        let Some(e1) = rts.time_edge(*s1).filter(|e| e.is_full()) else { continue };
        let Some(e2) = rts.time_edge(e1.target) else { continue };
        for (b, s4) in rts.actions(e2.target) {
            if !b.is("out") {
                continue;
            }
            if let Some(e3) = rts.time_edge(*s4).filter(|e| !e.forbidden.contains("in")) {
                return Some(format!("in 1 time{} out time{}", e2.forbidden, e3.forbidden));
            }
        }
    }
    None
}

/// Searches the composition for `in`, two full time steps and `out`, with
/// only τ in between.
fn two_full_steps_between_in_and_out(sys: &Rts) -> bool {
    use std::collections::HashSet;
    // phase: 0 after in, 1 after one full step, 2 after two
    let mut seen = HashSet::new();
    let mut stack: Vec<(usize, u8)> = Vec::new();
    for u in sys.nodes() {
        for (a, v) in sys.actions(u) {
            if a.is("in") {
                stack.push((*v, 0));
            }
        }
    }
    while let Some((u, phase)) = stack.pop() {
        if !seen.insert((u, phase)) {
            continue;
        }
        for (a, v) in sys.actions(u) {
            if a.is_tau() {
                stack.push((*v, phase));
            } else if a.is("out") && phase == 2 {
                return true;
            }
        }
        if phase < 2 {
            if let Some(e) = sys.time_edge(u).filter(|e| e.is_full()) {
                stack.push((e.target, phase + 1));
            }
        }
    }
    false
}

fn refusal_witness(c: &Cases) -> Verdict {
    let mut shown = String::new();
    for big_n in 1..=4 {
        let (rts, _) = &c.systems[&(BufferKind::Fifo, big_n)];
        shown = fifo_refusal_witness(rts).ok_or(format!("fifo:{big_n} lacks the refusal trace"))?;
    }
    let fifo = BufferSpec::new(BufferKind::Fifo, 2).unwrap().program();
    let process = build_rts(&fifo, CAP).unwrap();
    for n in 1..=3 {
        let user = build_rts(&Program::from_term(gen_user(n)).unwrap(), CAP).unwrap();
        let sys = compose_parallel(&process, &user, &SyncSet::AllButOmega, CAP).unwrap();
        if two_full_steps_between_in_and_out(&sys) {
            return Err(format!("fifo:2 with {n} users performs in 1 1 out"));
        }
    }
    Ok(format!("`{shown}` replays in fifo for N=1..4; no user n<=3 admits in 1 1 out"))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria = [
        Criterion { id: 1, gating: true, title: "closed-form response performance", run: closed_forms },
        Criterion { id: 2, gating: true, title: "asymptotic performance", run: asymptotic },
        Criterion { id: 3, gating: true, title: "pipe/buff crossover", run: crossover },
        Criterion { id: 4, gating: true, title: "catastrophic cycles", run: catastrophic },
        Criterion { id: 5, gating: true, title: "oracle equivalence", run: oracle },
        Criterion { id: 6, gating: true, title: "method agreement", run: method_agreement },
        Criterion { id: 7, gating: false, title: "published G sizes", run: calibration },
        Criterion { id: 8, gating: true, title: "refusal rule properties", run: sos_suite },
        Criterion { id: 9, gating: true, title: "refusal trace witness", run: refusal_witness },
    ];
    let cases = Cases::new();
    let mut failed = 0;
    for c in &criteria {
        let verdict = std::panic::catch_unwind(|| (c.run)(&cases))
            .unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("PASS criterion {}: {} - {detail}", c.id, c.title),
            Err(detail) => {
                let note = if c.gating { "" } else { " (reported, not gating)" };
                println!("FAIL criterion {}: {}{note} - {detail}", c.id, c.title);
                if c.gating {
                    failed += 1;
                }
            }
        }
    }
    if failed > 0 {
        println!("{failed} gating criteria failed");
        std::process::exit(1);
    }
}
