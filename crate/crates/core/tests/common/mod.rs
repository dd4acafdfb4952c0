//! Helpers shared by the integration tests: random terms and graphs, and
//! brute-force oracles written independently of the library's algorithms.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use pafas::casestudy::{BufferKind, BufferSpec};
use pafas::parser::parse;
use pafas::performance::{reduce_rts, Rrts};
use pafas::semantics::{build_rts, Rts, TimeEdge};
use pafas::syntax::{canonical_key, check_well_formed, RelabelFn, SyncSet};
use pafas::{Action, ActionSet, Name, Program, Rational, Term};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const CAP: usize = 200_000;

pub fn program(src: &str) -> Program {
    check_well_formed(parse(src).expect("parses")).expect("well formed")
}

pub fn buffer(kind: BufferKind, n: usize) -> (Rts, Rrts) {
    let rts = build_rts(&BufferSpec::new(kind, n).unwrap().program(), CAP).expect("fits the cap");
    let rrts = reduce_rts(&rts);
    (rts, rrts)
}

pub fn names(xs: &[&str]) -> ActionSet {
    xs.iter().map(|x| Name::from(*x)).collect()
}

// ---------------------------------------------------------------------------
// Random terms

const POOL: [&str; 4] = ["a", "b", "in", "out"];

fn random_action(rng: &mut StdRng) -> Action {
    if rng.gen_bool(0.15) {
        Action::Tau
    } else {
        Action::visible(POOL.choose(rng).unwrap())
    }
}

fn random_prefix(rng: &mut StdRng, body: Term) -> Term {
    let a = random_action(rng);
    if rng.gen_bool(0.3) {
        Term::urgent(a, body)
    } else {
        Term::prefix(a, body)
    }
}

/// A sequential term: no parallel or relabelling below a binder, so the
/// state space stays finite.
fn sequential(rng: &mut StdRng, depth: u32, vars: &mut Vec<String>, guarded: bool) -> Term {
    let leaf = depth == 0 || rng.gen_bool(0.2);
    if leaf {
        if guarded && !vars.is_empty() && rng.gen_bool(0.6) {
            return Term::var(vars.choose(rng).unwrap());
        }
        return Term::nil();
    }
    match rng.gen_range(0..4) {
        0 | 1 => {
            let body = sequential(rng, depth - 1, vars, true);
            random_prefix(rng, body)
        }
        2 => Term::choice(
            sequential(rng, depth - 1, vars, guarded),
            sequential(rng, depth - 1, vars, guarded),
        ),
        _ => {
            let x = format!("x{}", vars.len());
            vars.push(x.clone());
            let body = sequential(rng, depth - 1, vars, true);
            vars.pop();
            Term::rec(&x, random_prefix(rng, body))
        }
    }
}

fn random_sync(rng: &mut StdRng) -> SyncSet {
    if rng.gen_bool(0.25) {
        return SyncSet::AllButOmega;
    }
    SyncSet::Finite(
        POOL.iter()
            .filter(|_| rng.gen_bool(0.4))
            .map(|a| Name::from(*a))
            .collect(),
    )
}

fn random_relabel(rng: &mut StdRng) -> RelabelFn {
    let mut pairs: Vec<(Name, Action)> = Vec::new();
    for a in POOL {
        if rng.gen_bool(0.35) {
            pairs.push((Name::from(a), random_action(rng)));
        }
    }
    RelabelFn::new(pairs)
}

/// A closed, guarded term with every operator of the calculus.
pub fn random_term(rng: &mut StdRng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.35) {
        return sequential(rng, depth.min(4), &mut Vec::new(), false);
    }
    match rng.gen_range(0..3) {
        0 => Term::parallel(
            random_term(rng, depth - 1),
            random_term(rng, depth - 1),
            random_sync(rng),
        ),
        1 => Term::relabel(random_term(rng, depth - 1), random_relabel(rng)),
        _ => {
            let body = random_term(rng, depth - 1);
            random_prefix(rng, body)
        }
    }
}

pub fn random_sync_set(rng: &mut StdRng) -> SyncSet {
    random_sync(rng)
}

// ---------------------------------------------------------------------------
// Refusal rules applied literally, with refusal sets enumerated over a finite
// alphabet. One fresh name stands for every action the term never mentions.

pub const FRESH: &str = "zz_other";

fn collect_names(t: &Term, out: &mut BTreeSet<String>, program: &Program, seen: &mut BTreeSet<String>) {
    match t {
        Term::Nil | Term::Var(_) => {}
        Term::Prefix { action, body, .. } => {
            if let Some(n) = action.name() {
                out.insert(n.to_string());
            }
            collect_names(body, out, program, seen);
        }
        Term::Choice(l, r) => {
            collect_names(l, out, program, seen);
            collect_names(r, out, program, seen);
        }
        Term::Parallel { left, right, sync } => {
            if let SyncSet::Finite(s) = &**sync {
                out.extend(s.iter().map(|a| a.to_string()));
            } else {
                out.insert("omega".into());
            }
            collect_names(left, out, program, seen);
            collect_names(right, out, program, seen);
        }
        Term::Relabel { body, relabel } => {
            for (a, b) in relabel.entries() {
                out.insert(a.to_string());
                if let Some(n) = b.name() {
                    out.insert(n.to_string());
                }
            }
            collect_names(body, out, program, seen);
        }
        Term::Rec { body, .. } => collect_names(body, out, program, seen),
        Term::Const(c) => {
            if seen.insert(c.to_string()) {
                collect_names(program.definition(c).unwrap(), out, program, seen);
            }
        }
    }
}

pub fn alphabet(t: &Term, program: &Program) -> Vec<String> {
    let mut out = BTreeSet::new();
    collect_names(t, &mut out, program, &mut BTreeSet::new());
    out.insert(FRESH.into());
    out.into_iter().collect()
}

fn substitute(t: &Term, var: &str, repl: &Term) -> Term {
    match t {
        Term::Nil | Term::Const(_) => t.clone(),
        Term::Var(v) => {
            if &**v == var {
                repl.clone()
            } else {
                t.clone()
            }
        }
        Term::Prefix {
            urgency,
            action,
            body,
        } => Term::Prefix {
            urgency: *urgency,
            action: action.clone(),
            body: Arc::new(substitute(body, var, repl)),
        },
        Term::Choice(l, r) => Term::choice(substitute(l, var, repl), substitute(r, var, repl)),
        Term::Parallel { left, right, sync } => Term::Parallel {
            left: Arc::new(substitute(left, var, repl)),
            right: Arc::new(substitute(right, var, repl)),
            sync: sync.clone(),
        },
        Term::Relabel { body, relabel } => Term::Relabel {
            body: Arc::new(substitute(body, var, repl)),
            relabel: relabel.clone(),
        },
        Term::Rec { var: v, body } => {
            if &**v == var {
                t.clone()
            } else {
                Term::Rec {
                    var: v.clone(),
                    body: Arc::new(substitute(body, var, repl)),
                }
            }
        }
    }
}

/// Refusal family of a term: `family[mask]` tells whether the subset `mask`
/// of the alphabet can be refused, together with the common target.
pub struct Refusals {
    pub family: Vec<bool>,
    pub target: Term,
}

pub struct RefusalOracle<'a> {
    pub program: &'a Program,
    pub alphabet: Vec<String>,
    index: HashMap<String, usize>,
}

impl<'a> RefusalOracle<'a> {
    pub fn new(program: &'a Program, t: &Term) -> Self {
        let alphabet = alphabet(t, program);
        let index = alphabet.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        RefusalOracle {
            program,
            alphabet,
            index,
        }
    }

    fn size(&self) -> usize {
        1 << self.alphabet.len()
    }

    fn bit(&self, a: &str) -> usize {
        1 << self.index[a]
    }

    pub fn mask_of(&self, set: &ActionSet) -> usize {
        set.iter().map(|a| self.bit(a)).sum()
    }

    fn all(&self) -> Vec<bool> {
        vec![true; self.size()]
    }

    pub fn refusals(&self, t: &Term) -> Option<Refusals> {
        let family_and_target = match t {
            Term::Nil => (self.all(), Term::Nil),
            Term::Prefix {
                urgency,
                action,
                body,
            } => {
                let urgent = Term::urgent(action.clone(), (**body).clone());
                if *urgency == pafas::syntax::Urgency::Lazy {
                    (self.all(), urgent)
                } else {
                    match action.name() {
                        None => return None,
                        Some(a) => {
                            let b = self.bit(a);
                            ((0..self.size()).map(|m| m & b == 0).collect(), urgent)
                        }
                    }
                }
            }
            Term::Choice(l, r) => {
                let l = self.refusals(l)?;
                let r = self.refusals(r)?;
                let fam = l.family.iter().zip(&r.family).map(|(x, y)| *x && *y).collect();
                (fam, Term::choice(l.target, r.target))
            }
            Term::Parallel { left, right, sync } => {
                let l = self.refusals(left)?;
                let r = self.refusals(right)?;
                let a_mask: usize = self
                    .alphabet
                    .iter()
                    .filter(|a| sync.contains_name(a))
                    .map(|a| self.bit(a))
                    .sum();
                let mut fam = vec![false; self.size()];
                for x1 in (0..self.size()).filter(|&m| l.family[m]) {
                    for x2 in (0..self.size()).filter(|&m| r.family[m]) {
                        let bound = (a_mask & (x1 | x2)) | ((x1 & x2) & !a_mask);
                        fam[bound] = true;
                    }
                }
                // every subset of a permitted bound is permitted
                for m in (0..self.size()).rev() {
                    if fam[m] {
                        let mut sub = m;
                        loop {
                            sub = (sub.wrapping_sub(1)) & m;
                            fam[sub] = true;
                            if sub == 0 {
                                break;
                            }
                        }
                    }
                }
                let target = Term::Parallel {
                    left: Arc::new(l.target),
                    right: Arc::new(r.target),
                    sync: sync.clone(),
                };
                (fam, target)
            }
            Term::Relabel { body, relabel } => {
                let b = self.refusals(body)?;
                let pre = |x: usize| -> usize {
                    self.alphabet
                        .iter()
                        .filter(|a| match relabel.apply(&Action::visible(a)) {
                            Action::Tau => true,
                            Action::Visible(n) => x & self.bit(&n) != 0,
                        })
                        .map(|a| self.bit(a))
                        .sum()
                };
                let fam = (0..self.size()).map(|x| b.family[pre(x)]).collect();
                let target = Term::Relabel {
                    body: Arc::new(b.target),
                    relabel: relabel.clone(),
                };
                (fam, target)
            }
            Term::Rec { var, body } => return self.refusals(&substitute(body, var, t)),
            Term::Const(c) => return self.refusals(self.program.definition(c).unwrap()),
            Term::Var(v) => panic!("free variable {v}"),
        };
        let (family, target) = family_and_target;
        if family[0] {
            Some(Refusals { family, target })
        } else {
            None
        }
    }
}

pub fn key(t: &Term) -> String {
    canonical_key(t)
}

// ---------------------------------------------------------------------------
// Random graphs

fn label(i: usize) -> Arc<str> {
    Arc::from(format!("s{i}").as_str())
}

fn random_forbidden(rng: &mut StdRng) -> ActionSet {
    match rng.gen_range(0..10) {
        0..=5 => ActionSet::new(),
        6 => names(&["in"]),
        7 => names(&["out"]),
        _ => names(&["in", "out"]),
    }
}

/// Arbitrary graph over `in`, `out`, `tau` and time edges.
pub fn random_graph(rng: &mut StdRng, nodes: usize) -> Rts {
    let labels: Vec<Arc<str>> = (0..nodes).map(label).collect();
    let acts = ["in", "out", "tau"];
    let mut actions = vec![Vec::new(); nodes];
    let mut time = vec![None; nodes];
    for u in 0..nodes {
        for _ in 0..rng.gen_range(0..3) {
            let a = *acts.choose(rng).unwrap();
            let a = if a == "tau" { Action::Tau } else { Action::visible(a) };
            let v = rng.gen_range(0..nodes);
            if !actions[u].contains(&(a.clone(), v)) {
                actions[u].push((a, v));
            }
        }
        if rng.gen_bool(0.7) {
            time[u] = Some(TimeEdge {
                forbidden: random_forbidden(rng),
                target: rng.gen_range(0..nodes),
            });
        }
    }
    Rts::from_parts(0, labels, actions, time)
}

/// Graph whose nodes carry a level equal to the number of pending requests:
/// `in` goes up a level, `out` down, other edges stay. Time edges move
/// forward within a level, so every cycle with a time step also performs an
/// `in`.
pub fn random_response_graph(rng: &mut StdRng, nodes: usize) -> Rts {
    let levels = rng.gen_range(2..=3usize);
    let level: Vec<usize> = (0..nodes)
        .map(|i| if i == 0 { 0 } else { rng.gen_range(0..levels) })
        .collect();
    let at = |l: usize| -> Vec<usize> { (0..nodes).filter(|&v| level[v] == l).collect() };
    let labels: Vec<Arc<str>> = (0..nodes).map(label).collect();
    let mut actions = vec![Vec::new(); nodes];
    let mut time = vec![None; nodes];
    for u in 0..nodes {
        let l = level[u];
        let mut push = |a: Action, cands: Vec<usize>, rng: &mut StdRng| {
            if let Some(&v) = cands.choose(rng) {
                if !actions[u].contains(&(a.clone(), v)) {
                    actions[u].push((a, v));
                }
            }
        };
        if l + 1 < levels && rng.gen_bool(0.8) {
            push(Action::visible("in"), at(l + 1), rng);
        }
        if l > 0 && rng.gen_bool(0.8) {
            push(Action::visible("out"), at(l - 1), rng);
        }
        if rng.gen_bool(0.3) {
            push(Action::Tau, at(l), rng);
        }
        if rng.gen_bool(0.85) {
            let later: Vec<usize> = at(l).into_iter().filter(|&v| v > u).collect();
            if let Some(&v) = later.choose(rng) {
                time[u] = Some(TimeEdge {
                    forbidden: random_forbidden(rng),
                    target: v,
                });
            }
        }
    }
    Rts::from_parts(0, labels, actions, time)
}

// ---------------------------------------------------------------------------
// Cycle enumeration

/// One edge of a graph, for enumeration.
#[derive(Clone, Copy, Debug)]
pub struct E {
    pub to: usize,
    pub ins: i64,
    pub outs: i64,
    pub time: i64,
}

/// Edge lists of the system: actions plus the time edge if `keep_time` allows.
pub fn edges<F: Fn(&TimeEdge) -> bool>(rts: &Rts, keep_time: F) -> Vec<Vec<E>> {
    rts.nodes()
        .map(|u| {
            let mut es: Vec<E> = rts
                .actions(u)
                .iter()
                .map(|(a, v)| E {
                    to: *v,
                    ins: a.is("in") as i64,
                    outs: a.is("out") as i64,
                    time: 0,
                })
                .collect();
            if let Some(e) = rts.time_edge(u).filter(|e| keep_time(e)) {
                es.push(E {
                    to: e.target,
                    ins: 0,
                    outs: 0,
                    time: 1,
                });
            }
            es
        })
        .collect()
}

/// Calls `visit` with the totals of every simple cycle (each cycle once per
/// choice of parallel edges), rooted at its least node.
pub fn for_each_simple_cycle(g: &[Vec<E>], mut visit: impl FnMut(i64, i64, i64)) {
    fn go(
        g: &[Vec<E>],
        start: usize,
        u: usize,
        on: &mut Vec<bool>,
        acc: (i64, i64, i64),
        visit: &mut dyn FnMut(i64, i64, i64),
    ) {
        for e in &g[u] {
            let acc2 = (acc.0 + e.ins, acc.1 + e.outs, acc.2 + e.time);
            if e.to == start {
                visit(acc2.0, acc2.1, acc2.2);
            } else if e.to > start && !on[e.to] {
                on[e.to] = true;
                go(g, start, e.to, on, acc2, visit);
                on[e.to] = false;
            }
        }
    }
    for s in 0..g.len() {
        let mut on = vec![false; g.len()];
        on[s] = true;
        go(g, s, s, &mut on, (0, 0, 0), &mut visit);
    }
}

pub fn reachable_from(g: &[Vec<E>], root: usize) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        for e in &g[u] {
            if !seen[e.to] {
                seen[e.to] = true;
                stack.push(e.to);
            }
        }
    }
    seen
}

/// Restriction of `g` to the nodes flagged in `keep`, renumbered.
pub fn induced(g: &[Vec<E>], keep: &[bool]) -> Vec<Vec<E>> {
    let mut map = vec![usize::MAX; g.len()];
    let mut n = 0;
    for (u, k) in keep.iter().enumerate() {
        if *k {
            map[u] = n;
            n += 1;
        }
    }
    g.iter()
        .enumerate()
        .filter(|(u, _)| keep[*u])
        .map(|(_, es)| {
            es.iter()
                .filter(|e| keep[e.to])
                .map(|e| E { to: map[e.to], ..*e })
                .collect()
        })
        .collect()
}

/// Some cycle with a time step and neither `in` nor `out`.
pub fn naive_catastrophic(rts: &Rts) -> bool {
    let g = edges(rts, |_| true);
    let mut found = false;
    for_each_simple_cycle(&g, |ins, outs, time| found |= ins == 0 && outs == 0 && time > 0);
    found
}

/// Largest `time / ins` over simple cycles with a time step, in the part of
/// the system reachable through actions and full time steps.
pub fn naive_bad_cycle(rts: &Rts) -> Option<Rational> {
    let g = edges(rts, |e| e.is_full());
    let live = reachable_from(&g, rts.root());
    let g = induced(&g, &live);
    let mut best: Option<Rational> = None;
    for_each_simple_cycle(&g, |ins, _, time| {
        if time > 0 {
            assert!(ins > 0, "cycle of full time steps without requests");
            let r = Rational::new(time, ins);
            best = Some(best.map_or(r, |b| b.max(r)));
        }
    });
    best
}

// ---------------------------------------------------------------------------
// Witness checks

/// The witness of `rp(n)` replays from the root, respects the request bounds,
/// uses only full time steps before the `n`-th `in` and only steps that do
/// not forbid `out` afterwards, and has exactly `value` time steps.
pub fn check_rp_witness(rrts: &Rts, n: usize, res: &pafas::performance::RpResult) -> Result<(), String> {
    let w = &res.witness;
    if w.start != rrts.root() || !rrts.replays(w) {
        return Err(format!("rp({n}) witness does not replay: {}", w.trace()));
    }
    if w.count_time() as u64 != res.value {
        return Err(format!("rp({n}) witness has {} time steps, value {}", w.count_time(), res.value));
    }
    if w.count_action("in") > n || w.count_action("out") + 1 > n {
        return Err(format!("rp({n}) witness exceeds the request bounds: {}", w.trace()));
    }
    let mut ins = 0;
    for s in &w.steps {
        match &s.label {
            pafas::semantics::StepLabel::Action { action } if action.is("in") => ins += 1,
            pafas::semantics::StepLabel::Time { forbidden } => {
                let ok = if ins < n { forbidden.is_empty() } else { !forbidden.contains("out") };
                if !ok {
                    return Err(format!("rp({n}) witness uses an unusable time step: {}", w.trace()));
                }
            }
            _ => {}
        }
    }
    Ok(())
}
