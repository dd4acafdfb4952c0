//! Extreme reachable `#in − #out` balances per node.

use crate::graph::{bfs_path, tarjan_scc};
use crate::semantics::{NodeId, Path, Rts, Step, StepLabel, TimeEdge};
use crate::syntax::{IN, OUT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Bound {
    Finite(i64),
    /// Arbitrarily low (for minima) or high (for maxima).
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Extreme {
    Min,
    Max,
}

pub(crate) fn step_weight(label: &StepLabel) -> i64 {
    match label {
        StepLabel::Action { action } if action.is(IN) => 1,
        StepLabel::Action { action } if action.is(OUT) => -1,
        _ => 0,
    }
}

pub(crate) struct Balances {
    /// `None` for nodes unreachable from the root.
    pub value: Vec<Option<Bound>>,
    pred: Vec<Option<Step>>,
    /// Component whose own cycles made it unbounded, with its members.
    unbounded_origin: Option<Vec<NodeId>>,
}

struct Edge {
    to: NodeId,
    w: i64,
    step: Step,
}

/// Computes the least (or greatest) balance with which each node can be
/// reached from the root, using action edges and the time edges accepted by
/// `keep_time`.
pub(crate) fn extreme_balances<F>(rts: &Rts, mode: Extreme, keep_time: F) -> Balances
where
    F: Fn(NodeId, &TimeEdge) -> bool,
{
    let n = rts.node_count();
    let sign = match mode {
        Extreme::Min => 1,
        Extreme::Max => -1,
    };
    let mut edges: Vec<Vec<Edge>> = Vec::with_capacity(n);
    for u in rts.nodes() {
        let out = rts
            .steps(u)
            .filter(|s| match &s.label {
                StepLabel::Time { .. } => keep_time(u, rts.time_edge(u).expect("time step")),
                StepLabel::Action { .. } => true,
            })
            .map(|s| Edge {
                to: s.to,
                w: sign * step_weight(&s.label),
                step: s,
            })
            .collect();
        edges.push(out);
    }
    let adj: Vec<Vec<usize>> = edges.iter().map(|es| es.iter().map(|e| e.to).collect()).collect();
    let sccs = tarjan_scc(&adj);

    // Minimisation with weights multiplied by `sign`.
    let mut value: Vec<Option<Bound>> = vec![None; n];
    let mut pred: Vec<Option<Step>> = vec![None; n];
    let mut origin = None;
    if n > 0 {
        value[rts.root()] = Some(Bound::Finite(0));
    }

    for c in (0..sccs.count()).rev() {
        let members = &sccs.members[c];
        let unbounded = members.iter().any(|&v| value[v] == Some(Bound::Unbounded));
        let seeded = members.iter().any(|&v| value[v].is_some());
        if !seeded {
            continue;
        }
        if unbounded {
            for &v in members {
                value[v] = Some(Bound::Unbounded);
            }
        } else {
            // Bellman-Ford style queue relaxation inside the component.
            let mut queue: std::collections::VecDeque<NodeId> =
                members.iter().copied().filter(|&v| value[v].is_some()).collect();
            let mut in_queue = vec![false; n];
            for &v in &queue {
                in_queue[v] = true;
            }
            let mut relaxed = vec![0usize; n];
            let limit = members.len();
            let mut diverged = false;
            while let Some(u) = queue.pop_front() {
                in_queue[u] = false;
                let Some(Bound::Finite(du)) = value[u] else { continue };
                for e in &edges[u] {
                    if sccs.comp[e.to] != c {
                        continue;
                    }
                    let cand = du + e.w;
                    let better = match value[e.to] {
                        None => true,
                        Some(Bound::Finite(dv)) => cand < dv,
                        Some(Bound::Unbounded) => false,
                    };
                    if better {
                        value[e.to] = Some(Bound::Finite(cand));
                        pred[e.to] = Some(e.step.clone());
                        relaxed[e.to] += 1;
                        if relaxed[e.to] > limit {
                            diverged = true;
                            break;
                        }
                        if !in_queue[e.to] {
                            in_queue[e.to] = true;
                            queue.push_back(e.to);
                        }
                    }
                }
                if diverged {
                    break;
                }
            }
            if diverged {
                for &v in members {
                    value[v] = Some(Bound::Unbounded);
                }
                if origin.is_none() {
                    origin = Some(members.clone());
                }
            }
        }
        // propagate to later components
        for &u in members {
            let Some(du) = value[u] else { continue };
            for e in &edges[u] {
                if sccs.comp[e.to] == c {
                    continue;
                }
                let cand = match du {
                    Bound::Unbounded => Bound::Unbounded,
                    Bound::Finite(d) => Bound::Finite(d + e.w),
                };
                let better = match (value[e.to], cand) {
                    (None, _) => true,
                    (Some(Bound::Unbounded), _) => false,
                    (Some(Bound::Finite(_)), Bound::Unbounded) => true,
                    (Some(Bound::Finite(dv)), Bound::Finite(dc)) => dc < dv,
                };
                if better {
                    value[e.to] = Some(cand);
                    pred[e.to] = Some(e.step.clone());
                }
            }
        }
    }

    if sign < 0 {
        for v in value.iter_mut() {
            if let Some(Bound::Finite(d)) = v {
                *d = -*d;
            }
        }
    }
    Balances {
        value,
        pred,
        unbounded_origin: origin,
    }
}

/// A path from the root whose balance drops below zero exactly at its last
/// step, if one exists. `balances` must come from [`Extreme::Min`].
pub(crate) fn negative_prefix_witness(rts: &Rts, balances: &Balances) -> Option<Path> {
    if let Some(v) = rts
        .nodes()
        .find(|&v| matches!(balances.value[v], Some(Bound::Finite(d)) if d < 0))
    {
        let mut steps = Vec::new();
        let mut at = v;
        while at != rts.root() {
            let s = balances.pred[at].clone().expect("finite value has a predecessor");
            at = s.from;
            steps.push(s);
            if steps.len() > rts.node_count() {
                break;
            }
        }
        steps.reverse();
        return Some(truncate_at_negative(Path {
            start: rts.root(),
            steps,
        }));
    }

    let members = balances.unbounded_origin.as_ref()?;
    let cycle = negative_cycle(rts, members)?;
    let adj: Vec<Vec<usize>> = rts
        .nodes()
        .map(|u| rts.steps(u).map(|s| s.to).collect())
        .collect();
    let entry = cycle.start;
    let hops = bfs_path(&adj, rts.root(), entry, |_| true)?;
    let mut path = Path::empty(rts.root());
    let mut at = rts.root();
    for h in hops {
        let s = rts.steps(at).find(|s| s.to == h).expect("bfs edge exists");
        path.push(s.from, s.label, s.to);
        at = h;
    }
    // repeat the cycle until the balance goes negative
    let mut balance: i64 = path.steps.iter().map(|s| step_weight(&s.label)).sum();
    let mut low = path
        .steps
        .iter()
        .scan(0i64, |b, s| {
            *b += step_weight(&s.label);
            Some(*b)
        })
        .min()
        .unwrap_or(0);
    let per_cycle: i64 = cycle.steps.iter().map(|s| step_weight(&s.label)).sum();
    debug_assert!(per_cycle < 0);
    while low >= 0 {
        for s in &cycle.steps {
            balance += step_weight(&s.label);
            low = low.min(balance);
        }
        path.extend(&cycle);
    }
    Some(truncate_at_negative(path))
}

fn truncate_at_negative(mut path: Path) -> Path {
    let mut b = 0;
    for (i, s) in path.steps.iter().enumerate() {
        b += step_weight(&s.label);
        if b < 0 {
            path.steps.truncate(i + 1);
            break;
        }
    }
    path
}

/// Some cycle of negative weight inside the strongly connected `members`.
fn negative_cycle(rts: &Rts, members: &[NodeId]) -> Option<Path> {
    let inside = {
        let mut m = vec![false; rts.node_count()];
        for &v in members {
            m[v] = true;
        }
        m
    };
    let n = members.len();
    let mut dist = vec![0i64; rts.node_count()];
    let mut pred: Vec<Option<Step>> = vec![None; rts.node_count()];
    let mut last = None;
    for _ in 0..=n {
        last = None;
        for &u in members {
            for s in rts.steps(u) {
                if !inside[s.to] {
                    continue;
                }
                let cand = dist[u] + step_weight(&s.label);
                if cand < dist[s.to] {
                    dist[s.to] = cand;
                    last = Some(s.to);
                    let to = s.to;
                    pred[to] = Some(s);
                }
            }
        }
        last?;
    }
    let mut v = last?;
    for _ in 0..n {
        v = pred[v].as_ref()?.from;
    }
    let start = v;
    let mut steps = Vec::new();
    loop {
        let s = pred[v].clone()?;
        v = s.from;
        steps.push(s);
        if v == start {
            break;
        }
    }
    steps.reverse();
    Some(Path { start, steps })
}
