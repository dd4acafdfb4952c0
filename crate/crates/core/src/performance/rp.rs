//! Exact response performance `rp(n)`: the most time steps on a path with at
//! most `n` `in`s and `n − 1` `out`s whose time steps before the `n`-th `in`
//! are all full.

use serde::{Deserialize, Serialize};

use super::Rrts;
use crate::graph::{bfs_path, tarjan_scc};
use crate::semantics::{NodeId, Path, StepLabel};
use crate::syntax::{Action, IN, OUT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RpResult {
    pub n: usize,
    pub value: u64,
    /// A path realising `value`, starting at the root.
    pub witness: Path,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RpError {
    #[error("rp(n) needs n >= 1")]
    ZeroRequests,
    #[error(
        "time can pass forever at node {node} after {ins} ins and {outs} outs; \
         the system has a catastrophic cycle"
    )]
    PreconditionViolated { node: NodeId, ins: usize, outs: usize },
}

/// Layered state `(node, ins, outs)`.
struct Layers {
    n: usize,
}

impl Layers {
    fn index(&self, v: NodeId, i: usize, o: usize) -> usize {
        (v * (self.n + 1) + i) * self.n + o
    }

    fn split(&self, s: usize) -> (NodeId, usize, usize) {
        let o = s % self.n;
        let rest = s / self.n;
        (rest / (self.n + 1), rest % (self.n + 1), o)
    }
}

/// Edge of the layered graph; `action` indexes the node's action list, or is
/// `None` for its time edge.
#[derive(Clone, Copy)]
struct LEdge {
    to: usize,
    weight: u64,
    action: Option<usize>,
}

pub fn response_performance(rrts: &Rrts, n: usize) -> Result<RpResult, RpError> {
    if n == 0 {
        return Err(RpError::ZeroRequests);
    }
    let rts = rrts.as_rts();
    let layers = Layers { n };

    let successors = |s: usize| -> Vec<LEdge> {
        let (v, i, o) = layers.split(s);
        let mut out = Vec::new();
        for (k, (a, t)) in rts.actions(v).iter().enumerate() {
            let target = match a {
                Action::Tau => Some((i, o)),
                a if a.is(IN) => (i < n).then_some((i + 1, o)),
                a if a.is(OUT) => (o + 1 < n && o < i).then_some((i, o + 1)),
                _ => None,
            };
            if let Some((i2, o2)) = target {
                out.push(LEdge {
                    to: layers.index(*t, i2, o2),
                    weight: 0,
                    action: Some(k),
                });
            }
        }
        if let Some(e) = rts.time_edge(v) {
            let usable = if i < n {
                e.is_full()
            } else {
                !e.forbidden.contains(OUT)
            };
            if usable {
                out.push(LEdge {
                    to: layers.index(e.target, i, o),
                    weight: 1,
                    action: None,
                });
            }
        }
        out
    };

    // reachable layered states, numbered in discovery order
    let root = layers.index(rts.root(), 0, 0);
    let mut local = std::collections::HashMap::new();
    let mut states = vec![root];
    local.insert(root, 0usize);
    let mut adj: Vec<Vec<LEdge>> = Vec::new();
    let mut next = 0;
    while next < states.len() {
        let mut es = successors(states[next]);
        for e in es.iter_mut() {
            let id = *local.entry(e.to).or_insert_with(|| {
                states.push(e.to);
                states.len() - 1
            });
            e.to = id;
        }
        adj.push(es);
        next += 1;
    }

    let plain: Vec<Vec<usize>> = adj.iter().map(|es| es.iter().map(|e| e.to).collect()).collect();
    let sccs = tarjan_scc(&plain);
    for (u, es) in adj.iter().enumerate() {
        if es.iter().any(|e| e.weight > 0 && sccs.same(u, e.to)) {
            let (node, ins, outs) = layers.split(states[u]);
            return Err(RpError::PreconditionViolated { node, ins, outs });
        }
    }

    // longest path over the condensation, components in topological order
    let count = sccs.count();
    let mut best: Vec<Option<u64>> = vec![None; count];
    // entering edge (from state, edge index) realising best[c]
    let mut via: Vec<Option<(usize, usize)>> = vec![None; count];
    best[sccs.comp[0]] = Some(0);
    for c in (0..count).rev() {
        let Some(bc) = best[c] else { continue };
        for &u in &sccs.members[c] {
            for (k, e) in adj[u].iter().enumerate() {
                let d = sccs.comp[e.to];
                if d == c {
                    continue;
                }
                let cand = bc + e.weight;
                if best[d].is_none_or(|b| cand > b) {
                    best[d] = Some(cand);
                    via[d] = Some((u, k));
                }
            }
        }
    }
    let (value, target) = (0..states.len())
        .map(|s| (best[sccs.comp[s]].expect("reachable"), s))
        .fold((0u64, 0usize), |acc, (v, s)| if v > acc.0 { (v, s) } else { acc });

    // walk back through the entering edges, filling in paths inside components
    let mut segments: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut at = target;
    loop {
        let c = sccs.comp[at];
        let entry = match via[c] {
            Some((from, k)) => adj[from][k].to,
            None => 0,
        };
        let inner = bfs_path(&plain, entry, at, |s| sccs.comp[s] == c).expect("same component");
        let mut seg = Vec::new();
        let mut prev = entry;
        for s in inner {
            let k = adj[prev].iter().position(|e| e.to == s).expect("edge");
            seg.push((prev, k));
            prev = s;
        }
        segments.push(seg);
        match via[c] {
            Some((from, k)) => {
                segments.push(vec![(from, k)]);
                at = from;
            }
            None => break,
        }
    }
    let mut witness = Path::empty(rts.root());
    for (from, k) in segments.into_iter().rev().flatten() {
        let e = adj[from][k];
        let (v, _, _) = layers.split(states[from]);
        let (w, _, _) = layers.split(states[e.to]);
        let label = match e.action {
            Some(idx) => StepLabel::Action {
                action: rts.actions(v)[idx].0.clone(),
            },
            None => StepLabel::Time {
                forbidden: rts.time_edge(v).expect("time edge").forbidden.clone(),
            },
        };
        witness.push(v, label, w);
    }
    debug_assert_eq!(witness.count_time() as u64, value);
    Ok(RpResult { n, value, witness })
}
