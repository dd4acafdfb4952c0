//! Minimum mean cycle (Karp), generic over signed integer edge weights.
//!
//! Means are exact [`Ratio`]s over the weight type. Among all cycles of
//! minimum mean the reported one is the shortest, then the lexicographically
//! smallest node sequence when rotated to start at its least node.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{PrimInt, Signed};

use crate::graph::tarjan_scc;

/// Edge weight usable by [`min_mean_cycle`].
pub trait Weight: PrimInt + Integer + Signed + Hash + Debug + Display + Send + Sync + 'static {}

impl<T> Weight for T where T: PrimInt + Integer + Signed + Hash + Debug + Display + Send + Sync + 'static {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeanCycle<W: Weight> {
    pub mean: Ratio<W>,
    /// Cycle nodes, starting at the least one.
    pub nodes: Vec<usize>,
    /// Indices into the input edge list; `edges[i]` leaves `nodes[i]`.
    pub edges: Vec<usize>,
}

fn w_of<W: Weight>(x: usize) -> W {
    W::from(x).expect("count fits the weight type")
}

/// Finds a cycle of minimum mean weight in the graph on `n` nodes with the
/// given `(from, to, weight)` edges, or `None` if the graph is acyclic.
pub fn min_mean_cycle<W: Weight>(n: usize, edges: &[(usize, usize, W)]) -> Option<MeanCycle<W>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &(u, _, _)) in edges.iter().enumerate() {
        out[u].push(i);
    }
    let adj: Vec<Vec<usize>> = out
        .iter()
        .map(|es| es.iter().map(|&i| edges[i].1).collect())
        .collect();
    let sccs = tarjan_scc(&adj);

    let mut per_comp: Vec<(Ratio<W>, usize, Vec<Ratio<W>>)> = Vec::new();
    for (c, members) in sccs.members.iter().enumerate() {
        let cyclic = members.len() > 1
            || out[members[0]].iter().any(|&i| edges[i].1 == members[0]);
        if !cyclic {
            continue;
        }
        let (mean, potential) = karp_component(members, &sccs.comp, c, &out, edges);
        per_comp.push((mean, c, potential));
    }
    let best = per_comp.iter().map(|(m, _, _)| *m).min()?;

    let mut chosen: Option<(Vec<usize>, Vec<usize>)> = None;
    for (mean, c, potential) in &per_comp {
        if *mean != best {
            continue;
        }
        let cand = best_tight_cycle(&sccs.members[*c], &sccs.comp, *c, &out, edges, best, potential);
        let better = match (&chosen, &cand) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some((nodes, _)), Some((cn, _))) => (cn.len(), cn) < (nodes.len(), nodes),
        };
        if better {
            chosen = cand;
        }
    }
    let (nodes, cycle_edges) = chosen.expect("a minimum-mean component has a tight cycle");
    Some(MeanCycle {
        mean: best,
        nodes,
        edges: cycle_edges,
    })
}

/// Karp's recurrence on one strongly connected component. Returns the
/// minimum mean and a feasible potential `π` with
/// `w(u,v) − mean + π(u) − π(v) ≥ 0` on every internal edge, indexed by local
/// position in `members`.
fn karp_component<W: Weight>(
    members: &[usize],
    comp: &[usize],
    c: usize,
    out: &[Vec<usize>],
    edges: &[(usize, usize, W)],
) -> (Ratio<W>, Vec<Ratio<W>>) {
    let m = members.len();
    let local = |v: usize| members.binary_search(&v).expect("member");
    // d[k * m + v]: least weight of a k-edge walk from members[0] to v
    let mut d: Vec<Option<W>> = vec![None; (m + 1) * m];
    d[0] = Some(W::zero());
    for k in 0..m {
        for (lu, &u) in members.iter().enumerate() {
            let Some(du) = d[k * m + lu] else { continue };
            for &i in &out[u] {
                let (_, v, w) = edges[i];
                if comp[v] != c {
                    continue;
                }
                let slot = &mut d[(k + 1) * m + local(v)];
                let cand = du + w;
                if slot.is_none_or(|x| cand < x) {
                    *slot = Some(cand);
                }
            }
        }
    }
    let mut best: Option<Ratio<W>> = None;
    for v in 0..m {
        let Some(dn) = d[m * m + v] else { continue };
        let mut worst: Option<Ratio<W>> = None;
        for k in 0..m {
            if let Some(dk) = d[k * m + v] {
                let r = Ratio::new(dn - dk, w_of(m - k));
                if worst.is_none_or(|x| r > x) {
                    worst = Some(r);
                }
            }
        }
        if let Some(wv) = worst {
            if best.is_none_or(|b| wv < b) {
                best = Some(wv);
            }
        }
    }
    let mean = best.expect("strongly connected component with a cycle");
    let potential = (0..m)
        .map(|v| {
            (0..m)
                .filter_map(|k| d[k * m + v].map(|dk| Ratio::from_integer(dk) - mean * w_of::<W>(k)))
                .min()
                .expect("every member is reached by a walk shorter than m")
        })
        .collect();
    (mean, potential)
}

/// Shortest, then lexicographically least, cycle made of tight edges.
fn best_tight_cycle<W: Weight>(
    members: &[usize],
    comp: &[usize],
    c: usize,
    out: &[Vec<usize>],
    edges: &[(usize, usize, W)],
    mean: Ratio<W>,
    potential: &[Ratio<W>],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let local = |v: usize| members.binary_search(&v).expect("member");
    let m = members.len();
    // tight adjacency, sorted by target then edge index
    let mut tight: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
    for (lu, &u) in members.iter().enumerate() {
        for &i in &out[u] {
            let (_, v, w) = edges[i];
            if comp[v] != c {
                continue;
            }
            let lv = local(v);
            if Ratio::from_integer(w) - mean + potential[lu] - potential[lv] == Ratio::from_integer(W::zero()) {
                tight[lu].push((lv, i));
            }
        }
        tight[lu].sort_unstable();
    }

    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; m];
    for s in 0..m {
        if let Some((nodes, _)) = &best {
            if nodes.len() == 1 {
                break;
            }
        }
        // BFS from s over nodes >= s
        pred.iter_mut().for_each(|p| *p = None);
        let mut order = vec![s];
        let mut head = 0;
        let mut found: Option<(usize, usize)> = None;
        let mut seen = vec![false; m];
        seen[s] = true;
        'bfs: while head < order.len() {
            let u = order[head];
            head += 1;
            for &(v, i) in &tight[u] {
                if v < s {
                    continue;
                }
                if v == s {
                    found = Some((u, i));
                    break 'bfs;
                }
                if !seen[v] {
                    seen[v] = true;
                    pred[v] = Some((u, i));
                    order.push(v);
                }
            }
        }
        let Some((last, closing)) = found else { continue };
        let mut nodes = vec![last];
        let mut idx = vec![closing];
        let mut at = last;
        while at != s {
            let (p, i) = pred[at].expect("bfs tree");
            nodes.push(p);
            idx.push(i);
            at = p;
        }
        nodes.reverse();
        idx.reverse();
        let nodes: Vec<usize> = nodes.into_iter().map(|l| members[l]).collect();
        let better = match &best {
            None => true,
            Some((bn, _)) => (nodes.len(), &nodes) < (bn.len(), bn),
        };
        if better {
            best = Some((nodes, idx));
        }
    }
    best
}
