//! Rooted isomorphism of refusal transition systems.

use std::collections::{HashMap, HashSet, VecDeque};

use super::{NodeId, Rts, StepLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoMode {
    /// Node labels must match as well as the edge structure.
    Labelled,
    /// Node labels are ignored.
    Structural,
}

/// True when a bijection maps root to root and preserves every edge together
/// with its action or forbidden set.
pub fn is_isomorphic(a: &Rts, b: &Rts, mode: IsoMode) -> bool {
    if a.node_count() != b.node_count()
        || a.action_edge_count() != b.action_edge_count()
        || a.time_edge_count() != b.time_edge_count()
    {
        return false;
    }
    if a.node_count() == 0 {
        return true;
    }
    match mode {
        IsoMode::Labelled => labelled(a, b),
        IsoMode::Structural => structural(a, b),
    }
}

fn labelled(a: &Rts, b: &Rts) -> bool {
    let index: HashMap<&str, NodeId> = b.nodes().map(|n| (b.label(n), n)).collect();
    if index.len() != b.node_count() {
        return false;
    }
    let mut map = vec![0; a.node_count()];
    for n in a.nodes() {
        match index.get(a.label(n)) {
            Some(&m) => map[n] = m,
            None => return false,
        }
    }
    if map[a.root()] != b.root() {
        return false;
    }
    preserves_edges(a, b, &map)
}

fn preserves_edges(a: &Rts, b: &Rts, map: &[NodeId]) -> bool {
    a.nodes().all(|n| {
        a.steps(n).all(|s| {
            b.has_step(&super::Step {
                from: map[s.from],
                label: s.label,
                to: map[s.to],
            })
        })
    })
}

/// Colour refinement on the disjoint union, then backtracking over nodes in
/// BFS order of `a`, each candidate drawn from the images of its BFS parent.
fn structural(a: &Rts, b: &Rts) -> bool {
    let colours = refine(a, b);
    let (ca, cb) = colours.split_at(a.node_count());
    if ca[a.root()] != cb[b.root()] {
        return false;
    }
    let mut ha: Vec<_> = ca.to_vec();
    let mut hb: Vec<_> = cb.to_vec();
    ha.sort_unstable();
    hb.sort_unstable();
    if ha != hb {
        return false;
    }

    // BFS order of `a` with the edge through which each node was found
    let n = a.node_count();
    let mut parent: Vec<Option<(NodeId, StepLabel)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = vec![a.root()];
    seen[a.root()] = true;
    let mut q = VecDeque::from([a.root()]);
    while let Some(u) = q.pop_front() {
        for s in a.steps(u) {
            if !seen[s.to] {
                seen[s.to] = true;
                parent[s.to] = Some((u, s.label));
                order.push(s.to);
                q.push_back(s.to);
            }
        }
    }
    if order.len() != n {
        return false;
    }

    let mut preds: Vec<Vec<(NodeId, StepLabel)>> = vec![Vec::new(); n];
    for u in a.nodes() {
        for s in a.steps(u) {
            preds[s.to].push((u, s.label));
        }
    }

    let mut map: Vec<Option<NodeId>> = vec![None; n];
    let mut used = vec![false; b.node_count()];
    map[a.root()] = Some(b.root());
    used[b.root()] = true;
    if !consistent(a, b, &preds, &map, a.root(), b.root()) {
        return false;
    }

    // candidate lists per depth, iterated with explicit backtracking
    let mut cands: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut cursor = vec![0usize; n];
    let mut depth = 1;
    let mut fresh = true;
    while depth >= 1 {
        if depth == n {
            return true;
        }
        let u = order[depth];
        if fresh {
            let (p, label) = parent[u].as_ref().expect("non-root has a parent");
            let fp = map[*p].expect("parent mapped first");
            let mut c: Vec<NodeId> = b
                .steps(fp)
                .filter(|s| &s.label == label && cb[s.to] == ca[u])
                .map(|s| s.to)
                .collect();
            c.sort_unstable();
            c.dedup();
            cands[depth] = c;
            cursor[depth] = 0;
            fresh = false;
        } else if let Some(x) = map[u].take() {
            used[x] = false;
        }
        let mut advanced = false;
        while cursor[depth] < cands[depth].len() {
            let x = cands[depth][cursor[depth]];
            cursor[depth] += 1;
            if used[x] {
                continue;
            }
            map[u] = Some(x);
            if consistent(a, b, &preds, &map, u, x) {
                used[x] = true;
                advanced = true;
                break;
            }
            map[u] = None;
        }
        if advanced {
            depth += 1;
            fresh = true;
        } else {
            depth -= 1;
        }
    }
    false
}

/// Checks the edges between `u` (just mapped to `x`) and already mapped nodes.
fn consistent(
    a: &Rts,
    b: &Rts,
    preds: &[Vec<(NodeId, StepLabel)>],
    map: &[Option<NodeId>],
    u: NodeId,
    x: NodeId,
) -> bool {
    for s in a.steps(u) {
        if let Some(t) = map[s.to] {
            if !b.has_step(&super::Step {
                from: x,
                label: s.label,
                to: t,
            }) {
                return false;
            }
        }
    }
    for (w, label) in &preds[u] {
        if let Some(fw) = map[*w] {
            if !b.has_step(&super::Step {
                from: fw,
                label: label.clone(),
                to: x,
            }) {
                return false;
            }
        }
    }
    true
}

fn refine(a: &Rts, b: &Rts) -> Vec<u32> {
    let graphs = [a, b];
    let nodes: Vec<(usize, NodeId)> = graphs
        .iter()
        .enumerate()
        .flat_map(|(g, r)| r.nodes().map(move |n| (g, n)))
        .collect();
    let offset = [0, a.node_count()];
    let mut colour = vec![0u32; nodes.len()];
    let mut classes = 1;
    loop {
        let mut table: HashMap<(u32, Vec<(StepLabel, u32)>), u32> = HashMap::new();
        let mut next = Vec::with_capacity(nodes.len());
        for &(g, n) in &nodes {
            let mut sig: Vec<(StepLabel, u32)> = graphs[g]
                .steps(n)
                .map(|s| (s.label, colour[offset[g] + s.to]))
                .collect();
            sig.sort_unstable();
            let key = (colour[offset[g] + n], sig);
            let len = table.len() as u32;
            next.push(*table.entry(key).or_insert(len));
        }
        let count = next.iter().collect::<HashSet<_>>().len();
        colour = next;
        if count == classes {
            return colour;
        }
        classes = count;
    }
}
