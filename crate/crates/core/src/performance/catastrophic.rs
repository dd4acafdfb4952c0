//! Catastrophic cycles: cycles with at least one time step and no `in` or
//! `out`, along which time can pass forever without serving anybody.

use serde::{Deserialize, Serialize};

use super::Rrts;
use crate::graph::{bfs_path, bit, tarjan_scc, transitive_closure};
use crate::semantics::{NodeId, Path, Rts};
use crate::syntax::{IN, OUT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatastrophicCycle {
    /// Starts with the time step, then returns to its source.
    pub cycle: Path,
}

/// Successor lists of the graph without `in`/`out` edges.
fn quiet_adjacency(rts: &Rts) -> Vec<Vec<usize>> {
    rts.nodes()
        .map(|u| {
            rts.steps(u)
                .filter(|s| !(s.label.is_action(IN) || s.label.is_action(OUT)))
                .map(|s| s.to)
                .collect()
        })
        .collect()
}

/// Linear-time detection: drop `in`/`out` edges, compute SCCs, and report a
/// time edge whose endpoints share a component.
pub fn find_catastrophic(rrts: &Rrts) -> Option<CatastrophicCycle> {
    let rts = rrts.as_rts();
    let adj = quiet_adjacency(rts);
    let sccs = tarjan_scc(&adj);
    let u = rts.nodes().find(|&u| {
        rts.time_edge(u)
            .is_some_and(|e| sccs.same(u, e.target))
    })?;
    let e = rts.time_edge(u).expect("found above");
    let comp = sccs.comp[u];
    let back = bfs_path(&adj, e.target, u, |v| sccs.comp[v] == comp)
        .expect("same component");
    let mut cycle = Path::empty(u);
    cycle.push(
        u,
        crate::semantics::StepLabel::Time {
            forbidden: e.forbidden.clone(),
        },
        e.target,
    );
    let mut at = e.target;
    for v in back {
        let s = rts
            .steps(at)
            .find(|s| s.to == v && !(s.label.is_action(IN) || s.label.is_action(OUT)))
            .expect("edge of the quiet graph");
        cycle.push(s.from, s.label, s.to);
        at = v;
    }
    Some(CatastrophicCycle { cycle })
}

/// Cubic baseline: Warshall's transitive closure of the same graph, then a
/// check of every time edge. Returns the source of the first offending time
/// edge.
pub fn find_catastrophic_closure(rrts: &Rrts) -> Option<NodeId> {
    let rts = rrts.as_rts();
    let reach = transitive_closure(&quiet_adjacency(rts));
    rts.nodes().find(|&u| {
        rts.time_edge(u)
            .is_some_and(|e| e.target == u || bit(&reach[e.target], u))
    })
}
