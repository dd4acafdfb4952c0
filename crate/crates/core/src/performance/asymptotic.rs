//! Asymptotic performance: the worst ratio of full time steps to `in`s over
//! cycles reachable through full time steps only.
//!
//! `G` keeps the full time steps and the action edges of the reduced system.
//! Every edge `(u, v')` of `G'` stands for a path `u ⇝ v` without time steps
//! that performs as few `in`s as possible, followed by the full time step
//! `(v, v')`; its cost is that number of `in`s. The minimum mean cycle of `G'`
//! is the throughput `t`, and the asymptotic performance is `1/t`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::karp::min_mean_cycle;
use super::Rrts;
use crate::graph::{floyd_warshall, zero_one_bfs, UNREACHABLE};
use crate::semantics::{NodeId, Path, Rts, StepLabel};
use crate::syntax::{ActionSet, IN};
use crate::Rational;

/// How the shortest-path costs of `G'` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// All-pairs matrix by Floyd-Warshall on `G₀`.
    Baseline,
    /// One 0/1-weight Dijkstra run on reversed `G₀` per full time step.
    Improved,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Baseline => "baseline",
            Method::Improved => "improved",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Method::Baseline),
            "improved" => Ok(Method::Improved),
            _ => Err(format!("unknown method `{s}` (expected baseline or improved)")),
        }
    }
}

/// `G` together with the map back to the reduced system.
#[derive(Debug, Clone)]
pub struct AnalysisGraph {
    pub g: Rts,
    /// `to_rrts[v]` is the reduced-system node of `G` node `v`.
    pub to_rrts: Vec<NodeId>,
    /// `G₀` successors with weight 1 for `in`, 0 otherwise.
    g0: Vec<Vec<(usize, u8)>>,
}

impl AnalysisGraph {
    pub fn node_count(&self) -> usize {
        self.g.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.g.edge_count()
    }

    fn full_steps(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.g
            .nodes()
            .filter_map(|v| self.g.time_edge(v).map(|e| (v, e.target)))
    }
}

/// Builds `G` (full time steps and action edges, reachable part) and `G₀`.
pub fn analysis_graph(rrts: &Rrts) -> AnalysisGraph {
    let (g, map) = rrts.restrict(|_, e| e.is_full());
    let mut to_rrts = vec![0; g.node_count()];
    for (old, new) in map.iter().enumerate() {
        if let Some(new) = new {
            to_rrts[*new] = old;
        }
    }
    let g0 = g
        .nodes()
        .map(|u| {
            g.actions(u)
                .iter()
                .map(|(a, v)| (*v, a.is(IN) as u8))
                .collect()
        })
        .collect();
    AnalysisGraph { g, to_rrts, g0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GPrimeEdge {
    pub from: usize,
    pub to: usize,
    pub cost: u32,
    /// Source of the time step that ends this edge's path.
    pub via: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GPrime {
    pub nodes: usize,
    /// Ordered by time-step source, then by path start.
    pub edges: Vec<GPrimeEdge>,
}

/// Constructs `G'` with the chosen method. Both methods produce the same edge
/// list in the same order.
pub fn g_prime(ag: &AnalysisGraph, method: Method) -> GPrime {
    let n = ag.node_count();
    let mut edges = Vec::new();
    match method {
        Method::Baseline => {
            let list: Vec<(usize, usize, u32)> = ag
                .g0
                .iter()
                .enumerate()
                .flat_map(|(u, es)| es.iter().map(move |&(v, w)| (u, v, w as u32)))
                .collect();
            let ap = floyd_warshall(n, &list);
            for (v, v2) in ag.full_steps() {
                for u in 0..n {
                    if let Some(d) = ap.dist(u, v) {
                        edges.push(GPrimeEdge {
                            from: u,
                            to: v2,
                            cost: d,
                            via: v,
                        });
                    }
                }
            }
        }
        Method::Improved => {
            let rev = reverse(&ag.g0);
            for (v, v2) in ag.full_steps() {
                let (dist, _) = zero_one_bfs(&rev, v);
                for (u, &d) in dist.iter().enumerate() {
                    if d != UNREACHABLE {
                        edges.push(GPrimeEdge {
                            from: u,
                            to: v2,
                            cost: d,
                            via: v,
                        });
                    }
                }
            }
        }
    }
    GPrime { nodes: n, edges }
}

fn reverse(adj: &[Vec<(usize, u8)>]) -> Vec<Vec<(usize, u8)>> {
    let mut rev = vec![Vec::new(); adj.len()];
    for (u, es) in adj.iter().enumerate() {
        for &(v, w) in es {
            rev[v].push((u, w));
        }
    }
    rev
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSizes {
    pub g_nodes: usize,
    pub g_edges: usize,
    pub g_prime_nodes: usize,
    pub g_prime_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Asymptotic {
    /// Full time steps per `in` on a bad cycle.
    pub performance: Rational,
    /// `in`s per full time step, the inverse.
    pub throughput: Rational,
    /// A bad cycle in the reduced system.
    pub cycle: Path,
    pub sizes: GraphSizes,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AsymptoticError {
    #[error("no cycle of full time steps is reachable; the asymptotic performance is undefined")]
    NoCycle { sizes: GraphSizes },
    #[error("a reachable cycle of full time steps performs no `in`: `{}`", cycle.trace())]
    ZeroThroughput { cycle: Path, sizes: GraphSizes },
}

/// Computes the asymptotic performance of a catastrophic-free reduced system.
pub fn asymptotic_performance(rrts: &Rrts, method: Method) -> Result<Asymptotic, AsymptoticError> {
    let ag = analysis_graph(rrts);
    let gp = g_prime(&ag, method);
    let sizes = GraphSizes {
        g_nodes: ag.node_count(),
        g_edges: ag.edge_count(),
        g_prime_nodes: gp.nodes,
        g_prime_edges: gp.edges.len(),
    };

    // parallel edges: keep the cheapest, then the earliest
    let mut best: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, e) in gp.edges.iter().enumerate() {
        best.entry((e.from, e.to))
            .and_modify(|j| {
                if e.cost < gp.edges[*j].cost {
                    *j = i;
                }
            })
            .or_insert(i);
    }
    let mut kept: Vec<usize> = best.into_values().collect();
    kept.sort_unstable();
    let weighted: Vec<(usize, usize, i64)> = kept
        .iter()
        .map(|&i| (gp.edges[i].from, gp.edges[i].to, gp.edges[i].cost as i64))
        .collect();

    let Some(mc) = min_mean_cycle(gp.nodes, &weighted) else {
        return Err(AsymptoticError::NoCycle { sizes });
    };
    let cycle_edges: Vec<GPrimeEdge> = mc.edges.iter().map(|&k| gp.edges[kept[k]]).collect();
    let cycle = expand_cycle(&ag, &cycle_edges, method);
    debug_assert_eq!(
        Ratio::new(cycle.count_action(IN) as i64, cycle.count_time() as i64),
        mc.mean
    );
    if mc.mean == Ratio::from_integer(0) {
        return Err(AsymptoticError::ZeroThroughput { cycle, sizes });
    }
    Ok(Asymptotic {
        performance: mc.mean.recip(),
        throughput: mc.mean,
        cycle,
        sizes,
    })
}

/// Turns `G'` edges into the corresponding closed walk, in reduced-system ids.
fn expand_cycle(ag: &AnalysisGraph, cycle: &[GPrimeEdge], method: Method) -> Path {
    let start = ag.to_rrts[cycle[0].from];
    let mut path = Path::empty(start);
    let ap = match method {
        Method::Baseline => {
            let list: Vec<(usize, usize, u32)> = ag
                .g0
                .iter()
                .enumerate()
                .flat_map(|(u, es)| es.iter().map(move |&(v, w)| (u, v, w as u32)))
                .collect();
            Some(floyd_warshall(ag.node_count(), &list))
        }
        Method::Improved => None,
    };
    let rev = reverse(&ag.g0);
    for e in cycle {
        let hops: Vec<usize> = match &ap {
            Some(ap) => ap.path(e.from, e.via).expect("finite distance"),
            None => {
                let (_, pred) = zero_one_bfs(&rev, e.via);
                let mut hops = Vec::new();
                let mut at = e.from;
                while at != e.via {
                    at = pred[at];
                    hops.push(at);
                }
                hops
            }
        };
        let mut at = e.from;
        for h in hops {
            let w = ag.g0[at]
                .iter()
                .filter(|(v, _)| *v == h)
                .map(|(_, w)| *w)
                .min()
                .expect("G0 edge");
            let (action, _) = ag
                .g
                .actions(at)
                .iter()
                .find(|(a, v)| *v == h && (a.is(IN) as u8) == w)
                .expect("G edge");
            path.push(ag.to_rrts[at], StepLabel::Action { action: action.clone() }, ag.to_rrts[h]);
            at = h;
        }
        path.push(
            ag.to_rrts[e.via],
            StepLabel::Time {
                forbidden: ActionSet::new(),
            },
            ag.to_rrts[e.to],
        );
    }
    path
}
