//! Reference value of `rp(n)` by running the process against the user.
//!
//! The process is composed with `n` parallel users that each request once and
//! then wait for the answer. The value is the most full time steps on a path of
//! the composition that stops before the final `ω`. The state space is far
//! larger than the one [`response_performance`](super::response_performance)
//! explores, so this is meant for tests and small cross-checks.

use crate::casestudy::gen_user;
use crate::graph::{reachable, tarjan_scc};
use crate::semantics::{build_rts, compose_parallel, SemanticsError};
use crate::syntax::{Program, SyncSet, OMEGA};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("the composition can let time pass forever before the users finish")]
    Unbounded,
}

pub fn oracle_rp(program: &Program, n: usize, cap: usize) -> Result<u64, OracleError> {
    let process = build_rts(program, cap)?;
    let user_program = Program::from_term(gen_user(n)).expect("users are well formed");
    let user = build_rts(&user_program, cap)?;
    let sys = compose_parallel(&process, &user, &SyncSet::AllButOmega, cap)?;

    let adj: Vec<Vec<(usize, u64)>> = sys
        .nodes()
        .map(|u| {
            let mut es: Vec<(usize, u64)> = sys
                .actions(u)
                .iter()
                .filter(|(a, _)| !a.is(OMEGA))
                .map(|(_, v)| (*v, 0))
                .collect();
            if let Some(e) = sys.time_edge(u).filter(|e| e.is_full()) {
                es.push((e.target, 1));
            }
            es
        })
        .collect();
    let plain: Vec<Vec<usize>> = adj.iter().map(|es| es.iter().map(|e| e.0).collect()).collect();
    let sccs = tarjan_scc(&plain);
    // states behind the final ω do not count
    let live = reachable(&plain, sys.root());
    if adj
        .iter()
        .enumerate()
        .any(|(u, es)| live[u] && es.iter().any(|&(v, w)| w > 0 && sccs.same(u, v)))
    {
        return Err(OracleError::Unbounded);
    }

    // components are numbered in reverse topological order
    let mut best = vec![None::<u64>; sccs.count()];
    best[sccs.comp[sys.root()]] = Some(0);
    for c in (0..sccs.count()).rev() {
        let Some(bc) = best[c] else { continue };
        for &u in &sccs.members[c] {
            for &(v, w) in &adj[u] {
                let d = sccs.comp[v];
                if d != c {
                    best[d] = Some(best[d].map_or(bc + w, |b| b.max(bc + w)));
                }
            }
        }
    }
    Ok(best.into_iter().flatten().max().unwrap_or(0))
}
