//! Worst-case performance of response processes.
//!
//! A response process reads requests with `in` and answers them with `out`,
//! never answering more requests than it has read. Its performance is judged
//! against users that issue `n` urgent requests in parallel and wait for the
//! answers.

mod asymptotic;
mod balance;
mod catastrophic;
pub mod karp;
mod oracle;
mod report;
mod rp;

use std::ops::Deref;

use crate::semantics::{NodeId, Path, Rts, TimeEdge};
use crate::syntax::{IN, OMEGA, OUT};

pub use asymptotic::{
    analysis_graph, asymptotic_performance, g_prime, AnalysisGraph, Asymptotic, AsymptoticError,
    GPrime, GPrimeEdge, GraphSizes, Method,
};
pub use catastrophic::{find_catastrophic, find_catastrophic_closure, CatastrophicCycle};
pub use oracle::{oracle_rp, OracleError};
pub use report::{
    analyze, AnalysisConfig, AnalysisError, AsymptoticReport, PerfReport, RationalJson, RpEntry,
    SystemSizes, Witness, REPORT_VERSION,
};
pub use rp::{response_performance, RpError, RpResult};

use balance::{extreme_balances, negative_prefix_witness, Bound, Extreme};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a response process: `{}` emits more outs than ins", witness.trace())]
pub struct NotAResponseProcess {
    pub witness: Path,
}

/// Checks that no path from the root performs more `out`s than `in`s at any
/// point. On failure the witness ends with the offending `out`.
pub fn check_response(rts: &Rts) -> Result<(), NotAResponseProcess> {
    let balances = extreme_balances(rts, Extreme::Min, |_, _| true);
    match negative_prefix_witness(rts, &balances) {
        None => Ok(()),
        Some(witness) => Err(NotAResponseProcess { witness }),
    }
}

/// A refusal transition system without time steps that can never be full
/// when the process runs with a user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rrts {
    rts: Rts,
}

impl Rrts {
    pub fn as_rts(&self) -> &Rts {
        &self.rts
    }

    pub fn into_rts(self) -> Rts {
        self.rts
    }
}

impl Deref for Rrts {
    type Target = Rts;
    fn deref(&self) -> &Rts {
        &self.rts
    }
}

/// Which conditional time steps [`reduce_rts_with`] removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pruning {
    /// Remove a step iff both `in` and `out` are forbidden.
    BothInOut,
    /// Remove a step when no user state admits it: `out` or `ω` forbidden,
    /// or `in` forbidden at a node only ever reached with balance zero.
    /// Iterated until nothing changes.
    #[default]
    Unusable,
}

/// [`reduce_rts_with`] using [`Pruning::Unusable`].
pub fn reduce_rts(rts: &Rts) -> Rrts {
    reduce_rts_with(rts, Pruning::Unusable)
}

pub fn reduce_rts_with(rts: &Rts, pruning: Pruning) -> Rrts {
    let n = rts.node_count();
    let mut keep: Vec<bool> = rts.nodes().map(|u| rts.time_edge(u).is_some()).collect();
    match pruning {
        Pruning::BothInOut => {
            for u in 0..n {
                if let Some(e) = rts.time_edge(u) {
                    keep[u] = !(e.forbidden.contains(IN) && e.forbidden.contains(OUT));
                }
            }
        }
        Pruning::Unusable => {
            for u in 0..n {
                if let Some(e) = rts.time_edge(u) {
                    if e.forbidden.contains(OUT) || e.forbidden.contains(OMEGA) {
                        keep[u] = false;
                    }
                }
            }
            loop {
                let max = extreme_balances(rts, Extreme::Max, |u, _| keep[u]);
                let mut changed = false;
                for u in 0..n {
                    if !keep[u] {
                        continue;
                    }
                    let e = rts.time_edge(u).expect("kept edge exists");
                    if e.forbidden.contains(IN) && max.value[u] == Some(Bound::Finite(0)) {
                        keep[u] = false;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }
    let (rts, _) = rts.restrict(|u: NodeId, _: &TimeEdge| keep[u]);
    Rrts { rts }
}
