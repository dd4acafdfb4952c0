//! The full analysis pipeline and its serialisable report.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    asymptotic_performance, check_response, find_catastrophic, reduce_rts, response_performance,
    Asymptotic, AsymptoticError, GraphSizes, Method, NotAResponseProcess, RpError,
};
use crate::semantics::{build_rts, NodeId, Path, Rts, SemanticsError, Step, DEFAULT_NODE_CAP};
use crate::syntax::{Program, IN, OMEGA, OUT};
use crate::Rational;

/// Bumped whenever the JSON layout of [`PerfReport`] changes.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub cap: usize,
    /// Methods to run for the asymptotic performance; with more than one the
    /// results must agree.
    pub methods: Vec<Method>,
    /// Values of `n` for which `rp(n)` is computed.
    pub rp: Vec<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            cap: DEFAULT_NODE_CAP,
            methods: vec![Method::Improved],
            rp: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    NotResponse(#[from] NotAResponseProcess),
    #[error("methods disagree: {baseline} by {first}, {other} by {second}")]
    MethodDisagreement {
        first: Method,
        baseline: Rational,
        second: Method,
        other: Rational,
    },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Exact rational in JSON form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: i64,
    pub den: i64,
    pub text: String,
}

impl From<Rational> for RationalJson {
    fn from(r: Rational) -> Self {
        RationalJson {
            num: *r.numer(),
            den: *r.denom(),
            text: r.to_string(),
        }
    }
}

/// A path of the reduced system with node labels and summary counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub start: NodeId,
    pub steps: Vec<Step>,
    /// Labels of the start node and of every step target.
    pub nodes: Vec<String>,
    pub trace: String,
    pub ins: usize,
    pub outs: usize,
    pub time_steps: usize,
}

impl Witness {
    pub fn new(rts: &Rts, path: &Path) -> Self {
        let nodes = std::iter::once(path.start)
            .chain(path.steps.iter().map(|s| s.to))
            .map(|n| rts.label(n).to_string())
            .collect();
        Witness {
            start: path.start,
            steps: path.steps.clone(),
            nodes,
            trace: path.trace(),
            ins: path.count_action(IN),
            outs: path.count_action(OUT),
            time_steps: path.count_time(),
        }
    }

    pub fn path(&self) -> Path {
        Path {
            start: self.start,
            steps: self.steps.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSizes {
    pub rts_nodes: usize,
    pub rts_edges: usize,
    pub rrts_nodes: usize,
    pub rrts_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub performance: RationalJson,
    pub throughput: RationalJson,
    pub methods: Vec<Method>,
    pub cycle: Witness,
    pub graphs: GraphSizes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RpEntry {
    pub value: u64,
    pub witness: Witness,
}

/// Result of [`analyze`]. Witness node ids refer to the reduced system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerfReport {
    pub version: u32,
    pub sizes: SystemSizes,
    pub catastrophic: Option<Witness>,
    pub asymptotic: Option<AsymptoticReport>,
    pub rp: BTreeMap<usize, RpEntry>,
    pub warnings: Vec<String>,
}

impl PerfReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Builds, checks, reduces and analyses the program.
pub fn analyze(program: &Program, config: &AnalysisConfig) -> Result<PerfReport, AnalysisError> {
    let rts = build_rts(program, config.cap)?;
    check_response(&rts)?;
    let rrts = reduce_rts(&rts);
    let mut report = PerfReport {
        version: REPORT_VERSION,
        sizes: SystemSizes {
            rts_nodes: rts.node_count(),
            rts_edges: rts.edge_count(),
            rrts_nodes: rrts.node_count(),
            rrts_edges: rrts.edge_count(),
        },
        catastrophic: None,
        asymptotic: None,
        rp: BTreeMap::new(),
        warnings: Vec::new(),
    };
    let extra: Vec<String> = rts
        .visible_alphabet()
        .iter()
        .filter(|a| ![IN, OUT, OMEGA].contains(&a.as_ref()))
        .map(|a| a.to_string())
        .collect();
    if !extra.is_empty() {
        report.warnings.push(format!(
            "visible actions other than in and out ({}): time steps before the last request \
             must be full, which may overestimate the delay",
            extra.join(", ")
        ));
    }

    if let Some(c) = find_catastrophic(&rrts) {
        report.catastrophic = Some(Witness::new(&rrts, &c.cycle));
        return Ok(report);
    }

    let mut results: Vec<(Method, Asymptotic)> = Vec::new();
    for &m in &config.methods {
        match asymptotic_performance(&rrts, m) {
            Ok(a) => results.push((m, a)),
            Err(AsymptoticError::NoCycle { .. }) => {
                if !report.warnings.iter().any(|w| w.starts_with("no cycle")) {
                    report
                        .warnings
                        .push("no cycle of full time steps: asymptotic performance undefined".into());
                }
            }
            Err(e @ AsymptoticError::ZeroThroughput { .. }) => {
                return Err(AnalysisError::Internal(e.to_string()));
            }
        }
    }
    if let Some((m0, a0)) = results.first() {
        for (m, a) in &results[1..] {
            if a.performance != a0.performance {
                return Err(AnalysisError::MethodDisagreement {
                    first: *m0,
                    baseline: a0.performance,
                    second: *m,
                    other: a.performance,
                });
            }
        }
        report.asymptotic = Some(AsymptoticReport {
            performance: a0.performance.into(),
            throughput: a0.throughput.into(),
            methods: results.iter().map(|(m, _)| *m).collect(),
            cycle: Witness::new(&rrts, &a0.cycle),
            graphs: a0.sizes,
        });
    }

    for &n in &config.rp {
        match response_performance(&rrts, n) {
            Ok(r) => {
                report.rp.insert(
                    n,
                    RpEntry {
                        value: r.value,
                        witness: Witness::new(&rrts, &r.witness),
                    },
                );
            }
            Err(RpError::ZeroRequests) => report.warnings.push("rp(0) is undefined; skipped".into()),
            Err(e) => return Err(AnalysisError::Internal(e.to_string())),
        }
    }
    Ok(report)
}

impl fmt::Display for PerfReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.sizes;
        writeln!(f, "RTS:  {} nodes, {} edges", s.rts_nodes, s.rts_edges)?;
        writeln!(f, "RRTS: {} nodes, {} edges", s.rrts_nodes, s.rrts_edges)?;
        match &self.catastrophic {
            Some(w) => {
                writeln!(f, "catastrophic cycle: {}", w.trace)?;
                for label in &w.nodes {
                    writeln!(f, "  {label}")?;
                }
            }
            None => writeln!(f, "catastrophic cycle: none")?,
        }
        if let Some(a) = &self.asymptotic {
            let methods: Vec<String> = a.methods.iter().map(|m| m.to_string()).collect();
            writeln!(
                f,
                "asymptotic performance: {} (throughput {}, {})",
                a.performance.text,
                a.throughput.text,
                methods.join(" = ")
            )?;
            writeln!(
                f,
                "  G: {}/{}, G': {}/{}",
                a.graphs.g_nodes, a.graphs.g_edges, a.graphs.g_prime_nodes, a.graphs.g_prime_edges
            )?;
            writeln!(f, "  bad cycle: {}", a.cycle.trace)?;
        }
        for (n, e) in &self.rp {
            writeln!(f, "rp({n}) = {}", e.value)?;
            writeln!(f, "  witness: {}", e.witness.trace)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
