//! Timing table comparing the baseline and improved algorithms.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, ValueEnum};
use serde::Serialize;

use pafas::casestudy::{BufferKind, BufferSpec};
use pafas::performance::{
    analysis_graph, asymptotic_performance, find_catastrophic, find_catastrophic_closure, g_prime,
    reduce_rts, Method,
};
use pafas::semantics::{build_rts, node_cap_from_env};

use crate::{emit, parse_range, CliError, Sizes};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Fifo,
    Pipe,
    Buff,
}

impl From<Family> for BufferKind {
    fn from(f: Family) -> Self {
        match f {
            Family::Fifo => BufferKind::Fifo,
            Family::Pipe => BufferKind::Pipe,
            Family::Buff => BufferKind::Buff,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Text,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Buffer families to run.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Family::Pipe, Family::Buff])]
    family: Vec<Family>,
    /// Values of N: `a..b` or a single number.
    #[arg(long, value_parser = parse_range, default_value = "1..4")]
    sizes: Sizes,
    /// Runs per measurement; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    repeat: u32,
    /// Skip the cubic baselines on graphs with more nodes than this.
    #[arg(long, default_value_t = 2500)]
    baseline_limit: usize,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Serialize, Default)]
struct Row {
    family: String,
    n: usize,
    cells: usize,
    rts_nodes: Option<usize>,
    rts_edges: Option<usize>,
    g_nodes: Option<usize>,
    g_edges: Option<usize>,
    g_prime_nodes: Option<usize>,
    g_prime_edges: Option<usize>,
    scc_ms: Option<f64>,
    closure_ms: Option<f64>,
    baseline_ms: Option<f64>,
    improved_ms: Option<f64>,
    /// Baseline time over improved time for building `G'`.
    speedup: Option<f64>,
    asymptotic: Option<String>,
    status: String,
}

fn fastest<T>(repeat: u32, mut f: impl FnMut() -> T) -> (T, Duration) {
    let start = Instant::now();
    let mut out = f();
    let mut best = start.elapsed();
    for _ in 1..repeat.max(1) {
        let start = Instant::now();
        out = f();
        best = best.min(start.elapsed());
    }
    (out, best)
}

fn ms(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

fn measure(spec: BufferSpec, args: &BenchArgs, cap: usize) -> Result<Row, CliError> {
    let mut row = Row {
        family: spec.kind.to_string(),
        n: spec.n,
        cells: spec.capacity(),
        ..Default::default()
    };
    let rts = match build_rts(&spec.program(), cap) {
        Ok(r) => r,
        Err(e) => {
            row.status = format!("skipped: {e}");
            return Ok(row);
        }
    };
    row.rts_nodes = Some(rts.node_count());
    row.rts_edges = Some(rts.edge_count());
    let rrts = reduce_rts(&rts);

    let (cat, t) = fastest(args.repeat, || find_catastrophic(&rrts).is_some());
    row.scc_ms = Some(ms(t));
    if rrts.node_count() <= args.baseline_limit {
        let (cat2, t) = fastest(args.repeat, || find_catastrophic_closure(&rrts).is_some());
        row.closure_ms = Some(ms(t));
        if cat != cat2 {
            return Err(CliError::Internal(format!(
                "{spec}: catastrophic verdicts differ between SCC and closure"
            )));
        }
    }
    if cat {
        row.status = "catastrophic".into();
        return Ok(row);
    }

    let ag = analysis_graph(&rrts);
    row.g_nodes = Some(ag.node_count());
    row.g_edges = Some(ag.edge_count());
    let (improved, t) = fastest(args.repeat, || g_prime(&ag, Method::Improved));
    row.improved_ms = Some(ms(t));
    row.g_prime_nodes = Some(improved.nodes);
    row.g_prime_edges = Some(improved.edges.len());
    if ag.node_count() <= args.baseline_limit {
        let (baseline, tb) = fastest(args.repeat, || g_prime(&ag, Method::Baseline));
        row.baseline_ms = Some(ms(tb));
        row.speedup = Some((tb.as_secs_f64() / t.as_secs_f64().max(1e-9) * 100.0).round() / 100.0);
        if baseline != improved {
            return Err(CliError::Internal(format!("{spec}: G' differs between methods")));
        }
    }
    row.asymptotic = asymptotic_performance(&rrts, Method::Improved)
        .ok()
        .map(|a| a.performance.to_string());
    row.status = if row.baseline_ms.is_some() { "ok" } else { "ok (baseline skipped)" }.into();
    Ok(row)
}

fn text_table(rows: &[Row]) -> String {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    let mut out = format!(
        "{:<6} {:>3} {:>5} {:>15} {:>15} {:>18} {:>9} {:>10} {:>11} {:>11} {:>8} {:>6}  {}\n",
        "family", "N", "cells", "RTS", "G", "G'", "scc ms", "closure ms", "baseline ms", "improved ms", "speedup", "a", "status"
    );
    for r in rows {
        let pair = |a: Option<usize>, b: Option<usize>| match (a, b) {
            (Some(a), Some(b)) => format!("{a}/{b}"),
            _ => "-".into(),
        };
        let f = |v: Option<f64>| opt(v.map(|x| format!("{x:.3}")));
        out.push_str(&format!(
            "{:<6} {:>3} {:>5} {:>15} {:>15} {:>18} {:>9} {:>10} {:>11} {:>11} {:>8} {:>6}  {}\n",
            r.family,
            r.n,
            r.cells,
            pair(r.rts_nodes, r.rts_edges),
            pair(r.g_nodes, r.g_edges),
            pair(r.g_prime_nodes, r.g_prime_edges),
            f(r.scc_ms),
            f(r.closure_ms),
            f(r.baseline_ms),
            f(r.improved_ms),
            opt(r.speedup.map(|s| format!("{s:.2}"))),
            opt(r.asymptotic.clone()),
            r.status
        ));
    }
    out
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let cap = args.cap.unwrap_or_else(node_cap_from_env);
    let mut rows = Vec::new();
    for &family in &args.family {
        for &n in &args.sizes.0 {
            let spec = BufferSpec::new(family.into(), n)?;
            rows.push(measure(spec, args, cap)?);
        }
    }
    let text = match args.format {
        TableFormat::Text => text_table(&rows),
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r).map_err(|e| CliError::Internal(e.to_string()))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?)
                .expect("csv output is utf-8")
        }
    };
    emit(args.output.as_deref(), &text)
}
