//! `pafas`: parse, analyse, export and benchmark PAFAS processes.
//!
//! Exit codes: 0 success, 1 I/O error, 2 syntax or well-formedness error,
//! 3 catastrophic cycle found, 4 state cap exceeded, 5 internal invariant
//! violated, 6 input is not a response process.

mod bench;

use std::fs;
use std::io::Write as _;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pafas::casestudy::{source, BufferKind, BufferSpec, Builtin, BuiltinError};
use pafas::export::{from_xml, to_dot, to_xml, DotOptions, XmlError};
use pafas::parser::{parse, ParseError};
use pafas::performance::{
    analyze, find_catastrophic, reduce_rts, AnalysisConfig, AnalysisError, Method,
};
use pafas::semantics::{build_rts, node_cap_from_env, SemanticsError, NODE_CAP_ENV};
use pafas::syntax::{check_well_formed, Program, WellFormedError};

#[derive(Parser)]
#[command(name = "pafas", version, about = "Worst-case performance analysis for PAFAS processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a file parses and is well formed.
    Parse {
        file: PathBuf,
        /// Print the normalised program.
        #[arg(long)]
        print: bool,
    },
    /// Catastrophic cycles, asymptotic performance and rp(n).
    Analyze(AnalyzeArgs),
    /// Write the transition system as XML or DOT.
    Export(ExportArgs),
    /// Read an XML transition system, validate it and re-emit it.
    Import {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Xml)]
        format: GraphFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time the baseline and improved algorithms on a buffer family.
    Bench(bench::BenchArgs),
    /// Print a builtin model as `.pafas` source, or write the whole corpus.
    Gen {
        /// `kind:N` with kind one of fifo, pipe, buff, user.
        #[arg(required_unless_present = "corpus")]
        builtin: Option<String>,
        /// Write `kind_N.pafas` for every buffer with N in 1..=4 into DIR.
        #[arg(long, value_name = "DIR", conflicts_with = "builtin")]
        corpus: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// A `.pafas` file.
    #[arg(required_unless_present = "builtin")]
    file: Option<PathBuf>,
    /// A builtin model `kind:N` (fifo, pipe, buff, user).
    #[arg(long, conflicts_with = "file")]
    builtin: Option<String>,
    /// Node cap for state exploration (default from PAFAS_NODE_CAP).
    #[arg(long)]
    cap: Option<usize>,
}

impl Input {
    fn cap(&self) -> usize {
        self.cap.unwrap_or_else(node_cap_from_env)
    }

    fn program(&self) -> Result<Program, CliError> {
        match (&self.builtin, &self.file) {
            (Some(b), _) => Ok(b.parse::<Builtin>()?.program()),
            (None, Some(f)) => load(f),
            (None, None) => unreachable!("clap requires one input"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Baseline,
    Improved,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Xml,
    Dot,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: Input,
    /// Values of n for rp(n): `a..b` (inclusive) or a single number.
    #[arg(long, value_parser = parse_range)]
    rp: Option<Sizes>,
    #[arg(long, value_enum, default_value_t = MethodArg::Improved)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value_t = GraphFormat::Xml)]
    format: GraphFormat,
    /// Export the reduced system instead of the full one.
    #[arg(long)]
    reduced: bool,
    /// In DOT output, mark a catastrophic cycle if there is one.
    #[arg(long)]
    highlight: bool,
    /// In DOT output, label nodes with their terms.
    #[arg(long)]
    terms: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// A list of sizes given as `a..b` or a single number.
#[derive(Clone, Debug)]
pub(crate) struct Sizes(pub Vec<usize>);

fn parse_range(s: &str) -> Result<Sizes, String> {
    let bad = || format!("`{s}` is not a number or a range a..b");
    match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(format!("empty range `{s}`"));
            }
            Ok(Sizes((a..=b).collect()))
        }
        None => Ok(Sizes(vec![s.trim().parse().map_err(|_| bad())?])),
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        source: ParseError,
    },
    #[error(transparent)]
    WellFormed(#[from] WellFormedError),
    #[error(transparent)]
    Builtin(#[from] BuiltinError),
    #[error("{path}: {source}")]
    Xml { path: String, source: XmlError },
    #[error("{0}; raise it with --cap or {NODE_CAP_ENV}")]
    Cap(SemanticsError),
    #[error("catastrophic cycle found")]
    Catastrophic,
    #[error("{0}")]
    Internal(String),
    #[error(transparent)]
    NotResponse(pafas::performance::NotAResponseProcess),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse { .. } | CliError::WellFormed(_) | CliError::Builtin(_) => 2,
            CliError::Xml { .. } => 2,
            CliError::Catastrophic => 3,
            CliError::Cap(_) => 4,
            CliError::Internal(_) => 5,
            CliError::NotResponse(_) => 6,
        }
    }
}

impl From<SemanticsError> for CliError {
    fn from(e: SemanticsError) -> Self {
        CliError::Cap(e)
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Semantics(e) => CliError::Cap(e),
            AnalysisError::NotResponse(e) => CliError::NotResponse(e),
            e @ (AnalysisError::MethodDisagreement { .. } | AnalysisError::Internal(_)) => {
                CliError::Internal(e.to_string())
            }
        }
    }
}

fn read(path: &FsPath) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(path: &FsPath) -> Result<Program, CliError> {
    let src = read(path)?;
    let env = parse(&src).map_err(|source| {
        let pos = source.position();
        CliError::Parse {
            path: path.display().to_string(),
            line: pos.line,
            column: pos.column,
            source,
        }
    })?;
    Ok(check_well_formed(env)?)
}

fn emit(output: Option<&FsPath>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let program = args.input.program()?;
    let methods = match args.method {
        MethodArg::Baseline => vec![Method::Baseline],
        MethodArg::Improved => vec![Method::Improved],
        MethodArg::Both => vec![Method::Baseline, Method::Improved],
    };
    let config = AnalysisConfig {
        cap: args.input.cap(),
        methods,
        rp: args.rp.clone().map(|s| s.0).unwrap_or_default(),
    };
    let report = analyze(&program, &config)?;
    let text = match args.format {
        ReportFormat::Text => report.to_string(),
        ReportFormat::Json => report.to_json() + "\n",
    };
    emit(args.output.as_deref(), &text)?;
    if report.catastrophic.is_some() {
        return Err(CliError::Catastrophic);
    }
    Ok(())
}

fn cmd_export(args: &ExportArgs) -> Result<(), CliError> {
    let program = args.input.program()?;
    let rts = build_rts(&program, args.input.cap())?;
    let rrts = reduce_rts(&rts);
    let highlight = if args.highlight {
        find_catastrophic(&rrts).map(|c| c.cycle)
    } else {
        None
    };
    let graph = if args.reduced || highlight.is_some() {
        rrts.as_rts()
    } else {
        &rts
    };
    let text = match args.format {
        GraphFormat::Xml => to_xml(graph),
        GraphFormat::Dot => to_dot(
            graph,
            &DotOptions {
                name: String::new(),
                highlight,
                term_labels: args.terms,
            },
        ),
    };
    emit(args.output.as_deref(), &text)
}

fn cmd_import(file: &FsPath, format: GraphFormat, output: Option<&FsPath>) -> Result<(), CliError> {
    let src = read(file)?;
    let rts = from_xml(&src).map_err(|source| CliError::Xml {
        path: file.display().to_string(),
        source,
    })?;
    let text = match format {
        GraphFormat::Xml => to_xml(&rts),
        GraphFormat::Dot => to_dot(&rts, &DotOptions::default()),
    };
    eprintln!(
        "{}: {} nodes, {} action edges, {} time edges",
        file.display(),
        rts.node_count(),
        rts.action_edge_count(),
        rts.time_edge_count()
    );
    emit(output, &text)
}

fn cmd_gen(builtin: Option<&str>, corpus: Option<&FsPath>) -> Result<(), CliError> {
    if let Some(dir) = corpus {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for kind in BufferKind::ALL {
            for n in 1..=4 {
                let spec = BufferSpec::new(kind, n)?;
                let text = format!("# {spec}, capacity {}\n{}", spec.capacity(), source(&spec.env()));
                emit(Some(&dir.join(format!("{kind}_{n}.pafas"))), &text)?;
            }
        }
        return Ok(());
    }
    let b: Builtin = builtin.expect("clap requires one").parse()?;
    emit(None, &source(&b.env()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Parse { file, print } => {
            let program = load(&file)?;
            if print {
                emit(None, &source(program.env()))?;
            } else {
                eprintln!(
                    "{}: ok ({} definitions)",
                    file.display(),
                    program.definitions().len()
                );
            }
            Ok(())
        }
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Export(args) => cmd_export(&args),
        Command::Import {
            file,
            format,
            output,
        } => cmd_import(&file, format, output.as_deref()),
        Command::Bench(args) => bench::run(&args),
        Command::Gen { builtin, corpus } => cmd_gen(builtin.as_deref(), corpus.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Catastrophic) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
