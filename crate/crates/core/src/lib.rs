//! Refusal semantics and worst-case performance analysis for PAFAS, a timed
//! process algebra in which every action has a maximal delay of one time unit.
//!
//! The pipeline mirrors the command-line tool:
//!
//! 1. [`parser::parse`] turns `.pafas` text into a [`syntax::ProgramEnv`], and
//!    [`syntax::check_well_formed`] produces a checked [`syntax::Program`].
//! 2. [`semantics::build_rts`] explores the refusal transition system.
//! 3. [`performance`] prunes it, looks for catastrophic cycles, computes the
//!    asymptotic performance and the exact response performance `rp(n)`.
//!
//! ```
//! use pafas::{casestudy, performance, semantics, syntax};
//!
//! let program = syntax::check_well_formed(casestudy::gen_fifo(1)).unwrap();
//! let rts = semantics::build_rts(&program, semantics::DEFAULT_NODE_CAP).unwrap();
//! let rrts = performance::reduce_rts(&rts);
//! assert!(performance::find_catastrophic(&rrts).is_none());
//! let rp = performance::response_performance(&rrts, 3).unwrap();
//! assert_eq!(rp.value, 6);
//! ```

pub mod casestudy;
pub mod export;
pub mod graph;
pub mod parser;
pub mod performance;
pub mod semantics;
pub mod syntax;

pub use num_rational::Ratio;

/// Exact rational used for throughputs and average performances.
pub type Rational = Ratio<i64>;

/// Wide rational for weight sums that may overflow `i64` on large graphs.
pub type WideRational = Ratio<i128>;

pub use performance::karp::Weight;
pub use semantics::{NodeId, Rts};
pub use syntax::{Action, ActionSet, Name, Program, ProgramEnv, Term};
