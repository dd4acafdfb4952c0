//! Generators for the three bounded-buffer implementations and for the users
//! that drive them.
//!
//! Every buffer has capacity `N + 2` and reads with `in`, writes with `out`:
//!
//! * `fifo`: a single sequential process counting its contents.
//! * `pipe`: `N + 2` one-place cells in a chain; items enter at the last cell
//!   and move one cell per handshake towards cell 0.
//! * `buff`: an input cell, an output cell and a ring of `N` storage cells run
//!   by a controller that tracks the ring's head and fill level.
//!
//! Generated programs use named equations and print as ordinary `.pafas`
//! source via [`source`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::parser::render;
use crate::syntax::{
    check_well_formed, Action, ActionSet, Name, Program, ProgramEnv, RelabelFn, SyncSet, Term, IN,
    OMEGA, OUT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BufferKind {
    Fifo,
    Pipe,
    Buff,
}

impl BufferKind {
    pub const ALL: [BufferKind; 3] = [BufferKind::Fifo, BufferKind::Pipe, BufferKind::Buff];
}

impl fmt::Display for BufferKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BufferKind::Fifo => "fifo",
            BufferKind::Pipe => "pipe",
            BufferKind::Buff => "buff",
        })
    }
}

impl FromStr for BufferKind {
    type Err = BuiltinError;
    fn from_str(s: &str) -> Result<Self, BuiltinError> {
        match s {
            "fifo" => Ok(BufferKind::Fifo),
            "pipe" => Ok(BufferKind::Pipe),
            "buff" => Ok(BufferKind::Buff),
            _ => Err(BuiltinError::UnknownKind(s.to_string())),
        }
    }
}

/// A buffer family and its parameter `N ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BufferSpec {
    pub kind: BufferKind,
    pub n: usize,
}

impl BufferSpec {
    pub fn new(kind: BufferKind, n: usize) -> Result<Self, BuiltinError> {
        if n == 0 {
            return Err(BuiltinError::ZeroParameter(kind.to_string()));
        }
        Ok(BufferSpec { kind, n })
    }

    pub fn capacity(&self) -> usize {
        self.n + 2
    }

    pub fn env(&self) -> ProgramEnv {
        match self.kind {
            BufferKind::Fifo => gen_fifo(self.n),
            BufferKind::Pipe => gen_pipe(self.n),
            BufferKind::Buff => gen_buff(self.n),
        }
    }

    pub fn program(&self) -> Program {
        check_well_formed(self.env()).expect("generated buffers are well formed")
    }
}

impl fmt::Display for BufferSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuiltinError {
    #[error("unknown builtin `{0}` (expected fifo, pipe, buff or user)")]
    UnknownKind(String),
    #[error("builtin `{0}` needs the form kind:N")]
    Malformed(String),
    #[error("builtin `{0}` needs a parameter of at least 1")]
    ZeroParameter(String),
}

/// A builtin model named on the command line as `kind:N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Buffer(BufferSpec),
    /// `n` parallel users.
    User(usize),
}

impl Builtin {
    pub fn env(&self) -> ProgramEnv {
        match self {
            Builtin::Buffer(b) => b.env(),
            Builtin::User(n) => ProgramEnv::new(gen_user(*n)),
        }
    }

    pub fn program(&self) -> Program {
        check_well_formed(self.env()).expect("generated programs are well formed")
    }
}

impl FromStr for Builtin {
    type Err = BuiltinError;
    fn from_str(s: &str) -> Result<Self, BuiltinError> {
        let (kind, n) = s
            .split_once(':')
            .ok_or_else(|| BuiltinError::Malformed(s.to_string()))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| BuiltinError::Malformed(s.to_string()))?;
        match kind.trim() {
            "user" if n == 0 => Err(BuiltinError::ZeroParameter(s.to_string())),
            "user" => Ok(Builtin::User(n)),
            k => BufferSpec::new(k.parse()?, n).map(Builtin::Buffer),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Buffer(b) => b.fmt(f),
            Builtin::User(n) => write!(f, "user:{n}"),
        }
    }
}

fn name(s: impl AsRef<str>) -> Name {
    Name::from(s.as_ref())
}

fn act(s: impl AsRef<str>) -> Action {
    Action::visible(s.as_ref())
}

fn sync<I: IntoIterator<Item = Name>>(names: I) -> SyncSet {
    SyncSet::Finite(names.into_iter().collect())
}

/// The one-place cell `cell = in.cell_full; cell_full = out.cell`.
fn add_cell(env: &mut ProgramEnv) -> Term {
    env.definitions.insert(
        name("cell"),
        Term::prefix(act(IN), Term::constant("cell_full")),
    );
    env.definitions.insert(
        name("cell_full"),
        Term::prefix(act(OUT), Term::constant("cell")),
    );
    Term::constant("cell")
}

fn fifo_state(i: usize) -> Term {
    Term::constant(&format!("fifo_{i}"))
}

/// The counter buffer with states `fifo_0 … fifo_{N+2}`.
///
/// # Panics
/// If `n == 0`.
pub fn gen_fifo(n: usize) -> ProgramEnv {
    assert!(n >= 1, "fifo needs N >= 1");
    let top = n + 2;
    let mut env = ProgramEnv::new(fifo_state(0));
    for i in 0..=top {
        let push = Term::prefix(act(IN), fifo_state(i + 1));
        let pop = || Term::prefix(act(OUT), fifo_state(i - 1));
        let body = match i {
            0 => push,
            i if i == top => pop(),
            _ => Term::choice(push, pop()),
        };
        env.definitions.insert(name(format!("fifo_{i}")), body);
    }
    env
}

/// Handshake action between pipe cells `i` and `i + 1`.
fn delta(i: usize) -> Name {
    name(format!("d{i}"))
}

/// The chain of `N + 2` cells. Cell `i` reads on `d{i}` and writes on
/// `d{i-1}`; cell `N + 1` reads `in` and cell 0 writes `out`.
///
/// # Panics
/// If `n == 0`.
pub fn gen_pipe(n: usize) -> ProgramEnv {
    assert!(n >= 1, "pipe needs N >= 1");
    let mut env = ProgramEnv::new(Term::nil());
    let cell = add_cell(&mut env);
    let relabelled = |i: usize| {
        let mut pairs = Vec::new();
        if i <= n {
            pairs.push((name(IN), Action::Visible(delta(i))));
        }
        if (1..=n + 1).contains(&i) {
            pairs.push((name(OUT), Action::Visible(delta(i - 1))));
        }
        Term::relabel(cell.clone(), RelabelFn::new(pairs))
    };
    let mut chain = relabelled(0);
    for i in 1..=n + 1 {
        chain = Term::parallel(chain, relabelled(i), sync([delta(i - 1)]));
    }
    env.main = Term::hide(chain, (0..=n + 1).map(delta));
    env
}

/// State name of the ring controller. `x`/`y` record whether the input and
/// output cells are full (`f`) or empty (`e`), `i` is the ring's head and `m`
/// its fill level.
fn bc_name(x: bool, y: bool, i: usize, m: usize) -> Name {
    let flag = |b: bool| if b { 'f' } else { 'e' };
    name(format!("bc_{}_{}_{i}_{m}", flag(x), flag(y)))
}

fn bc(x: bool, y: bool, i: usize, m: usize) -> Term {
    Term::constant(&bc_name(x, y, i, m))
}

fn write(i: usize) -> Name {
    name(format!("w{i}"))
}

fn read(i: usize) -> Name {
    name(format!("r{i}"))
}

/// Ring buffer: `N` storage cells interleaved, driven by the controller
/// `bc_x_y_i_m`, with every storage action hidden.
///
/// # Panics
/// If `n == 0`.
pub fn gen_buff(n: usize) -> ProgramEnv {
    assert!(n >= 1, "buff needs N >= 1");
    let mut env = ProgramEnv::new(Term::nil());
    let cell = add_cell(&mut env);
    let plus = |a: usize, b: usize| (a + b) % n;
    let pre = |a: Name, t: Term| Term::prefix(Action::Visible(a), t);

    for (x, y) in [(false, false), (true, false), (false, true), (true, true)] {
        for i in 0..n {
            for m in 0..=n {
                let body = match (x, y) {
                    (false, false) if m == 0 => pre(name(IN), bc(true, false, i, 0)),
                    (false, false) => Term::choice(
                        pre(name(IN), bc(true, false, i, m)),
                        pre(read(i), bc(false, true, plus(i, 1), m - 1)),
                    ),
                    (true, false) if m == 0 => pre(write(i), bc(false, false, i, 1)),
                    (true, false) if m < n => Term::choice(
                        pre(write(plus(i, m)), bc(false, false, i, m + 1)),
                        pre(read(i), bc(true, true, plus(i, 1), m - 1)),
                    ),
                    (true, false) => pre(read(i), bc(true, true, plus(i, 1), n - 1)),
                    (false, true) => Term::choice(
                        pre(name(IN), bc(true, true, i, m)),
                        pre(name(OUT), bc(false, false, i, m)),
                    ),
                    (true, true) if m < n => Term::choice(
                        pre(write(plus(i, m)), bc(false, true, i, m + 1)),
                        pre(name(OUT), bc(true, false, i, m)),
                    ),
                    (true, true) => pre(name(OUT), bc(true, false, i, n)),
                };
                env.definitions.insert(bc_name(x, y, i, m), body);
            }
        }
    }

    let storage = |i: usize| {
        Term::relabel(
            cell.clone(),
            RelabelFn::new([
                (name(IN), Action::Visible(write(i))),
                (name(OUT), Action::Visible(read(i))),
            ]),
        )
    };
    let mut mem = storage(0);
    for i in 1..n {
        mem = Term::parallel(mem, storage(i), SyncSet::empty());
    }
    let ring: ActionSet = (0..n).flat_map(|i| [write(i), read(i)]).collect();
    let hidden: Vec<Name> = ring.iter().cloned().collect();
    let sys = Term::parallel(mem, bc(false, false, 0, 0), SyncSet::Finite(ring));
    env.main = Term::hide(sys, hidden);
    env
}

/// `n` users, each requesting once, waiting for the answer and signalling
/// `ω`; all prefixes urgent and the `ω`s synchronised.
///
/// # Panics
/// If `n == 0`.
pub fn gen_user(n: usize) -> Term {
    assert!(n >= 1, "need at least one user");
    let one = || {
        Term::urgent(
            act(IN),
            Term::urgent(act(OUT), Term::urgent(act(OMEGA), Term::nil())),
        )
    };
    let mut users = one();
    for _ in 1..n {
        users = Term::parallel(users, one(), sync([name(OMEGA)]));
    }
    users
}

/// Renders a program as `.pafas` source.
pub fn source(env: &ProgramEnv) -> String {
    render(env)
}
