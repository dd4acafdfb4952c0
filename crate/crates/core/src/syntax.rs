//! Abstract syntax of timed process terms.
//!
//! Terms are immutable trees with shared (`Arc`) children, so cloning is cheap
//! and a built term can be read from several threads at once.
//!
//! Two recursion mechanisms exist side by side: `rec x. P` binders with
//! ordinary variables, and named process constants coming from `Name = P;`
//! equations. A constant behaves exactly like a `rec` binder whose body is the
//! defining equation; keeping it named avoids the exponential term growth that
//! nesting mutually recursive equations into binders would cause.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Interned-ish identifier. Cloning only bumps a reference count.
pub type Name = Arc<str>;

pub const TAU: &str = "tau";
pub const OMEGA: &str = "omega";
pub const IN: &str = "in";
pub const OUT: &str = "out";

/// A basic action: either a visible action name or the internal action τ.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Tau,
    Visible(Name),
}

impl Action {
    pub fn visible(name: &str) -> Self {
        Action::Visible(Name::from(name))
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }

    /// The visible name, or `None` for τ.
    pub fn name(&self) -> Option<&Name> {
        match self {
            Action::Tau => None,
            Action::Visible(n) => Some(n),
        }
    }

    pub fn is(&self, name: &str) -> bool {
        matches!(self, Action::Visible(n) if &**n == name)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => f.write_str(TAU),
            Action::Visible(n) => f.write_str(n),
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == TAU { Action::Tau } else { Action::visible(&s) })
    }
}

/// A finite set of visible actions, kept sorted.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionSet(BTreeSet<Name>);

impl ActionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(name: Name) -> Self {
        let mut s = BTreeSet::new();
        s.insert(name);
        ActionSet(s)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn insert(&mut self, name: Name) -> bool {
        self.0.insert(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Name> {
        self.0.iter()
    }

    pub fn union(&self, other: &ActionSet) -> ActionSet {
        ActionSet(self.0.union(&other.0).cloned().collect())
    }
}

impl FromIterator<Name> for ActionSet {
    fn from_iter<I: IntoIterator<Item = Name>>(iter: I) -> Self {
        ActionSet(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<&'a str> for ActionSet {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        ActionSet(iter.into_iter().map(Name::from).collect())
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(a)?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// General relabelling: a finite map from visible actions to actions (possibly
/// τ), identity everywhere else. τ is always mapped to τ.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelabelFn {
    map: BTreeMap<Name, Action>,
}

impl RelabelFn {
    /// Builds a relabelling from `(source, target)` pairs. Identity pairs are
    /// dropped, later pairs override earlier ones.
    pub fn new<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (Name, Action)>,
    {
        let mut map = BTreeMap::new();
        for (from, to) in pairs {
            if to.name() == Some(&from) {
                map.remove(&from);
            } else {
                map.insert(from, to);
            }
        }
        RelabelFn { map }
    }

    /// The hiding function `/A`: every action of `hidden` becomes τ.
    pub fn hiding<I>(hidden: I) -> Self
    where
        I: IntoIterator<Item = Name>,
    {
        RelabelFn {
            map: hidden.into_iter().map(|a| (a, Action::Tau)).collect(),
        }
    }

    pub fn apply(&self, action: &Action) -> Action {
        match action {
            Action::Tau => Action::Tau,
            Action::Visible(n) => self.map.get(n).cloned().unwrap_or_else(|| action.clone()),
        }
    }

    /// True when every non-identity entry maps to τ, i.e. this is a hiding.
    pub fn is_hiding(&self) -> bool {
        !self.map.is_empty() && self.map.values().all(Action::is_tau)
    }

    /// The non-identity entries in source order.
    pub fn entries(&self) -> impl Iterator<Item = (&Name, &Action)> {
        self.map.iter()
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }
}

impl fmt::Debug for RelabelFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (a, b)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}->{b}")?;
        }
        f.write_str("]")
    }
}

/// Synchronisation set of a parallel composition. The infinite set 𝔸∖{ω}
/// used by the `||` shorthand is kept symbolic.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum SyncSet {
    Finite(ActionSet),
    AllButOmega,
}

impl SyncSet {
    pub fn empty() -> Self {
        SyncSet::Finite(ActionSet::new())
    }

    pub fn contains(&self, action: &Action) -> bool {
        match (self, action) {
            (_, Action::Tau) => false,
            (SyncSet::Finite(s), Action::Visible(n)) => s.contains(n),
            (SyncSet::AllButOmega, Action::Visible(n)) => &**n != OMEGA,
        }
    }

    pub fn contains_name(&self, name: &str) -> bool {
        match self {
            SyncSet::Finite(s) => s.contains(name),
            SyncSet::AllButOmega => name != OMEGA,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Urgency {
    Lazy,
    Urgent,
}

/// A timed process term.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Nil,
    Prefix {
        urgency: Urgency,
        action: Action,
        body: Arc<Term>,
    },
    Choice(Arc<Term>, Arc<Term>),
    Parallel {
        left: Arc<Term>,
        right: Arc<Term>,
        sync: Arc<SyncSet>,
    },
    Relabel {
        body: Arc<Term>,
        relabel: Arc<RelabelFn>,
    },
    /// A variable bound by an enclosing `rec`. Freshly parsed programs use
    /// `Var` for every identifier; well-formedness checking turns references
    /// to defined names into [`Term::Const`].
    Var(Name),
    Rec {
        var: Name,
        body: Arc<Term>,
    },
    /// Reference to a named defining equation of the enclosing program.
    Const(Name),
}

impl Term {
    pub fn nil() -> Self {
        Term::Nil
    }

    pub fn prefix(action: Action, body: Term) -> Self {
        Term::Prefix {
            urgency: Urgency::Lazy,
            action,
            body: Arc::new(body),
        }
    }

    pub fn urgent(action: Action, body: Term) -> Self {
        Term::Prefix {
            urgency: Urgency::Urgent,
            action,
            body: Arc::new(body),
        }
    }

    pub fn choice(left: Term, right: Term) -> Self {
        Term::Choice(Arc::new(left), Arc::new(right))
    }

    pub fn parallel(left: Term, right: Term, sync: SyncSet) -> Self {
        Term::Parallel {
            left: Arc::new(left),
            right: Arc::new(right),
            sync: Arc::new(sync),
        }
    }

    pub fn relabel(body: Term, relabel: RelabelFn) -> Self {
        Term::Relabel {
            body: Arc::new(body),
            relabel: Arc::new(relabel),
        }
    }

    pub fn hide<I: IntoIterator<Item = Name>>(body: Term, hidden: I) -> Self {
        Term::relabel(body, RelabelFn::hiding(hidden))
    }

    pub fn var(name: &str) -> Self {
        Term::Var(Name::from(name))
    }

    pub fn rec(var: &str, body: Term) -> Self {
        Term::Rec {
            var: Name::from(var),
            body: Arc::new(body),
        }
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(Name::from(name))
    }

    /// Visible action names occurring syntactically in the term (including
    /// relabelling targets), not following constants.
    pub fn visible_actions(&self) -> ActionSet {
        let mut out = ActionSet::new();
        self.collect_actions(&mut out);
        out
    }

    fn collect_actions(&self, out: &mut ActionSet) {
        match self {
            Term::Nil | Term::Var(_) | Term::Const(_) => {}
            Term::Prefix { action, body, .. } => {
                if let Some(n) = action.name() {
                    out.insert(n.clone());
                }
                body.collect_actions(out);
            }
            Term::Choice(l, r) => {
                l.collect_actions(out);
                r.collect_actions(out);
            }
            Term::Parallel { left, right, sync } => {
                left.collect_actions(out);
                right.collect_actions(out);
                if let SyncSet::Finite(s) = &**sync {
                    for a in s.iter() {
                        out.insert(a.clone());
                    }
                }
            }
            Term::Relabel { body, relabel } => {
                body.collect_actions(out);
                for (from, to) in relabel.entries() {
                    out.insert(from.clone());
                    if let Some(n) = to.name() {
                        out.insert(n.clone());
                    }
                }
            }
            Term::Rec { body, .. } => body.collect_actions(out),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::render_term(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::render_term(self))
    }
}

/// A parsed program: named equations plus the entry term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramEnv {
    pub definitions: IndexMap<Name, Term>,
    pub main: Term,
}

impl ProgramEnv {
    pub fn new(main: Term) -> Self {
        ProgramEnv {
            definitions: IndexMap::new(),
            main,
        }
    }
}

// ---------------------------------------------------------------------------
// Well-formedness

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WellFormedError {
    #[error("unbound variable `{name}` in {context}")]
    UnboundVariable { name: Name, context: String },
    #[error("unguarded recursion on `{name}` in {context}")]
    UnguardedRecursion { name: Name, context: String },
}

/// A closed and guarded program with every identifier resolved.
///
/// This is the only form the semantics engine accepts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    env: ProgramEnv,
}

impl Program {
    pub fn main(&self) -> &Term {
        &self.env.main
    }

    pub fn definitions(&self) -> &IndexMap<Name, Term> {
        &self.env.definitions
    }

    pub fn definition(&self, name: &str) -> Option<&Term> {
        self.env.definitions.get(name)
    }

    pub fn env(&self) -> &ProgramEnv {
        &self.env
    }

    /// Checks a stand-alone term with no named equations.
    pub fn from_term(term: Term) -> Result<Program, WellFormedError> {
        check_well_formed(ProgramEnv::new(term))
    }

    /// Same program with a different entry term (checked against the same
    /// definitions).
    pub fn with_main(&self, main: Term) -> Result<Program, WellFormedError> {
        check_well_formed(ProgramEnv {
            definitions: self.env.definitions.clone(),
            main,
        })
    }
}

/// Resolves identifiers and checks that every term is closed and guarded.
pub fn check_well_formed(env: ProgramEnv) -> Result<Program, WellFormedError> {
    let ProgramEnv { definitions, main } = env;
    let mut resolved = IndexMap::with_capacity(definitions.len());
    for (name, body) in &definitions {
        let ctx = format!("definition `{name}`");
        let body = resolve(body, &mut Vec::new(), &definitions, &ctx)?;
        check_rec_guarded(&body, &ctx)?;
        resolved.insert(name.clone(), body);
    }
    let main = resolve(&main, &mut Vec::new(), &definitions, "main term")?;
    check_rec_guarded(&main, "main term")?;
    check_constants_guarded(&resolved)?;
    Ok(Program {
        env: ProgramEnv {
            definitions: resolved,
            main,
        },
    })
}

fn resolve(
    term: &Term,
    bound: &mut Vec<Name>,
    defs: &IndexMap<Name, Term>,
    ctx: &str,
) -> Result<Term, WellFormedError> {
    Ok(match term {
        Term::Nil => Term::Nil,
        Term::Var(n) | Term::Const(n) => {
            if bound.iter().any(|b| b == n) {
                Term::Var(n.clone())
            } else if defs.contains_key(n) {
                Term::Const(n.clone())
            } else {
                return Err(WellFormedError::UnboundVariable {
                    name: n.clone(),
                    context: ctx.to_string(),
                });
            }
        }
        Term::Prefix {
            urgency,
            action,
            body,
        } => Term::Prefix {
            urgency: *urgency,
            action: action.clone(),
            body: Arc::new(resolve(body, bound, defs, ctx)?),
        },
        Term::Choice(l, r) => Term::choice(
            resolve(l, bound, defs, ctx)?,
            resolve(r, bound, defs, ctx)?,
        ),
        Term::Parallel { left, right, sync } => Term::Parallel {
            left: Arc::new(resolve(left, bound, defs, ctx)?),
            right: Arc::new(resolve(right, bound, defs, ctx)?),
            sync: sync.clone(),
        },
        Term::Relabel { body, relabel } => Term::Relabel {
            body: Arc::new(resolve(body, bound, defs, ctx)?),
            relabel: relabel.clone(),
        },
        Term::Rec { var, body } => {
            bound.push(var.clone());
            let body = resolve(body, bound, defs, ctx);
            bound.pop();
            Term::Rec {
                var: var.clone(),
                body: Arc::new(body?),
            }
        }
    })
}

/// Every `rec x. P` must have all free occurrences of `x` in `P` under a prefix.
fn check_rec_guarded(term: &Term, ctx: &str) -> Result<(), WellFormedError> {
    match term {
        Term::Nil | Term::Var(_) | Term::Const(_) => Ok(()),
        Term::Prefix { body, .. } => check_rec_guarded(body, ctx),
        Term::Choice(l, r) => {
            check_rec_guarded(l, ctx)?;
            check_rec_guarded(r, ctx)
        }
        Term::Parallel { left, right, .. } => {
            check_rec_guarded(left, ctx)?;
            check_rec_guarded(right, ctx)
        }
        Term::Relabel { body, .. } => check_rec_guarded(body, ctx),
        Term::Rec { var, body } => {
            if occurs_unguarded(body, var) {
                return Err(WellFormedError::UnguardedRecursion {
                    name: var.clone(),
                    context: ctx.to_string(),
                });
            }
            check_rec_guarded(body, ctx)
        }
    }
}

fn occurs_unguarded(term: &Term, var: &str) -> bool {
    match term {
        Term::Nil | Term::Const(_) | Term::Prefix { .. } => false,
        Term::Var(n) => &**n == var,
        Term::Choice(l, r) => occurs_unguarded(l, var) || occurs_unguarded(r, var),
        Term::Parallel { left, right, .. } => {
            occurs_unguarded(left, var) || occurs_unguarded(right, var)
        }
        Term::Relabel { body, .. } => occurs_unguarded(body, var),
        Term::Rec { var: inner, body } => &**inner != var && occurs_unguarded(body, var),
    }
}

/// Named equations must not reach themselves through unguarded references,
/// e.g. `A = B; B = A + a.0;`.
fn check_constants_guarded(defs: &IndexMap<Name, Term>) -> Result<(), WellFormedError> {
    fn unguarded_refs(term: &Term, out: &mut Vec<Name>) {
        match term {
            Term::Nil | Term::Var(_) | Term::Prefix { .. } => {}
            Term::Const(n) => out.push(n.clone()),
            Term::Choice(l, r) => {
                unguarded_refs(l, out);
                unguarded_refs(r, out);
            }
            Term::Parallel { left, right, .. } => {
                unguarded_refs(left, out);
                unguarded_refs(right, out);
            }
            Term::Relabel { body, .. } | Term::Rec { body, .. } => unguarded_refs(body, out),
        }
    }

    let index: Vec<&Name> = defs.keys().collect();
    let succ: Vec<Vec<usize>> = defs
        .values()
        .map(|body| {
            let mut refs = Vec::new();
            unguarded_refs(body, &mut refs);
            refs.iter()
                .filter_map(|r| defs.get_index_of(r))
                .collect()
        })
        .collect();

    // colour-marking DFS for a cycle
    let mut state = vec![0u8; succ.len()];
    fn visit(v: usize, succ: &[Vec<usize>], state: &mut [u8]) -> Option<usize> {
        state[v] = 1;
        for &w in &succ[v] {
            if state[w] == 1 {
                return Some(w);
            }
            if state[w] == 0 {
                if let Some(c) = visit(w, succ, state) {
                    return Some(c);
                }
            }
        }
        state[v] = 2;
        None
    }
    for v in 0..succ.len() {
        if state[v] == 0 {
            if let Some(c) = visit(v, &succ, &mut state) {
                return Err(WellFormedError::UnguardedRecursion {
                    name: index[c].clone(),
                    context: format!("definition `{}`", index[c]),
                });
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Canonical keys

/// Deterministic key identifying a term up to renaming of `rec`-bound
/// variables. No other identification is made: `a.0 + b.0` and `b.0 + a.0`
/// get different keys.
pub fn canonical_key(term: &Term) -> String {
    let mut out = String::new();
    let mut binders = Vec::new();
    write_key(term, &mut binders, &mut out);
    out
}

/// The key of `left |A| right` given the keys of the components. Used by the
/// product construction so composed nodes carry the same label a direct
/// build would give them.
pub fn parallel_key(left: &str, sync: &SyncSet, right: &str) -> String {
    let mut out = String::with_capacity(left.len() + right.len() + 16);
    out.push('(');
    out.push_str(left);
    write_sync_key(sync, &mut out);
    out.push_str(right);
    out.push(')');
    out
}

fn write_sync_key(sync: &SyncSet, out: &mut String) {
    match sync {
        SyncSet::AllButOmega => out.push_str(" || "),
        SyncSet::Finite(s) => {
            out.push_str(" |[");
            for (i, a) in s.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(a);
            }
            out.push_str("]| ");
        }
    }
}

fn write_key(term: &Term, binders: &mut Vec<Name>, out: &mut String) {
    match term {
        Term::Nil => out.push('0'),
        Term::Prefix {
            urgency,
            action,
            body,
        } => {
            if *urgency == Urgency::Urgent {
                out.push('_');
            }
            match action {
                Action::Tau => out.push_str(TAU),
                Action::Visible(n) => out.push_str(n),
            }
            out.push('.');
            write_key(body, binders, out);
        }
        Term::Choice(l, r) => {
            out.push('(');
            write_key(l, binders, out);
            out.push_str(" + ");
            write_key(r, binders, out);
            out.push(')');
        }
        Term::Parallel { left, right, sync } => {
            out.push('(');
            write_key(left, binders, out);
            write_sync_key(sync, out);
            write_key(right, binders, out);
            out.push(')');
        }
        Term::Relabel { body, relabel } => {
            out.push('(');
            write_key(body, binders, out);
            out.push_str(")[");
            for (i, (a, b)) in relabel.entries().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(a);
                out.push_str("->");
                match b {
                    Action::Tau => out.push_str(TAU),
                    Action::Visible(n) => out.push_str(n),
                }
            }
            out.push(']');
        }
        Term::Var(n) => match binders.iter().rev().position(|b| b == n) {
            Some(idx) => {
                out.push('#');
                out.push_str(&idx.to_string());
            }
            // free variable: only reachable on ill-formed input
            None => {
                out.push('?');
                out.push_str(n);
            }
        },
        Term::Rec { var, body } => {
            out.push_str("rec.(");
            binders.push(var.clone());
            write_key(body, binders, out);
            binders.pop();
            out.push(')');
        }
        Term::Const(n) => out.push_str(n),
    }
}

/// `Φ(a)`; τ always maps to τ.
pub fn apply_relabel(relabel: &RelabelFn, action: &Action) -> Action {
    relabel.apply(action)
}
