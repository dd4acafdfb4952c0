//! Refusal transition systems: construction from terms, the product of two
//! systems, and rooted isomorphism.

mod engine;
mod iso;

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use engine::{parallel_forbidden, unfold, Engine, TimeStep};
pub use iso::{is_isomorphic, IsoMode};

use crate::syntax::{canonical_key, parallel_key, Action, ActionSet, Program, SyncSet};

pub type NodeId = usize;

pub const DEFAULT_NODE_CAP: usize = 1_000_000;

/// Environment variable overriding [`DEFAULT_NODE_CAP`].
pub const NODE_CAP_ENV: &str = "PAFAS_NODE_CAP";

/// The node cap from `PAFAS_NODE_CAP`, or the default when unset or invalid.
pub fn node_cap_from_env() -> usize {
    std::env::var(NODE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_NODE_CAP)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error("state space exceeds the cap of {cap} nodes")]
    StateCapExceeded { cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeEdge {
    pub forbidden: ActionSet,
    pub target: NodeId,
}

impl TimeEdge {
    pub fn is_full(&self) -> bool {
        self.forbidden.is_empty()
    }
}

/// A rooted refusal transition system. Node 0 is not necessarily the root;
/// use [`Rts::root`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rts {
    root: NodeId,
    labels: Vec<Arc<str>>,
    actions: Vec<Vec<(Action, NodeId)>>,
    time: Vec<Option<TimeEdge>>,
}

/// Label of one step along a path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StepLabel {
    Action { action: Action },
    Time { forbidden: ActionSet },
}

impl StepLabel {
    pub fn is_action(&self, name: &str) -> bool {
        matches!(self, StepLabel::Action { action } if action.is(name))
    }

    pub fn is_time(&self) -> bool {
        matches!(self, StepLabel::Time { .. })
    }

    pub fn is_full_time(&self) -> bool {
        matches!(self, StepLabel::Time { forbidden } if forbidden.is_empty())
    }
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepLabel::Action { action } => write!(f, "{action}"),
            StepLabel::Time { forbidden } if forbidden.is_empty() => f.write_str("1"),
            StepLabel::Time { forbidden } => write!(f, "time{forbidden}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub from: NodeId,
    pub label: StepLabel,
    pub to: NodeId,
}

/// A path given as its start node and the steps taken.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub start: NodeId,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn empty(start: NodeId) -> Self {
        Path {
            start,
            steps: Vec::new(),
        }
    }

    pub fn end(&self) -> NodeId {
        self.steps.last().map_or(self.start, |s| s.to)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, from: NodeId, label: StepLabel, to: NodeId) {
        debug_assert_eq!(from, self.end());
        self.steps.push(Step { from, label, to });
    }

    pub fn extend(&mut self, other: &Path) {
        debug_assert_eq!(other.start, self.end());
        self.steps.extend(other.steps.iter().cloned());
    }

    pub fn count_action(&self, name: &str) -> usize {
        self.steps.iter().filter(|s| s.label.is_action(name)).count()
    }

    pub fn count_time(&self) -> usize {
        self.steps.iter().filter(|s| s.label.is_time()).count()
    }

    /// True when the path ends where it starts and is non-empty.
    pub fn is_cycle(&self) -> bool {
        !self.steps.is_empty() && self.end() == self.start
    }

    /// Renders the labels as a trace, e.g. `in 1 out time{in}`.
    pub fn trace(&self) -> String {
        self.steps
            .iter()
            .map(|s| s.label.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Rts {
    /// Assembles a system from raw parts. Callers must keep ids in range.
    pub fn from_parts(
        root: NodeId,
        labels: Vec<Arc<str>>,
        actions: Vec<Vec<(Action, NodeId)>>,
        time: Vec<Option<TimeEdge>>,
    ) -> Self {
        assert_eq!(labels.len(), actions.len());
        assert_eq!(labels.len(), time.len());
        assert!(root < labels.len() || labels.is_empty());
        Rts {
            root,
            labels,
            actions,
            time,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, n: NodeId) -> &str {
        &self.labels[n]
    }

    pub fn labels(&self) -> &[Arc<str>] {
        &self.labels
    }

    pub fn actions(&self, n: NodeId) -> &[(Action, NodeId)] {
        &self.actions[n]
    }

    pub fn time_edge(&self, n: NodeId) -> Option<&TimeEdge> {
        self.time[n].as_ref()
    }

    pub fn action_edge_count(&self) -> usize {
        self.actions.iter().map(Vec::len).sum()
    }

    pub fn time_edge_count(&self) -> usize {
        self.time.iter().flatten().count()
    }

    pub fn edge_count(&self) -> usize {
        self.action_edge_count() + self.time_edge_count()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.labels.len()
    }

    /// All outgoing steps of `n`, action edges first.
    pub fn steps(&self, n: NodeId) -> impl Iterator<Item = Step> + '_ {
        let acts = self.actions[n].iter().map(move |(a, t)| Step {
            from: n,
            label: StepLabel::Action { action: a.clone() },
            to: *t,
        });
        let time = self.time[n].iter().map(move |e| Step {
            from: n,
            label: StepLabel::Time {
                forbidden: e.forbidden.clone(),
            },
            to: e.target,
        });
        acts.chain(time)
    }

    pub fn has_step(&self, step: &Step) -> bool {
        if step.from >= self.node_count() {
            return false;
        }
        match &step.label {
            StepLabel::Action { action } => self.actions[step.from]
                .iter()
                .any(|(a, t)| a == action && *t == step.to),
            StepLabel::Time { forbidden } => self.time[step.from]
                .as_ref()
                .is_some_and(|e| &e.forbidden == forbidden && e.target == step.to),
        }
    }

    /// True when every step exists and consecutive steps connect.
    pub fn replays(&self, path: &Path) -> bool {
        let mut at = path.start;
        for s in &path.steps {
            if s.from != at || !self.has_step(s) {
                return false;
            }
            at = s.to;
        }
        true
    }

    /// Visible action names labelling some edge.
    pub fn visible_alphabet(&self) -> ActionSet {
        self.actions
            .iter()
            .flatten()
            .filter_map(|(a, _)| a.name().cloned())
            .collect()
    }

    /// Keeps the nodes reachable from the root, renumbered in BFS order (the
    /// root becomes 0), with `keep_time` deciding which time edges survive.
    pub fn restrict<F>(&self, mut keep_time: F) -> (Rts, Vec<Option<NodeId>>)
    where
        F: FnMut(NodeId, &TimeEdge) -> bool,
    {
        let n = self.node_count();
        let mut map = vec![None; n];
        let mut order = Vec::new();
        if n == 0 {
            return (self.clone(), map);
        }
        let mut queue = VecDeque::new();
        map[self.root] = Some(0);
        order.push(self.root);
        queue.push_back(self.root);
        let mut kept_time = vec![None; n];
        while let Some(u) = queue.pop_front() {
            let mut visit = |v: NodeId, order: &mut Vec<NodeId>, queue: &mut VecDeque<NodeId>| {
                if map[v].is_none() {
                    map[v] = Some(order.len());
                    order.push(v);
                    queue.push_back(v);
                }
            };
            for &(_, v) in &self.actions[u] {
                visit(v, &mut order, &mut queue);
            }
            if let Some(e) = &self.time[u] {
                if keep_time(u, e) {
                    kept_time[u] = Some(e.clone());
                    visit(e.target, &mut order, &mut queue);
                }
            }
        }
        let labels = order.iter().map(|&u| self.labels[u].clone()).collect();
        let actions = order
            .iter()
            .map(|&u| {
                self.actions[u]
                    .iter()
                    .map(|(a, v)| (a.clone(), map[*v].expect("reachable")))
                    .collect()
            })
            .collect();
        let time = order
            .iter()
            .map(|&u| {
                kept_time[u].take().map(|e| TimeEdge {
                    forbidden: e.forbidden,
                    target: map[e.target].expect("reachable"),
                })
            })
            .collect();
        (
            Rts {
                root: 0,
                labels,
                actions,
                time,
            },
            map,
        )
    }
}

struct Builder {
    index: HashMap<Arc<str>, NodeId>,
    labels: Vec<Arc<str>>,
    cap: usize,
}

impl Builder {
    fn new(cap: usize) -> Self {
        Builder {
            index: HashMap::new(),
            labels: Vec::new(),
            cap,
        }
    }

    /// Returns the id for `key` and whether it was newly created.
    fn intern(&mut self, key: String) -> Result<(NodeId, bool), SemanticsError> {
        match self.index.entry(Arc::from(key)) {
            Entry::Occupied(e) => Ok((*e.get(), false)),
            Entry::Vacant(e) => {
                if self.labels.len() >= self.cap {
                    return Err(SemanticsError::StateCapExceeded { cap: self.cap });
                }
                let id = self.labels.len();
                self.labels.push(e.key().clone());
                e.insert(id);
                Ok((id, true))
            }
        }
    }
}

fn push_unique(edges: &mut Vec<(Action, NodeId)>, a: Action, to: NodeId) {
    if !edges.iter().any(|(b, t)| *b == a && *t == to) {
        edges.push((a, to));
    }
}

/// Explores the refusal transition system of the program's main term.
pub fn build_rts(program: &Program, cap: usize) -> Result<Rts, SemanticsError> {
    let engine = Engine::new(program);
    let mut b = Builder::new(cap);
    let mut terms = Vec::new();
    let (root, _) = b.intern(canonical_key(program.main()))?;
    terms.push(program.main().clone());
    let mut actions: Vec<Vec<(Action, NodeId)>> = Vec::new();
    let mut time: Vec<Option<TimeEdge>> = Vec::new();

    let mut next = 0;
    while next < terms.len() {
        let t = terms[next].clone();
        let mut out = Vec::new();
        for (a, t2) in engine.action_successors(&t) {
            let (id, fresh) = b.intern(canonical_key(&t2))?;
            if fresh {
                terms.push(t2);
            }
            push_unique(&mut out, a, id);
        }
        let step = match engine.time_step(&t) {
            Some(ts) => {
                let (id, fresh) = b.intern(canonical_key(&ts.target))?;
                if fresh {
                    terms.push(ts.target);
                }
                Some(TimeEdge {
                    forbidden: ts.forbidden,
                    target: id,
                })
            }
            None => None,
        };
        actions.push(out);
        time.push(step);
        next += 1;
    }

    Ok(Rts {
        root,
        labels: b.labels,
        actions,
        time,
    })
}

/// Product of two systems under the parallel rules: interleaving outside
/// `sync`, handshake inside it, and the parallel forbidden-set formula on time
/// edges. Node labels are those a direct build of the parallel term would
/// produce.
pub fn compose_parallel(
    left: &Rts,
    right: &Rts,
    sync: &SyncSet,
    cap: usize,
) -> Result<Rts, SemanticsError> {
    let mut b = Builder::new(cap);
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    let key = |l: NodeId, r: NodeId| parallel_key(left.label(l), sync, right.label(r));
    let (root, _) = b.intern(key(left.root, right.root))?;
    pairs.push((left.root, right.root));
    let mut actions: Vec<Vec<(Action, NodeId)>> = Vec::new();
    let mut time: Vec<Option<TimeEdge>> = Vec::new();

    let mut next = 0;
    while next < pairs.len() {
        let (l, r) = pairs[next];
        let mut out = Vec::new();
        let mut edge = |a: &Action, l2: NodeId, r2: NodeId, pairs: &mut Vec<(NodeId, NodeId)>, b: &mut Builder| {
            let (id, fresh) = b.intern(key(l2, r2))?;
            if fresh {
                pairs.push((l2, r2));
            }
            push_unique(&mut out, a.clone(), id);
            Ok::<_, SemanticsError>(())
        };
        for (a, l2) in left.actions(l) {
            if !sync.contains(a) {
                edge(a, *l2, r, &mut pairs, &mut b)?;
            }
        }
        for (a, r2) in right.actions(r) {
            if !sync.contains(a) {
                edge(a, l, *r2, &mut pairs, &mut b)?;
            }
        }
        for (a, l2) in left.actions(l).iter().filter(|(a, _)| sync.contains(a)) {
            for (_, r2) in right.actions(r).iter().filter(|(b, _)| b == a) {
                edge(a, *l2, *r2, &mut pairs, &mut b)?;
            }
        }
        let step = match (left.time_edge(l), right.time_edge(r)) {
            (Some(el), Some(er)) => {
                let (id, fresh) = b.intern(key(el.target, er.target))?;
                if fresh {
                    pairs.push((el.target, er.target));
                }
                Some(TimeEdge {
                    forbidden: parallel_forbidden(&el.forbidden, &er.forbidden, sync),
                    target: id,
                })
            }
            _ => None,
        };
        actions.push(out);
        time.push(step);
        next += 1;
    }

    Ok(Rts {
        root,
        labels: b.labels,
        actions,
        time,
    })
}
