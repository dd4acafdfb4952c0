//! One-step operational semantics: action transitions and the (unique) time
//! step of a term.

use std::sync::Arc;

use crate::syntax::{Action, ActionSet, Name, Program, SyncSet, Term, Urgency};

/// The time step of a term together with its forbidden set `U`.
///
/// The term may let one unit of time pass while refusing any `X` disjoint
/// from `U`; `U = ∅` means a full time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeStep {
    pub forbidden: ActionSet,
    pub target: Term,
}

impl TimeStep {
    pub fn is_full(&self) -> bool {
        self.forbidden.is_empty()
    }
}

/// Evaluates terms of one checked program. Named constants are looked up in
/// the program's definitions.
#[derive(Clone, Copy)]
pub struct Engine<'p> {
    program: &'p Program,
}

impl<'p> Engine<'p> {
    pub fn new(program: &'p Program) -> Self {
        Engine { program }
    }

    fn definition(&self, name: &Name) -> &'p Term {
        self.program
            .definition(name)
            .unwrap_or_else(|| panic!("constant `{name}` has no definition in a checked program"))
    }

    /// All `(α, P')` with `t -α-> P'`. The same pair may be listed twice when
    /// two derivations produce it.
    pub fn action_successors(&self, t: &Term) -> Vec<(Action, Term)> {
        let mut out = Vec::new();
        self.actions_into(t, &mut out);
        out
    }

    fn actions_into(&self, t: &Term, out: &mut Vec<(Action, Term)>) {
        match t {
            Term::Nil | Term::Var(_) => {}
            Term::Prefix { action, body, .. } => out.push((action.clone(), (**body).clone())),
            Term::Choice(l, r) => {
                self.actions_into(l, out);
                self.actions_into(r, out);
            }
            Term::Parallel { left, right, sync } => {
                let ls = self.action_successors(left);
                let rs = self.action_successors(right);
                for (a, l2) in &ls {
                    if !sync.contains(a) {
                        out.push((a.clone(), rebuild_par(l2.clone(), (**right).clone(), sync)));
                    }
                }
                for (a, r2) in &rs {
                    if !sync.contains(a) {
                        out.push((a.clone(), rebuild_par((**left).clone(), r2.clone(), sync)));
                    }
                }
                for (a, l2) in ls.iter().filter(|(a, _)| sync.contains(a)) {
                    for (_, r2) in rs.iter().filter(|(b, _)| b == a) {
                        out.push((a.clone(), rebuild_par(l2.clone(), r2.clone(), sync)));
                    }
                }
            }
            Term::Relabel { body, relabel } => {
                for (a, b2) in self.action_successors(body) {
                    out.push((
                        relabel.apply(&a),
                        Term::Relabel {
                            body: Arc::new(b2),
                            relabel: relabel.clone(),
                        },
                    ));
                }
            }
            Term::Rec { .. } => self.actions_into(&unfold(t), out),
            Term::Const(n) => self.actions_into(self.definition(n), out),
        }
    }

    /// The time step of `t`, or `None` when an urgent τ (possibly produced by
    /// hiding an urgent action) stops time.
    pub fn time_step(&self, t: &Term) -> Option<TimeStep> {
        match t {
            Term::Nil => Some(TimeStep {
                forbidden: ActionSet::new(),
                target: Term::Nil,
            }),
            Term::Var(_) => None,
            Term::Prefix {
                urgency: Urgency::Lazy,
                action,
                body,
            } => Some(TimeStep {
                forbidden: ActionSet::new(),
                target: Term::Prefix {
                    urgency: Urgency::Urgent,
                    action: action.clone(),
                    body: body.clone(),
                },
            }),
            Term::Prefix {
                urgency: Urgency::Urgent,
                action,
                ..
            } => match action {
                Action::Tau => None,
                Action::Visible(a) => Some(TimeStep {
                    forbidden: ActionSet::singleton(a.clone()),
                    target: t.clone(),
                }),
            },
            Term::Choice(l, r) => {
                let l = self.time_step(l)?;
                let r = self.time_step(r)?;
                Some(TimeStep {
                    forbidden: l.forbidden.union(&r.forbidden),
                    target: Term::choice(l.target, r.target),
                })
            }
            Term::Parallel { left, right, sync } => {
                let l = self.time_step(left)?;
                let r = self.time_step(right)?;
                Some(TimeStep {
                    forbidden: parallel_forbidden(&l.forbidden, &r.forbidden, sync),
                    target: rebuild_par(l.target, r.target, sync),
                })
            }
            Term::Relabel { body, relabel } => {
                let b = self.time_step(body)?;
                let mut forbidden = ActionSet::new();
                for u in b.forbidden.iter() {
                    match relabel.apply(&Action::Visible(u.clone())) {
                        Action::Tau => return None,
                        Action::Visible(v) => {
                            forbidden.insert(v);
                        }
                    }
                }
                Some(TimeStep {
                    forbidden,
                    target: Term::Relabel {
                        body: Arc::new(b.target),
                        relabel: relabel.clone(),
                    },
                })
            }
            Term::Rec { .. } => self.time_step(&unfold(t)),
            Term::Const(n) => self.time_step(self.definition(n)),
        }
    }
}

/// `(A ∩ U₁ ∩ U₂) ∪ ((U₁ ∪ U₂) ∖ A)`: a synchronised action is forbidden only
/// if both sides forbid it, any other action if either side does.
pub fn parallel_forbidden(l: &ActionSet, r: &ActionSet, sync: &SyncSet) -> ActionSet {
    l.iter()
        .chain(r.iter())
        .filter(|a| !sync.contains_name(a) || (l.contains(a) && r.contains(a)))
        .cloned()
        .collect()
}

fn rebuild_par(left: Term, right: Term, sync: &Arc<SyncSet>) -> Term {
    Term::Parallel {
        left: Arc::new(left),
        right: Arc::new(right),
        sync: sync.clone(),
    }
}

/// `μx.P ↦ P[μx.P / x]`. Any other term is returned unchanged.
pub fn unfold(t: &Term) -> Term {
    match t {
        Term::Rec { var, body } => subst(body, var, t).unwrap_or_else(|| (**body).clone()),
        _ => t.clone(),
    }
}

/// Substitutes the closed term `repl` for free occurrences of `var`.
/// Returns `None` when `var` does not occur free, so unchanged subtrees keep
/// their sharing.
fn subst(t: &Term, var: &Name, repl: &Term) -> Option<Term> {
    fn sub_arc(t: &Arc<Term>, var: &Name, repl: &Term) -> Option<Arc<Term>> {
        subst(t, var, repl).map(Arc::new)
    }
    match t {
        Term::Nil | Term::Const(_) => None,
        Term::Var(n) => (n == var).then(|| repl.clone()),
        Term::Prefix {
            urgency,
            action,
            body,
        } => sub_arc(body, var, repl).map(|body| Term::Prefix {
            urgency: *urgency,
            action: action.clone(),
            body,
        }),
        Term::Choice(l, r) => {
            let l2 = sub_arc(l, var, repl);
            let r2 = sub_arc(r, var, repl);
            if l2.is_none() && r2.is_none() {
                return None;
            }
            Some(Term::Choice(
                l2.unwrap_or_else(|| l.clone()),
                r2.unwrap_or_else(|| r.clone()),
            ))
        }
        Term::Parallel { left, right, sync } => {
            let l2 = sub_arc(left, var, repl);
            let r2 = sub_arc(right, var, repl);
            if l2.is_none() && r2.is_none() {
                return None;
            }
            Some(Term::Parallel {
                left: l2.unwrap_or_else(|| left.clone()),
                right: r2.unwrap_or_else(|| right.clone()),
                sync: sync.clone(),
            })
        }
        Term::Relabel { body, relabel } => sub_arc(body, var, repl).map(|body| Term::Relabel {
            body,
            relabel: relabel.clone(),
        }),
        Term::Rec { var: inner, body } => {
            if inner == var {
                None
            } else {
                sub_arc(body, var, repl).map(|body| Term::Rec {
                    var: inner.clone(),
                    body,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::syntax::{canonical_key, check_well_formed};

    fn program(src: &str) -> Program {
        check_well_formed(parse(src).unwrap()).unwrap()
    }

    fn keys(succ: Vec<(Action, Term)>) -> Vec<(String, String)> {
        let mut v: Vec<_> = succ
            .into_iter()
            .map(|(a, t)| (a.to_string(), canonical_key(&t)))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    #[test]
    fn choice_offers_both_prefixes() {
        let p = program("a.0 + _b.0");
        let e = Engine::new(&p);
        assert_eq!(
            keys(e.action_successors(p.main())),
            vec![("a".into(), "0".into()), ("b".into(), "0".into())]
        );
    }

    #[test]
    fn nil_has_no_actions_and_a_full_step() {
        let p = program("0");
        let e = Engine::new(&p);
        assert!(e.action_successors(p.main()).is_empty());
        let ts = e.time_step(p.main()).unwrap();
        assert!(ts.is_full());
        assert_eq!(ts.target, Term::Nil);
    }

    #[test]
    fn synchronisation_ignores_urgency() {
        let p = program("_a.b.0 |[a]| a.c.0");
        let e = Engine::new(&p);
        assert_eq!(
            keys(e.action_successors(p.main())),
            vec![("a".into(), "(b.0 |[a]| c.0)".into())]
        );
    }

    #[test]
    fn choice_time_step_urgentifies_lazy_side() {
        let p = program("a.0 + _b.0");
        let ts = Engine::new(&p).time_step(p.main()).unwrap();
        assert_eq!(ts.forbidden, ["b"].into_iter().collect());
        assert_eq!(canonical_key(&ts.target), "(_a.0 + _b.0)");
    }

    #[test]
    fn urgent_tau_stops_time() {
        let p = program("_tau.a.0");
        assert!(Engine::new(&p).time_step(p.main()).is_none());
    }

    #[test]
    fn hiding_an_urgent_action_stops_time() {
        let p = program("(rec x. a.x) / {a}");
        let e = Engine::new(&p);
        let ts = e.time_step(p.main()).unwrap();
        assert!(ts.is_full());
        assert_eq!(canonical_key(&ts.target), "(_a.rec.(a.#0))[a->tau]");
        assert!(e.time_step(&ts.target).is_none());
        let acts = keys(e.action_successors(&ts.target));
        assert_eq!(acts, vec![("tau".into(), "(rec.(a.#0))[a->tau]".into())]);
    }

    #[test]
    fn parallel_forbidden_set() {
        let l: ActionSet = ["a", "b", "c"].into_iter().collect();
        let r: ActionSet = ["a", "d"].into_iter().collect();
        let sync = SyncSet::Finite(["a", "b", "d"].into_iter().collect());
        // a: synced and forbidden by both; b, d: synced, one side only; c: free
        assert_eq!(
            parallel_forbidden(&l, &r, &sync),
            ["a", "c"].into_iter().collect()
        );
        assert_eq!(
            parallel_forbidden(&l, &r, &SyncSet::AllButOmega),
            ["a"].into_iter().collect()
        );
    }

    #[test]
    fn relabel_renames_forbidden_actions() {
        let p = program("_in.0[in->d]");
        let ts = Engine::new(&p).time_step(p.main()).unwrap();
        assert_eq!(ts.forbidden, ["d"].into_iter().collect());
    }

    #[test]
    fn unfold_respects_shadowing() {
        let p = program("rec x. a.(rec x. b.x)");
        let u = unfold(p.main());
        assert_eq!(canonical_key(&u), "a.rec.(b.#0)");
    }

    #[test]
    fn constants_unfold_through_definitions() {
        let p = program("A = in.B; B = out.A; main A");
        let e = Engine::new(&p);
        assert_eq!(keys(e.action_successors(p.main())), vec![("in".into(), "B".into())]);
        let ts = e.time_step(p.main()).unwrap();
        assert_eq!(canonical_key(&ts.target), "_in.B");
    }
}
