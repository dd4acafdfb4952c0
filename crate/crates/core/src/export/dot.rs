//! Graphviz rendering. Action edges are solid and labelled with the action,
//! full time steps are bold and labelled `1`, conditional time steps are
//! dashed and labelled with their forbidden set. Highlighted steps are red.

use std::collections::HashSet;
use std::fmt::Write;

use crate::semantics::{Path, Rts, Step, StepLabel};

#[derive(Debug, Clone, Default)]
pub struct DotOptions {
    /// Graph name; `rts` when empty.
    pub name: String,
    /// Steps drawn in red, for example a witness path.
    pub highlight: Option<Path>,
    /// Show each node's term instead of its id.
    pub term_labels: bool,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn to_dot(rts: &Rts, opts: &DotOptions) -> String {
    let marked: HashSet<&Step> = opts
        .highlight
        .iter()
        .flat_map(|p| p.steps.iter())
        .collect();
    let marked_nodes: HashSet<usize> = opts
        .highlight
        .iter()
        .flat_map(|p| std::iter::once(p.start).chain(p.steps.iter().map(|s| s.to)))
        .collect();
    let name = if opts.name.is_empty() { "rts" } else { &opts.name };

    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", escape(name)).unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    for v in rts.nodes() {
        let label = if opts.term_labels {
            escape(rts.label(v))
        } else {
            v.to_string()
        };
        let mut attrs = vec![format!("label=\"{label}\""), format!("tooltip=\"{}\"", escape(rts.label(v)))];
        if v == rts.root() {
            attrs.push("shape=doublecircle".into());
        }
        if marked_nodes.contains(&v) {
            attrs.push("color=red".into());
        }
        writeln!(out, "  n{v} [{}];", attrs.join(", ")).unwrap();
    }
    for step in rts.nodes().flat_map(|v| rts.steps(v)) {
        let mut attrs = match &step.label {
            StepLabel::Action { action } => vec![format!("label=\"{}\"", escape(&action.to_string()))],
            StepLabel::Time { forbidden } if forbidden.is_empty() => {
                vec!["label=\"1\"".into(), "style=bold".into()]
            }
            StepLabel::Time { forbidden } => vec![
                format!("label=\"{}\"", escape(&forbidden.to_string())),
                "style=dashed".into(),
            ],
        };
        if marked.contains(&step) {
            attrs.push("color=red".into());
            attrs.push("penwidth=2".into());
        }
        writeln!(out, "  n{} -> n{} [{}];", step.from, step.to, attrs.join(", ")).unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::semantics::build_rts;
    use crate::syntax::check_well_formed;

    fn rts(src: &str) -> Rts {
        build_rts(&check_well_formed(parse(src).unwrap()).unwrap(), 10_000).unwrap()
    }

    #[test]
    fn full_and_conditional_steps_differ() {
        let r = rts("in.out.0");
        let dot = to_dot(&r, &DotOptions::default());
        assert!(dot.contains("label=\"1\", style=bold"), "{dot}");
        assert!(dot.contains("label=\"{in}\", style=dashed"), "{dot}");
        assert!(dot.contains("label=\"in\"]"), "{dot}");
        assert!(dot.starts_with("digraph \"rts\" {"));
    }

    #[test]
    fn highlighted_path_is_red() {
        let r = rts("in.0");
        let mut p = Path::empty(r.root());
        let s = r.steps(r.root()).next().unwrap();
        p.push(s.from, s.label.clone(), s.to);
        let dot = to_dot(
            &r,
            &DotOptions {
                highlight: Some(p),
                ..Default::default()
            },
        );
        assert_eq!(dot.matches("penwidth=2").count(), 1);
    }

    #[test]
    fn quotes_in_labels_are_escaped() {
        assert_eq!(escape(r#"a"b\c"#), r#"a\"b\\c"#);
    }
}
