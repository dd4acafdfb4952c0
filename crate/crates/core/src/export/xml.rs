//! XML form of a transition system:
//!
//! ```xml
//! <rts root="0">
//!   <node id="0" label="in.0"/>
//!   <act from="0" to="1" label="in"/>
//!   <time from="0" to="2" full="false"><forbid a="in"/></time>
//! </rts>
//! ```
//!
//! Nodes come first, then action edges, then time edges. The bundled XSD is
//! [`SCHEMA`]; [`validate_xml`] checks the same constraints plus consistency of
//! the `full` flag.

use std::collections::HashMap;
use std::sync::Arc;

use quick_xml::events::attributes::Attributes;
use quick_xml::events::{BytesEnd, BytesStart, Event};
use quick_xml::{Reader, Writer};

use crate::semantics::{Rts, TimeEdge};
use crate::syntax::{Action, ActionSet, Name, TAU};

/// The XML Schema describing the format.
pub const SCHEMA: &str = include_str!("../../schema/rts.xsd");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum XmlError {
    #[error("malformed XML at byte {pos}: {message}")]
    Syntax { pos: u64, message: String },
    #[error("invalid RTS document: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, XmlError> {
    Err(XmlError::Invalid(msg.into()))
}

pub fn to_xml(rts: &Rts) -> String {
    let mut w = Writer::new_with_indent(Vec::new(), b' ', 2);
    let ok = "writing to memory cannot fail";
    let root = rts.root().to_string();
    w.write_event(Event::Start(
        BytesStart::new("rts").with_attributes([("root", root.as_str())]),
    ))
    .expect(ok);
    for v in rts.nodes() {
        let id = v.to_string();
        w.write_event(Event::Empty(
            BytesStart::new("node").with_attributes([("id", id.as_str()), ("label", rts.label(v))]),
        ))
        .expect(ok);
    }
    for v in rts.nodes() {
        for (a, t) in rts.actions(v) {
            let (from, to) = (v.to_string(), t.to_string());
            let label = a.to_string();
            w.write_event(Event::Empty(BytesStart::new("act").with_attributes([
                ("from", from.as_str()),
                ("to", to.as_str()),
                ("label", label.as_str()),
            ])))
            .expect(ok);
        }
    }
    for v in rts.nodes() {
        let Some(e) = rts.time_edge(v) else { continue };
        let (from, to) = (v.to_string(), e.target.to_string());
        let start = BytesStart::new("time").with_attributes([
            ("from", from.as_str()),
            ("to", to.as_str()),
            ("full", if e.is_full() { "true" } else { "false" }),
        ]);
        if e.is_full() {
            w.write_event(Event::Empty(start)).expect(ok);
        } else {
            w.write_event(Event::Start(start)).expect(ok);
            for a in e.forbidden.iter() {
                w.write_event(Event::Empty(
                    BytesStart::new("forbid").with_attributes([("a", a.as_ref())]),
                ))
                .expect(ok);
            }
            w.write_event(Event::End(BytesEnd::new("time"))).expect(ok);
        }
    }
    w.write_event(Event::End(BytesEnd::new("rts"))).expect(ok);
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&String::from_utf8(w.into_inner()).expect("utf-8"));
    out.push('\n');
    out
}

#[derive(Default)]
struct Doc {
    root: Option<u64>,
    nodes: Vec<(u64, String)>,
    acts: Vec<(u64, u64, String)>,
    times: Vec<(u64, u64, bool, Vec<String>)>,
}

fn attrs(attributes: Attributes, element: &str, wanted: &[&str]) -> Result<Vec<String>, XmlError> {
    let mut found: HashMap<String, String> = HashMap::new();
    for a in attributes {
        let a = a.map_err(|e| XmlError::Invalid(format!("bad attribute on <{element}>: {e}")))?;
        let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
        let value = a
            .unescape_value()
            .map_err(|e| XmlError::Invalid(format!("bad attribute value on <{element}>: {e}")))?
            .into_owned();
        if !wanted.contains(&key.as_str()) {
            return invalid(format!("unexpected attribute `{key}` on <{element}>"));
        }
        if found.insert(key.clone(), value).is_some() {
            return invalid(format!("duplicate attribute `{key}` on <{element}>"));
        }
    }
    wanted
        .iter()
        .map(|k| {
            found
                .remove(*k)
                .ok_or_else(|| XmlError::Invalid(format!("<{element}> lacks `{k}`")))
        })
        .collect()
}

fn number(s: &str, what: &str) -> Result<u64, XmlError> {
    s.parse()
        .map_err(|_| XmlError::Invalid(format!("{what} `{s}` is not a non-negative integer")))
}

fn is_ncname(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Which part of the `<rts>` sequence has been reached.
#[derive(PartialEq, PartialOrd, Clone, Copy)]
enum Section {
    Nodes,
    Acts,
    Times,
}

fn read_doc(src: &str) -> Result<Doc, XmlError> {
    let mut reader = Reader::from_str(src);
    reader.config_mut().trim_text(true);
    let mut doc = Doc::default();
    let mut depth = 0usize;
    let mut section = Section::Nodes;
    let mut open_time = false;
    let mut closed = false;
    loop {
        let pos = reader.buffer_position();
        let event = reader.read_event().map_err(|e| XmlError::Syntax {
            pos: pos as u64,
            message: e.to_string(),
        })?;
        let (start, empty) = match &event {
            Event::Start(s) => (Some(s.clone()), false),
            Event::Empty(s) => (Some(s.clone()), true),
            _ => (None, false),
        };
        if let Some(s) = start {
            let tag = String::from_utf8_lossy(s.name().as_ref()).into_owned();
            if closed {
                return invalid("content after </rts>");
            }
            match (depth, tag.as_str(), open_time) {
                (0, "rts", _) => {
                    let [root] = <[String; 1]>::try_from(attrs(s.attributes(), "rts", &["root"])?)
                        .expect("one attribute");
                    doc.root = Some(number(&root, "root")?);
                    if empty {
                        return invalid("<rts> has no nodes");
                    }
                }
                (1, "node", _) if empty => {
                    if section > Section::Nodes {
                        return invalid("<node> after edges");
                    }
                    let v = attrs(s.attributes(), "node", &["id", "label"])?;
                    doc.nodes.push((number(&v[0], "node id")?, v[1].clone()));
                }
                (1, "act", _) if empty => {
                    if section > Section::Acts {
                        return invalid("<act> after <time>");
                    }
                    section = Section::Acts;
                    let v = attrs(s.attributes(), "act", &["from", "to", "label"])?;
                    if !is_ncname(&v[2]) {
                        return invalid(format!("action label `{}` is not a name", v[2]));
                    }
                    doc.acts.push((number(&v[0], "from")?, number(&v[1], "to")?, v[2].clone()));
                }
                (1, "time", _) => {
                    section = Section::Times;
                    let v = attrs(s.attributes(), "time", &["from", "to", "full"])?;
                    let full = match v[2].as_str() {
                        "true" | "1" => true,
                        "false" | "0" => false,
                        other => return invalid(format!("full=`{other}` is not a boolean")),
                    };
                    doc.times
                        .push((number(&v[0], "from")?, number(&v[1], "to")?, full, Vec::new()));
                    open_time = !empty;
                }
                (2, "forbid", true) if empty => {
                    let [a] = <[String; 1]>::try_from(attrs(s.attributes(), "forbid", &["a"])?)
                        .expect("one attribute");
                    if !is_ncname(&a) || a == TAU {
                        return invalid(format!("`{a}` cannot be forbidden"));
                    }
                    doc.times.last_mut().expect("open time").3.push(a);
                }
                _ => return invalid(format!("unexpected <{tag}> at depth {depth}")),
            }
            if !empty {
                depth += 1;
            }
            continue;
        }
        match event {
            Event::End(_) => {
                depth -= 1;
                if depth == 1 && open_time {
                    open_time = false;
                }
                if depth == 0 {
                    closed = true;
                }
            }
            Event::Eof => break,
            Event::Text(t) if !t.is_empty() => return invalid("unexpected text content"),
            Event::CData(_) => return invalid("unexpected CDATA"),
            _ => {}
        }
    }
    if !closed {
        return invalid("missing <rts> element");
    }
    Ok(doc)
}

/// Checks a document against the format without building the system.
pub fn validate_xml(src: &str) -> Result<(), XmlError> {
    from_xml(src).map(|_| ())
}

/// Parses a document. Node ids are renumbered densely in document order.
pub fn from_xml(src: &str) -> Result<Rts, XmlError> {
    let doc = read_doc(src)?;
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut labels: Vec<Arc<str>> = Vec::new();
    for (id, label) in &doc.nodes {
        if index.insert(*id, labels.len()).is_some() {
            return invalid(format!("duplicate node id {id}"));
        }
        labels.push(Arc::from(label.as_str()));
    }
    let node = |id: u64| -> Result<usize, XmlError> {
        index
            .get(&id)
            .copied()
            .ok_or_else(|| XmlError::Invalid(format!("unknown node id {id}")))
    };
    let root = node(doc.root.expect("rts seen"))?;
    let mut actions = vec![Vec::new(); labels.len()];
    for (from, to, label) in &doc.acts {
        let a = if label == TAU {
            Action::Tau
        } else {
            Action::Visible(Name::from(label.as_str()))
        };
        actions[node(*from)?].push((a, node(*to)?));
    }
    let mut time: Vec<Option<TimeEdge>> = vec![None; labels.len()];
    for (from, to, full, forbid) in &doc.times {
        let forbidden: ActionSet = forbid.iter().map(|a| Name::from(a.as_str())).collect();
        if forbidden.len() != forbid.len() {
            return invalid(format!("repeated <forbid> on the time step from {from}"));
        }
        if *full != forbidden.is_empty() {
            return invalid(format!("full flag of the time step from {from} contradicts its forbidden set"));
        }
        let slot = &mut time[node(*from)?];
        if slot.is_some() {
            return invalid(format!("node {from} has two time steps"));
        }
        *slot = Some(TimeEdge {
            forbidden,
            target: node(*to)?,
        });
    }
    Ok(Rts::from_parts(root, labels, actions, time))
}
