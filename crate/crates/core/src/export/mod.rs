//! Interchange formats for transition systems: a small XML dialect that
//! round-trips exactly, and Graphviz DOT for viewing.

mod dot;
mod xml;

pub use dot::{to_dot, DotOptions};
pub use xml::{from_xml, to_xml, validate_xml, XmlError, SCHEMA};
