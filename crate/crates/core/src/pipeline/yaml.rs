//! Strict YAML subset: block/flow mappings, sequences and scalars only.
//! Anchors, aliases, tags and multiple documents are rejected.

use yaml_rust2::parser::{MarkedEventReceiver, Parser};
use yaml_rust2::scanner::{Marker, TScalarStyle};
use yaml_rust2::Event;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Scalar text and whether it was quoted.
    Scalar(String, bool),
    Seq(Vec<Node>),
    /// Entries in document order; keys are unique.
    Map(Vec<(String, Node)>),
}

impl Node {
    pub fn kind(&self) -> &'static str {
        match self {
            Node::Scalar(..) => "scalar",
            Node::Seq(_) => "sequence",
            Node::Map(_) => "mapping",
        }
    }
}

enum Frame {
    Seq(Vec<Node>),
    Map(Vec<(String, Node)>, Option<String>),
}

#[derive(Default)]
struct Builder {
    stack: Vec<Frame>,
    docs: Vec<Node>,
    error: Option<String>,
}

impl Builder {
    fn fail(&mut self, msg: String, mark: Marker) {
        if self.error.is_none() {
            self.error = Some(format!("{msg} (line {})", mark.line()));
        }
    }

    fn push_node(&mut self, node: Node, mark: Marker) {
        match self.stack.last_mut() {
            None => self.docs.push(node),
            Some(Frame::Seq(items)) => items.push(node),
            Some(Frame::Map(entries, key)) => match key.take() {
                None => match node {
                    Node::Scalar(k, _) => {
                        if entries.iter().any(|(e, _)| *e == k) {
                            self.fail(format!("duplicate key `{k}`"), mark);
                        } else {
                            *key = Some(k);
                        }
                    }
                    other => self.fail(format!("mapping keys must be scalars, found a {}", other.kind()), mark),
                },
                Some(k) => entries.push((k, node)),
            },
        }
    }
}

impl MarkedEventReceiver for Builder {
    fn on_event(&mut self, ev: Event, mark: Marker) {
        if self.error.is_some() {
            return;
        }
        match ev {
            Event::Alias(_) => self.fail("aliases are not supported".into(), mark),
            Event::Scalar(_, _, anchor, tag) | Event::SequenceStart(anchor, tag) | Event::MappingStart(anchor, tag)
                if anchor != 0 || tag.is_some() =>
            {
                let what = if anchor != 0 { "anchors" } else { "tags" };
                self.fail(format!("{what} are not supported"), mark);
            }
            Event::Scalar(text, style, _, _) => {
                let quoted = !matches!(style, TScalarStyle::Plain);
                self.push_node(Node::Scalar(text, quoted), mark);
            }
            Event::SequenceStart(..) => self.stack.push(Frame::Seq(Vec::new())),
            Event::MappingStart(..) => self.stack.push(Frame::Map(Vec::new(), None)),
            Event::SequenceEnd | Event::MappingEnd => {
                let node = match self.stack.pop() {
                    Some(Frame::Seq(items)) => Node::Seq(items),
                    Some(Frame::Map(entries, _)) => Node::Map(entries),
                    None => return self.fail("unbalanced collection".into(), mark),
                };
                self.push_node(node, mark);
            }
            _ => {}
        }
    }
}

/// Parses a single YAML document. An empty document parses as an empty mapping.
pub fn parse(text: &str) -> Result<Node> {
    let mut b = Builder::default();
    Parser::new_from_str(text)
        .load(&mut b, true)
        .map_err(|e| Error::config("<yaml>", e.to_string()))?;
    if let Some(msg) = b.error {
        return Err(Error::config("<yaml>", msg));
    }
    match b.docs.len() {
        0 => Ok(Node::Map(Vec::new())),
        1 => Ok(b.docs.pop().expect("one document")),
        n => Err(Error::config("<yaml>", format!("expected one document, found {n}"))),
    }
}
