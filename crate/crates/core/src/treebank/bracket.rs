//! LISP-style bracketed trees.
//!
//! `ptb` numbers terminals left to right; `discbracket` writes every terminal
//! as `INDEX=WORD` so that discontinuous constituents survive the round trip.

use std::fmt::Write as _;

use super::{validate_label, ConstituentTree, Node, Sentence, TreebankEntry, ROOT_LABEL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketFormat {
    Ptb,
    Disc,
}

enum Raw {
    Word { text: String, offset: usize },
    Node { label: String, children: Vec<Raw> },
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn error(&self, offset: usize, message: impl Into<String>) -> Error {
        let line = self.text[..offset.min(self.text.len())].matches('\n').count() + 1;
        Error::Syntax {
            line,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn atom(&mut self) -> (String, usize) {
        let start = self.pos;
        let rest = &self.text[start..];
        let end = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        self.pos += end;
        (rest[..end].to_string(), start)
    }

    /// Reads one bracket starting at the current `(`. The outermost bracket may
    /// omit its label.
    fn bracket(&mut self, outermost: bool) -> Result<Raw> {
        let open = self.pos;
        self.pos += 1;
        self.skip_ws();
        let label = match self.peek() {
            None => return Err(self.error(open, "unbalanced brackets: unexpected end of input")),
            Some(')') => return Err(self.error(open, "empty constituent")),
            Some('(') if outermost => String::new(),
            Some('(') => return Err(self.error(self.pos, "constituent without a label")),
            Some(_) => self.atom().0,
        };
        let mut children = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(self.error(open, "unbalanced brackets: unclosed constituent")),
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                Some('(') => children.push(self.bracket(false)?),
                Some(_) => {
                    let (text, offset) = self.atom();
                    children.push(Raw::Word { text, offset });
                }
            }
        }
        if children.is_empty() {
            return Err(self.error(open, format!("empty constituent {label}")));
        }
        Ok(Raw::Node { label, children })
    }

    /// Next complete tree, or `None` at end of input.
    fn next_tree(&mut self) -> Result<Option<Raw>> {
        self.skip_ws();
        match self.peek() {
            None => Ok(None),
            Some('(') => {
                let raw = self.bracket(true)?;
                Ok(Some(unwrap_root(raw)))
            }
            Some(')') => Err(self.error(self.pos, "unbalanced brackets: unexpected ')'")),
            Some(_) => Err(self.error(self.pos, "text outside of brackets")),
        }
    }
}

/// Drops an unlabeled outer bracket around a single tree; several top-level
/// items share a synthetic root instead.
fn unwrap_root(raw: Raw) -> Raw {
    match raw {
        Raw::Node { label, mut children } if label.is_empty() => {
            if children.len() == 1 && matches!(children[0], Raw::Node { .. }) {
                children.pop().unwrap()
            } else {
                Raw::Node {
                    label: ROOT_LABEL.to_string(),
                    children,
                }
            }
        }
        other => other,
    }
}

fn build(reader: &Reader<'_>, raw: Raw, format: BracketFormat) -> Result<ConstituentTree> {
    let mut words: Vec<Option<String>> = Vec::new();
    let root = convert(reader, raw, format, &mut words)?;
    let mut sentence = Vec::with_capacity(words.len());
    for (i, w) in words.into_iter().enumerate() {
        match w {
            Some(w) => sentence.push(w),
            None => return Err(reader.error(reader.pos, format!("missing terminal position {i}"))),
        }
    }
    let sentence = Sentence::new(sentence)?;
    ConstituentTree::new(sentence, root)
}

fn convert(reader: &Reader<'_>, raw: Raw, format: BracketFormat, words: &mut Vec<Option<String>>) -> Result<Node> {
    match raw {
        Raw::Node { label, children } => {
            validate_label(&label)?;
            let children = children
                .into_iter()
                .map(|c| convert(reader, c, format, words))
                .collect::<Result<Vec<_>>>()?;
            Ok(Node::Internal { label, children })
        }
        Raw::Word { text, offset } => match format {
            BracketFormat::Ptb => {
                words.push(Some(text));
                Ok(Node::Leaf(words.len() - 1))
            }
            BracketFormat::Disc => {
                let (index, word) = text
                    .split_once('=')
                    .ok_or_else(|| reader.error(offset, format!("terminal {text:?} is not INDEX=WORD")))?;
                let index: usize = index
                    .parse()
                    .map_err(|_| reader.error(offset, format!("terminal {text:?} has a non-numeric index")))?;
                if word.is_empty() {
                    return Err(reader.error(offset, format!("terminal {text:?} has an empty word")));
                }
                if words.len() <= index {
                    words.resize(index + 1, None);
                }
                if words[index].is_some() {
                    return Err(reader.error(offset, format!("duplicate terminal position {index}")));
                }
                words[index] = Some(word.to_string());
                Ok(Node::Leaf(index))
            }
        },
    }
}

/// Parses exactly one bracketed tree.
pub fn parse_bracketed(text: &str, format: BracketFormat) -> Result<ConstituentTree> {
    let mut reader = Reader { text, pos: 0 };
    let raw = reader
        .next_tree()?
        .ok_or_else(|| reader.error(0, "no tree in input"))?;
    let tree = build(&reader, raw, format)?;
    reader.skip_ws();
    if reader.pos < text.len() {
        return Err(reader.error(reader.pos, "trailing content after tree"));
    }
    Ok(tree)
}

/// Parses a sequence of trees; ids are 1-based indices.
pub fn parse_treebank(text: &str, format: BracketFormat) -> Result<Vec<TreebankEntry>> {
    let mut reader = Reader { text, pos: 0 };
    let mut out = Vec::new();
    while let Some(raw) = reader.next_tree()? {
        let tree = build(&reader, raw, format)?;
        out.push(TreebankEntry {
            id: (out.len() + 1).to_string(),
            tree,
        });
    }
    Ok(out)
}

pub fn write_bracketed(tree: &ConstituentTree, format: BracketFormat) -> Result<String> {
    if format == BracketFormat::Ptb && !tree.in_surface_order() {
        return Err(Error::NotPtbWritable);
    }
    let mut out = String::new();
    write_node(&mut out, tree.root(), tree.sentence(), format);
    Ok(out)
}

/// One tree per line, each line terminated by a newline.
pub fn write_treebank<'a, I>(trees: I, format: BracketFormat) -> Result<String>
where
    I: IntoIterator<Item = &'a ConstituentTree>,
{
    let mut out = String::new();
    for t in trees {
        out.push_str(&write_bracketed(t, format)?);
        out.push('\n');
    }
    Ok(out)
}

fn write_node(out: &mut String, node: &Node, sentence: &Sentence, format: BracketFormat) {
    match node {
        Node::Leaf(p) => match format {
            BracketFormat::Ptb => out.push_str(sentence.word(*p)),
            BracketFormat::Disc => {
                let _ = write!(out, "{p}={}", sentence.word(*p));
            }
        },
        Node::Internal { label, children } => {
            out.push('(');
            out.push_str(label);
            for c in children {
                out.push(' ');
                write_node(out, c, sentence, format);
            }
            out.push(')');
        }
    }
}
