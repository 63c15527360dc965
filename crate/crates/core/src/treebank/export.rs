//! Read-only support for the NEGRA/TIGER export column format.
//!
//! Only words, tags and parent ids are used. Function labels, morphology and
//! secondary edges are dropped.

use std::collections::BTreeMap;

use super::{validate_label, ConstituentTree, Node, Sentence, TreebankEntry, ROOT_LABEL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExportOptions {
    /// Wrap every word in a node labeled with its tag instead of attaching
    /// it directly to its phrase.
    pub keep_tags: bool,
}

struct Pending {
    id: String,
    start_line: usize,
    words: Vec<(String, String, u32)>,
    phrases: BTreeMap<u32, (String, u32)>,
}

pub fn read_export(text: &str, options: ExportOptions) -> Result<Vec<TreebankEntry>> {
    let mut format4 = false;
    let mut current: Option<Pending> = None;
    let mut out = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        let err = |message: String| Error::Export { line: line_no, message };
        if line.is_empty() || line.starts_with("%%") {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "#FORMAT" => format4 = fields.get(1) == Some(&"4"),
            "#BOS" => {
                if current.is_some() {
                    return Err(err("#BOS inside an open sentence".into()));
                }
                let id = fields.get(1).ok_or_else(|| err("#BOS without sentence id".into()))?;
                current = Some(Pending {
                    id: id.to_string(),
                    start_line: line_no,
                    words: Vec::new(),
                    phrases: BTreeMap::new(),
                });
            }
            "#EOS" => {
                let pending = current.take().ok_or_else(|| err("#EOS without #BOS".into()))?;
                let start = pending.start_line;
                let id = pending.id.clone();
                let tree = assemble(pending, options).map_err(|e| Error::Export {
                    line: start,
                    message: e.to_string(),
                })?;
                out.push(TreebankEntry { id, tree });
            }
            first => {
                let Some(pending) = current.as_mut() else {
                    // header tables (#BOT/#EOT blocks) and stray lines outside sentences
                    continue;
                };
                if let Some(num) = first.strip_prefix('#') {
                    let Ok(node_id) = num.parse::<u32>() else {
                        continue;
                    };
                    // #ID LABEL [LEMMA] MORPH EDGE PARENT
                    let (label_col, parent_col) = if format4 { (2, 5) } else { (1, 4) };
                    let label = fields.get(label_col).ok_or_else(|| err("phrase line without label".into()))?;
                    let parent = parse_parent(&fields, parent_col).map_err(err)?;
                    pending.phrases.insert(node_id, (label.to_string(), parent));
                } else {
                    // WORD [LEMMA] TAG MORPH EDGE PARENT [SECEDGE SECPARENT]*
                    let (tag_col, parent_col) = if format4 { (2, 5) } else { (1, 4) };
                    let tag = fields.get(tag_col).ok_or_else(|| err("word line without tag".into()))?;
                    let parent = parse_parent(&fields, parent_col).map_err(err)?;
                    pending.words.push((first.to_string(), tag.to_string(), parent));
                }
            }
        }
    }
    if let Some(p) = current {
        return Err(Error::Export {
            line: p.start_line,
            message: "sentence without #EOS".into(),
        });
    }
    Ok(out)
}

fn parse_parent(fields: &[&str], col: usize) -> std::result::Result<u32, String> {
    fields
        .get(col)
        .ok_or_else(|| format!("missing parent column {}", col + 1))?
        .parse()
        .map_err(|_| format!("non-numeric parent id {:?}", fields[col]))
}

fn assemble(p: Pending, options: ExportOptions) -> Result<ConstituentTree> {
    let mut children: BTreeMap<u32, Vec<Node>> = BTreeMap::new();
    for (pos, (_, tag, parent)) in p.words.iter().enumerate() {
        let leaf = if options.keep_tags {
            validate_label(tag)?;
            Node::internal(tag.clone(), vec![Node::Leaf(pos)])
        } else {
            Node::Leaf(pos)
        };
        children.entry(*parent).or_default().push(leaf);
    }
    for (&id, (_, parent)) in &p.phrases {
        if id == 0 || *parent == id {
            return Err(Error::InvalidTree(format!("phrase #{id} has an invalid parent")));
        }
        if *parent != 0 && !p.phrases.contains_key(parent) {
            return Err(Error::InvalidTree(format!("phrase #{id} points to unknown parent #{parent}")));
        }
    }
    for (_, _, parent) in &p.words {
        if *parent != 0 && !p.phrases.contains_key(parent) {
            return Err(Error::InvalidTree(format!("word points to unknown parent #{parent}")));
        }
    }

    let mut visiting = Vec::new();
    let mut top = build_children(0, &p, &mut children, &mut visiting)?;
    let root = if top.len() == 1 && !top[0].is_leaf() {
        top.pop().unwrap()
    } else {
        Node::internal(ROOT_LABEL, top)
    };
    let sentence = Sentence::new(p.words.into_iter().map(|(w, _, _)| w))?;
    ConstituentTree::new(sentence, root)
}

fn build_children(
    id: u32,
    p: &Pending,
    children: &mut BTreeMap<u32, Vec<Node>>,
    visiting: &mut Vec<u32>,
) -> Result<Vec<Node>> {
    if visiting.contains(&id) {
        return Err(Error::InvalidTree(format!("cycle through phrase #{id}")));
    }
    visiting.push(id);
    let mut nodes = children.remove(&id).unwrap_or_default();
    for (&child, (label, parent)) in &p.phrases {
        if *parent == id {
            validate_label(label)?;
            let kids = build_children(child, p, children, visiting)?;
            if kids.is_empty() {
                return Err(Error::InvalidTree(format!("phrase #{child} dominates no words")));
            }
            nodes.push(Node::internal(label.clone(), kids));
        }
    }
    visiting.pop();
    nodes.sort_by_key(Node::min_position);
    Ok(nodes)
}
