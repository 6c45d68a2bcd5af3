//! Line-based tree serialization.
//!
//! ```text
//! tree αnx0Vnx1 initial
//! % free-form comment
//! S_r - 2 [] [mode:#1]
//!   NP_0 subst 0 [case:nom] []
//!   VP - 2 [mode:#1] []
//!     V anchor 0 [] []
//!     NP_1 subst 0 [] []
//! link #1 []
//! eq V.t:<mode> = ind
//! end
//! ```
//!
//! Nodes are listed in preorder with their child counts. Terminals are
//! quoted (`"by"`), ε is `""`. Feature structures and `eq` lines are
//! optional on input; `eq` lines are installed after the structure is
//! built. The writer emits the canonical form: two-space indentation per
//! depth, links renumbered, no `eq` lines.

use super::{ElementaryTree, InstallError, Marker, NodeLabel, TreeKind, TreeNode};
use crate::feature::{parse_equation, parse_value, FeatureStructure, LinkId, Value};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct TextError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

fn err(line: usize, col: usize, message: impl Into<String>) -> TextError {
    TextError { line, col, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    /// Label text as written; for terminals, the word.
    pub label: String,
    pub terminal: bool,
    pub marker: Marker,
    pub children: usize,
    pub top: FeatureStructure,
    pub bottom: FeatureStructure,
    pub line: usize,
}

/// One `tree ... end` block, before labels are interpreted.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeRecord {
    pub name: String,
    pub kind: TreeKind,
    pub comments: Vec<String>,
    pub nodes: Vec<NodeRecord>,
    pub links: Vec<(u32, Value)>,
    pub equations: Vec<(String, usize)>,
    pub line: usize,
}

pub fn parse_records(text: &str) -> Result<Vec<TreeRecord>, TextError> {
    let mut out = Vec::new();
    let mut current: Option<TreeRecord> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_start();
        let col = raw.len() - line.len() + 1;
        if line.is_empty() {
            continue;
        }
        let Some(rec) = current.as_mut() else {
            if line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            if parts.next() != Some("tree") {
                return Err(err(line_no, col, "expected 'tree'"));
            }
            let name = parts.next().ok_or_else(|| err(line_no, col, "missing tree name"))?;
            let kind = match parts.next() {
                Some("initial") => TreeKind::Initial,
                Some("auxiliary") => TreeKind::Auxiliary,
                _ => return Err(err(line_no, col, "expected 'initial' or 'auxiliary'")),
            };
            current = Some(TreeRecord {
                name: name.to_string(),
                kind,
                comments: Vec::new(),
                nodes: Vec::new(),
                links: Vec::new(),
                equations: Vec::new(),
                line: line_no,
            });
            continue;
        };
        if line == "end" {
            out.push(current.take().unwrap());
        } else if let Some(c) = line.strip_prefix('%') {
            rec.comments.push(c.strip_prefix(' ').unwrap_or(c).to_string());
        } else if let Some(e) = line.strip_prefix("eq ") {
            rec.equations.push((e.trim().to_string(), line_no));
        } else if let Some(rest) = line.strip_prefix("link ") {
            let rest = rest.trim_start();
            let (v, used) = parse_value(rest).map_err(|e| err(line_no, col + 5, e.message))?;
            let Value::Link(id) = v else {
                return Err(err(line_no, col + 5, "expected #id"));
            };
            let (value, used2) =
                parse_value(&rest[used..]).map_err(|e| err(line_no, col + 5 + used + e.offset, e.message))?;
            if !rest[used + used2..].trim().is_empty() {
                return Err(err(line_no, col, "trailing input after link value"));
            }
            if let Value::Link(_) = value {
                return Err(err(line_no, col, "a link cell cannot hold a bare link"));
            }
            rec.links.push((id.0, value));
        } else {
            rec.nodes.push(parse_node(line, line_no, col)?);
        }
    }
    if let Some(rec) = current {
        return Err(err(rec.line, 1, format!("tree {} is missing 'end'", rec.name)));
    }
    Ok(out)
}

fn parse_node(line: &str, line_no: usize, col: usize) -> Result<NodeRecord, TextError> {
    let (label, terminal, rest) = if let Some(q) = line.strip_prefix('"') {
        let end = q.find('"').ok_or_else(|| err(line_no, col, "unterminated quote"))?;
        (q[..end].to_string(), true, &q[end + 1..])
    } else {
        let end = line.find(char::is_whitespace).unwrap_or(line.len());
        (line[..end].to_string(), false, &line[end..])
    };
    let mut rest = rest.trim_start();
    let field = |rest: &mut &str| -> Option<String> {
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        if end == 0 {
            return None;
        }
        let f = rest[..end].to_string();
        *rest = rest[end..].trim_start();
        Some(f)
    };
    let marker_text = field(&mut rest).ok_or_else(|| err(line_no, col, "missing marker"))?;
    let marker =
        Marker::parse(&marker_text).ok_or_else(|| err(line_no, col, format!("unknown marker {marker_text}")))?;
    let count = field(&mut rest).ok_or_else(|| err(line_no, col, "missing child count"))?;
    let children: usize = count.parse().map_err(|_| err(line_no, col, format!("bad child count {count}")))?;
    let mut fss = Vec::new();
    for _ in 0..2 {
        if rest.is_empty() {
            fss.push(FeatureStructure::new());
            continue;
        }
        let offset = line.len() - rest.len();
        let (v, used) = parse_value(rest).map_err(|e| err(line_no, col + offset + e.offset, e.message))?;
        match v {
            Value::Struct(fs) => fss.push(fs),
            _ => return Err(err(line_no, col + offset, "expected feature structure")),
        }
        rest = rest[used..].trim_start();
    }
    if !rest.is_empty() {
        return Err(err(line_no, col, "trailing input on node line"));
    }
    let bottom = fss.pop().unwrap();
    let top = fss.pop().unwrap();
    Ok(NodeRecord { label, terminal, marker, children, top, bottom, line: line_no })
}

impl TreeRecord {
    /// Rebuilds the node hierarchy, mapping each record to a value with `f`.
    pub fn build<T>(&self, mut f: impl FnMut(&NodeRecord, Vec<T>) -> Result<T, TextError>) -> Result<T, TextError> {
        fn go<T>(
            nodes: &[NodeRecord],
            pos: &mut usize,
            f: &mut impl FnMut(&NodeRecord, Vec<T>) -> Result<T, TextError>,
        ) -> Result<T, TextError> {
            let rec = &nodes[*pos];
            *pos += 1;
            let mut kids = Vec::with_capacity(rec.children);
            for _ in 0..rec.children {
                if *pos >= nodes.len() {
                    return Err(err(rec.line, 1, "child count exceeds listed nodes"));
                }
                kids.push(go(nodes, pos, f)?);
            }
            f(rec, kids)
        }
        if self.nodes.is_empty() {
            return Err(err(self.line, 1, "tree has no nodes"));
        }
        let mut pos = 0;
        let root = go(&self.nodes, &mut pos, &mut f)?;
        if pos != self.nodes.len() {
            return Err(err(self.nodes[pos].line, 1, "node outside the root's subtree"));
        }
        Ok(root)
    }

    pub fn to_tree(&self) -> Result<ElementaryTree, TextError> {
        let root = self.build(|rec, children| {
            if !rec.terminal && (rec.label.is_empty() || rec.label.starts_with('?')) {
                return Err(err(rec.line, 1, format!("invalid node label '{}'", rec.label)));
            }
            let label =
                if rec.terminal { NodeLabel::new(rec.label.clone(), None) } else { NodeLabel::parse(&rec.label) };
            Ok(TreeNode {
                label,
                terminal: rec.terminal,
                marker: rec.marker,
                top: rec.top.clone(),
                bottom: rec.bottom.clone(),
                children,
            })
        })?;
        let mut tree = ElementaryTree::new(self.name.clone(), self.kind, root);
        tree.comments = self.comments.clone();
        for (id, v) in &self.links {
            tree.links.insert_raw(LinkId(*id), v.clone());
        }
        let mut ids = Vec::new();
        for (_, n) in tree.nodes() {
            n.top.links(&mut ids);
            n.bottom.links(&mut ids);
        }
        for id in ids {
            if tree.links.value(id).is_none() {
                tree.links.insert_raw(id, Value::bottom());
            }
        }
        for (text, line) in &self.equations {
            let eq = parse_equation(text).map_err(|e| err(*line, 4 + e.offset, e.message))?;
            tree.install_with(&eq, |t, name| t.resolve_name(name)).map_err(|e| {
                let msg = match e {
                    InstallError::Clash { clash, .. } => format!("equation fails: {clash}"),
                    other => other.to_string(),
                };
                err(*line, 1, msg)
            })?;
        }
        Ok(tree)
    }
}

/// Parses a file of tree records into elementary trees.
pub fn parse_trees(text: &str) -> Result<Vec<ElementaryTree>, TextError> {
    parse_records(text)?.iter().map(TreeRecord::to_tree).collect()
}

pub(crate) fn write_tree(t: &ElementaryTree) -> String {
    let mut s = String::new();
    writeln!(s, "tree {} {}", t.name, t.kind).unwrap();
    for c in &t.comments {
        if c.is_empty() {
            writeln!(s, "%").unwrap();
        } else {
            writeln!(s, "% {c}").unwrap();
        }
    }
    fn node(s: &mut String, n: &TreeNode, depth: usize) {
        let label = if n.terminal { format!("\"{}\"", n.label.stem) } else { n.name() };
        writeln!(s, "{}{} {} {} {} {}", "  ".repeat(depth), label, n.marker, n.children.len(), n.top, n.bottom)
            .unwrap();
        for c in &n.children {
            node(s, c, depth + 1);
        }
    }
    node(&mut s, &t.root, 0);
    let mut ids: Vec<LinkId> = t.links.ids().collect();
    ids.sort();
    for id in ids {
        if t.links.find(id) != id {
            continue;
        }
        let v = t.links.value(id).cloned().unwrap_or_else(Value::bottom);
        writeln!(s, "link #{} {}", id.0, v).unwrap();
    }
    s.push_str("end\n");
    s
}

/// Canonical text for a list of trees, in the given order.
pub fn write_trees(trees: &[ElementaryTree]) -> String {
    trees.iter().map(|t| t.canonical_text()).collect::<Vec<_>>().join("")
}
