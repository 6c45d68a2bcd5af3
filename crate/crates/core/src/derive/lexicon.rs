use crate::feature::{parse_equation, AtomSet, EqRhs, FeatureEquation, FeaturePath, Side};
use crate::trees::{ElementaryTree, Gorn, InstallError, Marker, TreeNode};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorWord {
    pub word: String,
    pub pos: String,
}

/// One syntactic database entry. Several `<<ENTRY>>`/`<<POS>>` pairs make
/// a multi-anchor entry; anchors are matched to a tree's anchor nodes in
/// preorder.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LexEntry {
    pub index: String,
    pub words: Vec<AnchorWord>,
    pub families: Vec<String>,
    pub trees: Vec<String>,
    /// Feature macros as written, e.g. `#TRANS+`.
    pub features: Vec<String>,
    pub equations: Vec<FeatureEquation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct LexiconError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    pub entries: Vec<LexEntry>,
    pub warnings: Vec<String>,
}

/// Expands `#NAME+` / `#NAME-` to `anchor.t:<name> = +/-`. Other macros
/// have no expansion.
pub fn expand_macro(m: &str) -> Option<FeatureEquation> {
    let body = m.strip_prefix('#')?;
    let (name, value) = match body.chars().last()? {
        '+' => (&body[..body.len() - 1], "+"),
        '-' => (&body[..body.len() - 1], "-"),
        _ => return None,
    };
    if name.is_empty() {
        return None;
    }
    Some(FeatureEquation {
        lhs: FeaturePath { node: "anchor".into(), side: Side::Top, attrs: vec![name.to_lowercase()] },
        rhs: EqRhs::Atoms(AtomSet::single(value)),
    })
}

/// Parses `<<KEY>>value` records; each `<<INDEX>>` starts a new entry.
/// Keys: INDEX, ENTRY, POS, FAMILY, TREES, FEATURES, EQ. `EQ` values hold
/// equations separated by `;` or newlines. Lines starting with `%` are
/// comments.
pub fn parse_lexicon(text: &str) -> Result<Lexicon, LexiconError> {
    let mut tokens: Vec<(String, String, usize)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim_start().starts_with('%') {
            continue;
        }
        let mut rest = line;
        if !rest.trim_start().starts_with("<<") {
            match tokens.last_mut() {
                Some((_, v, _)) => {
                    v.push('\n');
                    v.push_str(rest);
                }
                None if rest.trim().is_empty() => {}
                None => return Err(LexiconError { line: line_no, message: "text before the first key".into() }),
            }
            continue;
        }
        while let Some(start) = rest.find("<<") {
            let after = &rest[start + 2..];
            let end =
                after.find(">>").ok_or_else(|| LexiconError { line: line_no, message: "unterminated key".into() })?;
            let key = after[..end].to_string();
            let tail = &after[end + 2..];
            let next = tail.find("<<").unwrap_or(tail.len());
            tokens.push((key, tail[..next].to_string(), line_no));
            rest = &tail[next..];
        }
    }
    let mut lex = Lexicon::default();
    let mut cur: Option<LexEntry> = None;
    for (key, value, line) in tokens {
        let value = value.trim();
        let err = |message: String| LexiconError { line, message };
        if key == "INDEX" {
            lex.entries.extend(cur.take());
            cur = Some(LexEntry { index: value.to_string(), ..Default::default() });
            continue;
        }
        let e = cur.as_mut().ok_or_else(|| err(format!("<<{key}>> before <<INDEX>>")))?;
        match key.as_str() {
            "ENTRY" => e.words.push(AnchorWord { word: value.to_string(), pos: String::new() }),
            "POS" => match e.words.last_mut() {
                Some(w) if w.pos.is_empty() => w.pos = value.to_string(),
                _ => return Err(err("<<POS>> without a preceding <<ENTRY>>".into())),
            },
            "FAMILY" => e.families.extend(value.split_whitespace().map(str::to_string)),
            "TREES" => e.trees.extend(value.split_whitespace().map(str::to_string)),
            "FEATURES" => {
                for m in value.split_whitespace() {
                    if expand_macro(m).is_none() {
                        lex.warnings.push(format!("line {line}: macro {m} has no expansion"));
                    }
                    e.features.push(m.to_string());
                }
            }
            "EQ" => {
                for part in value.split([';', '\n']).map(str::trim).filter(|p| !p.is_empty()) {
                    e.equations.push(parse_equation(part).map_err(|x| err(format!("{part}: {x}")))?);
                }
            }
            other => return Err(err(format!("unknown key <<{other}>>"))),
        }
    }
    lex.entries.extend(cur);
    for e in &lex.entries {
        if e.words.is_empty() {
            return Err(LexiconError { line: 0, message: format!("entry {} has no <<ENTRY>>", e.index) });
        }
    }
    Ok(lex)
}

/// Canonical text: one key group per line, entries separated by a blank
/// line.
pub fn write_lexicon(entries: &[LexEntry]) -> String {
    let mut out = String::new();
    for (i, e) in entries.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write!(out, "<<INDEX>>{}", e.index).unwrap();
        for w in &e.words {
            write!(out, "<<ENTRY>>{}<<POS>>{}", w.word, w.pos).unwrap();
        }
        out.push('\n');
        for (key, items, sep) in [
            ("FAMILY", e.families.iter().map(String::clone).collect::<Vec<_>>(), " "),
            ("TREES", e.trees.clone(), " "),
            ("FEATURES", e.features.clone(), " "),
            ("EQ", e.equations.iter().map(|q| q.to_string()).collect(), "; "),
        ] {
            if !items.is_empty() {
                writeln!(out, "<<{key}>>{}", items.join(sep)).unwrap();
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexicalizeError {
    #[error("tree {tree} has {anchors} anchors but the entry has {words} words")]
    Arity { tree: String, anchors: usize, words: usize },
    #[error("tree {tree}: anchor {anchor} is not a {pos}")]
    Pos { tree: String, anchor: String, pos: String },
    #[error("tree {tree}: {error}")]
    Install { tree: String, error: Box<InstallError> },
}

impl LexicalizeError {
    /// Feature clashes just mean the entry does not fit the tree.
    pub fn is_clash(&self) -> bool {
        matches!(self, LexicalizeError::Install { error, .. } if matches!(**error, InstallError::Clash { .. }))
    }
}

fn anchor_ref(name: &str) -> Option<usize> {
    let lower = name.to_lowercase();
    let rest = lower.strip_prefix("anchor")?;
    if rest.is_empty() {
        return Some(0);
    }
    rest.parse::<usize>().ok().filter(|&n| n > 0).map(|n| n - 1)
}

/// Inserts the entry's words under the tree's anchor nodes and installs
/// the entry's equations. Equation nodes `anchor`, `anchor1`, `anchor2`...
/// name the anchors; other names are tree node names.
pub fn lexicalize(t: &ElementaryTree, e: &LexEntry) -> Result<ElementaryTree, LexicalizeError> {
    let anchors = t.anchors();
    if anchors.len() != e.words.len() {
        return Err(LexicalizeError::Arity { tree: t.name.clone(), anchors: anchors.len(), words: e.words.len() });
    }
    let mut out = t.clone();
    for (addr, w) in anchors.iter().zip(&e.words) {
        let n = out.node_mut(addr).unwrap();
        if !w.pos.is_empty() && n.label.stem != w.pos {
            return Err(LexicalizeError::Pos { tree: t.name.clone(), anchor: n.name(), pos: w.pos.clone() });
        }
        n.marker = Marker::NONE;
        n.children = vec![TreeNode::word(&w.word)];
    }
    let resolve = |t: &ElementaryTree, name: &str| -> Result<Gorn, InstallError> {
        match anchor_ref(name) {
            Some(i) => anchors.get(i).cloned().ok_or_else(|| InstallError::UnknownNode(name.to_string())),
            None => t.resolve_name(name),
        }
    };
    let macros = e.features.iter().filter_map(|m| expand_macro(m));
    for eq in macros.chain(e.equations.iter().cloned()) {
        out.install_with(&eq, resolve)
            .map_err(|error| LexicalizeError::Install { tree: t.name.clone(), error: Box::new(error) })?;
    }
    Ok(out)
}
