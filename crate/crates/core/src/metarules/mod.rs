//! Metarules: pattern-tree pairs that rewrite elementary trees.
//!
//! A metarule's left-hand side is matched against an input tree; each
//! match instantiates the right-hand side into one output tree. Pattern
//! nodes are constants (`NP_0`), typed variables (`?1NP_?`, `?3NP_1/PP`)
//! binding one node, or untyped variables (`?2`) binding a run of
//! subtrees with holes cut out for the variable's pattern children.

mod apply;
mod matching;

pub use apply::{
    apply_metarule, apply_mode, feature_filter, instantiate_rhs, ApplyOptions, Mode, ModeOutput, TransferPlan,
};
pub use matching::{match_trees, valid_mappings, Capture, MatchResult};

use crate::feature::{parse_equation, FeatureEquation};
use crate::trees::{parse_records, Marker, NodeLabel, TextError, TreeNode, TreeRecord};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Subscript constraint of a type specifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subscript {
    /// No subscript: the input node must have none.
    Absent,
    /// `_?`: any subscript, or none.
    Any,
    Exact(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeSpec {
    pub stem: String,
    pub subscript: Subscript,
}

impl TypeSpec {
    pub fn admits(&self, label: &NodeLabel) -> bool {
        label.stem == self.stem
            && match &self.subscript {
                Subscript::Absent => label.subscript.is_none(),
                Subscript::Any => true,
                Subscript::Exact(s) => label.subscript.as_deref() == Some(s.as_str()),
            }
    }
}

impl fmt::Display for TypeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.stem)?;
        match &self.subscript {
            Subscript::Absent => Ok(()),
            Subscript::Any => f.write_str("_?"),
            Subscript::Exact(s) => write!(f, "_{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternKind {
    Constant(NodeLabel),
    Typed { id: u32, specs: Vec<TypeSpec> },
    Untyped { id: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed pattern node '{text}': {reason}")]
pub struct PatternError {
    pub text: String,
    pub reason: &'static str,
}

fn split_id(text: &str) -> Option<(u32, &str)> {
    let rest = text.strip_prefix('?')?;
    let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    let id = rest[..end].parse().ok()?;
    Some((id, &rest[end..]))
}

fn parse_specs(text: &str) -> Option<Vec<TypeSpec>> {
    text.split('/')
        .map(|s| {
            let (stem, subscript) = match s.split_once('_') {
                Some((stem, "?")) => (stem, Subscript::Any),
                Some((stem, sub)) if !sub.is_empty() => (stem, Subscript::Exact(sub.to_string())),
                Some(_) => return None,
                None => (s, Subscript::Absent),
            };
            let ok = !stem.is_empty() && !stem.contains('?');
            ok.then(|| TypeSpec { stem: stem.to_string(), subscript })
        })
        .collect()
}

/// Classifies a pattern node name.
pub fn parse_pattern_node(text: &str) -> Result<PatternKind, PatternError> {
    let bad = |reason| PatternError { text: text.to_string(), reason };
    if text.is_empty() {
        return Err(bad("empty name"));
    }
    if !text.starts_with('?') {
        return Ok(PatternKind::Constant(NodeLabel::parse(text)));
    }
    let (id, rest) = split_id(text).ok_or_else(|| bad("'?' must be followed by a number"))?;
    if rest.is_empty() {
        return Ok(PatternKind::Untyped { id });
    }
    let specs = parse_specs(rest).ok_or_else(|| bad("bad type specifier"))?;
    Ok(PatternKind::Typed { id, specs })
}

/// Node reference inside a metarule equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum NodeRef {
    Var(u32),
    Constant(String),
    /// `?NP_?`: any node admitted by one of the specifiers.
    Anonymous(Vec<TypeSpec>),
}

pub(crate) fn parse_node_ref(text: &str) -> Option<NodeRef> {
    if !text.starts_with('?') {
        return Some(NodeRef::Constant(text.to_string()));
    }
    if let Some((id, _)) = split_id(text) {
        return Some(NodeRef::Var(id));
    }
    parse_specs(&text[1..]).map(NodeRef::Anonymous)
}

/// Feature metavariable `?n` standing for an attribute or an atom.
pub(crate) fn metavariable(text: &str) -> Option<u32> {
    match split_id(text) {
        Some((id, "")) => Some(id),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternNode {
    pub kind: PatternKind,
    /// Quoted word in the pattern; only meaningful for constants.
    pub terminal: bool,
    pub marker: Marker,
    pub children: Vec<PatternNode>,
}

impl PatternNode {
    pub fn walk<'a>(&'a self, out: &mut Vec<&'a PatternNode>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }

    pub fn from_tree(n: &TreeNode) -> PatternNode {
        PatternNode {
            kind: PatternKind::Constant(n.label.clone()),
            terminal: n.terminal,
            marker: n.marker,
            children: n.children.iter().map(PatternNode::from_tree).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTree {
    pub name: String,
    pub comments: Vec<String>,
    pub root: PatternNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EqClass {
    /// `+eq`: must hold in the input; copied.
    RequireRetain,
    /// `-eq`: must hold in the input; not copied.
    RequireDrop,
    /// Raw lhs equation: never copied.
    OptionalDrop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassedEquation {
    pub class: EqClass,
    pub equation: FeatureEquation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metarule {
    pub name: String,
    pub lhs: PatternTree,
    pub rhs: PatternTree,
    pub lhs_eqs: Vec<ClassedEquation>,
    /// Equations added to every output.
    pub rhs_eqs: Vec<FeatureEquation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetaruleError {
    #[error(transparent)]
    Text(#[from] TextError),
    #[error("line {line}: {error}")]
    Pattern { line: usize, error: PatternError },
    #[error("line {line}: {message}")]
    Equation { line: usize, message: String },
    #[error("untyped variable ?{0} occurs more than once on the left")]
    RepeatedUntyped(u32),
    #[error("variable ?{0} on the right is not bound on the left")]
    Unbound(u32),
    #[error("?{id} has {lhs} children on the left but {rhs} on the right")]
    ChildCount { id: u32, lhs: usize, rhs: usize },
    #[error("typed variable ?{0} used as untyped, or the reverse")]
    KindMismatch(u32),
    #[error("right-hand side yields {0} root nodes instead of one")]
    RootCount(usize),
    #[error("equation {equation} fails in the output: {message}")]
    Install { equation: String, message: String },
}

fn pattern_from_record(rec: &TreeRecord) -> Result<PatternTree, MetaruleError> {
    let root = rec.build(|n, children| {
        let kind = if n.terminal {
            PatternKind::Constant(NodeLabel::new(n.label.clone(), None))
        } else {
            parse_pattern_node(&n.label).map_err(|e| TextError { line: n.line, col: 1, message: e.to_string() })?
        };
        Ok(PatternNode { kind, terminal: n.terminal, marker: n.marker, children })
    })?;
    Ok(PatternTree { name: rec.name.clone(), comments: rec.comments.clone(), root })
}

impl Metarule {
    /// Builds a metarule from an lhs and an rhs tree record. `eq` lines of
    /// the lhs may start with `+` or `-`; rhs `eq` lines are additions.
    pub fn from_records(lhs: &TreeRecord, rhs: &TreeRecord) -> Result<Metarule, MetaruleError> {
        let mut lhs_eqs = Vec::new();
        for (text, line) in &lhs.equations {
            let (class, body) = match text.as_bytes().first() {
                Some(b'+') => (EqClass::RequireRetain, &text[1..]),
                Some(b'-') => (EqClass::RequireDrop, &text[1..]),
                _ => (EqClass::OptionalDrop, text.as_str()),
            };
            let equation =
                parse_equation(body).map_err(|e| MetaruleError::Equation { line: *line, message: e.to_string() })?;
            lhs_eqs.push(ClassedEquation { class, equation });
        }
        let mut rhs_eqs = Vec::new();
        for (text, line) in &rhs.equations {
            rhs_eqs.push(
                parse_equation(text).map_err(|e| MetaruleError::Equation { line: *line, message: e.to_string() })?,
            );
        }
        let mr = Metarule {
            name: lhs.name.clone(),
            lhs: pattern_from_record(lhs)?,
            rhs: pattern_from_record(rhs)?,
            lhs_eqs,
            rhs_eqs,
        };
        mr.check()?;
        Ok(mr)
    }

    /// Checks that untyped variables are unique on the left and that every
    /// right-hand variable is bound on the left with the same kind and,
    /// for untyped ones, the same number of children.
    pub fn check(&self) -> Result<(), MetaruleError> {
        let mut left: BTreeMap<u32, (bool, usize)> = BTreeMap::new();
        let mut nodes = Vec::new();
        self.lhs.root.walk(&mut nodes);
        for n in nodes {
            match &n.kind {
                PatternKind::Untyped { id } => {
                    if left.insert(*id, (false, n.children.len())).is_some() {
                        return Err(MetaruleError::RepeatedUntyped(*id));
                    }
                }
                PatternKind::Typed { id, .. } => {
                    if let Some((false, _)) = left.insert(*id, (true, 0)) {
                        return Err(MetaruleError::KindMismatch(*id));
                    }
                }
                PatternKind::Constant(_) => {}
            }
        }
        let mut nodes = Vec::new();
        self.rhs.root.walk(&mut nodes);
        for n in nodes {
            let (id, typed) = match &n.kind {
                PatternKind::Untyped { id } => (*id, None),
                PatternKind::Typed { id, .. } => (*id, Some(true)),
                PatternKind::Constant(_) => continue,
            };
            let (was_typed, count) = *left.get(&id).ok_or(MetaruleError::Unbound(id))?;
            match typed {
                Some(_) if !was_typed => return Err(MetaruleError::KindMismatch(id)),
                None if !was_typed && count != n.children.len() => {
                    return Err(MetaruleError::ChildCount { id, lhs: count, rhs: n.children.len() })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Whether `?id` is a typed variable of the left-hand side.
    pub fn is_typed(&self, id: u32) -> bool {
        let mut nodes = Vec::new();
        self.lhs.root.walk(&mut nodes);
        nodes.iter().any(|n| matches!(n.kind, PatternKind::Typed { id: i, .. } if i == id))
    }
}

/// Parsed metarule file: consecutive tree pairs form the rules; a trailing
/// unpaired tree is reported in `warnings` and ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaruleFile {
    pub rules: Vec<Metarule>,
    pub warnings: Vec<String>,
}

pub fn parse_metarules(text: &str) -> Result<MetaruleFile, MetaruleError> {
    let records = parse_records(text)?;
    let mut rules = Vec::new();
    let mut warnings = Vec::new();
    for pair in records.chunks(2) {
        match pair {
            [l, r] => rules.push(Metarule::from_records(l, r)?),
            [lone] => {
                warnings.push(format!("line {}: tree {} has no right-hand side and is ignored", lone.line, lone.name))
            }
            _ => unreachable!(),
        }
    }
    Ok(MetaruleFile { rules, warnings })
}
