//! Elementary trees: representation, well-formedness, equation
//! installation, composition and naming.

mod compose;
mod naming;
mod text;

pub use compose::{adjoin, finalize, substitute, CompositionError, DerivedTree, FinalizeError};
pub use naming::{category_code, family_name, tree_name, NameContext, NamingError};
pub use text::{parse_records, parse_trees, write_trees, NodeRecord, TextError, TreeRecord};

use crate::feature::{
    unify_values, Clash, EqRhs, FeatureEquation, FeaturePath, FeatureStructure, LinkId, LinkTable, Side, Value,
};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Category stem plus optional subscript, written `NP_0`, `S_r`, `V`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeLabel {
    pub stem: String,
    pub subscript: Option<String>,
}

impl NodeLabel {
    pub fn new(stem: impl Into<String>, subscript: Option<&str>) -> Self {
        NodeLabel { stem: stem.into(), subscript: subscript.map(str::to_string) }
    }

    /// Splits at the first underscore.
    pub fn parse(text: &str) -> Self {
        match text.split_once('_') {
            Some((stem, sub)) if !stem.is_empty() => NodeLabel::new(stem, Some(sub)),
            _ => NodeLabel::new(text, None),
        }
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subscript {
            Some(s) => write!(f, "{}_{}", self.stem, s),
            None => f.write_str(&self.stem),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum MarkerKind {
    #[default]
    None,
    Anchor,
    Foot,
    Substitution,
}

/// Node marker. `na` is the null-adjunction constraint and may accompany
/// any kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Marker {
    pub kind: MarkerKind,
    pub na: bool,
}

impl Marker {
    pub const NONE: Marker = Marker { kind: MarkerKind::None, na: false };
    pub const ANCHOR: Marker = Marker { kind: MarkerKind::Anchor, na: false };
    pub const SUBST: Marker = Marker { kind: MarkerKind::Substitution, na: false };
    pub const FOOT: Marker = Marker { kind: MarkerKind::Foot, na: true };
    pub const NA: Marker = Marker { kind: MarkerKind::None, na: true };

    pub fn parse(text: &str) -> Option<Marker> {
        let (kind, na) = match text.strip_suffix("+na") {
            Some(k) => (k, true),
            None if text == "na" => ("-", true),
            None => (text, false),
        };
        let kind = match kind {
            "-" => MarkerKind::None,
            "anchor" => MarkerKind::Anchor,
            "foot" => MarkerKind::Foot,
            "subst" => MarkerKind::Substitution,
            _ => return None,
        };
        Some(Marker { kind, na })
    }

    /// Every marker in `self` is also present in `other`.
    pub fn contained_in(&self, other: &Marker) -> bool {
        (self.kind == MarkerKind::None || self.kind == other.kind) && (!self.na || other.na)
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            MarkerKind::None => {
                return f.write_str(if self.na { "na" } else { "-" });
            }
            MarkerKind::Anchor => "anchor",
            MarkerKind::Foot => "foot",
            MarkerKind::Substitution => "subst",
        };
        f.write_str(kind)?;
        if self.na {
            f.write_str("+na")?;
        }
        Ok(())
    }
}

/// Gorn address: 1-based child indices from the root. The root is `0`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gorn(pub Vec<usize>);

impl Gorn {
    pub fn root() -> Self {
        Gorn(Vec::new())
    }

    pub fn child(&self, i: usize) -> Gorn {
        let mut v = self.0.clone();
        v.push(i);
        Gorn(v)
    }

    /// `self` is a proper or improper ancestor of `other`.
    pub fn dominates(&self, other: &Gorn) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Neither dominates the other and `self` comes first.
    pub fn precedes(&self, other: &Gorn) -> bool {
        !self.dominates(other) && !other.dominates(self) && self.0 < other.0
    }

    pub fn parse(text: &str) -> Option<Gorn> {
        if text == "0" {
            return Some(Gorn::root());
        }
        text.split('.').map(|p| p.parse::<usize>().ok().filter(|&n| n > 0)).collect::<Option<Vec<_>>>().map(Gorn)
    }
}

impl fmt::Display for Gorn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub label: NodeLabel,
    /// Lexical leaf; the label stem holds the word, empty for ε.
    pub terminal: bool,
    pub marker: Marker,
    pub top: FeatureStructure,
    pub bottom: FeatureStructure,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn new(label: NodeLabel, marker: Marker, children: Vec<TreeNode>) -> Self {
        TreeNode {
            label,
            terminal: false,
            marker,
            top: FeatureStructure::new(),
            bottom: FeatureStructure::new(),
            children,
        }
    }

    pub fn nonterminal(label: &str, marker: Marker, children: Vec<TreeNode>) -> Self {
        TreeNode::new(NodeLabel::parse(label), marker, children)
    }

    pub fn word(word: &str) -> Self {
        TreeNode { terminal: true, ..TreeNode::new(NodeLabel::new(word, None), Marker::NONE, Vec::new()) }
    }

    pub fn epsilon() -> Self {
        TreeNode::word("")
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn is_epsilon(&self) -> bool {
        self.terminal && self.label.stem.is_empty()
    }

    /// Name used by feature equations: the label text.
    pub fn name(&self) -> String {
        self.label.to_string()
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(TreeNode::size).sum::<usize>()
    }

    pub fn fs(&self, side: Side) -> &FeatureStructure {
        match side.effective() {
            Side::Bottom => &self.bottom,
            _ => &self.top,
        }
    }

    pub fn fs_mut(&mut self, side: Side) -> &mut FeatureStructure {
        match side.effective() {
            Side::Bottom => &mut self.bottom,
            _ => &mut self.top,
        }
    }

    fn walk<'a>(&'a self, addr: Gorn, out: &mut Vec<(Gorn, &'a TreeNode)>) {
        for (i, c) in self.children.iter().enumerate() {
            let a = addr.child(i + 1);
            out.push((a.clone(), c));
            c.walk(a, out);
        }
    }

    pub(crate) fn map_links(&mut self, f: &mut impl FnMut(LinkId) -> LinkId) {
        self.top.map_links(f);
        self.bottom.map_links(f);
        for c in &mut self.children {
            c.map_links(f);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeKind {
    Initial,
    Auxiliary,
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeKind::Initial => "initial",
            TreeKind::Auxiliary => "auxiliary",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ElementaryTree {
    pub name: String,
    pub kind: TreeKind,
    pub root: TreeNode,
    pub comments: Vec<String>,
    /// Cells shared by coindexed feature slots of this tree.
    pub links: LinkTable,
}

impl PartialEq for ElementaryTree {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_text() == other.canonical_text()
    }
}

impl Eq for ElementaryTree {}

impl ElementaryTree {
    pub fn new(name: impl Into<String>, kind: TreeKind, root: TreeNode) -> Self {
        ElementaryTree { name: name.into(), kind, root, comments: Vec::new(), links: LinkTable::new() }
    }

    /// All nodes in preorder with their addresses.
    pub fn nodes(&self) -> Vec<(Gorn, &TreeNode)> {
        let mut out = vec![(Gorn::root(), &self.root)];
        self.root.walk(Gorn::root(), &mut out);
        out
    }

    pub fn node(&self, addr: &Gorn) -> Option<&TreeNode> {
        let mut n = &self.root;
        for &i in &addr.0 {
            n = n.children.get(i.checked_sub(1)?)?;
        }
        Some(n)
    }

    pub fn node_mut(&mut self, addr: &Gorn) -> Option<&mut TreeNode> {
        let mut n = &mut self.root;
        for &i in &addr.0 {
            n = n.children.get_mut(i.checked_sub(1)?)?;
        }
        Some(n)
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    /// Leaves in order, ε included.
    pub fn frontier(&self) -> Vec<&TreeNode> {
        self.nodes().into_iter().map(|(_, n)| n).filter(|n| n.is_leaf()).collect()
    }

    pub fn foot(&self) -> Option<Gorn> {
        self.nodes().into_iter().find(|(_, n)| n.marker.kind == MarkerKind::Foot).map(|(a, _)| a)
    }

    pub fn anchors(&self) -> Vec<Gorn> {
        self.nodes().into_iter().filter(|(_, n)| n.marker.kind == MarkerKind::Anchor).map(|(a, _)| a).collect()
    }

    /// Addresses of the non-terminal nodes whose label text is `name`.
    pub fn find_named(&self, name: &str) -> Vec<Gorn> {
        self.nodes().into_iter().filter(|(_, n)| !n.terminal && n.name() == name).map(|(a, _)| a).collect()
    }

    pub fn resolve_name(&self, name: &str) -> Result<Gorn, InstallError> {
        let mut found = self.find_named(name);
        match found.len() {
            1 => Ok(found.pop().unwrap()),
            0 => Err(InstallError::UnknownNode(name.to_string())),
            _ => Err(InstallError::AmbiguousNode(name.to_string())),
        }
    }

    /// Value at a feature path, following links.
    pub fn value_at(&self, addr: &Gorn, side: Side, attrs: &[String]) -> Option<&Value> {
        self.node(addr)?.fs(side).lookup(&self.links, attrs)
    }

    /// Unifies `value` into the slot at `addr`/`side`/`attrs`, creating
    /// intermediate structures as needed.
    pub fn unify_at(&mut self, addr: &Gorn, side: Side, attrs: &[String], value: Value) -> Result<(), Clash> {
        let mut node = &mut self.root;
        for &i in &addr.0 {
            node = &mut node.children[i - 1];
        }
        let fs = match side.effective() {
            Side::Bottom => &mut node.bottom,
            _ => &mut node.top,
        };
        unify_into(fs, &mut self.links, attrs, value, &mut Vec::new())
    }

    /// Installs one equation, resolving node names with `resolve`.
    pub fn install_with(
        &mut self,
        eq: &FeatureEquation,
        resolve: impl Fn(&ElementaryTree, &str) -> Result<Gorn, InstallError>,
    ) -> Result<(), InstallError> {
        let left = resolve(self, &eq.lhs.node)?;
        let clash = |clash| InstallError::Clash { equation: eq.to_string(), clash };
        match &eq.rhs {
            EqRhs::Atoms(a) => self.unify_at(&left, eq.lhs.side, &eq.lhs.attrs, Value::Atoms(a.clone())).map_err(clash),
            EqRhs::Path(p) => {
                let right = resolve(self, &p.node)?;
                let id = self.links.fresh(Value::bottom());
                self.unify_at(&left, eq.lhs.side, &eq.lhs.attrs, Value::Link(id)).map_err(clash)?;
                self.unify_at(&right, p.side, &p.attrs, Value::Link(id)).map_err(clash)
            }
        }
    }

    /// Whether the tree's features already entail `eq`.
    pub fn entails(&self, eq: &FeatureEquation) -> bool {
        self.entails_with(eq, |name| self.resolve_name(name).ok())
    }

    /// Entailment with node names resolved by `resolve`. Path equations hold
    /// when both slots share a link; constants hold when the stored value is
    /// at least as specific.
    pub fn entails_with(&self, eq: &FeatureEquation, resolve: impl Fn(&str) -> Option<Gorn>) -> bool {
        let Some(left) = resolve(&eq.lhs.node) else { return false };
        let raw = |addr: &Gorn, path: &FeaturePath| {
            let fs = self.node(addr)?.fs(path.side);
            raw_slot(fs, &self.links, &path.attrs)
        };
        match &eq.rhs {
            EqRhs::Atoms(a) => matches!(
                self.value_at(&left, eq.lhs.side, &eq.lhs.attrs),
                Some(Value::Atoms(v)) if v.is_subset(a)
            ),
            EqRhs::Path(p) => {
                let Some(right) = resolve(&p.node) else { return false };
                match (raw(&left, &eq.lhs), raw(&right, p)) {
                    (Some(Value::Link(x)), Some(Value::Link(y))) => self.links.find(*x) == self.links.find(*y),
                    _ => false,
                }
            }
        }
    }

    /// Renumbers links by first occurrence and drops unreachable cells.
    pub fn canonicalize(&mut self) {
        let mut order: Vec<LinkId> = Vec::new();
        let mut map: BTreeMap<LinkId, LinkId> = BTreeMap::new();
        let mut pending: Vec<LinkId> = Vec::new();
        for (_, node) in self.nodes() {
            for fs in [&node.top, &node.bottom] {
                pending.clear();
                fs.links(&mut pending);
                let mut stack: Vec<LinkId> = pending.iter().rev().copied().collect();
                while let Some(id) = stack.pop() {
                    let r = self.links.find(id);
                    if map.contains_key(&r) {
                        continue;
                    }
                    map.insert(r, LinkId(order.len() as u32 + 1));
                    order.push(r);
                    if let Some(Value::Struct(inner)) = self.links.value(r) {
                        let mut nested = Vec::new();
                        inner.links(&mut nested);
                        stack.extend(nested.into_iter().rev());
                    }
                }
            }
        }
        let old = std::mem::take(&mut self.links);
        let remap = |id: LinkId| map[&old.find(id)];
        let mut table = LinkTable::new();
        for r in &order {
            let mut v = old.value(*r).cloned().unwrap_or_else(Value::bottom);
            match &mut v {
                Value::Struct(fs) => fs.map_links(&mut |id| remap(id)),
                Value::Link(id) => *id = remap(*id),
                Value::Atoms(_) => {}
            }
            table.insert_raw(map[r], v);
        }
        self.root.map_links(&mut |id| remap(id));
        self.links = table;
    }

    pub fn canonical_text(&self) -> String {
        let mut t = self.clone();
        t.canonicalize();
        text::write_tree(&t)
    }

    /// Canonical text without name and comments, for comparing shapes and
    /// features of trees that were produced by different routes.
    pub fn structural_text(&self) -> String {
        let mut t = self.clone();
        t.name = String::new();
        t.comments.clear();
        t.canonical_text()
    }

    /// Equations reproducing this tree's features when installed on the
    /// bare structure. Constant slots become `path = atoms`; each link class
    /// becomes a chain from its first occurrence.
    pub fn equations(&self) -> Vec<FeatureEquation> {
        let mut t = self.clone();
        t.canonicalize();
        let mut out = Vec::new();
        let mut link_paths: BTreeMap<LinkId, Vec<FeaturePath>> = BTreeMap::new();
        for (_, node) in t.nodes() {
            if node.terminal {
                continue;
            }
            for side in [Side::Top, Side::Bottom] {
                let base = FeaturePath { node: node.name(), side, attrs: Vec::new() };
                collect_eqs(node.fs(side), &t.links, &base, &mut out, &mut link_paths, 0);
            }
        }
        for (_, paths) in link_paths {
            for p in &paths[1..] {
                out.push(FeatureEquation { lhs: paths[0].clone(), rhs: EqRhs::Path(p.clone()) });
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Copy with all features removed.
    pub fn bare(&self) -> ElementaryTree {
        fn strip(n: &TreeNode) -> TreeNode {
            TreeNode {
                top: FeatureStructure::new(),
                bottom: FeatureStructure::new(),
                children: n.children.iter().map(strip).collect(),
                ..n.clone()
            }
        }
        ElementaryTree { root: strip(&self.root), links: LinkTable::new(), ..self.clone() }
    }
}

fn raw_slot<'a>(fs: &'a FeatureStructure, links: &'a LinkTable, attrs: &[String]) -> Option<&'a Value> {
    let (head, rest) = attrs.split_first()?;
    let v = fs.get(head)?;
    if rest.is_empty() {
        return Some(v);
    }
    match v {
        Value::Struct(inner) => raw_slot(inner, links, rest),
        Value::Link(id) => match links.value(*id)? {
            Value::Struct(inner) => raw_slot(inner, links, rest),
            _ => None,
        },
        Value::Atoms(_) => None,
    }
}

fn collect_eqs(
    fs: &FeatureStructure,
    links: &LinkTable,
    base: &FeaturePath,
    out: &mut Vec<FeatureEquation>,
    link_paths: &mut BTreeMap<LinkId, Vec<FeaturePath>>,
    depth: usize,
) {
    if depth > 64 {
        return;
    }
    for (attr, v) in fs.iter() {
        let mut path = base.clone();
        path.attrs.push(attr.to_string());
        match v {
            Value::Atoms(a) => out.push(FeatureEquation { lhs: path, rhs: EqRhs::Atoms(a.clone()) }),
            Value::Struct(inner) => collect_eqs(inner, links, &path, out, link_paths, depth + 1),
            Value::Link(id) => {
                let r = links.find(*id);
                let first = !link_paths.contains_key(&r);
                link_paths.entry(r).or_default().push(path.clone());
                if first {
                    match links.value(r) {
                        Some(Value::Atoms(a)) => out.push(FeatureEquation { lhs: path, rhs: EqRhs::Atoms(a.clone()) }),
                        Some(Value::Struct(inner)) => collect_eqs(inner, links, &path, out, link_paths, depth + 1),
                        _ => {}
                    }
                }
            }
        }
    }
}

fn unify_into(
    fs: &mut FeatureStructure,
    links: &mut LinkTable,
    attrs: &[String],
    value: Value,
    path: &mut Vec<String>,
) -> Result<(), Clash> {
    let (head, rest) = attrs.split_first().expect("non-empty attribute path");
    path.push(head.clone());
    if rest.is_empty() {
        let cur = fs.remove(head).unwrap_or_else(Value::bottom);
        let merged = unify_values(links, &cur, &value).map_err(|mut c| {
            let mut p = path.clone();
            p.append(&mut c.path);
            c.path = p;
            c
        });
        match merged {
            Ok(v) => {
                fs.insert(head.clone(), v);
                Ok(())
            }
            Err(e) => {
                fs.insert(head.clone(), cur);
                Err(e)
            }
        }
    } else {
        let slot = fs.get(head).cloned().unwrap_or_else(Value::bottom);
        match slot {
            Value::Struct(mut inner) => {
                unify_into(&mut inner, links, rest, value, path)?;
                fs.insert(head.clone(), Value::Struct(inner));
                Ok(())
            }
            Value::Link(id) => {
                let cell = links.value(id).cloned().unwrap_or_else(Value::bottom);
                let mut inner = match cell {
                    Value::Struct(inner) => inner,
                    _ => return Err(Clash { path: path.clone(), kind: crate::feature::ClashKind::AtomVsStruct }),
                };
                unify_into(&mut inner, links, rest, value, path)?;
                unify_values(links, &Value::Link(id), &Value::Struct(inner))?;
                Ok(())
            }
            Value::Atoms(_) => Err(Clash { path: path.clone(), kind: crate::feature::ClashKind::AtomVsStruct }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstallError {
    #[error("no node named {0}")]
    UnknownNode(String),
    #[error("more than one node named {0}")]
    AmbiguousNode(String),
    #[error("equation {equation} fails: {clash}")]
    Clash { equation: String, clash: Clash },
}

/// Installs feature equations on a copy of `tree`. Path-to-path equations
/// become shared link cells; constants are unified in place.
pub fn install_equations(tree: &ElementaryTree, eqs: &[FeatureEquation]) -> Result<ElementaryTree, InstallError> {
    let mut t = tree.clone();
    for eq in eqs {
        t.install_with(eq, |t, name| t.resolve_name(name))?;
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    TerminalInternal,
    TerminalMarked,
    BareNonterminalLeaf,
    SubstitutionInternal,
    AnchorInternal,
    FootInInitial,
    FootCount,
    FootInternal,
    FootRootMismatch,
    FootWithoutNa,
    SubstitutionBottom,
    TopBottomCoindexed,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::TerminalInternal => "terminal node has children",
            Rule::TerminalMarked => "terminal node carries a marker",
            Rule::BareNonterminalLeaf => "non-terminal leaf without substitution, foot or anchor",
            Rule::SubstitutionInternal => "substitution marker on internal node",
            Rule::AnchorInternal => "anchor on internal node",
            Rule::FootInInitial => "foot node in initial tree",
            Rule::FootCount => "auxiliary tree needs exactly one foot",
            Rule::FootInternal => "foot node is not a leaf",
            Rule::FootRootMismatch => "foot/root label mismatch",
            Rule::FootWithoutNa => "foot node lacks NA",
            Rule::SubstitutionBottom => "substitution node has bottom features",
            Rule::TopBottomCoindexed => "top and bottom of one node are coindexed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub address: Gorn,
    pub rule: Rule,
    pub severity: Severity,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} at {}: {}", self.address, self.rule)
    }
}

/// Checks the well-formedness conditions of initial and auxiliary trees.
/// Top/bottom coindexation within one node is reported as a warning.
pub fn validate_elementary(t: &ElementaryTree) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |address: &Gorn, rule, severity| out.push(Violation { address: address.clone(), rule, severity });
    let nodes = t.nodes();
    let mut feet = Vec::new();
    for (addr, n) in &nodes {
        if n.terminal {
            if !n.is_leaf() {
                push(addr, Rule::TerminalInternal, Severity::Error);
            }
            if n.marker != Marker::NONE {
                push(addr, Rule::TerminalMarked, Severity::Error);
            }
            continue;
        }
        match n.marker.kind {
            MarkerKind::Substitution => {
                if !n.is_leaf() {
                    push(addr, Rule::SubstitutionInternal, Severity::Error);
                }
                if !n.bottom.is_empty() {
                    push(addr, Rule::SubstitutionBottom, Severity::Error);
                }
            }
            MarkerKind::Anchor => {
                if !n.is_leaf() {
                    push(addr, Rule::AnchorInternal, Severity::Error);
                }
            }
            MarkerKind::Foot => {
                feet.push(addr.clone());
                if t.kind == TreeKind::Initial {
                    push(addr, Rule::FootInInitial, Severity::Error);
                }
                if !n.is_leaf() {
                    push(addr, Rule::FootInternal, Severity::Error);
                }
                if !n.marker.na {
                    push(addr, Rule::FootWithoutNa, Severity::Error);
                }
                if n.label.stem != t.root.label.stem {
                    push(addr, Rule::FootRootMismatch, Severity::Error);
                }
            }
            MarkerKind::None => {
                if n.is_leaf() {
                    push(addr, Rule::BareNonterminalLeaf, Severity::Error);
                }
            }
        }
        let mut top = Vec::new();
        let mut bottom = Vec::new();
        n.top.links(&mut top);
        n.bottom.links(&mut bottom);
        let top: Vec<LinkId> = top.into_iter().map(|l| t.links.find(l)).collect();
        if bottom.into_iter().any(|l| top.contains(&t.links.find(l))) {
            push(addr, Rule::TopBottomCoindexed, Severity::Warning);
        }
    }
    if t.kind == TreeKind::Auxiliary && feet.len() != 1 {
        push(&Gorn::root(), Rule::FootCount, Severity::Error);
    }
    out
}
