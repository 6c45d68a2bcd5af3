//! Partial tree descriptions (blocks), their conjunction, and a solver
//! for their minimal tree models.

mod solve;

pub use solve::{satisfies, solve, SolveError, SolverConfig};

use crate::feature::{parse_equation, FeatureEquation};
use crate::trees::{Marker, NodeLabel};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Category constraint on a node variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeCat {
    Label(NodeLabel),
    /// Lexical leaf; the empty word is ε.
    Word(String),
}

impl NodeCat {
    pub fn parse(text: &str) -> Option<NodeCat> {
        if text == "ε" {
            return Some(NodeCat::Word(String::new()));
        }
        if let Some(inner) = text.strip_prefix('"') {
            let w = inner.strip_suffix('"')?;
            return Some(NodeCat::Word(w.to_string()));
        }
        if text.is_empty() || text.contains('"') {
            return None;
        }
        Some(NodeCat::Label(NodeLabel::parse(text)))
    }

    pub fn is_word(&self) -> bool {
        matches!(self, NodeCat::Word(_))
    }
}

impl fmt::Display for NodeCat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeCat::Label(l) => write!(f, "{l}"),
            NodeCat::Word(w) if w.is_empty() => f.write_str("ε"),
            NodeCat::Word(w) => write!(f, "\"{w}\""),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeVar {
    pub cat: Option<NodeCat>,
    pub marker: Option<Marker>,
}

impl NodeVar {
    pub fn new(cat: Option<NodeCat>, marker: Option<Marker>) -> Self {
        NodeVar { cat, marker }
    }

    /// The constraints of both variables, if they can hold of one node.
    pub fn merge(&self, other: &NodeVar) -> Option<NodeVar> {
        fn pick<T: Clone + PartialEq>(a: &Option<T>, b: &Option<T>) -> Option<Option<T>> {
            match (a, b) {
                (Some(x), Some(y)) if x != y => None,
                (Some(x), _) | (_, Some(x)) => Some(Some(x.clone())),
                (None, None) => Some(None),
            }
        }
        Some(NodeVar { cat: pick(&self.cat, &other.cat)?, marker: pick(&self.marker, &other.marker)? })
    }
}

/// Node variables with parent, dominance and precedence constraints and
/// feature equations over the variable names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TreeDescription {
    pub nodes: BTreeMap<String, NodeVar>,
    pub parent: BTreeSet<(String, String)>,
    /// Reflexive-transitive dominance.
    pub dom: BTreeSet<(String, String)>,
    pub prec: BTreeSet<(String, String)>,
    pub equations: Vec<FeatureEquation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescriptionError {
    #[error("undeclared node variable {0}")]
    Undeclared(String),
    #[error("precedence cycle through {0}")]
    PrecedenceCycle(String),
    #[error("conflicting constraints on node {0}")]
    Conflict(String),
}

impl TreeDescription {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, name: &str, cat: Option<&str>, marker: Option<Marker>) -> Self {
        let cat = cat.map(|c| NodeCat::parse(c).expect("valid category"));
        self.nodes.insert(name.to_string(), NodeVar::new(cat, marker));
        self
    }

    pub fn with_parent(mut self, a: &str, b: &str) -> Self {
        self.parent.insert((a.to_string(), b.to_string()));
        self
    }

    pub fn with_dom(mut self, a: &str, b: &str) -> Self {
        self.dom.insert((a.to_string(), b.to_string()));
        self
    }

    pub fn with_prec(mut self, a: &str, b: &str) -> Self {
        self.prec.insert((a.to_string(), b.to_string()));
        self
    }

    pub fn with_eq(mut self, eq: &str) -> Self {
        self.equations.push(parse_equation(eq).expect("valid equation"));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Checks that every relation and equation names declared variables
    /// and that precedence is acyclic.
    pub fn check(&self) -> Result<(), DescriptionError> {
        let declared = |n: &str| {
            if self.nodes.contains_key(n) {
                Ok(())
            } else {
                Err(DescriptionError::Undeclared(n.to_string()))
            }
        };
        for (a, b) in self.parent.iter().chain(&self.dom).chain(&self.prec) {
            declared(a)?;
            declared(b)?;
        }
        for eq in &self.equations {
            for n in eq.nodes() {
                declared(n)?;
            }
        }
        // Precedence is irreflexive and transitive, so any cycle is fatal.
        let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (a, b) in &self.prec {
            succ.entry(a).or_default().push(b);
        }
        for start in succ.keys() {
            let mut seen = BTreeSet::new();
            let mut stack = succ[start].clone();
            while let Some(n) = stack.pop() {
                if n == *start {
                    return Err(DescriptionError::PrecedenceCycle(start.to_string()));
                }
                if seen.insert(n) {
                    stack.extend(succ.get(n).into_iter().flatten());
                }
            }
        }
        Ok(())
    }

    /// Renames node variables; names not in `map` are kept.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> TreeDescription {
        let r = |n: &String| map.get(n).cloned().unwrap_or_else(|| n.clone());
        let pairs = |s: &BTreeSet<(String, String)>| s.iter().map(|(a, b)| (r(a), r(b))).collect();
        TreeDescription {
            nodes: self.nodes.iter().map(|(k, v)| (r(k), v.clone())).collect(),
            parent: pairs(&self.parent),
            dom: pairs(&self.dom),
            prec: pairs(&self.prec),
            equations: self
                .equations
                .iter()
                .map(|e| {
                    let mut e = e.clone();
                    e.lhs.node = r(&e.lhs.node);
                    if let crate::feature::EqRhs::Path(p) = &mut e.rhs {
                        p.node = r(&p.node);
                    }
                    e
                })
                .collect(),
        }
    }
}

/// Union of two descriptions. Variables with the same name are the same
/// node; their category and marker constraints must agree.
pub fn conjoin(a: &TreeDescription, b: &TreeDescription) -> Result<TreeDescription, DescriptionError> {
    let mut out = a.clone();
    for (name, var) in &b.nodes {
        let merged = match out.nodes.get(name) {
            Some(existing) => existing.merge(var).ok_or_else(|| DescriptionError::Conflict(name.clone()))?,
            None => var.clone(),
        };
        out.nodes.insert(name.clone(), merged);
    }
    out.parent.extend(b.parent.iter().cloned());
    out.dom.extend(b.dom.iter().cloned());
    out.prec.extend(b.prec.iter().cloned());
    for eq in &b.equations {
        if !out.equations.contains(eq) {
            out.equations.push(eq.clone());
        }
    }
    out.check()?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct BlockParseError {
    /// 1-based line within the parsed text.
    pub line: usize,
    pub message: String,
}

/// Parses block syntax, one statement per line:
///
/// ```text
/// node NAME [CAT] [MARKER]
/// parent A B
/// dom A B
/// prec A B
/// eq EQUATION
/// ```
///
/// `CAT` is a label such as `NP_0`, a quoted word, or `ε`. `MARKER` is one
/// of `anchor`, `subst`, `foot`, `na`, `-`, optionally suffixed `+na`.
/// Blank lines and `%` comments are skipped.
pub fn parse_description(text: &str) -> Result<TreeDescription, BlockParseError> {
    let mut d = TreeDescription::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |message: String| BlockParseError { line: i + 1, message };
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let words: Vec<&str> = rest.split_whitespace().collect();
        match kw {
            "node" => {
                let (name, args) = words.split_first().ok_or_else(|| err("node needs a name".into()))?;
                let mut var = NodeVar::default();
                for a in args {
                    if let Some(m) = Marker::parse(a) {
                        if var.marker.replace(m).is_some() {
                            return Err(err(format!("second marker {a}")));
                        }
                    } else if var.cat.is_none() {
                        var.cat = Some(NodeCat::parse(a).ok_or_else(|| err(format!("bad category {a}")))?);
                    } else {
                        return Err(err(format!("unexpected {a}")));
                    }
                }
                if let Some(prev) = d.nodes.get(*name) {
                    var = prev.merge(&var).ok_or_else(|| err(format!("conflicting node {name}")))?;
                }
                d.nodes.insert(name.to_string(), var);
            }
            "parent" | "dom" | "prec" => {
                let [a, b] = words[..] else {
                    return Err(err(format!("{kw} takes two node names")));
                };
                let pair = (a.to_string(), b.to_string());
                match kw {
                    "parent" => d.parent.insert(pair),
                    "dom" => d.dom.insert(pair),
                    _ => d.prec.insert(pair),
                };
            }
            "eq" => {
                let eq = parse_equation(rest).map_err(|e| err(e.to_string()))?;
                d.equations.push(eq);
            }
            _ => return Err(err(format!("unknown statement {kw}"))),
        }
    }
    Ok(d)
}

impl fmt::Display for TreeDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, v) in &self.nodes {
            write!(f, "node {name}")?;
            if let Some(c) = &v.cat {
                write!(f, " {c}")?;
            }
            if let Some(m) = &v.marker {
                write!(f, " {m}")?;
            }
            writeln!(f)?;
        }
        for (kw, set) in [("parent", &self.parent), ("dom", &self.dom), ("prec", &self.prec)] {
            for (a, b) in set {
                writeln!(f, "{kw} {a} {b}")?;
            }
        }
        for e in &self.equations {
            writeln!(f, "eq {e}")?;
        }
        Ok(())
    }
}
