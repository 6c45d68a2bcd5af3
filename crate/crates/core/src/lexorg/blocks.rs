use super::{LexError, Position, SubcatFrame};
use crate::descriptions::{conjoin, parse_description, TreeDescription};
use crate::feature::{AtomSet, EqRhs, FeatureEquation, FeaturePath, FeatureStructure, Side, Value};
use std::collections::BTreeMap;

/// Which frame arguments a transformation block applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    /// Applies once per frame; `@` and `{i}` are not available.
    Frame,
    /// Applies once per argument on the given side (either side when
    /// `None`) whose category is listed.
    Args { position: Option<Position>, cats: Vec<String> },
}

impl Target {
    pub fn selects(&self, arg: &super::FrameArg) -> bool {
        match self {
            Target::Frame => false,
            Target::Args { position, cats } => position.is_none_or(|p| p == arg.position) && cats.contains(&arg.cat),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transformation {
    pub name: String,
    /// Name prefix template, e.g. `W{i}`.
    pub prefix: String,
    pub target: Target,
    /// Block source; see [`BlockLibrary`] for placeholders.
    pub source: String,
}

impl Transformation {
    /// The block's description for one target argument, or for the frame
    /// when the block targets the whole frame.
    pub fn instantiate(&self, arg: Option<&super::FrameArg>) -> Result<TreeDescription, LexError> {
        let (d, _) = instantiate(&self.name, &self.source, arg.map(|a| a.index), arg.and_then(|a| a.hint.as_deref()))?;
        Ok(d)
    }
}

/// Subcategorization and transformation blocks, stored as block source
/// text with placeholders:
///
/// * `{i}`: index of the argument the block is instantiated for
/// * `{h}`: that argument's expansion hint
/// * `@`: in transformation blocks, the target argument variable `Arg{i}`
///
/// The first `node` statement of a subcategorization block names its head
/// variable, which receives the argument's features and its precedence
/// relative to neighbouring arguments. Spine blocks conventionally use the
/// variables `Root`, `VP` and `Anchor`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlockLibrary {
    pub spines: BTreeMap<String, String>,
    /// Keyed by argument category, side and hint; a block without a hint
    /// serves every hint.
    pub subcat: BTreeMap<(String, Position, Option<String>), String>,
    pub transformations: Vec<Transformation>,
}

impl BlockLibrary {
    pub fn add_spine(&mut self, anchor_cat: &str, source: &str) {
        self.spines.insert(anchor_cat.to_string(), source.to_string());
    }

    pub fn add_block(&mut self, cat: &str, position: Position, hint: Option<&str>, source: &str) {
        self.subcat.insert((cat.to_string(), position, hint.map(str::to_string)), source.to_string());
    }

    fn subcat_source(&self, cat: &str, position: Position, hint: Option<&str>) -> Option<&String> {
        let key = |h: Option<&str>| (cat.to_string(), position, h.map(str::to_string));
        hint.and_then(|h| self.subcat.get(&key(Some(h)))).or_else(|| self.subcat.get(&key(None)))
    }
}

pub(crate) fn expand(source: &str, index: Option<u32>, hint: Option<&str>) -> String {
    let mut s = source.to_string();
    if let Some(i) = index {
        s = s.replace('@', "Arg{i}").replace("{i}", &i.to_string());
    }
    if let Some(h) = hint {
        s = s.replace("{h}", h);
    }
    s
}

pub(crate) fn instantiate(
    block: &str,
    source: &str,
    index: Option<u32>,
    hint: Option<&str>,
) -> Result<(TreeDescription, Option<String>), LexError> {
    let text = expand(source, index, hint);
    let d = parse_description(&text).map_err(|e| LexError::Block { block: block.to_string(), error: e })?;
    let head = text.lines().find_map(|l| {
        let mut w = l.split_whitespace();
        (w.next() == Some("node")).then(|| w.next().map(str::to_string)).flatten()
    });
    Ok((d, head))
}

fn feature_equations(head: &str, fs: &FeatureStructure, prefix: &mut Vec<String>, out: &mut Vec<FeatureEquation>) {
    for (attr, v) in fs.iter() {
        prefix.push(attr.to_string());
        match v {
            Value::Atoms(a) => out.push(FeatureEquation {
                lhs: FeaturePath { node: head.to_string(), side: Side::Top, attrs: prefix.clone() },
                rhs: EqRhs::Atoms(AtomSet::clone(a)),
            }),
            Value::Struct(inner) => feature_equations(head, inner, prefix, out),
            Value::Link(_) => {}
        }
        prefix.pop();
    }
}

/// Conjunction of the anchor's spine block and one block per argument,
/// plus the frame's equations. Consecutive arguments on the same side of
/// the anchor are ordered as listed in the frame.
pub fn blocks_for_frame(s: &SubcatFrame, lib: &BlockLibrary) -> Result<TreeDescription, LexError> {
    let spine = lib.spines.get(&s.anchor_cat).ok_or_else(|| LexError::MissingSpine(s.anchor_cat.clone()))?;
    let (mut d, _) = instantiate(&format!("spine {}", s.anchor_cat), spine, None, None)?;
    let mut last_head: BTreeMap<Position, String> = BTreeMap::new();
    for a in &s.args {
        let source = lib
            .subcat_source(&a.cat, a.position, a.hint.as_deref())
            .ok_or_else(|| LexError::MissingBlock { cat: a.cat.clone(), position: a.position, hint: a.hint.clone() })?;
        let name = format!("{} {}", a.cat, a.position);
        let (mut block, head) = instantiate(&name, source, Some(a.index), a.hint.as_deref())?;
        let head = head.ok_or_else(|| LexError::EmptyBlock(name.clone()))?;
        feature_equations(&head, &a.features, &mut Vec::new(), &mut block.equations);
        if let Some(prev) = last_head.insert(a.position, head.clone()) {
            block.nodes.entry(prev.clone()).or_default();
            block.prec.insert((prev, head));
        }
        d = conjoin(&d, &block)?;
    }
    for eq in &s.frame_features {
        if !d.equations.contains(eq) {
            d.equations.push(eq.clone());
        }
    }
    d.check()?;
    Ok(d)
}
