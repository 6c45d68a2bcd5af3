//! Feature structures with disjunctive atomic values and coindexation.
//!
//! A [`FeatureStructure`] is a finite map from attribute names to values.
//! Values are either atom sets (read as disjunctions, so `ind/imp` unifies
//! with `ind` to give `ind`), nested structures, or links into a
//! [`LinkTable`]. Links model coindexation: every slot holding the same
//! link id sees the same value cell. The empty structure is the bottom
//! element and unifies with anything, including atom sets.

mod equation;
mod text;

pub use equation::{parse_equation, EqRhs, FeatureEquation, FeaturePath, ParseError, Side};
pub use text::{parse_value, FsParseError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A non-empty disjunction of atomic values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomSet(BTreeSet<String>);

impl AtomSet {
    /// Builds an atom set. Returns `None` when `atoms` is empty.
    pub fn new<I, S>(atoms: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = atoms.into_iter().map(Into::into).collect();
        if set.is_empty() {
            None
        } else {
            Some(AtomSet(set))
        }
    }

    pub fn single(atom: impl Into<String>) -> Self {
        AtomSet(std::iter::once(atom.into()).collect())
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, atom: &str) -> bool {
        self.0.contains(atom)
    }

    pub fn is_subset(&self, other: &AtomSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersect(&self, other: &AtomSet) -> Option<AtomSet> {
        let set: BTreeSet<String> = self.0.intersection(&other.0).cloned().collect();
        if set.is_empty() {
            None
        } else {
            Some(AtomSet(set))
        }
    }
}

impl fmt::Display for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for a in &self.0 {
            if !first {
                f.write_str("/")?;
            }
            first = false;
            f.write_str(a)?;
        }
        Ok(())
    }
}

/// Identifier of a shared value cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Atoms(AtomSet),
    Struct(FeatureStructure),
    Link(LinkId),
}

impl Value {
    pub fn bottom() -> Self {
        Value::Struct(FeatureStructure::new())
    }

    pub fn atom(a: impl Into<String>) -> Self {
        Value::Atoms(AtomSet::single(a))
    }

    fn is_bottom(&self) -> bool {
        matches!(self, Value::Struct(fs) if fs.is_empty())
    }
}

/// Attribute/value matrix. Attributes are kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureStructure {
    entries: BTreeMap<String, Value>,
}

impl FeatureStructure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, attr: &str) -> Option<&Value> {
        self.entries.get(attr)
    }

    pub fn insert(&mut self, attr: impl Into<String>, value: Value) -> Option<Value> {
        self.entries.insert(attr.into(), value)
    }

    pub fn remove(&mut self, attr: &str) -> Option<Value> {
        self.entries.remove(attr)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn with(mut self, attr: impl Into<String>, value: Value) -> Self {
        self.insert(attr, value);
        self
    }

    /// Follows `path` through nested structures and links.
    pub fn lookup<'a>(&'a self, links: &'a LinkTable, path: &[String]) -> Option<&'a Value> {
        let (head, rest) = path.split_first()?;
        let mut v = self.entries.get(head)?;
        if let Value::Link(id) = v {
            v = links.value(*id)?;
        }
        if rest.is_empty() {
            return Some(v);
        }
        match v {
            Value::Struct(inner) => inner.lookup(links, rest),
            _ => None,
        }
    }

    /// True if no link occurs anywhere inside.
    pub fn is_link_free(&self) -> bool {
        self.entries.values().all(|v| match v {
            Value::Atoms(_) => true,
            Value::Struct(fs) => fs.is_link_free(),
            Value::Link(_) => false,
        })
    }

    pub(crate) fn links(&self, out: &mut Vec<LinkId>) {
        for v in self.entries.values() {
            match v {
                Value::Atoms(_) => {}
                Value::Struct(fs) => fs.links(out),
                Value::Link(id) => out.push(*id),
            }
        }
    }

    pub(crate) fn map_links(&mut self, f: &mut impl FnMut(LinkId) -> LinkId) {
        for v in self.entries.values_mut() {
            match v {
                Value::Atoms(_) => {}
                Value::Struct(fs) => fs.map_links(f),
                Value::Link(id) => *id = f(*id),
            }
        }
    }
}

/// Why a unification failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clash {
    pub path: Vec<String>,
    pub kind: ClashKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClashKind {
    /// Two atom sets with an empty intersection.
    Disjoint(AtomSet, AtomSet),
    /// An atom set met a non-empty structure.
    AtomVsStruct,
    /// Links resolved into themselves.
    Cycle,
}

impl fmt::Display for Clash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>: ", self.path.join(" "))?;
        match &self.kind {
            ClashKind::Disjoint(a, b) => write!(f, "{a} and {b} do not intersect"),
            ClashKind::AtomVsStruct => write!(f, "atomic value meets a feature structure"),
            ClashKind::Cycle => write!(f, "cyclic coindexation"),
        }
    }
}

impl std::error::Error for Clash {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Cell {
    Value(Value),
    Forward(LinkId),
}

/// Shared value cells addressed by [`LinkId`]. Merged cells forward to a
/// representative, union-find style. A cell never stores a bare link.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkTable {
    cells: BTreeMap<LinkId, Cell>,
    next: u32,
}

const MAX_DEPTH: usize = 256;

impl LinkTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Allocates a fresh cell holding `value`.
    pub fn fresh(&mut self, value: Value) -> LinkId {
        let id = LinkId(self.next);
        self.next += 1;
        self.cells.insert(id, Cell::Value(value));
        id
    }

    pub fn find(&self, mut id: LinkId) -> LinkId {
        while let Some(Cell::Forward(next)) = self.cells.get(&id) {
            id = *next;
        }
        id
    }

    /// Value of the representative cell; unbound ids read as bottom.
    pub fn value(&self, id: LinkId) -> Option<&Value> {
        match self.cells.get(&self.find(id)) {
            Some(Cell::Value(v)) => Some(v),
            _ => None,
        }
    }

    fn take(&mut self, id: LinkId) -> Value {
        let root = self.find(id);
        match self.cells.insert(root, Cell::Value(Value::bottom())) {
            Some(Cell::Value(v)) => v,
            _ => Value::bottom(),
        }
    }

    fn set(&mut self, id: LinkId, value: Value) {
        let root = self.find(id);
        self.cells.insert(root, Cell::Value(value));
        if root.0 >= self.next {
            self.next = root.0 + 1;
        }
    }

    pub(crate) fn ids(&self) -> impl Iterator<Item = LinkId> + '_ {
        self.cells.keys().copied()
    }

    /// Moves every cell of `other` into `self`, renumbering them past the
    /// current range. Returns the offset to apply to ids taken from `other`.
    pub(crate) fn absorb(&mut self, other: &LinkTable) -> u32 {
        let offset = self.next;
        for (id, cell) in &other.cells {
            let cell = match cell {
                Cell::Forward(t) => Cell::Forward(LinkId(t.0 + offset)),
                Cell::Value(v) => {
                    let mut v = v.clone();
                    shift_value(&mut v, offset);
                    Cell::Value(v)
                }
            };
            self.cells.insert(LinkId(id.0 + offset), cell);
        }
        self.next = offset + other.next.max(other.cells.keys().map(|k| k.0 + 1).max().unwrap_or(0));
        offset
    }

    pub(crate) fn insert_raw(&mut self, id: LinkId, value: Value) {
        self.cells.insert(id, Cell::Value(value));
        if id.0 >= self.next {
            self.next = id.0 + 1;
        }
    }
}

pub(crate) fn shift_value(v: &mut Value, offset: u32) {
    match v {
        Value::Atoms(_) => {}
        Value::Struct(fs) => fs.map_links(&mut |id| LinkId(id.0 + offset)),
        Value::Link(id) => id.0 += offset,
    }
}

/// Unifies two values in the context of `links`. Cells reached through
/// links are updated in place, so the change is visible at every alias.
pub fn unify_values(links: &mut LinkTable, a: &Value, b: &Value) -> Result<Value, Clash> {
    let mut path = Vec::new();
    unify_rec(links, a, b, &mut path, 0)
}

fn unify_rec(
    links: &mut LinkTable,
    a: &Value,
    b: &Value,
    path: &mut Vec<String>,
    depth: usize,
) -> Result<Value, Clash> {
    if depth > MAX_DEPTH {
        return Err(Clash { path: path.clone(), kind: ClashKind::Cycle });
    }
    match (a, b) {
        (Value::Link(x), Value::Link(y)) => {
            let (rx, ry) = (links.find(*x), links.find(*y));
            if rx == ry {
                return Ok(Value::Link(rx));
            }
            let vx = links.take(rx);
            let vy = links.take(ry);
            // forward first so that recursive visits see one cell
            links.cells.insert(ry, Cell::Forward(rx));
            let merged = unify_rec(links, &vx, &vy, path, depth + 1)?;
            store(links, rx, merged, path)
        }
        (Value::Link(x), other) | (other, Value::Link(x)) => {
            let rx = links.find(*x);
            let vx = links.take(rx);
            let merged = unify_rec(links, &vx, other, path, depth + 1)?;
            store(links, rx, merged, path)
        }
        (x, y) if x.is_bottom() => Ok(y.clone()),
        (x, y) if y.is_bottom() => Ok(x.clone()),
        (Value::Atoms(x), Value::Atoms(y)) => match x.intersect(y) {
            Some(s) => Ok(Value::Atoms(s)),
            None => Err(Clash { path: path.clone(), kind: ClashKind::Disjoint(x.clone(), y.clone()) }),
        },
        (Value::Struct(x), Value::Struct(y)) => {
            let mut out = x.clone();
            for (k, vy) in &y.entries {
                let merged = match out.entries.get(k) {
                    Some(vx) => {
                        let vx = vx.clone();
                        path.push(k.clone());
                        let r = unify_rec(links, &vx, vy, path, depth + 1);
                        path.pop();
                        r?
                    }
                    None => vy.clone(),
                };
                out.entries.insert(k.clone(), merged);
            }
            Ok(Value::Struct(out))
        }
        _ => Err(Clash { path: path.clone(), kind: ClashKind::AtomVsStruct }),
    }
}

fn store(links: &mut LinkTable, id: LinkId, v: Value, path: &[String]) -> Result<Value, Clash> {
    if reaches(links, &v, id, 0) {
        return Err(Clash { path: path.to_vec(), kind: ClashKind::Cycle });
    }
    links.set(id, v);
    Ok(Value::Link(id))
}

fn reaches(links: &LinkTable, v: &Value, target: LinkId, depth: usize) -> bool {
    if depth > MAX_DEPTH {
        return true;
    }
    match v {
        Value::Atoms(_) => false,
        Value::Link(id) => {
            let r = links.find(*id);
            r == target || links.value(r).is_some_and(|inner| reaches(links, inner, target, depth + 1))
        }
        Value::Struct(fs) => fs.entries.values().any(|x| reaches(links, x, target, depth + 1)),
    }
}

/// Unifies two stand-alone feature structures.
///
/// Links inside the inputs are interpreted in a private table and inlined
/// in the result, so the output is always link-free.
pub fn unify(a: &FeatureStructure, b: &FeatureStructure) -> Result<FeatureStructure, Clash> {
    let mut links = LinkTable::new();
    let v = unify_values(&mut links, &Value::Struct(a.clone()), &Value::Struct(b.clone()))?;
    match resolve(&links, &v) {
        Value::Struct(fs) => Ok(fs),
        _ => unreachable!("structure unification yields a structure"),
    }
}

/// Inlines every link reachable from `v`.
pub fn resolve(links: &LinkTable, v: &Value) -> Value {
    resolve_rec(links, v, 0)
}

fn resolve_rec(links: &LinkTable, v: &Value, depth: usize) -> Value {
    if depth > MAX_DEPTH {
        return Value::bottom();
    }
    match v {
        Value::Atoms(_) => v.clone(),
        Value::Link(id) => match links.value(*id) {
            Some(inner) => resolve_rec(links, inner, depth + 1),
            None => Value::bottom(),
        },
        Value::Struct(fs) => Value::Struct(FeatureStructure {
            entries: fs.entries.iter().map(|(k, v)| (k.clone(), resolve_rec(links, v, depth + 1))).collect(),
        }),
    }
}

/// `general` subsumes `specific`: every piece of information in `general`
/// is present (or narrowed) in `specific`. Both inputs must be link-free.
pub fn subsumes(general: &FeatureStructure, specific: &FeatureStructure) -> bool {
    general.entries.iter().all(|(k, vg)| match (vg, specific.entries.get(k)) {
        (v, _) if v.is_bottom() => true,
        (_, None) => false,
        (Value::Atoms(g), Some(Value::Atoms(s))) => s.is_subset(g),
        (Value::Struct(g), Some(Value::Struct(s))) => subsumes(g, s),
        _ => false,
    })
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atoms(a) => write!(f, "{a}"),
            Value::Struct(fs) => write!(f, "{fs}"),
            Value::Link(id) => write!(f, "#{}", id.0),
        }
    }
}

impl fmt::Display for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        let mut first = true;
        for (k, v) in &self.entries {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{k}:{v}")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(text: &str) -> FeatureStructure {
        match parse_value(text).unwrap() {
            (Value::Struct(fs), _) => fs,
            _ => panic!("not a structure"),
        }
    }

    #[test]
    fn bottom_is_identity() {
        let x = fs("[agr:[num:sing] mode:ind/imp]");
        assert_eq!(unify(&FeatureStructure::new(), &x).unwrap(), x);
        assert_eq!(unify(&x, &FeatureStructure::new()).unwrap(), x);
    }

    #[test]
    fn disjunction_narrows() {
        let r = unify(&fs("[mode:ind/imp]"), &fs("[mode:ind]")).unwrap();
        assert_eq!(r, fs("[mode:ind]"));
    }

    #[test]
    fn disjoint_atoms_fail() {
        let err = unify(&fs("[agr:[num:sing]]"), &fs("[agr:[num:plur]]")).unwrap_err();
        assert_eq!(err.path, vec!["agr".to_string(), "num".to_string()]);
    }

    #[test]
    fn atom_against_structure_fails() {
        let err = unify(&fs("[agr:3sg]"), &fs("[agr:[num:sing]]")).unwrap_err();
        assert_eq!(err.kind, ClashKind::AtomVsStruct);
    }

    #[test]
    fn empty_structure_value_is_bottom() {
        let r = unify(&fs("[agr:[]]"), &fs("[agr:3sg]")).unwrap();
        assert_eq!(r, fs("[agr:3sg]"));
    }

    #[test]
    fn links_are_shared() {
        let mut links = LinkTable::new();
        let id = links.fresh(Value::bottom());
        let a = Value::Struct(FeatureStructure::new().with("agr", Value::Link(id)));
        let b = Value::Struct(FeatureStructure::new().with("num", Value::Link(id)));
        // a.agr and b.num alias the same cell
        unify_values(&mut links, &Value::Link(id), &Value::atom("3sg")).unwrap();
        assert_eq!(resolve(&links, &a), Value::Struct(fs("[agr:3sg]")));
        assert_eq!(resolve(&links, &b), Value::Struct(fs("[num:3sg]")));
    }

    #[test]
    fn merged_links_forward() {
        let mut links = LinkTable::new();
        let x = links.fresh(Value::atom("a"));
        let y = links.fresh(Value::Atoms(AtomSet::new(["a", "b"]).unwrap()));
        unify_values(&mut links, &Value::Link(x), &Value::Link(y)).unwrap();
        assert_eq!(links.find(x), links.find(y));
        assert_eq!(links.value(y), Some(&Value::atom("a")));
    }

    #[test]
    fn cyclic_link_is_reported() {
        let mut links = LinkTable::new();
        let x = links.fresh(Value::bottom());
        let inner = Value::Struct(FeatureStructure::new().with("f", Value::Link(x)));
        links.set(x, inner.clone());
        let other = Value::Struct(FeatureStructure::new().with("f", Value::atom("a")));
        let r = unify_values(&mut links, &Value::Link(x), &other);
        assert!(r.is_err());
    }

    #[test]
    fn subsumption_basics() {
        assert!(subsumes(&fs("[]"), &fs("[a:x]")));
        assert!(subsumes(&fs("[a:x/y]"), &fs("[a:x]")));
        assert!(!subsumes(&fs("[a:x]"), &fs("[a:x/y]")));
        assert!(!subsumes(&fs("[b:x]"), &fs("[a:x]")));
    }
}
