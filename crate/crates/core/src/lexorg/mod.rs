//! Lexical organization: subcategorization frames, lexical redistribution
//! rules, block selection and tree-family generation.

mod blocks;
mod family;

pub use blocks::{blocks_for_frame, BlockLibrary, Target, Transformation};
pub use family::{frame_lattice, generate_family, FamilyTree, LexError, Provenance, TreeFamily};

use crate::feature::{unify, FeatureEquation, FeatureStructure};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    Pre,
    Post,
}

impl Position {
    pub fn parse(s: &str) -> Option<Position> {
        match s {
            "pre" => Some(Position::Pre),
            "post" => Some(Position::Post),
            _ => None,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::Pre => "pre",
            Position::Post => "post",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameArg {
    pub index: u32,
    pub cat: String,
    pub position: Position,
    pub features: FeatureStructure,
    /// Expansion hint, e.g. the preposition heading a PP argument.
    pub hint: Option<String>,
}

impl FrameArg {
    pub fn new(index: u32, cat: &str, position: Position) -> Self {
        FrameArg { index, cat: cat.to_string(), position, features: FeatureStructure::new(), hint: None }
    }

    pub fn with_hint(mut self, hint: &str) -> Self {
        self.hint = Some(hint.to_string());
        self
    }
}

impl fmt::Display for FrameArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.index, self.cat, self.position)?;
        if let Some(h) = &self.hint {
            write!(f, " {h}")?;
        }
        if !self.features.is_empty() {
            write!(f, " {}", self.features)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SubcatFrame {
    pub name: String,
    pub anchor_cat: String,
    pub args: Vec<FrameArg>,
    /// Equations over block variables (`Anchor`, `Root`, `Arg1`, ...).
    pub frame_features: Vec<FeatureEquation>,
}

/// Frames are equal when anchors and ordered arguments agree; names and
/// frame-level equations are not compared.
impl PartialEq for SubcatFrame {
    fn eq(&self, other: &Self) -> bool {
        self.anchor_cat == other.anchor_cat && self.args == other.args
    }
}

impl Eq for SubcatFrame {}

impl SubcatFrame {
    pub fn new(name: &str, anchor_cat: &str, args: Vec<FrameArg>) -> Self {
        SubcatFrame { name: name.to_string(), anchor_cat: anchor_cat.to_string(), args, frame_features: Vec::new() }
    }

    pub fn with_feature(mut self, eq: FeatureEquation) -> Self {
        self.frame_features.push(eq);
        self
    }

    pub fn arg(&self, index: u32) -> Option<&FrameArg> {
        self.args.iter().find(|a| a.index == index)
    }

    pub fn check(&self) -> Result<(), LrrError> {
        let mut seen = BTreeSet::new();
        for a in &self.args {
            if !seen.insert(a.index) {
                return Err(LrrError::DuplicateIndex { frame: self.name.clone(), index: a.index });
            }
        }
        Ok(())
    }
}

impl fmt::Display for SubcatFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name, self.anchor_cat)?;
        for a in &self.args {
            write!(f, " | {a}")?;
        }
        Ok(())
    }
}

/// One left/right frame pair of a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LrrVariant {
    pub left: SubcatFrame,
    pub right: SubcatFrame,
}

/// Lexical redistribution rule. Several variants may share a name, so one
/// rule such as passive can cover frames of different arities; the first
/// matching variant applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lrr {
    pub name: String,
    pub variants: Vec<LrrVariant>,
    /// Additive rules keep source arguments the template does not mention.
    pub additive: bool,
}

impl Lrr {
    pub fn new(name: &str, left: SubcatFrame, right: SubcatFrame) -> Self {
        Lrr { name: name.to_string(), variants: vec![LrrVariant { left, right }], additive: false }
    }

    pub fn or(mut self, left: SubcatFrame, right: SubcatFrame) -> Self {
        self.variants.push(LrrVariant { left, right });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LrrError {
    #[error("frame {frame} has argument index {index} twice")]
    DuplicateIndex { frame: String, index: u32 },
}

/// Which variant matched, and the frame argument position bound to each
/// pattern index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bindings {
    pub variant: usize,
    pub args: BTreeMap<u32, usize>,
}

/// Matches the rule's left frames against `s`: same anchor category, same
/// number of arguments, and per position the same side and category with
/// unifiable features.
pub fn lrr_match(r: &Lrr, s: &SubcatFrame) -> Option<Bindings> {
    r.variants.iter().enumerate().find_map(|(vi, v)| {
        let left = &v.left;
        if left.anchor_cat != s.anchor_cat || left.args.len() != s.args.len() {
            return None;
        }
        let mut args = BTreeMap::new();
        for (i, (p, a)) in left.args.iter().zip(&s.args).enumerate() {
            let hint_ok = p.hint.is_none() || p.hint == a.hint;
            if p.position != a.position || p.cat != a.cat || !hint_ok {
                return None;
            }
            unify(&p.features, &a.features).ok()?;
            args.insert(p.index, i);
        }
        Some(Bindings { variant: vi, args })
    })
}

/// Applies `r` to `s`. Arguments of the right template whose index occurs
/// in the left pattern take over the bound source argument (its index,
/// features unified with the template's); other template arguments are
/// new. Template frame equations replace source equations on the same
/// path.
pub fn lrr_apply(r: &Lrr, s: &SubcatFrame) -> Result<Option<SubcatFrame>, LrrError> {
    let Some(b) = lrr_match(r, s) else { return Ok(None) };
    let v = &r.variants[b.variant];
    let mut args = Vec::new();
    let mut used = BTreeSet::new();
    for t in &v.right.args {
        let arg = match b.args.get(&t.index) {
            Some(&pos) => {
                used.insert(pos);
                let src = &s.args[pos];
                let Ok(features) = unify(&src.features, &t.features) else { return Ok(None) };
                FrameArg {
                    index: src.index,
                    cat: t.cat.clone(),
                    position: t.position,
                    features,
                    hint: t.hint.clone().or_else(|| src.hint.clone()),
                }
            }
            None => t.clone(),
        };
        args.push(arg);
    }
    if r.additive {
        args.extend(s.args.iter().enumerate().filter(|(i, _)| !used.contains(i)).map(|(_, a)| a.clone()));
    }
    let mut frame_features: Vec<FeatureEquation> =
        s.frame_features.iter().filter(|e| !v.right.frame_features.iter().any(|t| t.lhs == e.lhs)).cloned().collect();
    frame_features.extend(v.right.frame_features.iter().cloned());
    let out = SubcatFrame {
        name: format!("{}({})", r.name, s.name),
        anchor_cat: v.right.anchor_cat.clone(),
        args,
        frame_features,
    };
    out.check()?;
    Ok(Some(out))
}

/// Every frame reachable from `s` by a sequence of distinct rules, with the
/// shortest such sequence (first found in rule order on ties). The base
/// frame comes first with the empty sequence.
pub fn frame_closure(s: &SubcatFrame, rules: &[Lrr]) -> Result<Vec<(SubcatFrame, Vec<String>)>, LrrError> {
    let mut found: Vec<(SubcatFrame, Vec<String>)> = vec![(s.clone(), Vec::new())];
    let mut queue: VecDeque<(SubcatFrame, Vec<usize>)> = VecDeque::from([(s.clone(), Vec::new())]);
    let mut states: Vec<(SubcatFrame, BTreeSet<usize>)> = vec![(s.clone(), BTreeSet::new())];
    while let Some((frame, seq)) = queue.pop_front() {
        for (ri, r) in rules.iter().enumerate() {
            if seq.contains(&ri) {
                continue;
            }
            let Some(next) = lrr_apply(r, &frame)? else { continue };
            let mut seq2 = seq.clone();
            seq2.push(ri);
            let used: BTreeSet<usize> = seq2.iter().copied().collect();
            if states.iter().any(|(f, u)| *f == next && *u == used) {
                continue;
            }
            states.push((next.clone(), used));
            if !found.iter().any(|(f, _)| *f == next) {
                found.push((next.clone(), seq2.iter().map(|&i| rules[i].name.clone()).collect()));
            }
            queue.push_back((next, seq2));
        }
    }
    Ok(found)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::feature::parse_equation;

    pub fn np(i: u32, p: Position) -> FrameArg {
        FrameArg::new(i, "NP", p)
    }

    pub fn pp(i: u32, hint: &str) -> FrameArg {
        FrameArg::new(i, "PP", Position::Post).with_hint(hint)
    }

    use Position::{Post, Pre};

    pub fn intransitive() -> SubcatFrame {
        SubcatFrame::new("intransitive", "V", vec![np(0, Pre)])
    }

    pub fn transitive() -> SubcatFrame {
        SubcatFrame::new("transitive", "V", vec![np(0, Pre), np(1, Post)])
    }

    pub fn ditransitive() -> SubcatFrame {
        SubcatFrame::new("ditransitive", "V", vec![np(0, Pre), np(2, Post), np(1, Post)])
    }

    pub fn passive() -> Lrr {
        let ppart = || parse_equation("Anchor.t:<mode> = ppart").unwrap();
        let f = |args| SubcatFrame::new("", "V", args);
        Lrr::new("passive", f(vec![np(0, Pre), np(1, Post)]), f(vec![np(1, Pre), pp(0, "by")]).with_feature(ppart()))
            .or(
                f(vec![np(0, Pre), np(2, Post), np(1, Post)]),
                f(vec![np(2, Pre), np(1, Post), pp(0, "by")]).with_feature(ppart()),
            )
            .or(
                f(vec![np(0, Pre), np(1, Post), pp(2, "to")]),
                f(vec![np(1, Pre), pp(2, "to"), pp(0, "by")]).with_feature(ppart()),
            )
    }

    pub fn dative_shift() -> Lrr {
        let f = |args| SubcatFrame::new("", "V", args);
        Lrr::new(
            "dative-shift",
            f(vec![np(0, Pre), np(2, Post), np(1, Post)]),
            f(vec![np(0, Pre), np(1, Post), pp(2, "to")]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use Position::{Post, Pre};

    #[test]
    fn passive_matches_transitive() {
        let b = lrr_match(&passive(), &transitive()).unwrap();
        assert_eq!(b.variant, 0);
        assert_eq!(b.args, BTreeMap::from([(0, 0), (1, 1)]));
        assert!(lrr_match(&passive(), &intransitive()).is_none());
    }

    #[test]
    fn dative_shift_matches_double_object() {
        let b = lrr_match(&dative_shift(), &ditransitive()).unwrap();
        assert_eq!(b.args, BTreeMap::from([(0, 0), (2, 1), (1, 2)]));
        let p = lrr_match(&passive(), &ditransitive()).unwrap();
        assert_eq!(p.variant, 1);
    }

    #[test]
    fn passive_promotes_object() {
        let p = lrr_apply(&passive(), &transitive()).unwrap().unwrap();
        assert_eq!(p.args, vec![np(1, Pre), pp(0, "by")]);
        assert_eq!(p.frame_features[0].to_string(), "Anchor.t:<mode> = ppart");
        assert_eq!(p.name, "passive(transitive)");
    }

    #[test]
    fn dative_shift_yields_pp_object() {
        let d = lrr_apply(&dative_shift(), &ditransitive()).unwrap().unwrap();
        // The direct object moves next to the verb; the indirect object
        // becomes a to-PP.
        assert_eq!(d.args, vec![np(0, Pre), np(1, Post), pp(2, "to")]);
    }

    #[test]
    fn non_matching_frame_gives_none() {
        assert_eq!(lrr_apply(&dative_shift(), &transitive()), Ok(None));
    }

    #[test]
    fn feature_clash_blocks_rule() {
        let mut t = transitive();
        t.args[1].features = FeatureStructure::new().with("case", crate::feature::Value::atom("dat"));
        let mut r = passive();
        r.variants[0].left.args[1].features = FeatureStructure::new().with("case", crate::feature::Value::atom("acc"));
        assert!(lrr_match(&r, &t).is_none());
    }

    #[test]
    fn closure_sizes() {
        assert_eq!(frame_closure(&transitive(), &[]).unwrap().len(), 1);
        let c = frame_closure(&transitive(), &[passive()]).unwrap();
        assert_eq!(c.len(), 2);
        let c = frame_closure(&ditransitive(), &[dative_shift(), passive()]).unwrap();
        let seqs: Vec<Vec<String>> = c.iter().map(|(_, s)| s.clone()).collect();
        assert_eq!(
            seqs,
            vec![
                vec![],
                vec!["dative-shift".to_string()],
                vec!["passive".to_string()],
                vec!["dative-shift".to_string(), "passive".to_string()],
            ]
        );
        let last = &c[3].0;
        assert_eq!(last.args, vec![np(1, Pre), pp(2, "to"), pp(0, "by")]);
        assert_eq!(c[2].0.args, vec![np(2, Pre), np(1, Post), pp(0, "by")]);
    }

    #[test]
    fn additive_rules_keep_unmentioned_args() {
        let f = |args| SubcatFrame::new("", "V", args);
        let mut r = Lrr::new("add", f(vec![np(0, Pre), np(1, Post)]), f(vec![np(0, Pre), pp(3, "with")]));
        r.additive = true;
        let out = lrr_apply(&r, &transitive()).unwrap().unwrap();
        assert_eq!(out.args, vec![np(0, Pre), pp(3, "with"), np(1, Post)]);
    }

    #[test]
    fn duplicate_indices_are_a_fault() {
        let f = |args| SubcatFrame::new("", "V", args);
        let r = Lrr::new("bad", f(vec![np(0, Pre), np(1, Post)]), f(vec![np(0, Pre), np(0, Post)]));
        assert!(lrr_apply(&r, &transitive()).is_err());
    }
}
