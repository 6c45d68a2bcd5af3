use super::blocks::instantiate;
use super::{blocks_for_frame, frame_closure, BlockLibrary, FrameArg, Lrr, LrrError, Position, SubcatFrame};
use crate::descriptions::{conjoin, solve, BlockParseError, DescriptionError, SolveError, SolverConfig};
use crate::feature::unify;
use crate::trees::{family_name, tree_name, ElementaryTree, NameContext, NamingError};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("no spine block for anchor category {0}")]
    MissingSpine(String),
    #[error("no block for {cat} {position}{}", hint.as_ref().map(|h| format!(" {h}")).unwrap_or_default())]
    MissingBlock { cat: String, position: Position, hint: Option<String> },
    #[error("block {0} declares no node")]
    EmptyBlock(String),
    #[error("block {block}: {error}")]
    Block { block: String, error: BlockParseError },
    #[error(transparent)]
    Description(#[from] DescriptionError),
    #[error(transparent)]
    Lrr(#[from] LrrError),
    #[error("{provenance}: {error}")]
    Solve { provenance: Provenance, error: SolveError },
    #[error(transparent)]
    Naming(#[from] NamingError),
    #[error("frame {0} has no declarative tree")]
    NoDeclarative(String),
}

/// How a family member was produced.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Provenance {
    /// Name of the canonical frame the family starts from.
    pub frame: String,
    pub lrrs: Vec<String>,
    /// Transformation block name; `declarative` when none applied.
    pub transformation: String,
    /// Argument index the transformation targeted.
    pub target: Option<u32>,
}

pub const DECLARATIVE: &str = "declarative";

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}", self.frame, self.lrrs.join(", "), self.transformation)?;
        if let Some(i) = self.target {
            write!(f, " {i}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyTree {
    pub tree: ElementaryTree,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeFamily {
    pub name: String,
    pub trees: Vec<FamilyTree>,
}

impl TreeFamily {
    pub fn names(&self) -> Vec<&str> {
        self.trees.iter().map(|t| t.tree.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&FamilyTree> {
        self.trees.iter().find(|t| t.tree.name == name)
    }

    /// Provenance sidecar: one line per tree, `name<TAB>provenance`.
    pub fn provenance_text(&self) -> String {
        self.trees.iter().map(|t| format!("{}\t{}\n", t.tree.name, t.provenance)).collect()
    }
}

/// Generates the tree family of `s`: every frame of the LRR closure is
/// turned into its block description, conjoined with nothing
/// (declarative) and with each applicable transformation, and solved.
pub fn generate_family(
    s: &SubcatFrame,
    rules: &[Lrr],
    lib: &BlockLibrary,
    cfg: SolverConfig,
) -> Result<TreeFamily, LexError> {
    let mut trees: Vec<FamilyTree> = Vec::new();
    let mut names: BTreeSet<String> = BTreeSet::new();
    let mut family = None;
    for (frame, lrrs) in frame_closure(s, rules)? {
        let base = blocks_for_frame(&frame, lib)?;
        let mut variants = vec![(DECLARATIVE.to_string(), String::new(), None, base.clone())];
        for t in &lib.transformations {
            let targets: Vec<Option<&FrameArg>> = match t.target {
                super::Target::Frame => vec![None],
                _ => frame.args.iter().filter(|a| t.target.selects(a)).map(Some).collect(),
            };
            for a in targets {
                let index = a.map(|a| a.index);
                let hint = a.and_then(|a| a.hint.as_deref());
                let (block, _) = instantiate(&t.name, &t.source, index, hint)?;
                // A block that contradicts the frame describes no tree.
                let Ok(d) = conjoin(&base, &block) else { continue };
                let prefix = match index {
                    Some(i) => t.prefix.replace("{i}", &i.to_string()),
                    None => t.prefix.clone(),
                };
                variants.push((t.name.clone(), prefix, index, d));
            }
        }
        for (transformation, prefix, target, d) in variants {
            let provenance = Provenance { frame: s.name.clone(), lrrs: lrrs.clone(), transformation, target };
            let models = solve(&d, cfg).map_err(|error| LexError::Solve { provenance: provenance.clone(), error })?;
            for mut tree in models {
                if family.is_none() && lrrs.is_empty() && provenance.transformation == DECLARATIVE {
                    family = Some(family_name(&tree)?);
                }
                let name = tree_name(&tree, &NameContext::prefixed(prefix.as_str()))?;
                let mut unique = name.clone();
                let mut n = 2;
                while names.contains(&unique) {
                    unique = format!("{name}-{n}");
                    n += 1;
                }
                names.insert(unique.clone());
                tree.name = unique;
                trees.push(FamilyTree { tree, provenance: provenance.clone() });
            }
        }
    }
    let name = family.ok_or_else(|| LexError::NoDeclarative(s.name.clone()))?;
    Ok(TreeFamily { name, trees })
}

fn slot_fits(a: &FrameArg, b: &FrameArg) -> bool {
    a.cat == b.cat && a.position == b.position && a.hint == b.hint && unify(&a.features, &b.features).is_ok()
}

/// `small`'s arguments occur, in order, among `big`'s.
fn extends(small: &SubcatFrame, big: &SubcatFrame) -> bool {
    let mut rest = big.args.iter();
    small.anchor_cat == big.anchor_cat && small.args.iter().all(|a| rest.any(|b| slot_fits(a, b)))
}

/// Edges `(i, j)` of the implicit frame hierarchy: frame `j` has strictly
/// more arguments than frame `i` and contains `i`'s arguments in order.
/// Only the transitive reduction is returned.
pub fn frame_lattice(frames: &[SubcatFrame]) -> Vec<(usize, usize)> {
    let n = frames.len();
    let below =
        |i: usize, j: usize| i != j && frames[i].args.len() < frames[j].args.len() && extends(&frames[i], &frames[j]);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if below(i, j) && !(0..n).any(|k| below(i, k) && below(k, j)) {
                edges.push((i, j));
            }
        }
    }
    edges
}
