//! Anchoring trees with a lexicon, composing derivations and bounded
//! recognition of sentences.

mod lexicon;
mod recognize;

pub use lexicon::{
    expand_macro, lexicalize, parse_lexicon, write_lexicon, AnchorWord, LexEntry, LexicalizeError, Lexicon,
    LexiconError,
};
pub use recognize::{recognize, Recognition};

use crate::feature::{parse_equation, FeatureEquation};
use crate::trees::{adjoin, finalize, substitute, CompositionError, DerivedTree, ElementaryTree, FinalizeError, Gorn};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operation {
    Substitution,
    Adjunction,
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operation::Substitution => "subst",
            Operation::Adjunction => "adjoin",
        })
    }
}

/// Derivation tree. Nodes name lexicalized trees; each attachment records
/// the operation and the address in the parent's elementary tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Derivation {
    pub tree: String,
    pub children: Vec<Attachment>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attachment {
    pub op: Operation,
    pub address: Gorn,
    pub child: Derivation,
}

impl Derivation {
    pub fn leaf(tree: impl Into<String>) -> Self {
        Derivation { tree: tree.into(), children: Vec::new() }
    }

    pub fn with(mut self, op: Operation, address: Gorn, child: Derivation) -> Self {
        self.children.push(Attachment { op, address, child });
        self
    }

    /// Number of composition operations.
    pub fn operations(&self) -> usize {
        self.children.iter().map(|a| 1 + a.child.operations()).sum()
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tree)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{} {} {}", a.op, a.address, a.child)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("unknown tree {0}")]
    UnknownTree(String),
    #[error("{tree}: two operations at address {address}")]
    SharedAddress { tree: String, address: Gorn },
    #[error("{op} of {child} into {tree} at {address}: {error}")]
    Composition { op: Operation, tree: String, child: String, address: Gorn, error: Box<CompositionError> },
    #[error(transparent)]
    Finalize(#[from] FinalizeError),
    #[error("composition bound must be positive")]
    BadBound,
    #[error(transparent)]
    Lexicalize(#[from] LexicalizeError),
    #[error("entry {entry}: unknown {what} {name}")]
    UnknownSelection { entry: String, what: &'static str, name: String },
}

/// Constraints every derived sentence root must meet.
pub fn root_constraints() -> Vec<FeatureEquation> {
    ["S.t:<mode> = ind/imp", "S.t:<comp> = nil"].iter().map(|s| parse_equation(s).unwrap()).collect()
}

fn compose_raw(d: &Derivation, trees: &BTreeMap<String, ElementaryTree>) -> Result<ElementaryTree, DeriveError> {
    let mut t = trees.get(&d.tree).cloned().ok_or_else(|| DeriveError::UnknownTree(d.tree.clone()))?;
    let mut order: Vec<&Attachment> = d.children.iter().collect();
    order.sort_by(|a, b| b.address.cmp(&a.address));
    for w in order.windows(2) {
        if w[0].address == w[1].address {
            return Err(DeriveError::SharedAddress { tree: d.tree.clone(), address: w[0].address.clone() });
        }
    }
    // Descending addresses: each operation only disturbs addresses at or
    // below its own site, which have all been handled already.
    for a in order {
        let child = compose_raw(&a.child, trees)?;
        let result = match a.op {
            Operation::Substitution => substitute(&t, &a.address, &child),
            Operation::Adjunction => adjoin(&t, &a.address, &child),
        };
        t = result.map_err(|error| DeriveError::Composition {
            op: a.op,
            tree: d.tree.clone(),
            child: a.child.tree.clone(),
            address: a.address.clone(),
            error: Box::new(error),
        })?;
    }
    Ok(t)
}

/// Applies the derivation bottom-up and finalizes the result under the
/// sentence root constraints.
pub fn compose(d: &Derivation, trees: &BTreeMap<String, ElementaryTree>) -> Result<DerivedTree, DeriveError> {
    let t = compose_raw(d, trees)?;
    Ok(finalize(&t, &root_constraints())?)
}

/// Lexicalized trees keyed `name[word ...]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Grammar {
    pub trees: BTreeMap<String, ElementaryTree>,
    /// Entry/tree pairs skipped because their features clash.
    pub skipped: Vec<String>,
}

impl Grammar {
    /// Anchors every tree each entry selects. `families` maps family names
    /// to their trees; `trees` holds individually selectable trees.
    pub fn from_lexicon(
        entries: &[LexEntry],
        families: &BTreeMap<String, Vec<ElementaryTree>>,
        trees: &BTreeMap<String, ElementaryTree>,
    ) -> Result<Grammar, DeriveError> {
        let mut g = Grammar::default();
        for e in entries {
            let mut selected: Vec<&ElementaryTree> = Vec::new();
            for f in &e.families {
                let fam = families.get(f).ok_or_else(|| DeriveError::UnknownSelection {
                    entry: e.index.clone(),
                    what: "family",
                    name: f.clone(),
                })?;
                selected.extend(fam);
            }
            for n in &e.trees {
                selected.push(trees.get(n).ok_or_else(|| DeriveError::UnknownSelection {
                    entry: e.index.clone(),
                    what: "tree",
                    name: n.clone(),
                })?);
            }
            for t in selected {
                match lexicalize(t, e) {
                    Ok(l) => {
                        let words: Vec<&str> = e.words.iter().map(|w| w.word.as_str()).collect();
                        g.trees.insert(format!("{}[{}]", t.name, words.join(" ")), l);
                    }
                    Err(err) if err.is_clash() => g.skipped.push(format!("{} {}", e.index, t.name)),
                    Err(err) => return Err(err.into()),
                }
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::trees::{parse_trees, ElementaryTree};
    use std::collections::BTreeMap;

    pub const TREES: &str = "\
tree αnx0Vnx1[ate] initial
S_r - 2
  NP_0 subst 0
  VP - 2 [] [mode:#1]
    V - 1 [mode:#1]
      \"ate\" - 0
    NP_1 subst 0
link #1 ind
eq S_r.b:<mode> = VP.t:<mode>
end
tree αNXN[Al] initial
NP - 1
  N - 1
    \"Al\" - 0
end
tree αNXN[apple] initial
NP - 1
  N - 1
    \"apple\" - 0
end
tree βDnx[an] auxiliary
NP - 2 [] [det:+]
  D - 1
    \"an\" - 0
  NP foot 0 [det:-]
end
tree βvxARB[quickly] auxiliary
VP - 2
  VP foot 0
  Ad - 1
    \"quickly\" - 0
end
tree αnx0Vnx1[eating] initial
S_r - 2
  NP_0 subst 0
  VP - 2 [] [mode:#1]
    V - 1 [mode:#1]
      \"eating\" - 0
    NP_1 subst 0
link #1 ger
eq S_r.b:<mode> = VP.t:<mode>
end
";

    pub fn trees() -> BTreeMap<String, ElementaryTree> {
        parse_trees(TREES).unwrap().into_iter().map(|t| (t.name.clone(), t)).collect()
    }
}
