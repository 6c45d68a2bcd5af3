//! Tree and family names synthesized from the leaf sequence.

use super::{ElementaryTree, MarkerKind, TreeKind, TreeNode};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NamingError {
    #[error("no name code for category {0}")]
    UnknownCategory(String),
}

/// Naming context supplied by the caller.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameContext {
    /// Transformation prefix placed after α/β, e.g. `W0`, `I`, `pW1`.
    pub prefix: String,
    /// Spell out the root category first, as for stand-alone initial
    /// trees such as `αNXN`.
    pub with_root: bool,
}

impl NameContext {
    pub fn prefixed(prefix: impl Into<String>) -> Self {
        NameContext { prefix: prefix.into(), with_root: false }
    }
}

/// Lower-case name code of a category stem. Phrasal categories take the
/// code of their head followed by `x`.
pub fn category_code(stem: &str) -> Result<String, NamingError> {
    let code = match stem {
        "S" => "s",
        "A" => "a",
        "Ad" | "ARB" | "Adv" => "arb",
        "D" => "d",
        "V" => "v",
        "N" => "n",
        "P" => "p",
        "PL" => "pl",
        "Comp" => "comp",
        "Conj" => "conj",
        "C" => "c",
        "NP" => "nx",
        "PP" => "px",
        "VP" => "vx",
        "AP" => "ax",
        "AdvP" => "arbx",
        "DetP" => "dx",
        _ => return Err(NamingError::UnknownCategory(stem.to_string())),
    };
    Ok(code.to_string())
}

fn digit_subscript(n: &TreeNode) -> Option<&str> {
    n.label.subscript.as_deref().filter(|s| !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()))
}

fn only_epsilon(n: &TreeNode) -> bool {
    !n.children.is_empty() && n.children.iter().all(|c| c.is_epsilon() || only_epsilon(c))
}

fn body(n: &TreeNode, out: &mut String) -> Result<(), NamingError> {
    if n.terminal {
        out.push_str(&n.label.stem);
        return Ok(());
    }
    match n.marker.kind {
        MarkerKind::Anchor => {
            out.push_str(&category_code(&n.label.stem)?.to_uppercase());
            return Ok(());
        }
        MarkerKind::Foot => {
            out.push_str(&category_code(&n.label.stem)?);
            return Ok(());
        }
        MarkerKind::Substitution => {
            match (&n.label.subscript, digit_subscript(n)) {
                (_, Some(i)) => {
                    out.push_str(&category_code(&n.label.stem)?);
                    out.push_str(i);
                }
                (None, None) => out.push_str(&category_code(&n.label.stem)?),
                // Moved or displaced material such as NP_w is not spelled.
                (Some(_), None) => {}
            }
            return Ok(());
        }
        MarkerKind::None => {}
    }
    if let Some(i) = digit_subscript(n) {
        if only_epsilon(n) {
            out.push_str(&category_code(&n.label.stem)?);
            out.push_str(i);
            return Ok(());
        }
    }
    for c in &n.children {
        body(c, out)?;
    }
    Ok(())
}

fn greek(kind: TreeKind) -> char {
    match kind {
        TreeKind::Initial => 'α',
        TreeKind::Auxiliary => 'β',
    }
}

/// Name of `t`: α or β, the context prefix, then one component per leaf.
/// Anchors are upper-case, lexical leaves spell their word, traces keep
/// the index of the position they stand for, and ε is silent.
pub fn tree_name(t: &ElementaryTree, ctx: &NameContext) -> Result<String, NamingError> {
    let mut out = String::new();
    out.push(greek(t.kind));
    out.push_str(&ctx.prefix);
    if ctx.with_root {
        out.push_str(&category_code(&t.root.label.stem)?.to_uppercase());
    }
    body(&t.root, &mut out)?;
    Ok(out)
}

/// Family name: `T` followed by the body of the declarative tree.
pub fn family_name(declarative: &ElementaryTree) -> Result<String, NamingError> {
    let mut out = String::from("T");
    body(&declarative.root, &mut out)?;
    Ok(out)
}
