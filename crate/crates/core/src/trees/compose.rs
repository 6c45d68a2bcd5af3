//! Substitution, adjunction and final top/bottom unification.

use super::{ElementaryTree, Gorn, MarkerKind, TreeKind, TreeNode};
use crate::feature::{unify_values, Clash, EqRhs, FeatureEquation, FeatureStructure, LinkId, Side, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositionError {
    #[error("no node at address {0}")]
    NoSuchNode(Gorn),
    #[error("node {0} is not a substitution site")]
    NotSubstitutionSite(Gorn),
    #[error("tree {0} is not an initial tree")]
    NotInitial(String),
    #[error("tree {0} is not an auxiliary tree")]
    NotAuxiliary(String),
    #[error("label mismatch at {address}: {site} vs {tree_root}")]
    LabelMismatch { address: Gorn, site: String, tree_root: String },
    #[error("node {address} does not accept adjunction: {reason}")]
    NotAdjoinable { address: Gorn, reason: &'static str },
    #[error("unification fails at {address}: {clash}")]
    Unification { address: Gorn, clash: Clash },
}

impl CompositionError {
    /// Feature clashes are ordinary failures; everything else is a misuse.
    pub fn is_failure(&self) -> bool {
        matches!(self, CompositionError::Unification { .. })
    }
}

fn unify_fs(
    t: &mut ElementaryTree,
    a: &FeatureStructure,
    b: &FeatureStructure,
    address: &Gorn,
) -> Result<FeatureStructure, CompositionError> {
    match unify_values(&mut t.links, &Value::Struct(a.clone()), &Value::Struct(b.clone())) {
        Ok(Value::Struct(fs)) => Ok(fs),
        Ok(_) => unreachable!("structures unify to a structure"),
        Err(clash) => Err(CompositionError::Unification { address: address.clone(), clash }),
    }
}

/// Moves `other`'s link cells into `host` and returns `other`'s root with
/// its link ids shifted accordingly.
fn import(host: &mut ElementaryTree, other: &ElementaryTree) -> TreeNode {
    let offset = host.links.absorb(&other.links);
    let mut root = other.root.clone();
    root.map_links(&mut |id| LinkId(id.0 + offset));
    root
}

/// Substitutes the initial tree `filler` at the substitution node `addr`.
/// The new node's top is the unification of both tops; its bottom is the
/// filler root's bottom.
pub fn substitute(
    host: &ElementaryTree,
    addr: &Gorn,
    filler: &ElementaryTree,
) -> Result<ElementaryTree, CompositionError> {
    let site = host.node(addr).ok_or_else(|| CompositionError::NoSuchNode(addr.clone()))?;
    if site.marker.kind != MarkerKind::Substitution || !site.is_leaf() {
        return Err(CompositionError::NotSubstitutionSite(addr.clone()));
    }
    if filler.kind != TreeKind::Initial {
        return Err(CompositionError::NotInitial(filler.name.clone()));
    }
    if site.label.stem != filler.root.label.stem {
        return Err(CompositionError::LabelMismatch {
            address: addr.clone(),
            site: site.name(),
            tree_root: filler.root.name(),
        });
    }
    let mut out = host.clone();
    let froot = import(&mut out, filler);
    let site_top = out.node(addr).unwrap().top.clone();
    let top = unify_fs(&mut out, &site_top, &froot.top, addr)?;
    let node = out.node_mut(addr).unwrap();
    node.top = top;
    node.bottom = froot.bottom;
    node.marker = froot.marker;
    node.children = froot.children;
    Ok(out)
}

/// Adjoins the auxiliary tree `aux` at the internal node `addr`.
///
/// The host node splits in two. The upper half carries the host top
/// unified with the aux root top, and the aux root bottom. The lower half
/// sits at the foot position with the foot top, the host bottom unified
/// with the foot bottom, and the host node's children.
pub fn adjoin(host: &ElementaryTree, addr: &Gorn, aux: &ElementaryTree) -> Result<ElementaryTree, CompositionError> {
    let site = host.node(addr).ok_or_else(|| CompositionError::NoSuchNode(addr.clone()))?;
    if aux.kind != TreeKind::Auxiliary {
        return Err(CompositionError::NotAuxiliary(aux.name.clone()));
    }
    let not = |reason| CompositionError::NotAdjoinable { address: addr.clone(), reason };
    if site.terminal {
        return Err(not("terminal node"));
    }
    if site.marker.na {
        return Err(not("null adjunction constraint"));
    }
    match site.marker.kind {
        MarkerKind::Substitution => return Err(not("substitution node")),
        MarkerKind::Foot => return Err(not("foot node")),
        MarkerKind::Anchor => return Err(not("anchor node")),
        MarkerKind::None => {}
    }
    if site.label.stem != aux.root.label.stem {
        return Err(CompositionError::LabelMismatch {
            address: addr.clone(),
            site: site.name(),
            tree_root: aux.root.name(),
        });
    }
    let foot_addr = aux.foot().ok_or_else(|| CompositionError::NotAuxiliary(aux.name.clone()))?;
    let mut out = host.clone();
    let mut aroot = import(&mut out, aux);
    let host_node = out.node(addr).unwrap().clone();

    let upper_top = unify_fs(&mut out, &host_node.top, &aroot.top, addr)?;
    let foot_bottom = node_at(&aroot, &foot_addr).bottom.clone();
    let mut lower_addr = addr.clone();
    lower_addr.0.extend(foot_addr.0.iter().copied());
    let lower_bottom = unify_fs(&mut out, &host_node.bottom, &foot_bottom, &lower_addr)?;

    {
        let foot = node_at_mut(&mut aroot, &foot_addr);
        foot.label = host_node.label.clone();
        foot.marker = host_node.marker;
        foot.bottom = lower_bottom;
        foot.children = host_node.children.clone();
    }
    aroot.top = upper_top;
    *out.node_mut(addr).unwrap() = aroot;
    Ok(out)
}

fn node_at<'a>(n: &'a TreeNode, addr: &Gorn) -> &'a TreeNode {
    addr.0.iter().fold(n, |n, &i| &n.children[i - 1])
}

fn node_at_mut<'a>(n: &'a mut TreeNode, addr: &Gorn) -> &'a mut TreeNode {
    addr.0.iter().fold(n, |n, &i| &mut n.children[i - 1])
}

/// A fully composed tree whose top and bottom features have been merged.
/// Each node's single matrix lives in `top`; every `bottom` is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedTree(pub ElementaryTree);

impl DerivedTree {
    /// Terminal words in order, ε omitted.
    pub fn words(&self) -> Vec<String> {
        self.0.frontier().into_iter().filter(|n| n.terminal && !n.is_epsilon()).map(|n| n.label.stem.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FinalizeError {
    #[error("substitution node {0} is still open")]
    OpenSubstitution(Gorn),
    #[error("top and bottom do not unify at {address}: {clash}")]
    TopBottom { address: Gorn, clash: Clash },
    #[error("root constraint {constraint} fails: {clash}")]
    RootConstraint { constraint: String, clash: Clash },
}

/// Unifies top with bottom at every node, then applies `root_constraints`
/// to the root's merged matrix. Node names and sides in the constraints
/// are ignored: every path is read relative to the root.
pub fn finalize(t: &ElementaryTree, root_constraints: &[FeatureEquation]) -> Result<DerivedTree, FinalizeError> {
    let mut out = t.clone();
    let addrs: Vec<Gorn> = t.nodes().into_iter().map(|(a, _)| a).collect();
    for addr in &addrs {
        let n = out.node(addr).unwrap();
        if n.marker.kind == MarkerKind::Substitution {
            return Err(FinalizeError::OpenSubstitution(addr.clone()));
        }
    }
    for addr in &addrs {
        let n = out.node(addr).unwrap();
        let (top, bottom) = (n.top.clone(), n.bottom.clone());
        let merged = unify_values(&mut out.links, &Value::Struct(top), &Value::Struct(bottom))
            .map_err(|clash| FinalizeError::TopBottom { address: addr.clone(), clash })?;
        let n = out.node_mut(addr).unwrap();
        n.top = match merged {
            Value::Struct(fs) => fs,
            _ => unreachable!(),
        };
        n.bottom = FeatureStructure::new();
    }
    for c in root_constraints {
        let fail = |clash| FinalizeError::RootConstraint { constraint: c.to_string(), clash };
        let root = Gorn::root();
        match &c.rhs {
            EqRhs::Atoms(a) => out.unify_at(&root, Side::Top, &c.lhs.attrs, Value::Atoms(a.clone())).map_err(fail)?,
            EqRhs::Path(p) => {
                let id = out.links.fresh(Value::bottom());
                out.unify_at(&root, Side::Top, &c.lhs.attrs, Value::Link(id)).map_err(fail)?;
                out.unify_at(&root, Side::Top, &p.attrs, Value::Link(id)).map_err(fail)?;
            }
        }
    }
    Ok(DerivedTree(out))
}
