use super::{
    metavariable, parse_node_ref, EqClass, MatchResult, Metarule, MetaruleError, NodeRef, PatternKind, PatternNode,
};
use crate::feature::{AtomSet, EqRhs, FeatureEquation, FeaturePath};
use crate::trees::{ElementaryTree, Gorn, InstallError, NodeLabel, TreeKind, TreeNode};
use std::collections::BTreeMap;

/// Feature transfer decided for one match: metavariable bindings and the
/// equations to install on the output, in node-name form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransferPlan {
    pub bindings: BTreeMap<u32, String>,
    pub equations: Vec<FeatureEquation>,
}

type Binds = BTreeMap<u32, String>;

struct Ctx<'a> {
    tree: &'a ElementaryTree,
    typed: &'a BTreeMap<u32, Gorn>,
}

impl Ctx<'_> {
    fn var_name(&self, id: u32) -> Option<String> {
        self.typed.get(&id).and_then(|g| self.tree.node(g)).map(TreeNode::name)
    }

    fn node_matches(&self, pattern: &str, name: &str) -> bool {
        match parse_node_ref(pattern) {
            Some(NodeRef::Var(id)) => self.var_name(id).as_deref() == Some(name),
            Some(NodeRef::Constant(c)) => c == name,
            Some(NodeRef::Anonymous(specs)) => {
                let label = NodeLabel::parse(name);
                specs.iter().any(|s| s.admits(&label))
            }
            None => false,
        }
    }

    fn path_matches(&self, p: &FeaturePath, c: &FeaturePath, binds: &mut Binds) -> bool {
        if p.side.effective() != c.side.effective() || p.attrs.len() != c.attrs.len() {
            return false;
        }
        if !self.node_matches(&p.node, &c.node) {
            return false;
        }
        p.attrs.iter().zip(&c.attrs).all(|(pa, ca)| match metavariable(pa) {
            Some(m) => bind(binds, m, ca),
            None => pa == ca,
        })
    }

    fn eq_matches_oriented(&self, p: &FeatureEquation, c: &FeatureEquation, binds: &mut Binds) -> bool {
        if !self.path_matches(&p.lhs, &c.lhs, binds) {
            return false;
        }
        match (&p.rhs, &c.rhs) {
            (EqRhs::Path(pp), EqRhs::Path(cp)) => self.path_matches(pp, cp, binds),
            (EqRhs::Atoms(pa), EqRhs::Atoms(ca)) => match atom_metavariable(pa) {
                Some(m) => bind(binds, m, &ca.to_string()),
                None => pa == ca,
            },
            _ => false,
        }
    }

    /// Literal match modulo the orientation of path equations. Extends
    /// `binds` only on success.
    fn eq_matches(&self, p: &FeatureEquation, c: &FeatureEquation, binds: &mut Binds) -> bool {
        let mut flips = vec![c.clone()];
        flips.extend(c.flipped());
        for c in flips {
            let mut b = binds.clone();
            if self.eq_matches_oriented(p, &c, &mut b) {
                *binds = b;
                return true;
            }
        }
        false
    }

    fn instantiate_path(&self, p: &FeaturePath, binds: &Binds) -> Option<FeaturePath> {
        let node = match parse_node_ref(&p.node)? {
            NodeRef::Var(id) => self.var_name(id)?,
            NodeRef::Constant(c) => c,
            NodeRef::Anonymous(_) => return None,
        };
        let attrs = p
            .attrs
            .iter()
            .map(|a| match metavariable(a) {
                Some(m) => binds.get(&m).cloned(),
                None => Some(a.clone()),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(FeaturePath { node, side: p.side, attrs })
    }

    /// Concrete form of a pattern equation, if all of its variables are bound.
    fn instantiate(&self, p: &FeatureEquation, binds: &Binds) -> Option<FeatureEquation> {
        let lhs = self.instantiate_path(&p.lhs, binds)?;
        let rhs = match &p.rhs {
            EqRhs::Path(q) => EqRhs::Path(self.instantiate_path(q, binds)?),
            EqRhs::Atoms(a) => match atom_metavariable(a) {
                Some(m) => EqRhs::Atoms(AtomSet::new(binds.get(&m)?.split('/'))?),
                None => EqRhs::Atoms(a.clone()),
            },
        };
        Some(FeatureEquation { lhs, rhs })
    }

    fn resolve(&self, p: &FeatureEquation, name: &str) -> Option<Gorn> {
        for path in [
            Some(&p.lhs),
            match &p.rhs {
                EqRhs::Path(q) => Some(q),
                EqRhs::Atoms(_) => None,
            },
        ]
        .into_iter()
        .flatten()
        {
            if let Some(NodeRef::Var(id)) = parse_node_ref(&path.node) {
                if self.var_name(id).as_deref() == Some(name) {
                    return self.typed.get(&id).cloned();
                }
            }
        }
        self.tree.resolve_name(name).ok()
    }
}

fn bind(binds: &mut Binds, m: u32, value: &str) -> bool {
    match binds.get(&m) {
        Some(v) => v == value,
        None => {
            binds.insert(m, value.to_string());
            true
        }
    }
}

fn atom_metavariable(a: &AtomSet) -> Option<u32> {
    let mut it = a.atoms();
    match (it.next(), it.next()) {
        (Some(x), None) => metavariable(x),
        _ => None,
    }
}

/// Finds bindings under which every required lhs equation holds in the
/// input: either literally among its equations, or, when fully bound, as
/// an entailment of its features. Returns the bindings and the concrete
/// equations that satisfied the `+` requirements.
fn satisfy(
    ctx: &Ctx,
    reqs: &[(EqClass, &FeatureEquation)],
    present: &[FeatureEquation],
    binds: Binds,
) -> Option<(Binds, Vec<FeatureEquation>)> {
    let Some(((class, p), rest)) = reqs.split_first() else {
        return Some((binds, Vec::new()));
    };
    let keep = |mut r: (Binds, Vec<FeatureEquation>), eq: FeatureEquation| {
        if *class == EqClass::RequireRetain {
            r.1.push(eq);
        }
        r
    };
    if let Some(eq) = ctx.instantiate(p, &binds) {
        if ctx.tree.entails_with(&eq, |n| ctx.resolve(p, n)) {
            return satisfy(ctx, rest, present, binds).map(|r| keep(r, eq));
        }
    }
    for c in present {
        let mut b = binds.clone();
        if ctx.eq_matches(p, c, &mut b) {
            if let Some(r) = satisfy(ctx, rest, present, b) {
                return Some(keep(r, c.clone()));
            }
        }
    }
    None
}

/// Keeps the matches whose feature requirements hold and computes, for
/// each, the equations the output receives: the input's equations minus
/// those matched by `-` and unprefixed lhs equations, plus the `+` ones,
/// plus the right-hand side's additions.
pub fn feature_filter(
    matches: Vec<MatchResult>,
    mr: &Metarule,
    inp: &ElementaryTree,
) -> Vec<(MatchResult, TransferPlan)> {
    let present = inp.equations();
    let reqs: Vec<(EqClass, &FeatureEquation)> =
        mr.lhs_eqs.iter().filter(|e| e.class != EqClass::OptionalDrop).map(|e| (e.class, &e.equation)).collect();
    let drops: Vec<&FeatureEquation> =
        mr.lhs_eqs.iter().filter(|e| e.class != EqClass::RequireRetain).map(|e| &e.equation).collect();
    let mut out = Vec::new();
    for m in matches {
        let ctx = Ctx { tree: inp, typed: &m.typed };
        let Some((bindings, retained)) = satisfy(&ctx, &reqs, &present, Binds::new()) else {
            continue;
        };
        let mut equations: Vec<FeatureEquation> = present
            .iter()
            .filter(|c| !drops.iter().any(|p| ctx.eq_matches(p, c, &mut bindings.clone())))
            .cloned()
            .collect();
        equations.extend(retained);
        equations.extend(mr.rhs_eqs.iter().filter_map(|p| ctx.instantiate(p, &bindings)));
        let mut seen = std::collections::BTreeSet::new();
        equations.retain(|e| seen.insert(e.clone()));
        out.push((m, TransferPlan { bindings, equations }));
    }
    out
}

fn copy_bare(n: &TreeNode) -> TreeNode {
    TreeNode {
        top: Default::default(),
        bottom: Default::default(),
        children: n.children.iter().map(copy_bare).collect(),
        ..n.clone()
    }
}

fn build(p: &PatternNode, inp: &ElementaryTree, m: &MatchResult) -> Result<Vec<TreeNode>, MetaruleError> {
    let kids = |p: &PatternNode| -> Result<Vec<TreeNode>, MetaruleError> {
        let mut v = Vec::new();
        for c in &p.children {
            v.extend(build(c, inp, m)?);
        }
        Ok(v)
    };
    match &p.kind {
        PatternKind::Constant(label) => {
            let mut n = TreeNode::new(label.clone(), p.marker, kids(p)?);
            n.terminal = p.terminal;
            Ok(vec![n])
        }
        PatternKind::Typed { id, .. } | PatternKind::Untyped { id } if m.typed.contains_key(id) => {
            let src = m.typed.get(id).and_then(|g| inp.node(g)).ok_or(MetaruleError::Unbound(*id))?;
            let mut n = TreeNode::new(src.label.clone(), p.marker, kids(p)?);
            n.terminal = src.terminal;
            Ok(vec![n])
        }
        PatternKind::Typed { id, .. } => Err(MetaruleError::Unbound(*id)),
        PatternKind::Untyped { id } => {
            let cap = m.untyped.get(id).ok_or(MetaruleError::Unbound(*id))?;
            let mut fillers = Vec::new();
            for c in &p.children {
                fillers.push(build(c, inp, m)?);
            }
            fn copy(g: &Gorn, inp: &ElementaryTree, cuts: &[Gorn], fillers: &[Vec<TreeNode>]) -> Vec<TreeNode> {
                if let Some(k) = cuts.iter().position(|c| c == g) {
                    return fillers[k].clone();
                }
                let Some(n) = inp.node(g) else { return Vec::new() };
                if !cuts.iter().any(|c| g.dominates(c)) {
                    return vec![copy_bare(n)];
                }
                let mut out = TreeNode { children: Vec::new(), ..copy_bare(n) };
                for i in 1..=n.children.len() {
                    out.children.extend(copy(&g.child(i), inp, cuts, fillers));
                }
                vec![out]
            }
            Ok(cap.roots.iter().flat_map(|r| copy(r, inp, &cap.cuts, &fillers)).collect())
        }
    }
}

/// Builds the output tree for one filtered match. Equations naming nodes
/// that no longer exist, or that became ambiguous, are left out.
pub fn instantiate_rhs(
    mr: &Metarule,
    inp: &ElementaryTree,
    m: &MatchResult,
    plan: &TransferPlan,
    change_name: bool,
) -> Result<ElementaryTree, MetaruleError> {
    let mut roots = build(&mr.rhs.root, inp, m)?;
    if roots.len() != 1 {
        return Err(MetaruleError::RootCount(roots.len()));
    }
    let name = if change_name { format!("{}-{}", inp.name, mr.rhs.name) } else { inp.name.clone() };
    let mut t = ElementaryTree::new(name, TreeKind::Initial, roots.remove(0));
    if t.foot().is_some() {
        t.kind = TreeKind::Auxiliary;
    }
    t.comments.push(format!("metarule {}", mr.name));
    t.comments.extend(mr.lhs.comments.iter().cloned());
    t.comments.push(format!("input {}", inp.name));
    t.comments.extend(inp.comments.iter().cloned());
    for eq in &plan.equations {
        match t.install_with(eq, |t, n| t.resolve_name(n)) {
            Ok(()) | Err(InstallError::UnknownNode(_) | InstallError::AmbiguousNode(_)) => {}
            Err(e) => return Err(MetaruleError::Install { equation: eq.to_string(), message: e.to_string() }),
        }
    }
    t.canonicalize();
    Ok(t)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ApplyOptions {
    /// Pass an input through unchanged when the rule does not match it.
    pub copy_unmatched: bool,
    /// Suffix output names with `-` and the right-hand side's name.
    pub change_name: bool,
}

/// One output per match that survives the feature filter.
pub fn apply_metarule(
    mr: &Metarule,
    inp: &ElementaryTree,
    opts: ApplyOptions,
) -> Result<Vec<ElementaryTree>, MetaruleError> {
    let matches = super::match_trees(&mr.lhs.root, inp);
    let kept = feature_filter(matches, mr, inp);
    if kept.is_empty() && opts.copy_unmatched {
        return Ok(vec![inp.clone()]);
    }
    kept.iter().map(|(m, plan)| instantiate_rhs(mr, inp, m, plan, opts.change_name)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// The first rule applied to every tree.
    Single,
    /// Every rule applied to every input tree; outputs concatenated.
    Parallel,
    /// Rules applied in order, each to the previous rule's output.
    Sequential,
    /// As sequential, but every stage's input is also kept.
    Cumulative,
}

impl Mode {
    /// Prefix of output file names.
    pub fn prefix(self) -> &'static str {
        match self {
            Mode::Single => "MR-",
            Mode::Parallel => "MRP-",
            Mode::Sequential => "MRS-",
            Mode::Cumulative => "MRC-",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModeOutput {
    pub trees: Vec<ElementaryTree>,
    pub warnings: Vec<String>,
}

fn apply_all(
    mr: &Metarule,
    trees: &[ElementaryTree],
    opts: ApplyOptions,
) -> Result<Vec<ElementaryTree>, MetaruleError> {
    let mut out = Vec::new();
    for t in trees {
        out.extend(apply_metarule(mr, t, opts)?);
    }
    Ok(out)
}

/// Applies a list of rules to a list of trees. Cumulative stages never copy
/// unmatched trees, since every stage's input is part of the output anyway.
pub fn apply_mode(
    mode: Mode,
    rules: &[Metarule],
    trees: &[ElementaryTree],
    opts: ApplyOptions,
) -> Result<ModeOutput, MetaruleError> {
    let mut warnings = Vec::new();
    let trees = match mode {
        Mode::Single => {
            if rules.len() > 1 {
                warnings.push(format!("single mode uses only the first of {} rules", rules.len()));
            }
            match rules.first() {
                Some(mr) => apply_all(mr, trees, opts)?,
                None => Vec::new(),
            }
        }
        Mode::Parallel => {
            let mut out = Vec::new();
            for mr in rules {
                out.extend(apply_all(mr, trees, opts)?);
            }
            out
        }
        Mode::Sequential => {
            let mut cur = trees.to_vec();
            for mr in rules {
                cur = apply_all(mr, &cur, opts)?;
            }
            cur
        }
        Mode::Cumulative => {
            let stage = ApplyOptions { copy_unmatched: false, ..opts };
            let mut cur = trees.to_vec();
            let mut out = cur.clone();
            for mr in rules {
                cur = apply_all(mr, &cur, stage)?;
                out.extend(cur.iter().cloned());
            }
            out
        }
    };
    Ok(ModeOutput { trees, warnings })
}
