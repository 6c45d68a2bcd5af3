use super::{PatternKind, PatternNode};
use crate::trees::{ElementaryTree, Gorn, TreeNode};
use std::collections::{BTreeMap, BTreeSet};

/// Material bound by an untyped variable: the subtrees rooted at `roots`
/// with the subtrees at `cuts` removed. Cuts are listed left to right and
/// correspond one to one with the variable's pattern children.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Capture {
    pub roots: Vec<Gorn>,
    pub cuts: Vec<Gorn>,
}

/// One way of matching a left-hand side against an input tree.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MatchResult {
    pub typed: BTreeMap<u32, Gorn>,
    pub untyped: BTreeMap<u32, Capture>,
}

impl MatchResult {
    fn merge(&self, other: &MatchResult) -> Option<MatchResult> {
        let mut out = self.clone();
        for (id, g) in &other.typed {
            match out.typed.get(id) {
                Some(h) if h != g => return None,
                _ => {
                    out.typed.insert(*id, g.clone());
                }
            }
        }
        for (id, c) in &other.untyped {
            if out.untyped.insert(*id, c.clone()).is_some() {
                return None;
            }
        }
        Some(out)
    }
}

/// Whether a constant or typed pattern node may stand for `n`.
fn node_fits(p: &PatternNode, n: &TreeNode) -> bool {
    match &p.kind {
        PatternKind::Constant(label) => p.terminal == n.terminal && *label == n.label && p.marker == n.marker,
        PatternKind::Typed { specs, .. } => {
            !n.terminal && specs.iter().any(|s| s.admits(&n.label)) && p.marker.contained_in(&n.marker)
        }
        PatternKind::Untyped { .. } => true,
    }
}

/// Splits `inp` into consecutive runs, one per pattern node: constants and
/// typed variables take exactly one node they fit, untyped variables take
/// any number. Each mapping lists the `(start, end)` run of every pattern
/// node.
pub fn valid_mappings(lhs: &[&PatternNode], inp: &[Gorn], tree: &ElementaryTree) -> Vec<Vec<(usize, usize)>> {
    fn go(
        lhs: &[&PatternNode],
        inp: &[Gorn],
        tree: &ElementaryTree,
        at: usize,
        acc: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let Some((p, rest)) = lhs.split_first() else {
            if at == inp.len() {
                out.push(acc.clone());
            }
            return;
        };
        let ends: Vec<usize> = match p.kind {
            PatternKind::Untyped { .. } => (at..=inp.len()).collect(),
            _ => {
                let fits = inp.get(at).and_then(|g| tree.node(g)).is_some_and(|n| node_fits(p, n));
                if fits {
                    vec![at + 1]
                } else {
                    vec![]
                }
            }
        };
        for end in ends {
            acc.push((at, end));
            go(rest, inp, tree, end, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(lhs, inp, tree, 0, &mut Vec::new(), &mut out);
    out
}

fn subtree_nodes(tree: &ElementaryTree, root: &Gorn, out: &mut Vec<Gorn>) {
    out.push(root.clone());
    if let Some(n) = tree.node(root) {
        for i in 1..=n.children.len() {
            subtree_nodes(tree, &root.child(i), out);
        }
    }
}

/// Lists of `s` nodes from the subtrees at `roots`, each strictly to the
/// right of the previous one.
fn descendant_lists(tree: &ElementaryTree, roots: &[Gorn], s: usize) -> Vec<Vec<Gorn>> {
    let mut pool = Vec::new();
    for r in roots {
        subtree_nodes(tree, r, &mut pool);
    }
    fn go(pool: &[Gorn], s: usize, from: usize, acc: &mut Vec<Gorn>, out: &mut Vec<Vec<Gorn>>) {
        if acc.len() == s {
            out.push(acc.clone());
            return;
        }
        for i in from..pool.len() {
            if acc.last().is_none_or(|l| l.precedes(&pool[i])) {
                acc.push(pool[i].clone());
                go(pool, s, i + 1, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&pool, s, 0, &mut Vec::new(), &mut out);
    out
}

fn children_of(tree: &ElementaryTree, g: &Gorn) -> Vec<Gorn> {
    let n = tree.node(g).map_or(0, |n| n.children.len());
    (1..=n).map(|i| g.child(i)).collect()
}

fn match_list(lhs: &[&PatternNode], inp: &[Gorn], tree: &ElementaryTree) -> BTreeSet<MatchResult> {
    let mut out = BTreeSet::new();
    for mapping in valid_mappings(lhs, inp, tree) {
        let mut partial = vec![MatchResult::default()];
        for (p, &(start, end)) in lhs.iter().zip(&mapping) {
            let children: Vec<&PatternNode> = p.children.iter().collect();
            let mut options: Vec<MatchResult> = Vec::new();
            match p.kind {
                PatternKind::Untyped { id } => {
                    let roots = inp[start..end].to_vec();
                    for cuts in descendant_lists(tree, &roots, children.len()) {
                        for mut m in match_list(&children, &cuts, tree) {
                            m.untyped.insert(id, Capture { roots: roots.clone(), cuts: cuts.clone() });
                            options.push(m);
                        }
                    }
                }
                _ => {
                    let g = &inp[start];
                    for mut m in match_list(&children, &children_of(tree, g), tree) {
                        if let PatternKind::Typed { id, .. } = p.kind {
                            match m.typed.get(&id) {
                                Some(h) if h != g => continue,
                                _ => {
                                    m.typed.insert(id, g.clone());
                                }
                            }
                        }
                        options.push(m);
                    }
                }
            }
            partial = partial.iter().flat_map(|a| options.iter().filter_map(move |b| a.merge(b))).collect();
            if partial.is_empty() {
                break;
            }
        }
        out.extend(partial);
    }
    out
}

/// All structural matches of the pattern rooted at `lhs` against the whole
/// of `tree`, in a deterministic order.
pub fn match_trees(lhs: &PatternNode, tree: &ElementaryTree) -> Vec<MatchResult> {
    match_list(&[lhs], &[Gorn::root()], tree).into_iter().collect()
}
