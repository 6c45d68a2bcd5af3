use super::{compose, Attachment, Derivation, DeriveError, Grammar, Operation};
use crate::trees::{ElementaryTree, Gorn, MarkerKind, TreeKind};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recognition {
    /// Derivations whose finalized yield is the sentence.
    Accepted(Vec<Derivation>),
    /// No derivation of any size exists.
    Rejected,
    /// None within the bound, but larger derivations were not explored.
    BoundExhausted,
}

impl Recognition {
    pub fn accepted(&self) -> bool {
        matches!(self, Recognition::Accepted(_))
    }

    pub fn derivations(&self) -> &[Derivation] {
        match self {
            Recognition::Accepted(d) => d,
            _ => &[],
        }
    }
}

fn tree_words(t: &ElementaryTree) -> Vec<String> {
    let mut w: Vec<String> =
        t.frontier().into_iter().filter(|n| n.terminal && !n.is_epsilon()).map(|n| n.label.stem.clone()).collect();
    w.sort();
    w
}

/// Removes `part` from the sorted multiset `whole`.
fn subtract(whole: &[String], part: &[String]) -> Option<Vec<String>> {
    let mut rest = whole.to_vec();
    for w in part {
        let i = rest.iter().position(|x| x == w)?;
        rest.remove(i);
    }
    Some(rest)
}

/// Multisets of trees whose words together are exactly `remaining`.
fn bags(
    items: &[(String, Vec<String>)],
    remaining: &[String],
    limit: usize,
    from: usize,
    acc: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    truncated: &mut bool,
) {
    if remaining.is_empty() {
        out.push(acc.clone());
        return;
    }
    for i in from..items.len() {
        let Some(rest) = subtract(remaining, &items[i].1) else { continue };
        if acc.len() == limit {
            *truncated = true;
            return;
        }
        acc.push(i);
        bags(items, &rest, limit, i, acc, out, truncated);
        acc.pop();
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Subst,
    Adjoin,
}

fn slots(t: &ElementaryTree) -> Vec<(Gorn, Slot)> {
    t.nodes()
        .into_iter()
        .filter(|(_, n)| !n.terminal)
        .filter_map(|(a, n)| match n.marker.kind {
            MarkerKind::Substitution => Some((a, Slot::Subst)),
            MarkerKind::None if !n.marker.na && !n.is_leaf() => Some((a, Slot::Adjoin)),
            _ => None,
        })
        .collect()
}

struct Search<'a> {
    keys: &'a [String],
    trees: &'a BTreeMap<String, ElementaryTree>,
    found: BTreeSet<Derivation>,
}

/// Placement of one tree instance: parent instance, operation, address.
type Placement = Option<(usize, Operation, Gorn)>;

impl Search<'_> {
    fn tree(&self, k: usize) -> &ElementaryTree {
        &self.trees[&self.keys[k]]
    }

    fn build(&self, inst: &[usize], place: &[Placement], i: usize) -> Derivation {
        let mut d = Derivation::leaf(self.keys[inst[i]].clone());
        for (j, p) in place.iter().enumerate() {
            if let Some((parent, op, address)) = p {
                if *parent == i {
                    d.children.push(Attachment {
                        op: *op,
                        address: address.clone(),
                        child: self.build(inst, place, j),
                    });
                }
            }
        }
        d.children.sort();
        d
    }

    /// Walks the queue of open slots in order. Substitution slots must be
    /// filled; adjunction slots may be.
    #[allow(clippy::too_many_arguments)]
    fn fill(
        &mut self,
        queue: &mut Vec<(usize, Gorn, Slot)>,
        next: usize,
        inst: &mut Vec<usize>,
        place: &mut Vec<Placement>,
        left: &mut BTreeMap<usize, usize>,
        sentence: &[String],
    ) {
        let remaining: usize = left.values().sum();
        let open_subst = queue[next..].iter().filter(|s| s.2 == Slot::Subst).count();
        if open_subst > remaining {
            return;
        }
        let Some((owner, addr, slot)) = queue.get(next).cloned() else {
            if remaining == 0 {
                let d = self.build(inst, place, 0);
                if let Ok(out) = compose(&d, self.trees) {
                    if out.0.root.label.stem == "S" && out.words() == sentence {
                        self.found.insert(d);
                    }
                }
            }
            return;
        };
        if slot == Slot::Adjoin {
            self.fill(queue, next + 1, inst, place, left, sentence);
        }
        let site = self.tree(inst[owner]).node(&addr).unwrap().label.stem.clone();
        let candidates: Vec<usize> = left.iter().filter(|(_, &n)| n > 0).map(|(&k, _)| k).collect();
        for k in candidates {
            let t = self.tree(k);
            let (kind, op) = match slot {
                Slot::Subst => (TreeKind::Initial, Operation::Substitution),
                Slot::Adjoin => (TreeKind::Auxiliary, Operation::Adjunction),
            };
            if t.kind != kind || t.root.label.stem != site {
                continue;
            }
            let added: Vec<(usize, Gorn, Slot)> = slots(t).into_iter().map(|(a, s)| (inst.len(), a, s)).collect();
            *left.get_mut(&k).unwrap() -= 1;
            inst.push(k);
            place.push(Some((owner, op, addr.clone())));
            let len = queue.len();
            queue.extend(added);
            self.fill(queue, next + 1, inst, place, left, sentence);
            queue.truncate(len);
            place.pop();
            inst.pop();
            *left.get_mut(&k).unwrap() += 1;
        }
    }
}

/// Enumerates every derivation with at most `max_ops` operations whose
/// finalized yield is `sentence` and whose root is an `S`. Only trees
/// whose words can all be found in the sentence take part, each tree
/// contributing its words, so the search is exhaustive within the bound.
/// Trees without words are never used.
pub fn recognize(sentence: &[&str], g: &Grammar, max_ops: usize) -> Result<Recognition, DeriveError> {
    if max_ops == 0 {
        return Err(DeriveError::BadBound);
    }
    let words: Vec<String> = sentence.iter().map(|w| w.to_string()).collect();
    if words.is_empty() {
        return Ok(Recognition::Rejected);
    }
    let mut sorted = words.clone();
    sorted.sort();
    let items: Vec<(String, Vec<String>)> = g
        .trees
        .iter()
        .map(|(k, t)| (k.clone(), tree_words(t)))
        .filter(|(_, w)| !w.is_empty() && subtract(&sorted, w).is_some())
        .collect();
    let mut found_bags = Vec::new();
    let mut truncated = false;
    bags(&items, &sorted, max_ops + 1, 0, &mut Vec::new(), &mut found_bags, &mut truncated);
    let keys: Vec<String> = items.iter().map(|(k, _)| k.clone()).collect();
    let mut search = Search { keys: &keys, trees: &g.trees, found: BTreeSet::new() };
    for bag in found_bags {
        let mut left: BTreeMap<usize, usize> = BTreeMap::new();
        for &i in &bag {
            *left.entry(i).or_default() += 1;
        }
        let roots: Vec<usize> = left.keys().copied().collect();
        for r in roots {
            let t = search.tree(r);
            if t.kind != TreeKind::Initial || t.root.label.stem != "S" {
                continue;
            }
            let mut queue: Vec<(usize, Gorn, Slot)> = slots(t).into_iter().map(|(a, s)| (0, a, s)).collect();
            *left.get_mut(&r).unwrap() -= 1;
            search.fill(&mut queue, 0, &mut vec![r], &mut vec![None], &mut left, &words);
            *left.get_mut(&r).unwrap() += 1;
        }
    }
    Ok(if !search.found.is_empty() {
        Recognition::Accepted(search.found.into_iter().collect())
    } else if truncated {
        Recognition::BoundExhausted
    } else {
        Recognition::Rejected
    })
}
