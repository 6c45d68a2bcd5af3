use super::{DescriptionError, NodeCat, NodeVar, TreeDescription};
use crate::trees::{validate_elementary, ElementaryTree, Gorn, Marker, MarkerKind, Severity, TreeKind, TreeNode};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Largest model, in nodes.
    pub max_nodes: usize,
    /// Satisfying models allowed before giving up.
    pub max_models: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { max_nodes: 24, max_models: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Invalid(#[from] DescriptionError),
    #[error("more than {limit} models")]
    Overflow { limit: usize },
    #[error("solver bounds must be positive")]
    BadConfig,
}

/// Name given to every solved tree; callers rename.
pub const MODEL_NAME: &str = "model";

struct Problem<'a> {
    d: &'a TreeDescription,
    vars: Vec<&'a str>,
    specs: Vec<&'a NodeVar>,
    parent: Vec<(usize, usize)>,
    dom: Vec<(usize, usize)>,
    prec: Vec<(usize, usize)>,
    /// Pairs of variables that can never denote the same node.
    apart: Vec<Vec<bool>>,
    cfg: SolverConfig,
}

struct Model {
    partition: Vec<usize>,
    tree: ElementaryTree,
}

impl<'a> Problem<'a> {
    fn new(d: &'a TreeDescription, cfg: SolverConfig) -> Self {
        let vars: Vec<&str> = d.nodes.keys().map(String::as_str).collect();
        let specs = d.nodes.values().collect();
        let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let pairs = |s: &'a BTreeSet<(String, String)>| -> Vec<(usize, usize)> {
            s.iter().map(|(a, b)| (index[a.as_str()], index[b.as_str()])).collect()
        };
        let parent = pairs(&d.parent);
        let dom = pairs(&d.dom);
        let prec = pairs(&d.prec);
        let n = vars.len();
        let mut apart = vec![vec![false; n]; n];
        for &(a, b) in parent.iter().chain(&prec) {
            apart[a][b] = true;
            apart[b][a] = true;
        }
        Problem { d, vars, specs, parent, dom, prec, apart, cfg }
    }

    fn partitions(
        &self,
        i: usize,
        assign: &mut Vec<usize>,
        classes: &mut Vec<NodeVar>,
        models: &mut Vec<Model>,
    ) -> Result<(), SolveError> {
        if i == self.vars.len() {
            return self.place(assign, classes, models);
        }
        for c in 0..classes.len() {
            if (0..i).any(|j| assign[j] == c && self.apart[i][j]) {
                continue;
            }
            let Some(merged) = classes[c].merge(self.specs[i]) else { continue };
            let saved = std::mem::replace(&mut classes[c], merged);
            assign.push(c);
            self.partitions(i + 1, assign, classes, models)?;
            assign.pop();
            classes[c] = saved;
        }
        if classes.len() < self.cfg.max_nodes {
            classes.push(self.specs[i].clone());
            assign.push(classes.len() - 1);
            self.partitions(i + 1, assign, classes, models)?;
            assign.pop();
            classes.pop();
        }
        Ok(())
    }

    /// Chooses a parent for every class of one partition.
    fn place(&self, assign: &[usize], classes: &[NodeVar], models: &mut Vec<Model>) -> Result<(), SolveError> {
        let k = classes.len();
        if classes.iter().any(|c| c.cat.is_none()) {
            return Ok(());
        }
        let leafy: Vec<bool> = classes
            .iter()
            .map(|c| {
                c.cat.as_ref().is_some_and(NodeCat::is_word) || c.marker.is_some_and(|m| m.kind != MarkerKind::None)
            })
            .collect();
        let mut fixed: Vec<Option<usize>> = vec![None; k];
        for &(a, b) in &self.parent {
            let (pa, pb) = (assign[a], assign[b]);
            if leafy[pa] || fixed[pb].is_some_and(|x| x != pa) {
                return Ok(());
            }
            fixed[pb] = Some(pa);
        }
        let mut may_be_root: Vec<bool> = fixed.iter().map(Option::is_none).collect();
        for &(a, b) in &self.dom {
            if assign[a] != assign[b] {
                may_be_root[assign[b]] = false;
            }
        }
        let mut parents = fixed.clone();
        self.choose_parents(0, assign, classes, &leafy, &fixed, &may_be_root, &mut parents, false, models)
    }

    #[allow(clippy::too_many_arguments)]
    fn choose_parents(
        &self,
        c: usize,
        assign: &[usize],
        classes: &[NodeVar],
        leafy: &[bool],
        fixed: &[Option<usize>],
        may_be_root: &[bool],
        parents: &mut Vec<Option<usize>>,
        have_root: bool,
        models: &mut Vec<Model>,
    ) -> Result<(), SolveError> {
        let k = classes.len();
        if c == k {
            if !have_root || !acyclic(parents) {
                return Ok(());
            }
            let up = |mut x: usize, target: usize| loop {
                if x == target {
                    return true;
                }
                match parents[x] {
                    Some(p) => x = p,
                    None => return false,
                }
            };
            if self.dom.iter().any(|&(a, b)| !up(assign[b], assign[a])) {
                return Ok(());
            }
            return self.orderings(assign, classes, parents, models);
        }
        if fixed[c].is_some() {
            return self.choose_parents(c + 1, assign, classes, leafy, fixed, may_be_root, parents, have_root, models);
        }
        if may_be_root[c] && !have_root {
            parents[c] = None;
            self.choose_parents(c + 1, assign, classes, leafy, fixed, may_be_root, parents, true, models)?;
        }
        for p in 0..k {
            if p == c || leafy[p] {
                continue;
            }
            parents[c] = Some(p);
            self.choose_parents(c + 1, assign, classes, leafy, fixed, may_be_root, parents, have_root, models)?;
        }
        parents[c] = None;
        Ok(())
    }

    /// Tries every sibling order consistent with precedence.
    fn orderings(
        &self,
        assign: &[usize],
        classes: &[NodeVar],
        parents: &[Option<usize>],
        models: &mut Vec<Model>,
    ) -> Result<(), SolveError> {
        let k = classes.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut root = 0;
        for (c, p) in parents.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(c),
                None => root = c,
            }
        }
        let groups: Vec<usize> = (0..k).filter(|&c| children[c].len() > 1).collect();
        let perms: Vec<Vec<Vec<usize>>> = groups.iter().map(|&g| permutations(&children[g])).collect();
        let mut choice = vec![0usize; groups.len()];
        loop {
            let mut ordered = children.clone();
            for (gi, &g) in groups.iter().enumerate() {
                ordered[g] = perms[gi][choice[gi]].clone();
            }
            if let Some(tree) = self.build(assign, classes, &ordered, root) {
                models.push(Model { partition: assign.to_vec(), tree });
                if models.len() > self.cfg.max_models {
                    return Err(SolveError::Overflow { limit: self.cfg.max_models });
                }
            }
            // Odometer over the permutation choices.
            let mut i = 0;
            loop {
                if i == groups.len() {
                    return Ok(());
                }
                choice[i] += 1;
                if choice[i] < perms[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    fn build(
        &self,
        assign: &[usize],
        classes: &[NodeVar],
        children: &[Vec<usize>],
        root: usize,
    ) -> Option<ElementaryTree> {
        let mut addr: Vec<Gorn> = vec![Gorn::root(); classes.len()];
        fn walk(c: usize, a: Gorn, children: &[Vec<usize>], addr: &mut [Gorn]) {
            for (i, &k) in children[c].iter().enumerate() {
                walk(k, a.child(i + 1), children, addr);
            }
            addr[c] = a;
        }
        walk(root, Gorn::root(), children, &mut addr);
        let at = |v: usize| &addr[assign[v]];
        if self.prec.iter().any(|&(a, b)| !at(a).precedes(at(b))) {
            return None;
        }
        fn node(c: usize, classes: &[NodeVar], children: &[Vec<usize>]) -> TreeNode {
            let kids: Vec<TreeNode> = children[c].iter().map(|&k| node(k, classes, children)).collect();
            match classes[c].cat.as_ref().expect("categorized") {
                NodeCat::Word(w) => TreeNode::word(w),
                NodeCat::Label(l) => {
                    let marker = match classes[c].marker {
                        Some(m) => m,
                        None if kids.is_empty() => Marker::SUBST,
                        None => Marker::NONE,
                    };
                    TreeNode::new(l.clone(), marker, kids)
                }
            }
        }
        let root_node = node(root, classes, children);
        let kind = if classes.iter().any(|c| c.marker.is_some_and(|m| m.kind == MarkerKind::Foot)) {
            TreeKind::Auxiliary
        } else {
            TreeKind::Initial
        };
        let mut t = ElementaryTree::new(MODEL_NAME, kind, root_node);
        if validate_elementary(&t).iter().any(|v| v.severity == Severity::Error) {
            return None;
        }
        let index: BTreeMap<&str, usize> = self.vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        for eq in &self.d.equations {
            let r = t.install_with(eq, |_, name| Ok(addr[assign[index[name]]].clone()));
            if r.is_err() {
                return None;
            }
        }
        t.canonicalize();
        Some(t)
    }
}

fn acyclic(parents: &[Option<usize>]) -> bool {
    (0..parents.len()).all(|start| {
        let mut x = start;
        for _ in 0..=parents.len() {
            match parents[x] {
                Some(p) => x = p,
                None => return true,
            }
        }
        false
    })
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// `fine` puts together only variables that `coarse` also puts together.
fn refines(fine: &[usize], coarse: &[usize]) -> bool {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    fine.iter().zip(coarse).all(|(f, c)| *map.entry(*f).or_insert(*c) == *c)
}

/// Minimal trees satisfying `d`, sorted by canonical text.
///
/// Every model node is denoted by at least one variable. Variables may
/// denote the same node when their categories and markers agree and no
/// parent or precedence constraint separates them. A model is dropped when
/// a satisfying model exists that identifies strictly more variables.
/// Non-terminal leaves without an explicit marker become substitution
/// nodes. Sibling groups are tried in every order.
pub fn solve(d: &TreeDescription, cfg: SolverConfig) -> Result<Vec<ElementaryTree>, SolveError> {
    if cfg.max_nodes == 0 || cfg.max_models == 0 {
        return Err(SolveError::BadConfig);
    }
    d.check()?;
    if d.is_empty() {
        return Ok(Vec::new());
    }
    let p = Problem::new(d, cfg);
    let mut models = Vec::new();
    p.partitions(0, &mut Vec::new(), &mut Vec::new(), &mut models)?;

    let partitions: BTreeSet<&Vec<usize>> = models.iter().map(|m| &m.partition).collect();
    let minimal: BTreeSet<&Vec<usize>> =
        partitions.iter().filter(|p| !partitions.iter().any(|q| q != *p && refines(p, q))).copied().collect();
    let mut out: BTreeMap<String, ElementaryTree> = BTreeMap::new();
    for m in &models {
        if minimal.contains(&m.partition) {
            out.entry(m.tree.canonical_text()).or_insert_with(|| m.tree.clone());
        }
    }
    Ok(out.into_values().collect())
}

fn var_fits(var: &NodeVar, n: &TreeNode) -> bool {
    let cat_ok = match &var.cat {
        None => true,
        Some(NodeCat::Word(w)) => n.terminal && n.label.stem == *w,
        Some(NodeCat::Label(l)) => !n.terminal && n.label == *l,
    };
    cat_ok && var.marker.is_none_or(|m| n.marker == m)
}

/// Searches for an assignment of the description's variables to nodes of
/// `t` that respects categories, markers, parent, dominance, precedence
/// and equations. Several variables may map to one node.
pub fn satisfies(t: &ElementaryTree, d: &TreeDescription) -> Option<BTreeMap<String, Gorn>> {
    let vars: Vec<(&String, &NodeVar)> = d.nodes.iter().collect();
    let nodes = t.nodes();
    let candidates: Vec<Vec<Gorn>> = vars
        .iter()
        .map(|(_, v)| nodes.iter().filter(|(_, n)| var_fits(v, n)).map(|(a, _)| a.clone()).collect())
        .collect();
    let mut map: BTreeMap<String, Gorn> = BTreeMap::new();
    fn holds(d: &TreeDescription, map: &BTreeMap<String, Gorn>, var: &str) -> bool {
        let rel = |set: &BTreeSet<(String, String)>, test: &dyn Fn(&Gorn, &Gorn) -> bool| {
            set.iter().filter(|(a, b)| a == var || b == var).all(|(a, b)| match (map.get(a), map.get(b)) {
                (Some(x), Some(y)) => test(x, y),
                _ => true,
            })
        };
        rel(&d.parent, &|x, y| y.0.len() == x.0.len() + 1 && x.dominates(y))
            && rel(&d.dom, &|x, y| x.dominates(y))
            && rel(&d.prec, &|x, y| x.precedes(y))
    }
    fn search(
        i: usize,
        vars: &[(&String, &NodeVar)],
        candidates: &[Vec<Gorn>],
        map: &mut BTreeMap<String, Gorn>,
        t: &ElementaryTree,
        d: &TreeDescription,
    ) -> bool {
        if i == vars.len() {
            return d.equations.iter().all(|eq| t.entails_with(eq, |name| map.get(name).cloned()));
        }
        let name = vars[i].0;
        for a in &candidates[i] {
            map.insert(name.clone(), a.clone());
            if holds(d, map, name) && search(i + 1, vars, candidates, map, t, d) {
                return true;
            }
        }
        map.remove(name);
        false
    }
    search(0, &vars, &candidates, &mut map, t, d).then_some(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptions::{conjoin, parse_description};

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn texts(ts: &[ElementaryTree]) -> Vec<String> {
        ts.iter().map(ElementaryTree::structural_text).collect()
    }

    #[test]
    fn fully_specified_description_has_one_model() {
        let d = parse_description("node S S\nnode NP NP\nnode VP VP\nparent S NP\nparent S VP\nprec NP VP\n").unwrap();
        let ts = solve(&d, cfg()).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].size(), 3);
        let names: Vec<String> = ts[0].frontier().iter().map(|n| n.name()).collect();
        assert_eq!(names, vec!["NP", "VP"]);
    }

    #[test]
    fn unordered_siblings_give_both_orders() {
        let d = parse_description("node S S\nnode NP NP\nnode VP VP\nparent S NP\nparent S VP\n").unwrap();
        assert_eq!(solve(&d, cfg()).unwrap().len(), 2);
    }

    #[test]
    fn empty_description_has_no_models() {
        assert!(solve(&TreeDescription::new(), cfg()).unwrap().is_empty());
        let one = crate::trees::parse_trees("tree t initial\nS - 1\n  \"x\" - 0\nend\n").unwrap();
        assert_eq!(satisfies(&one[0], &TreeDescription::new()), Some(BTreeMap::new()));
    }

    #[test]
    fn uncategorized_variable_merges_into_a_declared_node() {
        let d = parse_description("node S S\nnode NP NP\nnode X\nnode W \"w\"\nparent S NP\nparent X W\n").unwrap();
        let ts = solve(&d, cfg()).unwrap();
        assert!(!ts.is_empty());
        assert_eq!(ts.len(), 3);
        for t in &ts {
            assert_eq!(t.size(), 3, "{}", t.canonical_text());
        }
    }

    #[test]
    fn equations_are_installed_at_the_model_nodes() {
        let d = parse_description(
            "node S S_r\nnode A NP_0\nnode V V anchor\nparent S A\nparent S V\nprec A V\n\
             eq A.t:<case> = nom\neq S.b:<mode> = V.t:<mode>\n",
        )
        .unwrap();
        let ts = solve(&d, cfg()).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(
            ts[0].canonical_text(),
            "tree model initial\nS_r - 2 [] [mode:#1]\n  NP_0 subst 0 [case:nom] []\n  V anchor 0 [mode:#1] []\nlink #1 []\nend\n"
        );
        assert!(satisfies(&ts[0], &d).is_some());
    }

    #[test]
    fn contradictory_equations_have_no_model() {
        let d = parse_description("node S S\nnode A NP subst\nparent S A\neq A.t:<c> = x\neq A.t:<c> = y\n").unwrap();
        assert!(solve(&d, cfg()).unwrap().is_empty());
    }

    #[test]
    fn overflow_is_reported() {
        let d = parse_description(
            "node S S\nnode A A\nnode B B\nnode C C\nnode D D\nparent S A\nparent S B\nparent S C\nparent S D\n",
        )
        .unwrap();
        let e = solve(&d, SolverConfig { max_models: 5, ..cfg() }).unwrap_err();
        assert_eq!(e, SolveError::Overflow { limit: 5 });
        assert_eq!(solve(&d, cfg()).unwrap().len(), 24);
    }

    const SUBJ: &str = "node Root S_r\nnode Arg0 NP_0\nnode VP VP\nparent Root Arg0\nparent Root VP\nprec Arg0 VP\n";
    const OBJ: &str =
        "node VP VP\nnode Anchor V anchor\nnode Arg1 NP_1\nparent VP Anchor\nparent VP Arg1\nprec Anchor Arg1\n";
    const WH1: &str = "node Sq S_q\nnode NPw NP_w\nnode Root S_r\nnode Arg1 NP_1\nnode Trace ε\n\
                       parent Sq NPw\nparent Sq Root\nprec NPw Root\nparent Arg1 Trace\n";

    #[test]
    fn conjunction_order_does_not_matter() {
        let a = parse_description(SUBJ).unwrap();
        let b = parse_description(OBJ).unwrap();
        let ab = solve(&conjoin(&a, &b).unwrap(), cfg()).unwrap();
        let ba = solve(&conjoin(&b, &a).unwrap(), cfg()).unwrap();
        assert_eq!(texts(&ab), texts(&ba));
        assert_eq!(ab.len(), 1);
    }

    #[test]
    fn object_extraction_shape() {
        let d = conjoin(
            &conjoin(&parse_description(SUBJ).unwrap(), &parse_description(OBJ).unwrap()).unwrap(),
            &parse_description(WH1).unwrap(),
        )
        .unwrap();
        let ts = solve(&d, cfg()).unwrap();
        assert_eq!(ts.len(), 1);
        let t = &ts[0];
        assert_eq!(t.root.name(), "S_q");
        let kids: Vec<String> = t.root.children.iter().map(|c| c.name()).collect();
        assert_eq!(kids, vec!["NP_w", "S_r"]);
        let trace = t.node(&Gorn(vec![2, 2, 2])).unwrap();
        assert_eq!(trace.name(), "NP_1");
        assert!(trace.children[0].is_epsilon());
        assert!(satisfies(t, &d).is_some());
    }

    #[test]
    fn declarative_tree_fails_extraction_block() {
        let decl = conjoin(&parse_description(SUBJ).unwrap(), &parse_description(OBJ).unwrap()).unwrap();
        let t = &solve(&decl, cfg()).unwrap()[0];
        assert!(satisfies(t, &decl).is_some());
        assert!(satisfies(t, &parse_description(WH1).unwrap()).is_none());
    }

    #[test]
    fn extra_constraints_never_add_models() {
        let loose =
            parse_description("node S S\nnode A A\nnode B B\nnode C C\nparent S A\ndom S B\ndom S C\n").unwrap();
        let tight = loose.clone().with_prec("A", "B").with_parent("A", "C");
        let l: BTreeSet<String> = texts(&solve(&loose, cfg()).unwrap()).into_iter().collect();
        let t: BTreeSet<String> = texts(&solve(&tight, cfg()).unwrap()).into_iter().collect();
        assert!(t.is_subset(&l), "{t:?} vs {l:?}");
        assert!(!t.is_empty());
    }
}
