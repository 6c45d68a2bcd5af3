//! Fixtures and brute-force reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use treegen::descriptions::{conjoin, NodeCat, TreeDescription};
use treegen::feature::{AtomSet, FeatureStructure, Value};
use treegen::lexorg::{blocks_for_frame, lrr_apply, BlockLibrary, Lrr, SubcatFrame, Target};
use treegen::metarules::{Capture, MatchResult, PatternKind, PatternNode};
use treegen::source::{parse_grammar_source, GrammarSource};
use treegen::trees::{
    validate_elementary, ElementaryTree, Gorn, Marker, MarkerKind, NodeLabel, Severity, TreeKind, TreeNode,
};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn load_grammar(name: &str) -> GrammarSource {
    match parse_grammar_source(&[fixture(name)]) {
        Ok(src) => src,
        Err(diags) => panic!("{}", diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")),
    }
}

// ---------------------------------------------------------------------
// Feature structures

const ATTRS: [&str; 6] = ["agr", "case", "mode", "num", "pers", "wh"];
const ATOMS: [&str; 3] = ["x", "y", "z"];

fn random_atoms<R: Rng>(rng: &mut R) -> Value {
    let mut chosen: Vec<&str> = vec![ATOMS[rng.gen_range(0..ATOMS.len())]];
    if rng.gen_bool(0.25) {
        chosen.push(ATOMS[rng.gen_range(0..ATOMS.len())]);
    }
    Value::Atoms(AtomSet::new(chosen).unwrap())
}

/// A link-free structure of at most `depth` levels and six attributes per
/// level.
pub fn random_fs<R: Rng>(rng: &mut R, depth: usize) -> FeatureStructure {
    let mut fs = FeatureStructure::new();
    for _ in 0..rng.gen_range(0..=4) {
        let attr = ATTRS[rng.gen_range(0..ATTRS.len())];
        let v = if depth > 1 && rng.gen_bool(0.35) {
            Value::Struct(random_fs(rng, depth - 1))
        } else if rng.gen_bool(0.1) {
            Value::bottom()
        } else {
            random_atoms(rng)
        };
        fs.insert(attr, v);
    }
    fs
}

/// A structure that agrees with `fs` more often than an unrelated one:
/// some attributes are dropped, widened or added.
pub fn perturb<R: Rng>(rng: &mut R, fs: &FeatureStructure, depth: usize) -> FeatureStructure {
    let mut out = FeatureStructure::new();
    for (k, v) in fs.iter() {
        if rng.gen_bool(0.3) {
            continue;
        }
        let v = match v {
            Value::Struct(inner) => Value::Struct(perturb(rng, inner, depth.saturating_sub(1))),
            Value::Atoms(a) if rng.gen_bool(0.3) => {
                let wider: Vec<&str> = a.atoms().chain([ATOMS[rng.gen_range(0..ATOMS.len())]]).collect();
                Value::Atoms(AtomSet::new(wider).unwrap())
            }
            v => v.clone(),
        };
        out.insert(k, v);
    }
    if rng.gen_bool(0.3) {
        let attr = ATTRS[rng.gen_range(0..ATTRS.len())];
        if out.get(attr).is_none() {
            out.insert(attr, random_atoms(rng));
        }
    }
    out
}

pub fn random_pair<R: Rng>(rng: &mut R) -> (FeatureStructure, FeatureStructure) {
    let a = random_fs(rng, 4);
    let b = if rng.gen_bool(0.5) { perturb(rng, &a, 4) } else { random_fs(rng, 4) };
    (a, b)
}

fn is_bottom(v: &Value) -> bool {
    matches!(v, Value::Struct(fs) if fs.is_empty())
}

fn reference_value(a: &Value, b: &Value) -> Option<Value> {
    if is_bottom(a) {
        return Some(b.clone());
    }
    if is_bottom(b) {
        return Some(a.clone());
    }
    match (a, b) {
        (Value::Atoms(x), Value::Atoms(y)) => {
            let ys: BTreeSet<&str> = y.atoms().collect();
            AtomSet::new(x.atoms().filter(|s| ys.contains(s))).map(Value::Atoms)
        }
        (Value::Struct(x), Value::Struct(y)) => reference_unify(x, y).map(Value::Struct),
        _ => None,
    }
}

/// Unification of link-free structures by direct recursion over the
/// union of attributes.
pub fn reference_unify(a: &FeatureStructure, b: &FeatureStructure) -> Option<FeatureStructure> {
    let mut out = FeatureStructure::new();
    let keys: BTreeSet<&str> = a.iter().chain(b.iter()).map(|(k, _)| k).collect();
    for k in keys {
        let v = match (a.get(k), b.get(k)) {
            (Some(x), Some(y)) => reference_value(x, y)?,
            (Some(x), None) | (None, Some(x)) => x.clone(),
            (None, None) => unreachable!(),
        };
        out.insert(k, v);
    }
    Some(out)
}

// ---------------------------------------------------------------------
// Frames and minimal models

/// Every frame reached by applying some ordered selection of distinct
/// rules, one after the other, starting from `base`.
pub fn oracle_frames(base: &SubcatFrame, rules: &[Lrr]) -> Vec<SubcatFrame> {
    fn sequences(n: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(acc.clone());
        for i in 0..n {
            if !acc.contains(&i) {
                acc.push(i);
                sequences(n, acc, out);
                acc.pop();
            }
        }
    }
    let mut seqs = Vec::new();
    sequences(rules.len(), &mut Vec::new(), &mut seqs);
    let mut frames: Vec<SubcatFrame> = Vec::new();
    for seq in seqs {
        let mut f = Some(base.clone());
        for &i in &seq {
            f = f.and_then(|f| lrr_apply(&rules[i], &f).unwrap());
        }
        if let Some(f) = f {
            if !frames.contains(&f) {
                frames.push(f);
            }
        }
    }
    frames
}

/// Ordered tree shapes as child lists over preorder-numbered nodes.
fn shapes(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn forests(m: usize) -> Vec<Vec<Vec<Vec<usize>>>> {
        if m == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for first in 1..=m {
            for t in shapes(first) {
                for rest in forests(m - first) {
                    let mut f = vec![t.clone()];
                    f.extend(rest);
                    out.push(f);
                }
            }
        }
        out
    }
    let mut out = Vec::new();
    for forest in forests(n - 1) {
        let mut children = vec![Vec::new()];
        for sub in forest {
            let offset = children.len();
            children[0].push(offset);
            children.extend(sub.into_iter().map(|c| c.into_iter().map(|x| x + offset).collect::<Vec<_>>()));
        }
        out.push(children);
    }
    out
}

fn paths(children: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut p = vec![Vec::new(); children.len()];
    for (i, cs) in children.iter().enumerate() {
        for (k, &c) in cs.iter().enumerate() {
            let mut q = p[i].clone();
            q.push(k + 1);
            p[c] = q;
        }
    }
    p
}

fn ancestor_or_self(a: &[usize], b: &[usize]) -> bool {
    b.starts_with(a)
}

fn left_of(a: &[usize], b: &[usize]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x < y;
        }
    }
    false
}

#[derive(Clone, Default)]
struct Spec {
    cat: Option<NodeCat>,
    marker: Option<Marker>,
}

fn merge<T: Clone + PartialEq>(a: &Option<T>, b: &Option<T>) -> Option<Option<T>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => None,
        (Some(x), _) | (_, Some(x)) => Some(Some(x.clone())),
        _ => Some(None),
    }
}

fn normalize(assign: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    assign
        .iter()
        .map(|a| {
            let n = map.len();
            *map.entry(*a).or_insert(n)
        })
        .collect()
}

fn coarser_or_equal(fine: &[usize], coarse: &[usize]) -> bool {
    (0..fine.len()).all(|i| (0..fine.len()).all(|j| fine[i] != fine[j] || coarse[i] == coarse[j]))
}

struct Enum<'a> {
    d: &'a TreeDescription,
    vars: Vec<&'a str>,
    children: Vec<Vec<usize>>,
    paths: Vec<Vec<usize>>,
    found: Vec<(Vec<usize>, String)>,
}

impl Enum<'_> {
    fn consistent(&self, assign: &[usize]) -> bool {
        let pos = |name: &str| self.vars.iter().position(|v| *v == name).unwrap();
        let at = |name: &str| assign.get(pos(name)).map(|&n| &self.paths[n]);
        let check = |set: &BTreeSet<(String, String)>, f: &dyn Fn(&[usize], &[usize]) -> bool| {
            set.iter().all(|(a, b)| match (at(a), at(b)) {
                (Some(x), Some(y)) => f(x, y),
                _ => true,
            })
        };
        check(&self.d.parent, &|x, y| y.len() == x.len() + 1 && y.starts_with(x))
            && check(&self.d.dom, &|x, y| ancestor_or_self(x, y))
            && check(&self.d.prec, &|x, y| left_of(x, y) && !ancestor_or_self(x, y) && !ancestor_or_self(y, x))
    }

    fn assign(&mut self, assign: &mut Vec<usize>, specs: &mut Vec<Spec>) {
        let n = self.children.len();
        let i = assign.len();
        let covered: BTreeSet<usize> = assign.iter().copied().collect();
        if self.vars.len() - i < n - covered.len() {
            return;
        }
        if i == self.vars.len() {
            self.finish(assign, specs);
            return;
        }
        let var = &self.d.nodes[self.vars[i]];
        for node in 0..n {
            let (Some(cat), Some(marker)) =
                (merge(&specs[node].cat, &var.cat), merge(&specs[node].marker, &var.marker))
            else {
                continue;
            };
            let saved = std::mem::replace(&mut specs[node], Spec { cat, marker });
            assign.push(node);
            if self.consistent(assign) {
                self.assign(assign, specs);
            }
            assign.pop();
            specs[node] = saved;
        }
    }

    fn finish(&mut self, assign: &[usize], specs: &[Spec]) {
        for (node, s) in specs.iter().enumerate() {
            let leafy = match &s.cat {
                None => return,
                Some(NodeCat::Word(_)) => true,
                Some(NodeCat::Label(_)) => s.marker.is_some_and(|m| m.kind != MarkerKind::None),
            };
            if leafy && !self.children[node].is_empty() {
                return;
            }
        }
        fn build(i: usize, children: &[Vec<usize>], specs: &[Spec]) -> TreeNode {
            let kids: Vec<TreeNode> = children[i].iter().map(|&c| build(c, children, specs)).collect();
            match specs[i].cat.as_ref().unwrap() {
                NodeCat::Word(w) => TreeNode::word(w),
                NodeCat::Label(l) => {
                    let marker = specs[i].marker.unwrap_or(if kids.is_empty() { Marker::SUBST } else { Marker::NONE });
                    TreeNode::new(NodeLabel::clone(l), marker, kids)
                }
            }
        }
        let kind = if specs.iter().any(|s| s.marker.is_some_and(|m| m.kind == MarkerKind::Foot)) {
            TreeKind::Auxiliary
        } else {
            TreeKind::Initial
        };
        let mut t = ElementaryTree::new("model", kind, build(0, &self.children, specs));
        if validate_elementary(&t).iter().any(|v| v.severity == Severity::Error) {
            return;
        }
        for eq in &self.d.equations {
            let r = t.install_with(eq, |_, name| {
                let v = self.vars.iter().position(|v| *v == name).unwrap();
                Ok(Gorn(self.paths[assign[v]].clone()))
            });
            if r.is_err() {
                return;
            }
        }
        t.canonicalize();
        self.found.push((normalize(assign), t.canonical_text()));
    }
}

/// Canonical texts of the minimal models of `d` with at most `max_nodes`
/// nodes, found by trying every ordered tree shape and every mapping of
/// the variables onto its nodes.
pub fn oracle_models(d: &TreeDescription, max_nodes: usize) -> BTreeSet<String> {
    let vars: Vec<&str> = d.nodes.keys().map(String::as_str).collect();
    // Variables with different categories never share a node.
    let mut cats: Vec<&NodeCat> = Vec::new();
    for c in d.nodes.values().filter_map(|v| v.cat.as_ref()) {
        if !cats.contains(&c) {
            cats.push(c);
        }
    }
    let mut e = Enum { d, vars, children: Vec::new(), paths: Vec::new(), found: Vec::new() };
    for n in cats.len().max(1)..=max_nodes.min(e.vars.len()) {
        for children in shapes(n) {
            e.paths = paths(&children);
            e.children = children;
            e.assign(&mut Vec::new(), &mut vec![Spec::default(); n]);
        }
    }
    let partitions: BTreeSet<Vec<usize>> = e.found.iter().map(|(p, _)| p.clone()).collect();
    let maximal = |p: &Vec<usize>| !partitions.iter().any(|q| q != p && coarser_or_equal(p, q));
    e.found.iter().filter(|(p, _)| maximal(p)).map(|(_, t)| t.clone()).collect()
}

/// Canonical text with the tree name replaced by the solver's model name.
pub fn unnamed_text(t: &ElementaryTree) -> String {
    let mut t = t.clone();
    t.name = "model".into();
    t.canonical_text()
}

/// Canonical texts of every tree the family of `frame` should contain,
/// computed with [`oracle_frames`] and [`oracle_models`].
pub fn oracle_family(frame: &SubcatFrame, rules: &[Lrr], lib: &BlockLibrary, max_nodes: usize) -> Vec<String> {
    let mut out = Vec::new();
    for f in oracle_frames(frame, rules) {
        let base = blocks_for_frame(&f, lib).unwrap();
        out.extend(oracle_models(&base, max_nodes));
        for t in &lib.transformations {
            let targets = match t.target {
                Target::Frame => vec![None],
                _ => f.args.iter().filter(|a| t.target.selects(a)).map(Some).collect(),
            };
            for a in targets {
                let block = t.instantiate(a).unwrap();
                if let Ok(d) = conjoin(&base, &block) {
                    out.extend(oracle_models(&d, max_nodes));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------
// Metarule matching

fn flatten<'a>(p: &'a PatternNode, parent: Option<usize>, out: &mut Vec<(&'a PatternNode, Option<usize>)>) {
    let me = out.len();
    out.push((p, parent));
    for c in &p.children {
        flatten(c, Some(me), out);
    }
}

#[derive(Clone, Debug)]
enum Pick {
    Node(Gorn),
    Region(Vec<Gorn>, Vec<Gorn>),
}

fn all_nodes(t: &ElementaryTree) -> Vec<Gorn> {
    t.nodes().into_iter().map(|(g, _)| g).collect()
}

fn child_list(t: &ElementaryTree, g: &Gorn) -> Vec<Gorn> {
    let n = t.node(g).unwrap().children.len();
    (1..=n).map(|i| Gorn([g.0.clone(), vec![i]].concat())).collect()
}

fn strictly_left(a: &Gorn, b: &Gorn) -> bool {
    left_of(&a.0, &b.0) && !ancestor_or_self(&a.0, &b.0) && !ancestor_or_self(&b.0, &a.0)
}

fn fits(p: &PatternNode, n: &TreeNode) -> bool {
    match &p.kind {
        PatternKind::Constant(l) => p.terminal == n.terminal && *l == n.label && p.marker == n.marker,
        PatternKind::Typed { specs, .. } => {
            !n.terminal && specs.iter().any(|s| s.admits(&n.label)) && p.marker.contained_in(&n.marker)
        }
        PatternKind::Untyped { .. } => true,
    }
}

/// Every candidate binding for one pattern node, before any structural
/// check: a single fitting node, or a left-to-right run of nodes (possibly
/// empty) with every left-to-right list of cut points inside it.
fn candidates(p: &PatternNode, t: &ElementaryTree) -> Vec<Pick> {
    match p.kind {
        PatternKind::Untyped { .. } => {
            // Every left-to-right chain of nodes, the empty one included.
            let mut runs: Vec<Vec<Gorn>> = vec![Vec::new()];
            let nodes = all_nodes(t);
            let mut frontier: Vec<Vec<Gorn>> = vec![Vec::new()];
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for run in &frontier {
                    for g in &nodes {
                        if run.last().is_none_or(|l| strictly_left(l, g)) {
                            next.push([run.clone(), vec![g.clone()]].concat());
                        }
                    }
                }
                runs.extend(next.iter().cloned());
                frontier = next;
            }
            let k = p.children.len();
            let mut out = Vec::new();
            for run in runs {
                let pool: Vec<Gorn> =
                    all_nodes(t).into_iter().filter(|g| run.iter().any(|r| ancestor_or_self(&r.0, &g.0))).collect();
                let mut tuples: Vec<Vec<Gorn>> = vec![Vec::new()];
                for _ in 0..k {
                    tuples = tuples
                        .into_iter()
                        .flat_map(|tu| pool.iter().map(move |g| [tu.clone(), vec![g.clone()]].concat()))
                        .collect();
                }
                for cuts in tuples {
                    if cuts.windows(2).all(|w| strictly_left(&w[0], &w[1])) {
                        out.push(Pick::Region(run.clone(), cuts));
                    }
                }
            }
            out
        }
        _ => all_nodes(t).into_iter().filter(|g| fits(p, t.node(g).unwrap())).map(Pick::Node).collect(),
    }
}

/// Matches of `lhs` against `t`: a candidate is chosen for every pattern
/// node, and a combination is kept when each node's children, read left to
/// right, cover exactly its child list (or its cut list), the root covers
/// exactly the tree root, and repeated variables agree.
pub fn oracle_matches(lhs: &PatternNode, t: &ElementaryTree) -> BTreeSet<MatchResult> {
    let mut flat = Vec::new();
    flatten(lhs, None, &mut flat);
    let cands: Vec<Vec<Pick>> = flat.iter().map(|(p, _)| candidates(p, t)).collect();
    let covers = |pick: &Pick| -> Vec<Gorn> {
        match pick {
            Pick::Node(g) => vec![g.clone()],
            Pick::Region(run, _) => run.clone(),
        }
    };
    let slots = |pick: &Pick| -> Vec<Gorn> {
        match pick {
            Pick::Node(g) => child_list(t, g),
            Pick::Region(_, cuts) => cuts.clone(),
        }
    };
    let mut out = BTreeSet::new();
    let mut choice: Vec<usize> = Vec::new();
    let kids: Vec<Vec<usize>> =
        (0..flat.len()).map(|j| (0..flat.len()).filter(|&k| flat[k].1 == Some(j)).collect()).collect();
    // Partial combinations are abandoned as soon as the children chosen so
    // far stop being a prefix of their parent's slots.
    let ok = |choice: &[usize]| -> bool {
        let i = choice.len() - 1;
        let pick = &cands[i][choice[i]];
        if i == 0 && covers(pick) != vec![Gorn(Vec::new())] {
            return false;
        }
        if kids[i].is_empty() && !slots(pick).is_empty() {
            return false;
        }
        let Some(j) = flat[i].1 else { return true };
        let want = slots(&cands[j][choice[j]]);
        let done: Vec<Gorn> = kids[j].iter().filter(|&&k| k <= i).flat_map(|&k| covers(&cands[k][choice[k]])).collect();
        if kids[j].last() == Some(&i) {
            done == want
        } else {
            want.starts_with(&done)
        }
    };
    fn go(
        flat: &[(&PatternNode, Option<usize>)],
        cands: &[Vec<Pick>],
        choice: &mut Vec<usize>,
        ok: &dyn Fn(&[usize]) -> bool,
        out: &mut BTreeSet<MatchResult>,
    ) {
        let i = choice.len();
        if i == flat.len() {
            let mut m = MatchResult::default();
            for (j, (p, _)) in flat.iter().enumerate() {
                match (&p.kind, &cands[j][choice[j]]) {
                    (PatternKind::Typed { id, .. }, Pick::Node(g)) => {
                        if m.typed.insert(*id, g.clone()).is_some_and(|h| h != *g) {
                            return;
                        }
                    }
                    (PatternKind::Untyped { id }, Pick::Region(run, cuts)) => {
                        m.untyped.insert(*id, Capture { roots: run.clone(), cuts: cuts.clone() });
                    }
                    _ => {}
                }
            }
            out.insert(m);
            return;
        }
        for c in 0..cands[i].len() {
            choice.push(c);
            if ok(choice) {
                go(flat, cands, choice, ok, out);
            }
            choice.pop();
        }
    }
    go(&flat, &cands, &mut choice, &ok, &mut out);
    out
}

/// A random (metarule, input) pair for the matcher oracle. The input has
/// at most ten nodes and the left-hand side at most three variables; the
/// right-hand side rebuilds the left-hand side. Some rules require
/// `<case> = nom` on a typed variable, returned as `required`.
pub struct MatchCase {
    pub rule: String,
    pub input: String,
    pub required: Option<u32>,
}

const LABELS: [&str; 7] = ["S_r", "NP_0", "NP_1", "NP", "VP", "V", "PP"];

fn random_input<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(3..=10);
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    for i in 1..n {
        let open: Vec<usize> = (0..i).filter(|&p| children[p].len() < 3).collect();
        let p = open[rng.gen_range(0..open.len())];
        children[p].push(i);
        children.push(Vec::new());
    }
    let labels: Vec<&str> = (0..n).map(|_| LABELS[rng.gen_range(0..LABELS.len())]).collect();
    let mut out = String::from("tree input initial\n");
    fn line<R: Rng>(rng: &mut R, i: usize, depth: usize, children: &[Vec<usize>], labels: &[&str], out: &mut String) {
        let indent = "  ".repeat(depth);
        let label = labels[i];
        let unique = labels.iter().filter(|l| **l == label).count() == 1;
        let features = if unique && label.starts_with("NP") {
            ["", " [case:nom]", " [case:acc]"][rng.gen_range(0..3)]
        } else {
            ""
        };
        if children[i].is_empty() {
            match rng.gen_range(0..4) {
                0 => out.push_str(&format!("{indent}\"w\" - 0\n")),
                1 => out.push_str(&format!("{indent}{label} anchor 0{features}\n")),
                _ => out.push_str(&format!("{indent}{label} subst 0{features}\n")),
            }
        } else {
            out.push_str(&format!("{indent}{label} - {}{features}\n", children[i].len()));
            for &c in &children[i] {
                line(rng, c, depth + 1, children, labels, out);
            }
        }
    }
    line(rng, 0, 0, &children, &labels, &mut out);
    out.push_str("end\n");
    out
}

struct PatSpec {
    head: String,
    rhs_head: String,
    marker: &'static str,
    children: Vec<PatSpec>,
}

fn random_pattern<R: Rng>(
    rng: &mut R,
    depth: usize,
    vars: &mut u32,
    nodes: &mut usize,
    typed: &mut Vec<u32>,
) -> PatSpec {
    *nodes += 1;
    let kind = if *vars >= 3 { 2 } else { rng.gen_range(0..3) };
    let stem = ["S", "NP", "VP", "V", "PP"][rng.gen_range(0..5)];
    let (head, rhs_head, marker) = match kind {
        0 => {
            *vars += 1;
            (format!("?{vars}"), format!("?{vars}"), "-")
        }
        1 => {
            *vars += 1;
            typed.push(*vars);
            let sub = ["_?", ""][rng.gen_range(0..2)];
            (format!("?{vars}{stem}{sub}"), format!("?{vars}"), ["-", "subst"][rng.gen_range(0..2)])
        }
        _ => {
            let label = LABELS[rng.gen_range(0..LABELS.len())].to_string();
            (label.clone(), label, "-")
        }
    };
    let mut spec = PatSpec { head, rhs_head, marker, children: Vec::new() };
    if depth < 2 && kind != 1 || depth < 2 && rng.gen_bool(0.3) {
        for _ in 0..rng.gen_range(0..=2) {
            if *nodes >= 5 {
                break;
            }
            spec.children.push(random_pattern(rng, depth + 1, vars, nodes, typed));
        }
    }
    if kind == 2 && spec.children.is_empty() {
        match rng.gen_range(0..3) {
            0 => spec.head = "\"w\"".into(),
            1 => spec.marker = "anchor",
            _ => spec.marker = "subst",
        }
        spec.rhs_head = spec.head.clone();
    }
    if kind == 1 && !spec.children.is_empty() {
        spec.marker = "-";
    }
    spec
}

fn render(p: &PatSpec, rhs: bool, depth: usize, out: &mut String) {
    let head = if rhs { &p.rhs_head } else { &p.head };
    out.push_str(&format!("{}{} {} {}\n", "  ".repeat(depth), head, p.marker, p.children.len()));
    for c in &p.children {
        render(c, rhs, depth + 1, out);
    }
}

/// Typed children on two or fewer nodes of `input`, under an untyped root,
/// so that at least one match exists.
fn pattern_from<R: Rng>(rng: &mut R, input: &str) -> PatSpec {
    let t = treegen::trees::parse_trees(input).unwrap().remove(0);
    let inner: Vec<(Gorn, String)> =
        t.nodes().into_iter().filter(|(_, n)| !n.terminal).map(|(g, n)| (g, n.label.stem.clone())).collect();
    let mut picked: Vec<&(Gorn, String)> = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let c = &inner[rng.gen_range(0..inner.len())];
        if picked.iter().all(|p| strictly_left(&p.0, &c.0)) {
            picked.push(c);
        }
    }
    let children = picked
        .iter()
        .enumerate()
        .map(|(i, (_, stem))| {
            let id = i + 2;
            PatSpec { head: format!("?{id}{stem}_?"), rhs_head: format!("?{id}"), marker: "-", children: Vec::new() }
        })
        .collect();
    PatSpec { head: "?1".into(), rhs_head: "?1".into(), marker: "-", children }
}

pub fn random_match_case<R: Rng>(rng: &mut R) -> MatchCase {
    let input = random_input(rng);
    let mut vars = 0;
    let mut nodes = 0;
    let mut typed = Vec::new();
    let root = if rng.gen_bool(0.4) {
        let p = pattern_from(rng, &input);
        typed = (2..2 + p.children.len() as u32).collect();
        p
    } else {
        // An untyped root matches every tree; the rest of the pattern decides.
        let mut root = random_pattern(rng, 0, &mut vars, &mut nodes, &mut typed);
        if vars < 3 && rng.gen_bool(0.85) && !root.head.starts_with('?') {
            let id = format!("?{}", vars + 1);
            root = PatSpec { head: id.clone(), rhs_head: id, marker: "-", children: vec![root] };
        }
        root
    };
    let required = (!typed.is_empty() && rng.gen_bool(0.5)).then(|| typed[rng.gen_range(0..typed.len())]);
    let mut rule = String::from("tree lhs initial\n");
    render(&root, false, 0, &mut rule);
    if let Some(id) = required {
        rule.push_str(&format!("eq +?{id}.t:<case> = nom\n"));
    }
    rule.push_str("end\ntree rhs initial\n");
    render(&root, true, 0, &mut rule);
    rule.push_str("end\n");
    MatchCase { rule, input, required }
}
