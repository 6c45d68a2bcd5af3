//! Sectioned grammar source files.
//!
//! A grammar is one or more text files made of sections, each closed by a
//! line `end`:
//!
//! ```text
//! frame transitive V | 0 NP pre | 1 NP post
//!   eq Anchor.t:<mode> = ind          % optional frame equations
//! end
//! lrr passive                         % `lrr NAME additive` keeps extra args
//!   from V | 0 NP pre | 1 NP post
//!   to V | 1 NP pre | 0 PP post by
//!   eq Anchor.t:<mode> = ppart        % belongs to the preceding `to`
//! end
//! spine V                             % description of the anchor's spine
//! block NP post [HINT]                % subcategorization block
//! transformation wh W{i} pre NP PP    % or: transformation NAME PREFIX frame
//! tree NAME initial ... end           % hand-written elementary tree
//! lexicon ... end                     % <<INDEX>> records
//! config max_nodes 24 ... end
//! untestable NAME ... end             % trees no fixture sentence uses
//! ```
//!
//! Arguments are `INDEX CAT pre|post [HINT] [FEATURES]`. Diagnostics read
//! `path:line:col: code: message`.

use crate::derive::{parse_lexicon, DeriveError, Grammar, LexEntry};
use crate::descriptions::{parse_description, SolverConfig};
use crate::feature::{parse_equation, parse_value, Value};
use crate::lexorg::{
    generate_family, BlockLibrary, FrameArg, LexError, Lrr, LrrVariant, Position, SubcatFrame, Target, Transformation,
    TreeFamily,
};
use crate::trees::{parse_trees, ElementaryTree};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub line: usize,
    pub col: usize,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}: {}", self.path, self.line, self.col, self.code, self.message)
    }
}

impl std::error::Error for Diagnostic {}

pub const E_SYNTAX: &str = "syntax";
pub const E_DUPLICATE: &str = "duplicate";
pub const E_UNRESOLVED: &str = "unresolved";
pub const E_IO: &str = "io";
pub const E_FAMILY: &str = "family";
pub const E_EMPTY_FAMILY: &str = "empty-family";

/// Where a named item was defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub path: String,
    pub line: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.path, self.line)
    }
}

#[derive(Debug, Clone, Default)]
pub struct GrammarSource {
    pub frames: Vec<(SubcatFrame, Location)>,
    pub lrrs: Vec<Lrr>,
    pub library: BlockLibrary,
    pub trees: Vec<ElementaryTree>,
    pub lexicon: Vec<LexEntry>,
    pub config: SolverConfig,
    pub untestable: BTreeSet<String>,
    pub warnings: Vec<String>,
}

struct Section<'a> {
    header: Vec<&'a str>,
    header_text: &'a str,
    line: usize,
    body: Vec<(usize, &'a str)>,
}

fn sections<'a>(path: &str, text: &'a str, diags: &mut Vec<Diagnostic>) -> Vec<Section<'a>> {
    let mut out = Vec::new();
    let mut cur: Option<Section> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        match &mut cur {
            Some(s) => {
                // `tree` bodies end with their own `end`, which is kept.
                if trimmed == "end" {
                    if s.header[0] == "tree" {
                        s.body.push((line, raw));
                    }
                    out.push(cur.take().unwrap());
                } else {
                    s.body.push((line, raw));
                }
            }
            None => {
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                let header: Vec<&str> = trimmed.split_whitespace().collect();
                let mut s = Section { header, header_text: trimmed, line, body: Vec::new() };
                if s.header[0] == "tree" {
                    s.body.push((line, raw));
                }
                cur = Some(s);
            }
        }
    }
    if let Some(s) = cur {
        diags.push(Diagnostic {
            path: path.to_string(),
            line: s.line,
            col: 1,
            code: E_SYNTAX,
            message: format!("section '{}' is not closed by 'end'", s.header[0]),
        });
    }
    out
}

fn parse_arg(text: &str) -> Result<FrameArg, String> {
    let (head, features) = match text.find('[') {
        Some(i) => (&text[..i], Some(&text[i..])),
        None => (text, None),
    };
    let w: Vec<&str> = head.split_whitespace().collect();
    if w.len() < 3 || w.len() > 4 {
        return Err(format!("argument '{}' must be INDEX CAT pre|post [HINT]", text.trim()));
    }
    let index = w[0].parse::<u32>().map_err(|_| format!("bad argument index {}", w[0]))?;
    let position = Position::parse(w[2]).ok_or_else(|| format!("bad position {}", w[2]))?;
    let mut arg = FrameArg::new(index, w[1], position);
    arg.hint = w.get(3).map(|h| h.to_string());
    if let Some(fs) = features {
        let (v, used) = parse_value(fs).map_err(|e| e.to_string())?;
        if !fs[used..].trim().is_empty() {
            return Err(format!("trailing text after features in '{}'", text.trim()));
        }
        arg.features = match v {
            Value::Struct(fs) if fs.is_link_free() => fs,
            Value::Struct(_) => return Err("argument features cannot be coindexed".into()),
            _ => return Err("argument features must be a structure".into()),
        };
    }
    Ok(arg)
}

/// `CAT | arg | arg ...`
fn parse_frame_spec(name: &str, text: &str) -> Result<SubcatFrame, String> {
    let mut parts = text.split('|');
    let cat = parts.next().unwrap_or("").trim();
    if cat.is_empty() || cat.contains(char::is_whitespace) {
        return Err(format!("expected an anchor category, found '{cat}'"));
    }
    let args = parts.map(parse_arg).collect::<Result<Vec<_>, _>>()?;
    let f = SubcatFrame::new(name, cat, args);
    f.check().map_err(|e| e.to_string())?;
    Ok(f)
}

struct Parser {
    path: String,
    diags: Vec<Diagnostic>,
    src: GrammarSource,
    frame_names: BTreeMap<String, Location>,
    lrr_names: BTreeMap<String, Location>,
    block_keys: BTreeMap<String, Location>,
    /// Declared nodes and referenced names per block, for resolution.
    block_refs: Vec<(Location, String, BTreeSet<String>, BTreeSet<String>)>,
    spine_nodes: BTreeSet<String>,
}

impl Parser {
    fn diag(&mut self, line: usize, code: &'static str, message: impl Into<String>) {
        self.diags.push(Diagnostic { path: self.path.clone(), line, col: 1, code, message: message.into() });
    }

    fn loc(&self, line: usize) -> Location {
        Location { path: self.path.clone(), line }
    }

    fn claim(
        &mut self,
        kind: &str,
        table: fn(&mut Self) -> &mut BTreeMap<String, Location>,
        name: &str,
        line: usize,
    ) -> bool {
        let here = self.loc(line);
        if let Some(first) = table(self).get(name).cloned() {
            self.diag(line, E_DUPLICATE, format!("{kind} {name} is already defined at {first}"));
            return false;
        }
        table(self).insert(name.to_string(), here);
        true
    }

    fn section(&mut self, s: &Section) {
        let h = &s.header;
        match h[0] {
            "frame" => self.frame(s),
            "lrr" => self.lrr(s),
            "spine" | "block" | "transformation" => self.description(s),
            "tree" => {
                let text: String = s.body.iter().map(|(_, l)| format!("{l}\n")).collect();
                match parse_trees(&text) {
                    Ok(ts) => self.src.trees.extend(ts),
                    Err(e) => {
                        let line = s.line + e.line.saturating_sub(1);
                        self.diags.push(Diagnostic {
                            path: self.path.clone(),
                            line,
                            col: e.col,
                            code: E_SYNTAX,
                            message: e.message,
                        });
                    }
                }
            }
            "lexicon" => {
                let text: String = s.body.iter().map(|(_, l)| format!("{l}\n")).collect();
                match parse_lexicon(&text) {
                    Ok(lex) => {
                        self.src.lexicon.extend(lex.entries);
                        self.src.warnings.extend(lex.warnings.into_iter().map(|w| format!("{}: {w}", self.path)));
                    }
                    Err(e) => {
                        let line = if e.line == 0 { s.line } else { s.line + e.line };
                        self.diag(line, E_SYNTAX, e.message);
                    }
                }
            }
            "config" => {
                for (line, raw) in &s.body {
                    let w: Vec<&str> = raw.split_whitespace().collect();
                    if w.is_empty() || w[0].starts_with('%') {
                        continue;
                    }
                    let value = w.get(1).and_then(|v| v.parse::<usize>().ok());
                    match (w[0], value, w.len()) {
                        ("max_nodes", Some(v), 2) => self.src.config.max_nodes = v,
                        ("max_models", Some(v), 2) => self.src.config.max_models = v,
                        _ => self.diag(*line, E_SYNTAX, format!("bad config line '{}'", raw.trim())),
                    }
                }
            }
            "untestable" => {
                for (_, raw) in &s.body {
                    if !raw.trim_start().starts_with('%') {
                        self.src.untestable.extend(raw.split_whitespace().map(str::to_string));
                    }
                }
            }
            other => self.diag(s.line, E_SYNTAX, format!("unknown section '{other}'")),
        }
    }

    fn frame(&mut self, s: &Section) {
        let Some(name) = s.header.get(1) else {
            return self.diag(s.line, E_SYNTAX, "frame needs a name");
        };
        let spec = s.header_text.splitn(3, char::is_whitespace).nth(2).unwrap_or("");
        let mut f = match parse_frame_spec(name, spec) {
            Ok(f) => f,
            Err(m) => return self.diag(s.line, E_SYNTAX, m),
        };
        for (line, raw) in &s.body {
            let t = raw.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            if let Some(rest) = t.strip_prefix("arg ") {
                match parse_arg(rest) {
                    Ok(a) => f.args.push(a),
                    Err(m) => self.diag(*line, E_SYNTAX, m),
                }
            } else if let Some(rest) = t.strip_prefix("eq ") {
                match parse_equation(rest) {
                    Ok(eq) => f.frame_features.push(eq),
                    Err(e) => self.diag(*line, E_SYNTAX, e.to_string()),
                }
            } else {
                self.diag(*line, E_SYNTAX, format!("unexpected '{t}' in frame"));
            }
        }
        if let Err(e) = f.check() {
            return self.diag(s.line, E_SYNTAX, e.to_string());
        }
        if self.claim("frame", |p| &mut p.frame_names, name, s.line) {
            let loc = self.loc(s.line);
            self.src.frames.push((f, loc));
        }
    }

    fn lrr(&mut self, s: &Section) {
        let Some(name) = s.header.get(1) else {
            return self.diag(s.line, E_SYNTAX, "lrr needs a name");
        };
        let additive = match s.header.get(2) {
            None => false,
            Some(&"additive") if s.header.len() == 3 => true,
            Some(_) => return self.diag(s.line, E_SYNTAX, "lrr header is 'lrr NAME [additive]'"),
        };
        let mut rule = Lrr { name: name.to_string(), variants: Vec::new(), additive };
        let mut pending: Option<SubcatFrame> = None;
        for (line, raw) in &s.body {
            let t = raw.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            let (kw, rest) = t.split_once(char::is_whitespace).unwrap_or((t, ""));
            match kw {
                "from" => {
                    if pending.is_some() {
                        self.diag(*line, E_SYNTAX, "'from' without a matching 'to'");
                    }
                    match parse_frame_spec("", rest) {
                        Ok(f) => pending = Some(f),
                        Err(m) => self.diag(*line, E_SYNTAX, m),
                    }
                }
                "to" => match (pending.take(), parse_frame_spec("", rest)) {
                    (Some(left), Ok(right)) => rule.variants.push(LrrVariant { left, right }),
                    (None, _) => self.diag(*line, E_SYNTAX, "'to' without a preceding 'from'"),
                    (_, Err(m)) => self.diag(*line, E_SYNTAX, m),
                },
                "eq" => match (rule.variants.last_mut(), parse_equation(rest)) {
                    (Some(v), Ok(eq)) => v.right.frame_features.push(eq),
                    (None, _) => self.diag(*line, E_SYNTAX, "'eq' before any 'to'"),
                    (_, Err(e)) => self.diag(*line, E_SYNTAX, e.to_string()),
                },
                _ => self.diag(*line, E_SYNTAX, format!("unexpected '{t}' in lrr")),
            }
        }
        if pending.is_some() {
            self.diag(s.line, E_SYNTAX, format!("lrr {name} ends after 'from'"));
        }
        if rule.variants.is_empty() {
            return self.diag(s.line, E_SYNTAX, format!("lrr {name} has no variant"));
        }
        if self.claim("lrr", |p| &mut p.lrr_names, name, s.line) {
            self.src.lrrs.push(rule);
        }
    }

    fn description(&mut self, s: &Section) {
        let h = &s.header;
        let source: String = s.body.iter().map(|(_, l)| format!("{}\n", l.trim())).collect();
        // Parse with placeholders filled so syntax errors surface here.
        let probe = source.replace('@', "Arg0").replace("{i}", "0").replace("{h}", "x");
        let d = match parse_description(&probe) {
            Ok(d) => d,
            Err(e) => {
                let line = s.body.get(e.line.saturating_sub(1)).map_or(s.line, |(l, _)| *l);
                return self.diag(line, E_SYNTAX, e.message);
            }
        };
        let declared: BTreeSet<String> = d.nodes.keys().cloned().collect();
        let mut referenced: BTreeSet<String> = BTreeSet::new();
        for (a, b) in d.parent.iter().chain(&d.dom).chain(&d.prec) {
            referenced.insert(a.clone());
            referenced.insert(b.clone());
        }
        for eq in &d.equations {
            referenced.extend(eq.nodes().into_iter().map(str::to_string));
        }
        let key = h.join(" ");
        match h[0] {
            "spine" => {
                let [_, cat] = h[..] else {
                    return self.diag(s.line, E_SYNTAX, "spine header is 'spine CAT'");
                };
                self.spine_nodes.extend(declared.iter().cloned());
                if self.claim("spine", |p| &mut p.block_keys, &key, s.line) {
                    self.src.library.add_spine(cat, &source);
                }
            }
            "block" => {
                let (cat, pos, hint) = match h[..] {
                    [_, cat, pos] => (cat, pos, None),
                    [_, cat, pos, hint] => (cat, pos, Some(hint)),
                    _ => return self.diag(s.line, E_SYNTAX, "block header is 'block CAT pre|post [HINT]'"),
                };
                let Some(position) = Position::parse(pos) else {
                    return self.diag(s.line, E_SYNTAX, format!("bad position {pos}"));
                };
                if self.claim("block", |p| &mut p.block_keys, &key, s.line) {
                    self.src.library.add_block(cat, position, hint, &source);
                }
            }
            _ => {
                let (name, prefix, target) = match h[..] {
                    [_, name, prefix, "frame"] => (name, prefix, Target::Frame),
                    [_, name, prefix, side, ref cats @ ..] if !cats.is_empty() => {
                        let position = match side {
                            "any" => None,
                            other => match Position::parse(other) {
                                Some(p) => Some(p),
                                None => return self.diag(s.line, E_SYNTAX, format!("bad side {side}")),
                            },
                        };
                        (name, prefix, Target::Args { position, cats: cats.iter().map(|c| c.to_string()).collect() })
                    }
                    _ => {
                        return self.diag(
                            s.line,
                            E_SYNTAX,
                            "transformation header is 'transformation NAME PREFIX frame|pre|post|any CAT...'",
                        )
                    }
                };
                let key = format!("transformation {name}");
                if self.claim("transformation", |p| &mut p.block_keys, &key, s.line) {
                    self.src.library.transformations.push(Transformation {
                        name: name.to_string(),
                        prefix: prefix.to_string(),
                        target,
                        source,
                    });
                }
            }
        }
        self.block_refs.push((self.loc(s.line), key, declared, referenced));
    }

    fn resolve(&mut self) {
        for (loc, key, declared, referenced) in std::mem::take(&mut self.block_refs) {
            for name in referenced {
                if !declared.contains(&name) && !self.spine_nodes.contains(&name) {
                    self.diags.push(Diagnostic {
                        path: loc.path.clone(),
                        line: loc.line,
                        col: 1,
                        code: E_UNRESOLVED,
                        message: format!("{key} refers to undeclared node {name}"),
                    });
                }
            }
        }
        let mut missing = Vec::new();
        for (f, loc) in &self.src.frames {
            if !self.src.library.spines.contains_key(&f.anchor_cat) {
                missing.push((loc.clone(), format!("frame {} has no spine for {}", f.name, f.anchor_cat)));
            }
            for a in &f.args {
                let has =
                    |h: Option<&String>| self.src.library.subcat.contains_key(&(a.cat.clone(), a.position, h.cloned()));
                if !has(a.hint.as_ref()) && !has(None) {
                    missing.push((loc.clone(), format!("frame {} has no block for {} {}", f.name, a.cat, a.position)));
                }
            }
        }
        for (loc, message) in missing {
            self.diags.push(Diagnostic { path: loc.path, line: loc.line, col: 1, code: E_UNRESOLVED, message });
        }
    }
}

/// Parses grammar text from several named sources into one grammar.
pub fn parse_grammar_texts(files: &[(String, String)]) -> Result<GrammarSource, Vec<Diagnostic>> {
    let mut p = Parser {
        path: String::new(),
        diags: Vec::new(),
        src: GrammarSource::default(),
        frame_names: BTreeMap::new(),
        lrr_names: BTreeMap::new(),
        block_keys: BTreeMap::new(),
        block_refs: Vec::new(),
        spine_nodes: BTreeSet::new(),
    };
    for (path, text) in files {
        let secs = sections(path, text, &mut p.diags);
        p.path = path.clone();
        for s in &secs {
            p.section(s);
        }
    }
    p.resolve();
    if p.diags.is_empty() {
        Ok(p.src)
    } else {
        Err(p.diags)
    }
}

/// Reads the given files; a directory contributes its regular files in
/// name order.
pub fn parse_grammar_source(paths: &[PathBuf]) -> Result<GrammarSource, Vec<Diagnostic>> {
    let io = |p: &Path, e: std::io::Error| Diagnostic {
        path: p.display().to_string(),
        line: 0,
        col: 0,
        code: E_IO,
        message: e.to_string(),
    };
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| vec![io(p, e)])?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            entries.sort();
            for e in entries {
                let text = std::fs::read_to_string(&e).map_err(|x| vec![io(&e, x)])?;
                files.push((e.display().to_string(), text));
            }
        } else {
            let text = std::fs::read_to_string(p).map_err(|e| vec![io(p, e)])?;
            files.push((p.display().to_string(), text));
        }
    }
    parse_grammar_texts(&files)
}

/// Generates the family of every frame, in source order.
pub fn compile(src: &GrammarSource) -> Result<Vec<TreeFamily>, Diagnostic> {
    let mut out: Vec<TreeFamily> = Vec::new();
    let mut seen: BTreeMap<String, Location> = BTreeMap::new();
    for (f, loc) in &src.frames {
        let diag = |code, message: String| Diagnostic { path: loc.path.clone(), line: loc.line, col: 1, code, message };
        let fam = generate_family(f, &src.lrrs, &src.library, src.config).map_err(|e| match e {
            LexError::NoDeclarative(_) => diag(E_EMPTY_FAMILY, format!("frame {}: {e}", f.name)),
            e => diag(E_FAMILY, format!("frame {}: {e}", f.name)),
        })?;
        if let Some(first) = seen.get(&fam.name) {
            return Err(diag(E_DUPLICATE, format!("family {} is already produced by the frame at {first}", fam.name)));
        }
        seen.insert(fam.name.clone(), loc.clone());
        out.push(fam);
    }
    Ok(out)
}

/// Anchors the compiled families and the hand-written trees with the
/// grammar's lexicon.
pub fn lexicalized_grammar(src: &GrammarSource, families: &[TreeFamily]) -> Result<Grammar, DeriveError> {
    let fams: BTreeMap<String, Vec<ElementaryTree>> =
        families.iter().map(|f| (f.name.clone(), f.trees.iter().map(|t| t.tree.clone()).collect())).collect();
    let trees: BTreeMap<String, ElementaryTree> = src.trees.iter().map(|t| (t.name.clone(), t.clone())).collect();
    Grammar::from_lexicon(&src.lexicon, &fams, &trees)
}
