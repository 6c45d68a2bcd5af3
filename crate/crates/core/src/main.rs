use clap::{Parser, Subcommand, ValueEnum};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use treegen::derive::{recognize, Recognition};
use treegen::metarules::{apply_mode, parse_metarules, ApplyOptions, Mode};
use treegen::source::{compile, lexicalized_grammar, parse_grammar_source, Diagnostic};
use treegen::trees::{
    parse_trees, tree_name, validate_elementary, write_trees, ElementaryTree, NameContext, Severity, TreeNode,
};

#[derive(Parser)]
#[command(name = "treegen", version, about = "Grammar metacompiler for lexicalized tree-adjoining grammars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Single,
    Parallel,
    Sequential,
    Cumulative,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Single => Mode::Single,
            ModeArg::Parallel => Mode::Parallel,
            ModeArg::Sequential => Mode::Sequential,
            ModeArg::Cumulative => Mode::Cumulative,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate every tree family of a grammar.
    Compile {
        /// Grammar files or directories.
        #[arg(required = true)]
        grammar: Vec<PathBuf>,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Apply a metarule file to tree files.
    Metarule {
        rules: PathBuf,
        #[arg(required = true)]
        trees: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "single")]
        mode: ModeArg,
        #[arg(long)]
        copy_unmatched: bool,
        #[arg(long)]
        change_name: bool,
        /// Output directory; defaults to each input's directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recognize sentences, one per line, with a compiled grammar.
    Derive {
        #[arg(required = true)]
        grammar: Vec<PathBuf>,
        /// Sentence file; standard input when absent.
        #[arg(short, long)]
        sentences: Option<PathBuf>,
        /// Largest number of composition operations.
        #[arg(long, default_value_t = 8)]
        bound: usize,
    },
    /// Check elementary-tree well-formedness.
    Validate { trees: PathBuf },
    /// Report computed tree names.
    Name {
        trees: PathBuf,
        #[arg(long, default_value = "")]
        prefix: String,
    },
    /// Print trees as indented outlines.
    Dump { trees: PathBuf },
}

fn diag(path: &Path, code: &'static str, message: impl ToString) -> Diagnostic {
    Diagnostic { path: path.display().to_string(), line: 0, col: 0, code, message: message.to_string() }
}

fn read_trees(path: &Path) -> Result<Vec<ElementaryTree>, Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![diag(path, "io", e)])?;
    parse_trees(&text).map_err(|e| {
        vec![Diagnostic {
            path: path.display().to_string(),
            line: e.line,
            col: e.col,
            code: "syntax",
            message: e.message,
        }]
    })
}

fn write(path: &Path, text: &str) -> Result<(), Vec<Diagnostic>> {
    std::fs::write(path, text).map_err(|e| vec![diag(path, "io", e)])
}

fn run_compile(grammar: &[PathBuf], output: &Path) -> Result<(), Vec<Diagnostic>> {
    let src = parse_grammar_source(grammar)?;
    for w in &src.warnings {
        eprintln!("warning: {w}");
    }
    let families = compile(&src).map_err(|d| vec![d])?;
    std::fs::create_dir_all(output).map_err(|e| vec![diag(output, "io", e)])?;
    for f in &families {
        let trees: Vec<ElementaryTree> = f.trees.iter().map(|t| t.tree.clone()).collect();
        write(&output.join(format!("{}.trees", f.name)), &write_trees(&trees))?;
        write(&output.join(format!("{}.prov", f.name)), &f.provenance_text())?;
        println!("{}\t{}", f.name, f.trees.len());
    }
    Ok(())
}

fn run_metarule(
    rules: &Path,
    trees: &[PathBuf],
    mode: Mode,
    opts: ApplyOptions,
    output: Option<&Path>,
) -> Result<(), Vec<Diagnostic>> {
    let text = std::fs::read_to_string(rules).map_err(|e| vec![diag(rules, "io", e)])?;
    let file = parse_metarules(&text).map_err(|e| vec![diag(rules, "metarule", e)])?;
    for w in &file.warnings {
        eprintln!("{}: warning: {w}", rules.display());
    }
    for path in trees {
        let input = read_trees(path)?;
        let out = apply_mode(mode, &file.rules, &input, opts).map_err(|e| vec![diag(path, "metarule", e)])?;
        for w in &out.warnings {
            eprintln!("{}: warning: {w}", path.display());
        }
        let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let dir = match output {
            Some(d) => d.to_path_buf(),
            None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        std::fs::create_dir_all(&dir).map_err(|e| vec![diag(&dir, "io", e)])?;
        let target = dir.join(format!("{}{file_name}", mode.prefix()));
        write(&target, &write_trees(&out.trees))?;
        println!("{}\t{}", target.display(), out.trees.len());
    }
    Ok(())
}

fn run_derive(grammar: &[PathBuf], sentences: Option<&Path>, bound: usize) -> Result<(), Vec<Diagnostic>> {
    let src = parse_grammar_source(grammar)?;
    let families = compile(&src).map_err(|d| vec![d])?;
    let here = grammar.first().map(PathBuf::as_path).unwrap_or(Path::new("-"));
    let g = lexicalized_grammar(&src, &families).map_err(|e| vec![diag(here, "lexicon", e)])?;
    let text = match sentences {
        Some(p) => std::fs::read_to_string(p).map_err(|e| vec![diag(p, "io", e)])?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| vec![diag(Path::new("-"), "io", e)])?;
            s
        }
    };
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%')) {
        let words: Vec<&str> = line.split_whitespace().collect();
        match recognize(&words, &g, bound).map_err(|e| vec![diag(here, "derive", e)])? {
            Recognition::Accepted(ds) => {
                println!("accept\t{line}");
                for d in ds {
                    println!("\t{d}");
                }
            }
            Recognition::Rejected => println!("reject\t{line}"),
            Recognition::BoundExhausted => println!("bound\t{line}"),
        }
    }
    Ok(())
}

fn run_validate(path: &Path) -> Result<bool, Vec<Diagnostic>> {
    let mut ok = true;
    for t in read_trees(path)? {
        for v in validate_elementary(&t) {
            ok &= v.severity != Severity::Error;
            println!("{}\t{v}", t.name);
        }
    }
    Ok(ok)
}

fn run_name(path: &Path, prefix: &str) -> Result<(), Vec<Diagnostic>> {
    let cx = NameContext::prefixed(prefix);
    for t in read_trees(path)? {
        match tree_name(&t, &cx) {
            Ok(n) => println!("{}\t{n}", t.name),
            Err(e) => return Err(vec![diag(path, "naming", format!("{}: {e}", t.name))]),
        }
    }
    Ok(())
}

fn outline(n: &TreeNode, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    if n.terminal {
        let w = if n.is_epsilon() { "ε" } else { n.label.stem.as_str() };
        out.push_str(&format!("{indent}\"{w}\"\n"));
        return;
    }
    out.push_str(&format!("{indent}{}", n.name()));
    let marker = n.marker.to_string();
    if marker != "-" {
        out.push_str(&format!(" <{marker}>"));
    }
    if !n.top.is_empty() {
        out.push_str(&format!(" t{}", n.top));
    }
    if !n.bottom.is_empty() {
        out.push_str(&format!(" b{}", n.bottom));
    }
    out.push('\n');
    for c in &n.children {
        outline(c, depth + 1, out);
    }
}

fn run_dump(path: &Path) -> Result<(), Vec<Diagnostic>> {
    let mut stdout = std::io::stdout().lock();
    for t in read_trees(path)? {
        let mut s = format!("{} ({})\n", t.name, t.kind);
        outline(&t.root, 1, &mut s);
        for id in 1.. {
            match t.links.value(treegen::feature::LinkId(id)) {
                Some(v) => s.push_str(&format!("  #{id} = {v}\n")),
                None => break,
            }
        }
        if stdout.write_all(s.as_bytes()).is_err() {
            break;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compile { grammar, output } => run_compile(grammar, output).map(|_| true),
        Command::Metarule { rules, trees, mode, copy_unmatched, change_name, output } => {
            let opts = ApplyOptions { copy_unmatched: *copy_unmatched, change_name: *change_name };
            run_metarule(rules, trees, (*mode).into(), opts, output.as_deref()).map(|_| true)
        }
        Command::Derive { grammar, sentences, bound } => {
            run_derive(grammar, sentences.as_deref(), *bound).map(|_| true)
        }
        Command::Validate { trees } => run_validate(trees),
        Command::Name { trees, prefix } => run_name(trees, prefix).map(|_| true),
        Command::Dump { trees } => run_dump(trees).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(diags) => {
            for d in diags {
                eprintln!("{d}");
            }
            ExitCode::from(2)
        }
    }
}
