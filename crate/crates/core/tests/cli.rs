mod common;

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn treegen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treegen")).args(args).output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn compile_writes_families_and_provenance() {
    let out = tempfile::tempdir().unwrap();
    let mini = common::fixture("mini");
    let r = treegen(&["compile", p(&mini), "-o", p(out.path())]);
    assert!(r.status.success(), "{}", text(&r.stderr));
    assert_eq!(text(&r.stdout), "Tnx0V\t2\nTnx0Vnx1\t6\nTnx0Vnx2nx1\t16\n");
    let trees = std::fs::read_to_string(out.path().join("Tnx0Vnx1.trees")).unwrap();
    assert_eq!(trees.matches("\ntree ").count() + 1, 6);
    let prov = std::fs::read_to_string(out.path().join("Tnx0Vnx1.prov")).unwrap();
    assert!(prov.contains("αnx1Vbynx0\ttransitive [passive] declarative\n"), "{prov}");
}

#[test]
fn compile_reports_located_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.g");
    std::fs::write(&g, "frame t V | 0 NP pre\nend\n\nframe t V | 0 NP pre\nend\n").unwrap();
    let r = treegen(&["compile", p(&g), "-o", p(&dir.path().join("out"))]);
    assert_eq!(r.status.code(), Some(2));
    let err = text(&r.stderr);
    assert!(err.contains(&format!("{}:4:1: duplicate: frame t is already defined at {}:1", p(&g), p(&g))), "{err}");
    assert!(err.contains("unresolved: frame t has no spine for V"), "{err}");
}

#[test]
fn metarule_writes_prefixed_files() {
    let dir = tempfile::tempdir().unwrap();
    let trees = dir.path().join("decl.trees");
    std::fs::write(
        &trees,
        "tree αnx0Vnx1 initial\nS_r - 2\n  NP_0 subst 0 [case:nom]\n  VP - 2\n    V anchor 0\n    NP_1 subst 0\nend\n",
    )
    .unwrap();
    let rules = common::fixture("metarules/wh-subject.mr");
    for (mode, prefix) in [("single", "MR-"), ("parallel", "MRP-"), ("sequential", "MRS-"), ("cumulative", "MRC-")] {
        let r = treegen(&["metarule", "--mode", mode, p(&rules), p(&trees)]);
        assert!(r.status.success(), "{}", text(&r.stderr));
        let written = dir.path().join(format!("{prefix}decl.trees"));
        assert!(written.exists(), "{mode}");
    }
    let out = dir.path().join("named");
    let r = treegen(&["metarule", "--change-name", p(&rules), p(&trees), "-o", p(&out)]);
    assert!(r.status.success());
    let result = std::fs::read_to_string(out.join("MR-decl.trees")).unwrap();
    assert!(result.starts_with("tree αnx0Vnx1-wh initial\n% metarule wh-subject\n"), "{result}");
    assert!(result.contains("% input αnx0Vnx1\nS_q - 2"), "{result}");
}

#[test]
fn derive_reads_sentences_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_treegen"))
        .args(["derive", p(&common::fixture("mini"))])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"the cat slept\n% comment\nslept the cat\n").unwrap();
    let r = child.wait_with_output().unwrap();
    assert!(r.status.success());
    let out = text(&r.stdout);
    let verdicts: Vec<&str> = out.lines().filter(|l| !l.starts_with('\t')).collect();
    assert_eq!(verdicts, vec!["accept\tthe cat slept", "reject\tslept the cat"]);
    assert!(out.contains("\tαnx0V[slept](subst 1 αNXN[cat](adjoin 0 βDnx[the]))\n"), "{out}");
}

#[test]
fn derive_with_a_small_bound_reports_it() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.txt");
    std::fs::write(&s, "the big cat slept quickly\n").unwrap();
    let r = treegen(&["derive", p(&common::fixture("mini")), "--sentences", p(&s), "--bound", "2"]);
    assert_eq!(text(&r.stdout), "bound\tthe big cat slept quickly\n");
}

#[test]
fn validate_name_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.trees");
    std::fs::write(&good, "tree x initial\nS_r - 2\n  NP_0 subst 0\n  VP - 1\n    V anchor 0\nend\n").unwrap();
    let bad = dir.path().join("bad.trees");
    std::fs::write(&bad, "tree y auxiliary\nVP - 1\n  V anchor 0\nend\n").unwrap();

    assert!(treegen(&["validate", p(&good)]).status.success());
    let r = treegen(&["validate", p(&bad)]);
    assert_eq!(r.status.code(), Some(1));
    assert!(text(&r.stdout).starts_with("y\t"));

    let r = treegen(&["name", p(&good), "--prefix", "W0"]);
    assert_eq!(text(&r.stdout), "x\tαW0nx0V\n");

    let r = treegen(&["dump", p(&good)]);
    assert_eq!(text(&r.stdout), "x (initial)\n  S_r\n    NP_0 <subst>\n    VP\n      V <anchor>\n");
}

#[test]
fn unreadable_input_is_an_io_error() {
    let r = treegen(&["dump", "/nonexistent/file.trees"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(text(&r.stderr).starts_with("/nonexistent/file.trees:0:0: io: "));
}
