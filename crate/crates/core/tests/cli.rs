mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{corpus_dir, problem_file, EXAMPLES};
use sigma_reduce::problem::ProblemFile;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigma-reduce"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn corpus_file(name: &str) -> String {
    corpus_dir().join(format!("{name}.json")).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn json_reports_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("r{k}.json"));
        let o = run(&["validate", &corpus_file("example4"), "--out", out.to_str().unwrap()], tmp.path());
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        outs.push(fs::read(out).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let v: serde_json::Value = serde_json::from_slice(&outs[0]).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn corpus_passes_from_workspace_root() {
    let root = corpus_dir().join("..");
    let o = run(&["corpus"], &root);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("8/8 passed"), "{}", stdout(&o));
}

#[test]
fn problem_files_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    for name in EXAMPLES {
        let pf = problem_file(name);
        let text = pf.to_json();
        let again = ProblemFile::from_json(&text).unwrap();
        assert_eq!(again.to_json(), text, "{name}");

        let copy = tmp.path().join(format!("{name}.json"));
        fs::write(&copy, &text).unwrap();
        let a = tmp.path().join("a.json");
        let b = tmp.path().join("b.json");
        run(&["check", &corpus_file(name), "--out", a.to_str().unwrap()], tmp.path());
        run(&["check", copy.to_str().unwrap(), "--out", b.to_str().unwrap()], tmp.path());
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{name}");
    }
}

#[test]
fn corrupted_sigma_fails_one_file() {
    let tmp = tempfile::tempdir().unwrap();
    for name in EXAMPLES {
        fs::copy(corpus_dir().join(format!("{name}.json")), tmp.path().join(format!("{name}.json"))).unwrap();
    }
    let mut pf = problem_file("example2");
    pf.sigma = Some(vec![vec!["x'*y".into()]]);
    fs::write(tmp.path().join("example2.json"), pf.to_json()).unwrap();
    let o = run(&["corpus", tmp.path().to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("7/8 passed"), "{text}");
    let line = text.lines().find(|l| l.starts_with("example2")).unwrap();
    assert!(line.contains("FAIL"), "{line}");
}

#[test]
fn empty_corpus_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["corpus", tmp.path().to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn input_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = run(&["check", "no-such-file.json"], tmp.path());
    assert_eq!(missing.status.code(), Some(2));

    let bad_json = tmp.path().join("bad.json");
    fs::write(&bad_json, "{\n  \"name\": \"bad\",\n  \"coordinates\": [\n").unwrap();
    let o = run(&["check", bad_json.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    let mut pf = problem_file("example1");
    pf.rhs.insert("z".into(), "x + * y".into());
    let syntax = tmp.path().join("syntax.json");
    fs::write(&syntax, pf.to_json()).unwrap();
    assert_eq!(run(&["check", syntax.to_str().unwrap()], tmp.path()).status.code(), Some(2));

    let mut pf = problem_file("example1");
    pf.rhs.insert("z".into(), "x + q".into());
    let unknown = tmp.path().join("unknown.json");
    fs::write(&unknown, pf.to_json()).unwrap();
    assert_eq!(run(&["check", unknown.to_str().unwrap()], tmp.path()).status.code(), Some(2));

    let bad_tol = run(&["check", &corpus_file("example1"), "--tol", "-1"], tmp.path());
    assert_eq!(bad_tol.status.code(), Some(2));
}

#[test]
fn verification_failure_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let mut pf = problem_file("example1");
    pf.sigma = Some(vec![vec!["y'".into()]]);
    let path = tmp.path().join("wrong.json");
    fs::write(&path, pf.to_json()).unwrap();
    let o = run(&["check", path.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("result: FAIL"));
}

#[test]
fn completion_reports_ranks() {
    let o = run(&["complete", &corpus_file("example7")], &corpus_dir());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(
        stdout(&o).contains("r0 = 2, r = 3, delta = 1, theta = 1"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn symmetry_mode_from_the_command_line() {
    let o = run(&["check", &corpus_file("example3"), "--mode", "orbital"], &corpus_dir());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("orbital"), "{}", stdout(&o));
    let strict = run(&["check", &corpus_file("example3"), "--mode", "strict"], &corpus_dir());
    assert_eq!(strict.status.code(), Some(1), "{}", stdout(&strict));
    let strong = run(&["check", &corpus_file("example1"), "--mode", "strong"], &corpus_dir());
    assert_eq!(strong.status.code(), Some(1), "{}", stdout(&strong));
}

#[test]
fn csv_trajectories_are_written() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["validate", &corpus_file("example1"), "--csv", tmp.path().to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let full = fs::read_to_string(tmp.path().join("example1-full.csv")).unwrap();
    assert!(full.starts_with("t,x,y,z\n"), "{}", &full[..40.min(full.len())]);
    assert!(tmp.path().join("example1-reduced.csv").exists());
}
