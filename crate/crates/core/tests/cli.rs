use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn tap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tap"))
        .args(args)
        .output()
        .expect("run tap")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn solve_p3() {
    let out = tap(&["solve", &fixture("p3.tap")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "s tap 1\nl 1 3\n");
}

#[test]
fn solve_fixture_sizes_with_root() {
    for (name, size) in [
        ("star4.tap", 2),
        ("lock.tap", 3),
        ("dtree.tap", 2),
        ("dtree4.tap", 3),
    ] {
        let out = tap(&["solve", "--root", "1", &fixture(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert!(
            stdout(&out).starts_with(&format!("s tap {size}\n")),
            "{name}"
        );
    }
}

#[test]
fn trace_and_audit_lines_go_to_stderr() {
    let out = tap(&[
        "solve",
        "--trace",
        "--audit",
        "--root",
        "1",
        &fixture("lock.tap"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<String> = stderr(&out).lines().map(str::to_string).collect();
    assert_eq!(lines[0], "k 3 2 6");
    assert_eq!(lines[1], "a ok 7 6");
    assert_eq!(lines[2], "k 1 1 4");
    assert!(lines[3].starts_with("a ok "));
    assert_eq!(stdout(&out), "s tap 3\nl 1 7\nl 3 5\nl 6 7\n");
}

#[test]
fn exact_lock() {
    let out = tap(&["exact", &fixture("lock.tap")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("s opt 3\n"));
    let limited = tap(&["exact", "--limit", "2", &fixture("lock.tap")]);
    assert_eq!(limited.status.code(), Some(3));
}

#[test]
fn verify_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.sol");
    std::fs::write(&empty, "s tap 0\n").unwrap();
    let out = tap(&["verify", &fixture("lock.tap"), empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "invalid\n");

    let good = dir.path().join("good.sol");
    std::fs::write(&good, "s tap 3\nl 5 6\nl 5 3\nl 7 1\n").unwrap();
    let out = tap(&["verify", &fixture("lock.tap"), good.to_str().unwrap()]);
    assert_eq!(stdout(&out), "valid\n");

    // covers everything but 4-3 is not an instance link
    let foreign = dir.path().join("foreign.sol");
    std::fs::write(&foreign, "s tap 3\nl 5 6\nl 4 3\nl 7 1\n").unwrap();
    let out = tap(&["verify", &fixture("lock.tap"), foreign.to_str().unwrap()]);
    assert_eq!(stdout(&out), "invalid\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let infeasible = dir.path().join("inf.tap");
    std::fs::write(&infeasible, "p tap 2 0\ne 1 2\n").unwrap();
    let out = tap(&["solve", infeasible.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("infeasible"));

    let malformed = dir.path().join("bad.tap");
    std::fs::write(&malformed, "p tap 3 1\ne 1 2\ne 2 3\ne 1 3\nl 1 3\n").unwrap();
    let out = tap(&["solve", malformed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 4"));
    assert!(stderr(&out).contains("expected 2 tree edges"));

    assert_eq!(tap(&["solve"]).status.code(), Some(3));
    assert_eq!(tap(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(tap(&["solve", "/nonexistent/x.tap"]).status.code(), Some(3));
    assert_eq!(tap(&["--help"]).status.code(), Some(0));
    assert_eq!(
        tap(&["solve", "--root", "9", &fixture("p3.tap")])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn graph_input_is_reduced() {
    let dir = tempfile::tempdir().unwrap();
    // triangles 1-2-3 and 4-5-6 joined by bridge 3-4, link 1-6 across
    let path = dir.path().join("g.tap");
    std::fs::write(
        &path,
        "p graph 6 7 2\ne 1 2\ne 2 3\ne 3 1\ne 3 4\ne 4 5\ne 5 6\ne 6 4\nl 2 1\nl 1 6\n",
    )
    .unwrap();
    let out = tap(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "s tap 1\nl 1 6\n");
    let sol = dir.path().join("g.sol");
    std::fs::write(&sol, stdout(&out)).unwrap();
    let out = tap(&["verify", path.to_str().unwrap(), sol.to_str().unwrap()]);
    assert_eq!(stdout(&out), "valid\n");
}

#[test]
fn gen_writes_parseable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.tap");
    let out = tap(&[
        "gen",
        "--nodes",
        "10",
        "--extra-links",
        "3",
        "--model",
        "binary",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let inst = tap_core::instance::parse_instance(&text).unwrap();
    assert_eq!(inst.node_count(), 10);
    assert_eq!(
        tap(&["solve", path.to_str().unwrap()]).status.code(),
        Some(0)
    );
    assert_eq!(tap(&["gen", "--model", "spiral"]).status.code(), Some(3));
}

#[test]
fn analyze_lock() {
    let out = tap(&["analyze", "--root", "1", &fixture("lock.tap")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("twins 5-6\n"), "{text}");
    assert!(text.contains("stems 4\n"), "{text}");
    assert!(text.contains("locked 5 twin 6 third 7 tree 3\n"), "{text}");
    assert!(
        text.contains("w 5-6 6-7\n") || text.contains("w 6-7 5-6\n"),
        "{text}"
    );
}

#[test]
fn bench_summary() {
    let out = tap(&[
        "bench",
        "--trials",
        "100",
        "--max-nodes",
        "10",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(fields[0], "bench");
    assert_eq!(fields[1], "100");
    let (num, den) = fields[2].split_once('/').unwrap();
    let (num, den): (u64, u64) = (num.parse().unwrap(), den.parse().unwrap());
    assert!(2 * num <= 3 * den, "{text}");
    assert_eq!(fields[3], "0");
}
