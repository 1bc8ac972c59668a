//! End-to-end checks of the CLI contract: exit codes, threshold parsing
//! and mine/query output parity.

use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_themetruss"))
        .args(args)
        .output()
        .expect("spawn CLI")
}

/// Triangle of three vertices sharing items 0 and 1 at frequency 1/2.
fn write_fixture(dir: &Path) -> (String, String) {
    let edges = dir.join("edges.tsv");
    let tx = dir.join("tx.tsv");
    std::fs::write(&edges, "0\t1\n0\t2\n1\t2\n").unwrap();
    let mut rows = String::new();
    for v in 0..3 {
        rows.push_str(&format!("{v}\t0,1\n{v}\t2\n"));
    }
    std::fs::write(&tx, rows).unwrap();
    (
        edges.to_string_lossy().into_owned(),
        tx.to_string_lossy().into_owned(),
    )
}

#[test]
fn usage_errors_exit_2() {
    let out = cli(&["mine", "--algo", "tcfi"]);
    assert_eq!(out.status.code(), Some(2));

    let out = cli(&["mine", "--algo", "nope", "--alpha", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.tsv");
    let tx = dir.path().join("tx.tsv");
    std::fs::write(&edges, "0\t0\n").unwrap();
    std::fs::write(&tx, "0\t1\n").unwrap();
    let out = cli(&[
        "mine",
        "--algo", "tcfi",
        "--alpha", "0",
        "--edges", edges.to_str().unwrap(),
        "--tx", tx.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("self-loop"), "stderr was: {msg}");
}

#[test]
fn oracle_guard_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.tsv");
    let tx = dir.path().join("tx.tsv");
    let mut e = String::new();
    let mut t = String::new();
    for v in 0..70u32 {
        if v > 0 {
            e.push_str(&format!("{}\t{v}\n", v - 1));
        }
        t.push_str(&format!("{v}\t0\n"));
    }
    std::fs::write(&edges, e).unwrap();
    std::fs::write(&tx, t).unwrap();
    let out = cli(&[
        "mine",
        "--algo", "brute",
        "--alpha", "0",
        "--edges", edges.to_str().unwrap(),
        "--tx", tx.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn infeasible_gen_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "gen",
        "--vertices", "10",
        "--edges", "3",
        "--seeds", "2",
        "--items", "5",
        "--rng-seed", "1",
        "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn fraction_and_decimal_alpha_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, tx) = write_fixture(dir.path());
    let run = |alpha: &str| {
        let out = cli(&[
            "mine",
            "--algo", "tcfa",
            "--alpha", alpha,
            "--edges", &edges,
            "--tx", &tx,
        ]);
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1/4"), run("0.25"));
    assert_eq!(run("2/4"), run("0.5"));
    // at alpha = 1/4 the shared pair {0,1} (frequency 1/2) still qualifies
    let text = String::from_utf8(run("1/4")).unwrap();
    assert!(text.contains("\"pattern\":[0,1]"), "got: {text}");
}

#[test]
fn strict_epsilon_filters_everything() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, tx) = write_fixture(dir.path());
    let out = cli(&[
        "mine",
        "--algo", "tcs",
        "--alpha", "0",
        "--epsilon", "1",
        "--edges", &edges,
        "--tx", &tx,
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn mine_and_query_outputs_match() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, tx) = write_fixture(dir.path());
    let idx = dir.path().join("idx.bin");

    let mined = cli(&[
        "mine",
        "--algo", "tcfi",
        "--alpha", "1/4",
        "--edges", &edges,
        "--tx", &tx,
    ]);
    assert!(mined.status.success());

    let built = cli(&[
        "index", "build",
        "--edges", &edges,
        "--tx", &tx,
        "--out", idx.to_str().unwrap(),
    ]);
    assert!(built.status.success());

    let queried = cli(&[
        "index", "query",
        "--idx", idx.to_str().unwrap(),
        "--pattern", "all",
        "--alpha", "1/4",
        "--edges", &edges,
        "--tx", &tx,
    ]);
    assert!(queried.status.success());
    // the query stream ends with a retrieved-node-count trailer; the
    // truss records before it must match the mining output byte for byte
    let text = String::from_utf8(queried.stdout).unwrap();
    let (records, trailer) = text.rsplit_once('{').unwrap();
    assert!(trailer.starts_with("\"retrieved_nodes\":"));
    assert_eq!(String::from_utf8(mined.stdout).unwrap(), records);
}
