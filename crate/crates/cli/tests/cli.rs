use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fairconsensus::format::{read_fcc, PcsReader};
use fairconsensus::oracle::enum_partitions;
use fairconsensus::streaming::{collect_inputs, Consistency};
use fairconsensus::{dist, Clustering};
use serde_json::Value;
use tempfile::TempDir;

fn fcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcc")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn ok_json(args: &[&str]) -> Value {
    let out = fcc(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    json(&out)
}

fn err_kind(args: &[&str]) -> String {
    let out = fcc(args);
    assert_eq!(out.status.code(), Some(1), "{args:?}");
    json(&out)["error"]["kind"].as_str().unwrap().to_string()
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn identical(dir: &TempDir) -> (PathBuf, PathBuf) {
    let (f, g) = (p(dir, "same.fcc"), p(dir, "same.pcs"));
    ok_json(&[
        "gen",
        "--n",
        "6",
        "--m",
        "5",
        "--noise",
        "0",
        "--seed",
        "2",
        "--fcc",
        s(&f),
        "--pcs",
        s(&g),
    ]);
    (f, g)
}

#[test]
fn identical_inputs_have_zero_objective() {
    let dir = TempDir::new().unwrap();
    let (f, g) = identical(&dir);
    let (_, inputs) = read_fcc(std::io::BufReader::new(std::fs::File::open(&f).unwrap())).unwrap();
    assert!(inputs.iter().all(|c| c == &inputs[0]));

    let reader = PcsReader::new(std::io::BufReader::new(std::fs::File::open(&g).unwrap())).unwrap();
    let header = reader.header().clone();
    assert_eq!(collect_inputs(&header, reader, Consistency::Reject).unwrap(), inputs);

    for args in [
        vec!["run", "--input", s(&f)],
        vec!["run", "--input", s(&g), "--mode", "stream"],
        vec!["run", "--input", s(&g), "--mode", "stream", "--k", "2"],
        vec!["oracle", "--input", s(&f)],
    ] {
        assert_eq!(ok_json(&args)["objective"], 0.0, "{args:?}");
    }
}

#[test]
fn general_stream_rejected_for_k_median() {
    let dir = TempDir::new().unwrap();
    let g = p(&dir, "g.pcs");
    ok_json(&[
        "gen",
        "--n",
        "6",
        "--m",
        "4",
        "--pcs",
        s(&g),
        "--stream-mode",
        "general",
    ]);
    assert_eq!(
        err_kind(&["run", "--input", s(&g), "--mode", "stream", "--k", "2"]),
        "capability"
    );
    assert!(ok_json(&["run", "--input", s(&g), "--mode", "stream"])["objective"].is_number());
}

#[test]
fn preset_is_echoed() {
    let dir = TempDir::new().unwrap();
    let (f, _) = identical(&dir);
    let r = ok_json(&["run", "--input", s(&f), "--preset", "paper-1to1"]);
    assert_eq!(r["preset"]["gamma"], 1.0);
    let k = r["preset"]["kmedian_ratio"].as_f64().unwrap();
    assert!((k - 3.01461).abs() < 1e-3, "{k}");
}

#[test]
fn oracle_matches_independent_enumeration() {
    let dir = TempDir::new().unwrap();
    let f = p(&dir, "small.fcc");
    ok_json(&[
        "gen",
        "--n",
        "4",
        "--m",
        "2",
        "--noise",
        "0.5",
        "--seed",
        "11",
        "--fcc",
        s(&f),
    ]);
    let (fair, inputs) = read_fcc(std::io::BufReader::new(std::fs::File::open(&f).unwrap())).unwrap();
    let colors = fair.colors().colors().to_vec();
    // Two of each color, so a fair cluster holds equally many of both.
    let is_fair = |c: &Clustering| {
        c.blocks()
            .iter()
            .all(|b| b.iter().filter(|&&v| colors[v] == 0).count() * 2 == b.len())
    };
    let best = enum_partitions(4)
        .unwrap()
        .filter(is_fair)
        .map(|c| inputs.iter().map(|x| dist(x, &c).unwrap()).sum::<u64>())
        .min()
        .unwrap();
    let r = ok_json(&["oracle", "--input", s(&f)]);
    assert_eq!(r["objective"], best as f64);
    assert_eq!(r["average"], best as f64 / 2.0);
    assert_eq!(ok_json(&["oracle", "--input", s(&f)]), r);
}

#[test]
fn argument_and_capability_errors() {
    let dir = TempDir::new().unwrap();
    let f = p(&dir, "four.fcc");
    ok_json(&["gen", "--n", "4", "--m", "3", "--fcc", s(&f)]);
    // Four points two by two admit three fair partitions.
    assert_eq!(err_kind(&["oracle", "--input", s(&f), "--k", "4"]), "argument");
    assert_eq!(
        err_kind(&["gen", "--n", "5", "--m", "2", "--fcc", s(&p(&dir, "x.fcc"))]),
        "infeasible"
    );
    assert_eq!(err_kind(&["run", "--input", s(&p(&dir, "missing.fcc"))]), "io");

    let big = p(&dir, "big.fcc");
    ok_json(&["gen", "--n", "16", "--m", "3", "--fcc", s(&big)]);
    assert_eq!(err_kind(&["oracle", "--input", s(&big)]), "capability");

    let junk = p(&dir, "junk.txt");
    std::fs::write(&junk, "hello\n").unwrap();
    assert_eq!(err_kind(&["run", "--input", s(&junk)]), "malformed");
}

#[test]
fn verify_reproduces_reported_objective() {
    let dir = TempDir::new().unwrap();
    let (f, g) = (p(&dir, "v.fcc"), p(&dir, "v.pcs"));
    ok_json(&[
        "gen",
        "--n",
        "8",
        "--m",
        "20",
        "--centers",
        "2",
        "--seed",
        "4",
        "--fcc",
        s(&f),
        "--pcs",
        s(&g),
    ]);
    for k in ["1", "2"] {
        let r = ok_json(&["run", "--input", s(&f), "--k", k, "--verify"]);
        let v = &r["verification"];
        assert_eq!(v["full_objective"], r["objective"]);
        assert_eq!(v["centers_fair"], true);
        assert!(v["ratio_vs_oracle"].as_f64().unwrap() >= 1.0);

        let r = ok_json(&[
            "run",
            "--input",
            s(&g),
            "--mode",
            "stream",
            "--k",
            k,
            "--verify",
            "--exhaustive",
        ]);
        assert_eq!(r["verification"]["full_objective"], r["objective"]);
        assert!(r["peak_stored"]["total"].as_u64().unwrap() as f64 <= r["space_budget"].as_f64().unwrap());
    }
}

#[test]
fn report_file_and_timing() {
    let dir = TempDir::new().unwrap();
    let (f, _) = identical(&dir);
    let out = p(&dir, "report.json");
    let o = fcc(&["run", "--input", s(&f), "--out", s(&out)]);
    assert!(o.status.success() && o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r.get("wall_ms").is_none());
    assert!(ok_json(&["run", "--input", s(&f), "--timing"])["wall_ms"].is_number());
}

#[test]
fn bench_writes_csv() {
    let out = fcc(&["bench", "--instances", "2", "--m", "10", "--n", "6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("instance,algo,objective,ratio_vs_oracle,peak_store,millis")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(r.len(), 6);
        assert!(r[3].parse::<f64>().unwrap() >= 1.0);
        assert_eq!(r[5], "");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(fcc(&["run"]).status.code(), Some(2));
    assert_eq!(fcc(&["--help"]).status.code(), Some(0));
}
