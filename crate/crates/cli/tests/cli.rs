use std::fs;
use std::process::{Command, Output};

fn lazyball(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lazyball"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn coverage_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cov.csv");
    let o = lazyball(&[
        "coverage",
        "--er",
        "200,800",
        "--phi",
        "0.5,1",
        "--k",
        "0",
        "--seeds",
        "2",
        "--snapshots",
        "3",
        "--sample-top",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("phi,k,snapshot"));
    assert_eq!(lines.count(), 6);
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cov.json")).unwrap()).unwrap();
    assert_eq!(side["command"], "coverage");
    assert_eq!(side["config"]["seeds"], 2);
    assert_eq!(side["config"]["phi"], serde_json::json!([0.5, 1.0]));
}

#[test]
fn output_is_reproducible() {
    let args = [
        "size-mape",
        "--ba",
        "300,3,2",
        "--store",
        "kmv:16",
        "--seeds",
        "2",
        "--sample-top",
        "10",
    ];
    let a = lazyball(&args);
    let b = lazyball(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn config_errors_exit_one() {
    assert_eq!(code(&lazyball(&["coverage", "--phi", "2"])), 1);
    assert_eq!(code(&lazyball(&["coverage", "--store", "kmv:1"])), 1);
    assert_eq!(code(&lazyball(&["coverage", "--er", "10"])), 1);
    assert_eq!(
        code(&lazyball(&[
            "size-mape",
            "--store",
            "minhash:8",
            "--er",
            "50,100"
        ])),
        1
    );
    assert_eq!(
        code(&lazyball(&["coverage", "--er", "50,100", "--directed"])),
        1
    );
    assert_eq!(code(&lazyball(&["coverage", "--no-such-flag"])), 1);
    assert_eq!(code(&lazyball(&["--help"])), 0);
}

#[test]
fn io_and_parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    assert_eq!(
        code(&lazyball(&[
            "coverage",
            "--input",
            missing.to_str().unwrap()
        ])),
        2
    );
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1 2\n3\n").unwrap();
    let o = lazyball(&["coverage", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.txt:2:"));
}

#[test]
fn gen_round_trips_through_input() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let o = lazyball(&["gen", "--er", "100,300", "--out", graph.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&graph).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 300);
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(side["report"]["edges"], 300);

    let o = lazyball(&[
        "speedup",
        "--input",
        graph.to_str().unwrap(),
        "--store",
        "kmv:8",
        "--phi",
        "0.5",
        "--k",
        "0",
        "--seeds",
        "1",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("config,phi,k,time_s"));
    assert!(out.lines().nth(1).unwrap().starts_with("baseline"));
}

#[test]
fn remaining_subcommands_run() {
    for args in [
        &[
            "jaccard-mape",
            "--er",
            "200,1500",
            "--store",
            "minhash:16",
            "--seeds",
            "1",
            "--sample-top",
            "30",
            "--pair-count",
            "10",
            "--floor",
            "0.1",
        ][..],
        &[
            "centrality",
            "--er",
            "150,600",
            "--store",
            "kmv:16",
            "--seeds",
            "1",
            "--snapshots",
            "2",
        ],
        &[
            "adversarial",
            "--delta",
            "8",
            "--phi",
            "1",
            "--k",
            "0",
            "--seeds",
            "2",
        ],
        &["gamma-check", "--graph", "petersen", "--seeds", "2"],
    ] {
        let o = lazyball(args);
        assert_eq!(
            code(&o),
            0,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(o.stdout.len() > 20);
    }
}
