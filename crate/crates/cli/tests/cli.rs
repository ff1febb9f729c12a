use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use adaptive_smc::automaton::library;
use adaptive_smc::io::to_hoa;
use serde_json::Value;

fn smc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaptive-smc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const REACH: &[&str] = &["check-reach", "--gen", "fig1:3", "--goal", "goal", "--epsilon", "0.01"];

#[test]
fn check_reach_decides_and_replays() {
    let args = [REACH, &["--p", "0.4", "--seed", "7"]].concat();
    let first = smc(&args);
    let report = json(&first);
    assert_eq!(report["decision"], "H0");
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["seed"], 7);
    assert!(report["n_samples"].as_u64().unwrap() > 0);
    assert_eq!(smc(&args).stdout, first.stdout);
    let threaded = smc(&[args.as_slice(), &["--threads", "3"]].concat());
    assert_eq!(threaded.stdout, first.stdout);

    let high = json(&smc(&[REACH, &["--p", "0.6"]].concat()));
    assert_eq!(high["decision"], "H1");
}

#[test]
fn input_errors_exit_one() {
    let out = smc(&[REACH, &["--p", "0.4", "--delta", "0.02"]].concat());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta"));

    // fig1 has 0.01 transitions, so 0.5 is not a lower bound
    let out = smc(&[REACH, &["--p", "0.4", "--pmin", "0.5"]].concat());
    assert_eq!(out.status.code(), Some(1));

    let out = smc(&["check-reach", "--gen", "fig1:3", "--goal", "nope", "--p", "0.4", "--epsilon", "0.01"]);
    assert_eq!(out.status.code(), Some(1));

    let out = smc(&["exact", "bsccs", "--gen", "fig9:1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn diverged_exits_two() {
    let out = smc(&[
        "check-reach", "--gen", "fig3:18", "--goal", "goal", "--p", "0.5", "--epsilon", "0.1", "--max-steps", "50",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let tra = dir.path().join("m.tra");
    let lab = dir.path().join("m.lab");
    fs::write(&tra, "2 2\n0 1 1\n1 1 oops\n").unwrap();
    fs::write(&lab, "0=\"goal\"\n1: 0\n").unwrap();
    let out = smc(&["exact", "reach", "--tra", path_str(&tra), "--lab", path_str(&lab), "--goal", "goal"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("m.tra") && err.contains("line 3"), "{err}");
}

#[test]
fn check_ltl_trivial_automata() {
    let dir = tempfile::tempdir().unwrap();
    for (name, dra, want) in [
        ("all.hoa", library::universal("goal"), "H0"),
        ("none.hoa", library::empty("goal"), "H1"),
    ] {
        let hoa = dir.path().join(name);
        fs::write(&hoa, to_hoa(&dra)).unwrap();
        let args = [
            "check-ltl", "--gen", "random:6,3,1", "--hoa", path_str(&hoa), "--p", "0.5", "--epsilon", "0.05",
        ];
        let out = smc(&args);
        assert_eq!(json(&out)["decision"], want);
        assert_eq!(smc(&args).stdout, out.stdout);
    }
}

#[test]
fn estimate_mp_intervals() {
    let args = [
        "estimate-mp", "--gen", "fig4:10,2", "--n-samples", "200", "--mperr", "0.1", "--delta", "0.05", "--seed", "3",
    ];
    let out = smc(&args);
    let report = json(&out);
    let iv = &report["interval"];
    let (lo, hi) = (iv["lo"].as_f64().unwrap(), iv["hi"].as_f64().unwrap());
    assert!(lo <= 0.5 && 0.5 <= hi, "[{lo}, {hi}]");
    assert_eq!(iv["mperr"], 0.1);
    assert_eq!(report["n_samples"], 200);
    assert_eq!(smc(&args).stdout, out.stdout);

    let dir = tempfile::tempdir().unwrap();
    let p = |ext: &str| dir.path().join(format!("one.{ext}"));
    fs::write(p("tra"), "1 1\n0 0 1\n").unwrap();
    fs::write(p("lab"), "0=\"init\"\n0: 0\n").unwrap();
    fs::write(p("rew"), "0 1\n").unwrap();
    let report = json(&smc(&[
        "estimate-mp", "--tra", path_str(&p("tra")), "--lab", path_str(&p("lab")), "--rew", path_str(&p("rew")),
        "--n-samples", "20",
    ]));
    assert_eq!(report["interval"]["hi"], 1.0);
    assert!(report["interval"]["lo"].as_f64().unwrap() < 1.0);
}

#[test]
fn exact_inventories() {
    for (family, want) in [("fig3:16", "1, 1"), ("fig4:1000,5", "2, 5"), ("fig1:5", "2, 2")] {
        let out = smc(&["exact", "bsccs", "--gen", family]);
        assert_eq!(json(&out)["summary"], want, "{family}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(want));
    }
    let reach = json(&smc(&["exact", "reach", "--gen", "fig1:3", "--goal", "goal"]));
    assert!((reach["probability"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let mp = json(&smc(&["exact", "mp", "--gen", "fig4:5,2"]));
    assert!((mp["mean_payoff"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn gen_writes_parseable_files() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("fig3");
    let out = smc(&["gen", "fig3:1", "--out", path_str(&prefix)]);
    assert_eq!(json(&out)["n_transitions"], 3);
    let tra = fs::read_to_string(dir.path().join("fig3.tra")).unwrap();
    assert_eq!(tra.lines().count(), 1 + 3);

    let again = dir.path().join("again");
    smc(&["gen", "fig3:1", "--out", path_str(&again)]);
    assert_eq!(fs::read(dir.path().join("again.tra")).unwrap(), tra.as_bytes());

    let prefix = dir.path().join("r");
    json(&smc(&["gen", "random:7,3,5", "--out", path_str(&prefix)]));
    let file = |ext: &str| dir.path().join(format!("r.{ext}")).to_str().unwrap().to_string();
    let from_files = smc(&[
        "exact", "mp", "--tra", &file("tra"), "--lab", &file("lab"), "--rew", &file("rew"), "--init", &file("init"),
    ]);
    let from_gen = smc(&["exact", "mp", "--gen", "random:7,3,5"]);
    assert_eq!(json(&from_files), json(&from_gen));
}

#[test]
fn baseline_underestimates_deep_chain() {
    let report = json(&smc(&["baseline", "--gen", "fig3:18", "--goal", "goal", "--p-term", "0.001", "--n-samples", "200"]));
    assert!(report["estimate"].as_f64().unwrap() < 0.5);
    assert_eq!(report["property"], "baseline");

    let out = smc(&["baseline", "--gen", "fig1:3", "--goal", "goal", "--p-term", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
}
