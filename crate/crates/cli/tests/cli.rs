use std::fs;
use std::process::{Command, Output};

fn cflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cflab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn measure_prints_the_exact_form() {
    let o = cflab(&["measure", "1,1", "--interval"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("log2(10/9) ≈ 0.152003"), "{text}");
    assert!(text.contains("(1/2, 2/3)"), "{text}");
}

#[test]
fn usage_errors_exit_with_2() {
    for args in [
        &["measure", ""][..],
        &["measure", "1,0"],
        &["expand", "periodic:1;", "--n", "5"],
        &["verify", "no-such-suite"],
        &["pillai", "--source", "random", "--n", "5"],
        &["subsequence", "--source", "random", "--k", "1"],
        &["pillai"],
    ] {
        assert_eq!(cflab(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn contradicted_expectation_exits_with_1() {
    let o = cflab(&["pillai", "--source", "periodic:,2", "--n", "1000", "--expect", "normal"]);
    assert_eq!(o.status.code(), Some(1));
    let o = cflab(&["pillai", "--source", "periodic:,2", "--n", "1000", "--expect", "non-normal"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn expand_lists_digits() {
    let o = cflab(&["expand", "rational:7/10", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n2\n3\n");
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# periodic control\nsource = periodic:,2\nn = 500\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = cflab(&["pillai", "--config", cfg]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["n"], 500);
    assert_eq!(doc["config"]["source"], "periodic:,2");

    let o = cflab(&["pillai", "--config", cfg, "--n", "700"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["n"], 700);
    assert_eq!(doc["report"]["verdict"], "NON_NORMAL");
}

#[test]
fn csv_reports_carry_their_parameters() {
    let o = cflab(&["pillai", "--source", "random:seed=3", "--n", "2000", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# command=pillai\n"), "{text}");
    assert!(text.contains("# source=random:seed=3\n"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("n,pattern,mode,count")), "{text}");
}

#[test]
fn verify_suites_pass() {
    for suite in ["reversal", "dominance", "pairwise", "joint-k2", "counting"] {
        let o = cflab(&["verify", suite]);
        assert_eq!(o.status.code(), Some(0), "{suite}");
        assert!(stdout(&o).starts_with(&format!("{suite}: PASS")), "{}", stdout(&o));
    }
}
