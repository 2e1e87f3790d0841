use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spacelike"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(config: &Path, out: &Path) -> Output {
    bin().arg("run").arg(config).arg("--out").arg(out).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bundled_scenarios_exit_zero() {
    for name in ["hyperbolic_cmc.cfg", "schwarzschild.cfg", "annulus_negative_control.cfg"] {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&scenario(name), dir.path());
        assert_eq!(o.status.code(), Some(0), "{name}:\n{}{}", stdout(&o), stderr(&o));
        assert!(dir.path().join("summary.csv").exists());
    }
}

#[test]
fn negative_control_is_expected_fail() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("annulus_negative_control.cfg"), dir.path());
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o).lines().find(|l| l.contains("annulus-angle")).unwrap().to_string();
    assert!(line.contains("EXPECTED-FAIL"), "{line}");
}

#[test]
fn scenario_outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("hyperbolic_cmc.cfg"), dir.path());
    assert_eq!(o.status.code(), Some(0));
    for f in ["cmc.csv", "cmc_graph.csv", "cmc_graph.svg", "barrier_barrier.csv", "elliptic_solution.csv"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.starts_with("task,kind,expect,status,checks,error"));
}

#[test]
fn reruns_with_same_seed_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&scenario("hyperbolic_cmc.cfg"), d.path());
        assert_eq!(o.status.code(), Some(0));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        assert_eq!(
            std::fs::read(a.path().join(&n)).unwrap(),
            std::fs::read(b.path().join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

fn run_text(text: &str) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    std::fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    (run(&cfg, &out), dir)
}

#[test]
fn missing_model_is_a_config_error() {
    let (o, _d) = run_text("[task:a]\nkind = verify\n");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1: missing [model] section"), "{}", stderr(&o));
}

#[test]
fn unknown_key_reports_its_line() {
    let (o, _d) = run_text("[model]\nprofile = euclidean\nm = 2\nbogus = 1\n[task:a]\nkind = verify\n");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn failing_check_exits_two() {
    // A flat slice whose checks all pass, but which is declared as expected to fail.
    let text = "[model]\nprofile = euclidean\nm = 2\n\
                [task:slice]\nkind = solve-graph\nh0 = 0\ns_max = 2\nnodes = 51\n\
                [task:bad]\nkind = solve-graph\nexpect = fail\nh0 = 0\ns_max = 2\nnodes = 51\n";
    let (o, _d) = run_text(text);
    assert_eq!(o.status.code(), Some(2), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("UNEXPECTED-PASS"));
}

#[test]
fn missing_config_file_exits_one() {
    let o = bin().args(["run", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_suite_exits_one() {
    let o = bin().args(["suite", "nope"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    let o = bin().args(["suite", "quick", "--tol-scale", "-1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn quick_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["suite", "quick", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("6/6 criteria passed"));
    assert!(dir.path().join("summary.csv").exists());
}
