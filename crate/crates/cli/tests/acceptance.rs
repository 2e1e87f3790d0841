//! Acceptance gate: one PASS/FAIL line per criterion, then the assertions
//! that pin each outcome. Runs without the libtest harness so the lines are
//! always printed.

use spacelike_cli::status::Status;
use spacelike_cli::suite::{run_criterion, CriterionOutcome, SuiteOptions};

fn run(id: usize) -> CriterionOutcome {
    let o = run_criterion(id, &SuiteOptions::default());
    println!("{}", o.line());
    if std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
        for c in &o.checks {
            println!("    {:<22} {}", c.status().as_str(), c.report.summary_line());
        }
    }
    o
}

fn assert_passes(id: usize) {
    let o = run(id);
    assert!(o.passed(), "{}", o.line());
}

fn criterion_01_curvature_engine() {
    assert_passes(1);
}

fn criterion_02_solver_correctness() {
    assert_passes(2);
}

fn criterion_03_tail_angle() {
    assert_passes(3);
}

fn criterion_04_flux_identity() {
    assert_passes(4);
}

fn criterion_05_bishop_gromov() {
    assert_passes(5);
}

/// The lambda_1 clause cannot hold at r = 20: the Dirichlet eigenvalue of
/// the ball is 0.27168, 0.0217 above 1/4. The line is printed as FAIL and
/// the test pins the computed value against an independent oracle instead.
fn criterion_06_cheeger_lambda1() {
    let o = run(6);
    assert!(!o.passed());
    let failing: Vec<&str> = o.failures().iter().map(|c| c.report.check.as_str()).collect();
    assert_eq!(failing, ["lambda1-r20"]);
    let lambda = o.checks.iter().find(|c| c.report.check == "lambda1-r20").unwrap().report.lhs;
    // Shooting oracle: v'' + coth(s) v' + lambda v = 0, v(0) = 1, v'(0) = 0, v(20) = 0.
    let oracle = lowest_dirichlet_by_shooting(20.0);
    println!("    lambda1(20) = {lambda:.6}, shooting oracle {oracle:.6}");
    assert!((lambda - oracle).abs() < 2e-4, "{lambda} vs {oracle}");
    assert!((oracle - 0.25 - 0.0217).abs() < 5e-4);
}

fn shoot(lambda: f64, r: f64) -> f64 {
    // Series start away from the pole, then RK4 on (v, v').
    let s0 = 1e-4;
    let mut y = [1.0 - lambda * s0 * s0 / 4.0, -lambda * s0 / 2.0];
    let n = 200_000;
    let h = (r - s0) / n as f64;
    let f = |s: f64, y: [f64; 2]| [y[1], -y[1] / s.tanh() - lambda * y[0]];
    let mut s = s0;
    for _ in 0..n {
        let k1 = f(s, y);
        let k2 = f(s + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(s + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(s + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        y = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        s += h;
    }
    y[0]
}

fn lowest_dirichlet_by_shooting(r: f64) -> f64 {
    // v(r) changes sign across the first eigenvalue; the second sits near 0.35.
    let (mut lo, mut hi) = (0.25, 0.3);
    assert!(shoot(lo, r) > 0.0 && shoot(hi, r) < 0.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid, r) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_07_barriers() {
    assert_passes(7);
}

fn criterion_08_half_space() {
    assert_passes(8);
}

fn criterion_09_pseudo_jacobi_coercivity() {
    assert_passes(9);
}

fn criterion_10_gradient_estimate() {
    let o = run(10);
    assert!(o.passed(), "{}", o.line());
    let controls = o.checks.iter().filter(|c| c.status() == Status::ExpectedFail).count();
    assert_eq!(controls, 3);
}

fn criterion_11_elliptic() {
    let o = run(11);
    assert!(o.passed(), "{}", o.line());
    assert!(o.checks.iter().any(|c| c.status() == Status::ExpectedPrecondition));
}

fn criterion_12_determinism() {
    assert_passes(12);
    let bin = env!("CARGO_BIN_EXE_spacelike");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let status = std::process::Command::new(bin)
            .args(["suite", "acceptance", "--out"])
            .arg(d.path())
            .output()
            .unwrap();
        assert_eq!(status.status.code(), Some(2), "the lambda_1 clause keeps the suite from passing");
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 13);
    for name in names {
        let a = std::fs::read(dirs[0].path().join(&name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs between runs");
    }
    println!("    two `spacelike suite acceptance` runs are byte-identical (13 files)");
}

fn main() {
    let gates: [(&str, fn()); 12] = [
        ("criterion_01_curvature_engine", criterion_01_curvature_engine),
        ("criterion_02_solver_correctness", criterion_02_solver_correctness),
        ("criterion_03_tail_angle", criterion_03_tail_angle),
        ("criterion_04_flux_identity", criterion_04_flux_identity),
        ("criterion_05_bishop_gromov", criterion_05_bishop_gromov),
        ("criterion_06_cheeger_lambda1", criterion_06_cheeger_lambda1),
        ("criterion_07_barriers", criterion_07_barriers),
        ("criterion_08_half_space", criterion_08_half_space),
        ("criterion_09_pseudo_jacobi_coercivity", criterion_09_pseudo_jacobi_coercivity),
        ("criterion_10_gradient_estimate", criterion_10_gradient_estimate),
        ("criterion_11_elliptic", criterion_11_elliptic),
        ("criterion_12_determinism", criterion_12_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut broken = Vec::new();
    for (name, gate) in gates {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        if std::panic::catch_unwind(gate).is_err() {
            broken.push(name);
        }
    }
    if broken.is_empty() {
        println!("acceptance: all outcomes as pinned");
    } else {
        println!("acceptance: unexpected outcome in {}", broken.join(", "));
        std::process::exit(1);
    }
}
