//! The bundled acceptance criteria and the `quick` subset.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spacelike::barrier::{build_barrier_prod0, build_barrier_schwarzschild, verify_barrier, ComparisonModel};
use spacelike::elliptic::{comparison_check, newton_solve, strongmax_probe, DirichletProblem, MeshOperator, NewtonOptions};
use spacelike::estimates::{
    angle_bound_check, angle_machine, angle_machine_step1, bishop_gromov_check, cheeger_profile, cosh_lower_estimate_check,
    flux_identity_check, lambda1_estimate, tail_angle_check, AngleMachineParams,
};
use spacelike::geometry::{bakry_emery_floor, spacetime_ricci, SchwarzschildMap};
use spacelike::graph::{oracle_catenoid, solve_radial_graph};
use spacelike::report::fmt_num;
use spacelike::tensor::{coercivity_gap, pseudo_jacobi_gap, sample_ball_pair, sample_grad_hess, static_riemann};
use spacelike::{Anchor, EstimateReport, Grid, MeanCurvSpec, RadialBase, RadialGraph, Result, StaticModel, Verdict, Warp};

use crate::status::{write_checks_csv, Check};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Acceptance,
    Quick,
}

impl SuiteName {
    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Acceptance => "acceptance",
            SuiteName::Quick => "quick",
        }
    }

    pub fn criteria(&self) -> &'static [usize] {
        match self {
            SuiteName::Acceptance => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12],
            SuiteName::Quick => &[1, 2, 3, 4, 9, 11],
        }
    }
}

impl FromStr for SuiteName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "acceptance" => Ok(SuiteName::Acceptance),
            "quick" => Ok(SuiteName::Quick),
            other => Err(format!("unknown suite `{other}` (expected acceptance or quick)")),
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub tol_scale: f64,
    /// Smaller random sample counts.
    pub quick: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: crate::config::DEFAULT_SEED, tol_scale: 1.0, quick: false }
    }
}

pub const TITLES: [&str; 12] = [
    "curvature engine",
    "radial solver correctness",
    "tail angle lower bound",
    "flux identity",
    "Bishop-Gromov monotonicity",
    "Cheeger constant and lambda_1",
    "barrier constructions",
    "half-space demonstrations",
    "pseudo-Jacobi and coercivity",
    "gradient estimate",
    "discrete elliptic machinery",
    "determinism",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Set when the criterion could not be evaluated at all.
    pub error: Option<String>,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.status().ok())
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.status().ok()).collect()
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut s = format!("criterion {:02} {:<4} {} ({} checks", self.id, verdict, self.title, self.checks.len());
        let bad = self.failures();
        if !bad.is_empty() {
            let names: Vec<&str> = bad.iter().map(|c| c.report.check.as_str()).collect();
            s.push_str(&format!(", failing: {}", names.join(" ")));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!(", error: {e}"));
        }
        s.push(')');
        s
    }

    pub fn csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        write_checks_csv(&self.checks, &mut buf).expect("writing to memory");
        buf
    }
}

pub fn run_criterion(id: usize, opts: &SuiteOptions) -> CriterionOutcome {
    let result = match id {
        1 => c01_curvature(opts),
        2 => c02_solver(),
        3 => c03_tail_angle(),
        4 => c04_flux_identity(),
        5 => c05_bishop_gromov(),
        6 => c06_cheeger(),
        7 => c07_barriers(),
        8 => c08_half_space(),
        9 => c09_algebra(opts),
        10 => c10_gradient(opts),
        11 => c11_elliptic(),
        12 => c12_determinism(opts),
        _ => Err(spacelike::Error::InvalidArgument(format!("no criterion {id}"))),
    };
    let title = TITLES.get(id.wrapping_sub(1)).copied().unwrap_or("unknown");
    match result {
        Ok(checks) => CriterionOutcome {
            id,
            title,
            checks: checks
                .into_iter()
                .map(|c| Check { report: c.report.rescaled(opts.tol_scale), expect: c.expect })
                .collect(),
            error: None,
        },
        Err(e) => CriterionOutcome { id, title, checks: Vec::new(), error: Some(e.to_string()) },
    }
}

/// Runs the criteria of `name` in order.
pub fn run_suite(name: SuiteName, opts: &SuiteOptions) -> Vec<CriterionOutcome> {
    let opts = SuiteOptions { quick: opts.quick || name == SuiteName::Quick, ..*opts };
    name.criteria().iter().map(|&id| run_criterion(id, &opts)).collect()
}

/// Writes `criterion_NN.csv` per criterion and `summary.csv`.
pub fn write_suite(outcomes: &[CriterionOutcome], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for o in outcomes {
        std::fs::write(dir.join(format!("criterion_{:02}.csv", o.id)), o.csv_bytes())?;
    }
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record(["criterion", "title", "status", "checks", "failing", "error"])?;
    for o in outcomes {
        let failing: Vec<&str> = o.failures().iter().map(|c| c.report.check.as_str()).collect();
        w.write_record([
            format!("{:02}", o.id),
            o.title.to_string(),
            if o.passed() { "PASS" } else { "FAIL" }.to_string(),
            o.checks.len().to_string(),
            failing.join(" "),
            o.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn hyp(m: usize) -> Result<StaticModel> {
    Ok(StaticModel::product(RadialBase::hyperbolic(m, 1.0)?))
}

fn euclid(m: usize) -> Result<StaticModel> {
    Ok(StaticModel::product(RadialBase::euclidean(m)?))
}

fn pole_graph(model: &StaticModel, h0: f64, s_max: f64, n: usize) -> Result<RadialGraph> {
    solve_radial_graph(model, &MeanCurvSpec::Constant(h0), Anchor::PoleRegular { tau0: 0.0 }, &Grid::uniform(0.0, s_max, n)?)
}

fn at(check: &str, r: f64) -> String {
    format!("{check}@{}", fmt_num(r))
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// A random static model and a point in its domain.
fn random_model_point(rng: &mut ChaCha8Rng) -> Result<(StaticModel, f64)> {
    let m = rng.gen_range(2..=6);
    let pole_point = |rng: &mut ChaCha8Rng| rng.gen_range(0.05..5.0);
    match rng.gen_range(0..4) {
        0 => Ok((euclid(m)?, pole_point(rng))),
        1 => {
            let b = rng.gen_range(0.25..4.0);
            Ok((StaticModel::product(RadialBase::hyperbolic(m, b)?), pole_point(rng)))
        }
        2 => {
            let rate = rng.gen_range(-0.5..0.5);
            let base = RadialBase::hyperbolic(m, rng.gen_range(0.25..2.0))?;
            Ok((StaticModel::new(base, Warp::Exponential { rate })?, pole_point(rng)))
        }
        _ => {
            let m = m.max(3);
            let mu = rng.gen_range(0.5..2.0);
            let map = SchwarzschildMap::new(mu, m)?;
            let rho = map.horizon_radius() * rng.gen_range(1.1..20.0);
            Ok((StaticModel::schwarzschild(mu, m)?, map.s_of_rho(rho)?))
        }
    }
}

fn c01_curvature(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let model = StaticModel::schwarzschild(1.0, 3)?;
    let map = SchwarzschildMap::new(1.0, 3)?;
    let lo = map.horizon_radius() + 0.1;
    let mut worst = 0.0_f64;
    for k in 0..20 {
        let rho = lo + (50.0 - lo) * (k as f64 + 0.5) / 20.0;
        let r = spacetime_ricci(&model, map.s_of_rho(rho)?)?;
        worst = worst.max(max_abs([r.rr, r.tt, r.time_frame, r.time_coord]));
    }
    let mut out = vec![Check::pass(
        EstimateReport::upper_bound("schwarzschild-vacuum", worst, 0.0, 1e-8).with_note("20 radii in (rho_S + 0.1, 50), mu = 1, m = 3"),
    )];

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x01);
    let (mut contraction, mut symmetry) = (0.0_f64, 0.0_f64);
    for _ in 0..50 {
        let (model, s) = random_model_point(&mut rng)?;
        let frame = static_riemann(&model, s)?;
        let ric = frame.ricci();
        let r = spacetime_ricci(&model, s)?;
        let m = model.m();
        let scale = 1.0 + max_abs([r.rr, r.tt, r.time_frame]);
        let mut diff = max_abs([ric.get(0, 0) - r.rr, ric.get(1, 1) - r.tt, ric.get(m, m) - r.time_frame]);
        for i in 0..=m {
            for j in 0..=m {
                if i != j {
                    diff = diff.max(ric.get(i, j).abs());
                }
            }
        }
        contraction = contraction.max(diff / scale);
        symmetry = symmetry.max(frame.riemann.symmetry_defect());
    }
    out.push(Check::pass(
        EstimateReport::upper_bound("riemann-contraction", contraction, 0.0, 1e-9).with_note("50 seeded model/point pairs, relative"),
    ));
    out.push(Check::pass(EstimateReport::upper_bound("riemann-symmetries", symmetry, 0.0, 1e-12)));
    Ok(out)
}

fn catenoid_error(n: usize) -> Result<f64> {
    let grid = Grid::uniform(1.0, 2.0, n)?;
    let g = solve_radial_graph(&euclid(2)?, &MeanCurvSpec::zero(), Anchor::Flux { s0: 1.0, flux0: 1.0, tau0: 0.0 }, &grid)?;
    let mut err = 0.0_f64;
    for (&s, &t) in grid.nodes().iter().zip(&g.tau) {
        err = err.max((t - oracle_catenoid(2, 1.0, 1.0, s)?).abs());
    }
    Ok(err)
}

fn c02_solver() -> Result<Vec<Check>> {
    let mut out = vec![Check::pass(EstimateReport::upper_bound("catenoid-400", catenoid_error(400)?, 0.0, 1e-6))];
    let errs = [catenoid_error(17)?, catenoid_error(33)?, catenoid_error(65)?];
    let ratio = (errs[0] / errs[1]).min(errs[1] / errs[2]);
    out.push(Check::pass(EstimateReport::lower_bound("catenoid-refinement-ratio", ratio, 8.0, 0.0).with_note(format!(
        "errors {} {} {} on 16/32/64 intervals",
        fmt_num(errs[0]),
        fmt_num(errs[1]),
        fmt_num(errs[2])
    ))));

    let h0 = 0.5;
    let g = pole_graph(&hyp(2)?, h0, 10.0, 1001)?;
    let (mut flux_err, mut w_err) = (0.0_f64, 0.0_f64);
    for (i, &s) in g.grid.nodes().iter().enumerate() {
        let exact = 2.0 * h0 * (s.cosh() - 1.0);
        flux_err = flux_err.max((g.flux[i] - exact).abs() / exact.abs().max(1.0));
        if s > 0.0 {
            w_err = w_err.max((g.flux[i] / s.sinh() - 2.0 * h0 * (0.5 * s).tanh()).abs());
        }
    }
    out.push(Check::pass(
        EstimateReport::upper_bound("cmc-flux-closed-form", flux_err, 0.0, 1e-8).with_note("F = 2 H0 (cosh s - 1), relative"),
    ));
    out.push(Check::pass(
        EstimateReport::upper_bound("cmc-w-closed-form", w_err, 0.0, 1e-8).with_note("F / sinh s = 2 H0 tanh(s/2)"),
    ));
    Ok(out)
}

fn c03_tail_angle() -> Result<Vec<Check>> {
    let model = hyp(2)?;
    let mut out = Vec::new();
    let g0 = bakry_emery_floor(&model, &Grid::uniform(0.0, 12.0, 121)?)?;
    out.push(Check::pass(EstimateReport::equality("bakry-emery-g0", g0, 0.5, 1e-12)));
    for h0 in [0.1, 0.5, 1.0] {
        let g = pole_graph(&model, h0, 12.0, 1201)?;
        let r = tail_angle_check(&g, h0, g0)?;
        out.push(Check::pass(r.clone().renamed(format!("tail-angle-h0={}", fmt_num(h0)))));
        let w_end = 2.0 * h0 * (0.5 * g.grid.last()).tanh();
        out.push(Check::pass(
            EstimateReport::equality(format!("tail-angle-closed-form-h0={}", fmt_num(h0)), r.lhs, (1.0 + w_end * w_end).sqrt(), 1e-8)
                .with_note(format!("limit sqrt(1 + 4 H0^2) = {}", fmt_num((1.0 + 4.0 * h0 * h0).sqrt()))),
        ));
        if h0 == 0.5 {
            out.push(Check::pass(EstimateReport::lower_bound("tail-margin-h0=5e-1", r.margin, 0.18, 0.0)));
        }
        for radius in [1.0, 2.0, 4.0, 8.0, 12.0] {
            for rep in cosh_lower_estimate_check(&g, 0.5, radius, 1e-8)?.reports {
                let name = format!("{}-h0={}", at(&rep.check, radius), fmt_num(h0));
                out.push(Check::pass(rep.renamed(name)));
            }
        }
    }
    Ok(out)
}

fn c04_flux_identity() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let cmc = pole_graph(&hyp(2)?, 0.5, 8.0, 801)?;
    for r in [1.0, 4.0, 8.0] {
        out.push(Check::pass(flux_identity_check(&cmc, 0.0, r, 1e-8)?.renamed(at("hyperbolic-cmc-ball", r))));
    }
    let annulus = solve_radial_graph(
        &euclid(2)?,
        &MeanCurvSpec::zero(),
        Anchor::Flux { s0: 1.0, flux0: 1.0, tau0: 0.0 },
        &Grid::uniform(1.0, 3.0, 801)?,
    )?;
    for r in [1.5, 2.0, 3.0] {
        out.push(Check::pass(flux_identity_check(&annulus, 1.0, r, 1e-8)?.renamed(at("maximal-annulus", r))));
    }
    let slice = pole_graph(&hyp(3)?, 0.0, 5.0, 501)?;
    for r in [1.0, 5.0] {
        out.push(Check::pass(flux_identity_check(&slice, 0.0, r, 1e-8)?.renamed(at("slice-ball", r))));
    }
    Ok(out)
}

fn c05_bishop_gromov() -> Result<Vec<Check>> {
    let radii: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64).collect();
    let sinh = ComparisonModel::constant(1.0)?;
    let flat = ComparisonModel::constant(0.0)?;
    Ok(vec![
        Check::pass(bishop_gromov_check(&hyp(2)?, &sinh, &radii, 1e-9)?.renamed("hyperbolic-vs-sinh")),
        Check::pass(bishop_gromov_check(&euclid(3)?, &flat, &radii, 1e-9)?.renamed("euclidean-vs-flat")),
        Check::fail(bishop_gromov_check(&hyp(2)?, &flat, &radii, 1e-9)?.renamed("hyperbolic-vs-flat-negative-control")),
    ])
}

fn c06_cheeger() -> Result<Vec<Check>> {
    let model = hyp(2)?;
    let profile = cheeger_profile(&model, 20.0, 60)?;
    let lambda = lambda1_estimate(&model, 20.0, 2000)?;
    let bound = 0.25 * profile.tail * profile.tail;
    Ok(vec![
        Check::pass(EstimateReport::equality("cheeger-tail", profile.tail, 1.0, 0.01)),
        Check::pass(
            EstimateReport::equality("lambda1-r20", lambda, 0.25, 0.02)
                .with_note("Dirichlet ball of radius 20 exceeds the limit 1/4 by about 0.0217"),
        ),
        Check::pass(EstimateReport::lower_bound("lambda1-cheeger", lambda, bound, 0.03).with_note(profile.assumption)),
    ])
}

fn prefixed(prefix: &str, bundle: spacelike::ReportBundle) -> Vec<Check> {
    bundle.reports.into_iter().map(|r| Check::pass(r.clone().renamed(format!("{prefix}/{}", r.check)))).collect()
}

fn c07_barriers() -> Result<Vec<Check>> {
    let cmp = ComparisonModel::constant(1.0)?;
    let b = build_barrier_prod0(2, &cmp, 1.0, 2.0, 0.5, &|_| 1.0, 30.0, 4000)?;
    let mut out = prefixed("hyperbolic", verify_barrier(&b, &hyp(2)?, 1e-7)?);
    let map = SchwarzschildMap::new(1.0, 3)?;
    let s30 = map.s_of_rho(30.0)?;
    let b = build_barrier_schwarzschild(1.0, 3, 3.0, 6.0, 0.1, 0.2, s30 + 10.0, 3000)?;
    out.extend(prefixed("schwarzschild", verify_barrier(&b, &StaticModel::schwarzschild(1.0, 3)?, 1e-7)?));
    Ok(out)
}

fn half_space_checks(label: &str, g: &RadialGraph, slope: f64) -> Vec<Check> {
    let s0 = g.grid.first();
    [10.0, 20.0]
        .iter()
        .map(|&span| {
            let rise = g.tau_at(s0 + 2.0 * span) - g.tau_at(s0 + span);
            Check::pass(
                EstimateReport::lower_bound(format!("{label}-rise@{}", fmt_num(span)), rise, 0.8 * span * slope, 0.0)
                    .with_note(format!("asymptotic slope {}", fmt_num(slope))),
            )
        })
        .collect()
}

fn c08_half_space() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for h0 in [0.25, 0.5] {
        let g = pole_graph(&hyp(2)?, h0, 40.0, 4001)?;
        let w = 2.0 * h0;
        out.extend(half_space_checks(&format!("hyperbolic-h0={}", fmt_num(h0)), &g, w / (1.0 + w * w).sqrt()));
    }
    let model = StaticModel::schwarzschild(1.0, 3)?;
    let s0 = SchwarzschildMap::new(1.0, 3)?.s_of_rho(3.0)?;
    let g = solve_radial_graph(
        &model,
        &MeanCurvSpec::Constant(0.2),
        Anchor::Flux { s0, flux0: 0.0, tau0: 0.0 },
        &Grid::uniform(s0, s0 + 40.0, 4001)?,
    )?;
    out.extend(half_space_checks("schwarzschild-h0=2e-1", &g, 1.0));
    Ok(out)
}

fn c09_algebra(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let (per_m, pairs) = if opts.quick { (1_000, 10_000) } else { (10_000, 100_000) };
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x09);
    for m in 2..=6 {
        let alpha = 1.0 / (m as f64 - 1.0);
        let mut worst = f64::INFINITY;
        for _ in 0..per_m {
            let pt = sample_grad_hess(&mut rng, m, alpha, 2.0);
            worst = worst.min(pseudo_jacobi_gap(&pt)?);
        }
        out.push(Check::pass(
            EstimateReport::lower_bound(format!("pseudo-jacobi-m={m}"), worst, 0.0, 1e-10)
                .with_note(format!("{per_m} seeded samples")),
        ));
    }
    let (mut gap_min, mut excess_min) = (f64::INFINITY, f64::INFINITY);
    for k in 0..pairs {
        let n = 1 + k % 6;
        let (x, y) = sample_ball_pair(&mut rng, n, 0.999);
        let gap = coercivity_gap(&x, &y)?;
        let dist: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        gap_min = gap_min.min(gap);
        excess_min = excess_min.min(gap - dist);
    }
    out.push(Check::pass(
        EstimateReport::lower_bound("coercivity", gap_min, 0.0, 0.0).with_note(format!("{pairs} seeded pairs")),
    ));
    out.push(Check::pass(
        EstimateReport::lower_bound("coercivity-quantified", excess_min, 0.0, 1e-12).with_note("gap >= |X - Y|^2"),
    ));
    let mut diag = 0.0_f64;
    for n in 1..=6 {
        let (x, _) = sample_ball_pair(&mut rng, n, 0.999);
        diag = diag.max(coercivity_gap(&x, &x)?.abs());
    }
    out.push(Check::pass(EstimateReport::equality("coercivity-equality-case", diag, 0.0, 0.0).with_note("X = Y")));
    Ok(out)
}

fn c10_gradient(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (label, model, g) in [
        ("euclidean-m2", euclid(2)?, 0.0),
        ("euclidean-m3", euclid(3)?, 0.0),
        ("hyperbolic-m2", hyp(2)?, 1.0),
        ("hyperbolic-m3", hyp(3)?, 1.0),
    ] {
        let slice = pole_graph(&model, 0.0, 6.0, 301)?;
        for t0 in [0.0, 0.5] {
            let r = angle_bound_check(&slice, g, t0)?;
            out.push(Check::pass(r.renamed(format!("slice-{label}-t0={}", fmt_num(t0)))));
        }
    }
    let model = StaticModel::product(RadialBase::hyperbolic(2, 1.0)?.with_domain(0.1, 5.0)?);
    for flux0 in [0.5, 1.0, 2.0] {
        let ann = solve_radial_graph(
            &model,
            &MeanCurvSpec::zero(),
            Anchor::Flux { s0: 0.1, flux0, tau0: 0.0 },
            &Grid::uniform(0.1, 5.0, 491)?,
        )?;
        let r = angle_bound_check(&ann, 1.0, 0.0)?;
        out.push(Check::fail(r.renamed(format!("annulus-negative-control-flux={}", fmt_num(flux0)))));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x10);
    let hyp2 = hyp(2)?;
    let (mut interior, mut step1_worst, mut lz_worst) = (0, f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..20 {
        let h0 = rng.gen_range(0.0..0.3);
        let radius = rng.gen_range(6.0..9.0);
        let u_o = rng.gen_range(0.5..2.0);
        let (lo, hi) = (2.0 / radius, 1.0 / u_o);
        let c = lo + (hi - lo) * rng.gen_range(0.1..0.9);
        let k = rng.gen_range(0.5..3.0);
        let g = pole_graph(&hyp2, h0, 10.0, 1001)?;
        let params = AngleMachineParams { radius, c, k };
        let t0 = g.tau[0] - u_o;
        angle_machine(&g, &params, t0)?;
        let b = angle_machine_step1(&g, &params, t0)?;
        if let Some(r) = b.get("step1") {
            step1_worst = step1_worst.min(r.margin);
        }
        if let Some(r) = b.get("step1-l-zeta") {
            if r.verdict != Verdict::Precondition {
                interior += 1;
                lz_worst = lz_worst.max(r.lhs);
            }
        }
    }
    out.push(Check::pass(
        EstimateReport::lower_bound("step1-margin", step1_worst, 0.0, 1e-12).with_note("20 seeded configurations"),
    ));
    if interior > 0 {
        out.push(Check::pass(
            EstimateReport::upper_bound("step1-l-zeta", lz_worst, 0.0, 1e-4)
                .with_note(format!("{interior} configurations with an interior maximum")),
        ));
    } else {
        out.push(Check::pass(EstimateReport::precondition("step1-l-zeta", "no configuration had an interior maximum")));
    }
    Ok(out)
}

/// Problems solved by the elliptic criterion.
pub fn bundled_problems() -> Result<Vec<(&'static str, DirichletProblem)>> {
    let mut out = Vec::new();
    let op = MeshOperator::from_model(&euclid(2)?, Grid::uniform(1.0, 2.0, 400)?)?;
    out.push(("catenoid", DirichletProblem::new(op, vec![0.0; 400], 0.0, oracle_catenoid(2, 1.0, 1.0, 2.0)?)?));

    let model = hyp(2)?;
    let exact = pole_graph(&model, 0.3, 3.0, 601)?;
    let grid = Grid::uniform(0.5, 3.0, 251)?;
    let op = MeshOperator::from_model(&model, grid)?;
    let (left, right) = (exact.tau_at(0.5), exact.tau_at(3.0));
    out.push(("hyperbolic-cmc", DirichletProblem::from_fn(op, |_| 2.0 * 0.3, left, right)?));

    let model = StaticModel::schwarzschild(1.0, 3)?;
    let map = SchwarzschildMap::new(1.0, 3)?;
    let (a, b) = (map.s_of_rho(3.0)?, map.s_of_rho(10.0)?);
    let op = MeshOperator::from_model(&model, Grid::uniform(a, b, 300)?)?;
    let rhs = {
        let model = model.clone();
        move |s: f64| 3.0 * 0.2 * model.h(s).unwrap_or(f64::NAN)
    };
    out.push(("schwarzschild-cmc", DirichletProblem::from_fn(op, rhs, 0.0, 0.5 * (b - a))?));

    let op = MeshOperator::from_model(&euclid(3)?, Grid::uniform(1.0, 2.0, 100)?)?;
    out.push(("steep-euclidean-m3", DirichletProblem::new(op, vec![-4.0; 100], 0.0, 0.5)?));
    Ok(out)
}

fn c11_elliptic() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let opts = NewtonOptions::default();
    for (label, p) in bundled_problems()? {
        let sol = newton_solve(&p, &opts)?;
        let u = &sol.solution.values;
        out.push(Check::pass(
            EstimateReport::upper_bound(format!("{label}/newton-residual"), sol.residual, 0.0, opts.tol).with_note(format!(
                "{} iterations, {} continuation stages",
                sol.iterations, sol.continuation_stages
            )),
        ));
        out.push(Check::pass(EstimateReport::upper_bound(
            format!("{label}/telescoping"),
            p.op.telescoping_defect(u, &p.rhs)?,
            0.0,
            1e-12,
        )));
        let lower: Vec<f64> = u.iter().map(|v| v - 0.1).collect();
        out.push(Check::pass(comparison_check(&p.op, u, &lower, &p.rhs, &p.rhs)?.renamed(format!("{label}/comparison-shifted"))));
        let mut below = p.clone();
        below.left -= 0.05;
        below.right -= 0.05;
        below.rhs = p.rhs.iter().map(|v| v + 0.05).collect();
        let v = newton_solve(&below, &opts)?.solution.values;
        // Both residuals sit at the Newton tolerance; a slightly smaller
        // right-hand side for `v` keeps the operator ordering strict.
        let rhs_v: Vec<f64> = below.rhs.iter().map(|r| r - 10.0 * opts.tol).collect();
        out.push(Check::pass(comparison_check(&p.op, u, &v, &p.rhs, &rhs_v)?.renamed(format!("{label}/comparison-solved"))));
        let mid = u.len() / 2;
        let x = p.op.grid().nodes();
        let room = 1.0 - p.op.face_steepness(u).iter().copied().fold(0.0, f64::max);
        let mut bump = u.clone();
        bump[mid] += 0.5 * room * (x[mid + 1] - x[mid]).min(x[mid] - x[mid - 1]);
        out.push(Check::precondition(
            comparison_check(&p.op, u, &bump, &p.rhs, &p.rhs)?.renamed(format!("{label}/comparison-precondition")),
        ));
    }
    let p = &bundled_problems()?[0].1;
    let flat = vec![0.0; p.op.grid().len()];
    out.push(Check::pass(strongmax_probe(&p.op, &flat)?.renamed("strongmax-constant")));
    Ok(out)
}

fn c12_determinism(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let ids = [1, 2, 4, 9, 11];
    let inner = SuiteOptions { quick: true, ..*opts };
    let mut out = Vec::new();
    for id in ids {
        let a = run_criterion(id, &inner).csv_bytes();
        let b = run_criterion(id, &inner).csv_bytes();
        let same = a == b;
        out.push(Check::pass(EstimateReport::classified(
            format!("criterion_{id:02}-bytes"),
            a.len() as f64,
            if same { Verdict::Pass } else { Verdict::Fail },
        )));
    }
    Ok(out)
}
