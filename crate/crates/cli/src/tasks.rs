//! Scenario tasks: each one writes its artifacts and returns its checks.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spacelike::barrier::{build_barrier_prod0, build_barrier_schwarzschild, verify_barrier, ComparisonModel};
use spacelike::elliptic::{
    comparison_check, newton_solve, strongmax_probe, write_solution, DirichletProblem, MeshOperator, NewtonOptions,
};
use spacelike::estimates::{
    angle_bound_check, angle_machine_step1, bishop_gromov_check, cheeger_profile, cosh_lower_estimate_check,
    flux_identity_check, growth_diagnostics, lambda1_estimate, log_volume_identity_check, tail_angle_check,
    weighted_volumes, weighted_volumes_annulus, AngleMachineParams,
};
use spacelike::geometry::{bakry_emery_floor, spacetime_ricci, RadialProfile};
use spacelike::graph::{gauge_consistency_check, oracle_catenoid, solve_radial_graph};
use spacelike::report::fmt_num;
use spacelike::svg::LinePlot;
use spacelike::tensor::{coercivity_gap, pseudo_jacobi_gap, sample_ball_pair, sample_grad_hess, static_riemann};
use spacelike::{Anchor, EstimateReport, Grid, MeanCurvSpec, RadialGraph, StaticModel};

use crate::config::{ConfigError, Section, TaskConfig};
use crate::status::Check;
use crate::suite::{run_suite, write_suite, SuiteName, SuiteOptions};

/// Why a task could not produce checks.
#[derive(Debug)]
pub enum TaskError {
    Config(ConfigError),
    Compute(spacelike::Error),
}

impl std::fmt::Display for TaskError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaskError::Config(e) => write!(f, "{e}"),
            TaskError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for TaskError {}

impl From<ConfigError> for TaskError {
    fn from(e: ConfigError) -> Self {
        TaskError::Config(e)
    }
}

impl From<spacelike::Error> for TaskError {
    fn from(e: spacelike::Error) -> Self {
        TaskError::Compute(e)
    }
}

impl From<std::io::Error> for TaskError {
    fn from(e: std::io::Error) -> Self {
        TaskError::Compute(e.into())
    }
}

type TaskResult = Result<Vec<Check>, TaskError>;

pub struct TaskContext<'a> {
    pub model: Option<&'a StaticModel>,
    pub out_dir: &'a Path,
    pub seed: u64,
    pub tol_scale: f64,
}

impl TaskContext<'_> {
    fn model(&self, sec: &Section) -> Result<&StaticModel, TaskError> {
        self.model.ok_or_else(|| TaskError::Config(ConfigError { line: sec.line, msg: "task needs a [model] section".into() }))
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, TaskError> {
        Ok(BufWriter::new(File::create(self.out_dir.join(name))?))
    }
}

fn cfg_err(sec: &Section, key: &str, msg: impl Into<String>) -> TaskError {
    let line = sec.entry(key).map_or(sec.line, |e| e.line);
    TaskError::Config(ConfigError { line, msg: msg.into() })
}

pub fn run_task(task: &TaskConfig, ctx: &TaskContext) -> TaskResult {
    let sec = &task.section;
    let checks = match task.kind.as_str() {
        "solve-graph" => solve_graph(task, ctx),
        "barrier" => barrier(task, ctx),
        "verify" => verify(sec, ctx),
        "estimates" => estimates(task, ctx),
        "growth" => growth(sec, ctx),
        "angle-bound" => angle_bound(task, ctx),
        "elliptic" => elliptic(task, ctx),
        "suite" => suite(task, ctx),
        other => Err(cfg_err(sec, "kind", format!("unknown task kind `{other}`"))),
    }?;
    Ok(checks
        .into_iter()
        .map(|c| Check { report: c.report.rescaled(ctx.tol_scale), expect: c.expect })
        .collect())
}

const GRAPH_KEYS: &[&str] = &["h0", "anchor", "s0", "flux0", "tau0", "s_min", "s_max", "rho_min", "rho_max", "nodes"];

fn with_common<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut keys = vec!["kind", "expect"];
    keys.extend_from_slice(extra);
    keys
}

/// Grid and anchor from the common graph keys.
fn build_graph(sec: &Section, model: &StaticModel) -> Result<RadialGraph, TaskError> {
    let (s_min, s_max) = interval(sec, model)?;
    let nodes = sec.usize_or("nodes", 1001)?;
    let grid = Grid::uniform(s_min, s_max, nodes).map_err(|e| cfg_err(sec, "nodes", e.to_string()))?;
    let tau0 = sec.f64_or("tau0", 0.0)?;
    let default_anchor = if model.base.is_pole_anchored() && s_min == 0.0 { "pole" } else { "flux" };
    let anchor = match sec.str_or("anchor", default_anchor) {
        "pole" => Anchor::PoleRegular { tau0 },
        "flux" => Anchor::Flux { s0: sec.f64_or("s0", s_min)?, flux0: sec.f64_or("flux0", 0.0)?, tau0 },
        other => return Err(cfg_err(sec, "anchor", format!("anchor must be pole or flux, got `{other}`"))),
    };
    let spec = MeanCurvSpec::Constant(sec.f64_or("h0", 0.0)?);
    Ok(solve_radial_graph(model, &spec, anchor, &grid)?)
}

/// `[s_min, s_max]`, given either directly or, on Schwarzschild bases, as
/// areal radii `rho_min`, `rho_max`.
fn interval(sec: &Section, model: &StaticModel) -> Result<(f64, f64), TaskError> {
    let (lo, hi) = model.base.domain();
    let from_rho = |key: &str| -> Result<Option<f64>, TaskError> {
        let Some(rho) = sec.f64_opt(key)? else { return Ok(None) };
        match &model.base.profile {
            RadialProfile::Schwarzschild(map) => Ok(Some(map.s_of_rho(rho).map_err(|e| cfg_err(sec, key, e.to_string()))?)),
            _ => Err(cfg_err(sec, key, format!("`{key}` needs profile = schwarzschild"))),
        }
    };
    let s_min = match from_rho("rho_min")? {
        Some(v) => v,
        None => sec.f64_or("s_min", lo)?,
    };
    let s_max = match (from_rho("rho_max")?, sec.f64_opt("s_max")?) {
        (Some(v), _) | (None, Some(v)) => v,
        (None, None) if hi.is_finite() => hi,
        _ => return Err(cfg_err(sec, "s_max", "unbounded domain: set `s_max`")),
    };
    Ok((s_min, s_max))
}

fn graph_plot(g: &RadialGraph, title: &str) -> String {
    LinePlot::new(title, "s", "value")
        .series("cosh theta", g.grid.nodes(), &g.cosh_theta)
        .series("tau", g.grid.nodes(), &g.tau)
        .render()
}

fn snap(grid: &Grid, s: f64) -> f64 {
    grid.nodes()[grid.nearest(s)]
}

fn solve_graph(task: &TaskConfig, ctx: &TaskContext) -> TaskResult {
    let sec = &task.section;
    sec.only(&with_common(&[GRAPH_KEYS, &["radii", "g0", "gauge_tol", "flux_tol"]].concat()))?;
    let model = ctx.model(sec)?;
    let g = build_graph(sec, model)?;
    g.write_csv(ctx.create(&format!("{}_graph.csv", task.name))?)?;
    std::fs::write(ctx.out_dir.join(format!("{}_graph.svg", task.name)), graph_plot(&g, &task.name))?;

    let mut out = vec![Check::pass(gauge_consistency_check(&g, sec.f64_or("gauge_tol", 1e-5)?)?)];
    let (a, b) = (g.grid.first(), g.grid.last());
    let default_radii = [a + 0.25 * (b - a), a + 0.5 * (b - a), b];
    let flux_tol = sec.f64_or("flux_tol", 1e-8)?;
    for r in sec.list_or("radii", &default_radii)? {
        let r = snap(&g.grid, r);
        out.push(Check::pass(flux_identity_check(&g, a, r, flux_tol)?.renamed(format!("flux-identity@{}", fmt_num(r)))));
        if g.is_pole_regular() && r > 0.0 {
            let inner = snap(&g.grid, 0.5 * r);
            for rep in cosh_lower_estimate_check(&g, inner, r, flux_tol)?.reports {
                let name = format!("{}@{}", rep.check, fmt_num(r));
                out.push(Check::pass(rep.renamed(name)));
            }
        }
    }
    let h0 = sec.f64_or("h0", 0.0)?;
    if h0 != 0.0 && g.is_pole_regular() {
        let g0 = match sec.f64_opt("g0")? {
            Some(v) => v,
            None => bakry_emery_floor(model, &g.grid)?,
        };
        if g0 > 0.0 {
            out.push(Check::pass(tail_angle_check(&g, h0.abs(), g0)?));
        }
    }
    Ok(out)
}

fn barrier(task: &TaskConfig, ctx: &TaskContext) -> TaskResult {
    let sec = &task.section;
    sec.only(&with_common(&[
        "variant", "g0", "inner", "outer", "eps", "a", "h0", "rho1", "rho2", "beta", "s_max", "nodes", "tol",
    ]))?;
    let model = ctx.model(sec)?;
    let nodes = sec.usize_or("nodes", 3000)?;
    let b = match sec.str_or("variant", "prod0") {
        "prod0" => {
            let g0 = sec.f64_or("g0", 1.0)?;
            let cmp = ComparisonModel::constant(g0).map_err(|e| cfg_err(sec, "g0", e.to_string()))?;
            let a = sec.f64_or("a", model.m() as f64 * sec.f64_or("h0", 0.5)?)?;
            build_barrier_prod0(
                model.m(),
                &cmp,
                sec.f64_req("inner")?,
                sec.f64_req("outer")?,
                sec.f64_req("eps")?,
                &move |_| a,
                sec.f64_req("s_max")?,
                nodes,
            )?
        }
        "schwarzschild" => {
            let RadialProfile::Schwarzschild(map) = &model.base.profile else {
                return Err(cfg_err(sec, "variant", "schwarzschild barrier needs profile = schwarzschild"));
            };
            let rho2 = sec.f64_req("rho2")?;
            let s_max = match sec.f64_opt("s_max")? {
                Some(v) => v,
                None => map.s_of_rho(10.0 * rho2)?,
            };
            build_barrier_schwarzschild(
                map.mass(),
                map.dim(),
                sec.f64_req("rho1")?,
                rho2,
                sec.f64_req("beta")?,
                sec.f64_req("h0")?,
                s_max,
                nodes,
            )?
        }
        other => return Err(cfg_err(sec, "variant", format!("variant must be prod0 or schwarzschild, got `{other}`"))),
    };
    b.write_csv(model, ctx.create(&format!("{}_barrier.csv", task.name))?)?;
    let plot = LinePlot::new(&task.name, "s", "value").series("u0", b.grid.nodes(), &b.u0).series("f", b.grid.nodes(), &b.f);
    std::fs::write(ctx.out_dir.join(format!("{}_barrier.svg", task.name)), plot.render())?;
    Ok(verify_barrier(&b, model, sec.f64_or("tol", 1e-7)?)?.reports.into_iter().map(Check::pass).collect())
}

fn verify(sec: &Section, ctx: &TaskContext) -> TaskResult {
    sec.only(&with_common(&["radii", "samples", "vacuum"]))?;
    let model = ctx.model(sec)?;
    let (lo, hi) = model.base.domain();
    let hi = if hi.is_finite() { hi } else { lo + 10.0 };
    let default: Vec<f64> = (1..=10).map(|k| lo + (hi - lo) * k as f64 / 11.0).collect();
    let radii = sec.list_or("radii", &default)?;
    let (mut contraction, mut symmetry, mut vacuum) = (0.0_f64, 0.0_f64, 0.0_f64);
    let m = model.m();
    for &s in &radii {
        let frame = static_riemann(model, s)?;
        let ric = frame.ricci();
        let r = spacetime_ricci(model, s)?;
        let scale = 1.0 + r.rr.abs().max(r.tt.abs()).max(r.time_frame.abs());
        let d = (ric.get(0, 0) - r.rr).abs().max((ric.get(1, 1) - r.tt).abs()).max((ric.get(m, m) - r.time_frame).abs());
        contraction = contraction.max(d / scale);
        symmetry = symmetry.max(frame.riemann.symmetry_defect());
        vacuum = vacuum.max(r.rr.abs().max(r.tt.abs()).max(r.time_frame.abs()));
    }
    let mut out = vec![
        Check::pass(EstimateReport::upper_bound("riemann-contraction", contraction, 0.0, 1e-9)),
        Check::pass(EstimateReport::upper_bound("riemann-symmetries", symmetry, 0.0, 1e-12)),
    ];
    let vacuum_wanted = match sec.str_or("vacuum", "auto") {
        "auto" => matches!(model.base.profile, RadialProfile::Schwarzschild(_)),
        "true" => true,
        "false" => false,
        other => return Err(cfg_err(sec, "vacuum", format!("vacuum must be auto, true or false, got `{other}`"))),
    };
    if vacuum_wanted {
        out.push(Check::pass(EstimateReport::upper_bound("vacuum", vacuum, 0.0, 1e-8)));
    }

    let samples = sec.usize_or("samples", 1000)?;
    if samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let alpha = 1.0 / (m as f64 - 1.0);
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            worst = worst.min(pseudo_jacobi_gap(&sample_grad_hess(&mut rng, m, alpha, 2.0))?);
        }
        out.push(Check::pass(EstimateReport::lower_bound("pseudo-jacobi", worst, 0.0, 1e-10)));
        let mut excess = f64::INFINITY;
        for _ in 0..samples {
            let (x, y) = sample_ball_pair(&mut rng, m, 0.999);
            let d: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            excess = excess.min(coercivity_gap(&x, &y)? - d);
        }
        out.push(Check::pass(EstimateReport::lower_bound("coercivity-quantified", excess, 0.0, 1e-12)));
    }
    Ok(out)
}

fn estimates(task: &TaskConfig, ctx: &TaskContext) -> TaskResult {
    let sec = &task.section;
    sec.only(&with_common(&["radii", "cmp_g0", "r_max", "r_trunc", "mesh", "tol"]))?;
    let model = ctx.model(sec)?;
    let (lo, _) = model.base.domain();
    let radii = sec.list_or("radii", &[1.0, 2.0, 4.0, 8.0])?;
    if !radii.windows(2).all(|w| w[1] > w[0]) || !radii.iter().all(|&r| r > lo) {
        return Err(cfg_err(sec, "radii", format!("radii must increase and exceed {}", fmt_num(lo))));
    }
    let tol = sec.f64_or("tol", 1e-8)?;
    let table = if model.base.is_pole_anchored() {
        weighted_volumes(model, &radii)?
    } else {
        weighted_volumes_annulus(model, lo, &radii)?
    };
    let mut w = csv::Writer::from_writer(ctx.create(&format!("{}_volumes.csv", task.name))?);
    w.write_record(["r", "vol", "bvol", "ratio"]).map_err(spacelike::Error::from)?;
    for (i, r) in table.ratio().iter().enumerate() {
        w.write_record([fmt_num(radii[i]), fmt_num(table.vol[i]), fmt_num(table.bvol[i]), fmt_num(*r)])
            .map_err(spacelike::Error::from)?;
    }
    w.flush()?;

    let mut out = Vec::new();
    for pair in radii.windows(2) {
        out.push(Check::pass(
            log_volume_identity_check(model, pair[0], pair[1], tol)?.renamed(format!("log-volume@{}", fmt_num(pair[1]))),
        ));
    }
    if let Some(g0) = sec.f64_opt("cmp_g0")? {
        let cmp = ComparisonModel::constant(g0).map_err(|e| cfg_err(sec, "cmp_g0", e.to_string()))?;
        out.push(Check::pass(bishop_gromov_check(model, &cmp, &radii, 1e-9)?));
    }
    if model.base.is_pole_anchored() {
        let r_max = sec.f64_or("r_max", *radii.last().unwrap_or(&1.0))?;
        let profile = cheeger_profile(model, r_max, 60)?;
        out.push(Check::pass(
            EstimateReport::classified("cheeger-tail", profile.tail, spacelike::Verdict::Pass).with_note(profile.assumption.clone()),
        ));
        if let Some(r_trunc) = sec.f64_opt("r_trunc")? {
            let lambda = lambda1_estimate(model, r_trunc, sec.usize_or("mesh", 2000)?)?;
            out.push(Check::pass(
                EstimateReport::lower_bound("lambda1-cheeger", lambda, 0.25 * profile.tail * profile.tail, 0.03)
                    .with_note(profile.assumption),
            ));
        }
    }
    Ok(out)
}

fn growth(sec: &Section, ctx: &TaskContext) -> TaskResult {
    sec.only(&with_common(&["r_max"]))?;
    let model = ctx.model(sec)?;
    let d = growth_diagnostics(model, sec.f64_or("r_max", 100.0)?)?;
    Ok(d.to_bundle(model.m()).reports.into_iter().map(Check::pass).collect())
}

fn angle_bound(task: &TaskConfig, ctx: &TaskContext) -> TaskResult {
    let sec = &task.section;
    sec.only(&with_common(&[GRAPH_KEYS, &["g", "t0", "radius", "c", "k"]].concat()))?;
    let model = ctx.model(sec)?;
    let g = build_graph(sec, model)?;
    g.write_csv(ctx.create(&format!("{}_graph.csv", task.name))?)?;
    let t0 = sec.f64_or("t0", 0.0)?;
    let mut out = Vec::new();
    if g.spec.is_zero() {
        let big_g = match sec.f64_opt("g")? {
            Some(v) => v,
            None => bakry_emery_floor(model, &g.grid)?,
        };
        out.push(Check::pass(angle_bound_check(&g, big_g, t0).map_err(|e| cfg_err(sec, "h0", e.to_string()))?));
    }
    if let Some(radius) = sec.f64_opt("radius")? {
        let params = AngleMachineParams { radius, c: sec.f64_req("c")?, k: sec.f64_req("k")? };
        let bundle = angle_machine_step1(&g, &params, t0).map_err(|e| cfg_err(sec, "radius", e.to_string()))?;
        out.extend(bundle.reports.into_iter().map(Check::pass));
    }
    if out.is_empty() {
        return Err(cfg_err(sec, "h0", "nothing to check: the angle bound needs h0 = 0, step 1 needs `radius`"));
    }
    Ok(out)
}

fn elliptic(task: &TaskConfig, ctx: &TaskContext) -> TaskResult {
    let sec = &task.section;
    sec.only(&with_common(&[
        "s_min", "s_max", "rho_min", "rho_max", "nodes", "h0", "left", "right", "cap", "tol", "oracle", "c", "oracle_tol",
    ]))?;
    let model = ctx.model(sec)?;
    let (s_min, s_max) = interval(sec, model)?;
    let nodes = sec.usize_or("nodes", 400)?;
    let grid = Grid::uniform(s_min, s_max, nodes).map_err(|e| cfg_err(sec, "nodes", e.to_string()))?;
    let mut op = MeshOperator::from_model(model, grid)?;
    if let Some(cap) = sec.f64_opt("cap")? {
        op = op.with_cap(cap).map_err(|e| cfg_err(sec, "cap", e.to_string()))?;
    }
    let h0 = sec.f64_or("h0", 0.0)?;
    let m = model.m() as f64;
    let hmodel = model.clone();
    let problem = DirichletProblem::from_fn(op, move |s| m * h0 * hmodel.h(s).unwrap_or(f64::NAN), sec.f64_or("left", 0.0)?, sec.f64_req("right")?)?;
    let opts = NewtonOptions { tol: sec.f64_or("tol", 1e-10)?, ..NewtonOptions::default() };
    let sol = newton_solve(&problem, &opts)?;
    write_solution(ctx.out_dir, &format!("{}_solution", task.name), &problem, &sol.solution)?;
    let u = &sol.solution.values;
    let mut out = vec![
        Check::pass(EstimateReport::upper_bound("newton-residual", sol.residual, 0.0, opts.tol).with_note(format!(
            "{} iterations, {} continuation stages",
            sol.iterations, sol.continuation_stages
        ))),
        Check::pass(EstimateReport::upper_bound("telescoping", problem.op.telescoping_defect(u, &problem.rhs)?, 0.0, 1e-12)),
    ];
    let lower: Vec<f64> = u.iter().map(|v| v - 0.1).collect();
    out.push(Check::pass(comparison_check(&problem.op, u, &lower, &problem.rhs, &problem.rhs)?));
    let shifted: Vec<f64> = u.iter().map(|v| v - u.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    if h0 == 0.0 {
        out.push(Check::pass(strongmax_probe(&problem.op, &shifted)?));
    }
    match sec.str_or("oracle", "none") {
        "none" => {}
        "catenoid" => {
            let c = sec.f64_req("c")?;
            let left = problem.left;
            let err = sol.solution.max_abs_diff(|s| left + oracle_catenoid(model.m(), c, s_min, s).unwrap_or(f64::NAN));
            out.push(Check::pass(EstimateReport::upper_bound("catenoid-oracle", err, 0.0, sec.f64_or("oracle_tol", 1e-6)?)));
        }
        other => return Err(cfg_err(sec, "oracle", format!("oracle must be none or catenoid, got `{other}`"))),
    }
    Ok(out)
}

fn suite(task: &TaskConfig, ctx: &TaskContext) -> TaskResult {
    let sec = &task.section;
    sec.only(&with_common(&["name"]))?;
    let name: SuiteName = sec.str_or("name", "quick").parse().map_err(|e: String| cfg_err(sec, "name", e))?;
    let opts = SuiteOptions { seed: ctx.seed, tol_scale: ctx.tol_scale, quick: false };
    let outcomes = run_suite(name, &opts);
    write_suite(&outcomes, &ctx.out_dir.join(&task.name))?;
    let mut out = Vec::new();
    for o in outcomes {
        let verdict = if o.passed() { spacelike::Verdict::Pass } else { spacelike::Verdict::Fail };
        out.push(Check::pass(EstimateReport::classified(format!("criterion_{:02}", o.id), o.checks.len() as f64, verdict)));
    }
    Ok(out)
}
