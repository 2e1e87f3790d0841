//! Radial barriers for the mean curvature operator.
//!
//! Two constructions share one representation: a flux-like profile `f` and
//! the barrier `u0 = int_R^s (1/h) (f/h) / sqrt(1 + f^2/h^2)`, which makes
//! `h^2 u0' / sqrt(1 - h^2 u0'^2) = f` and therefore
//! `div(h^2 D u0 / sqrt(1 - h^2 |D u0|^2)) = (g^{m-1} f)' / g^{m-1}`.
//!
//! * product models over a comparison manifold with warping `k`:
//!   `f = (C / k^{m-1}) int_R^s A k^{m-1}`,
//! * the Schwarzschild exterior: `f = (C int_R^s A0 g^{m-1} + beta1) / g^{m-1}`
//!   with `A0 = m H0 h`.

use std::io::Write;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::estimates::{classify_trend, Trend};
use crate::geometry::{SchwarzschildMap, StaticModel};
use crate::numerics::{cumulative_simpson, fd_stencil, quad, quad_try, Grid};

/// Stencil width for the verification derivatives (sixth order).
const VERIFY_STENCIL: usize = 7;
use crate::report::{fmt_num, EstimateReport, GridMeta, ReportBundle};

/// Default level the barrier has to reach before the end of its grid.
pub const ESCAPE_LEVEL: f64 = 10.0;

const BARRIER_QUAD_TOL: f64 = 1e-13;

/// Warping `k` of the comparison manifold, `k'' = G k`, `k(0) = 0`, `k'(0) = 1`.
#[derive(Clone, Debug)]
pub enum ComparisonModel {
    Constant { g0: f64 },
    Radial(Arc<KTable>),
}

/// Tabulated `k, k'` for a radial `G`, evaluated by cubic Hermite
/// interpolation.
#[derive(Clone, Debug)]
pub struct KTable {
    grid: Grid,
    g: Vec<f64>,
    k: Vec<f64>,
    dk: Vec<f64>,
}

impl ComparisonModel {
    pub fn constant(g0: f64) -> Result<Self> {
        if !(g0 >= 0.0 && g0.is_finite()) {
            return Err(invalid(format!("comparison constant must be >= 0, got {g0}")));
        }
        Ok(ComparisonModel::Constant { g0 })
    }

    /// Integrates `k'' = G k` with RK4 on `n` nodes of `[0, t_max]`.
    pub fn radial(g: impl Fn(f64) -> f64, t_max: f64, n: usize) -> Result<Self> {
        let grid = Grid::uniform(0.0, t_max, n)?;
        let gs: Vec<f64> = grid.nodes().iter().map(|&t| g(t)).collect();
        if gs.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(invalid("comparison G must be finite and nonnegative"));
        }
        if gs.windows(2).any(|w| w[1] < w[0] - 1e-12 * w[0].abs().max(1.0)) {
            return Err(invalid("comparison G must be nondecreasing"));
        }
        let traj = crate::numerics::ode_solve(|t, y| vec![y[1], g(t) * y[0]], &[0.0, 1.0], &grid)?;
        let k = traj.iter().map(|y| y[0]).collect();
        let dk = traj.iter().map(|y| y[1]).collect();
        Ok(ComparisonModel::Radial(Arc::new(KTable { grid, g: gs, k, dk })))
    }

    /// `(k(t), k'(t))`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            ComparisonModel::Constant { g0 } => {
                if *g0 == 0.0 {
                    (t, 1.0)
                } else {
                    let a = g0.sqrt();
                    ((a * t).sinh() / a, (a * t).cosh())
                }
            }
            ComparisonModel::Radial(tab) => tab.eval(t),
        }
    }

    pub fn k(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// `G(t)`; linear interpolation for tabulated models.
    pub fn g_at(&self, t: f64) -> f64 {
        match self {
            ComparisonModel::Constant { g0 } => *g0,
            ComparisonModel::Radial(tab) => {
                crate::numerics::SampledFunction { grid: tab.grid.clone(), values: tab.g.clone() }.interp(t)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ComparisonModel::Constant { g0 } => format!("G0={g0}"),
            ComparisonModel::Radial(_) => "G radial".into(),
        }
    }
}

impl KTable {
    fn eval(&self, t: f64) -> (f64, f64) {
        let x = self.grid.nodes();
        let i = x.partition_point(|&v| v <= t).clamp(1, x.len() - 1) - 1;
        let h = x[i + 1] - x[i];
        let u = (t - x[i]) / h;
        let (p0, p1, m0, m1) = (self.k[i], self.k[i + 1], self.dk[i] * h, self.dk[i + 1] * h);
        let (u2, u3) = (u * u, u * u * u);
        let val = (2.0 * u3 - 3.0 * u2 + 1.0) * p0 + (u3 - 2.0 * u2 + u) * m0 + (-2.0 * u3 + 3.0 * u2) * p1 + (u3 - u2) * m1;
        let der = ((6.0 * u2 - 6.0 * u) * p0 + (3.0 * u2 - 4.0 * u + 1.0) * m0 + (-6.0 * u2 + 6.0 * u) * p1 + (3.0 * u2 - 2.0 * u) * m1) / h;
        (val, der)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BarrierKind {
    Product,
    Schwarzschild,
}

/// A sampled barrier on `[R, s_max]`.
#[derive(Clone, Debug)]
pub struct BarrierFunction {
    pub kind: BarrierKind,
    pub m: usize,
    /// Inner radius `R`, where `u0 = 0`.
    pub inner: f64,
    /// Radius `r` where `u0 <= level` is required.
    pub outer: f64,
    pub level: f64,
    pub c: f64,
    pub beta1: f64,
    pub escape_level: f64,
    pub grid: Grid,
    /// Right-hand side `A` at the nodes.
    pub a: Vec<f64>,
    pub f: Vec<f64>,
    pub u0: Vec<f64>,
    increments: Vec<f64>,
    h: Vec<f64>,
    f_mid: Vec<f64>,
    h_mid: Vec<f64>,
    probes: Vec<EstimateReport>,
    pub notes: Vec<String>,
}

/// `u0'` from `f`: `(1/h) (f/h) / sqrt(1 + (f/h)^2)`.
fn barrier_slope(f: f64, h: f64) -> f64 {
    let q = f / h;
    q / (h * (1.0 + q * q).sqrt())
}

/// `u0` at the nodes and its Simpson increments over each interval.
fn integrate_barrier(grid: &Grid, f: &[f64], h: &[f64], f_mid: &[f64], h_mid: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nodes: Vec<f64> = f.iter().zip(h).map(|(&f, &h)| barrier_slope(f, h)).collect();
    let mids: Vec<f64> = f_mid.iter().zip(h_mid).map(|(&f, &h)| barrier_slope(f, h)).collect();
    let u0 = cumulative_simpson(grid, &nodes, &mids, 0);
    let x = grid.nodes();
    let inc = (0..x.len() - 1)
        .map(|i| (x[i + 1] - x[i]) / 6.0 * (nodes[i] + 4.0 * mids[i] + nodes[i + 1]))
        .collect();
    (u0, inc)
}

/// First derivative of a cumulative sum from its increments. Each stencil
/// sees values re-summed from its own first node, which keeps the rounding
/// at the size of the increments rather than of `u0`.
fn derivative_from_increments(x: &[f64], inc: &[f64]) -> Vec<f64> {
    let n = x.len();
    let width = VERIFY_STENCIL;
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let mut local = Vec::with_capacity(width);
            let mut acc = 0.0;
            local.push(0.0);
            for d in &inc[start..start + width - 1] {
                acc += d;
                local.push(acc);
            }
            crate::numerics::fd_weights(x[i], &x[start..start + width], 1)
                .iter()
                .zip(&local)
                .map(|(w, v)| w * v)
                .sum()
        })
        .collect()
}

impl BarrierFunction {
    pub fn outer_index(&self) -> usize {
        self.grid.node_index(self.outer).expect("outer radius is a grid node")
    }

    pub fn u_at_outer(&self) -> f64 {
        self.u0[self.outer_index()]
    }

    /// First node where `u0` reaches the escape level.
    pub fn escape_radius(&self) -> Option<f64> {
        self.u0
            .iter()
            .position(|&u| u >= self.escape_level)
            .map(|i| self.grid.nodes()[i])
    }

    /// Multiplies `f` (and `C`, `beta1`) by `factor` and re-integrates `u0`.
    pub fn with_flux_scale(&self, factor: f64) -> Self {
        let mut b = self.clone();
        for v in b.f.iter_mut().chain(b.f_mid.iter_mut()) {
            *v *= factor;
        }
        b.c *= factor;
        b.beta1 *= factor;
        (b.u0, b.increments) = integrate_barrier(&b.grid, &b.f, &b.h, &b.f_mid, &b.h_mid);
        b.notes.push(format!("flux scaled by {factor}"));
        b
    }

    /// The slice `u = 0` (with `f = 0`, `C = 0`) on the same data.
    pub fn slice(&self) -> Self {
        let mut b = self.with_flux_scale(0.0);
        b.notes.push("slice u = 0".into());
        b
    }

    pub fn probes(&self) -> &[EstimateReport] {
        &self.probes
    }

    /// Writes `s,f,u0,residual` using the residual from `verify_barrier`.
    pub fn write_csv<W: Write>(&self, model: &StaticModel, out: W) -> Result<()> {
        let resid = divergence_residual(self, model)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "f", "u0", "residual"])?;
        for i in 0..self.grid.len() {
            w.write_record([
                fmt_num(self.grid.nodes()[i]),
                fmt_num(self.f[i]),
                fmt_num(self.u0[i]),
                fmt_num(resid[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_radii(inner: f64, outer: f64, s_max: f64, nodes: usize) -> Result<Grid> {
    if !(inner > 0.0 && outer > inner && s_max > outer) {
        return Err(invalid(format!("need 0 < R < r < s_max, got R={inner}, r={outer}, s_max={s_max}")));
    }
    Grid::piecewise_uniform(&[inner, outer, s_max], nodes)
}

/// Product-model barrier: `f_C = (C / k^{m-1}) int_R^s A k^{m-1}` with
/// `C = min(1, eps / ((r - R) max_{[R,r]} f_1))`.
#[allow(clippy::too_many_arguments)]
pub fn build_barrier_prod0(
    m: usize,
    cmp: &ComparisonModel,
    inner: f64,
    outer: f64,
    eps: f64,
    a: &dyn Fn(f64) -> f64,
    s_max: f64,
    nodes: usize,
) -> Result<BarrierFunction> {
    if m < 2 {
        return Err(invalid("m must be at least 2"));
    }
    if !(eps > 0.0) {
        return Err(invalid(format!("barrier level must be positive, got {eps}")));
    }
    let grid = check_radii(inner, outer, s_max, nodes)?;
    let x = grid.nodes().to_vec();
    let mids = grid.midpoints();
    let pow = m as i32 - 1;
    for &s in x.iter().chain(&mids) {
        let v = a(s);
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("A must be positive, got {v} at s = {s}")));
        }
    }
    let density = |t: f64| a(t) * cmp.k(t).powi(pow);
    let mut integral = vec![0.0; x.len()];
    let mut integral_mid = vec![0.0; mids.len()];
    for i in 1..x.len() {
        integral_mid[i - 1] = integral[i - 1] + quad(density, x[i - 1], mids[i - 1], BARRIER_QUAD_TOL)?;
        integral[i] = integral_mid[i - 1] + quad(density, mids[i - 1], x[i], BARRIER_QUAD_TOL)?;
    }
    let ratio: Vec<f64> = x.iter().zip(&integral).map(|(&s, &i)| i / cmp.k(s).powi(pow)).collect();
    let ratio_mid: Vec<f64> = mids.iter().zip(&integral_mid).map(|(&s, &i)| i / cmp.k(s).powi(pow)).collect();
    let max_ratio = x
        .iter()
        .zip(&ratio)
        .chain(mids.iter().zip(&ratio_mid))
        .filter(|(&s, _)| s <= outer)
        .map(|(_, &v)| v)
        .fold(0.0_f64, f64::max);
    let c = (eps / ((outer - inner) * max_ratio)).min(1.0);
    let f: Vec<f64> = ratio.iter().map(|v| c * v).collect();
    let f_mid: Vec<f64> = ratio_mid.iter().map(|v| c * v).collect();
    let h = vec![1.0; x.len()];
    let h_mid = vec![1.0; mids.len()];
    let (u0, increments) = integrate_barrier(&grid, &f, &h, &f_mid, &h_mid);
    let a_nodes: Vec<f64> = x.iter().map(|&s| a(s)).collect();

    let tail_start = 3 * x.len() / 4;
    let tail_min = ratio[tail_start..].iter().copied().fold(f64::INFINITY, f64::min);
    let probe = EstimateReport::lower_bound("probe-liminf-ratio", tail_min, 0.0, 0.0)
        .with_note(format!("min of (1/k^(m-1)) int A k^(m-1) over s in [{}, {}]", fmt_num(x[tail_start]), fmt_num(s_max)))
        .with_note("numerical proxy for a liminf over the whole end");
    Ok(BarrierFunction {
        kind: BarrierKind::Product,
        m,
        inner,
        outer,
        level: eps,
        c,
        beta1: 0.0,
        escape_level: ESCAPE_LEVEL,
        grid,
        a: a_nodes,
        f,
        u0,
        increments,
        h,
        f_mid,
        h_mid,
        probes: vec![probe],
        notes: vec![format!("comparison {}; C = {}", cmp.describe(), fmt_num(c))],
    })
}

/// Asymptotic value of `f_1` for constant `A = m H0` and `k = sinh(sqrt(G0) t)/sqrt(G0)`.
pub fn prod0_asymptotic_flux(m: usize, h0: f64, g0: f64) -> f64 {
    m as f64 * h0 / ((m as f64 - 1.0) * g0.sqrt())
}

/// Schwarzschild barrier between `rho1` and `rho2` with level `beta`.
///
/// `C = 1`; `beta1 = 0` when that already gives `u0(r) <= beta`, otherwise
/// the `beta1 < 0` closest to zero that does (found by bisection).
#[allow(clippy::too_many_arguments)]
pub fn build_barrier_schwarzschild(
    mu: f64,
    m: usize,
    rho1: f64,
    rho2: f64,
    beta: f64,
    h0: f64,
    s_max: f64,
    nodes: usize,
) -> Result<BarrierFunction> {
    let map = SchwarzschildMap::new(mu, m)?;
    if !(rho1 > map.horizon_radius() && rho2 > rho1) {
        return Err(invalid(format!(
            "need rho_S = {} < rho1 < rho2, got rho1={rho1}, rho2={rho2}",
            map.horizon_radius()
        )));
    }
    if !(h0 > 0.0) {
        return Err(invalid(format!("H0 must be positive, got {h0}")));
    }
    let model = StaticModel::schwarzschild(mu, m)?;
    let inner = map.s_of_rho(rho1)?;
    let outer = map.s_of_rho(rho2)?;
    let grid = check_radii(inner, outer, s_max, nodes)?;
    let x = grid.nodes().to_vec();
    let mids = grid.midpoints();
    let pow = m as i32 - 1;
    let mf = m as f64;
    let point = |s: f64| -> Result<(f64, f64)> {
        let p = model.eval(s)?;
        Ok((p.warp.h, p.profile.g))
    };
    let density = |t: f64| -> Result<f64> {
        let (h, g) = point(t)?;
        Ok(mf * h0 * h * g.powi(pow))
    };
    let mut integral = vec![0.0; x.len()];
    let mut integral_mid = vec![0.0; mids.len()];
    for i in 1..x.len() {
        integral_mid[i - 1] = integral[i - 1] + quad_try(density, x[i - 1], mids[i - 1], BARRIER_QUAD_TOL)?;
        integral[i] = integral_mid[i - 1] + quad_try(density, mids[i - 1], x[i], BARRIER_QUAD_TOL)?;
    }
    let (mut h, mut gm) = (Vec::with_capacity(x.len()), Vec::with_capacity(x.len()));
    for &s in &x {
        let (hh, g) = point(s)?;
        h.push(hh);
        gm.push(g.powi(pow));
    }
    let (mut h_mid, mut gm_mid) = (Vec::with_capacity(mids.len()), Vec::with_capacity(mids.len()));
    for &s in &mids {
        let (hh, g) = point(s)?;
        h_mid.push(hh);
        gm_mid.push(g.powi(pow));
    }
    let c = 1.0;
    let k_outer = grid.node_index(outer).expect("outer radius is a node");
    let profile = |beta1: f64| -> (Vec<f64>, Vec<f64>) {
        let f = integral.iter().zip(&gm).map(|(i, g)| (c * i + beta1) / g).collect();
        let fm = integral_mid.iter().zip(&gm_mid).map(|(i, g)| (c * i + beta1) / g).collect();
        (f, fm)
    };
    let u_outer = |beta1: f64| -> f64 {
        let (f, fm) = profile(beta1);
        integrate_barrier(&grid, &f, &h, &fm, &h_mid).0[k_outer]
    };
    let mut notes = Vec::new();
    let beta1 = if u_outer(0.0) <= beta {
        0.0
    } else {
        let floor = -quad_try(|s| Ok(1.0 / point(s)?.0), inner, outer, 1e-10)?;
        if beta <= floor {
            return Err(Error::Infeasible(format!(
                "u0(rho2) > -{} for every beta1 at C = 1, so beta = {beta} cannot be met; \
                 raise beta or move rho2 inward",
                fmt_num(-floor)
            )));
        }
        let mut lo = -1.0;
        while u_outer(lo) > beta {
            lo *= 2.0;
            if lo < -1e15 {
                return Err(Error::Infeasible(format!("no beta1 gives u0(rho2) <= {beta}")));
            }
        }
        let mut hi = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if u_outer(mid) <= beta {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * lo.abs().max(1.0) {
                break;
            }
        }
        notes.push(format!("beta1 chosen by bisection so that u0(rho2) <= beta = {beta}"));
        lo
    };
    let (f, f_mid) = profile(beta1);
    let (u0, increments) = integrate_barrier(&grid, &f, &h, &f_mid, &h_mid);
    let a_nodes: Vec<f64> = h.iter().map(|hh| mf * h0 * hh).collect();
    notes.push(format!("C = 1, beta1 = {}", fmt_num(beta1)));

    let mut probes = Vec::new();
    probes.push(schwarzschild_lapse_probe(&map, rho1)?);
    let tail_start = 3 * x.len() / 4;
    let tail_min = (tail_start..x.len())
        .map(|i| (c * integral[i] + beta1) / (h[i] * gm[i]))
        .fold(f64::INFINITY, f64::min);
    probes.push(
        EstimateReport::lower_bound("probe-liminf-flux", tail_min, 0.0, 0.0)
            .with_note("min of (C int A0 g^(m-1) + beta1) / (h g^(m-1)) over the last quarter of the grid"),
    );
    Ok(BarrierFunction {
        kind: BarrierKind::Schwarzschild,
        m,
        inner,
        outer,
        level: beta,
        c,
        beta1,
        escape_level: ESCAPE_LEVEL,
        grid,
        a: a_nodes,
        f,
        u0,
        increments,
        h,
        f_mid,
        h_mid,
        probes,
        notes,
    })
}

/// Divergence of `int_{rho1}^X dt / V(t)` probed on `[rho1, 1e4 rho1]`.
fn schwarzschild_lapse_probe(map: &SchwarzschildMap, rho1: f64) -> Result<EstimateReport> {
    let x_max = 1e4 * rho1;
    let radii: Vec<f64> = (0..=40).map(|i| rho1 * 10f64.powf(4.0 * i as f64 / 40.0)).collect();
    let mut running = vec![0.0];
    for w in radii.windows(2) {
        let piece = quad(|t| 1.0 / map.lapse_sq(t), w[0], w[1], 1e-10 * (w[1] - w[0]))?;
        running.push(running.last().unwrap() + piece);
    }
    let total = *running.last().unwrap();
    let trend = classify_trend(&radii[1..], &running[1..]);
    let scale = 10.0 * x_max.ln();
    let mut r = EstimateReport::lower_bound("probe-lapse-divergence", total, scale, 0.0)
        .with_note(format!("int dt/V over [{}, {}], trend {}", fmt_num(rho1), fmt_num(x_max), trend.as_str()));
    if trend != Trend::Diverging {
        r.verdict = crate::report::Verdict::Fail;
    }
    Ok(r)
}

/// `(g^{m-1} Phi)' / g^{m-1} - A` with `Phi = h^2 u' / sqrt(1 - h^2 u'^2)`,
/// recomputed from the sampled `u0` and the model by finite differences.
pub fn divergence_residual(b: &BarrierFunction, model: &StaticModel) -> Result<Vec<f64>> {
    let x = b.grid.nodes();
    let du = derivative_from_increments(x, &b.increments);
    let mut gm = Vec::with_capacity(x.len());
    let mut flux = Vec::with_capacity(x.len());
    for (i, &s) in x.iter().enumerate() {
        let p = model.eval(s)?;
        let h = p.warp.h;
        let q = h * du[i];
        if q.abs() >= 1.0 {
            return Err(Error::NonSpacelike { s, value: q.abs() });
        }
        let g = p.profile.g.powi(b.m as i32 - 1);
        gm.push(g);
        flux.push(g * h * h * du[i] / (1.0 - q * q).sqrt());
    }
    let dflux = fd_stencil(x, &flux, 1, VERIFY_STENCIL);
    Ok((0..x.len()).map(|i| dflux[i] / gm[i] - b.a[i]).collect())
}

/// Checks `u0(R) = 0`, `u0(r) <= level`, the divergence inequality, the
/// defining ODE of `f`, spacelikeness and escape, plus the recorded probes.
pub fn verify_barrier(b: &BarrierFunction, model: &StaticModel, tol: f64) -> Result<ReportBundle> {
    if model.m() != b.m {
        return Err(invalid("model dimension differs from the barrier's"));
    }
    let meta = GridMeta::of(&b.grid);
    let x = b.grid.nodes();
    let mut out = ReportBundle::new("barrier verification");
    out.push(EstimateReport::equality("barrier-anchor", b.u0[0], 0.0, 1e-12).with_grid(meta));
    out.push(EstimateReport::upper_bound("barrier-level", b.u_at_outer(), b.level, 1e-12).with_grid(meta));

    let resid = divergence_residual(b, model)?;
    let worst = resid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let at = resid.iter().position(|&r| r == worst).unwrap_or(0);
    out.push(
        EstimateReport::upper_bound("barrier-divergence", worst, 0.0, tol)
            .with_grid(meta)
            .with_note(format!("max residual at s = {}", fmt_num(x[at]))),
    );

    let df = fd_stencil(x, &b.f, 1, VERIFY_STENCIL);
    let mut ode = 0.0_f64;
    for (i, &s) in x.iter().enumerate() {
        let p = model.eval(s)?;
        let lhs = df[i] + (b.m as f64 - 1.0) * p.profile.dg / p.profile.g * b.f[i];
        ode = ode.max((lhs - b.c * b.a[i]).abs() / (1.0 + (b.c * b.a[i]).abs()));
    }
    out.push(EstimateReport::upper_bound("barrier-ode", ode, 0.0, 1e-8).with_grid(meta));

    let du = derivative_from_increments(x, &b.increments);
    let mut steep = 0.0_f64;
    for (i, &s) in x.iter().enumerate() {
        steep = steep.max(model.h(s)? * du[i].abs());
    }
    let mut sp = EstimateReport::upper_bound("barrier-spacelike", steep, 1.0, 0.0).with_grid(meta);
    if steep >= 1.0 {
        sp.verdict = crate::report::Verdict::Fail;
    }
    out.push(sp);

    let top = b.u0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut esc = EstimateReport::lower_bound("barrier-escape", top, b.escape_level, 0.0).with_grid(meta);
    if let Some(s) = b.escape_radius() {
        esc = esc.with_note(format!("escape level reached at s = {}", fmt_num(s)));
    }
    out.push(esc);
    for p in &b.probes {
        out.push(p.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadialBase;
    use approx::assert_abs_diff_eq;

    fn hyperbolic() -> StaticModel {
        StaticModel::product(RadialBase::hyperbolic(2, 1.0).unwrap())
    }

    #[test]
    fn prod0_reference_values() {
        let cmp = ComparisonModel::constant(1.0).unwrap();
        let b = build_barrier_prod0(2, &cmp, 1.0, 2.0, 100.0, &|_| 1.0, 30.0, 4000).unwrap();
        assert_eq!(b.c, 1.0);
        let i2 = b.grid.node_index(2.0).unwrap();
        assert_abs_diff_eq!(b.f[i2], (2f64.cosh() - 1f64.cosh()) / 2f64.sinh(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.u0[i2], 0.3237, epsilon = 1e-2);
        let rep = verify_barrier(&b, &hyperbolic(), 1e-7).unwrap();
        assert!(rep.all_passed(), "{}", rep.to_text());
    }

    #[test]
    fn level_forces_small_c() {
        let cmp = ComparisonModel::constant(1.0).unwrap();
        let b = build_barrier_prod0(2, &cmp, 1.0, 2.0, 0.1, &|_| 1.0, 30.0, 2000).unwrap();
        assert!(b.c < 1.0);
        assert!(b.u_at_outer() <= 0.1);
    }

    #[test]
    fn corrupted_flux_fails_divergence() {
        let cmp = ComparisonModel::constant(1.0).unwrap();
        let b = build_barrier_prod0(2, &cmp, 1.0, 2.0, 100.0, &|_| 1.0, 30.0, 2000).unwrap();
        let bad = b.with_flux_scale(1.5 / b.c);
        let rep = verify_barrier(&bad, &hyperbolic(), 1e-7).unwrap();
        assert!(!rep.get("barrier-divergence").unwrap().passed());
    }

    #[test]
    fn slice_is_subsolution_without_escape() {
        let cmp = ComparisonModel::constant(1.0).unwrap();
        let b = build_barrier_prod0(2, &cmp, 1.0, 2.0, 100.0, &|_| 1.0, 30.0, 2000).unwrap().slice();
        let rep = verify_barrier(&b, &hyperbolic(), 1e-7).unwrap();
        assert!(rep.get("barrier-divergence").unwrap().passed());
        assert!(!rep.get("barrier-escape").unwrap().passed());
    }

    #[test]
    fn radial_comparison_matches_constant() {
        let tab = ComparisonModel::radial(|_| 1.0, 10.0, 2001).unwrap();
        let (k, dk) = tab.eval(3.3);
        assert_abs_diff_eq!(k, 3.3f64.sinh(), epsilon = 1e-9);
        assert_abs_diff_eq!(dk, 3.3f64.cosh(), epsilon = 1e-8);
        let (k0, dk0) = tab.eval(1e-9);
        assert_abs_diff_eq!(k0, 1e-9, epsilon = 1e-15);
        assert_abs_diff_eq!(dk0, 1.0, epsilon = 1e-10);
        assert!(ComparisonModel::radial(|t| 1.0 - t, 1.0, 11).is_err());
    }

    #[test]
    fn rejects_bad_data() {
        let cmp = ComparisonModel::constant(1.0).unwrap();
        assert!(build_barrier_prod0(2, &cmp, 1.0, 2.0, 0.1, &|s| 1.0 - s, 30.0, 200).is_err());
        assert!(build_barrier_prod0(2, &cmp, 2.0, 1.0, 0.1, &|_| 1.0, 30.0, 200).is_err());
    }

    #[test]
    fn schwarzschild_barrier_reference() {
        let map = SchwarzschildMap::new(1.0, 3).unwrap();
        let s30 = map.s_of_rho(30.0).unwrap();
        let b = build_barrier_schwarzschild(1.0, 3, 3.0, 6.0, 0.1, 0.2, s30 + 10.0, 3000).unwrap();
        assert!(b.u_at_outer() <= 0.1 + 1e-12);
        let i30 = b.grid.nearest(s30);
        assert!(b.u0[i30] > 2.0);
        let model = StaticModel::schwarzschild(1.0, 3).unwrap();
        let rep = verify_barrier(&b, &model, 1e-7).unwrap();
        assert!(rep.all_passed(), "{}", rep.to_text());
    }

    #[test]
    fn schwarzschild_infeasible_level() {
        let r = build_barrier_schwarzschild(1.0, 3, 3.0, 6.0, -50.0, 0.2, 40.0, 500);
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }
}
