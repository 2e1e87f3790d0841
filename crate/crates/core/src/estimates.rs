//! Weighted volume machinery, spectral and isoperimetric estimates, growth
//! diagnostics and the hyperbolic angle bounds.
//!
//! All volumes are weighted by the lapse `h`: `vol(B_r) = w int_0^r h g^{m-1}`
//! and `bvol(dB_r) = w h(r) g(r)^{m-1}` with `w` the area of the unit
//! `(m-1)`-sphere.

use crate::barrier::ComparisonModel;
use crate::error::{invalid, Error, Result};
use crate::geometry::{bakry_emery_floor, base_curvature, modified_bakry_emery, StaticModel};
use crate::graph::{MeanCurvSpec, RadialGraph};
use crate::numerics::{cumulative_simpson, quad_try, sphere_area, tridiag_solve, Grid};
use crate::report::{fmt_num, EstimateReport, ReportBundle, Verdict};

const VOL_TOL: f64 = 1e-13;

/// `h g^{m-1}` at `s`.
fn density(model: &StaticModel, s: f64) -> Result<f64> {
    let p = model.eval(s)?;
    Ok(p.warp.h * p.profile.g.powi(model.m() as i32 - 1))
}

fn integral_of_density(model: &StaticModel, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    quad_try(|s| density(model, s), a, b, VOL_TOL * (1.0 + (b - a).abs()))
}

fn require_pole(model: &StaticModel) -> Result<()> {
    if model.base.is_pole_anchored() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{} has no pole; use the annulus variants with an inner radius",
            model.base.describe()
        )))
    }
}

fn check_radii(model: &StaticModel, lo: f64, radii: &[f64]) -> Result<()> {
    let (_, hi) = model.base.domain();
    let mut prev = lo;
    for &r in radii {
        if !(r > lo && r <= hi) {
            return Err(Error::OutOfDomain { s: r, lo, hi });
        }
        if r < prev {
            return Err(invalid("radii must be sorted increasingly"));
        }
        prev = r;
    }
    Ok(())
}

/// Weighted volumes of balls (or annuli `s0 < s < r`) and their boundaries.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedVolumeTable {
    pub inner: f64,
    pub radii: Vec<f64>,
    pub vol: Vec<f64>,
    pub bvol: Vec<f64>,
}

impl WeightedVolumeTable {
    /// `bvol / vol` at each radius.
    pub fn ratio(&self) -> Vec<f64> {
        self.bvol.iter().zip(&self.vol).map(|(b, v)| b / v).collect()
    }
}

pub fn weighted_volumes(model: &StaticModel, radii: &[f64]) -> Result<WeightedVolumeTable> {
    require_pole(model)?;
    weighted_volumes_from(model, 0.0, radii)
}

/// Volumes of the annuli `{s0 < s < r}`.
pub fn weighted_volumes_annulus(model: &StaticModel, s0: f64, radii: &[f64]) -> Result<WeightedVolumeTable> {
    let (lo, _) = model.base.domain();
    if s0 < lo {
        return Err(Error::OutOfDomain { s: s0, lo, hi: model.base.domain().1 });
    }
    weighted_volumes_from(model, s0, radii)
}

fn weighted_volumes_from(model: &StaticModel, s0: f64, radii: &[f64]) -> Result<WeightedVolumeTable> {
    check_radii(model, s0, radii)?;
    let omega = sphere_area(model.m() - 1);
    let mut vol = Vec::with_capacity(radii.len());
    let mut bvol = Vec::with_capacity(radii.len());
    let (mut acc, mut prev) = (0.0, s0);
    for &r in radii {
        acc += integral_of_density(model, prev, r)?;
        prev = r;
        vol.push(omega * acc);
        bvol.push(omega * density(model, r)?);
    }
    Ok(WeightedVolumeTable { inner: s0, radii: radii.to_vec(), vol, bvol })
}

/// `int_{B_r} H h / int_{B_r} h`.
pub fn mean_h_average(model: &StaticModel, spec: &MeanCurvSpec, r: f64) -> Result<f64> {
    require_pole(model)?;
    check_radii(model, 0.0, &[r])?;
    let num = quad_try(|s| Ok(spec.eval(s) * density(model, s)?), 0.0, r, VOL_TOL * (1.0 + r))?;
    Ok(num / integral_of_density(model, 0.0, r)?)
}

fn snap(graph: &RadialGraph, s: f64) -> Result<usize> {
    graph
        .grid
        .node_index(s)
        .ok_or_else(|| invalid(format!("radius {s} is not a node of the graph grid")))
}

/// Boundary flux `g^{m-1} h^2 tau' / sqrt(1 - h^2 tau'^2)` from the sampled slope.
fn boundary_flux(graph: &RadialGraph, i: usize) -> Result<f64> {
    let s = graph.grid.nodes()[i];
    let p = graph.model.eval(s)?;
    let h = p.warp.h;
    let q = h * graph.slope[i];
    if q.abs() >= 1.0 {
        return Err(Error::NonSpacelike { s, value: q.abs() });
    }
    Ok(p.profile.g.powi(graph.m() as i32 - 1) * h * q / (1.0 - q * q).sqrt())
}

/// Balances the boundary fluxes at `s0 < s1` against `m int H h` over the
/// annulus between them (`s0 = 0` for balls on pole-regular graphs).
pub fn flux_identity_check(graph: &RadialGraph, s0: f64, s1: f64, tol: f64) -> Result<EstimateReport> {
    if !(s1 > s0) {
        return Err(invalid("flux identity needs s0 < s1"));
    }
    let (i0, i1) = (snap(graph, s0)?, snap(graph, s1)?);
    let omega = sphere_area(graph.m() - 1);
    let lhs = omega * (boundary_flux(graph, i1)? - boundary_flux(graph, i0)?);
    let mf = graph.m() as f64;
    let rhs = if graph.spec.is_zero() {
        0.0
    } else {
        omega * mf * quad_try(|s| Ok(graph.spec.eval(s) * density(&graph.model, s)?), s0, s1, VOL_TOL * (1.0 + s1))?
    };
    Ok(EstimateReport::equality("flux-identity", lhs, rhs, tol)
        .with_grid(graph.grid_meta())
        .with_note(format!("boundary radii {} and {}", fmt_num(s0), fmt_num(s1))))
}

/// `log vol(B_r) - log vol(B_R)` against `int_R^r bvol/vol`.
pub fn log_volume_identity_check(model: &StaticModel, big_r: f64, r: f64, tol: f64) -> Result<EstimateReport> {
    require_pole(model)?;
    if !(big_r > 0.0 && r >= big_r) {
        return Err(invalid("log-volume identity needs 0 < R <= r"));
    }
    check_radii(model, 0.0, &[big_r, r])?;
    if r == big_r {
        return Ok(EstimateReport::equality("log-volume-identity", 0.0, 0.0, tol));
    }
    let v_big = integral_of_density(model, 0.0, big_r)?;
    let lhs = (v_big + integral_of_density(model, big_r, r)?).ln() - v_big.ln();

    let grid = Grid::uniform(big_r, r, 2001)?;
    let x = grid.nodes();
    let mids = grid.midpoints();
    let (mut at_nodes, mut at_mids) = (Vec::with_capacity(x.len()), Vec::with_capacity(mids.len()));
    let mut v = v_big;
    at_nodes.push(density(model, x[0])? / v);
    for i in 1..x.len() {
        let vm = v + integral_of_density(model, x[i - 1], mids[i - 1])?;
        v = vm + integral_of_density(model, mids[i - 1], x[i])?;
        at_mids.push(density(model, mids[i - 1])? / vm);
        at_nodes.push(density(model, x[i])? / v);
    }
    let rhs = *cumulative_simpson(&grid, &at_nodes, &at_mids, 0).last().unwrap();
    Ok(EstimateReport::equality("log-volume-identity", lhs, rhs, tol).with_grid(crate::report::GridMeta::of(&grid)))
}

/// Monotonicity of `bvol(dB_s) / k(s)^m` along `radii`, with relative
/// decrements as the margin, plus an audit of the curvature hypothesis.
pub fn bishop_gromov_check(model: &StaticModel, cmp: &ComparisonModel, radii: &[f64], tol: f64) -> Result<EstimateReport> {
    require_pole(model)?;
    if radii.len() < 2 {
        return Err(invalid("Bishop-Gromov check needs at least two radii"));
    }
    let table = weighted_volumes(model, radii)?;
    let ratio: Vec<f64> = radii
        .iter()
        .zip(&table.bvol)
        .map(|(&s, &b)| b / cmp.k(s).powi(model.m() as i32))
        .collect();
    let (mut margin, mut worst) = (f64::INFINITY, 0);
    for i in 0..ratio.len() - 1 {
        let d = (ratio[i] - ratio[i + 1]) / ratio[i];
        if d < margin {
            margin = d;
            worst = i;
        }
    }
    let mut hypothesis = true;
    for &s in radii {
        let be = modified_bakry_emery(model, s)?;
        if be.min < -(model.m() as f64) * cmp.g_at(s) - 1e-10 {
            hypothesis = false;
        }
    }
    let audit = if hypothesis {
        format!("curvature hypothesis Ric - Hess h/h >= -m G holds at all radii ({})", cmp.describe())
    } else {
        format!("curvature hypothesis Ric - Hess h/h >= -m G fails for {}", cmp.describe())
    };
    Ok(EstimateReport::new("bishop-gromov", ratio[worst], ratio[worst + 1], margin, tol)
        .with_note(format!("worst pair at s = {} and {}", fmt_num(radii[worst]), fmt_num(radii[worst + 1])))
        .with_note(audit))
}

/// Isoperimetric ratios of balls on log-spaced radii.
#[derive(Clone, Debug, PartialEq)]
pub struct CheegerProfile {
    pub radii: Vec<f64>,
    pub ratio: Vec<f64>,
    /// Minimum over the tested radii: an upper bound for the Cheeger constant.
    pub tail: f64,
    pub assumption: String,
}

pub fn cheeger_profile(model: &StaticModel, r_max: f64, samples: usize) -> Result<CheegerProfile> {
    require_pole(model)?;
    let radii = Grid::geometric(r_max * 1e-3, r_max, samples.max(Grid::MIN_NODES))?.nodes().to_vec();
    let ratio = weighted_volumes(model, &radii)?.ratio();
    let tail = ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let assumption = match &model.base.profile {
        crate::geometry::RadialProfile::Custom(_) => {
            "custom profile: balls need not be optimal, value is an upper bound only".to_string()
        }
        _ => "balls assumed isoperimetrically optimal for this symmetric model".to_string(),
    };
    Ok(CheegerProfile { radii, ratio, tail, assumption })
}

/// Lowest eigenvalue of `-(1/w)(w v')'` on `(a, b)` with `v(b) = 0` and
/// either `v(a) = 0` or a natural condition at a pole where `w(a) = 0`.
///
/// Conservative finite differences with face weights `w(x_{i+1/2})`,
/// followed by inverse iteration on the symmetrised tridiagonal matrix.
pub fn weighted_dirichlet_eigen(w: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize, pole: bool) -> Result<f64> {
    if n < 8 || !(b > a) {
        return Err(invalid("eigenvalue problem needs n >= 8 and a < b"));
    }
    let h = (b - a) / n as f64;
    let first = if pole { 0 } else { 1 };
    let idx: Vec<usize> = (first..n).collect();
    let dim = idx.len();
    let face = |i: usize| w(a + (i as f64 + 0.5) * h);
    let mut diag = vec![0.0; dim];
    let mut off = vec![0.0; dim.saturating_sub(1)];
    let mut cell = vec![0.0; dim];
    for (k, &i) in idx.iter().enumerate() {
        let right = face(i);
        if i == 0 {
            cell[k] = w(a + 0.25 * h) * 0.5 * h;
            diag[k] = right / h;
        } else {
            cell[k] = w(a + i as f64 * h) * h;
            diag[k] = (face(i - 1) + right) / h;
        }
        if k + 1 < dim {
            off[k] = -right / h;
        }
    }
    if cell.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(invalid("weight must be positive and finite in the interior"));
    }
    let sd: Vec<f64> = (0..dim).map(|k| diag[k] / cell[k]).collect();
    let so: Vec<f64> = (0..dim.saturating_sub(1)).map(|k| off[k] / (cell[k] * cell[k + 1]).sqrt()).collect();

    let mut x = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut lambda = f64::INFINITY;
    for _ in 0..20_000 {
        let y = tridiag_solve(&so, &sd, &so, &x)?;
        let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let next = 1.0 / dot;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if (next - lambda).abs() <= 1e-13 * next.abs() {
            return Ok(next);
        }
        lambda = next;
    }
    Err(Error::NonConvergence { what: "inverse iteration", estimate: lambda })
}

/// Lowest Dirichlet eigenvalue of the weighted radial Laplacian on `B_{r_trunc}`.
pub fn lambda1_estimate(model: &StaticModel, r_trunc: f64, mesh_n: usize) -> Result<f64> {
    require_pole(model)?;
    check_radii(model, 0.0, &[r_trunc])?;
    if mesh_n < 200 {
        return Err(invalid("lambda1 estimate needs at least 200 cells"));
    }
    let w = |s: f64| density(model, s).unwrap_or(f64::NAN);
    weighted_dirichlet_eigen(&w, 0.0, r_trunc, mesh_n, true)
}

fn require_pole_graph(graph: &RadialGraph, check: &str) -> Option<EstimateReport> {
    if graph.is_pole_regular() {
        None
    } else {
        Some(EstimateReport::precondition(check, "graph is not pole-regular; balls about a pole are undefined"))
    }
}

/// `|m int_{B_s} H h|` and `int_{B_s} h` (without the sphere area).
fn mean_curvature_mass(graph: &RadialGraph, s: f64) -> Result<(f64, f64)> {
    let mf = graph.m() as f64;
    let num = if graph.spec.is_zero() {
        0.0
    } else {
        quad_try(|t| Ok(graph.spec.eval(t) * density(&graph.model, t)?), 0.0, s, VOL_TOL * (1.0 + s))?
    };
    Ok(((mf * num).abs(), integral_of_density(&graph.model, 0.0, s)?))
}

/// `m |H(B_r)| <= sqrt(cosh^2 theta* - 1) bvol/vol` with `theta*` the grid
/// maximum of the angle.
pub fn salavessa_check(graph: &RadialGraph, radii: &[f64], tol: f64) -> Result<EstimateReport> {
    if let Some(r) = require_pole_graph(graph, "salavessa") {
        return Ok(r);
    }
    if radii.is_empty() {
        return Err(invalid("no radii given"));
    }
    let sup = graph.angle_profile().sup;
    let factor = (sup * sup - 1.0).max(0.0).sqrt();
    let (mut best, mut lhs_w, mut rhs_w, mut at) = (f64::INFINITY, 0.0, 0.0, 0.0);
    for &r in radii {
        if !graph.grid.contains(r) || r <= 0.0 {
            return Err(Error::OutOfDomain { s: r, lo: graph.grid.first(), hi: graph.grid.last() });
        }
        let (mass, vol) = mean_curvature_mass(graph, r)?;
        let lhs = mass / vol;
        let rhs = factor * density(&graph.model, r)? / vol;
        if rhs - lhs < best {
            best = rhs - lhs;
            lhs_w = lhs;
            rhs_w = rhs;
            at = r;
        }
    }
    Ok(EstimateReport::new("salavessa", lhs_w, rhs_w, best, tol)
        .with_grid(graph.grid_meta())
        .with_note(format!("worst radius {}", fmt_num(at)))
        .with_note(format!("cosh theta* = {} is the grid maximum (proxy for the supremum)", fmt_num(sup))))
}

/// Boundary and integrated lower estimates for the angle over `[R, r]`.
///
/// For radial pole-regular graphs the boundary form is an identity, which is
/// reported separately as `cosh-boundary-equality`.
pub fn cosh_lower_estimate_check(graph: &RadialGraph, big_r: f64, r: f64, tol: f64) -> Result<ReportBundle> {
    let mut out = ReportBundle::new("cosh lower estimates");
    if let Some(p) = require_pole_graph(graph, "cosh-boundary") {
        out.push(p);
        return Ok(out);
    }
    if !(big_r > 0.0 && r > big_r && graph.grid.contains(r)) {
        return Err(invalid("need 0 < R < r inside the graph grid"));
    }
    let x = graph.grid.nodes();
    let sel: Vec<usize> = (0..x.len()).filter(|&i| x[i] >= big_r && x[i] <= r).collect();
    if sel.is_empty() {
        return Err(invalid("no grid nodes in [R, r]"));
    }
    let stride = sel.len().div_ceil(200).max(1);
    let (mut min_slack, mut max_abs) = (f64::INFINITY, 0.0_f64);
    let (mut worst_lhs, mut worst_rhs) = (0.0, 0.0);
    let mut min_mean = f64::INFINITY;
    let mut max_factor = 0.0_f64;
    for (j, &i) in sel.iter().enumerate() {
        let c = graph.cosh_theta[i];
        let factor = (c * c - 1.0).max(0.0).sqrt();
        max_factor = max_factor.max(factor);
        if j % stride != 0 && j + 1 != sel.len() {
            continue;
        }
        let (mass, vol) = mean_curvature_mass(graph, x[i])?;
        let lhs = factor * density(&graph.model, x[i])? / vol;
        let rhs = mass / vol;
        min_mean = min_mean.min(rhs);
        let slack = lhs - rhs;
        max_abs = max_abs.max(slack.abs());
        if slack < min_slack {
            min_slack = slack;
            worst_lhs = lhs;
            worst_rhs = rhs;
        }
    }
    out.push(EstimateReport::new("cosh-boundary", worst_lhs, worst_rhs, min_slack, tol).with_grid(graph.grid_meta()));
    out.push(
        EstimateReport::equality("cosh-boundary-equality", max_abs, 0.0, tol)
            .with_grid(graph.grid_meta())
            .with_note("maximum |slack| over sampled radii; radial graphs give equality"),
    );
    let growth = (integral_of_density(&graph.model, 0.0, r)?.ln() - integral_of_density(&graph.model, 0.0, big_r)?.ln()) / (r - big_r);
    let lhs = max_factor * growth;
    out.push(
        EstimateReport::lower_bound("cosh-integrated", lhs, min_mean, tol)
            .with_grid(graph.grid_meta())
            .with_note("min over sampled radii of m|H(B_s)| on the right"),
    );
    Ok(out)
}

/// Tail angle against the lower bound `sqrt(1 + H0^2 / G0)`.
pub fn tail_angle_check(graph: &RadialGraph, h0: f64, g0: f64) -> Result<EstimateReport> {
    if !(h0 > 0.0 && g0 > 0.0) {
        return Err(invalid("tail angle check needs H0 > 0 and G0 > 0"));
    }
    let tail = graph.angle_profile().tail;
    Ok(EstimateReport::lower_bound("tail-angle", tail, (1.0 + h0 * h0 / g0).sqrt(), 0.0)
        .with_grid(graph.grid_meta())
        .with_note("tail = maximum of cosh theta over the last quarter of the grid (proxy for the limsup)"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Diverging,
    Converging,
    Inconclusive,
}

impl Trend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::Diverging => "diverging",
            Trend::Converging => "converging",
            Trend::Inconclusive => "inconclusive",
        }
    }
}

/// Log-log slope of a positive running quantity over the last decade of
/// `radii`: above 0.05 is diverging, otherwise converging.
pub fn classify_trend(radii: &[f64], values: &[f64]) -> Trend {
    let (Some(&x1), Some(&y1)) = (radii.last(), values.last()) else {
        return Trend::Inconclusive;
    };
    let start = radii.partition_point(|&r| r < x1 / 10.0 * (1.0 - 1e-12));
    let (x0, y0) = (radii[start], values[start]);
    if !(x1 >= 9.99 * x0) || !(y0 > 0.0 && y1 > 0.0) || !(y0.is_finite() && y1.is_finite()) {
        return Trend::Inconclusive;
    }
    let slope = (y1 / y0).ln() / (x1 / x0).ln();
    if slope > 0.05 {
        Trend::Diverging
    } else {
        Trend::Converging
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthItem {
    pub name: &'static str,
    pub value: f64,
    pub trend: Trend,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthDiagnostics {
    pub r_max: f64,
    pub g0: f64,
    pub items: Vec<GrowthItem>,
}

impl GrowthDiagnostics {
    pub fn get(&self, name: &str) -> Option<&GrowthItem> {
        self.items.iter().find(|i| i.name == name)
    }

    /// One report per diagnostic; the verdict says whether the growth
    /// condition appears to hold.
    pub fn to_bundle(&self, m: usize) -> ReportBundle {
        let mut out = ReportBundle::new("growth diagnostics");
        for item in &self.items {
            let r = match item.name {
                "volume-g-bound" => {
                    let bound = m as f64 * self.g0.sqrt();
                    EstimateReport::upper_bound(item.name, item.value, bound, 0.0)
                }
                _ => {
                    let wanted = if item.name == "log-volume-quadratic" { Trend::Converging } else { Trend::Diverging };
                    let verdict = match item.trend {
                        Trend::Inconclusive => Verdict::Precondition,
                        t if t == wanted => Verdict::Pass,
                        _ => Verdict::Fail,
                    };
                    EstimateReport::classified(item.name, item.value, verdict)
                }
            };
            out.push(r.with_note(format!("value at r = {}, trend {}", fmt_num(self.r_max), item.trend.as_str())));
        }
        out
    }
}

/// Trends of `log vol/r`, `log vol/r^2`, `int dt/bvol` and `int dt/(h^2-weighted bvol)`
/// on `[r_max/1000, r_max]`. Volumes are those of the base.
pub fn growth_diagnostics(model: &StaticModel, r_max: f64) -> Result<GrowthDiagnostics> {
    require_pole(model)?;
    let radii = Grid::geometric(r_max / 1000.0, r_max, 121)?.nodes().to_vec();
    let table = weighted_volumes(model, &radii)?;
    let omega = sphere_area(model.m() - 1);
    let mut plain = Vec::with_capacity(radii.len());
    let mut sq = Vec::with_capacity(radii.len());
    let (mut acc_plain, mut acc_sq) = (0.0, 0.0);
    let pow = model.m() as i32 - 1;
    let area = |s: f64| -> Result<(f64, f64)> {
        let p = model.eval(s)?;
        let a = omega * p.profile.g.powi(pow);
        Ok((a, a * p.warp.h * p.warp.h))
    };
    plain.push(0.0);
    sq.push(0.0);
    for w in radii.windows(2) {
        let (a0, b0) = area(w[0])?;
        let scale = (w[1] - w[0]) / a0.min(b0);
        acc_plain += quad_try(|s| Ok(1.0 / area(s)?.0), w[0], w[1], 1e-10 * scale)?;
        acc_sq += quad_try(|s| Ok(1.0 / area(s)?.1), w[0], w[1], 1e-10 * scale)?;
        plain.push(acc_plain);
        sq.push(acc_sq);
    }
    let log_r: Vec<f64> = table.vol.iter().zip(&radii).map(|(v, r)| (v / omega).ln() / r).collect();
    let log_r2: Vec<f64> = table.vol.iter().zip(&radii).map(|(v, r)| (v / omega).ln() / (r * r)).collect();
    let n = radii.len() - 1;
    let items = vec![
        GrowthItem { name: "volume-g-bound", value: log_r[n], trend: classify_trend(&radii, &log_r) },
        GrowthItem { name: "log-volume-quadratic", value: log_r2[n], trend: classify_trend(&radii, &log_r2) },
        GrowthItem { name: "boundary-not-l1", value: plain[n], trend: classify_trend(&radii, &plain) },
        GrowthItem { name: "h-boundary-not-l1", value: sq[n], trend: classify_trend(&radii, &sq) },
    ];
    let grid = Grid::from_nodes(radii)?;
    Ok(GrowthDiagnostics { r_max, g0: bakry_emery_floor(model, &grid)?, items })
}

/// Relative flux variation; maximal graphs have constant flux.
fn flux_variation(graph: &RadialGraph) -> f64 {
    let f0 = graph.flux[0];
    graph.flux.iter().map(|f| (f - f0).abs()).fold(0.0, f64::max) / f0.abs().max(1.0)
}

/// `cosh theta <= exp((m-1) sqrt(2G) |tau - t0|)` on a maximal graph.
pub fn angle_bound_check(graph: &RadialGraph, g: f64, t0: f64) -> Result<EstimateReport> {
    let var = flux_variation(graph);
    if var > 1e-10 || !graph.spec.is_zero() {
        return Err(invalid(format!("graph is not maximal (flux variation {})", fmt_num(var))));
    }
    if !(g >= 0.0) {
        return Err(invalid("G must be nonnegative"));
    }
    let m = graph.m();
    let rate = (m as f64 - 1.0) * (2.0 * g).sqrt();
    let (mut margin, mut lhs, mut rhs) = (f64::INFINITY, 0.0, 0.0);
    for (c, t) in graph.cosh_theta.iter().zip(&graph.tau) {
        let bound = (rate * (t - t0).abs()).exp();
        if bound - c < margin {
            margin = bound - c;
            lhs = *c;
            rhs = bound;
        }
    }
    let mut ric_min = f64::INFINITY;
    for &s in graph.grid.nodes() {
        let k = base_curvature(&graph.model.base, s)?;
        ric_min = ric_min.min(k.ric_rr.min(k.ric_tt));
    }
    let needed = (-ric_min / (m as f64 - 1.0)).max(0.0);
    let ricci_note = if g + 1e-12 >= needed {
        format!("Ricci hypothesis holds: G = {} >= {}", fmt_num(g), fmt_num(needed))
    } else {
        format!("Ricci hypothesis fails: G = {} < {}", fmt_num(g), fmt_num(needed))
    };
    let complete_note = if graph.is_pole_regular() {
        "complete: pole-regular graph over the whole base".to_string()
    } else {
        format!(
            "incomplete: annulus graph on [{}, {}], completeness hypothesis fails",
            fmt_num(graph.grid.first()),
            fmt_num(graph.grid.last())
        )
    };
    Ok(EstimateReport::new("angle-bound", lhs, rhs, margin, 1e-12)
        .with_grid(graph.grid_meta())
        .with_note(ricci_note)
        .with_note(complete_note))
}

/// Cutoff parameters of the gradient estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleMachineParams {
    pub radius: f64,
    pub c: f64,
    pub k: f64,
}

impl AngleMachineParams {
    pub fn gamma(&self) -> f64 {
        self.c * self.radius / 2.0
    }

    pub fn delta(&self) -> f64 {
        let g = self.gamma();
        2.0 / (1.0 + g * g)
    }

    /// Checks `R > 2u(o)`, `C` in `(2/R, 1/u(o))` and `K > 0`.
    pub fn validate(&self, u_o: f64) -> Result<()> {
        if !(u_o > 0.0) {
            return Err(invalid(format!("u(o) = {u_o} must be positive")));
        }
        if !(self.radius > 2.0 * u_o) {
            return Err(invalid(format!("need R > 2u(o) = {}", fmt_num(2.0 * u_o))));
        }
        if !(self.c > 2.0 / self.radius && self.c < 1.0 / u_o) {
            return Err(invalid(format!(
                "need C in ({}, {}), got {}",
                fmt_num(2.0 / self.radius),
                fmt_num(1.0 / u_o),
                self.c
            )));
        }
        if !(self.k > 0.0) {
            return Err(invalid("need K > 0"));
        }
        Ok(())
    }
}

/// `sqrt(B) t coth(sqrt(B) t)`, extended by 1 at 0.
pub fn f0(b: f64, t: f64) -> f64 {
    let x = b.sqrt() * t;
    if x.abs() < 1e-8 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

/// Cutoff functions along a radial graph anchored at its first node `o`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleMachine {
    pub phi: Vec<f64>,
    pub eta: Vec<f64>,
    pub zeta: Vec<f64>,
    pub x0: usize,
}

pub fn angle_machine(graph: &RadialGraph, params: &AngleMachineParams, t0: f64) -> Result<AngleMachine> {
    let x = graph.grid.nodes();
    let u: Vec<f64> = graph.tau.iter().map(|t| t - t0).collect();
    params.validate(u[0])?;
    let alpha = 1.0 / (graph.m() as f64 - 1.0);
    let mut phi = Vec::with_capacity(x.len());
    for (i, &s) in x.iter().enumerate() {
        let d = s - x[0];
        let inside = d < params.radius;
        if inside && u[i] <= 0.0 {
            return Err(invalid(format!("u = tau - t0 must be positive on the ball, fails at s = {s}")));
        }
        let v = if inside { 1.0 - d * d / (params.radius * params.radius) - params.c * u[i] } else { 0.0 };
        phi.push(v.max(0.0));
    }
    let eta: Vec<f64> = phi.iter().map(|p| (params.k * p).exp_m1()).collect();
    let zeta: Vec<f64> = eta.iter().zip(&graph.cosh_theta).map(|(e, c)| e * c.powf(alpha)).collect();
    let mut x0 = 0;
    for (i, z) in zeta.iter().enumerate() {
        if *z > zeta[x0] {
            x0 = i;
        }
    }
    Ok(AngleMachine { phi, eta, zeta, x0 })
}

/// `Lv = v''(1 + Theta^2 tau'^2) + (m-1)(g'/g) v'` at node `i` by three-point
/// differences, using the even extension at a pole.
fn radial_l(graph: &RadialGraph, v: &[f64], i: usize) -> Result<f64> {
    let x = graph.grid.nodes();
    let m1 = graph.m() as f64 - 1.0;
    let theta = graph.cosh_theta[i];
    let tp = graph.slope[i];
    let stretch = 1.0 + theta * theta * tp * tp;
    if i == 0 {
        if !graph.is_pole_regular() {
            return Err(invalid("boundary maximum away from a pole"));
        }
        let h = x[1] - x[0];
        let v2 = 2.0 * (v[1] - v[0]) / (h * h);
        return Ok(v2 * stretch + m1 * v2);
    }
    if i + 1 >= x.len() {
        return Err(invalid("maximum at the outer end of the grid"));
    }
    let (hl, hr) = (x[i] - x[i - 1], x[i + 1] - x[i]);
    let d1 = (v[i + 1] - v[i]) * hl / (hr * (hl + hr)) + (v[i] - v[i - 1]) * hr / (hl * (hl + hr));
    let d2 = 2.0 * ((v[i + 1] - v[i]) / hr - (v[i] - v[i - 1]) / hl) / (hl + hr);
    let p = graph.model.eval(x[i])?;
    Ok(d2 * stretch + m1 * p.profile.dg / p.profile.g * d1)
}

/// Step-one inequality at the maximum `x0` of `zeta` and the sign of `L zeta(x0)`.
pub fn angle_machine_step1(graph: &RadialGraph, params: &AngleMachineParams, t0: f64) -> Result<ReportBundle> {
    let mach = angle_machine(graph, params, t0)?;
    let m1 = graph.m() as f64 - 1.0;
    let u_o = graph.tau[0] - t0;
    let (k, c) = (params.k, params.c);
    let factor = ((k.exp() - 1.0) / (k.exp() - (k * c * u_o).exp())).powf(m1) * (m1 * k * c * u_o).exp();
    let theta_o = graph.cosh_theta[0];
    let theta_x0 = graph.cosh_theta[mach.x0];
    let s_x0 = graph.grid.nodes()[mach.x0];
    let mut out = ReportBundle::new("angle machine, step 1");
    out.push(
        EstimateReport::upper_bound("step1", theta_o, factor * theta_x0, 1e-12)
            .with_grid(graph.grid_meta())
            .with_note(format!("x0 at s = {}, gamma = {}, delta = {}", fmt_num(s_x0), fmt_num(params.gamma()), fmt_num(params.delta()))),
    );
    let interior = mach.phi[mach.x0] > 0.0 && (mach.x0 == 0 || mach.phi[mach.x0 + 1] > 0.0);
    if interior {
        let lz = radial_l(graph, &mach.zeta, mach.x0)?;
        out.push(EstimateReport::upper_bound("step1-l-zeta", lz, 0.0, 1e-4).with_grid(graph.grid_meta()));
    } else {
        out.push(EstimateReport::precondition("step1-l-zeta", "maximum of zeta touches the support boundary"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{RadialBase, Warp};
    use crate::graph::{solve_radial_graph, Anchor};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn euclid2() -> StaticModel {
        StaticModel::product(RadialBase::euclidean(2).unwrap())
    }

    fn hyp2() -> StaticModel {
        StaticModel::product(RadialBase::hyperbolic(2, 1.0).unwrap())
    }

    fn hyp_cmc(h0: f64, s_max: f64, n: usize) -> RadialGraph {
        let grid = Grid::uniform(0.0, s_max, n).unwrap();
        solve_radial_graph(&hyp2(), &MeanCurvSpec::Constant(h0), Anchor::PoleRegular { tau0: 0.0 }, &grid).unwrap()
    }

    #[test]
    fn volume_examples() {
        let t = weighted_volumes(&euclid2(), &[1.0]).unwrap();
        assert_abs_diff_eq!(t.vol[0], PI, epsilon = 1e-12);
        assert_abs_diff_eq!(t.bvol[0], 2.0 * PI, epsilon = 1e-12);
        let t = weighted_volumes(&hyp2(), &[1.0]).unwrap();
        assert_abs_diff_eq!(t.vol[0], 2.0 * PI * (1f64.cosh() - 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(t.bvol[0], 2.0 * PI * 1f64.sinh(), epsilon = 1e-12);
        let decay = StaticModel::new(RadialBase::euclidean(2).unwrap(), Warp::Exponential { rate: -1.0 }).unwrap();
        let t = weighted_volumes(&decay, &[1.0]).unwrap();
        assert_abs_diff_eq!(t.vol[0], 2.0 * PI * (1.0 - 2.0 / 1f64.exp()), epsilon = 1e-8);
    }

    #[test]
    fn annulus_model_rejects_balls() {
        let base = RadialBase::hyperbolic(2, 1.0).unwrap().with_domain(0.1, 5.0).unwrap();
        let model = StaticModel::product(base);
        assert!(weighted_volumes(&model, &[1.0]).is_err());
        assert!(weighted_volumes_annulus(&model, 0.1, &[1.0]).is_ok());
    }

    #[test]
    fn mean_h_examples() {
        assert_abs_diff_eq!(mean_h_average(&hyp2(), &MeanCurvSpec::Constant(0.3), 2.0).unwrap(), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(mean_h_average(&euclid2(), &MeanCurvSpec::radial(|s| s), 1.0).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn flux_identity_on_cmc_ball() {
        let g = hyp_cmc(0.5, 4.0, 401);
        let r = flux_identity_check(&g, 0.0, 1.0, 1e-8).unwrap();
        assert!(r.passed(), "{}", r.summary_line());
        assert_abs_diff_eq!(r.rhs, 2.0 * PI * (1f64.cosh() - 1.0), epsilon = 1e-9);
    }

    #[test]
    fn log_volume_examples() {
        let r = log_volume_identity_check(&euclid2(), 1.0, 2.0, 1e-8).unwrap();
        assert!(r.passed());
        assert_abs_diff_eq!(r.lhs, 2.0 * 2f64.ln(), epsilon = 1e-12);
        assert!(log_volume_identity_check(&hyp2(), 1.0, 3.0, 1e-7).unwrap().passed());
        assert!(log_volume_identity_check(&hyp2(), 2.0, 2.0, 1e-7).unwrap().passed());
    }

    #[test]
    fn bishop_gromov_controls() {
        let radii: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64).collect();
        let sinh = ComparisonModel::constant(1.0).unwrap();
        let flat = ComparisonModel::constant(0.0).unwrap();
        assert!(bishop_gromov_check(&hyp2(), &sinh, &radii, 1e-9).unwrap().passed());
        assert!(bishop_gromov_check(&euclid2(), &flat, &radii, 1e-9).unwrap().passed());
        let bad = bishop_gromov_check(&hyp2(), &flat, &radii, 1e-9).unwrap();
        assert!(!bad.passed());
        assert!(bad.notes.iter().any(|n| n.contains("fails")));
    }

    #[test]
    fn cheeger_ratios() {
        let p = cheeger_profile(&hyp2(), 20.0, 60).unwrap();
        let at = |r: f64| weighted_volumes(&hyp2(), &[r]).unwrap().ratio()[0];
        assert_abs_diff_eq!(at(2.0), 1.3130353, epsilon = 1e-7);
        assert_abs_diff_eq!(at(6.0), 1.0049698, epsilon = 1e-7);
        assert!((p.tail - 1.0).abs() < 0.01);
        let e = cheeger_profile(&euclid2(), 20.0, 60).unwrap();
        assert_abs_diff_eq!(e.tail, 0.1, epsilon = 1e-9);
        let small = weighted_volumes(&hyp2(), &[1e-3]).unwrap().ratio()[0];
        assert_abs_diff_eq!(small * 1e-3, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn flat_interval_eigenvalue() {
        let l = weighted_dirichlet_eigen(&|_| 1.0, 0.0, PI, 400, false).unwrap();
        assert_abs_diff_eq!(l, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn euclidean_lambda_small() {
        let l = lambda1_estimate(&euclid2(), 40.0, 2000).unwrap();
        assert!(l <= 0.01);
        let bessel = (2.404825557695773f64 / 40.0).powi(2);
        assert_abs_diff_eq!(l, bessel, epsilon = 1e-5);
    }

    #[test]
    fn salavessa_on_cmc() {
        let g = hyp_cmc(0.5, 10.0, 1001);
        let radii: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let r = salavessa_check(&g, &radii, 1e-10).unwrap();
        assert!(r.passed(), "{}", r.summary_line());
        assert!(r.margin <= 1e-3);
    }

    #[test]
    fn cosh_chain_is_equality() {
        let g = hyp_cmc(0.5, 8.0, 801);
        let b = cosh_lower_estimate_check(&g, 0.5, 8.0, 1e-8).unwrap();
        assert!(b.all_passed(), "{}", b.to_text());
    }

    #[test]
    fn trend_classes() {
        let r: Vec<f64> = (0..=30).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        let lin: Vec<f64> = r.clone();
        let flat: Vec<f64> = r.iter().map(|x| 1.0 - (-x).exp()).collect();
        assert_eq!(classify_trend(&r, &lin), Trend::Diverging);
        assert_eq!(classify_trend(&r, &flat), Trend::Converging);
        assert_eq!(classify_trend(&r[..5], &lin[..5]), Trend::Inconclusive);
    }

    #[test]
    fn growth_examples() {
        let e = growth_diagnostics(&euclid2(), 100.0).unwrap();
        assert_eq!(e.get("boundary-not-l1").unwrap().trend, Trend::Diverging);
        let h = growth_diagnostics(&hyp2(), 100.0).unwrap();
        assert_eq!(h.get("boundary-not-l1").unwrap().trend, Trend::Converging);
        let v = h.get("volume-g-bound").unwrap().value;
        assert!((v - 1.0).abs() < 0.05 && v <= 2f64.sqrt());
        assert!(h.to_bundle(2).get("volume-g-bound").unwrap().passed());
    }

    #[test]
    fn angle_bound_slice_and_annulus() {
        let grid = Grid::uniform(0.0, 5.0, 201).unwrap();
        let slice = solve_radial_graph(&hyp2(), &MeanCurvSpec::zero(), Anchor::PoleRegular { tau0: 0.0 }, &grid).unwrap();
        assert!(angle_bound_check(&slice, 0.5, 1.0).unwrap().passed());

        let base = RadialBase::hyperbolic(2, 1.0).unwrap().with_domain(0.1, 5.0).unwrap();
        let model = StaticModel::product(base);
        let grid = Grid::uniform(0.1, 5.0, 491).unwrap();
        let ann = solve_radial_graph(&model, &MeanCurvSpec::zero(), Anchor::Flux { s0: 0.1, flux0: 1.0, tau0: 0.0 }, &grid).unwrap();
        assert_abs_diff_eq!(ann.cosh_theta[0], (1.0 + 1.0 / 0.1f64.sinh().powi(2)).sqrt(), epsilon = 1e-10);
        let r = angle_bound_check(&ann, 0.5, 0.0).unwrap();
        assert!(!r.passed());
        assert!(r.notes.iter().any(|n| n.contains("incomplete")));

        let cmc = hyp_cmc(0.3, 3.0, 101);
        assert!(angle_bound_check(&cmc, 0.5, 0.0).is_err());
    }

    #[test]
    fn step1_on_slice_and_cmc() {
        let grid = Grid::uniform(0.0, 10.0, 1001).unwrap();
        let slice = solve_radial_graph(&hyp2(), &MeanCurvSpec::zero(), Anchor::PoleRegular { tau0: 1.0 }, &grid).unwrap();
        let p = AngleMachineParams { radius: 8.0, c: 0.3, k: 2.0 };
        let b = angle_machine_step1(&slice, &p, 0.0).unwrap();
        assert!(b.all_passed(), "{}", b.to_text());

        let cmc = hyp_cmc(0.1, 10.0, 1001);
        let b = angle_machine_step1(&cmc, &p, -1.0).unwrap();
        assert!(b.get("step1").unwrap().passed());
        assert!(angle_machine_step1(&cmc, &AngleMachineParams { radius: 8.0, c: 0.1, k: 2.0 }, -1.0).is_err());
    }

    #[test]
    fn f0_limits() {
        assert_abs_diff_eq!(f0(1.0, 0.0), 1.0);
        assert_abs_diff_eq!(f0(4.0, 1.0), 2.0 / 2f64.tanh(), epsilon = 1e-14);
    }
}
