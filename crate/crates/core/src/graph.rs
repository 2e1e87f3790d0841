//! Radial spacelike graphs `t = tau(s)` of prescribed mean curvature.
//!
//! The mean curvature equation `m H = (1/h) div(h^2 D tau / sqrt(1 - h^2 |D tau|^2))`
//! has the radial first integral
//!
//! ```text
//! F(s) = g^{m-1} h^2 tau' / sqrt(1 - h^2 tau'^2),    F' = m H h g^{m-1},
//! ```
//!
//! which is inverted algebraically: with `W = F / g^{m-1}`,
//! `tau' = W / (h sqrt(h^2 + W^2))` and `cosh(theta) = sqrt(h^2 + W^2) / h`.
//! Spacelikeness `h |tau'| < 1` therefore holds whenever `F` is finite.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::geometry::StaticModel;
use crate::numerics::{cumulative_simpson, fd_derivative, quad, quad_try, Grid, SampledFunction};
use crate::report::{fmt_num, EstimateReport, GridMeta};

const FLUX_QUAD_TOL: f64 = 1e-13;

/// Prescribed mean curvature `H(s)`.
#[derive(Clone)]
pub enum MeanCurvSpec {
    Constant(f64),
    Radial(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl MeanCurvSpec {
    pub fn zero() -> Self {
        MeanCurvSpec::Constant(0.0)
    }

    pub fn radial(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        MeanCurvSpec::Radial(Arc::new(f))
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            MeanCurvSpec::Constant(c) => *c,
            MeanCurvSpec::Radial(f) => f(s),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, MeanCurvSpec::Constant(c) if *c == 0.0)
    }

    pub fn describe(&self) -> String {
        match self {
            MeanCurvSpec::Constant(c) => format!("const {c}"),
            MeanCurvSpec::Radial(_) => "radial".into(),
        }
    }
}

impl fmt::Debug for MeanCurvSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MeanCurvSpec({})", self.describe())
    }
}

/// Initial data for the first integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Anchor {
    /// Smooth through the pole: `F(0) = 0`; `tau(grid start) = tau0`.
    PoleRegular { tau0: f64 },
    /// `F(s0) = flux0`, `tau(s0) = tau0`; `s0` must be a grid node.
    Flux { s0: f64, flux0: f64, tau0: f64 },
}

/// Integrand `m H h g^{m-1}` of the flux.
fn flux_density(model: &StaticModel, spec: &MeanCurvSpec, s: f64) -> Result<f64> {
    let p = model.eval(s)?;
    Ok(model.m() as f64 * spec.eval(s) * p.warp.h * p.profile.g.powi(model.m() as i32 - 1))
}

fn flux_integral(model: &StaticModel, spec: &MeanCurvSpec, a: f64, b: f64) -> Result<f64> {
    if spec.is_zero() || a == b {
        return Ok(0.0);
    }
    quad_try(|s| flux_density(model, spec, s), a, b, FLUX_QUAD_TOL * (1.0 + (b - a).abs()))
}

fn check_anchor(model: &StaticModel, grid: &Grid, anchor: &Anchor) -> Result<usize> {
    let (lo, hi) = model.base.domain();
    if grid.first() < lo || grid.last() > hi {
        return Err(Error::OutOfDomain { s: grid.first().min(grid.last()), lo, hi });
    }
    match anchor {
        Anchor::PoleRegular { .. } => {
            if !model.base.is_pole_anchored() {
                return Err(invalid("pole-regular anchor needs a base with a pole"));
            }
            Ok(0)
        }
        Anchor::Flux { s0, .. } => grid
            .node_index(*s0)
            .ok_or_else(|| invalid(format!("flux anchor s0 = {s0} is not a grid node"))),
    }
}

/// Flux `F` at the nodes of `grid`.
pub fn flux_from_h(model: &StaticModel, spec: &MeanCurvSpec, anchor: &Anchor, grid: &Grid) -> Result<SampledFunction> {
    let k = check_anchor(model, grid, anchor)?;
    let x = grid.nodes();
    let mut flux = vec![0.0; x.len()];
    flux[k] = match anchor {
        Anchor::PoleRegular { .. } => flux_integral(model, spec, 0.0, x[0])?,
        Anchor::Flux { flux0, .. } => *flux0,
    };
    for i in k + 1..x.len() {
        flux[i] = flux[i - 1] + flux_integral(model, spec, x[i - 1], x[i])?;
    }
    for i in (0..k).rev() {
        flux[i] = flux[i + 1] - flux_integral(model, spec, x[i], x[i + 1])?;
    }
    SampledFunction::new(grid.clone(), flux)
}

/// Slope `tau'` and `cosh(theta)` from the flux value at `s`.
pub fn slope_from_flux(model: &StaticModel, flux: f64, s: f64) -> Result<(f64, f64)> {
    let p = model.eval(s)?;
    let h = p.warp.h;
    if h <= 0.0 {
        return Err(invalid(format!("warp vanishes at s = {s}")));
    }
    let gm = p.profile.g.powi(model.m() as i32 - 1);
    let w = if gm == 0.0 {
        if flux != 0.0 {
            return Err(Error::NonSpacelike { s, value: f64::INFINITY });
        }
        0.0
    } else {
        flux / gm
    };
    let root = (h * h + w * w).sqrt();
    let slope = w / (h * root);
    let cosh = root / h;
    if !(slope.is_finite() && cosh.is_finite()) {
        return Err(Error::NonSpacelike { s, value: f64::INFINITY });
    }
    Ok((slope, cosh))
}

/// Solution of the radial mean curvature equation on a grid.
#[derive(Clone, Debug)]
pub struct RadialGraph {
    pub model: StaticModel,
    pub spec: MeanCurvSpec,
    pub anchor: Anchor,
    pub grid: Grid,
    pub tau: Vec<f64>,
    pub slope: Vec<f64>,
    pub flux: Vec<f64>,
    pub cosh_theta: Vec<f64>,
}

/// Hyperbolic angle along the graph.
#[derive(Clone, Debug)]
pub struct AngleProfile {
    pub cosh_theta: SampledFunction,
    pub sup: f64,
    /// Running maximum over the last quarter of the grid.
    pub tail: f64,
}

impl RadialGraph {
    pub fn m(&self) -> usize {
        self.model.m()
    }

    pub fn angle_profile(&self) -> AngleProfile {
        let n = self.cosh_theta.len();
        let sup = self.cosh_theta.iter().copied().fold(f64::MIN, f64::max);
        let tail = self.cosh_theta[3 * n / 4..].iter().copied().fold(f64::MIN, f64::max);
        AngleProfile {
            cosh_theta: SampledFunction { grid: self.grid.clone(), values: self.cosh_theta.clone() },
            sup,
            tail,
        }
    }

    pub fn is_pole_regular(&self) -> bool {
        matches!(self.anchor, Anchor::PoleRegular { .. })
    }

    pub fn tau_at(&self, s: f64) -> f64 {
        SampledFunction { grid: self.grid.clone(), values: self.tau.clone() }.interp(s)
    }

    pub fn grid_meta(&self) -> GridMeta {
        GridMeta::of(&self.grid)
    }

    /// Writes `s,tau,slope,flux,cosh_theta`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "tau", "slope", "flux", "cosh_theta"])?;
        for i in 0..self.grid.len() {
            w.write_record([
                fmt_num(self.grid.nodes()[i]),
                fmt_num(self.tau[i]),
                fmt_num(self.slope[i]),
                fmt_num(self.flux[i]),
                fmt_num(self.cosh_theta[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrates the first integral and then `tau` with Simpson's rule using
/// exact flux values at the interval midpoints.
pub fn solve_radial_graph(model: &StaticModel, spec: &MeanCurvSpec, anchor: Anchor, grid: &Grid) -> Result<RadialGraph> {
    let k = check_anchor(model, grid, &anchor)?;
    let flux = flux_from_h(model, spec, &anchor, grid)?.values;
    let x = grid.nodes();
    let mut slope = Vec::with_capacity(x.len());
    let mut cosh_theta = Vec::with_capacity(x.len());
    for (&s, &f) in x.iter().zip(&flux) {
        let (p, c) = slope_from_flux(model, f, s)?;
        slope.push(p);
        cosh_theta.push(c);
    }
    let mut mid_slope = Vec::with_capacity(x.len() - 1);
    for i in 0..x.len() - 1 {
        let mid = 0.5 * (x[i] + x[i + 1]);
        let f = flux[i] + flux_integral(model, spec, x[i], mid)?;
        mid_slope.push(slope_from_flux(model, f, mid)?.0);
    }
    let tau0 = match anchor {
        Anchor::PoleRegular { tau0 } | Anchor::Flux { tau0, .. } => tau0,
    };
    let tau = cumulative_simpson(grid, &slope, &mid_slope, k)
        .into_iter()
        .map(|t| t + tau0)
        .collect();
    Ok(RadialGraph {
        model: model.clone(),
        spec: spec.clone(),
        anchor,
        grid: grid.clone(),
        tau,
        slope,
        flux,
        cosh_theta,
    })
}

/// Height difference `tau(s) - tau(s_ref)` of the catenoid-type maximal
/// graph in the euclidean product, `tau' = c / sqrt(s^{2(m-1)} + c^2)`.
pub fn oracle_catenoid(m: usize, c: f64, s_ref: f64, s: f64) -> Result<f64> {
    if m < 2 || !(s_ref > 0.0 && s > 0.0) {
        return Err(invalid("catenoid oracle needs m >= 2 and positive radii"));
    }
    if m == 2 {
        return Ok(c * ((s / c).asinh() - (s_ref / c).asinh()));
    }
    let e = 2 * (m as i32 - 1);
    quad(|t| c / (t.powi(e) + c * c).sqrt(), s_ref, s, 1e-14)
}

/// Recomputes `m H` from the flux derivative and from the induced-metric
/// Laplacian form `m H cosh(theta) = h Delta_g tau + 2 g(grad h, grad tau)`,
/// and compares both with the prescribed `H` at the interior nodes.
pub fn gauge_consistency_check(graph: &RadialGraph, tol: f64) -> Result<EstimateReport> {
    let m = graph.m();
    let x = graph.grid.nodes();
    let n = x.len();
    let mut gm = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    let mut dh = Vec::with_capacity(n);
    for &s in x {
        let p = graph.model.eval(s)?;
        gm.push(p.profile.g.powi(m as i32 - 1));
        h.push(p.warp.h);
        dh.push(p.warp.dh);
    }
    let a: Vec<f64> = graph.slope.iter().zip(&h).map(|(t, hh)| (1.0 - hh * hh * t * t).sqrt()).collect();
    let d_flux = fd_derivative(x, &graph.flux);
    let q: Vec<f64> = (0..n).map(|i| gm[i] * graph.slope[i] / a[i]).collect();
    let dq = fd_derivative(x, &q);
    let mut worst_pair = 0.0_f64;
    let mut worst_spec = 0.0_f64;
    for i in 1..n - 1 {
        if gm[i] == 0.0 {
            continue;
        }
        let target = m as f64 * graph.spec.eval(x[i]);
        let from_flux = d_flux[i] / (h[i] * gm[i]);
        let lap = dq[i] / (a[i] * gm[i]);
        let from_lap = a[i] * (h[i] * lap + 2.0 * dh[i] * graph.slope[i] / (a[i] * a[i]));
        let scale = 1.0_f64.max(target.abs());
        worst_pair = worst_pair.max((from_flux - from_lap).abs() / scale);
        worst_spec = worst_spec.max((from_flux - target).abs().max((from_lap - target).abs()) / scale);
    }
    let lhs = worst_pair.max(worst_spec);
    Ok(EstimateReport::upper_bound("gauge-consistency", lhs, 0.0, tol)
        .with_grid(graph.grid_meta())
        .with_note(format!("max mismatch between gauges {worst_pair:e}; max deviation from prescribed mH {worst_spec:e}")))
}

/// `cosh(theta)` from the `g`-gauge: `sqrt(1 + h^2 |grad tau|_g^2)` with
/// `|grad tau|_g^2 = tau'^2 / (1 - h^2 tau'^2)`.
pub fn cosh_theta_g_gauge(h: f64, slope: f64) -> f64 {
    let grad2 = slope * slope / (1.0 - h * h * slope * slope);
    (1.0 + h * h * grad2).sqrt()
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
    fn hyperbolic_cmc_closed_forms() {
        let model = hyperbolic();
        let grid = Grid::uniform(0.0, 10.0, 1001).unwrap();
        let spec = MeanCurvSpec::Constant(0.5);
        let g = solve_radial_graph(&model, &spec, Anchor::PoleRegular { tau0: 0.0 }, &grid).unwrap();
        let i1 = grid.node_index(1.0).unwrap();
        let i2 = grid.node_index(2.0).unwrap();
        assert_abs_diff_eq!(g.flux[i1], 1f64.cosh() - 1.0, epsilon = 1e-10);
        let w2 = 1f64.tanh();
        assert_abs_diff_eq!(g.slope[i2], w2 / (1.0 + w2 * w2).sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(g.cosh_theta[i2], (1.0 + w2 * w2).sqrt(), epsilon = 1e-10);
        let exact = |s: f64| 2f64.sqrt() * (2f64.sqrt() * (s / 2.0).cosh()).acosh();
        assert_abs_diff_eq!(g.tau[i2] - g.tau[0], exact(2.0) - exact(0.0), epsilon = 1e-10);
    }

    #[test]
    fn catenoid_against_closed_form() {
        let model = StaticModel::product(RadialBase::euclidean(2).unwrap());
        let grid = Grid::uniform(1.0, 2.0, 201).unwrap();
        let anchor = Anchor::Flux { s0: 1.0, flux0: 1.0, tau0: 0.0 };
        let g = solve_radial_graph(&model, &MeanCurvSpec::zero(), anchor, &grid).unwrap();
        assert_abs_diff_eq!(g.tau[200], 0.5622618882, epsilon = 1e-8);
        assert_abs_diff_eq!(oracle_catenoid(2, 1.0, 1.0, 2.0).unwrap(), 0.5622618882, epsilon = 1e-9);
    }

    #[test]
    fn catenoid_quadrature_oracle_general_m() {
        // m = 2 through the generic quadrature branch agrees with asinh.
        let v = quad(|t| 1.0 / (t * t + 1.0).sqrt(), 1.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(v, oracle_catenoid(2, 1.0, 1.0, 2.0).unwrap(), epsilon = 1e-12);
        assert!(oracle_catenoid(3, 1.0, 1.0, 2.0).unwrap() < v);
    }

    #[test]
    fn off_grid_anchor_rejected() {
        let model = StaticModel::product(RadialBase::euclidean(2).unwrap());
        let grid = Grid::uniform(1.0, 2.0, 11).unwrap();
        let anchor = Anchor::Flux { s0: 1.05, flux0: 1.0, tau0: 0.0 };
        assert!(solve_radial_graph(&model, &MeanCurvSpec::zero(), anchor, &grid).is_err());
    }

    #[test]
    fn pole_regular_requires_pole() {
        let base = RadialBase::euclidean(2).unwrap().with_domain(1.0, 3.0).unwrap();
        let model = StaticModel::product(base);
        let grid = Grid::uniform(1.0, 3.0, 11).unwrap();
        let r = solve_radial_graph(&model, &MeanCurvSpec::zero(), Anchor::PoleRegular { tau0: 0.0 }, &grid);
        assert!(r.is_err());
    }

    #[test]
    fn gauges_agree_on_hyperbolic_cmc() {
        let model = hyperbolic();
        let grid = Grid::uniform(0.0, 6.0, 601).unwrap();
        let g = solve_radial_graph(&model, &MeanCurvSpec::Constant(0.5), Anchor::PoleRegular { tau0: 0.0 }, &grid).unwrap();
        let rep = gauge_consistency_check(&g, 1e-6).unwrap();
        assert!(rep.passed(), "{rep:?}");
        for (i, &s) in grid.nodes().iter().enumerate() {
            let c = cosh_theta_g_gauge(model.h(s).unwrap(), g.slope[i]);
            assert_abs_diff_eq!(c, g.cosh_theta[i], epsilon = 1e-10);
        }
    }
}
