//! Radially symmetric bases `ds^2 + g(s)^2 <,>_{S^{m-1}}`, warping functions
//! and the curvature of the static product `P x_h R`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::numerics::{quad, CubicSpline, Grid};

/// `g` and its first two derivatives, plus `1 - g'^2` evaluated without
/// cancellation where a closed form exists.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileValue {
    pub g: f64,
    pub dg: f64,
    pub ddg: f64,
    pub one_minus_dg2: f64,
}

/// Tabulated inverse of the Schwarzschild area-radius map `rho -> s`.
///
/// With `rho = rho_S + w^2` the integrand `2w / sqrt(V)` is smooth at the
/// horizon, so `s(w)` is tabulated on a uniform `w` grid and inverted by
/// Newton steps on a single interval.
pub struct SchwarzschildMap {
    mu: f64,
    m: usize,
    rho_s: f64,
    dw: f64,
    s_table: Vec<f64>,
}

const SCHW_TABLE_W_MAX: f64 = 100.0;
const SCHW_TABLE_NODES: usize = 8001;
const SCHW_QUAD_TOL: f64 = 1e-13;

impl SchwarzschildMap {
    pub fn new(mu: f64, m: usize) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid(format!("Schwarzschild mass must be positive, got {mu}")));
        }
        if m < 3 {
            return Err(invalid(format!("Schwarzschild base needs m >= 3, got {m}")));
        }
        let rho_s = (2.0 * mu).powf(1.0 / (m as f64 - 2.0));
        let mut map = SchwarzschildMap { mu, m, rho_s, dw: 0.0, s_table: Vec::new() };
        let w_max = SCHW_TABLE_W_MAX * rho_s.sqrt();
        let dw = w_max / (SCHW_TABLE_NODES - 1) as f64;
        let mut table = Vec::with_capacity(SCHW_TABLE_NODES);
        table.push(0.0);
        for k in 1..SCHW_TABLE_NODES {
            let (a, b) = ((k - 1) as f64 * dw, k as f64 * dw);
            let piece = quad(|w| map.ds_dw(w), a, b, SCHW_QUAD_TOL)?;
            table.push(table[k - 1] + piece);
        }
        map.dw = dw;
        map.s_table = table;
        Ok(map)
    }

    pub fn horizon_radius(&self) -> f64 {
        self.rho_s
    }

    pub fn mass(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// `1 - V(rho) = (rho_S / rho)^{m-2}`.
    fn one_minus_v(&self, rho: f64) -> f64 {
        (self.rho_s / rho).powi(self.m as i32 - 2)
    }

    /// `V(rho) = 1 - 2 mu rho^{2-m}`, accurate near the horizon.
    pub fn lapse_sq(&self, rho: f64) -> f64 {
        -((self.m as f64 - 2.0) * (self.rho_s / rho).ln()).exp_m1()
    }

    /// `ds/dw` for `rho = rho_S + w^2`; finite at `w = 0`.
    fn ds_dw(&self, w: f64) -> f64 {
        let k = self.m as f64 - 2.0;
        if w == 0.0 {
            return 2.0 * (self.rho_s / k).sqrt();
        }
        let v = -(-k * (w * w / self.rho_s).ln_1p()).exp_m1();
        2.0 * w / v.sqrt()
    }

    /// `s(rho)` by direct quadrature from the horizon.
    pub fn s_of_rho(&self, rho: f64) -> Result<f64> {
        if !(rho >= self.rho_s) {
            return Err(Error::OutOfDomain { s: rho, lo: self.rho_s, hi: f64::INFINITY });
        }
        let w = (rho - self.rho_s).sqrt();
        quad(|t| self.ds_dw(t), 0.0, w, SCHW_QUAD_TOL * (1.0 + w))
    }

    /// Inverse map `s -> rho`.
    pub fn rho_of_s(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::OutOfDomain { s, lo: 0.0, hi: f64::INFINITY });
        }
        let last = self.s_table.len() - 1;
        let k = if s >= self.s_table[last] {
            last
        } else {
            self.s_table.partition_point(|&v| v <= s) - 1
        };
        let w0 = k as f64 * self.dw;
        let s0 = self.s_table[k];
        let w = if k == last {
            self.newton_w(w0, s0, s, w0 + (s - s0), f64::INFINITY)?
        } else {
            let w1 = w0 + self.dw;
            let guess = w0 + (s - s0) / (self.s_table[k + 1] - s0) * self.dw;
            self.newton_w(w0, s0, s, guess, w1)?
        };
        Ok(self.rho_s + w * w)
    }

    fn newton_w(&self, w0: f64, s0: f64, target: f64, guess: f64, hi: f64) -> Result<f64> {
        let (mut lo, mut hi) = (w0, hi);
        let mut w = guess.clamp(lo, hi.min(w0 + 2.0 * (target - s0) + self.dw));
        for _ in 0..60 {
            let sw = s0 + quad(|t| self.ds_dw(t), w0, w, SCHW_QUAD_TOL)?;
            let resid = sw - target;
            if resid > 0.0 {
                hi = w;
            } else {
                lo = w;
            }
            if resid.abs() <= 1e-14 * (1.0 + target) {
                return Ok(w);
            }
            let mut next = w - resid / self.ds_dw(w);
            if !(next > lo && next < hi) {
                next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo.max(w) + 1.0 };
            }
            if (next - w).abs() <= 1e-15 * (1.0 + w) {
                return Ok(next);
            }
            w = next;
        }
        Err(Error::NonConvergence { what: "Schwarzschild rho(s) inversion", estimate: w })
    }

    fn profile(&self, s: f64) -> Result<(f64, ProfileValue)> {
        let rho = self.rho_of_s(s)?;
        let m = self.m as f64;
        let v = self.lapse_sq(rho);
        let one_minus_v = self.one_minus_v(rho);
        let pv = ProfileValue {
            g: rho,
            dg: v.max(0.0).sqrt(),
            ddg: 0.5 * (m - 2.0) * one_minus_v / rho,
            one_minus_dg2: one_minus_v,
        };
        Ok((rho, pv))
    }
}

impl fmt::Debug for SchwarzschildMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchwarzschildMap")
            .field("mu", &self.mu)
            .field("m", &self.m)
            .field("rho_s", &self.rho_s)
            .finish()
    }
}

/// Warping function `g` of the base metric.
#[derive(Clone, Debug)]
pub enum RadialProfile {
    Euclidean,
    Hyperbolic { b: f64 },
    Schwarzschild(Arc<SchwarzschildMap>),
    Custom(Arc<CubicSpline>),
}

impl RadialProfile {
    pub fn hyperbolic(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(invalid(format!("hyperbolic curvature scale must be positive, got {b}")));
        }
        Ok(RadialProfile::Hyperbolic { b })
    }

    pub fn schwarzschild(mu: f64, m: usize) -> Result<Self> {
        Ok(RadialProfile::Schwarzschild(Arc::new(SchwarzschildMap::new(mu, m)?)))
    }

    /// Interpolates tabulated `g > 0` (or `g = 0` only at a pole) with a
    /// natural cubic spline.
    pub fn custom(s: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if s.len() < Grid::MIN_NODES {
            return Err(invalid(format!("custom profile needs at least {} samples", Grid::MIN_NODES)));
        }
        if let Some(i) = g.iter().position(|&v| v < 0.0) {
            return Err(invalid(format!("custom profile has g < 0 at sample {i}")));
        }
        if g.iter().skip(1).any(|&v| v == 0.0) {
            return Err(invalid("custom profile may vanish only at its first sample"));
        }
        Ok(RadialProfile::Custom(Arc::new(CubicSpline::natural(s, g)?)))
    }

    /// Reads an `s,g` CSV file with a header row.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "s" || &headers[1] != "g" {
            return Err(Error::Parse { line: 1, msg: "expected header `s,g`".into() });
        }
        let (mut s, mut g) = (Vec::new(), Vec::new());
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let parse = |field: &str| {
                field.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 2,
                    msg: format!("bad number `{field}`: {e}"),
                })
            };
            s.push(parse(&rec[0])?);
            g.push(parse(&rec[1])?);
        }
        Self::custom(s, g)
    }

    fn name(&self) -> String {
        match self {
            RadialProfile::Euclidean => "euclidean".into(),
            RadialProfile::Hyperbolic { b } => format!("hyperbolic(B={b})"),
            RadialProfile::Schwarzschild(map) => format!("schwarzschild(mu={}, m={})", map.mu, map.m),
            RadialProfile::Custom(_) => "custom".into(),
        }
    }

    fn natural_domain(&self) -> (f64, f64) {
        match self {
            RadialProfile::Custom(sp) => sp.domain(),
            _ => (0.0, f64::INFINITY),
        }
    }
}

/// Radial base manifold of dimension `m` restricted to `[s_min, s_max]`.
#[derive(Clone, Debug)]
pub struct RadialBase {
    pub m: usize,
    pub profile: RadialProfile,
    s_min: f64,
    s_max: f64,
}

impl RadialBase {
    pub fn new(m: usize, profile: RadialProfile) -> Result<Self> {
        if m < 2 {
            return Err(invalid(format!("base dimension must be at least 2, got {m}")));
        }
        if let RadialProfile::Schwarzschild(map) = &profile {
            if map.m != m {
                return Err(invalid(format!("Schwarzschild map built for m = {}, base has m = {m}", map.m)));
            }
        }
        let (s_min, s_max) = profile.natural_domain();
        Ok(RadialBase { m, profile, s_min, s_max })
    }

    pub fn euclidean(m: usize) -> Result<Self> {
        Self::new(m, RadialProfile::Euclidean)
    }

    pub fn hyperbolic(m: usize, b: f64) -> Result<Self> {
        Self::new(m, RadialProfile::hyperbolic(b)?)
    }

    pub fn schwarzschild(mu: f64, m: usize) -> Result<Self> {
        Self::new(m, RadialProfile::schwarzschild(mu, m)?)
    }

    /// Restricts the domain, e.g. to an annulus.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        let (nlo, nhi) = self.profile.natural_domain();
        if !(lo >= nlo && hi <= nhi && hi > lo) {
            return Err(invalid(format!("domain [{lo}, {hi}] not inside [{nlo}, {nhi}]")));
        }
        self.s_min = lo;
        self.s_max = hi;
        Ok(self)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.s_min, self.s_max)
    }

    /// True when `g` vanishes at the lower end of the domain (a pole).
    pub fn is_pole_anchored(&self) -> bool {
        match &self.profile {
            RadialProfile::Euclidean | RadialProfile::Hyperbolic { .. } => self.s_min == 0.0,
            RadialProfile::Schwarzschild(_) => false,
            RadialProfile::Custom(sp) => {
                let (lo, _) = sp.domain();
                self.s_min == lo && sp.values()[0] == 0.0
            }
        }
    }

    pub fn describe(&self) -> String {
        format!("{} m={} s in [{}, {}]", self.profile.name(), self.m, self.s_min, self.s_max)
    }

    fn check(&self, s: f64) -> Result<()> {
        if s >= self.s_min && s <= self.s_max {
            Ok(())
        } else {
            Err(Error::OutOfDomain { s, lo: self.s_min, hi: self.s_max })
        }
    }

    /// Curvature at the pole, where `K_rad = K_tan = -g'''(0)`.
    fn pole_curvature(&self) -> Option<f64> {
        match &self.profile {
            RadialProfile::Euclidean => Some(0.0),
            RadialProfile::Hyperbolic { b } => Some(-b),
            RadialProfile::Schwarzschild(_) => None,
            RadialProfile::Custom(sp) => Some(-sp.third_derivative_at_start()),
        }
    }

    pub fn rho_of_s(&self, s: f64) -> Option<Result<f64>> {
        match &self.profile {
            RadialProfile::Schwarzschild(map) => Some(map.rho_of_s(s)),
            _ => None,
        }
    }
}

/// Evaluates `g, g', g''` at `s`.
pub fn eval_profile(base: &RadialBase, s: f64) -> Result<ProfileValue> {
    base.check(s)?;
    let pv = match &base.profile {
        RadialProfile::Euclidean => ProfileValue { g: s, dg: 1.0, ddg: 0.0, one_minus_dg2: 0.0 },
        RadialProfile::Hyperbolic { b } => {
            let k = b.sqrt();
            let sh = (k * s).sinh();
            ProfileValue { g: sh / k, dg: (k * s).cosh(), ddg: k * sh, one_minus_dg2: -sh * sh }
        }
        RadialProfile::Schwarzschild(map) => map.profile(s)?.1,
        RadialProfile::Custom(sp) => {
            let (g, dg, ddg) = sp.eval(s);
            ProfileValue { g, dg, ddg, one_minus_dg2: 1.0 - dg * dg }
        }
    };
    ensure_finite("profile value", pv.g)?;
    Ok(pv)
}

/// Area-radius coordinate `s(rho)` of the Schwarzschild base.
pub fn schwarzschild_s_of_rho(mu: f64, m: usize, rho: f64) -> Result<f64> {
    SchwarzschildMap::new(mu, m)?.s_of_rho(rho)
}

/// Inverse of [`schwarzschild_s_of_rho`].
pub fn schwarzschild_rho_of_s(mu: f64, m: usize, s: f64) -> Result<f64> {
    SchwarzschildMap::new(mu, m)?.rho_of_s(s)
}

/// Warping function `h` of the time direction.
#[derive(Clone, Debug)]
pub enum Warp {
    /// `h = c > 0`.
    Constant(f64),
    /// `h = exp(rate * s)`.
    Exponential { rate: f64 },
    /// Schwarzschild lapse `h = sqrt(V(rho(s)))`.
    SchwarzschildLapse,
    /// Tabulated positive `h` (natural cubic spline).
    Custom(Arc<CubicSpline>),
}

/// `h, h', h''` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpValue {
    pub h: f64,
    pub dh: f64,
    pub ddh: f64,
}

/// Base and warp evaluated together.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelPoint {
    pub s: f64,
    pub profile: ProfileValue,
    pub warp: WarpValue,
    /// Area radius for Schwarzschild bases.
    pub rho: Option<f64>,
}

/// Static spacetime `P x_h R` with metric `sigma - h^2 dt^2`.
#[derive(Clone, Debug)]
pub struct StaticModel {
    pub base: RadialBase,
    pub warp: Warp,
}

impl StaticModel {
    pub fn new(base: RadialBase, warp: Warp) -> Result<Self> {
        match &warp {
            Warp::Constant(c) if !(*c > 0.0 && c.is_finite()) => {
                return Err(invalid(format!("constant warp must be positive, got {c}")))
            }
            Warp::Exponential { rate } if !rate.is_finite() => {
                return Err(invalid("exponential warp rate must be finite"))
            }
            Warp::SchwarzschildLapse if !matches!(base.profile, RadialProfile::Schwarzschild(_)) => {
                return Err(invalid("Schwarzschild lapse needs a Schwarzschild base"))
            }
            Warp::Custom(sp) if sp.values().iter().any(|&v| v <= 0.0) => {
                return Err(invalid("custom warp must be positive"))
            }
            _ => {}
        }
        Ok(StaticModel { base, warp })
    }

    /// `h = 1`.
    pub fn product(base: RadialBase) -> Self {
        StaticModel { base, warp: Warp::Constant(1.0) }
    }

    /// Schwarzschild base with its lapse, domain `s >= s_min`.
    pub fn schwarzschild(mu: f64, m: usize) -> Result<Self> {
        Self::new(RadialBase::schwarzschild(mu, m)?, Warp::SchwarzschildLapse)
    }

    pub fn m(&self) -> usize {
        self.base.m
    }

    pub fn describe(&self) -> String {
        let warp = match &self.warp {
            Warp::Constant(c) => format!("h={c}"),
            Warp::Exponential { rate } => format!("h=exp({rate} s)"),
            Warp::SchwarzschildLapse => "h=sqrt(V)".into(),
            Warp::Custom(_) => "h=custom".into(),
        };
        format!("{} {}", self.base.describe(), warp)
    }

    pub fn eval(&self, s: f64) -> Result<ModelPoint> {
        self.base.check(s)?;
        let (rho, profile) = match &self.base.profile {
            RadialProfile::Schwarzschild(map) => {
                let (rho, pv) = map.profile(s)?;
                (Some(rho), pv)
            }
            _ => (None, eval_profile(&self.base, s)?),
        };
        let warp = match &self.warp {
            Warp::Constant(c) => WarpValue { h: *c, dh: 0.0, ddh: 0.0 },
            Warp::Exponential { rate } => {
                let h = (rate * s).exp();
                WarpValue { h, dh: rate * h, ddh: rate * rate * h }
            }
            Warp::SchwarzschildLapse => {
                let RadialProfile::Schwarzschild(map) = &self.base.profile else {
                    unreachable!("checked at construction")
                };
                let rho = rho.expect("Schwarzschild base yields rho");
                let m = map.m as f64;
                let one_minus_v = map.one_minus_v(rho);
                let h = profile.dg;
                WarpValue {
                    h,
                    dh: 0.5 * (m - 2.0) * one_minus_v / rho,
                    ddh: -0.5 * (m - 1.0) * (m - 2.0) * one_minus_v / (rho * rho) * h,
                }
            }
            Warp::Custom(sp) => {
                let (h, dh, ddh) = sp.eval(s);
                WarpValue { h, dh, ddh }
            }
        };
        ensure_finite("warp value", warp.h)?;
        Ok(ModelPoint { s, profile, warp, rho })
    }

    pub fn h(&self, s: f64) -> Result<f64> {
        Ok(self.eval(s)?.warp.h)
    }
}

/// Sectional and Ricci curvatures of the radial base at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureSample {
    pub k_rad: f64,
    pub k_tan: f64,
    pub ric_rr: f64,
    pub ric_tt: f64,
    pub scalar: f64,
}

/// Radial and tangential sectional curvatures and the Ricci eigenvalues.
pub fn base_curvature(base: &RadialBase, s: f64) -> Result<CurvatureSample> {
    let pv = eval_profile(base, s)?;
    let m = base.m as f64;
    let (k_rad, k_tan) = if pv.g == 0.0 {
        let k = base
            .pole_curvature()
            .ok_or_else(|| invalid("curvature undefined where g = 0"))?;
        (k, k)
    } else {
        match &base.profile {
            RadialProfile::Hyperbolic { b } => (-b, -b),
            RadialProfile::Euclidean => (0.0, 0.0),
            _ => (-pv.ddg / pv.g, pv.one_minus_dg2 / (pv.g * pv.g)),
        }
    };
    let ric_rr = (m - 1.0) * k_rad;
    let ric_tt = k_rad + (m - 2.0) * k_tan;
    Ok(CurvatureSample {
        k_rad,
        k_tan,
        ric_rr,
        ric_tt,
        scalar: ric_rr + (m - 1.0) * ric_tt,
    })
}

/// Hessian eigenvalues and Laplacian of a radial function with derivatives
/// `dphi`, `ddphi` at `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialHessian {
    pub rr: f64,
    pub tt: f64,
    pub laplacian: f64,
}

pub fn radial_hessian(base: &RadialBase, s: f64, dphi: f64, ddphi: f64) -> Result<RadialHessian> {
    let pv = eval_profile(base, s)?;
    let tt = if pv.g == 0.0 { ddphi } else { pv.dg / pv.g * dphi };
    Ok(RadialHessian {
        rr: ddphi,
        tt,
        laplacian: ddphi + (base.m as f64 - 1.0) * tt,
    })
}

/// Ricci tensor of the static spacetime in the radial frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimeRicci {
    /// `Ric(e_1, e_1)` for the radial unit vector.
    pub rr: f64,
    /// `Ric(e_a, e_a)` for a unit tangent to the sphere.
    pub tt: f64,
    /// `Ric(d_t, d_t) = h Delta h`.
    pub time_coord: f64,
    /// `Ric(e_t, e_t) = Delta h / h` for `e_t = d_t / h`.
    pub time_frame: f64,
}

pub fn spacetime_ricci(model: &StaticModel, s: f64) -> Result<SpacetimeRicci> {
    let p = model.eval(s)?;
    let curv = base_curvature(&model.base, s)?;
    let hess = radial_hessian(&model.base, s, p.warp.dh, p.warp.ddh)?;
    let h = p.warp.h;
    if h <= 0.0 {
        return Err(invalid(format!("warp vanishes at s = {s}")));
    }
    Ok(SpacetimeRicci {
        rr: curv.ric_rr - hess.rr / h,
        tt: curv.ric_tt - hess.tt / h,
        time_coord: h * hess.laplacian,
        time_frame: hess.laplacian / h,
    })
}

/// Eigenvalues of `Ric^P - Hess h / h` and the admissible constant `G_0`
/// with `Ric^P - Hess h / h >= -m G_0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BakryEmery {
    pub rr: f64,
    pub tt: f64,
    pub min: f64,
    pub g0: f64,
}

pub fn modified_bakry_emery(model: &StaticModel, s: f64) -> Result<BakryEmery> {
    let r = spacetime_ricci(model, s)?;
    let min = r.rr.min(r.tt);
    Ok(BakryEmery { rr: r.rr, tt: r.tt, min, g0: (-min / model.m() as f64).max(0.0) })
}

/// Smallest admissible `G_0` over the nodes of `grid`.
pub fn bakry_emery_floor(model: &StaticModel, grid: &Grid) -> Result<f64> {
    let mut g0 = 0.0_f64;
    for &s in grid.nodes() {
        g0 = g0.max(modified_bakry_emery(model, s)?.g0);
    }
    Ok(g0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn closed_form_s(mu: f64, rho: f64) -> f64 {
        (rho * (rho - 2.0 * mu)).sqrt()
            + 2.0 * mu * ((rho.sqrt() + (rho - 2.0 * mu).sqrt()) / (2.0 * mu).sqrt()).ln()
    }

    #[test]
    fn hyperbolic_profile_values() {
        let base = RadialBase::hyperbolic(2, 1.0).unwrap();
        let pv = eval_profile(&base, 1.0).unwrap();
        assert_abs_diff_eq!(pv.g, 1.1752011936, epsilon = 1e-9);
        assert_abs_diff_eq!(pv.dg, 1.5430806348, epsilon = 1e-9);
        let c = base_curvature(&base, 0.7).unwrap();
        assert_abs_diff_eq!(c.k_rad, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.k_tan, -1.0, epsilon = 1e-12);
        assert!(matches!(eval_profile(&base, -0.1), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn schwarzschild_coordinate_matches_closed_form() {
        let map = SchwarzschildMap::new(1.0, 3).unwrap();
        assert_abs_diff_eq!(map.horizon_radius(), 2.0, epsilon = 1e-15);
        let s4 = map.s_of_rho(4.0).unwrap();
        assert_abs_diff_eq!(s4, 4.5911743, epsilon = 1e-6);
        for rho in [2.001, 2.5, 3.0, 6.0, 30.0, 500.0] {
            assert_abs_diff_eq!(map.s_of_rho(rho).unwrap(), closed_form_s(1.0, rho), epsilon = 1e-10);
            let back = map.rho_of_s(map.s_of_rho(rho).unwrap()).unwrap();
            assert_abs_diff_eq!(back, rho, epsilon = 1e-10 * rho);
        }
        assert!(map.s_of_rho(1.5).is_err());
        assert!(schwarzschild_s_of_rho(1.0, 2, 3.0).is_err());
    }

    #[test]
    fn schwarzschild_far_field_uses_newton_beyond_table() {
        let map = SchwarzschildMap::new(1.0, 3).unwrap();
        let rho = 30000.0;
        let s = closed_form_s(1.0, rho);
        assert_abs_diff_eq!(map.rho_of_s(s).unwrap(), rho, epsilon = 1e-8 * rho);
    }

    #[test]
    fn schwarzschild_is_vacuum() {
        let model = StaticModel::schwarzschild(1.0, 3).unwrap();
        let map = SchwarzschildMap::new(1.0, 3).unwrap();
        for rho in [3.0, 4.0, 6.0] {
            let s = map.s_of_rho(rho).unwrap();
            let r = spacetime_ricci(&model, s).unwrap();
            for v in [r.rr, r.tt, r.time_coord] {
                assert!(v.abs() <= 1e-10, "ricci {v} at rho {rho}");
            }
        }
    }

    #[test]
    fn weighted_hessian_example() {
        let base = RadialBase::euclidean(2).unwrap();
        let model = StaticModel::new(base, Warp::Exponential { rate: 1.0 }).unwrap();
        let p = model.eval(1.0).unwrap();
        let hess = radial_hessian(&model.base, 1.0, p.warp.dh, p.warp.ddh).unwrap();
        assert_abs_diff_eq!(hess.laplacian, 2.0 * std::f64::consts::E, epsilon = 1e-12);
        let hyp = StaticModel::new(
            RadialBase::hyperbolic(2, 1.0).unwrap(),
            Warp::Custom(Arc::new(
                CubicSpline::natural(
                    (0..400).map(|i| i as f64 * 0.01).collect(),
                    (0..400).map(|i| (i as f64 * 0.01).cosh()).collect(),
                )
                .unwrap(),
            )),
        )
        .unwrap();
        let p = hyp.eval(1.0).unwrap();
        let lap = radial_hessian(&hyp.base, 1.0, p.warp.dh, p.warp.ddh).unwrap().laplacian;
        assert_abs_diff_eq!(lap, 2.0 * 1f64.cosh(), epsilon = 1e-4);
    }

    #[test]
    fn bakry_emery_hyperbolic() {
        let model = StaticModel::product(RadialBase::hyperbolic(2, 1.0).unwrap());
        let be = modified_bakry_emery(&model, 2.0).unwrap();
        assert_abs_diff_eq!(be.min, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(be.g0, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn custom_profile_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let mut body = String::from("s,g\n");
        for i in 0..50 {
            let s = i as f64 * 0.1;
            body.push_str(&format!("{s},{}\n", s.sinh()));
        }
        std::fs::write(&path, body).unwrap();
        let prof = RadialProfile::from_csv(&path).unwrap();
        let base = RadialBase::new(2, prof).unwrap();
        assert!(base.is_pole_anchored());
        let c = base_curvature(&base, 2.0).unwrap();
        assert_abs_diff_eq!(c.k_rad, -1.0, epsilon = 2e-3);
        std::fs::write(&path, "s,g\n0,1\n1,-1\n").unwrap();
        assert!(RadialProfile::from_csv(&path).is_err());
        std::fs::write(&path, "x,g\n0,1\n").unwrap();
        assert!(matches!(RadialProfile::from_csv(&path), Err(Error::Parse { line: 1, .. })));
    }
}
