//! Numerical kernels: quadrature, RK4, symmetric eigenvalues, tridiagonal
//! solves, finite-difference weights and cubic splines.

use crate::error::{invalid, Error, Result};

/// How the nodes of a [`Grid`] were laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Uniform,
    Geometric,
    Custom,
}

impl Spacing {
    pub fn as_str(&self) -> &'static str {
        match self {
            Spacing::Uniform => "uniform",
            Spacing::Geometric => "geometric",
            Spacing::Custom => "custom",
        }
    }
}

/// Strictly increasing sample nodes, at least [`Grid::MIN_NODES`] of them.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    spacing: Spacing,
}

impl Grid {
    pub const MIN_NODES: usize = 8;

    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        check_range(a, b, n)?;
        let step = (b - a) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
        nodes[n - 1] = b;
        Ok(Grid { nodes, spacing: Spacing::Uniform })
    }

    pub fn geometric(a: f64, b: f64, n: usize) -> Result<Self> {
        check_range(a, b, n)?;
        if a <= 0.0 {
            return Err(Error::InvalidGrid(format!("geometric grid needs a > 0, got {a}")));
        }
        let ratio = (b / a).ln() / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| a * (ratio * i as f64).exp()).collect();
        nodes[0] = a;
        nodes[n - 1] = b;
        Ok(Grid { nodes, spacing: Spacing::Geometric })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < Self::MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {} nodes, got {}",
                Self::MIN_NODES,
                nodes.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("non-finite node".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!("nodes not strictly increasing at index {i}")));
        }
        Ok(Grid { nodes, spacing: Spacing::Custom })
    }

    /// Uniform pieces glued at `breaks`, each piece with roughly the same step.
    pub fn piecewise_uniform(breaks: &[f64], n: usize) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidGrid("need at least two break points".into()));
        }
        check_range(breaks[0], breaks[breaks.len() - 1], n)?;
        let total = breaks[breaks.len() - 1] - breaks[0];
        let step = total / (n - 1) as f64;
        let mut nodes = vec![breaks[0]];
        for w in breaks.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidGrid("break points not increasing".into()));
            }
            let k = (((w[1] - w[0]) / step).round() as usize).max(1);
            let h = (w[1] - w[0]) / k as f64;
            for j in 1..k {
                nodes.push(w[0] + h * j as f64);
            }
            nodes.push(w[1]);
        }
        let mut grid = Grid::from_nodes(nodes)?;
        if breaks.len() == 2 {
            grid.spacing = Spacing::Uniform;
        }
        Ok(grid)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Node midpoints (geometric means for geometric grids are not used;
    /// integration rules need arithmetic midpoints).
    pub fn midpoints(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Inserts one node in every interval, so the result has `2n - 1` nodes
    /// and contains the original nodes.
    pub fn refined(&self) -> Grid {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            let mid = match self.spacing {
                Spacing::Geometric => (w[0] * w[1]).sqrt(),
                _ => 0.5 * (w[0] + w[1]),
            };
            nodes.push(mid);
        }
        nodes.push(self.last());
        Grid { nodes, spacing: self.spacing }
    }

    /// Index of the node closest to `s`.
    pub fn nearest(&self, s: f64) -> usize {
        let idx = self.nodes.partition_point(|&x| x < s);
        if idx == 0 {
            0
        } else if idx == self.nodes.len() || (s - self.nodes[idx - 1]).abs() <= (self.nodes[idx] - s).abs() {
            idx - 1
        } else {
            idx
        }
    }

    /// Index of the node equal to `s` up to a relative tolerance.
    pub fn node_index(&self, s: f64) -> Option<usize> {
        let i = self.nearest(s);
        let scale = 1.0_f64.max(s.abs());
        ((self.nodes[i] - s).abs() <= 1e-10 * scale).then_some(i)
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.first() && s <= self.last()
    }
}

fn check_range(a: f64, b: f64, n: usize) -> Result<()> {
    if n < Grid::MIN_NODES {
        return Err(Error::InvalidGrid(format!(
            "need at least {} nodes, got {n}",
            Grid::MIN_NODES
        )));
    }
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::InvalidGrid(format!("bad interval [{a}, {b}]")));
    }
    Ok(())
}

/// Values of a function on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sampled values".into()));
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&s| f(s)).collect();
        Self::new(grid, values)
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    /// Piecewise-linear interpolation, clamped to the end values.
    pub fn interp(&self, s: f64) -> f64 {
        let x = self.grid.nodes();
        if s <= x[0] {
            return self.values[0];
        }
        if s >= x[x.len() - 1] {
            return self.values[x.len() - 1];
        }
        let i = x.partition_point(|&t| t <= s) - 1;
        let t = (s - x[i]) / (x[i + 1] - x[i]);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    pub fn max_abs_diff(&self, other: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&s, &v)| (v - other(s)).abs())
            .fold(0.0, f64::max)
    }

    pub fn derivative(&self) -> Vec<f64> {
        fd_derivative(self.grid.nodes(), &self.values)
    }
}

const QUAD_MAX_DEPTH: u32 = 48;
const QUAD_MIN_DEPTH: u32 = 3;
const QUAD_REL_FLOOR: f64 = 1e-14;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol` (floored at a relative 1e-14 of the running estimate).
pub fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(invalid(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid(format!("quadrature bounds must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return quad(f, b, a, tol).map(|v| -v);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut failed = false;
    let value = simpson_step(&f, a, b, fa, fm, fb, whole, tol, 0, &mut failed);
    if !value.is_finite() {
        return Err(Error::NonFinite("quadrature integrand".into()));
    }
    if failed {
        return Err(Error::NonConvergence { what: "adaptive Simpson", estimate: value });
    }
    Ok(value)
}

/// [`quad`] for integrands that can fail; the first error is returned.
pub fn quad_try<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let failure = std::cell::RefCell::new(None);
    let v = quad(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        tol,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => v,
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    failed: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let sum = left + right;
    let delta = sum - whole;
    if !delta.is_finite() {
        *failed = true;
        return sum;
    }
    let allowed = 15.0 * tol.max(QUAD_REL_FLOOR * sum.abs());
    if depth >= QUAD_MIN_DEPTH && delta.abs() <= allowed {
        return sum + delta / 15.0;
    }
    if lm <= a || rm >= b {
        // Interval at floating-point resolution: nothing left to refine.
        return sum + delta / 15.0;
    }
    if depth >= QUAD_MAX_DEPTH {
        *failed = true;
        return sum + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, failed)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, failed)
}

/// Classical fourth-order Runge-Kutta on the nodes of `grid`, one step per
/// interval. Returns the state at every node.
pub fn ode_solve<F>(rhs: F, y0: &[f64], grid: &Grid) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let dim = y0.len();
    let x = grid.nodes();
    let mut out = Vec::with_capacity(x.len());
    out.push(y0.to_vec());
    let mut y = y0.to_vec();
    let mut tmp = vec![0.0; dim];
    for w in x.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let k1 = rhs(t, &y);
        for j in 0..dim {
            tmp[j] = y[j] + 0.5 * h * k1[j];
        }
        let k2 = rhs(t + 0.5 * h, &tmp);
        for j in 0..dim {
            tmp[j] = y[j] + 0.5 * h * k2[j];
        }
        let k3 = rhs(t + 0.5 * h, &tmp);
        for j in 0..dim {
            tmp[j] = y[j] + h * k3[j];
        }
        let k4 = rhs(t + h, &tmp);
        for j in 0..dim {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("ODE state at t = {}", w[1])));
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `k` is the unit eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
}

/// Largest dimension accepted by [`sym_eigen`].
pub const EIGEN_MAX_DIM: usize = 8;

/// Cyclic Jacobi eigen-decomposition of a symmetric row-major `n x n` matrix.
pub fn sym_eigen(a: &[f64], n: usize) -> Result<Eigen> {
    if n == 0 || n > EIGEN_MAX_DIM || a.len() != n * n {
        return Err(invalid(format!("sym_eigen expects 1 <= n <= {EIGEN_MAX_DIM} and n*n entries")));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix entry".into()));
    }
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
    let mut asym = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            asym = asym.max((a[i * n + j] - a[j * n + i]).abs());
        }
    }
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    Ok(Eigen { values, vectors })
}

/// Thomas algorithm. `sub[i]` couples row `i + 1` to row `i`, `sup[i]` row
/// `i` to row `i + 1`.
pub fn tridiag_solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n || rhs.len() != n {
        return Err(invalid("tridiagonal bands have inconsistent lengths"));
    }
    let scale = diag
        .iter()
        .chain(sub)
        .chain(sup)
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    let tiny = 1e-300_f64.max(1e-15 * scale);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() <= tiny {
        return Err(Error::Singular(0));
    }
    if n > 1 {
        c[0] = sup[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i - 1] * c[i - 1];
        if pivot.abs() <= tiny || !pivot.is_finite() {
            return Err(Error::Singular(i));
        }
        if i + 1 < n {
            c[i] = sup[i] / pivot;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Fornberg weights for the `order`-th derivative at `x0` from nodes `xs`.
pub fn fd_weights(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Derivative of the sampled values at every node from five-point stencils
/// (fourth order on smooth data, shifted near the ends).
pub fn fd_derivative(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    fd_stencil(nodes, values, 1, 5)
}

/// Second derivative with five-point stencils (third order).
pub fn fd_second_derivative(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    fd_stencil(nodes, values, 2, 5)
}

/// `order`-th derivative from `width`-point stencils, centred where possible
/// and shifted near the ends.
pub fn fd_stencil(nodes: &[f64], values: &[f64], order: usize, width: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(width > order && n >= width && values.len() == n, "need at least {width} samples");
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let xs = &nodes[start..start + width];
            fd_weights(nodes[i], xs, order)
                .iter()
                .zip(&values[start..start + width])
                .map(|(w, v)| w * v)
                .sum()
        })
        .collect()
}

/// Natural cubic spline through `(x_i, y_i)`; `C^2` across the knots.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(invalid("spline needs at least three matching samples"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) || x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(invalid("spline abscissae must be finite and strictly increasing"));
        }
        let k = n - 2;
        let mut sub = vec![0.0; k.saturating_sub(1)];
        let mut sup = vec![0.0; k.saturating_sub(1)];
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            diag[i - 1] = (h0 + h1) / 3.0;
            if i >= 2 {
                sub[i - 2] = h0 / 6.0;
            }
            if i + 1 < n - 1 {
                sup[i - 1] = h1 / 6.0;
            }
            rhs[i - 1] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        let inner = tridiag_solve(&sub, &diag, &sup, &rhs)?;
        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&inner);
        Ok(CubicSpline { x, y, m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Value, first and second derivative at `t` (extrapolates linearly in
    /// the second derivative outside the knots).
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let n = self.x.len();
        let i = self.x.partition_point(|&v| v <= t).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let val = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        (val, d1, d2)
    }

    /// Third derivative on the first piece.
    pub fn third_derivative_at_start(&self) -> f64 {
        (self.m[1] - self.m[0]) / (self.x[1] - self.x[0])
    }
}

/// Cumulative integral of `f` over the grid intervals, starting from zero at
/// node `anchor`, one adaptive quadrature per interval.
pub fn cumulative_quad<F: Fn(f64) -> f64>(f: F, grid: &Grid, anchor: usize, tol: f64) -> Result<Vec<f64>> {
    let x = grid.nodes();
    let mut out = vec![0.0; x.len()];
    let per = tol / x.len() as f64;
    for i in anchor + 1..x.len() {
        out[i] = out[i - 1] + quad(&f, x[i - 1], x[i], per)?;
    }
    for i in (0..anchor).rev() {
        out[i] = out[i + 1] - quad(&f, x[i], x[i + 1], per)?;
    }
    Ok(out)
}

/// Cumulative Simpson rule from node values and midpoint values, zero at
/// node `anchor`.
pub fn cumulative_simpson(grid: &Grid, at_nodes: &[f64], at_mids: &[f64], anchor: usize) -> Vec<f64> {
    let x = grid.nodes();
    let mut out = vec![0.0; x.len()];
    let piece = |i: usize| (x[i + 1] - x[i]) / 6.0 * (at_nodes[i] + 4.0 * at_mids[i] + at_nodes[i + 1]);
    for i in anchor + 1..x.len() {
        out[i] = out[i - 1] + piece(i - 1);
    }
    for i in (0..anchor).rev() {
        out[i] = out[i + 1] - piece(i);
    }
    out
}

/// Surface area of the unit sphere `S^{d}` in `R^{d+1}`.
pub fn sphere_area(d: usize) -> f64 {
    // 2 pi^{(d+1)/2} / Gamma((d+1)/2)
    let k = d + 1;
    let half_pow = std::f64::consts::PI.powf(k as f64 / 2.0);
    2.0 * half_pow / gamma_half_integer(k)
}

/// `Gamma(k / 2)` for positive integers `k`.
fn gamma_half_integer(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        (1..k / 2).map(|i| i as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x < k as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}
