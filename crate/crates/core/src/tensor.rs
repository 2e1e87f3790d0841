//! Small dense tensors in orthonormal frames: symmetric 2-forms, algebraic
//! curvature tensors, and the pointwise inequalities used by the estimates.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::geometry::{base_curvature, radial_hessian, StaticModel};
use crate::numerics::sym_eigen;

/// Symmetric bilinear form on `R^n`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymForm {
    n: usize,
    data: Vec<f64>,
}

impl SymForm {
    pub fn zeros(n: usize) -> Self {
        SymForm { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut f = Self::zeros(n);
        for (i, &v) in d.iter().enumerate() {
            f.data[i * n + i] = v;
        }
        f
    }

    /// `u u^T`.
    pub fn outer(u: &[f64]) -> Self {
        let n = u.len();
        let mut f = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                f.data[i * n + j] = u[i] * u[j];
            }
        }
        f
    }

    /// Builds from row-major data, rejecting asymmetric input.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(invalid(format!("expected {} entries, got {}", n * n, data.len())));
        }
        let scale = data.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            for j in 0..i {
                let d = (data[i * n + j] - data[j * n + i]).abs();
                if d > 1e-12 * scale {
                    return Err(Error::NotSymmetric(d));
                }
            }
        }
        Ok(SymForm { n, data })
    }

    /// Symmetrises arbitrary row-major data.
    pub fn symmetrized(n: usize, data: &[f64]) -> Self {
        let mut f = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                f.data[i * n + j] = 0.5 * (data[i * n + j] + data[j * n + i]);
            }
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(&self.apply(u), v)
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymForm { n: self.n, data: self.data.iter().map(|x| c * x).collect() }
    }

    pub fn add(&self, other: &SymForm) -> Self {
        SymForm { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    /// Frobenius inner product `sum a_ij b_ij`.
    pub fn contract(&self, other: &SymForm) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(sym_eigen(&self.data, self.n)?.values)
    }

    pub fn max_abs_diff(&self, other: &SymForm) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Covariant 4-tensor on `R^n`, dense.
#[derive(Clone, Debug, PartialEq)]
pub struct Curv4Tensor {
    n: usize,
    data: Vec<f64>,
}

impl Curv4Tensor {
    pub fn zeros(n: usize) -> Self {
        Curv4Tensor { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let ix = self.idx(i, j, k, l);
        self.data[ix] = v;
    }

    pub fn add_assign(&mut self, other: &Curv4Tensor) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Sets `R(i,j,i,j) = k` together with the entries forced by the
    /// curvature symmetries.
    fn set_sectional(&mut self, i: usize, j: usize, k: f64) {
        self.set(i, j, i, j, k);
        self.set(j, i, j, i, k);
        self.set(i, j, j, i, -k);
        self.set(j, i, i, j, -k);
    }

    /// `Ric(Y, Z) = sum_a eps_a R(e_a, Z, e_a, Y)` for frame signs `eps`.
    pub fn ricci(&self, signs: &[f64]) -> SymForm {
        let n = self.n;
        let mut raw = vec![0.0; n * n];
        for y in 0..n {
            for z in 0..n {
                raw[y * n + z] = (0..n).map(|a| signs[a] * self.get(a, z, a, y)).sum();
            }
        }
        SymForm::symmetrized(n, &raw)
    }

    /// Largest violation of antisymmetry, pair symmetry and the first
    /// Bianchi identity.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        worst = worst
                            .max((r + self.get(j, i, k, l)).abs())
                            .max((r + self.get(i, j, l, k)).abs())
                            .max((r - self.get(k, l, i, j)).abs())
                            .max((r + self.get(j, k, i, l) + self.get(k, i, j, l)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// `(a ⊘ b)(X1,X2,X3,X4) = a13 b24 + a24 b13 - a14 b23 - a23 b14`.
pub fn kulkarni_nomizu(a: &SymForm, b: &SymForm) -> Result<Curv4Tensor> {
    if a.dim() != b.dim() {
        return Err(invalid("Kulkarni-Nomizu factors have different dimensions"));
    }
    let n = a.dim();
    let mut t = Curv4Tensor::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = a.get(i, k) * b.get(j, l) + a.get(j, l) * b.get(i, k)
                        - a.get(i, l) * b.get(j, k)
                        - a.get(j, k) * b.get(i, l);
                    t.set(i, j, k, l, v);
                }
            }
        }
    }
    Ok(t)
}

/// Spacetime curvature in the frame `e_1 = d_s`, tangential unit vectors,
/// `e_{m+1} = d_t / h`.
#[derive(Clone, Debug)]
pub struct StaticFrameCurvature {
    pub riemann: Curv4Tensor,
    /// Frame signs `(+1, ..., +1, -1)`.
    pub signs: Vec<f64>,
}

impl StaticFrameCurvature {
    pub fn ricci(&self) -> SymForm {
        self.riemann.ricci(&self.signs)
    }
}

/// `Riem = Riem^P + (h Hess h) ⊘ (dt ⊗ dt)` in the static frame.
pub fn static_riemann(model: &StaticModel, s: f64) -> Result<StaticFrameCurvature> {
    let m = model.m();
    let n = m + 1;
    if n > crate::numerics::EIGEN_MAX_DIM {
        return Err(invalid(format!("static frame limited to m <= {}", crate::numerics::EIGEN_MAX_DIM - 1)));
    }
    let p = model.eval(s)?;
    let curv = base_curvature(&model.base, s)?;
    let hess = radial_hessian(&model.base, s, p.warp.dh, p.warp.ddh)?;
    let h = p.warp.h;
    if h <= 0.0 {
        return Err(invalid(format!("warp vanishes at s = {s}")));
    }
    let mut riem = Curv4Tensor::zeros(n);
    for i in 0..m {
        for j in i + 1..m {
            let k = if i == 0 { curv.k_rad } else { curv.k_tan };
            riem.set_sectional(i, j, k);
        }
    }
    let mut hh = SymForm::zeros(n);
    hh.set(0, 0, h * hess.rr);
    for a in 1..m {
        hh.set(a, a, h * hess.tt);
    }
    let mut dtdt = SymForm::zeros(n);
    dtdt.set(m, m, 1.0 / (h * h));
    riem.add_assign(&kulkarni_nomizu(&hh, &dtdt)?);
    let mut signs = vec![1.0; n];
    signs[m] = -1.0;
    Ok(StaticFrameCurvature { riemann: riem, signs })
}

fn check_spacelike(label: &str, x: &[f64]) -> Result<f64> {
    let n2 = norm_sq(x);
    if !(n2 < 1.0) {
        return Err(Error::NotInUnitBall { label: label.to_string(), norm: n2.sqrt() });
    }
    Ok(n2)
}

/// `<X/sqrt(1-|X|^2) - Y/sqrt(1-|Y|^2), X - Y>`, nonnegative for `|X|, |Y| < 1`.
pub fn coercivity_gap(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid("vectors of different length"));
    }
    let ax = 1.0 / (1.0 - check_spacelike("X", x)?).sqrt();
    let ay = 1.0 / (1.0 - check_spacelike("Y", y)?).sqrt();
    Ok(x.iter().zip(y).map(|(xi, yi)| (ax * xi - ay * yi) * (xi - yi)).sum())
}

/// Gradient/Hessian data at a point of a spacelike graph, in a frame where
/// the base metric is the identity.
#[derive(Clone, Debug)]
pub struct GradHessPoint {
    pub u: Vec<f64>,
    pub hess: SymForm,
    pub alpha: f64,
}

impl GradHessPoint {
    pub fn new(u: Vec<f64>, hess: SymForm, alpha: f64) -> Result<Self> {
        if u.len() != hess.dim() {
            return Err(invalid("gradient and Hessian dimensions differ"));
        }
        check_spacelike("Du", &u)?;
        Ok(GradHessPoint { u, hess, alpha })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// `Theta = 1 / sqrt(1 - |Du|^2)`.
    pub fn theta(&self) -> f64 {
        1.0 / (1.0 - norm_sq(&self.u)).sqrt()
    }

    /// `a^{ij} = delta + Theta^2 u_i u_j`.
    pub fn a_up(&self) -> SymForm {
        let t2 = self.theta().powi(2);
        SymForm::identity(self.dim()).add(&SymForm::outer(&self.u).scaled(t2))
    }

    /// `a_{ij} = delta - u_i u_j`, the inverse of `a_up`.
    pub fn a_down(&self) -> SymForm {
        SymForm::identity(self.dim()).add(&SymForm::outer(&self.u).scaled(-1.0))
    }

    /// `B = a_up * hess` as a row-major matrix.
    pub fn b_matrix(&self) -> Vec<f64> {
        let n = self.dim();
        let a = self.a_up();
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                b[i * n + j] = (0..n).map(|k| a.get(i, k) * self.hess.get(k, j)).sum();
            }
        }
        b
    }

    /// Eigenvalues of `B`, real because `B` is self-adjoint for `a_down`.
    pub fn b_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let a = self.a_up();
        let l = cholesky(&a)?;
        // L^T hess L is similar to B = L L^T hess.
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        acc += l[p * n + i] * self.hess.get(p, q) * l[q * n + j];
                    }
                }
                s[i * n + j] = acc;
            }
        }
        SymForm::symmetrized(n, &s).eigenvalues()
    }
}

fn cholesky(a: &SymForm) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(invalid("matrix not positive definite"));
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// `T = tr(B^2) - (alpha + 1) Theta^2 a_down(Bu, Bu)` for trace-free `B`.
pub fn pseudo_jacobi_gap(pt: &GradHessPoint) -> Result<f64> {
    let n = pt.dim();
    let b = pt.b_matrix();
    let tr: f64 = (0..n).map(|i| b[i * n + i]).sum();
    let scale = b.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    if tr.abs() > 1e-10 * scale {
        return Err(invalid(format!("B is not trace-free (trace {tr:e})")));
    }
    let tr_b2: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| b[i * n + j] * b[j * n + i]).sum();
    let bu: Vec<f64> = (0..n).map(|i| (0..n).map(|j| b[i * n + j] * pt.u[j]).sum()).collect();
    let t2 = pt.theta().powi(2);
    Ok(tr_b2 - (pt.alpha + 1.0) * t2 * pt.a_down().bilinear(&bu, &bu))
}

/// Removes the `a`-trace: `hess - (a^{ij} hess_ij / a^{ij} delta_ij) delta`.
pub fn project_a_tracefree(u: &[f64], hess: &SymForm) -> Result<SymForm> {
    let pt = GradHessPoint::new(u.to_vec(), hess.clone(), 0.0)?;
    let a = pt.a_up();
    let c = a.contract(hess) / a.trace();
    Ok(hess.add(&SymForm::identity(hess.dim()).scaled(-c)))
}

/// `(m-1) sum_{i>=2} lambda_i^2 - lambda_1^2` for `sum lambda_i = 0`, where
/// `lambda_1` is the entry of largest magnitude.
pub fn newton_gap(lambda: &[f64]) -> Result<f64> {
    let m = lambda.len();
    if m < 2 {
        return Err(invalid("need at least two eigenvalues"));
    }
    let sum: f64 = lambda.iter().sum();
    let scale = lambda.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
    if sum.abs() > 1e-10 * scale {
        return Err(invalid(format!("eigenvalues do not sum to zero (sum {sum:e})")));
    }
    let (imax, l1) = lambda
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, v)| (i, *v))
        .expect("nonempty");
    let rest: f64 = lambda.iter().enumerate().filter(|(i, _)| *i != imax).map(|(_, v)| v * v).sum();
    Ok((m as f64 - 1.0) * rest - l1 * l1)
}

/// Random spacelike gradient with `|u| <= 0.99` and an `a`-trace-free
/// Hessian with entries of size up to `hess_scale`.
pub fn sample_grad_hess<R: Rng>(rng: &mut R, m: usize, alpha: f64, hess_scale: f64) -> GradHessPoint {
    let u = loop {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.99..0.99)).collect();
        if norm_sq(&v) <= 0.99 * 0.99 {
            break v;
        }
    };
    let raw: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-hess_scale..hess_scale)).collect();
    let hess = SymForm::symmetrized(m, &raw);
    let hess = project_a_tracefree(&u, &hess).expect("sampled u is spacelike");
    GradHessPoint { u, hess, alpha }
}

/// Random pair of vectors in the open unit ball of `R^n`.
pub fn sample_ball_pair<R: Rng>(rng: &mut R, n: usize, radius: f64) -> (Vec<f64>, Vec<f64>) {
    let mut draw = || loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..radius)).collect();
        if norm_sq(&v) < radius * radius {
            break v;
        }
    };
    let x = draw();
    let y = draw();
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{spacetime_ricci, RadialBase, Warp};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kulkarni_nomizu_of_metric_is_constant_curvature() {
        let g = SymForm::identity(3);
        let t = kulkarni_nomizu(&g, &g).unwrap();
        // g ⊘ g has sectional curvature 2.
        assert_abs_diff_eq!(t.get(0, 1, 0, 1), 2.0, epsilon = 1e-15);
        assert!(t.symmetry_defect() < 1e-14);
    }

    #[test]
    fn hyperbolic_frame_component() {
        let model = StaticModel::product(RadialBase::hyperbolic(2, 1.0).unwrap());
        let c = static_riemann(&model, 1.3).unwrap();
        assert_abs_diff_eq!(c.riemann.get(0, 1, 0, 1), -1.0, epsilon = 1e-12);
        assert!(c.riemann.symmetry_defect() < 1e-12);
    }

    #[test]
    fn frame_ricci_matches_warped_formula() {
        let base = RadialBase::hyperbolic(3, 0.7).unwrap();
        let model = StaticModel::new(base, Warp::Exponential { rate: 0.3 }).unwrap();
        let s = 1.1;
        let ric = static_riemann(&model, s).unwrap().ricci();
        let r = spacetime_ricci(&model, s).unwrap();
        assert_abs_diff_eq!(ric.get(0, 0), r.rr, epsilon = 1e-12);
        assert_abs_diff_eq!(ric.get(1, 1), r.tt, epsilon = 1e-12);
        assert_abs_diff_eq!(ric.get(3, 3), r.time_frame, epsilon = 1e-12);
        assert_abs_diff_eq!(ric.get(0, 3), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn coercivity_examples() {
        assert_abs_diff_eq!(coercivity_gap(&[0.5], &[-0.5]).unwrap(), 1.1547005384, epsilon = 1e-9);
        let v = coercivity_gap(&[0.9, 0.0], &[0.0, 0.9]).unwrap();
        assert_abs_diff_eq!(v, 1.62 / 0.19_f64.sqrt(), epsilon = 1e-12);
        assert!(coercivity_gap(&[1.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn pseudo_jacobi_examples() {
        let pt = GradHessPoint::new(vec![0.0, 0.0], SymForm::diag(&[1.0, -1.0]), 1.0).unwrap();
        assert_abs_diff_eq!(pseudo_jacobi_gap(&pt).unwrap(), 2.0, epsilon = 1e-14);
        let pt = GradHessPoint::new(vec![0.0; 3], SymForm::diag(&[2.0, -1.0, -1.0]), 0.5).unwrap();
        assert_abs_diff_eq!(pseudo_jacobi_gap(&pt).unwrap(), 6.0, epsilon = 1e-14);
        let bad = GradHessPoint::new(vec![0.0; 2], SymForm::diag(&[1.0, 1.0]), 1.0).unwrap();
        assert!(pseudo_jacobi_gap(&bad).is_err());
    }

    #[test]
    fn projection_is_a_tracefree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pt = sample_grad_hess(&mut rng, 4, 1.0 / 3.0, 5.0);
        let tr: f64 = {
            let b = pt.b_matrix();
            (0..4).map(|i| b[i * 4 + i]).sum()
        };
        assert!(tr.abs() < 1e-10);
        let eig = pt.b_eigenvalues().unwrap();
        assert!(eig.iter().sum::<f64>().abs() < 1e-9);
        assert!(newton_gap(&eig).unwrap() >= -1e-9);
    }

    #[test]
    fn newton_example() {
        assert_abs_diff_eq!(newton_gap(&[1.0, -0.9, -0.1]).unwrap(), 0.64, epsilon = 1e-12);
        assert!(newton_gap(&[1.0, 1.0]).is_err());
    }
}
