//! Finite-volume discretisation of `div(q^2 Du / sqrt(1 - q^2 |Du|^2))` on
//! radial grids, a damped Newton solver and discrete comparison probes.

use std::io::Write;
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::geometry::StaticModel;
use crate::numerics::{tridiag_solve, Grid, SampledFunction};
use crate::report::{fmt_num, EstimateReport, Verdict};

/// Default bound on `q |Du|` at faces.
pub const DEFAULT_CAP: f64 = 1.0 - 1e-6;

/// Tolerance of the operator ordering used as a precondition.
const ORDER_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct MeshOperator {
    grid: Grid,
    /// Radial weight at the nodes.
    w_nodes: Vec<f64>,
    w_faces: Vec<f64>,
    q_faces: Vec<f64>,
    cap: f64,
    description: String,
}

impl MeshOperator {
    /// `w = g^{m-1}` and `q = h` from a static model.
    pub fn from_model(model: &StaticModel, grid: Grid) -> Result<Self> {
        let pow = model.m() as i32 - 1;
        let mut w_nodes = Vec::with_capacity(grid.len());
        for &s in grid.nodes() {
            w_nodes.push(model.eval(s)?.profile.g.powi(pow));
        }
        let mut w_faces = Vec::with_capacity(grid.len() - 1);
        let mut q_faces = Vec::with_capacity(grid.len() - 1);
        for s in grid.midpoints() {
            let p = model.eval(s)?;
            w_faces.push(p.profile.g.powi(pow));
            q_faces.push(p.warp.h);
        }
        Self::from_parts(grid, w_nodes, w_faces, q_faces, format!("w = g^(m-1), q = h on {}", model.describe()))
    }

    pub fn from_parts(
        grid: Grid,
        w_nodes: Vec<f64>,
        w_faces: Vec<f64>,
        q_faces: Vec<f64>,
        description: impl Into<String>,
    ) -> Result<Self> {
        let n = grid.len();
        if w_nodes.len() != n || w_faces.len() != n - 1 || q_faces.len() != n - 1 {
            return Err(invalid("weight and coefficient lengths must match the grid"));
        }
        if w_nodes[1..n - 1].iter().chain(&w_faces).any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(invalid("weights must be positive and finite away from the boundary"));
        }
        if q_faces.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
            return Err(invalid("q must be positive and finite"));
        }
        let x = grid.nodes();
        for i in 1..n - 1 {
            let (a, b) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            if a.max(b) > 10.0 * a.min(b) {
                return Err(Error::InvalidGrid(format!("cell sizes jump by more than 10x at s = {}", x[i])));
            }
        }
        Ok(MeshOperator { grid, w_nodes, w_faces, q_faces, cap: DEFAULT_CAP, description: description.into() })
    }

    pub fn with_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0 && cap < 1.0) {
            return Err(invalid(format!("slope cap must lie in (0, 1), got {cap}")));
        }
        self.cap = cap;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.grid.len() {
            return Err(invalid(format!("expected {} values, got {}", self.grid.len(), u.len())));
        }
        Ok(())
    }

    /// `q |Du|` at each face.
    pub fn face_steepness(&self, u: &[f64]) -> Vec<f64> {
        let x = self.grid.nodes();
        (0..x.len() - 1)
            .map(|j| self.q_faces[j] * ((u[j + 1] - u[j]) / (x[j + 1] - x[j])).abs())
            .collect()
    }

    /// Face fluxes `q^2 p / sqrt(1 - q^2 p^2)` with `p` the difference quotient.
    pub fn face_flux(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let steep = self.face_steepness(u);
        let bad: Vec<usize> = steep.iter().enumerate().filter(|(_, &v)| !(v <= self.cap)).map(|(j, _)| j).collect();
        if !bad.is_empty() {
            let shown: Vec<String> = bad.iter().take(8).map(|j| j.to_string()).collect();
            return Err(invalid(format!(
                "slope cap {} exceeded at {} face(s): {}",
                fmt_num(self.cap),
                bad.len(),
                shown.join(", ")
            )));
        }
        let x = self.grid.nodes();
        Ok((0..x.len() - 1)
            .map(|j| {
                let q = self.q_faces[j];
                let p = (u[j + 1] - u[j]) / (x[j + 1] - x[j]);
                q * q * p / (1.0 - q * q * p * p).sqrt()
            })
            .collect())
    }

    /// `w_i` times the dual cell length.
    pub fn cell_measure(&self, i: usize) -> f64 {
        let x = self.grid.nodes();
        self.w_nodes[i] * 0.5 * (x[i + 1] - x[i - 1])
    }

    /// Discrete divergence at the interior nodes; zero at both ends.
    pub fn divergence(&self, u: &[f64]) -> Result<Vec<f64>> {
        let flux = self.face_flux(u)?;
        let n = self.grid.len();
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = (self.w_faces[i] * flux[i] - self.w_faces[i - 1] * flux[i - 1]) / self.cell_measure(i);
        }
        Ok(out)
    }

    /// Divergence minus `rhs` at interior nodes; zero at both ends.
    pub fn residual(&self, u: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(rhs)?;
        let mut r = self.divergence(u)?;
        let n = r.len();
        for i in 1..n - 1 {
            r[i] -= rhs[i];
        }
        Ok(r)
    }

    /// `sum_i |cell_i| r_i - (boundary fluxes - sum_i |cell_i| rhs_i)`,
    /// relative to the size of the terms.
    pub fn telescoping_defect(&self, u: &[f64], rhs: &[f64]) -> Result<f64> {
        let r = self.residual(u, rhs)?;
        let flux = self.face_flux(u)?;
        let n = r.len();
        let (mut lhs, mut source, mut scale) = (0.0, 0.0, 0.0_f64);
        for i in 1..n - 1 {
            let c = self.cell_measure(i);
            lhs += c * r[i];
            source += c * rhs[i];
            scale = scale.max((c * r[i]).abs()).max((c * rhs[i]).abs());
        }
        let boundary = self.w_faces[n - 2] * flux[n - 2] - self.w_faces[0] * flux[0];
        scale = scale.max(boundary.abs()).max(1.0);
        Ok((lhs - (boundary - source)).abs() / scale)
    }

    /// Size of the residual that rounding alone can produce at `u`: the
    /// face fluxes plus the error of the difference quotients, amplified
    /// by `dPhi/dp`.
    pub fn roundoff_floor(&self, u: &[f64], rhs: &[f64]) -> Result<f64> {
        let flux = self.face_flux(u)?;
        let coef = self.face_coefficients(u);
        let n = u.len();
        let face = |j: usize| (self.w_faces[j] * flux[j]).abs() + coef[j] * (u[j].abs() + u[j + 1].abs());
        let mut floor = 0.0_f64;
        for i in 1..n - 1 {
            floor = floor.max((face(i) + face(i - 1)) / self.cell_measure(i) + rhs[i].abs());
        }
        Ok(16.0 * f64::EPSILON * floor)
    }

    /// `w d(Phi)/dp / d` per face: the Jacobian couplings.
    fn face_coefficients(&self, u: &[f64]) -> Vec<f64> {
        let x = self.grid.nodes();
        (0..x.len() - 1)
            .map(|j| {
                let q = self.q_faces[j];
                let d = x[j + 1] - x[j];
                let p = (u[j + 1] - u[j]) / d;
                let a = 1.0 - q * q * p * p;
                self.w_faces[j] * q * q / (a * a.sqrt() * d)
            })
            .collect()
    }

    /// Tridiagonal Jacobian of the residual in the interior unknowns.
    fn jacobian(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let x = self.grid.nodes();
        let n = x.len();
        let coef = self.face_coefficients(u);
        let dim = n - 2;
        let (mut sub, mut diag, mut sup) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
        for k in 0..dim {
            let i = k + 1;
            let c = self.cell_measure(i);
            sub[k] = coef[i - 1] / c;
            sup[k] = coef[i] / c;
            diag[k] = -(coef[i - 1] + coef[i]) / c;
        }
        (sub, diag, sup)
    }
}

#[derive(Clone, Debug)]
pub struct DirichletProblem {
    pub op: MeshOperator,
    pub rhs: Vec<f64>,
    pub left: f64,
    pub right: f64,
}

impl DirichletProblem {
    pub fn new(op: MeshOperator, rhs: Vec<f64>, left: f64, right: f64) -> Result<Self> {
        op.check_len(&rhs)?;
        if rhs.iter().any(|v| !v.is_finite()) || !left.is_finite() || !right.is_finite() {
            return Err(invalid("right-hand side and boundary values must be finite"));
        }
        Ok(DirichletProblem { op, rhs, left, right })
    }

    pub fn from_fn(op: MeshOperator, rhs: impl Fn(f64) -> f64, left: f64, right: f64) -> Result<Self> {
        let values = op.grid.nodes().iter().map(|&s| rhs(s)).collect();
        Self::new(op, values, left, right)
    }

    fn linear_guess(&self) -> Vec<f64> {
        let x = self.op.grid.nodes();
        let (a, b) = (x[0], x[x.len() - 1]);
        x.iter().map(|&s| self.left + (self.right - self.left) * (s - a) / (b - a)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Initial step fraction in `(0, 1]`.
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { damping: 1.0, tol: 1e-10, max_iter: 100 }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub solution: SampledFunction,
    pub iterations: usize,
    pub residual: f64,
    /// Number of continuation stages (0 for a cold-start success).
    pub continuation_stages: usize,
}

fn sup_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn newton_stage(p: &DirichletProblem, rhs: &[f64], mut u: Vec<f64>, opts: &NewtonOptions) -> Result<(Vec<f64>, usize, f64)> {
    let op = &p.op;
    let mut r = op.residual(&u, rhs)?;
    let mut norm = sup_norm(&r);
    let mut iters = 0;
    while norm > opts.tol {
        if iters >= opts.max_iter {
            return Err(Error::NonConvergence { what: "Newton iteration", estimate: norm });
        }
        iters += 1;
        let (sub, diag, sup) = op.jacobian(&u);
        let neg: Vec<f64> = r[1..r.len() - 1].iter().map(|v| -v).collect();
        let step = tridiag_solve(&sub[1..], &diag, &sup[..sup.len() - 1], &neg)?;
        let mut lambda = opts.damping;
        let mut accepted = false;
        while lambda * sup_norm(&step) >= 1e-14 {
            let mut trial = u.clone();
            for (k, d) in step.iter().enumerate() {
                trial[k + 1] += lambda * d;
            }
            if op.face_steepness(&trial).iter().all(|&v| v <= op.cap) {
                let rt = op.residual(&trial, rhs)?;
                let nt = sup_norm(&rt);
                if nt < norm || nt <= opts.tol {
                    u = trial;
                    r = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            if norm <= op.roundoff_floor(&u, rhs)? {
                break;
            }
            return Err(Error::NonConvergence { what: "Newton line search (stagnation)", estimate: norm });
        }
    }
    Ok((u, iters, norm))
}

/// Damped Newton from the linear interpolant, falling back to continuation
/// in the size of the right-hand side.
pub fn newton_solve(problem: &DirichletProblem, opts: &NewtonOptions) -> Result<NewtonOutcome> {
    if !(opts.tol > 0.0 && opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(invalid("Newton needs tol > 0 and damping in (0, 1]"));
    }
    let guess = problem.linear_guess();
    if problem.op.face_steepness(&guess).iter().any(|&v| v > problem.op.cap) {
        return Err(invalid("boundary data admit no spacelike linear interpolant"));
    }
    let finish = |u: Vec<f64>, iterations, residual, stages| -> Result<NewtonOutcome> {
        Ok(NewtonOutcome {
            solution: SampledFunction::new(problem.op.grid.clone(), u)?,
            iterations,
            residual,
            continuation_stages: stages,
        })
    };
    let cold = newton_stage(problem, &problem.rhs, guess.clone(), opts);
    let first_err = match cold {
        Ok((u, it, res)) => return finish(u, it, res, 0),
        Err(e) => e,
    };
    for stages in [4, 16, 64] {
        let mut u = guess.clone();
        let mut total = 0;
        let mut ok = true;
        let mut last = f64::NAN;
        for k in 1..=stages {
            let t = k as f64 / stages as f64;
            let rhs: Vec<f64> = problem.rhs.iter().map(|v| t * v).collect();
            match newton_stage(problem, &rhs, u.clone(), opts) {
                Ok((next, it, res)) => {
                    u = next;
                    total += it;
                    last = res;
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return finish(u, total, last, stages);
        }
    }
    Err(first_err)
}

/// Discrete comparison: ordered operator values and boundary data imply
/// `u >= v`; unmet hypotheses give a precondition verdict.
pub fn comparison_check(op: &MeshOperator, u: &[f64], v: &[f64], rhs_u: &[f64], rhs_v: &[f64]) -> Result<EstimateReport> {
    let ru = op.residual(u, rhs_u)?;
    let rv = op.residual(v, rhs_v)?;
    let n = u.len();
    for i in 1..n - 1 {
        if ru[i] > rv[i] + ORDER_TOL || rhs_u[i] > rhs_v[i] + ORDER_TOL {
            return Ok(EstimateReport::precondition(
                "comparison",
                format!("operator ordering fails at s = {}", fmt_num(op.grid.nodes()[i])),
            ));
        }
    }
    if u[0] < v[0] || u[n - 1] < v[n - 1] {
        return Ok(EstimateReport::precondition("comparison", "boundary values are not ordered"));
    }
    let min = u.iter().zip(v).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    Ok(EstimateReport::lower_bound("comparison", min, 0.0, 1e-8).with_grid(crate::report::GridMeta::of(&op.grid)))
}

/// Discrete strong maximum principle for a nonnegative supersolution.
pub fn strongmax_probe(op: &MeshOperator, u: &[f64]) -> Result<EstimateReport> {
    let div = op.divergence(u)?;
    let n = u.len();
    if u.iter().any(|&v| v < -1e-12) {
        return Ok(EstimateReport::precondition("strong-max", "u takes negative values"));
    }
    if let Some(i) = (1..n - 1).find(|&i| div[i] > ORDER_TOL) {
        return Ok(EstimateReport::precondition(
            "strong-max",
            format!("u is not a supersolution at s = {}", fmt_num(op.grid.nodes()[i])),
        ));
    }
    let min = u[1..n - 1].iter().copied().fold(f64::INFINITY, f64::min);
    let max = u.iter().copied().fold(0.0, f64::max);
    if min <= 1e-12 {
        Ok(EstimateReport::upper_bound("strong-max", max, 0.0, 1e-10).with_note("interior zero: constancy required"))
    } else {
        Ok(EstimateReport::classified("strong-max", min, Verdict::Pass).with_note("no interior zero"))
    }
}

/// Writes `<stem>.csv` (`s,u`) and `<stem>.txt` describing the problem.
pub fn write_solution(dir: &Path, stem: &str, problem: &DirichletProblem, u: &SampledFunction) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(format!("{stem}.csv")))?;
    w.write_record(["s", "u"])?;
    for (s, v) in u.nodes().iter().zip(&u.values) {
        w.write_record([fmt_num(*s), fmt_num(*v)])?;
    }
    w.flush()?;
    let mut side = std::fs::File::create(dir.join(format!("{stem}.txt")))?;
    writeln!(side, "operator: {}", problem.op.description)?;
    writeln!(side, "nodes: {} on [{}, {}]", u.grid.len(), fmt_num(u.grid.first()), fmt_num(u.grid.last()))?;
    writeln!(side, "cap: {}", fmt_num(problem.op.cap))?;
    writeln!(side, "boundary: {} {}", fmt_num(problem.left), fmt_num(problem.right))?;
    let rmax = problem.rhs.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    writeln!(side, "rhs sup: {}", fmt_num(rmax))?;
    Ok(())
}

/// Reads an `s,u` CSV.
pub fn read_solution(path: &Path) -> Result<SampledFunction> {
    let mut rd = csv::Reader::from_path(path)?;
    let headers = rd.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["s", "u"] {
        return Err(Error::Parse { line: 1, msg: "expected header s,u".into() });
    }
    let (mut s, mut u) = (Vec::new(), Vec::new());
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let parse = |j: usize| -> Result<f64> {
            rec.get(j)
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| Error::Parse { line: k + 2, msg: format!("bad number in column {}", j + 1) })
        };
        s.push(parse(0)?);
        u.push(parse(1)?);
    }
    SampledFunction::new(Grid::from_nodes(s)?, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadialBase;
    use crate::graph::oracle_catenoid;
    use approx::assert_abs_diff_eq;

    fn euclid_op(n: usize) -> MeshOperator {
        let model = StaticModel::product(RadialBase::euclidean(2).unwrap());
        MeshOperator::from_model(&model, Grid::uniform(1.0, 2.0, n).unwrap()).unwrap()
    }

    fn catenoid(op: &MeshOperator) -> Vec<f64> {
        op.grid().nodes().iter().map(|&s| oracle_catenoid(2, 1.0, 1.0, s).unwrap()).collect()
    }

    #[test]
    fn slice_residual_is_minus_rhs() {
        let op = euclid_op(50);
        let rhs = vec![0.7; 50];
        let r = op.residual(&vec![3.0; 50], &rhs).unwrap();
        assert!(r[1..49].iter().all(|&v| (v + 0.7).abs() < 1e-15));
    }

    #[test]
    fn catenoid_residual_second_order() {
        let r400 = {
            let op = euclid_op(400);
            sup_norm(&op.residual(&catenoid(&op), &vec![0.0; 400]).unwrap())
        };
        let r800 = {
            let op = euclid_op(800);
            sup_norm(&op.residual(&catenoid(&op), &vec![0.0; 800]).unwrap())
        };
        assert!(r400 <= 5e-4 && r800 <= 1.3e-4, "{r400} {r800}");
    }

    #[test]
    fn linear_with_flat_weight_is_exact() {
        let grid = Grid::uniform(0.0, 1.0, 20).unwrap();
        let op = MeshOperator::from_parts(grid.clone(), vec![1.0; 20], vec![1.0; 19], vec![1.0; 19], "flat").unwrap();
        let u: Vec<f64> = grid.nodes().iter().map(|s| 0.3 * s).collect();
        assert!(sup_norm(&op.residual(&u, &[0.0; 20]).unwrap()) < 1e-12);
    }

    #[test]
    fn newton_matches_catenoid() {
        let op = euclid_op(400);
        let right = oracle_catenoid(2, 1.0, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(right, 0.5622618882, epsilon = 1e-9);
        let p = DirichletProblem::new(op.clone(), vec![0.0; 400], 0.0, right).unwrap();
        let out = newton_solve(&p, &NewtonOptions::default()).unwrap();
        let err = out.solution.max_abs_diff(|s| oracle_catenoid(2, 1.0, 1.0, s).unwrap());
        assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn newton_slice_is_immediate() {
        let p = DirichletProblem::new(euclid_op(30), vec![0.0; 30], 1.0, 1.0).unwrap();
        let out = newton_solve(&p, &NewtonOptions::default()).unwrap();
        assert!(out.iterations <= 1);
        assert!(out.solution.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn spacelike_cap_enforced() {
        let op = euclid_op(10);
        let mut u = vec![0.0; 10];
        u[5] = 1.0;
        assert!(op.residual(&u, &[0.0; 10]).is_err());
        let p = DirichletProblem::new(op, vec![0.0; 10], 0.0, 2.0);
        assert!(newton_solve(&p.unwrap(), &NewtonOptions::default()).is_err());
    }

    #[test]
    fn comparison_cases() {
        let op = euclid_op(100);
        let u = catenoid(&op);
        let zero = vec![0.0; 100];
        assert!(comparison_check(&op, &u, &u, &zero, &zero).unwrap().passed());
        let lower: Vec<f64> = u.iter().map(|v| v - 0.1).collect();
        let r = comparison_check(&op, &u, &lower, &zero, &zero).unwrap();
        assert!(r.passed());
        assert_abs_diff_eq!(r.lhs, 0.1, epsilon = 1e-12);
        let mut bump = u.clone();
        bump[50] += 0.002;
        let r = comparison_check(&op, &u, &bump, &zero, &zero).unwrap();
        assert_eq!(r.verdict, Verdict::Precondition);
    }

    #[test]
    fn strongmax_cases() {
        let op = euclid_op(40);
        let r = strongmax_probe(&op, &vec![0.0; 40]).unwrap();
        assert!(r.passed() && r.notes[0].contains("constancy"));
        let r = strongmax_probe(&op, &vec![3.0; 40]).unwrap();
        assert!(r.passed() && r.notes[0].contains("no interior zero"));
    }

    #[test]
    fn rejects_degenerate_cells() {
        let grid = Grid::from_nodes((0..10).map(|i| if i < 5 { i as f64 * 0.01 } else { 1.0 + i as f64 }).collect()).unwrap();
        let model = StaticModel::product(RadialBase::euclidean(2).unwrap().with_domain(0.0, 100.0).unwrap());
        assert!(MeshOperator::from_model(&model, grid).is_err());
    }

    #[test]
    fn solution_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let op = euclid_op(20);
        let p = DirichletProblem::new(op.clone(), vec![0.0; 20], 0.0, 0.1).unwrap();
        let out = newton_solve(&p, &NewtonOptions::default()).unwrap();
        write_solution(dir.path(), "sol", &p, &out.solution).unwrap();
        let back = read_solution(&dir.path().join("sol.csv")).unwrap();
        assert_eq!(back.values, out.solution.values);
        assert!(std::fs::read_to_string(dir.path().join("sol.txt")).unwrap().contains("cap"));
    }
}
