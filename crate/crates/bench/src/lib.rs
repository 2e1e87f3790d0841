//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spacelike::elliptic::{DirichletProblem, MeshOperator};
use spacelike::graph::oracle_catenoid;
use spacelike::tensor::{sample_grad_hess, GradHessPoint};
use spacelike::{Grid, RadialBase, StaticModel};

pub fn hyperbolic(m: usize) -> StaticModel {
    StaticModel::product(RadialBase::hyperbolic(m, 1.0).expect("valid base"))
}

/// Catenoid Dirichlet problem on `[1, 2]` in flat `R^2` with `n` nodes.
pub fn catenoid_problem(n: usize) -> DirichletProblem {
    let model = StaticModel::product(RadialBase::euclidean(2).expect("valid base"));
    let op = MeshOperator::from_model(&model, Grid::uniform(1.0, 2.0, n).expect("valid grid")).expect("valid operator");
    let right = oracle_catenoid(2, 0.5, 1.0, 2.0).expect("spacelike catenoid");
    DirichletProblem::new(op, vec![0.0; n], 0.0, right).expect("valid problem")
}

/// Seeded gradient/Hessian samples in dimension `m`.
pub fn grad_hess_samples(m: usize, count: usize) -> Vec<GradHessPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..count).map(|_| sample_grad_hess(&mut rng, m, 1.0 / (m as f64 - 1.0), 1.0)).collect()
}
