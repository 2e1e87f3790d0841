use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spacelike::barrier::{build_barrier_prod0, ComparisonModel};
use spacelike::elliptic::MeshOperator;
use spacelike::estimates::weighted_volumes;
use spacelike::geometry::SchwarzschildMap;
use spacelike::numerics::quad;
use spacelike::tensor::{
    coercivity_gap, kulkarni_nomizu, pseudo_jacobi_gap, sample_ball_pair, sample_grad_hess, SymForm,
};
use spacelike::{Grid, RadialBase, StaticModel};

fn ball_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(-1.0f64..1.0, n), 0.0f64..0.999).prop_map(|(v, r)| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        v.iter().map(|x| x / norm * r).collect()
    })
}

fn sym_form(n: usize) -> impl Strategy<Value = SymForm> {
    prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |d| SymForm::symmetrized(n, &d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coercivity_dominates_distance(n in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = sample_ball_pair(&mut rng, n, 1.0);
        let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        let gap = coercivity_gap(&x, &y).unwrap();
        prop_assert!(gap >= d2 - 1e-12 * (1.0 + gap.abs()), "gap {gap} < {d2}");
    }

    #[test]
    fn coercivity_is_symmetric(x in ball_vec(3), y in ball_vec(3)) {
        let a = coercivity_gap(&x, &y).unwrap();
        let b = coercivity_gap(&y, &x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn pseudo_jacobi_is_nonnegative(m in 2usize..7, seed in any::<u64>(), scale in 0.01f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = sample_grad_hess(&mut rng, m, 1.0 / (m as f64 - 1.0), scale);
        let gap = pseudo_jacobi_gap(&pt).unwrap();
        prop_assert!(gap >= -1e-10 * (1.0 + scale * scale), "gap {gap}");
    }

    #[test]
    fn kulkarni_nomizu_has_curvature_symmetries(n in 2usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || {
            let d: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            SymForm::symmetrized(n, &d)
        };
        let (a, b) = (draw(), draw());
        let ab = kulkarni_nomizu(&a, &b).unwrap();
        prop_assert!(ab.symmetry_defect() < 1e-12);
        let ba = kulkarni_nomizu(&b, &a).unwrap();
        for i in 0..n { for j in 0..n { for k in 0..n { for l in 0..n {
            prop_assert!((ab.get(i, j, k, l) - ba.get(i, j, k, l)).abs() < 1e-12);
        }}}}
    }

    #[test]
    fn kulkarni_nomizu_is_bilinear(a in sym_form(3), b in sym_form(3), c in sym_form(3), t in -3.0f64..3.0) {
        let lhs = kulkarni_nomizu(&a.add(&b.scaled(t)), &c).unwrap();
        let ac = kulkarni_nomizu(&a, &c).unwrap();
        let bc = kulkarni_nomizu(&b, &c).unwrap();
        for i in 0..3 { for j in 0..3 { for k in 0..3 { for l in 0..3 {
            let want = ac.get(i, j, k, l) + t * bc.get(i, j, k, l);
            prop_assert!((lhs.get(i, j, k, l) - want).abs() < 1e-11);
        }}}}
    }

    #[test]
    fn schwarzschild_radius_roundtrip(m in 3usize..7, mu in 0.1f64..3.0, t in 1.0001f64..20.0) {
        let map = SchwarzschildMap::new(mu, m).unwrap();
        let rho = map.horizon_radius() * t;
        let s = map.s_of_rho(rho).unwrap();
        let back = map.rho_of_s(s).unwrap();
        prop_assert!((back - rho).abs() <= 1e-9 * rho, "{rho} -> {s} -> {back}");
    }

    #[test]
    fn quadrature_is_exact_on_cubics(c in prop::array::uniform4(-5.0f64..5.0), a in -3.0f64..3.0, w in 0.01f64..5.0) {
        let b = a + w;
        let p = |x: f64| c[0] + x * (c[1] + x * (c[2] + x * c[3]));
        let prim = |x: f64| x * (c[0] + x * (c[1] / 2.0 + x * (c[2] / 3.0 + x * c[3] / 4.0)));
        let got = quad(p, a, b, 1e-12).unwrap();
        let want = prim(b) - prim(a);
        prop_assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()));
    }
}

fn euclid_operator(m: usize, n: usize) -> MeshOperator {
    let model = StaticModel::product(RadialBase::euclidean(m).unwrap());
    MeshOperator::from_model(&model, Grid::uniform(1.0, 2.0, n).unwrap()).unwrap()
}

/// Random profile on `[1, 2]` with steepness below 0.5.
fn gentle_profile(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1.0 / (n as f64 - 1.0);
    let mut u = vec![0.0];
    for _ in 1..n {
        let p: f64 = rng.gen_range(-0.5..0.5);
        u.push(u.last().unwrap() + p * h);
    }
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn residual_telescopes(m in 2usize..5, n in 8usize..80, seed in any::<u64>(), h0 in -2.0f64..2.0) {
        let op = euclid_operator(m, n);
        let u = gentle_profile(n, seed);
        let rhs = vec![m as f64 * h0; n];
        prop_assert!(op.telescoping_defect(&u, &rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn residual_is_monotone_in_each_node(n in 8usize..40, seed in any::<u64>(), pick in 0.0f64..1.0) {
        let op = euclid_operator(3, n);
        let u = gentle_profile(n, seed);
        let rhs = vec![0.0; n];
        let i = 1 + ((n - 2) as f64 * pick) as usize % (n - 2);
        let mut v = u.clone();
        v[i] += 1e-4 / n as f64;
        let r0 = op.residual(&u, &rhs).unwrap();
        let r1 = op.residual(&v, &rhs).unwrap();
        prop_assert!(r1[i] < r0[i]);
        if i > 1 { prop_assert!(r1[i - 1] > r0[i - 1]); }
        if i + 1 < n - 1 { prop_assert!(r1[i + 1] > r0[i + 1]); }
        for j in (1..n - 1).filter(|&j| j + 1 < i || j > i + 1) {
            prop_assert_eq!(r1[j], r0[j]);
        }
    }

    #[test]
    fn barrier_level_scales_flux(g0 in 0.0f64..1.0, eps in 0.01f64..0.05) {
        let cmp = ComparisonModel::Constant { g0 };
        let full = build_barrier_prod0(2, &cmp, 1.0, 2.0, eps, &|_| 1.0, 10.0, 400).unwrap();
        let half = build_barrier_prod0(2, &cmp, 1.0, 2.0, eps / 2.0, &|_| 1.0, 10.0, 400).unwrap();
        prop_assert!(full.c < 1.0);
        prop_assert!((half.c - full.c / 2.0).abs() <= 1e-14 * full.c);
        for (a, b) in full.f.iter().zip(&half.f) {
            prop_assert!((b - a / 2.0).abs() <= 1e-13 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn barrier_is_nondecreasing_and_spacelike(g0 in 0.0f64..1.0, eps in 0.01f64..2.0, a0 in 0.1f64..3.0) {
        let cmp = ComparisonModel::Constant { g0 };
        let b = build_barrier_prod0(3, &cmp, 1.0, 3.0, eps, &|_| a0, 12.0, 600).unwrap();
        for w in b.u0.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        let x = b.grid.nodes();
        for i in 0..x.len() - 1 {
            let slope = (b.u0[i + 1] - b.u0[i]) / (x[i + 1] - x[i]);
            prop_assert!((0.0..1.0).contains(&slope), "slope {slope} at {}", x[i]);
        }
        prop_assert!(b.u0[b.outer_index()] <= eps * (1.0 + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn volume_is_integral_of_boundary_volume(m in 2usize..5, b in 0.2f64..2.0, r in 0.5f64..4.0) {
        let model = StaticModel::product(RadialBase::hyperbolic(m, b).unwrap());
        let vol = weighted_volumes(&model, &[r]).unwrap().vol[0];
        let area = |s: f64| weighted_volumes(&model, &[s.max(1e-12)]).unwrap().bvol[0];
        let coarea = quad(area, 0.0, r, 1e-11).unwrap();
        prop_assert!((vol - coarea).abs() <= 1e-8 * vol, "{vol} vs {coarea}");
    }
}
