use npqn_core::decomp::{Sweep, TuckerProblem};
use npqn_core::manifold::*;
use npqn_core::precond::{LineSearch, QnConfig, QnFamily, Variant};
use npqn_core::problems::rng::{normals, stream, Purpose};
use npqn_core::problems::random_orthonormal;
use npqn_core::trace::{StopRule, Termination};
use npqn_core::{DenseTensor, Matrix};
use proptest::prelude::*;

fn point(n: usize, p: usize, seed: u64) -> Matrix {
    random_orthonormal(&mut stream(seed, 0, Purpose::Factors), n, p).unwrap()
}

fn gauss(n: usize, p: usize, seed: u64, trial: u64) -> Matrix {
    Matrix::new(n, p, normals(&mut stream(seed, trial, Purpose::Probe), n * p)).unwrap()
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..5).prop_flat_map(|p| (p + 1..p + 9, Just(p)))
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_horizontal((n, p) in dims(), seed in any::<u64>()) {
        let x = point(n, p, seed);
        let z = gauss(n, p, seed, 1);
        let pz = project_horizontal(&x, &z);
        prop_assert!(project_horizontal(&x, &pz).sub(&pz).frob_norm() <= 1e-13 * z.frob_norm());
        prop_assert!(x.t_mul(&pz).frob_norm() <= 1e-10 * z.frob_norm());
    }

    #[test]
    fn exp_stays_on_the_manifold_and_log_inverts_it((n, p) in dims(), seed in any::<u64>(), len in 1e-3f64..0.1, t in -2.0f64..2.0) {
        let x = point(n, p, seed);
        let xi = project_horizontal(&x, &gauss(n, p, seed, 1));
        let xi = xi.scaled(len / xi.frob_norm());
        prop_assert!(grassmann_exp(&x, &xi, t * 10.0).unwrap().orthonormality_error() <= 1e-12);
        let y = grassmann_exp(&x, &xi, 1.0).unwrap();
        prop_assert!(grassmann_log(&x, &y).unwrap().sub(&xi).frob_norm() <= 1e-8);
    }

    #[test]
    fn transport_is_an_isometry_into_the_destination_tangent_space((n, p) in dims(), seed in any::<u64>(), t in 0.0f64..1.5) {
        let x = point(n, p, seed);
        let xi = project_horizontal(&x, &gauss(n, p, seed, 1));
        let e1 = project_horizontal(&x, &gauss(n, p, seed, 2));
        let e2 = project_horizontal(&x, &gauss(n, p, seed, 3));
        let g = Geodesic::new(&x, &xi).unwrap();
        let y = g.exp(&x, t).unwrap();
        let (t1, t2) = (g.transport(t, &e1), g.transport(t, &e2));
        let scale = e1.frob_norm() * e2.frob_norm();
        prop_assert!((t1.inner(&t2) - e1.inner(&e2)).abs() <= 1e-10 * scale);
        prop_assert!(y.t_mul(&t1).frob_norm() <= 1e-10 * e1.frob_norm());
        let ts = g.transport_self(t);
        prop_assert!((ts.frob_norm() - xi.frob_norm()).abs() <= 1e-10 * xi.frob_norm());
    }

    #[test]
    fn log_of_a_rotated_basis_is_zero((n, p) in dims(), seed in any::<u64>()) {
        let x = point(n, p, seed);
        let q = random_orthonormal(&mut stream(seed, 0, Purpose::Core), p, p).unwrap();
        prop_assert!(grassmann_log(&x, &x.mul(&q)).unwrap().frob_norm() <= 1e-10);
    }

    #[test]
    fn product_inner_is_the_sum_of_traces(seed in any::<u64>()) {
        let a = vec![gauss(4, 2, seed, 1), gauss(3, 3, seed, 2)];
        let b = vec![gauss(4, 2, seed, 3), gauss(3, 3, seed, 4)];
        let want: f64 = a.iter().zip(&b).map(|(x, y)| x.t_mul(y).data().iter().step_by(x.cols() + 1).sum::<f64>()).sum();
        prop_assert!((product_inner(&a, &b) - want).abs() <= 1e-13 * (1.0 + want.abs()));
        let shapes: Vec<(usize, usize)> = a.iter().map(|m| (m.rows(), m.cols())).collect();
        prop_assert_eq!(devectorize(&shapes, &vectorize(&a)).unwrap(), a);
    }
}

#[test]
fn zero_tangent_exp_is_the_identity() {
    let x = point(6, 2, 1);
    assert_eq!(grassmann_exp(&x, &Matrix::zeros(6, 2), 1.0).unwrap(), x);
}

fn tucker(seed: u64) -> TuckerProblem {
    let shape = [8, 7, 6];
    let x = DenseTensor::new(shape.to_vec(), normals(&mut stream(seed, 0, Purpose::Probe), 336)).unwrap();
    TuckerProblem::new(x, vec![2, 2, 2]).unwrap()
}

#[test]
fn tucker_riemannian_gradient_matches_directional_differences() {
    for seed in 0..10 {
        let p = tucker(seed);
        let x = p.hosvd().unwrap().factors;
        let g = p.gradient(&x).unwrap();
        let xi: Vec<Matrix> = x.iter().enumerate().map(|(k, a)| project_horizontal(a, &gauss(a.rows(), a.cols(), seed, k as u64 + 1))).collect();
        let h = 1e-5;
        let f = |t: f64| p.value(&x.iter().zip(&xi).map(|(a, d)| grassmann_exp(a, d, t).unwrap()).collect::<Vec<_>>()).unwrap();
        let fd = (f(h) - f(-h)) / (2.0 * h);
        let exact = product_inner(&g, &xi);
        let scale = (product_inner(&g, &g) * product_inner(&xi, &xi)).sqrt();
        assert!((fd - exact).abs() <= 1e-6 * scale, "seed {seed}");
        assert!(g.iter().zip(&x).all(|(gk, a)| a.t_mul(gk).frob_norm() <= 1e-10 * gk.frob_norm().max(1.0)));
    }
}

#[test]
fn manifold_qn_keeps_factors_orthonormal_and_decreases_f() {
    let p = tucker(3);
    let x0 = p.hosvd().unwrap().factors;
    let h = p.hooi(Sweep::Forward);
    for window_transport in [false, true] {
        let o = ManifoldOptions {
            qn: QnConfig::new(QnFamily::Bfgs, Variant::Left, 2),
            line_search: LineSearch::ModBt,
            transport: TransportMode::Parallel,
            window_transport,
            stop: StopRule::new(Termination::GradRelObjective, 1e-9, 300),
        };
        let r = manifold_npqn_solve(&p, ManifoldPrecond::FixedPoint(&h), &x0, &o).unwrap();
        assert!(r.converged(), "{window_transport}: {:?}", r.status);
        assert!(r.f <= r.initial_f);
        let shapes = p.shapes();
        let xs = devectorize(&shapes, &r.x).unwrap();
        assert!(xs.iter().all(|a| a.orthonormality_error() <= 1e-12));
    }
}
