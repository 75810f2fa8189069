//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero if any fails. Tolerances are fixed below.

use std::process::ExitCode;
use std::time::Instant;

use npqn_bench::{emit_outputs, run_experiment, Campaign, ExperimentConfig};
use npqn_core::decomp::{cp_als_sweep, hooi_sweep, CpProblem, KTensor, Sweep, TuckerProblem};
use npqn_core::manifold::{grassmann_exp, grassmann_log, project_horizontal, product_inner, transport, GrassmannObjective};
use npqn_core::optim::lbfgs::{compact_apply, gamma_latest, two_loop};
use npqn_core::optim::linear::{cg_solve, pcg_solve, Ssor};
use npqn_core::optim::linear_precond::{lp_lbfgs, lp_lbroyden, lp_ncg, tp_lbfgs, tp_lbroyden};
use npqn_core::optim::ncg::{BetaRule, BetaVariant};
use npqn_core::optim::{lbroyden, CsrMatrix, Objective, PairKind, QnMemory, QuadraticProblem};
use npqn_core::precond::{
    npncg_solve, npqn_solve, CurvatureGuard, LineSearch, LinearFixedPoint, NcgOptions, NpqnOptions, Preconditioner, QnConfig,
    QnFamily, Variant,
};
use npqn_core::problems::rng::{normals, stream, Purpose};
use npqn_core::problems::{poisson2d, random_orthonormal, PoissonSpec};
use npqn_core::trace::{StopRule, Termination};
use npqn_core::vector::{self, rel_diff};
use npqn_core::{DenseTensor, Matrix};

type Outcome = (bool, String);

fn config(pairs: &[(&str, &str)]) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    for (k, v) in pairs {
        c.set(k, v).unwrap_or_else(|e| panic!("{k}={v}: {e}"));
    }
    c.validate().unwrap();
    c
}

fn campaign(pairs: &[(&str, &str)]) -> Campaign {
    run_experiment(&config(pairs)).unwrap()
}

fn iters(c: &Campaign) -> Vec<String> {
    c.trials.iter().map(|t| if t.converged { t.iterations.to_string() } else { format!("{}*", t.iterations) }).collect()
}

// ---------------------------------------------------------------- quadratic

fn c1_quadratic_equivalence() -> Outcome {
    let t = Instant::now();
    let (q, _) = poisson2d(&PoissonSpec::new(50).unwrap()).unwrap();
    let x0 = vec![0.0; q.dim()];
    let cg = cg_solve(&q, &x0, 1e-10, 2000).unwrap();
    let qn = QnConfig::new(QnFamily::Bfgs, Variant::Left, 5).with_guard(CurvatureGuard::Off);
    let opts = NpqnOptions { qn, line_search: LineSearch::Exact, stop: StopRule::new(Termination::GradRelInitial, 1e-10, 2000) };
    let lb = npqn_solve(&q, Preconditioner::Identity, &x0, &opts).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let (h1, h2) = (cg.residual_history(), lb.residual_history());
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    let mut short = false;
    for k in 0..h1.len() {
        if h1[k] < 1e-8 {
            break;
        }
        match h2.get(k) {
            Some(r) => worst = worst.max((h1[k] - r).abs() / h1[k]),
            None => short = true,
        }
        compared += 1;
    }
    let pass = !short && worst < 1e-4 && secs < 10.0;
    (pass, format!("n={} compared {compared} iterations, max rel diff {worst:.2e} (< 1e-4), {secs:.2} s (< 10 s)", q.dim()))
}

fn c2_c3_preconditioned() -> (Outcome, Outcome) {
    let (q, a) = poisson2d(&PoissonSpec::new(50).unwrap()).unwrap();
    let x0 = vec![0.0; q.dim()];
    let cg = cg_solve(&q, &x0, 1e-10, 5000).unwrap().iterations_to(1e-10);
    let qn = QnConfig::new(QnFamily::Bfgs, Variant::Transform, 5).with_guard(CurvatureGuard::Off);
    let opts = NpqnOptions { qn, line_search: LineSearch::Exact, stop: StopRule::new(Termination::GradRelInitial, 1e-10, 5000) };
    let mut pcg_iters = Vec::new();
    let mut c3_pass = true;
    let mut c3_detail = Vec::new();
    for (name, omega) in [("SGS", 1.0), ("SSOR(1.9)", 1.9)] {
        let p = Ssor::new(&a, omega).unwrap();
        let pcg = pcg_solve(&q, &x0, Some(&p), 1e-10, 5000).unwrap();
        let map = LinearFixedPoint::new(&q, &p).unwrap();
        let tp = npqn_solve(&q, Preconditioner::FixedPoint(&map), &x0, &opts).unwrap();
        let (ip, it) = (pcg.iterations_to(1e-10), tp.iterations_to(1e-10));
        pcg_iters.push(ip);
        let (h1, h2) = (pcg.residual_history(), tp.residual_history());
        let mut logdiff: f64 = 0.0;
        for k in 1..=25 {
            match (h1.get(k), h2.get(k)) {
                (Some(a), Some(b)) => logdiff = logdiff.max((a.log10() - b.log10()).abs()),
                // Converged before iteration 25 on one side only.
                _ if h1.len() != h2.len() => logdiff = f64::INFINITY,
                _ => {}
            }
        }
        let ratio = match (ip, it) {
            (Some(a), Some(b)) => b as f64 / a as f64,
            _ => f64::INFINITY,
        };
        c3_pass &= (1.0 / 1.25..=1.25).contains(&ratio) && logdiff < 0.2;
        c3_detail.push(format!("{name}: PCG {ip:?} TP {it:?} ratio {ratio:.3}, max log10 diff {logdiff:.2e}"));
    }
    let c2 = match (pcg_iters[1], pcg_iters[0], cg) {
        (Some(s), Some(g), Some(c)) => (s < g && g < c, format!("SSOR(1.9) {s} < SGS {g} < CG {c}")),
        other => (false, format!("did not reach 1e-10: {other:?}")),
    };
    (c2, (c3_pass, c3_detail.join("; ")))
}

fn spd(n: usize) -> (Matrix, Vec<f64>) {
    let b = Matrix::from_fn(n, n, |i, j| ((i * 31 + j * 17) % 23) as f64 / 23.0 - 0.5 + if i == j { 1.5 } else { 0.0 });
    let rhs = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
    (b.t_mul(&b), rhs)
}

fn c4_linear_reduction() -> Outcome {
    let n = 50;
    let steps = 30;
    let (a, b) = spd(n);
    let csr = CsrMatrix::from_dense(&a).unwrap();
    let p = Ssor::sgs(&csr).unwrap();
    let q = QuadraticProblem::new(Box::new(a), b).unwrap();
    let map = LinearFixedPoint::new(&q, &p).unwrap();
    let x0 = vec![0.0; n];
    let stop = |k| StopRule::new(Termination::GradRelInitial, 0.0, k);
    let mut worst_all: f64 = 0.0;
    let mut parts = Vec::new();
    for (fam, var, name) in [
        (QnFamily::Bfgs, Variant::Left, "L-BFGS-LP"),
        (QnFamily::Bfgs, Variant::Transform, "L-BFGS-TP"),
        (QnFamily::Broyden, Variant::Left, "L-Broyden-LP"),
        (QnFamily::Broyden, Variant::Transform, "L-Broyden-TP"),
    ] {
        let qn = QnConfig::new(fam, var, 5).with_guard(CurvatureGuard::Off);
        let lin = match (fam, var) {
            (QnFamily::Bfgs, Variant::Left) => lp_lbfgs(&q, &p, 5, &x0, steps),
            (QnFamily::Bfgs, Variant::Transform) => tp_lbfgs(&q, &p, 5, &x0, steps),
            (QnFamily::Broyden, Variant::Left) => lp_lbroyden(&q, &p, 5, &x0, steps),
            (QnFamily::Broyden, Variant::Transform) => tp_lbroyden(&q, &p, 5, &x0, steps),
        }
        .unwrap();
        let mut worst: f64 = if lin.len() == steps { 0.0 } else { f64::INFINITY };
        for (k, xl) in lin.iter().enumerate() {
            let o = NpqnOptions { qn, line_search: LineSearch::Exact, stop: stop(k + 1) };
            let r = npqn_solve(&q, Preconditioner::FixedPoint(&map), &x0, &o).unwrap();
            worst = worst.max(rel_diff(&r.x, xl));
        }
        worst_all = worst_all.max(worst);
        parts.push(format!("{name} {worst:.1e}"));
    }
    for rule in [BetaRule::PolakRibiere, BetaRule::HestenesStiefel, BetaRule::HagerZhang] {
        let lin = lp_ncg(&q, &p, rule, &x0, steps).unwrap();
        for variant in [BetaVariant::Tilde, BetaVariant::Hat] {
            let mut worst: f64 = 0.0;
            for k in 0..steps {
                let o = NcgOptions { rule, variant, restart: 0, line_search: LineSearch::Exact, stop: stop(k + 1) };
                let r = npncg_solve(&q, Preconditioner::FixedPoint(&map), &x0, &o).unwrap();
                let want = match variant {
                    BetaVariant::Tilde => lin[k].clone(),
                    BetaVariant::Hat => pcg_solve(&q, &x0, Some(&p), 0.0, k + 1).unwrap().x,
                };
                worst = worst.max(rel_diff(&r.x, &want));
            }
            worst_all = worst_all.max(worst);
            parts.push(format!("NCG-{rule:?}-{variant:?} {worst:.1e}"));
        }
    }
    (worst_all < 1e-8, format!("max rel iterate diff {worst_all:.2e} (< 1e-8) over {steps} iterations: {}", parts.join(", ")))
}

// ---------------------------------------------------------------- campaigns

const CP_BASE: [(&str, &str); 9] = [
    ("problem", "cp-synthetic"),
    ("extent", "50"),
    ("order", "3"),
    ("rank", "5"),
    ("collinearity", "0.9"),
    ("trials", "10"),
    ("seed", "42"),
    ("tol", "1e-7"),
    ("max-fevals", "10000"),
];

fn with<'a>(base: &[(&'a str, &'a str)], extra: &[(&'a str, &'a str)]) -> Vec<(&'a str, &'a str)> {
    base.iter().chain(extra).copied().collect()
}

fn c5_cp_pattern() -> Outcome {
    let t = Instant::now();
    let noise = [("l1", "10"), ("l2", "1")];
    let base = with(&CP_BASE, &noise);
    let als = campaign(&with(&base, &[("method", "als"), ("precond", "none"), ("max-iters", "2000")]));
    let plain = campaign(&with(&base, &[("method", "lbfgs"), ("precond", "none"), ("linesearch", "modbt"), ("m", "1"), ("max-iters", "1000")]));
    let lp = campaign(&with(&base, &[("method", "lbfgs"), ("precond", "lp"), ("sweep", "f"), ("linesearch", "modbt"), ("m", "1"), ("max-iters", "1000")]));
    let secs = t.elapsed().as_secs_f64();
    let als_fail = als.trials.iter().filter(|t| !t.converged).count();
    let plain_fail = plain.trials.iter().filter(|t| !t.converged).count();
    let lp_ok = lp.trials.iter().filter(|t| t.converged && t.iterations <= 300).count();
    let pass = als_fail >= 8 && plain_fail >= 8 && lp_ok >= 8 && secs < 300.0;
    let detail = format!(
        "ALS failed {als_fail}/10 (>= 8), L-BFGS failed {plain_fail}/10 (>= 8), L-BFGS-LP-F <= 300 in {lp_ok}/10 (>= 8) [{}], {secs:.0} s (< 300 s)",
        iters(&lp).join(" ")
    );
    (pass, detail)
}

fn c6_cp_recovery() -> Outcome {
    let base = with(&CP_BASE, &[("l1", "20"), ("l2", "10")]);
    let als = campaign(&with(&base, &[("method", "als"), ("precond", "none"), ("max-iters", "2000")]));
    let als_failed: Vec<usize> = als.trials.iter().filter(|t| !t.converged).map(|t| t.trial).collect();
    let mut pass = true;
    let mut parts = vec![format!("ALS failed in trials {als_failed:?}")];
    for (method, precond) in [("lbfgs", "lp"), ("lbfgs", "tp"), ("lbroyden", "lp"), ("lbroyden", "tp")] {
        let c = campaign(&with(&base, &[("method", method), ("precond", precond), ("linesearch", "modbt"), ("m", "2"), ("max-iters", "1000")]));
        let recovered = als_failed.iter().all(|&i| c.trials[i].converged);
        let bounded = c.trials.iter().all(|t| t.converged && t.iterations <= 500);
        pass &= recovered && bounded;
        parts.push(format!("{method}-{precond}: max {} [{}]", c.summary.max_iterations, iters(&c).join(" ")));
    }
    (pass, parts.join("; "))
}

fn c7_tucker() -> Outcome {
    let base = [
        ("problem", "tucker-synthetic"),
        ("extents", "60,60,60"),
        ("true-ranks", "20,20,20"),
        ("ranks", "10,10,10"),
        ("l1", "10"),
        ("l2", "10"),
        ("trials", "10"),
        ("seed", "42"),
        ("tol", "1e-7"),
        ("max-fevals", "100000"),
    ];
    let hooi = campaign(&with(&base, &[("method", "hooi"), ("precond", "none"), ("max-iters", "2000")]));
    let lp = campaign(&with(&base, &[("method", "lbfgs"), ("precond", "lp"), ("sweep", "f"), ("linesearch", "modbt"), ("m", "1"), ("max-iters", "1000")]));
    let wins = lp.trials.iter().zip(&hooi.trials).filter(|(l, h)| l.converged && l.iterations <= 200 && l.iterations < h.iterations).count();
    (wins >= 8, format!("L-BFGS-LP-F <= 200 and < HOOI in {wins}/10 (>= 8): LP [{}] vs HOOI [{}]", iters(&lp).join(" "), iters(&hooi).join(" ")))
}

// ---------------------------------------------------------------- oracles

fn random_tensor(shape: &[usize], seed: u64, trial: u64) -> DenseTensor {
    DenseTensor::new(shape.to_vec(), normals(&mut stream(seed, trial, Purpose::Probe), shape.iter().product())).unwrap()
}

fn c8_gradients() -> Outcome {
    let h = 1e-5;
    let mut worst_cp: f64 = 0.0;
    for trial in 0..20u64 {
        let shape = [3 + trial as usize % 3, 4, 2 + trial as usize % 4];
        let rank = 1 + trial as usize % 3;
        let p = CpProblem::new(random_tensor(&shape, 8, trial), rank).unwrap();
        let x = normals(&mut stream(8, trial, Purpose::Start), p.dim());
        let g = p.gradient(&x).unwrap();
        let fd: Vec<f64> = (0..x.len())
            .map(|i| {
                let (mut a, mut b) = (x.clone(), x.clone());
                a[i] += h;
                b[i] -= h;
                (p.value(&a).unwrap() - p.value(&b).unwrap()) / (2.0 * h)
            })
            .collect();
        worst_cp = worst_cp.max(rel_diff(&g, &fd));
    }
    let mut worst_tk: f64 = 0.0;
    for trial in 0..20u64 {
        let shape = [5 + trial as usize % 3, 6, 4 + trial as usize % 2];
        let ranks = vec![2, 1 + trial as usize % 3, 2];
        let p = TuckerProblem::new(random_tensor(&shape, 9, trial), ranks.clone()).unwrap();
        let mut rng = stream(9, trial, Purpose::Start);
        let x: Vec<Matrix> = shape.iter().zip(&ranks).map(|(&n, &r)| random_orthonormal(&mut rng, n, r).unwrap()).collect();
        let g = p.gradient(&x).unwrap();
        let gnorm = product_inner(&g, &g).sqrt();
        for _ in 0..3 {
            let xi: Vec<Matrix> = x
                .iter()
                .map(|a| {
                    let z = Matrix::new(a.rows(), a.cols(), normals(&mut rng, a.rows() * a.cols())).unwrap();
                    project_horizontal(a, &z)
                })
                .collect();
            let xn = product_inner(&xi, &xi).sqrt();
            let step = |t: f64| -> f64 {
                let y: Vec<Matrix> = x.iter().zip(&xi).map(|(a, d)| grassmann_exp(a, d, t / xn).unwrap()).collect();
                p.value(&y).unwrap()
            };
            let fd = (step(h) - step(-h)) / (2.0 * h);
            let exact = product_inner(&g, &xi) / xn;
            worst_tk = worst_tk.max((fd - exact).abs() / gnorm);
        }
    }
    let pass = worst_cp < 1e-6 && worst_tk < 1e-6;
    (pass, format!("CP max rel error {worst_cp:.2e}, Tucker max rel directional error {worst_tk:.2e} (< 1e-6), 20 instances each"))
}

fn c9_manifold() -> Outcome {
    let (mut idem, mut orth, mut logexp, mut iso, mut logq): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for trial in 0..50u64 {
        let (n, p) = (8 + trial as usize % 13, 1 + trial as usize % 5);
        let mut rng = stream(10, trial, Purpose::Probe);
        let mut gauss = |r, c| Matrix::new(r, c, normals(&mut rng, r * c)).unwrap();
        let x = random_orthonormal(&mut stream(10, trial, Purpose::Factors), n, p).unwrap();
        let z = gauss(n, p);
        let pz = project_horizontal(&x, &z);
        idem = idem.max(project_horizontal(&x, &pz).sub(&pz).frob_norm() / z.frob_norm());
        let big = pz.scaled(1.5 / pz.frob_norm());
        orth = orth.max(grassmann_exp(&x, &big, 1.0).unwrap().orthonormality_error());
        let xi = pz.scaled(0.1 / pz.frob_norm());
        let y = grassmann_exp(&x, &xi, 1.0).unwrap();
        logexp = logexp.max(grassmann_log(&x, &y).unwrap().sub(&xi).frob_norm());
        let (e1, e2) = (project_horizontal(&x, &gauss(n, p)), project_horizontal(&x, &gauss(n, p)));
        let (t1, t2) = (transport(&x, &big, 1.0, &e1).unwrap(), transport(&x, &big, 1.0, &e2).unwrap());
        iso = iso.max((t1.inner(&t2) - e1.inner(&e2)).abs() / (e1.frob_norm() * e2.frob_norm()));
        iso = iso.max((t1.frob_norm() - e1.frob_norm()).abs() / e1.frob_norm());
        let rot = random_orthonormal(&mut stream(10, trial, Purpose::Core), p, p).unwrap();
        logq = logq.max(grassmann_log(&x, &x.mul(&rot)).unwrap().frob_norm());
    }
    let pass = idem <= 1e-13 && orth <= 1e-12 && logexp <= 1e-8 && iso <= 1e-10 && logq <= 1e-10;
    (
        pass,
        format!(
            "projection idempotence {idem:.1e} (1e-13), Exp orthonormality {orth:.1e} (1e-12), Log∘Exp {logexp:.1e} (1e-8), transport isometry {iso:.1e} (1e-10), Log_X(XQ) {logq:.1e} (1e-10)"
        ),
    )
}

/// `H₊ = (I − ρsyᵀ)H(I − ρysᵀ) + ρssᵀ`, applied pair by pair.
fn dense_bfgs_inverse(mem: &QnMemory, h0: Matrix) -> Matrix {
    let n = h0.rows();
    let mut h = h0;
    for i in 0..mem.len() {
        let (s, y) = (Matrix::column_vector(mem.s(i)), Matrix::column_vector(mem.y(i)));
        let rho = 1.0 / vector::dot(mem.s(i), mem.y(i));
        let left = Matrix::identity(n).sub(&s.mul_t(&y).scaled(rho));
        h = left.mul(&h).mul(&left.transpose()).add(&s.mul_t(&s).scaled(rho));
    }
    h
}

/// `H₊ = H + (s − Hy)sᵀH / (sᵀHy)`.
fn dense_broyden_inverse(mem: &QnMemory, h0: Matrix) -> Matrix {
    let mut h = h0;
    for i in 0..mem.len() {
        let (s, y) = (mem.s(i), mem.y(i));
        let hy = h.mul_vec(y);
        let u = Matrix::column_vector(&vector::sub(s, &hy));
        let w = Matrix::column_vector(&h.t_mul_vec(s));
        h = h.add(&u.mul_t(&w).scaled(1.0 / vector::dot(s, &hy)));
    }
    h
}

fn c10_qn_oracles() -> Outcome {
    let (mut bfgs, mut broyden, mut secant): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for trial in 0..20u64 {
        let n = 6 + trial as usize % 7;
        let m = 1 + trial as usize % 5;
        let mut rng = stream(11, trial, Purpose::Probe);
        let b = Matrix::new(n, n, normals(&mut rng, n * n)).unwrap();
        let spd = b.t_mul(&b).add(&Matrix::identity(n));
        let nonsym = b.add(&Matrix::identity(n).scaled(3.0));
        for (op, sym) in [(&spd, true), (&nonsym, false)] {
            let mut mem = QnMemory::new(m, false);
            for _ in 0..m {
                let s = normals(&mut rng, n);
                let y = op.mul_vec(&s);
                mem.push(s, y, None, vec![0.0; n]);
            }
            let v = normals(&mut rng, n);
            if sym {
                let gamma = gamma_latest(&mem, PairKind::Gradient).unwrap();
                let c = compact_apply(gamma, &mem, PairKind::Gradient, &v).unwrap();
                let t = two_loop(&mem, PairKind::Gradient, &v, |q| vector::scaled(gamma, q)).unwrap();
                let d = dense_bfgs_inverse(&mem, Matrix::identity(n).scaled(gamma)).mul_vec(&v);
                bfgs = bfgs.max(rel_diff(&c, &t)).max(rel_diff(&c, &d));
            } else {
                let eta = 0.5 + trial as f64 * 0.05;
                let c = lbroyden::compact_apply(eta, &mem, PairKind::Gradient, &v).unwrap();
                let d = dense_broyden_inverse(&mem, Matrix::identity(n).scaled(eta)).mul_vec(&v);
                broyden = broyden.max(rel_diff(&c, &d));
                let k = mem.len() - 1;
                let sy = lbroyden::compact_apply(eta, &mem, PairKind::Gradient, mem.y(k)).unwrap();
                secant = secant.max(rel_diff(&sy, mem.s(k)));
            }
        }
    }
    let pass = bfgs <= 1e-10 && broyden <= 1e-10 && secant <= 1e-10;
    (pass, format!("L-BFGS two-loop/compact/dense {bfgs:.1e}, L-Broyden compact/dense {broyden:.1e}, secant {secant:.1e} (all <= 1e-10)"))
}

fn c11_monotonicity() -> Outcome {
    let slack = 1e-12;
    let (mut cp_bad, mut tk_bad, mut cp_sweeps, mut tk_sweeps) = (0, 0, 0, 0);
    for trial in 0..10u64 {
        let sweep = if trial % 2 == 0 { Sweep::Forward } else { Sweep::ForwardBackward };
        let shape = [6 + trial as usize % 3, 5, 7];
        let x = random_tensor(&shape, 12, trial);
        let rank = 2 + trial as usize % 3;
        let p = CpProblem::new(x.clone(), rank).unwrap();
        let mut kt = KTensor::from_flat(&shape, rank, &normals(&mut stream(12, trial, Purpose::Start), p.dim())).unwrap();
        let mut f = p.value(&kt.to_flat()).unwrap();
        for _ in 0..10 {
            kt = cp_als_sweep(&x, &kt, sweep).unwrap();
            let f1 = p.value(&kt.to_flat()).unwrap();
            cp_bad += usize::from(f1 > f + slack * f.abs());
            cp_sweeps += 1;
            f = f1;
        }
        let ranks = vec![2, 2, 1 + trial as usize % 3];
        let tp = TuckerProblem::new(x, ranks.clone()).unwrap();
        let mut rng = stream(12, trial, Purpose::Factors);
        let mut a: Vec<Matrix> = shape.iter().zip(&ranks).map(|(&n, &r)| random_orthonormal(&mut rng, n, r).unwrap()).collect();
        let mut f = tp.value(&a).unwrap();
        for _ in 0..10 {
            a = hooi_sweep(tp.tensor(), &a, sweep).unwrap();
            let f1 = tp.value(&a).unwrap();
            tk_bad += usize::from(f1 > f + slack * f.abs());
            tk_sweeps += 1;
            f = f1;
        }
    }
    (cp_bad == 0 && tk_bad == 0, format!("increases: ALS {cp_bad}/{cp_sweeps}, HOOI {tk_bad}/{tk_sweeps} (slack 1e-12 relative)"))
}

fn c12_determinism() -> Outcome {
    let setups: [&[(&str, &str)]; 3] = [
        &[("problem", "cp-synthetic"), ("extent", "15"), ("rank", "3"), ("method", "lbfgs"), ("precond", "tp"), ("trials", "3"), ("max-iters", "60")],
        &[("problem", "tucker-synthetic"), ("extents", "12,12,12"), ("true-ranks", "5,5,5"), ("ranks", "3,3,3"), ("l2", "10"), ("method", "lbroyden"), ("precond", "lp"), ("trials", "3"), ("max-iters", "40")],
        &[("problem", "poisson"), ("intervals", "20"), ("method", "ncg"), ("precond", "tp"), ("beta", "hs-hat"), ("trials", "2"), ("max-iters", "50")],
    ];
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for pairs in setups {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let outs: Vec<_> = dirs
            .iter()
            .map(|d| {
                let mut cfg = config(pairs);
                cfg.set("out-dir", d.path().to_str().unwrap()).unwrap();
                emit_outputs(&run_experiment(&cfg).unwrap()).unwrap()
            })
            .collect();
        let mut names: Vec<_> = std::fs::read_dir(&outs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names.iter().filter(|n| n.to_string_lossy().starts_with("trial_") || *n == "residuals.dat") {
            let a = std::fs::read(outs[0].join(name)).unwrap();
            let b = std::fs::read(outs[1].join(name)).unwrap_or_default();
            checked += 1;
            if a != b || a.is_empty() {
                mismatches.push(name.to_string_lossy().into_owned());
            }
        }
    }
    (mismatches.is_empty() && checked > 0, format!("{checked} trace files compared, mismatches {mismatches:?}"))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: &str, what: &str, (pass, detail): Outcome, secs: f64| {
        println!("[{}] {id} {what}: {detail} ({secs:.1} s)", if pass { "PASS" } else { "FAIL" });
        failed += usize::from(!pass);
    };
    let timed = |f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        (o, t.elapsed().as_secs_f64())
    };
    let (o, s) = timed(&c1_quadratic_equivalence);
    report("C1", "quadratic equivalence CG vs L-BFGS", o, s);
    let t = Instant::now();
    let (c2, c3) = c2_c3_preconditioned();
    let s = t.elapsed().as_secs_f64();
    report("C2", "preconditioner ordering", c2, s);
    report("C3", "TP-L-BFGS overlaps PCG", c3, s);
    let (o, s) = timed(&c4_linear_reduction);
    report("C4", "linear reduction oracle", o, s);
    let (o, s) = timed(&c5_cp_pattern);
    report("C5", "CP convergence pattern", o, s);
    let (o, s) = timed(&c6_cp_recovery);
    report("C6", "CP failure recovery", o, s);
    let (o, s) = timed(&c7_tucker);
    report("C7", "Tucker L-BFGS-LP vs HOOI", o, s);
    let (o, s) = timed(&c8_gradients);
    report("C8", "gradients vs finite differences", o, s);
    let (o, s) = timed(&c9_manifold);
    report("C9", "manifold invariants", o, s);
    let (o, s) = timed(&c10_qn_oracles);
    report("C10", "quasi-Newton oracle equivalence", o, s);
    let (o, s) = timed(&c11_monotonicity);
    report("C11", "ALS/HOOI monotonicity", o, s);
    let (o, s) = timed(&c12_determinism);
    report("C12", "determinism", o, s);
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
