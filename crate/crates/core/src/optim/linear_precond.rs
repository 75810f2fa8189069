//! Linearly preconditioned NCG, L-BFGS and L-Broyden with an explicit SPD
//! preconditioner `P` and exact steps on a quadratic.
//!
//! These are the linear reference iterations for the nonlinear LP/TP
//! methods; they deliberately share no code with them beyond
//! vector kernels and small dense solves.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::linesearch::exact_step_from_gradient;
use super::ncg::BetaRule;
use super::{LinearOperator, QuadraticProblem};
use crate::error::Result;
use crate::linalg::Lu;
use crate::tensor::Matrix;
use crate::vector::{self, dot};

/// Iterates `x_1, ..., x_k` of a linear reference run. The run stops early
/// when the gradient vanishes to `‖g‖ ≤ 1e-13 ‖g_0‖`.
pub type Iterates = Vec<Vec<f64>>;

fn converged(g: &[f64], g0: f64) -> bool {
    vector::norm(g) <= 1e-13 * g0
}

/// NCG with every gradient replaced by `Pg` in both the direction and the
/// beta formula.
pub fn lp_ncg(q: &QuadraticProblem, p: &dyn LinearOperator, rule: BetaRule, x0: &[f64], iters: usize) -> Result<Iterates> {
    let mut x = x0.to_vec();
    let mut g = q.residual_gradient(&x);
    let g0 = vector::norm(&g);
    let mut pg = p.apply(&g);
    let mut d = vector::neg(&pg);
    let mut out = Vec::new();
    for _ in 0..iters {
        if converged(&g, g0) {
            break;
        }
        let a = exact_step_from_gradient(q.operator(), &g, &d)?;
        vector::axpy(a, &d, &mut x);
        let g_new = q.residual_gradient(&x);
        let pg_new = p.apply(&g_new);
        let py = vector::sub(&pg_new, &pg);
        let beta = super::ncg::classical(rule, &pg_new, &pg, &py, &d);
        for (di, v) in d.iter_mut().zip(&pg_new) {
            *di = -v + beta * *di;
        }
        g = g_new;
        pg = pg_new;
        out.push(x.clone());
    }
    Ok(out)
}

struct Pairs {
    m: usize,
    s: VecDeque<Vec<f64>>,
    y: VecDeque<Vec<f64>>,
    py: VecDeque<Vec<f64>>,
    g: VecDeque<Vec<f64>>,
}

impl Pairs {
    fn new(m: usize) -> Self {
        Self { m, s: VecDeque::new(), y: VecDeque::new(), py: VecDeque::new(), g: VecDeque::new() }
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>, py: Vec<f64>, g: Vec<f64>) {
        if self.s.len() == self.m {
            self.s.pop_front();
            self.y.pop_front();
            self.py.pop_front();
            self.g.pop_front();
        }
        self.s.push_back(s);
        self.y.push_back(y);
        self.py.push_back(py);
        self.g.push_back(g);
    }

    fn len(&self) -> usize {
        self.s.len()
    }
}

/// Two-loop recursion on pairs `(s, w)` with initial operator `h0`.
fn two_loop(s: &VecDeque<Vec<f64>>, w: &VecDeque<Vec<f64>>, v: &[f64], h0: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let m = s.len();
    let mut q = v.to_vec();
    let mut a = alloc::vec![0.0; m];
    for i in (0..m).rev() {
        a[i] = dot(&s[i], &q) / dot(&s[i], &w[i]);
        vector::axpy(-a[i], &w[i], &mut q);
    }
    let mut r = h0(&q);
    for i in 0..m {
        let b = dot(&w[i], &r) / dot(&s[i], &w[i]);
        vector::axpy(a[i] - b, &s[i], &mut r);
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    LpBfgs,
    TpBfgs,
    LpBroyden,
    TpBroyden,
}

fn run(q: &QuadraticProblem, p: &dyn LinearOperator, m: usize, x0: &[f64], iters: usize, fam: Family) -> Result<Iterates> {
    let mut x = x0.to_vec();
    let mut g = q.residual_gradient(&x);
    let g0 = vector::norm(&g);
    let mut pg = p.apply(&g);
    let mut mem = Pairs::new(m);
    let mut out = Vec::new();
    for _ in 0..iters {
        if converged(&g, g0) {
            break;
        }
        let d = if mem.len() == 0 {
            vector::neg(&pg)
        } else {
            let k = mem.len() - 1;
            let (s_k, y_k, py_k) = (&mem.s[k], &mem.y[k], &mem.py[k]);
            match fam {
                Family::LpBfgs => {
                    let gt = dot(s_k, py_k) / dot(py_k, py_k);
                    vector::neg(&two_loop(&mem.s, &mem.py, &pg, |v| vector::scaled(gt, v)))
                }
                Family::TpBfgs => {
                    let gh = dot(s_k, y_k) / dot(y_k, py_k);
                    vector::neg(&two_loop(&mem.s, &mem.y, &g, |v| vector::scaled(gh, &p.apply(v))))
                }
                Family::LpBroyden => {
                    let eta = dot(s_k, py_k) / dot(py_k, py_k);
                    vector::neg(&broyden(eta, &mem.s, &mem.py, None, &pg, &pg, eta))
                }
                Family::TpBroyden => {
                    let gh = dot(s_k, y_k) / dot(y_k, py_k);
                    vector::neg(&broyden(gh, &mem.s, &mem.py, Some((&mem.y, &mem.g)), &pg, &g, gh))
                }
            }
        };
        let a = exact_step_from_gradient(q.operator(), &g, &d)?;
        let s = vector::scaled(a, &d);
        vector::axpy(1.0, &s, &mut x);
        let g_new = q.residual_gradient(&x);
        let pg_new = p.apply(&g_new);
        let y = vector::sub(&g_new, &g);
        let py = vector::sub(&pg_new, &pg);
        mem.push(s, y, py, g.clone());
        g = g_new;
        pg = pg_new;
        out.push(x.clone());
    }
    Ok(out)
}

/// `lead_scale·lead − (ηW − S) K⁻¹ Sᵀ(rhs_scale·rhs)`.
///
/// LP: `W = PY`, `K = M + ηSᵀPY` with `Mᵢⱼ = −sᵢᵀsⱼ`, rhs `Pg`.
/// TP: `W = PY`, `K = M̂ + γ̂SᵀY` with `M̂ᵢⱼ = gᵢᵀsⱼ`, rhs `g`.
fn broyden(
    eta: f64,
    s: &VecDeque<Vec<f64>>,
    w: &VecDeque<Vec<f64>>,
    tp: Option<(&VecDeque<Vec<f64>>, &VecDeque<Vec<f64>>)>,
    lead: &[f64],
    rhs: &[f64],
    rhs_scale: f64,
) -> Vec<f64> {
    let m = s.len();
    let k = Matrix::from_fn(m, m, |i, j| match tp {
        None => (if i > j { -dot(&s[i], &s[j]) } else { 0.0 }) + eta * dot(&s[i], &w[j]),
        Some((y, g)) => (if i > j { dot(&g[i], &s[j]) } else { 0.0 }) + eta * dot(&s[i], &y[j]),
    });
    let b: Vec<f64> = (0..m).map(|i| rhs_scale * dot(&s[i], rhs)).collect();
    let sol = Lu::new(&k).map(|lu| lu.solve(&b)).unwrap_or_else(|_| alloc::vec![0.0; m]);
    let mut out = vector::scaled(eta, lead);
    for i in 0..m {
        vector::axpy(-eta * sol[i], &w[i], &mut out);
        vector::axpy(sol[i], &s[i], &mut out);
    }
    out
}

/// L-BFGS on pairs `(s, Py)` with `H_0 = γ̃I`, `γ̃ = sᵀPy / (Py)ᵀPy`, applied to `Pg`.
pub fn lp_lbfgs(q: &QuadraticProblem, p: &dyn LinearOperator, m: usize, x0: &[f64], iters: usize) -> Result<Iterates> {
    run(q, p, m, x0, iters, Family::LpBfgs)
}

/// L-BFGS on pairs `(s, y)` with `H_0 = γ̂P`, `γ̂ = sᵀy / yᵀPy`, applied to `g`.
pub fn tp_lbfgs(q: &QuadraticProblem, p: &dyn LinearOperator, m: usize, x0: &[f64], iters: usize) -> Result<Iterates> {
    run(q, p, m, x0, iters, Family::TpBfgs)
}

/// L-Broyden with `Y` replaced by `PY`, scale `γ̃`, applied to `Pg`.
pub fn lp_lbroyden(q: &QuadraticProblem, p: &dyn LinearOperator, m: usize, x0: &[f64], iters: usize) -> Result<Iterates> {
    run(q, p, m, x0, iters, Family::LpBroyden)
}

/// `γ̂Pg − (γ̂PY − S)(M̂ + γ̂SᵀY)⁻¹ Sᵀγ̂g` with `M̂ᵢⱼ = gᵢᵀsⱼ` for `i > j`.
pub fn tp_lbroyden(q: &QuadraticProblem, p: &dyn LinearOperator, m: usize, x0: &[f64], iters: usize) -> Result<Iterates> {
    run(q, p, m, x0, iters, Family::TpBroyden)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::linear::{pcg_solve, Ssor};
    use crate::optim::CsrMatrix;
    use alloc::boxed::Box;

    fn problem(n: usize) -> (QuadraticProblem, Ssor) {
        let b = Matrix::from_fn(n, n, |i, j| libm::sin((i * 7 + j * 3) as f64 * 0.41));
        let a = b.t_mul(&b).add(&Matrix::identity(n).scaled(0.5));
        let csr = CsrMatrix::from_dense(&a).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| libm::cos(i as f64)).collect();
        (QuadraticProblem::new(Box::new(a), rhs).unwrap(), Ssor::sgs(&csr).unwrap())
    }

    #[test]
    fn tp_lbfgs_tracks_pcg() {
        let (q, p) = problem(12);
        let x0 = alloc::vec![0.0; 12];
        let tp = tp_lbfgs(&q, &p, 12, &x0, 6).unwrap();
        let pcg = pcg_solve(&q, &x0, Some(&p), 0.0, 6).unwrap();
        assert!(vector::rel_diff(&tp[5], &pcg.x) < 1e-8);
    }
}
