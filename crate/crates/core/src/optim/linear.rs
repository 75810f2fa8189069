//! Richardson iteration, SSOR/SGS preconditioning and (preconditioned) CG.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{CsrMatrix, LinearOperator, QuadraticProblem};
use crate::error::{Error, Result};
use crate::trace::{Counters, SolveReport, Status, Termination, TraceRecord};
use crate::vector;

/// One left-preconditioned Richardson step `x − P(Ax − b)`.
pub fn richardson_step(q: &QuadraticProblem, x: &[f64], p: &dyn LinearOperator) -> Vec<f64> {
    let g = q.residual_gradient(x);
    vector::sub(x, &p.apply(&g))
}

/// SSOR preconditioner for a symmetric matrix `A = L + D + U` with
/// `P⁻¹ = (D + ωL) D⁻¹ (D + ωU) / (ω(2 − ω))`. `ω = 1` is symmetric
/// Gauss-Seidel.
#[derive(Debug, Clone)]
pub struct Ssor {
    a: CsrMatrix,
    diag: Vec<f64>,
    omega: f64,
}

impl Ssor {
    pub fn new(a: &CsrMatrix, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < 2.0) {
            return Err(Error::param("omega", format!("{omega} is outside (0, 2)")));
        }
        let diag = a.diagonal();
        if let Some(row) = diag.iter().position(|d| *d == 0.0) {
            return Err(Error::ZeroDiagonal { row });
        }
        Ok(Self { a: a.clone(), diag, omega })
    }

    pub fn sgs(a: &CsrMatrix) -> Result<Self> {
        Self::new(a, 1.0)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

impl LinearOperator for Ssor {
    fn dim(&self) -> usize {
        self.a.n()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.a.n();
        let w = self.omega;
        // (D + ωL) t = v
        let mut t = vec![0.0; n];
        for i in 0..n {
            let mut acc = v[i];
            for (c, a) in self.a.row(i) {
                if c < i {
                    acc -= w * a * t[c];
                }
            }
            t[i] = acc / self.diag[i];
        }
        let scale = w * (2.0 - w);
        for i in 0..n {
            t[i] *= scale * self.diag[i];
        }
        // (D + ωU) out = t
        for i in (0..n).rev() {
            let mut acc = t[i];
            for (c, a) in self.a.row(i) {
                if c > i {
                    acc -= w * a * out[c];
                }
            }
            out[i] = acc / self.diag[i];
        }
    }
}

/// Conjugate gradients; see [`pcg_solve`].
pub fn cg_solve(q: &QuadraticProblem, x0: &[f64], tol: f64, max_iters: usize) -> Result<SolveReport> {
    pcg_solve(q, x0, None, tol, max_iters)
}

/// Preconditioned CG in gradient form: `d_0 = −P g_0`,
/// `α = −dᵀg / dᵀAd`, `β = g₊ᵀPg₊ / gᵀPg`.
///
/// The trace records `‖g_k‖ / ‖g_0‖`; iteration stops once it reaches `tol`.
pub fn pcg_solve(
    q: &QuadraticProblem,
    x0: &[f64],
    p: Option<&dyn LinearOperator>,
    tol: f64,
    max_iters: usize,
) -> Result<SolveReport> {
    let n = q.dim();
    if x0.len() != n {
        return Err(Error::dims("pcg_solve", format!("x0 has {} entries, problem has {n}", x0.len())));
    }
    let precond = |g: &[f64]| -> Vec<f64> { p.map_or_else(|| g.to_vec(), |op| op.apply(g)) };
    let mut counters = Counters::default();
    let mut x = x0.to_vec();
    let mut g = q.residual_gradient(&x);
    counters.g_evals += 1;
    let g0 = vector::norm(&g);
    let fval = |x: &[f64], g: &[f64]| 0.5 * vector::dot(x, g) - 0.5 * vector::dot(q.rhs(), x);
    let f0 = fval(&x, &g);
    let mut report = SolveReport {
        x: Vec::new(),
        f: f0,
        status: Status::MaxIterations,
        iterations: 0,
        initial_f: f0,
        initial_gnorm_scaled: if g0 == 0.0 { 0.0 } else { 1.0 },
        trace: Vec::new(),
        counters,
    };
    if g0 == 0.0 || g0 <= tol * g0 {
        report.status = Status::Converged;
        report.x = x;
        return Ok(report);
    }
    let mut y = precond(&g);
    let mut gy = vector::dot(&g, &y);
    let mut d = vector::neg(&y);
    for k in 1..=max_iters {
        let ad = q.apply(&d);
        let dad = vector::dot(&d, &ad);
        if !(dad > 0.0) {
            report.status = Status::Failed(Error::NonpositiveCurvature { curvature: dad });
            break;
        }
        let alpha = -vector::dot(&d, &g) / dad;
        vector::axpy(alpha, &d, &mut x);
        vector::axpy(alpha, &ad, &mut g);
        counters.g_evals += 1;
        if !vector::all_finite(&g) {
            report.status = Status::NonFinite;
            break;
        }
        let gn = vector::norm(&g);
        let f = fval(&x, &g);
        let scaled = Termination::GradRelInitial.scaled(gn, f, g0, n);
        report.trace.push(TraceRecord::new(k, f, scaled, alpha, 0, counters));
        report.iterations = k;
        report.f = f;
        if scaled <= tol {
            report.status = Status::Converged;
            break;
        }
        y = precond(&g);
        let gy_new = vector::dot(&g, &y);
        let beta = gy_new / gy;
        gy = gy_new;
        for (di, yi) in d.iter_mut().zip(&y) {
            *di = -yi + beta * *di;
        }
    }
    report.counters = counters;
    report.x = x;
    Ok(report)
}
