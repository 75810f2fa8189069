//! Limited-memory BFGS applies: two-loop recursion, compact form, the
//! transformed-preconditioning operator, scaling and damping.

use alloc::vec;
use alloc::vec::Vec;

use super::{PairKind, QnMemory};
use crate::error::{Error, Result};
use crate::linalg::{solve_upper, solve_upper_transpose, Lu};
use crate::tensor::Matrix;
use crate::vector;

/// `sᵀy / yᵀy`.
pub fn gamma_scaling(s: &[f64], y: &[f64]) -> Result<f64> {
    let yy = vector::dot(y, y);
    if !(yy > 0.0) {
        return Err(Error::param("y", "zero difference vector"));
    }
    Ok(vector::dot(s, y) / yy)
}

/// Scaling from the newest pair of one family: `sᵀy / yᵀy`, or `sᵀȳ / ȳᵀȳ`.
pub fn gamma_latest(mem: &QnMemory, kind: PairKind) -> Option<f64> {
    let k = mem.len().checked_sub(1)?;
    let yy = mem.diff_dot_diff(kind, k, k);
    (yy > 0.0).then(|| mem.s_dot_diff(kind, k, k) / yy)
}

/// Transformed-preconditioning scaling from the newest pair: `sᵀy / yᵀȳ`.
pub fn gamma_hat_latest(mem: &QnMemory) -> Option<f64> {
    let k = mem.len().checked_sub(1)?;
    let yyb = mem.y_dot_ybar(k, k);
    (yyb != 0.0).then(|| mem.s_dot_diff(PairKind::Gradient, k, k) / yyb)
}

/// Two-loop recursion for `H v` with initial operator `h0`.
pub fn two_loop(mem: &QnMemory, kind: PairKind, v: &[f64], h0: impl Fn(&[f64]) -> Vec<f64>) -> Result<Vec<f64>> {
    let m = mem.len();
    let mut q = v.to_vec();
    let mut rho = vec![0.0; m];
    let mut a = vec![0.0; m];
    for i in (0..m).rev() {
        let sy = mem.s_dot_diff(kind, i, i);
        if sy == 0.0 || !sy.is_finite() {
            return Err(Error::Singular { context: "two-loop recursion (zero curvature pair)" });
        }
        rho[i] = 1.0 / sy;
        a[i] = rho[i] * vector::dot(mem.s(i), &q);
        vector::axpy(-a[i], mem.diff(kind, i), &mut q);
    }
    let mut r = h0(&q);
    for i in 0..m {
        let b = rho[i] * vector::dot(mem.diff(kind, i), &r);
        vector::axpy(a[i] - b, mem.s(i), &mut r);
    }
    Ok(r)
}

/// Compact-form `H v` with `H_0 = γ I`:
/// `γv + [S γY] [[R⁻ᵀ(D + γYᵀY)R⁻¹, −R⁻ᵀ], [−R⁻¹, 0]] [Sᵀv; γYᵀv]`.
pub fn compact_apply(gamma: f64, mem: &QnMemory, kind: PairKind, v: &[f64]) -> Result<Vec<f64>> {
    let m = mem.len();
    let sv: Vec<f64> = (0..m).map(|i| vector::dot(mem.s(i), v)).collect();
    let yv: Vec<f64> = (0..m).map(|i| gamma * vector::dot(mem.diff(kind, i), v)).collect();
    let yy = Matrix::from_fn(m, m, |i, j| mem.diff_dot_diff(kind, i, j));
    compact_core(gamma, mem, kind, &mem.r(kind), &mem.d(kind), &yy, v, &sv, &yv)
}

/// Shared tail of the compact BFGS forms, with the leading term `γ lead`.
#[allow(clippy::too_many_arguments)]
fn compact_core(
    gamma: f64,
    mem: &QnMemory,
    kind: PairKind,
    r: &Matrix,
    d: &[f64],
    cross: &Matrix,
    lead: &[f64],
    a: &[f64],
    b: &[f64],
) -> Result<Vec<f64>> {
    let m = mem.len();
    let mut out = vector::scaled(gamma, lead);
    if m == 0 {
        return Ok(out);
    }
    let v1 = solve_upper(r, a)?;
    let mut t: Vec<f64> = cross.mul_vec(&v1).iter().map(|x| gamma * x).collect();
    for i in 0..m {
        t[i] += d[i] * v1[i] - b[i];
    }
    let top = solve_upper_transpose(r, &t)?;
    for i in 0..m {
        vector::axpy(top[i], mem.s(i), &mut out);
        vector::axpy(-gamma * v1[i], mem.diff(kind, i), &mut out);
    }
    if !vector::all_finite(&out) {
        return Err(Error::Singular { context: "compact BFGS apply" });
    }
    Ok(out)
}

/// Transformed-preconditioning operator `Ĥ(g)`:
/// `γ̂ḡ + [S γ̂Ȳ] [[R⁻ᵀ(D + γ̂YᵀȲ)R⁻¹, −R⁻ᵀ], [−R⁻¹, 0]] [Sᵀg; γ̂Ȳᵀg]`
/// with `R`, `D` from `SᵀY`.
pub fn tp_apply(gamma_hat: f64, mem: &QnMemory, g: &[f64], gbar: &[f64]) -> Result<Vec<f64>> {
    let m = mem.len();
    let mut out = vector::scaled(gamma_hat, gbar);
    if m == 0 {
        return Ok(out);
    }
    let a: Vec<f64> = (0..m).map(|i| vector::dot(mem.s(i), g)).collect();
    let b: Vec<f64> = (0..m).map(|i| gamma_hat * vector::dot(mem.ybar(i), g)).collect();
    let r = mem.r(PairKind::Gradient);
    let d = mem.d(PairKind::Gradient);
    let v1 = solve_upper(&r, &a)?;
    let mut t = vec![0.0; m];
    for i in 0..m {
        let mut acc = 0.0;
        for j in 0..m {
            acc += mem.y_dot_ybar(i, j) * v1[j];
        }
        t[i] = gamma_hat * acc + d[i] * v1[i] - b[i];
    }
    let top = solve_upper_transpose(&r, &t)?;
    for i in 0..m {
        vector::axpy(top[i], mem.s(i), &mut out);
        vector::axpy(-gamma_hat * v1[i], mem.ybar(i), &mut out);
    }
    if !vector::all_finite(&out) {
        return Err(Error::Singular { context: "transformed-preconditioning BFGS apply" });
    }
    Ok(out)
}

/// Compact-form `B v` with `B_0 = I / γ`:
/// `v/γ − [S/γ Y] [[SᵀS/γ, L], [Lᵀ, −D]]⁻¹ [Sᵀv/γ; Yᵀv]`.
pub fn compact_b_apply(gamma: f64, mem: &QnMemory, kind: PairKind, v: &[f64]) -> Result<Vec<f64>> {
    let m = mem.len();
    let sigma = 1.0 / gamma;
    let mut out = vector::scaled(sigma, v);
    if m == 0 {
        return Ok(out);
    }
    let mut k = Matrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            k.set(i, j, sigma * mem.s_dot_s(i, j));
            if i > j {
                let l = mem.s_dot_diff(kind, i, j);
                k.set(i, m + j, l);
                k.set(m + j, i, l);
            }
        }
        k.set(m + i, m + i, -mem.s_dot_diff(kind, i, i));
    }
    let mut rhs = vec![0.0; 2 * m];
    for i in 0..m {
        rhs[i] = sigma * vector::dot(mem.s(i), v);
        rhs[m + i] = vector::dot(mem.diff(kind, i), v);
    }
    let w = Lu::new(&k)?.solve(&rhs);
    for i in 0..m {
        vector::axpy(-sigma * w[i], mem.s(i), &mut out);
        vector::axpy(-w[m + i], mem.diff(kind, i), &mut out);
    }
    Ok(out)
}

/// Damped BFGS pair: returns `(y', θ)` with `y' = θy + (1 − θ)Bs`, where
/// `θ = 1` when `sᵀy ≥ 0.1 sᵀBs` and `0.9 sᵀBs / (sᵀBs − sᵀy)` otherwise.
pub fn damp_bfgs_pair(s: &[f64], y: &[f64], bs: &[f64]) -> (Vec<f64>, f64) {
    let sy = vector::dot(s, y);
    let sbs = vector::dot(s, bs);
    if sy >= 0.1 * sbs {
        return (y.to_vec(), 1.0);
    }
    let theta = 0.9 * sbs / (sbs - sy);
    let yp = y.iter().zip(bs).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
    (yp, theta)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn vecs(seed: u64, n: usize) -> Vec<f64> {
        (0..n).map(|i| libm::sin(seed as f64 * 1.7 + i as f64 * 0.9) + 0.1 * libm::cos(i as f64 * seed as f64)).collect()
    }

    /// Random SPD-curvature history: y = A s for a fixed SPD A.
    pub(crate) fn history(m: usize, n: usize, track_bar: bool) -> QnMemory {
        let b = Matrix::from_fn(n, n, |i, j| libm::sin((i * n + j) as f64 + 0.5));
        let a = b.t_mul(&b).add(&Matrix::identity(n));
        let p = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 / (1.0 + i as f64) } else { 0.0 });
        let mut mem = QnMemory::new(m, track_bar);
        for k in 0..m {
            let s = vecs(k as u64 + 1, n);
            let y = a.mul_vec(&s);
            let yb = p.mul_vec(&y);
            mem.push(s, y, track_bar.then_some(yb), vecs(k as u64 + 50, n));
        }
        mem
    }

    /// Dense recursion H₊ = (I − ρsyᵀ)H(I − ρysᵀ) + ρssᵀ.
    pub(crate) fn dense_bfgs_inverse(mem: &QnMemory, kind: PairKind, h0: Matrix) -> Matrix {
        let n = h0.rows();
        let mut h = h0;
        for i in 0..mem.len() {
            let s = Matrix::column_vector(mem.s(i));
            let y = Matrix::column_vector(mem.diff(kind, i));
            let rho = 1.0 / vector::dot(mem.s(i), mem.diff(kind, i));
            let left = Matrix::identity(n).sub(&s.mul_t(&y).scaled(rho));
            h = left.mul(&h).mul(&left.transpose()).add(&s.mul_t(&s).scaled(rho));
        }
        h
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_scaling(&[1.0, 0.0], &[2.0, 0.0]).unwrap(), 0.5);
        assert_eq!(gamma_scaling(&[0.3, -2.0], &[0.3, -2.0]).unwrap(), 1.0);
        assert!(gamma_scaling(&[1.0], &[0.0]).is_err());
        // Rayleigh bound for A = diag(1, 4).
        for t in 0..20 {
            let th = t as f64 * 0.31;
            let s = [libm::cos(th), libm::sin(th)];
            let y = [s[0], 4.0 * s[1]];
            let g = gamma_scaling(&s, &y).unwrap();
            assert!((0.25 - 1e-15..=1.0 + 1e-15).contains(&g));
        }
    }

    #[test]
    fn empty_memory_returns_scaled_input() {
        let mem = QnMemory::new(3, false);
        let v = [1.0, -2.0];
        assert_eq!(compact_apply(0.5, &mem, PairKind::Gradient, &v).unwrap(), vec![0.5, -1.0]);
        assert_eq!(two_loop(&mem, PairKind::Gradient, &v, |q| q.to_vec()).unwrap(), v.to_vec());
    }

    #[test]
    fn two_loop_m1_matches_dense_update() {
        let mem = history(1, 4, false);
        let v = vecs(9, 4);
        let got = two_loop(&mem, PairKind::Gradient, &v, |q| q.to_vec()).unwrap();
        let h = dense_bfgs_inverse(&mem, PairKind::Gradient, Matrix::identity(4));
        assert!(vector::rel_diff(&got, &h.mul_vec(&v)) < 1e-12);
    }

    #[test]
    fn compact_two_loop_dense_agree() {
        for m in 1..=3 {
            let mem = history(m, 6, true);
            let v = vecs(11, 6);
            for kind in [PairKind::Gradient, PairKind::Preconditioned] {
                let gamma = gamma_latest(&mem, kind).unwrap();
                let c = compact_apply(gamma, &mem, kind, &v).unwrap();
                let t = two_loop(&mem, kind, &v, |q| vector::scaled(gamma, q)).unwrap();
                let d = dense_bfgs_inverse(&mem, kind, Matrix::identity(6).scaled(gamma)).mul_vec(&v);
                assert!(vector::rel_diff(&c, &t) < 1e-10, "m={m}");
                assert!(vector::rel_diff(&c, &d) < 1e-10, "m={m}");
            }
        }
    }

    #[test]
    fn compact_b_inverts_compact_h() {
        let mem = history(3, 6, false);
        let gamma = gamma_latest(&mem, PairKind::Gradient).unwrap();
        let v = vecs(3, 6);
        let hv = compact_apply(gamma, &mem, PairKind::Gradient, &v).unwrap();
        let bhv = compact_b_apply(gamma, &mem, PairKind::Gradient, &hv).unwrap();
        assert!(vector::rel_diff(&bhv, &v) < 1e-10);
    }

    #[test]
    fn damping_cases() {
        let s = [1.0, 2.0];
        let (yp, th) = damp_bfgs_pair(&s, &[1.0, 2.0], &[1.0, 2.0]);
        assert_eq!(th, 1.0);
        assert_eq!(yp, vec![1.0, 2.0]);
        // sᵀy = 0 with B = I
        let y = [2.0, -1.0];
        let (yp, th) = damp_bfgs_pair(&s, &y, &s);
        assert!((th - 0.9).abs() < 1e-15);
        for i in 0..2 {
            assert!((yp[i] - (0.9 * y[i] + 0.1 * s[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn tp_with_identity_preconditioner_is_plain_compact() {
        let mem = history(3, 5, true);
        let mut plain = QnMemory::new(3, true);
        for i in 0..3 {
            plain.push(mem.s(i).to_vec(), mem.y(i).to_vec(), Some(mem.y(i).to_vec()), mem.g_start(i).to_vec());
        }
        let g = vecs(4, 5);
        let gh = gamma_hat_latest(&plain).unwrap();
        let tp = tp_apply(gh, &plain, &g, &g).unwrap();
        let c = compact_apply(gamma_latest(&plain, PairKind::Gradient).unwrap(), &plain, PairKind::Gradient, &g).unwrap();
        assert!(vector::rel_diff(&tp, &c) < 1e-12);
    }
}
