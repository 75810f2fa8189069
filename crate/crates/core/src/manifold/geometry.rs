use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{qr_thin, svd_thin, Lu};
use crate::tensor::Matrix;

/// `(I − YYᵀ) Z`.
pub fn project_horizontal(y: &Matrix, z: &Matrix) -> Matrix {
    z.sub(&y.mul(&y.t_mul(z)))
}

/// Compact SVD `ξ = UΣVᵀ` of a tangent at `x`, reused by the exponential
/// map and the transports along the same geodesic.
#[derive(Debug, Clone)]
pub struct Geodesic {
    xv: Matrix,
    u: Matrix,
    sigma: Vec<f64>,
    v: Matrix,
}

impl Geodesic {
    pub fn new(x: &Matrix, xi: &Matrix) -> Result<Self> {
        if (x.rows(), x.cols()) != (xi.rows(), xi.cols()) {
            return Err(Error::dims("geodesic", alloc::format!("point {}x{} vs tangent {}x{}", x.rows(), x.cols(), xi.rows(), xi.cols())));
        }
        let svd = svd_thin(xi)?;
        Ok(Self { xv: x.mul(&svd.v), u: svd.u, sigma: svd.s, v: svd.v })
    }

    fn is_zero(&self) -> bool {
        self.sigma.iter().all(|&s| s == 0.0)
    }

    /// `[XV U] [−sin(Σt); cos(Σt)] W` for a `k`-row block `W`.
    fn rotate(&self, t: f64, w: &Matrix) -> Matrix {
        let k = self.sigma.len();
        let mut xs = self.xv.clone();
        let mut uc = self.u.clone();
        for j in 0..k {
            let (s, c) = (libm::sin(self.sigma[j] * t), libm::cos(self.sigma[j] * t));
            crate::vector::scale(-s, xs.col_mut(j));
            crate::vector::scale(c, uc.col_mut(j));
        }
        xs.add(&uc).mul(w)
    }

    /// `Exp_X(tξ) = XV cos(Σt)Vᵀ + U sin(Σt)Vᵀ`, re-orthonormalized by a
    /// sign-fixed thin QR.
    pub fn exp(&self, x: &Matrix, t: f64) -> Result<Matrix> {
        if t == 0.0 || self.is_zero() {
            return Ok(x.clone());
        }
        let k = self.sigma.len();
        let mut a = self.xv.clone();
        let mut b = self.u.clone();
        for j in 0..k {
            crate::vector::scale(libm::cos(self.sigma[j] * t), a.col_mut(j));
            crate::vector::scale(libm::sin(self.sigma[j] * t), b.col_mut(j));
        }
        let y = a.add(&b).mul_t(&self.v);
        Ok(qr_thin(&y)?.0)
    }

    /// Parallel transport of `η` to `Exp_X(tξ)`:
    /// `([XV U][−sin(Σt); cos(Σt)]Uᵀ + I − UUᵀ) η`.
    pub fn transport(&self, t: f64, eta: &Matrix) -> Matrix {
        if t == 0.0 || self.is_zero() {
            return eta.clone();
        }
        let ute = self.u.t_mul(eta);
        self.rotate(t, &ute).add(&eta.sub(&self.u.mul(&ute)))
    }

    /// Transport of `ξ` itself: `[XV U][−sin(Σt); cos(Σt)] Σ Vᵀ`.
    pub fn transport_self(&self, t: f64) -> Matrix {
        let mut sv = self.v.transpose();
        for j in 0..self.sigma.len() {
            for c in 0..sv.cols() {
                sv.set(j, c, sv.get(j, c) * self.sigma[j]);
            }
        }
        self.rotate(t, &sv)
    }
}

pub fn grassmann_exp(x: &Matrix, xi: &Matrix, t: f64) -> Result<Matrix> {
    Geodesic::new(x, xi)?.exp(x, t)
}

pub fn transport(x: &Matrix, xi: &Matrix, t: f64, eta: &Matrix) -> Result<Matrix> {
    Ok(Geodesic::new(x, xi)?.transport(t, eta))
}

pub fn transport_self(x: &Matrix, xi: &Matrix, t: f64) -> Result<Matrix> {
    Ok(Geodesic::new(x, xi)?.transport_self(t))
}

/// Condition number of `XᵀY` beyond which the logarithm is refused.
const CUT_LOCUS_COND: f64 = 1e12;

/// `Log_X(Y) = U arctan(Σ) Vᵀ` with `UΣVᵀ` the compact SVD of
/// `Π_X (Y (XᵀY)⁻¹)`.
pub fn grassmann_log(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    if (x.rows(), x.cols()) != (y.rows(), y.cols()) {
        return Err(Error::dims("grassmann_log", alloc::format!("{}x{} vs {}x{}", x.rows(), x.cols(), y.rows(), y.cols())));
    }
    let c = x.t_mul(y);
    let cs = svd_thin(&c)?;
    let smax = cs.s.first().copied().unwrap_or(0.0);
    let smin = cs.s.last().copied().unwrap_or(0.0);
    if !(smin > 0.0) || smax / smin > CUT_LOCUS_COND {
        return Err(Error::CutLocus { condition: if smin > 0.0 { smax / smin } else { f64::INFINITY } });
    }
    // Y C⁻¹ through (C⁻ᵀ Yᵀ)ᵀ, one row of Y at a time.
    let lu = Lu::new(&c.transpose())?;
    let mut yc = Matrix::zeros(y.rows(), y.cols());
    let mut row = alloc::vec![0.0; y.cols()];
    for i in 0..y.rows() {
        for (j, r) in row.iter_mut().enumerate() {
            *r = y.get(i, j);
        }
        let sol = lu.solve(&row);
        for (j, v) in sol.into_iter().enumerate() {
            yc.set(i, j, v);
        }
    }
    let m = project_horizontal(x, &yc);
    let svd = svd_thin(&m)?;
    let mut ua = svd.u;
    for (j, s) in svd.s.iter().enumerate() {
        crate::vector::scale(libm::atan(*s), ua.col_mut(j));
    }
    Ok(ua.mul_t(&svd.v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stiefel(n: usize, p: usize, seed: f64) -> Matrix {
        qr_thin(&Matrix::from_fn(n, p, |i, j| libm::sin(seed + (i * 7 + j * 13) as f64 * 0.61))).unwrap().0
    }

    #[test]
    fn exp_log_round_trip() {
        let x = stiefel(6, 2, 0.3);
        let xi = project_horizontal(&x, &Matrix::from_fn(6, 2, |i, j| 0.02 * ((i + 2 * j) as f64 - 3.0)));
        let y = grassmann_exp(&x, &xi, 1.0).unwrap();
        assert!(y.orthonormality_error() < 1e-12);
        let back = grassmann_log(&x, &y).unwrap();
        assert!(back.sub(&xi).max_abs() < 1e-8);
    }

    #[test]
    fn self_transport_matches_general_formula() {
        let x = stiefel(5, 2, 1.1);
        let xi = project_horizontal(&x, &Matrix::from_fn(5, 2, |i, j| libm::cos((i * 3 + j) as f64)));
        let g = Geodesic::new(&x, &xi).unwrap();
        assert!(g.transport(0.7, &xi).sub(&g.transport_self(0.7)).max_abs() < 1e-12);
        let y = g.exp(&x, 0.7).unwrap();
        assert!(y.t_mul(&g.transport_self(0.7)).max_abs() < 1e-10);
    }

    #[test]
    fn log_of_orthogonal_rotation_is_zero() {
        let x = stiefel(7, 3, 0.5);
        let q = stiefel(3, 3, 2.0);
        assert!(grassmann_log(&x, &x.mul(&q)).unwrap().max_abs() < 1e-10);
        let perp = project_horizontal(&x, &stiefel(7, 3, 4.0));
        let perp = qr_thin(&perp).unwrap().0;
        assert!(matches!(grassmann_log(&x, &perp), Err(Error::CutLocus { .. })));
    }
}
