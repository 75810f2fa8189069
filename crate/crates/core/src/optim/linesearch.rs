//! Exact quadratic step, strong-Wolfe search and modified backtracking.

use alloc::vec::Vec;

use super::{LinearOperator, Objective, QuadraticProblem};
use crate::error::{Error, Result};
use crate::vector;

/// `α = −pᵀg / pᵀAp`, the minimizer of a quadratic along `p`. For `p = r`
/// (with `r = −g`) this is `rᵀr / pᵀAp`.
pub fn exact_step_from_gradient(a: &dyn LinearOperator, g: &[f64], p: &[f64]) -> Result<f64> {
    let ap = a.apply(p);
    let pap = vector::dot(p, &ap);
    if !(pap > 0.0) {
        return Err(Error::NonpositiveCurvature { curvature: pap });
    }
    Ok(-vector::dot(p, g) / pap)
}

pub fn exact_quadratic_step(q: &QuadraticProblem, x: &[f64], p: &[f64]) -> Result<f64> {
    let g = q.residual_gradient(x);
    exact_step_from_gradient(q.operator(), &g, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearchFlag {
    Accepted,
    /// All backtracking trials failed; a short preconditioner step was taken.
    FallbackPreconditionerStep,
    /// The primary direction failed and memory must be cleared.
    ResetMemory,
}

#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub f: f64,
    /// Gradient at `x` when the search evaluated it.
    pub grad: Option<Vec<f64>>,
    pub flag: LineSearchFlag,
    /// The accepted step is along the fallback direction.
    pub used_fallback: bool,
    pub f_evals: usize,
    pub g_evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolfeParams {
    pub c1: f64,
    pub c2: f64,
    pub alpha0: f64,
    pub max_evals: usize,
}

impl Default for WolfeParams {
    fn default() -> Self {
        Self { c1: 1e-4, c2: 1e-2, alpha0: 1.0, max_evals: 20 }
    }
}

/// Result of a one-dimensional strong-Wolfe search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolfePoint {
    pub alpha: f64,
    pub phi: f64,
    pub dphi: f64,
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    a: f64,
    phi: f64,
    dphi: f64,
}

/// Bracketing and zoom with safeguarded cubic interpolation on
/// `φ(α) = (f(x + αp), pᵀg(x + αp))`.
///
/// Returns `Ok(None)` when no acceptable point was found within the
/// evaluation budget; `evals` counts calls to `phi`.
pub fn strong_wolfe_1d(
    mut phi: impl FnMut(f64) -> Result<(f64, f64)>,
    phi0: f64,
    dphi0: f64,
    params: &WolfeParams,
    evals: &mut usize,
) -> Result<Option<WolfePoint>> {
    if !(dphi0 < 0.0) {
        return Ok(None);
    }
    let WolfeParams { c1, c2, alpha0, max_evals } = *params;
    let mut eval = |a: f64, evals: &mut usize| -> Result<Option<Sample>> {
        if *evals >= max_evals {
            return Ok(None);
        }
        *evals += 1;
        let (p, d) = phi(a)?;
        if p.is_nan() || d.is_nan() {
            return Err(Error::NonFinite { context: "line search objective" });
        }
        Ok(Some(Sample { a, phi: p, dphi: d }))
    };
    let sufficient = |s: &Sample| s.phi <= phi0 + c1 * s.a * dphi0;
    let curvature = |s: &Sample| s.dphi.abs() <= -c2 * dphi0;
    let done = |s: Sample| WolfePoint { alpha: s.a, phi: s.phi, dphi: s.dphi };

    let mut prev = Sample { a: 0.0, phi: phi0, dphi: dphi0 };
    let mut a = alpha0;
    let mut first = true;
    let (mut lo, mut hi) = loop {
        let Some(cur) = eval(a, evals)? else { return Ok(None) };
        if !cur.phi.is_finite() || !sufficient(&cur) || (!first && cur.phi >= prev.phi) {
            break (prev, cur);
        }
        if curvature(&cur) {
            return Ok(Some(done(cur)));
        }
        if cur.dphi >= 0.0 {
            break (cur, prev);
        }
        prev = cur;
        a *= 2.0;
        first = false;
    };
    loop {
        let trial = interpolate(&lo, &hi);
        let Some(cur) = eval(trial, evals)? else { return Ok(None) };
        if !cur.phi.is_finite() || !sufficient(&cur) || cur.phi >= lo.phi {
            hi = cur;
        } else {
            if curvature(&cur) {
                return Ok(Some(done(cur)));
            }
            if cur.dphi * (hi.a - lo.a) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
        if (hi.a - lo.a).abs() <= f64::EPSILON * lo.a.abs().max(1e-300) {
            return Ok(None);
        }
    }
}

/// Cubic interpolant minimizer between `lo` and `hi`, safeguarded to the
/// middle 80% of the interval, bisection otherwise.
fn interpolate(lo: &Sample, hi: &Sample) -> f64 {
    let width = hi.a - lo.a;
    let mid = lo.a + 0.5 * width;
    if !hi.phi.is_finite() || !hi.dphi.is_finite() {
        return lo.a + 0.25 * width;
    }
    let d1 = lo.dphi + hi.dphi - 3.0 * (lo.phi - hi.phi) / (lo.a - hi.a);
    let disc = d1 * d1 - lo.dphi * hi.dphi;
    if !(disc >= 0.0) {
        return mid;
    }
    let d2 = width.signum() * libm::sqrt(disc);
    let denom = hi.dphi - lo.dphi + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let a = hi.a - width * (hi.dphi + d2 - d1) / denom;
    let (l, h) = if width > 0.0 { (lo.a + 0.1 * width, hi.a - 0.1 * width) } else { (hi.a - 0.1 * width, lo.a + 0.1 * width) };
    if a.is_finite() && a >= l && a <= h {
        a
    } else {
        mid
    }
}

/// Strong-Wolfe search along `p`; when `p` is not a descent direction or the
/// search fails, the flag is [`LineSearchFlag::ResetMemory`] and the search is
/// repeated along `fallback`.
pub fn strong_wolfe_search<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    p: &[f64],
    fallback: &[f64],
    params: &WolfeParams,
) -> Result<LineSearchOutcome> {
    let mut evals = 0usize;
    let run = |dir: &[f64], evals: &mut usize| -> Result<Option<(WolfePoint, Vec<f64>, Vec<f64>)>> {
        let dphi0 = vector::dot(dir, g0);
        let mut last: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        let found = strong_wolfe_1d(
            |a| {
                let xa = vector::add_scaled(x, a, dir);
                let (f, g) = obj.value_and_gradient(&xa)?;
                let d = vector::dot(&g, dir);
                last = Some((a, xa, g));
                Ok((f, d))
            },
            f0,
            dphi0,
            params,
            evals,
        )?;
        Ok(found.map(|pt| {
            let (a, xa, g) = last.take().expect("accepted point was evaluated");
            debug_assert_eq!(a, pt.alpha);
            (pt, xa, g)
        }))
    };
    // The accepted point is always the most recent evaluation.
    let primary = run(p, &mut evals)?;
    if let Some((pt, xa, g)) = primary {
        return Ok(LineSearchOutcome {
            alpha: pt.alpha,
            x: xa,
            f: pt.phi,
            grad: Some(g),
            flag: LineSearchFlag::Accepted,
            used_fallback: false,
            f_evals: evals,
            g_evals: evals,
        });
    }
    let mut evals2 = 0usize;
    let second = run(fallback, &mut evals2)?;
    let total = evals + evals2;
    match second {
        Some((pt, xa, g)) => Ok(LineSearchOutcome {
            alpha: pt.alpha,
            x: xa,
            f: pt.phi,
            grad: Some(g),
            flag: LineSearchFlag::ResetMemory,
            used_fallback: true,
            f_evals: total,
            g_evals: total,
        }),
        None => Err(Error::LineSearchFailed { reason: "no strong-Wolfe point along the fallback direction" }),
    }
}

/// Which direction a modified-backtracking trial uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialDirection {
    Primary,
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModBtOutcome {
    pub alpha: f64,
    pub f: f64,
    pub direction: TrialDirection,
    pub flag: LineSearchFlag,
    pub f_evals: usize,
}

/// Relaxed acceptance `f₊ ≤ f_k + e^{−2·iter}|f_k|`; for nonnegative
/// objectives this is `f₊ ≤ (1 + e^{−2·iter}) f_k` and for negative ones
/// `f₊ ≤ (1 − e^{−2·iter}) f_k`.
pub fn modbt_accepts(f_new: f64, f_k: f64, iter: usize) -> bool {
    f_new <= f_k + libm::exp(-2.0 * iter as f64) * f_k.abs()
}

/// Modified backtracking. `eval(dir, α)` returns the objective at the trial
/// point. Tries `α = 1, 1/2, 1/4` along the primary direction, then `α = 1/4`
/// along the fallback, and finally takes `α = 1/8` along the fallback
/// without testing it. Once the fallback is used the caller clears memory.
pub fn modbt_search(
    mut eval: impl FnMut(TrialDirection, f64) -> Result<f64>,
    f_k: f64,
    iter: usize,
) -> Result<ModBtOutcome> {
    let mut alpha = 1.0;
    let mut dir = TrialDirection::Primary;
    let mut f = eval(dir, alpha)?;
    let mut evals = 1;
    let mut flag = 0;
    while !(f.is_finite() && modbt_accepts(f, f_k, iter)) && flag < 4 {
        flag += 1;
        if flag == 3 {
            dir = TrialDirection::Fallback;
        } else {
            alpha *= 0.5;
        }
        f = eval(dir, alpha)?;
        evals += 1;
    }
    if f.is_nan() {
        return Err(Error::NonFinite { context: "modified backtracking objective" });
    }
    let flag = match dir {
        TrialDirection::Primary => LineSearchFlag::Accepted,
        TrialDirection::Fallback => LineSearchFlag::FallbackPreconditionerStep,
    };
    Ok(ModBtOutcome { alpha, f, direction: dir, flag, f_evals: evals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Matrix;
    use alloc::boxed::Box;
    use alloc::vec;

    struct Quartic;
    impl Objective for Quartic {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok(x[0].powi(4))
        }
        fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![4.0 * x[0].powi(3)])
        }
    }

    fn spd3() -> QuadraticProblem {
        let a = Matrix::from_rows(&[&[4.0, 1.0, 0.0], &[1.0, 3.0, 0.5], &[0.0, 0.5, 2.0]]).unwrap();
        QuadraticProblem::new(Box::new(a), vec![1.0, 2.0, -1.0]).unwrap()
    }

    #[test]
    fn exact_step_examples() {
        let id = QuadraticProblem::new(Box::new(Matrix::identity(2)), vec![1.0, 2.0]).unwrap();
        let x = [0.0, 0.0];
        let r = vector::neg(&id.residual_gradient(&x));
        assert_eq!(exact_quadratic_step(&id, &x, &r).unwrap(), 1.0);
        let two = QuadraticProblem::new(Box::new(Matrix::identity(2).scaled(2.0)), vec![1.0, 2.0]).unwrap();
        assert_eq!(exact_quadratic_step(&two, &x, &r).unwrap(), 0.5);
        let neg = QuadraticProblem::new(Box::new(Matrix::identity(2).scaled(-1.0)), vec![1.0, 2.0]).unwrap();
        assert!(matches!(exact_quadratic_step(&neg, &x, &r), Err(Error::NonpositiveCurvature { .. })));
    }

    #[test]
    fn exact_step_minimizes_along_line() {
        let q = spd3();
        let x = [0.3, -0.2, 0.9];
        let p = [1.0, 0.5, -0.25];
        let a = exact_quadratic_step(&q, &x, &p).unwrap();
        let f = |t: f64| q.objective(&vector::add_scaled(&x, t, &p));
        let best = f(a);
        for i in -50..=50 {
            let t = a + i as f64 * 1e-3;
            assert!(f(t) >= best - 1e-14);
        }
    }

    #[test]
    fn wolfe_on_quadratic_accepts_near_exact() {
        let q = spd3();
        let x = [0.0, 0.0, 0.0];
        let (f0, g0) = q.value_and_gradient(&x).unwrap();
        let p = vector::neg(&g0);
        let out = strong_wolfe_search(&q, &x, f0, &g0, &p, &p, &WolfeParams::default()).unwrap();
        assert_eq!(out.flag, LineSearchFlag::Accepted);
        let exact = exact_quadratic_step(&q, &x, &p).unwrap();
        assert!((out.alpha - exact).abs() < 0.02 * exact);
    }

    #[test]
    fn wolfe_conditions_hold_on_quartic() {
        let x = [1.0];
        let (f0, g0) = Quartic.value_and_gradient(&x).unwrap();
        let p = [-1.0];
        let params = WolfeParams::default();
        let out = strong_wolfe_search(&Quartic, &x, f0, &g0, &p, &p, &params).unwrap();
        let dphi0 = g0[0] * p[0];
        let g1 = Quartic.gradient(&out.x).unwrap();
        assert!(out.f <= f0 + params.c1 * out.alpha * dphi0);
        assert!((g1[0] * p[0]).abs() <= params.c2 * dphi0.abs());
        assert!(out.alpha > 0.0);
    }

    #[test]
    fn ascent_direction_triggers_fallback() {
        let q = spd3();
        let x = [0.0, 0.0, 0.0];
        let (f0, g0) = q.value_and_gradient(&x).unwrap();
        let out = strong_wolfe_search(&q, &x, f0, &g0, &g0, &vector::neg(&g0), &WolfeParams::default()).unwrap();
        assert_eq!(out.flag, LineSearchFlag::ResetMemory);
        assert!(out.used_fallback);
        assert!(out.f < f0);
    }

    #[test]
    fn modbt_accepts_unit_step_on_decrease() {
        let out = modbt_search(|_, a| Ok(1.0 - a * 0.1), 1.0, 1).unwrap();
        assert_eq!(out.alpha, 1.0);
        assert_eq!(out.flag, LineSearchFlag::Accepted);
        assert_eq!(out.f_evals, 1);
    }

    #[test]
    fn modbt_tolerates_mild_growth_early() {
        let fk = 2.0;
        let grow = fk * (1.0 + 0.5 * libm::exp(-2.0));
        let out = modbt_search(|_, _| Ok(grow), fk, 1).unwrap();
        assert_eq!(out.alpha, 1.0);
        // The same growth is rejected late in the run.
        assert!(!modbt_accepts(grow, fk, 10));
        // Negative objectives: the tolerated change shrinks |f|.
        assert!(modbt_accepts(-0.99, -1.0, 1));
        assert!(!modbt_accepts(-0.5, -1.0, 1));
    }

    #[test]
    fn modbt_pathological_falls_back_to_eighth_step() {
        let mut trials = Vec::new();
        let out = modbt_search(
            |d, a| {
                trials.push((d, a));
                Ok(100.0)
            },
            1.0,
            3,
        )
        .unwrap();
        assert_eq!(out.alpha, 0.125);
        assert_eq!(out.direction, TrialDirection::Fallback);
        assert_eq!(out.flag, LineSearchFlag::FallbackPreconditionerStep);
        assert_eq!(
            trials,
            vec![
                (TrialDirection::Primary, 1.0),
                (TrialDirection::Primary, 0.5),
                (TrialDirection::Primary, 0.25),
                (TrialDirection::Fallback, 0.25),
                (TrialDirection::Fallback, 0.125),
            ]
        );
    }
}
