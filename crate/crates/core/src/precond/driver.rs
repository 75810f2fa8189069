//! Shared plumbing for the Euclidean accelerators: line-search dispatch,
//! evaluation budgets and report assembly.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::optim::linesearch::{modbt_search, strong_wolfe_search, TrialDirection, WolfeParams};
use crate::optim::Objective;
use crate::trace::{Counters, SolveReport, Status, StopRule, TraceRecord};
use crate::vector;

/// Step-length rule for the outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineSearch {
    ModBt,
    Wolfe(WolfeParams),
    /// Exact minimizer along the direction; quadratic objectives only.
    Exact,
}

impl LineSearch {
    /// Most objective evaluations one iteration may spend.
    pub fn worst_case_fevals(&self) -> usize {
        match self {
            LineSearch::ModBt => 5,
            LineSearch::Wolfe(p) => 2 * p.max_evals,
            LineSearch::Exact => 1,
        }
    }
}

pub(crate) struct Step {
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    pub alpha: f64,
    /// The step was taken along `−ḡ` after the primary direction failed.
    pub used_fallback: bool,
    /// Direction actually stepped along.
    pub dir: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn take_step(
    obj: &dyn Objective,
    ls: &LineSearch,
    x: &[f64],
    f: f64,
    g: &[f64],
    p: &[f64],
    gbar: &[f64],
    iter: usize,
    c: &mut Counters,
) -> Result<Step> {
    match ls {
        LineSearch::ModBt => {
            let fb = vector::neg(gbar);
            let out = modbt_search(
                |dir, a| {
                    let d = if dir == TrialDirection::Primary { p } else { &fb };
                    obj.value(&vector::add_scaled(x, a, d))
                },
                f,
                iter,
            )?;
            c.f_evals += out.f_evals;
            let used_fallback = out.direction == TrialDirection::Fallback;
            let dir = if used_fallback { fb } else { p.to_vec() };
            let s = vector::scaled(out.alpha, &dir);
            let xn = vector::add(x, &s);
            let gn = obj.gradient(&xn)?;
            c.g_evals += 1;
            Ok(Step { x: xn, s, f: out.f, g: gn, alpha: out.alpha, used_fallback, dir })
        }
        LineSearch::Wolfe(params) => {
            let fb = vector::neg(gbar);
            let out = strong_wolfe_search(obj, x, f, g, p, &fb, params);
            let out = match out {
                Ok(o) => o,
                Err(e) => {
                    c.f_evals += 2 * params.max_evals;
                    c.g_evals += 2 * params.max_evals;
                    return Err(e);
                }
            };
            c.f_evals += out.f_evals;
            c.g_evals += out.g_evals;
            let dir = if out.used_fallback { fb } else { p.to_vec() };
            let s = vector::scaled(out.alpha, &dir);
            let gn = out.grad.expect("strong-Wolfe search returns the gradient");
            Ok(Step { x: out.x, s, f: out.f, g: gn, alpha: out.alpha, used_fallback: out.used_fallback, dir })
        }
        LineSearch::Exact => {
            let alpha = obj
                .exact_step(x, g, p)
                .ok_or_else(|| Error::param("line_search", "exact steps need a quadratic objective"))??;
            let s = vector::scaled(alpha, p);
            let xn = vector::add(x, &s);
            let (fnew, gn) = obj.value_and_gradient(&xn)?;
            c.f_evals += 1;
            c.g_evals += 1;
            Ok(Step { x: xn, s, f: fnew, g: gn, alpha, used_fallback: false, dir: p.to_vec() })
        }
    }
}

/// Report under construction plus the stopping test.
pub(crate) struct Monitor {
    pub stop: StopRule,
    numel: usize,
    gnorm0: f64,
    pub report: SolveReport,
}

impl Monitor {
    pub fn new(stop: StopRule, x0: &[f64], f0: f64, g0: &[f64]) -> Self {
        let gnorm0 = vector::norm(g0);
        let numel = x0.len();
        let s0 = stop.termination.scaled(gnorm0, f0, gnorm0, numel);
        let report = SolveReport {
            x: x0.to_vec(),
            f: f0,
            status: Status::MaxIterations,
            iterations: 0,
            initial_f: f0,
            initial_gnorm_scaled: s0,
            trace: Vec::new(),
            counters: Counters::default(),
        };
        Self { stop, numel, gnorm0, report }
    }

    pub fn scaled(&self, f: f64, g: &[f64]) -> f64 {
        self.stop.termination.scaled(vector::norm(g), f, self.gnorm0, self.numel)
    }

    pub fn initially_converged(&self) -> bool {
        self.report.initial_gnorm_scaled <= self.stop.tol
    }

    /// Budget test before iteration `k` (1-based) that may spend up to
    /// `worst` evaluations. Sets the status and returns `false` when the
    /// iteration must not start.
    pub fn may_start(&mut self, k: usize, worst: usize, c: &Counters) -> bool {
        if k > self.stop.max_iters {
            self.report.status = Status::MaxIterations;
            return false;
        }
        if c.f_evals.saturating_add(worst) > self.stop.max_fevals {
            self.report.status = Status::MaxFunctionEvaluations;
            return false;
        }
        true
    }

    /// Records a finished iteration; returns `true` once converged.
    #[allow(clippy::too_many_arguments)]
    pub fn record(&mut self, k: usize, x: &[f64], f: f64, g: &[f64], alpha: f64, flags: u32, c: Counters) -> bool {
        let sc = self.scaled(f, g);
        self.report.trace.push(TraceRecord::new(k, f, sc, alpha, flags, c));
        self.report.iterations = k;
        self.report.f = f;
        self.report.x.clear();
        self.report.x.extend_from_slice(x);
        if !(f.is_finite() && sc.is_finite()) {
            self.report.status = Status::NonFinite;
            return true;
        }
        if sc <= self.stop.tol {
            self.report.status = Status::Converged;
            return true;
        }
        false
    }

    pub fn fail(&mut self, e: Error) {
        self.report.status = match e {
            Error::LineSearchFailed { .. } => Status::LineSearchFailed,
            Error::NonFinite { .. } => Status::NonFinite,
            e => Status::Failed(e),
        };
    }

    pub fn finish(mut self, c: Counters) -> SolveReport {
        self.report.counters = c;
        self.report
    }
}
