//! Nonlinearly preconditioned nonlinear conjugate gradients (NPNCG).

use super::driver::{take_step, LineSearch, Monitor};
use super::Preconditioner;
use crate::error::{Error, Result};
use crate::optim::ncg::{beta, BetaInputs, BetaRule, BetaVariant};
use crate::optim::Objective;
use crate::trace::{flags, Counters, SolveReport, Status, StopRule};
use crate::vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcgOptions {
    pub rule: BetaRule,
    pub variant: BetaVariant,
    /// Set `β = 0` every `restart` iterations; `0` disables restarts.
    pub restart: usize,
    pub line_search: LineSearch,
    pub stop: StopRule,
}

/// `p_0 = −ḡ_0`, `p_{k+1} = −ḡ_{k+1} + β_k p_k`, with the line search run on
/// the original objective. A fallback line-search step restarts the
/// recursion from the fallback direction.
pub fn npncg_solve(obj: &dyn Objective, pre: Preconditioner<'_>, x0: &[f64], opts: &NcgOptions) -> Result<SolveReport> {
    if x0.len() != obj.dim() {
        return Err(Error::dims("npncg_solve", alloc::format!("x0 has {} entries, objective has {}", x0.len(), obj.dim())));
    }
    let mut c = Counters::default();
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&x)?;
    c.f_evals += 1;
    c.g_evals += 1;
    let mut mon = Monitor::new(opts.stop, &x, f, &g);
    if mon.initially_converged() {
        mon.report.status = Status::Converged;
        return Ok(mon.finish(c));
    }
    let (mut gbar, nq) = match pre.gbar(&x, &g) {
        Ok(v) => v,
        Err(e) => {
            mon.fail(e);
            return Ok(mon.finish(c));
        }
    };
    c.q_applies += nq;
    let mut p = vector::neg(&gbar);
    let worst = opts.line_search.worst_case_fevals();
    let mut k = 1;
    while mon.may_start(k, worst, &c) {
        let mut fl = 0;
        let step = match take_step(obj, &opts.line_search, &x, f, &g, &p, &gbar, k, &mut c) {
            Ok(s) => s,
            Err(e) => {
                mon.fail(e);
                break;
            }
        };
        if step.used_fallback {
            fl |= flags::FALLBACK;
        }
        let (gbar_new, nq) = match pre.gbar(&step.x, &step.g) {
            Ok(v) => v,
            Err(e) => {
                mon.fail(e);
                break;
            }
        };
        c.q_applies += nq;
        let restart = opts.restart > 0 && k % opts.restart == 0;
        let b = if restart {
            fl |= flags::RESTART;
            0.0
        } else {
            let inputs = BetaInputs { g_new: &step.g, g_old: &g, gbar_new: &gbar_new, gbar_old: &gbar, p: &step.dir };
            let b = beta(opts.rule, opts.variant, &inputs);
            if b.is_finite() {
                b
            } else {
                fl |= flags::RESTART;
                0.0
            }
        };
        p = step.dir;
        for (pi, gb) in p.iter_mut().zip(&gbar_new) {
            *pi = -gb + b * *pi;
        }
        x = step.x;
        f = step.f;
        g = step.g;
        gbar = gbar_new;
        if mon.record(k, &x, f, &g, step.alpha, fl, c) {
            break;
        }
        k += 1;
    }
    Ok(mon.finish(c))
}
