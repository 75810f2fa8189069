//! Nonlinearly preconditioned limited-memory quasi-Newton (NPQN):
//! L-BFGS and L-Broyden in left-preconditioned (LP) and
//! transformation-preconditioned (TP) form.

use alloc::vec::Vec;

use super::driver::{take_step, LineSearch, Monitor};
use super::Preconditioner;
use crate::error::{Error, Result};
use crate::optim::{lbfgs, lbroyden, Objective, PairKind, QnMemory};
use crate::trace::{flags, Counters, SolveReport, StopRule};
use crate::vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnFamily {
    Bfgs,
    Broyden,
}

/// Where the preconditioned gradient enters the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Every `g`, `y` replaced by `ḡ`, `ȳ`.
    Left,
    /// Derived from a change of variables; mixes `g`, `y` with `ḡ`, `ȳ`.
    Transform,
}

/// Initial inverse scale for L-Broyden.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaPolicy {
    One,
    /// The scaling of the matching L-BFGS variant (`γ̃` for LP, `γ̂` for TP).
    MatchBfgs,
}

/// Treatment of L-BFGS pairs that lack positive curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureGuard {
    /// Powell damping of the pair family entering `D` and `R`.
    Damp,
    /// Drop pairs with `sᵀy ≤ 0`.
    Skip,
    /// Store every pair with finite, nonzero curvature.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QnConfig {
    pub family: QnFamily,
    pub variant: Variant,
    pub memory: usize,
    pub eta: EtaPolicy,
    pub guard: CurvatureGuard,
    /// LP L-BFGS through the two-loop recursion instead of the compact form.
    pub two_loop: bool,
}

impl QnConfig {
    /// Defaults: `η` matched to L-BFGS, two-loop LP apply, damping for LP and
    /// skipping for TP. TP pairs enter through `(s, y)`, and the only `B`
    /// available for them is the unpreconditioned one, whose `1/γ` scale
    /// dwarfs the curvature along preconditioned steps; damping against it
    /// fires on nearly every step.
    pub fn new(family: QnFamily, variant: Variant, memory: usize) -> Self {
        let guard = match variant {
            Variant::Left => CurvatureGuard::Damp,
            Variant::Transform => CurvatureGuard::Skip,
        };
        Self { family, variant, memory, eta: EtaPolicy::MatchBfgs, guard, two_loop: true }
    }

    pub fn with_eta(mut self, eta: EtaPolicy) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_guard(mut self, guard: CurvatureGuard) -> Self {
        self.guard = guard;
        self
    }

    pub fn with_two_loop(mut self, two_loop: bool) -> Self {
        self.two_loop = two_loop;
        self
    }

    /// Pair family whose curvature enters the small matrices.
    fn kind(&self) -> PairKind {
        match self.variant {
            Variant::Left => PairKind::Preconditioned,
            Variant::Transform => PairKind::Gradient,
        }
    }
}

/// Windowed memory plus the direction formula selected by a [`QnConfig`].
/// Shared by the Euclidean and manifold drivers.
#[derive(Debug, Clone)]
pub struct QnDirection {
    cfg: QnConfig,
    mem: QnMemory,
}

impl QnDirection {
    pub fn new(cfg: QnConfig) -> Result<Self> {
        if cfg.memory == 0 {
            return Err(Error::param("memory", "window must hold at least one pair"));
        }
        Ok(Self { cfg, mem: QnMemory::new(cfg.memory, true) })
    }

    pub fn config(&self) -> &QnConfig {
        &self.cfg
    }

    pub fn memory(&self) -> &QnMemory {
        &self.mem
    }

    pub fn memory_mut(&mut self) -> &mut QnMemory {
        &mut self.mem
    }

    pub fn reset(&mut self) {
        self.mem.clear();
    }

    fn scale(&self) -> Option<f64> {
        match self.cfg.variant {
            Variant::Left => lbfgs::gamma_latest(&self.mem, PairKind::Preconditioned),
            Variant::Transform => lbfgs::gamma_hat_latest(&self.mem),
        }
    }

    fn raw_direction(&self, g: &[f64], gbar: &[f64]) -> Result<Vec<f64>> {
        let gamma = self.scale().ok_or(Error::Singular { context: "quasi-Newton scaling" })?;
        let h = match (self.cfg.family, self.cfg.variant) {
            (QnFamily::Bfgs, Variant::Left) if self.cfg.two_loop => {
                lbfgs::two_loop(&self.mem, PairKind::Preconditioned, gbar, |v| vector::scaled(gamma, v))?
            }
            (QnFamily::Bfgs, Variant::Left) => lbfgs::compact_apply(gamma, &self.mem, PairKind::Preconditioned, gbar)?,
            (QnFamily::Bfgs, Variant::Transform) => lbfgs::tp_apply(gamma, &self.mem, g, gbar)?,
            (QnFamily::Broyden, v) => {
                let eta = match self.cfg.eta {
                    EtaPolicy::One => 1.0,
                    EtaPolicy::MatchBfgs => gamma,
                };
                match v {
                    Variant::Left => lbroyden::compact_apply(eta, &self.mem, PairKind::Preconditioned, gbar)?,
                    Variant::Transform => lbroyden::tp_apply(eta, &self.mem, g, gbar)?,
                }
            }
        };
        Ok(vector::neg(&h))
    }

    /// Search direction and trace flags. An empty window gives `−ḡ`; a failed
    /// apply clears the window and also gives `−ḡ`.
    pub fn direction(&mut self, g: &[f64], gbar: &[f64]) -> (Vec<f64>, u32) {
        if self.mem.is_empty() {
            return (vector::neg(gbar), 0);
        }
        match self.raw_direction(g, gbar) {
            Ok(p) if vector::all_finite(&p) => (p, 0),
            _ => {
                self.mem.clear();
                (vector::neg(gbar), flags::RESET)
            }
        }
    }

    /// Offers the pair `(s, y, ȳ)` built from a step that started at a point
    /// with gradient `g_start`. Returns trace flags.
    pub fn update(&mut self, s: Vec<f64>, mut y: Vec<f64>, mut ybar: Vec<f64>, g_start: Vec<f64>) -> u32 {
        let kind = self.cfg.kind();
        let mut fl = 0;
        let ok = match self.cfg.family {
            QnFamily::Bfgs => {
                let target = match kind {
                    PairKind::Preconditioned => &mut ybar,
                    PairKind::Gradient => &mut y,
                };
                match self.cfg.guard {
                    CurvatureGuard::Damp => {
                        let gamma = lbfgs::gamma_latest(&self.mem, kind).unwrap_or(1.0);
                        let bs = lbfgs::compact_b_apply(gamma, &self.mem, kind, &s).unwrap_or_else(|_| s.clone());
                        let (damped, theta) = lbfgs::damp_bfgs_pair(&s, target, &bs);
                        if theta < 1.0 {
                            fl |= flags::DAMPED;
                            *target = damped;
                        }
                        vector::dot(&s, target) > 0.0
                    }
                    CurvatureGuard::Skip => vector::dot(&s, target) > 0.0,
                    CurvatureGuard::Off => {
                        let c = vector::dot(&s, target);
                        c != 0.0 && c.is_finite()
                    }
                }
            }
            QnFamily::Broyden => {
                let target = match kind {
                    PairKind::Preconditioned => &ybar,
                    PairKind::Gradient => &y,
                };
                lbroyden::admits_pair(&s, target)
            }
        };
        let ok = ok
            && vector::all_finite(&y)
            && vector::all_finite(&ybar)
            && (self.cfg.variant == Variant::Left || vector::dot(&y, &ybar) != 0.0);
        if ok {
            self.mem.push(s, y, Some(ybar), g_start);
        } else {
            fl |= flags::SKIPPED_PAIR;
        }
        fl
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpqnOptions {
    pub qn: QnConfig,
    pub line_search: LineSearch,
    pub stop: StopRule,
}

/// Runs NPQN from `x0`; with [`Preconditioner::Identity`] this is plain
/// L-BFGS / L-Broyden.
pub fn npqn_solve(obj: &dyn Objective, pre: Preconditioner<'_>, x0: &[f64], opts: &NpqnOptions) -> Result<SolveReport> {
    if x0.len() != obj.dim() {
        return Err(Error::dims("npqn_solve", alloc::format!("x0 has {} entries, objective has {}", x0.len(), obj.dim())));
    }
    let mut qn = QnDirection::new(opts.qn)?;
    let mut c = Counters::default();
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&x)?;
    c.f_evals += 1;
    c.g_evals += 1;
    let mut mon = Monitor::new(opts.stop, &x, f, &g);
    if mon.initially_converged() {
        mon.report.status = crate::trace::Status::Converged;
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
    let worst = opts.line_search.worst_case_fevals();
    let mut k = 1;
    while mon.may_start(k, worst, &c) {
        let (p, mut fl) = qn.direction(&g, &gbar);
        let step = match take_step(obj, &opts.line_search, &x, f, &g, &p, &gbar, k, &mut c) {
            Ok(s) => s,
            Err(e) => {
                mon.fail(e);
                break;
            }
        };
        if step.used_fallback {
            if !qn.memory().is_empty() {
                fl |= flags::RESET;
            }
            qn.reset();
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
        let y = vector::sub(&step.g, &g);
        let ybar = vector::sub(&gbar_new, &gbar);
        let g_old = core::mem::replace(&mut g, step.g);
        fl |= qn.update(step.s, y, ybar, g_old);
        x = step.x;
        f = step.f;
        gbar = gbar_new;
        if mon.record(k, &x, f, &g, step.alpha, fl, c) {
            break;
        }
        k += 1;
    }
    Ok(mon.finish(c))
}
