//! NPQN, NPNCG and the bare fixed-point iteration on a product of
//! Grassmannians. Steps follow geodesics; tangent vectors from the previous
//! point are moved to the new one by parallel transport or projection.

use alloc::vec::Vec;

use super::geometry::{grassmann_log, project_horizontal, Geodesic};
use super::{devectorize, product_inner, vectorize, GrassmannMap, GrassmannObjective};
use crate::error::{Error, Result};
use crate::optim::linesearch::{modbt_search, strong_wolfe_1d, TrialDirection};
use crate::optim::ncg::{beta, BetaInputs, BetaRule, BetaVariant};
use crate::precond::{LineSearch, QnConfig, QnDirection};
use crate::tensor::Matrix;
use crate::trace::{flags, Counters, SolveReport, Status, StopRule, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportMode {
    Parallel,
    /// `Π_Y η` at the destination.
    Projection,
}

#[derive(Clone, Copy)]
pub enum ManifoldPrecond<'a> {
    /// `ḡ = grad f`.
    Identity,
    /// `ḡ = −Log_x(Q(x))`.
    FixedPoint(&'a dyn GrassmannMap),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldOptions {
    pub qn: QnConfig,
    pub line_search: LineSearch,
    pub transport: TransportMode,
    /// Transport the stored pairs to each new point before appending.
    pub window_transport: bool,
    pub stop: StopRule,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldNcgOptions {
    pub rule: BetaRule,
    pub variant: BetaVariant,
    pub restart: usize,
    pub line_search: LineSearch,
    pub transport: TransportMode,
    pub stop: StopRule,
}

type Point = Vec<Matrix>;

fn check_point(obj: &dyn GrassmannObjective, x: &[Matrix]) -> Result<()> {
    let shapes = obj.shapes();
    if shapes.len() != x.len() || shapes.iter().zip(x).any(|(&(r, c), m)| (m.rows(), m.cols()) != (r, c)) {
        return Err(Error::dims("manifold point", alloc::format!("expected components {shapes:?}")));
    }
    for (mode, m) in x.iter().enumerate() {
        let deviation = m.orthonormality_error();
        if !(deviation <= 1e-10) {
            return Err(Error::NotOrthonormal { mode, deviation });
        }
    }
    Ok(())
}

/// Preconditioned gradient and trace flags. When the logarithm is refused
/// the direction falls back to `−Π_x(Q(x) − x)`.
fn gbar_at(pre: &ManifoldPrecond<'_>, x: &[Matrix], g: &[Matrix], c: &mut Counters) -> Result<(Point, u32)> {
    match pre {
        ManifoldPrecond::Identity => Ok((g.to_vec(), 0)),
        ManifoldPrecond::FixedPoint(q) => {
            let qx = q.apply(x)?;
            c.q_applies += 1;
            let mut fl = 0;
            let mut out = Vec::with_capacity(x.len());
            for (xn, qn) in x.iter().zip(&qx) {
                let t = match grassmann_log(xn, qn) {
                    Ok(t) => t,
                    Err(Error::CutLocus { .. }) => {
                        fl |= flags::LOG_FALLBACK;
                        project_horizontal(xn, &qn.sub(xn))
                    }
                    Err(e) => return Err(e),
                };
                out.push(t.scaled(-1.0));
            }
            Ok((out, fl))
        }
    }
}

struct Curve {
    geo: Vec<Geodesic>,
}

impl Curve {
    fn new(x: &[Matrix], dir: &[Matrix]) -> Result<Self> {
        Ok(Self { geo: x.iter().zip(dir).map(|(a, d)| Geodesic::new(a, d)).collect::<Result<_>>()? })
    }

    fn point(&self, x: &[Matrix], t: f64) -> Result<Point> {
        self.geo.iter().zip(x).map(|(g, a)| g.exp(a, t)).collect()
    }

    fn velocity(&self, t: f64) -> Point {
        self.geo.iter().map(|g| g.transport_self(t)).collect()
    }

    fn carry(&self, mode: TransportMode, t: f64, dest: &[Matrix], eta: &[Matrix]) -> Point {
        match mode {
            TransportMode::Parallel => self.geo.iter().zip(eta).map(|(g, e)| g.transport(t, e)).collect(),
            TransportMode::Projection => dest.iter().zip(eta).map(|(y, e)| project_horizontal(y, e)).collect(),
        }
    }
}

fn scaled(t: &[Matrix], a: f64) -> Point {
    t.iter().map(|m| m.scaled(a)).collect()
}

fn diff(a: &[Matrix], b: &[Matrix]) -> Point {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

fn horizontal(x: &[Matrix], t: &[Matrix]) -> Point {
    x.iter().zip(t).map(|(a, b)| project_horizontal(a, b)).collect()
}

struct Moved {
    x: Point,
    f: f64,
    g: Point,
    alpha: f64,
    curve: Curve,
    dir: Point,
    used_fallback: bool,
}

#[allow(clippy::too_many_arguments)]
fn line_search(
    obj: &dyn GrassmannObjective,
    ls: &LineSearch,
    x: &[Matrix],
    f: f64,
    g: &[Matrix],
    p: &[Matrix],
    gbar: &[Matrix],
    iter: usize,
    c: &mut Counters,
) -> Result<Moved> {
    let fb: Point = scaled(gbar, -1.0);
    match ls {
        LineSearch::ModBt => {
            let primary = Curve::new(x, p)?;
            let mut fallback: Option<Curve> = None;
            let out = modbt_search(
                |dir, a| {
                    let cur = match dir {
                        TrialDirection::Primary => &primary,
                        TrialDirection::Fallback => {
                            if fallback.is_none() {
                                fallback = Some(Curve::new(x, &fb)?);
                            }
                            fallback.as_ref().expect("just built")
                        }
                    };
                    obj.value(&cur.point(x, a)?)
                },
                f,
                iter,
            )?;
            c.f_evals += out.f_evals;
            let used_fallback = out.direction == TrialDirection::Fallback;
            let (curve, dir) = if used_fallback {
                (fallback.expect("fallback curve was evaluated"), fb)
            } else {
                (primary, p.to_vec())
            };
            let xn = curve.point(x, out.alpha)?;
            let gn = obj.gradient(&xn)?;
            c.g_evals += 1;
            Ok(Moved { x: xn, f: out.f, g: gn, alpha: out.alpha, curve, dir, used_fallback })
        }
        LineSearch::Wolfe(params) => {
            for (k, dir) in [p.to_vec(), fb].into_iter().enumerate() {
                let curve = Curve::new(x, &dir)?;
                let mut last: Option<(f64, Point, f64, Point)> = None;
                let mut evals = 0;
                let found = strong_wolfe_1d(
                    |a| {
                        let xa = curve.point(x, a)?;
                        let (fa, ga) = obj.value_and_gradient(&xa)?;
                        let d = product_inner(&ga, &curve.velocity(a));
                        last = Some((a, xa, fa, ga));
                        Ok((fa, d))
                    },
                    f,
                    product_inner(g, &dir),
                    params,
                    &mut evals,
                )?;
                c.f_evals += evals;
                c.g_evals += evals;
                if let Some(pt) = found {
                    let (a, xn, fa, gn) = last.expect("accepted point was evaluated");
                    debug_assert_eq!(a, pt.alpha);
                    return Ok(Moved { x: xn, f: fa, g: gn, alpha: a, curve, dir, used_fallback: k == 1 });
                }
            }
            Err(Error::LineSearchFailed { reason: "no strong-Wolfe point along the fallback direction" })
        }
        LineSearch::Exact => Err(Error::param("line_search", "exact steps are only defined for quadratics")),
    }
}

struct Monitor {
    stop: StopRule,
    numel: usize,
    gnorm0: f64,
    report: SolveReport,
}

impl Monitor {
    fn new(stop: StopRule, x: &[Matrix], f: f64, g: &[Matrix]) -> Self {
        let gnorm0 = libm::sqrt(product_inner(g, g));
        let numel = x.iter().map(|m| m.data().len()).sum();
        let s0 = stop.termination.scaled(gnorm0, f, gnorm0, numel);
        let report = SolveReport {
            x: vectorize(x),
            f,
            status: Status::MaxIterations,
            iterations: 0,
            initial_f: f,
            initial_gnorm_scaled: s0,
            trace: Vec::new(),
            counters: Counters::default(),
        };
        Self { stop, numel, gnorm0, report }
    }

    fn may_start(&mut self, k: usize, worst: usize, c: &Counters) -> bool {
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

    #[allow(clippy::too_many_arguments)]
    fn record(&mut self, k: usize, x: &[Matrix], f: f64, g: &[Matrix], alpha: f64, fl: u32, c: Counters) -> bool {
        let sc = self.stop.termination.scaled(libm::sqrt(product_inner(g, g)), f, self.gnorm0, self.numel);
        self.report.trace.push(TraceRecord::new(k, f, sc, alpha, fl, c));
        self.report.iterations = k;
        self.report.f = f;
        self.report.x = vectorize(x);
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

    fn fail(&mut self, e: Error) {
        self.report.status = match e {
            Error::LineSearchFailed { .. } => Status::LineSearchFailed,
            Error::NonFinite { .. } => Status::NonFinite,
            e => Status::Failed(e),
        };
    }

    fn finish(mut self, c: Counters) -> SolveReport {
        self.report.counters = c;
        self.report
    }
}

/// Manifold NPQN. Directions come from the flat QN formulas applied to the
/// vectorized tangents and are projected back onto the horizontal space.
pub fn manifold_npqn_solve(
    obj: &dyn GrassmannObjective,
    pre: ManifoldPrecond<'_>,
    x0: &[Matrix],
    opts: &ManifoldOptions,
) -> Result<SolveReport> {
    check_point(obj, x0)?;
    let shapes = obj.shapes();
    let mut qn = QnDirection::new(opts.qn)?;
    let mut c = Counters::default();
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&x)?;
    c.f_evals += 1;
    c.g_evals += 1;
    let mut mon = Monitor::new(opts.stop, &x, f, &g);
    if mon.report.initial_gnorm_scaled <= opts.stop.tol {
        mon.report.status = Status::Converged;
        return Ok(mon.finish(c));
    }
    let (mut gbar, mut pending) = match gbar_at(&pre, &x, &g, &mut c) {
        Ok(v) => v,
        Err(e) => {
            mon.fail(e);
            return Ok(mon.finish(c));
        }
    };
    let worst = opts.line_search.worst_case_fevals();
    let mut k = 1;
    while mon.may_start(k, worst, &c) {
        let (pv, mut fl) = qn.direction(&vectorize(&g), &vectorize(&gbar));
        fl |= core::mem::take(&mut pending);
        let p = horizontal(&x, &devectorize(&shapes, &pv)?);
        let mv = match line_search(obj, &opts.line_search, &x, f, &g, &p, &gbar, k, &mut c) {
            Ok(m) => m,
            Err(e) => {
                mon.fail(e);
                break;
            }
        };
        if mv.used_fallback {
            if !qn.memory().is_empty() {
                fl |= flags::RESET;
            }
            qn.reset();
            fl |= flags::FALLBACK;
        }
        let (gbar_new, gfl) = match gbar_at(&pre, &mv.x, &mv.g, &mut c) {
            Ok(v) => v,
            Err(e) => {
                mon.fail(e);
                break;
            }
        };
        pending = gfl;
        let a = mv.alpha;
        let s = match opts.transport {
            TransportMode::Parallel => scaled(&mv.curve.velocity(a), a),
            TransportMode::Projection => horizontal(&mv.x, &scaled(&mv.dir, a)),
        };
        let tg = mv.curve.carry(opts.transport, a, &mv.x, &g);
        let tgbar = mv.curve.carry(opts.transport, a, &mv.x, &gbar);
        if opts.window_transport && !qn.memory().is_empty() {
            let (curve, mode, dest) = (&mv.curve, opts.transport, &mv.x);
            qn.memory_mut().transform(|v| {
                let t = devectorize(&shapes, v).expect("stored vectors match the point layout");
                vectorize(&curve.carry(mode, a, dest, &t))
            });
        }
        let y = diff(&mv.g, &tg);
        let ybar = diff(&gbar_new, &tgbar);
        fl |= qn.update(vectorize(&s), vectorize(&y), vectorize(&ybar), vectorize(&tg));
        x = mv.x;
        f = mv.f;
        g = mv.g;
        gbar = gbar_new;
        if mon.record(k, &x, f, &g, a, fl, c) {
            break;
        }
        k += 1;
    }
    Ok(mon.finish(c))
}

/// Manifold NPNCG: `p_{k+1} = −ḡ_{k+1} + β T(p_k)`, with the previous
/// gradients transported before forming differences.
pub fn manifold_npncg_solve(
    obj: &dyn GrassmannObjective,
    pre: ManifoldPrecond<'_>,
    x0: &[Matrix],
    opts: &ManifoldNcgOptions,
) -> Result<SolveReport> {
    check_point(obj, x0)?;
    let mut c = Counters::default();
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&x)?;
    c.f_evals += 1;
    c.g_evals += 1;
    let mut mon = Monitor::new(opts.stop, &x, f, &g);
    if mon.report.initial_gnorm_scaled <= opts.stop.tol {
        mon.report.status = Status::Converged;
        return Ok(mon.finish(c));
    }
    let (mut gbar, mut pending) = match gbar_at(&pre, &x, &g, &mut c) {
        Ok(v) => v,
        Err(e) => {
            mon.fail(e);
            return Ok(mon.finish(c));
        }
    };
    let mut p = scaled(&gbar, -1.0);
    let worst = opts.line_search.worst_case_fevals();
    let mut k = 1;
    while mon.may_start(k, worst, &c) {
        let mut fl = core::mem::take(&mut pending);
        let mv = match line_search(obj, &opts.line_search, &x, f, &g, &p, &gbar, k, &mut c) {
            Ok(m) => m,
            Err(e) => {
                mon.fail(e);
                break;
            }
        };
        if mv.used_fallback {
            fl |= flags::FALLBACK;
        }
        let (gbar_new, gfl) = match gbar_at(&pre, &mv.x, &mv.g, &mut c) {
            Ok(v) => v,
            Err(e) => {
                mon.fail(e);
                break;
            }
        };
        pending = gfl;
        let a = mv.alpha;
        let tp = match opts.transport {
            TransportMode::Parallel => mv.curve.velocity(a),
            TransportMode::Projection => horizontal(&mv.x, &mv.dir),
        };
        let tg = vectorize(&mv.curve.carry(opts.transport, a, &mv.x, &g));
        let tgbar = vectorize(&mv.curve.carry(opts.transport, a, &mv.x, &gbar));
        let (gn, gbn, tpv) = (vectorize(&mv.g), vectorize(&gbar_new), vectorize(&tp));
        let b = if opts.restart > 0 && k % opts.restart == 0 {
            fl |= flags::RESTART;
            0.0
        } else {
            let b = beta(opts.rule, opts.variant, &BetaInputs { g_new: &gn, g_old: &tg, gbar_new: &gbn, gbar_old: &tgbar, p: &tpv });
            if b.is_finite() {
                b
            } else {
                fl |= flags::RESTART;
                0.0
            }
        };
        let next: Vec<f64> = gbn.iter().zip(&tpv).map(|(gb, pp)| -gb + b * pp).collect();
        p = horizontal(&mv.x, &devectorize(&obj.shapes(), &next)?);
        x = mv.x;
        f = mv.f;
        g = mv.g;
        gbar = gbar_new;
        if mon.record(k, &x, f, &g, a, fl, c) {
            break;
        }
        k += 1;
    }
    Ok(mon.finish(c))
}

/// `x_{k+1} = Q(x_k)`, monitored through `obj`. Each sweep counts one `Q`
/// application and one objective evaluation.
pub fn manifold_fixed_point_solve(obj: &dyn GrassmannObjective, q: &dyn GrassmannMap, x0: &[Matrix], stop: &StopRule) -> Result<SolveReport> {
    check_point(obj, x0)?;
    let mut c = Counters::default();
    let (f0, g0) = obj.value_and_gradient(x0)?;
    c.f_evals += 1;
    c.g_evals += 1;
    let mut mon = Monitor::new(*stop, x0, f0, &g0);
    if mon.report.initial_gnorm_scaled <= stop.tol {
        mon.report.status = Status::Converged;
        return Ok(mon.finish(c));
    }
    let mut x = x0.to_vec();
    let mut k = 1;
    while mon.may_start(k, 1, &c) {
        let step = q.apply(&x).and_then(|xn| {
            let (f, g) = obj.value_and_gradient(&xn)?;
            Ok((xn, f, g))
        });
        let (xn, f, g) = match step {
            Ok(v) => v,
            Err(e) => {
                mon.fail(e);
                break;
            }
        };
        c.q_applies += 1;
        c.f_evals += 1;
        c.g_evals += 1;
        x = xn;
        if mon.record(k, &x, f, &g, 1.0, 0, c) {
            break;
        }
        k += 1;
    }
    Ok(mon.finish(c))
}
