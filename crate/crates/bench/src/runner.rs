//! Builds problems and solvers from an [`ExperimentConfig`] and runs seeded
//! multi-trial campaigns.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use npqn_core::decomp::{CpProblem, Sweep, TuckerProblem};
use npqn_core::manifold::{
    manifold_fixed_point_solve, manifold_npncg_solve, manifold_npqn_solve, ManifoldNcgOptions, ManifoldOptions, ManifoldPrecond,
    TransportMode,
};
use npqn_core::optim::linear::{cg_solve, pcg_solve, Ssor};
use npqn_core::optim::linesearch::WolfeParams;
use npqn_core::optim::ncg::{BetaRule, BetaVariant};
use npqn_core::optim::{Objective, QuadraticProblem};
use npqn_core::precond::{
    fixed_point_solve, npncg_solve, npqn_solve, CurvatureGuard, EtaPolicy, FixedPointMap, LineSearch, LinearFixedPoint, NcgOptions,
    NpqnOptions, Preconditioner, QnConfig, QnFamily, Variant,
};
use npqn_core::problems::rng::{stream, uniforms, Purpose};
use npqn_core::problems::{
    add_uniform_noise, generate_collinear_cp, generate_synthetic_tucker, poisson2d, random_cp_start, CpTestSpec, PoissonSpec,
    TuckerTestSpec,
};
use npqn_core::trace::{SolveReport, Status, StopRule, Termination, TraceRecord};
use npqn_core::DenseTensor;

use crate::config::*;
use crate::files;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("problem setup failed: {0}")]
    Setup(#[from] npqn_core::Error),
    #[error(transparent)]
    File(#[from] files::FileError),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub converged: bool,
    pub status: String,
    pub iterations: usize,
    pub final_f: f64,
    pub final_gnorm_scaled: f64,
    pub q_applies: usize,
    pub f_evals: usize,
    pub g_evals: usize,
    pub seconds: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
}

impl TrialResult {
    fn from_report(trial: usize, r: SolveReport, seconds: f64) -> Self {
        let status = match &r.status {
            Status::Converged => "converged".to_string(),
            Status::MaxIterations => "max-iterations".to_string(),
            Status::MaxFunctionEvaluations => "max-function-evaluations".to_string(),
            Status::LineSearchFailed => "line-search-failed".to_string(),
            Status::NonFinite => "non-finite".to_string(),
            Status::Failed(e) => format!("failed: {e}"),
        };
        let last = r.trace.last();
        Self {
            trial,
            converged: r.converged(),
            status,
            iterations: r.iterations,
            final_f: r.f,
            final_gnorm_scaled: last.map_or(r.initial_gnorm_scaled, |t| t.gnorm_scaled),
            q_applies: r.counters.q_applies,
            f_evals: r.counters.f_evals,
            g_evals: r.counters.g_evals,
            seconds,
            trace: r.trace,
        }
    }

    fn aborted(trial: usize, e: impl std::fmt::Display, seconds: f64) -> Self {
        Self {
            trial,
            converged: false,
            status: format!("failed: {e}"),
            iterations: 0,
            final_f: f64::NAN,
            final_gnorm_scaled: f64::NAN,
            q_applies: 0,
            f_evals: 0,
            g_evals: 0,
            seconds,
            trace: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub converged: usize,
    /// Table convention: a method is starred if any trial failed.
    pub all_converged: bool,
    pub mean_iterations: f64,
    pub mean_iterations_converged: Option<f64>,
    pub max_iterations: usize,
    /// Wall-clock time; reported only.
    pub mean_seconds: f64,
}

impl Summary {
    pub fn of(trials: &[TrialResult]) -> Self {
        let n = trials.len();
        let conv: Vec<&TrialResult> = trials.iter().filter(|t| t.converged).collect();
        let mean = |it: &mut dyn Iterator<Item = f64>, d: usize| if d == 0 { 0.0 } else { it.sum::<f64>() / d as f64 };
        Self {
            trials: n,
            converged: conv.len(),
            all_converged: conv.len() == n,
            mean_iterations: mean(&mut trials.iter().map(|t| t.iterations as f64), n),
            mean_iterations_converged: (!conv.is_empty()).then(|| mean(&mut conv.iter().map(|t| t.iterations as f64), conv.len())),
            max_iterations: trials.iter().map(|t| t.iterations).max().unwrap_or(0),
            mean_seconds: mean(&mut trials.iter().map(|t| t.seconds), n),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialResult>,
    pub summary: Summary,
}

impl Campaign {
    pub fn all_converged(&self) -> bool {
        self.summary.all_converged
    }
}

/// Problem data shared by all trials of a campaign.
enum Instance {
    Quadratic { q: QuadraticProblem, p: Ssor },
    Cp(CpProblem),
    /// Tucker data differ per trial (fresh noise) for synthetic problems.
    Tucker(Option<TuckerProblem>),
}

fn load_file_tensor(cfg: &ExperimentConfig) -> Result<DenseTensor, RunError> {
    let path = cfg.path.as_ref().ok_or_else(|| ConfigError::Inconsistent("tensor-file needs path".into()))?;
    let mut x = files::load_tensor(path, cfg.format)?;
    if cfg.uniform_noise > 0.0 {
        let n = DenseTensor::new(x.shape().to_vec(), uniforms(&mut stream(cfg.seed, 0, Purpose::Noise1), x.len()))?;
        x = add_uniform_noise(&x, &n, cfg.uniform_noise)?;
    }
    Ok(x)
}

fn build_instance(cfg: &ExperimentConfig) -> Result<Instance, RunError> {
    Ok(match cfg.problem {
        ProblemKind::Poisson => {
            let (q, a) = poisson2d(&PoissonSpec::new(cfg.intervals)?)?;
            let p = Ssor::new(&a, cfg.omega)?;
            Instance::Quadratic { q, p }
        }
        ProblemKind::CpSynthetic => {
            let spec = CpTestSpec {
                extent: cfg.extent,
                order: cfg.order,
                rank: cfg.rank,
                collinearity: cfg.collinearity,
                l1: cfg.l1,
                l2: cfg.l2,
                seed: cfg.seed,
            };
            // One test tensor; trials differ in the initial guess.
            let (_, x) = generate_collinear_cp(&spec, 0)?;
            Instance::Cp(CpProblem::new(x, cfg.rank)?)
        }
        ProblemKind::TuckerSynthetic => Instance::Tucker(None),
        ProblemKind::TensorFile => {
            let x = load_file_tensor(cfg)?;
            match cfg.model {
                ModelKind::Cp => Instance::Cp(CpProblem::new(x, cfg.rank)?),
                ModelKind::Tucker => Instance::Tucker(Some(TuckerProblem::new(x, cfg.ranks.clone())?)),
            }
        }
    })
}

fn qn_config(cfg: &ExperimentConfig) -> QnConfig {
    let family = if cfg.method == MethodKind::Lbroyden { QnFamily::Broyden } else { QnFamily::Bfgs };
    let variant = if cfg.precond == PrecondKind::Tp { Variant::Transform } else { Variant::Left };
    let mut qn = QnConfig::new(family, variant, cfg.m.max(1));
    // CP uses η = 1 for preconditioned L-Broyden; elsewhere η follows γ.
    let eta = match cfg.eta {
        Some(EtaKind::One) => EtaPolicy::One,
        Some(EtaKind::Match) => EtaPolicy::MatchBfgs,
        None if cfg.tensor_model() == Some(ModelKind::Cp) && cfg.precond != PrecondKind::None => EtaPolicy::One,
        None => EtaPolicy::MatchBfgs,
    };
    qn = qn.with_eta(eta);
    if let Some(g) = cfg.guard {
        qn = qn.with_guard(match g {
            GuardKind::Damp => CurvatureGuard::Damp,
            GuardKind::Skip => CurvatureGuard::Skip,
            GuardKind::Off => CurvatureGuard::Off,
        });
    }
    qn
}

fn outer_line_search(cfg: &ExperimentConfig) -> LineSearch {
    match cfg.line_search() {
        LineSearchKind::Wolfe => LineSearch::Wolfe(WolfeParams::default()),
        LineSearchKind::ModBt => LineSearch::ModBt,
        LineSearchKind::ExactQuadratic => LineSearch::Exact,
    }
}

fn ncg_parts(cfg: &ExperimentConfig) -> (BetaRule, BetaVariant) {
    let rule = match cfg.beta {
        BetaKind::Pr => BetaRule::PolakRibiere,
        BetaKind::Hs => BetaRule::HestenesStiefel,
        BetaKind::Hz => BetaRule::HagerZhang,
    };
    (rule, if cfg.beta_is_hat() { BetaVariant::Hat } else { BetaVariant::Tilde })
}

fn sweep(cfg: &ExperimentConfig) -> Sweep {
    match cfg.sweep {
        SweepKind::F => Sweep::Forward,
        SweepKind::Fb => Sweep::ForwardBackward,
    }
}

fn stop_rule(cfg: &ExperimentConfig) -> StopRule {
    let termination = match cfg.tensor_model() {
        None => Termination::GradRelInitial,
        Some(ModelKind::Cp) => Termination::GradPerUnknown,
        Some(ModelKind::Tucker) => Termination::GradRelObjective,
    };
    StopRule::new(termination, cfg.tolerance(), cfg.max_iters).with_max_fevals(cfg.max_fevals)
}

/// Euclidean outer methods over an objective with an optional fixed-point
/// preconditioner.
fn run_euclidean(cfg: &ExperimentConfig, obj: &dyn Objective, q: &dyn FixedPointMap, x0: &[f64]) -> npqn_core::Result<SolveReport> {
    let pre = if cfg.precond == PrecondKind::None { Preconditioner::Identity } else { Preconditioner::FixedPoint(q) };
    let stop = stop_rule(cfg);
    match cfg.method {
        MethodKind::Ncg => {
            let (rule, variant) = ncg_parts(cfg);
            let opts = NcgOptions { rule, variant, restart: cfg.restart_period(), line_search: outer_line_search(cfg), stop };
            npncg_solve(obj, pre, x0, &opts)
        }
        MethodKind::Lbfgs | MethodKind::Lbroyden => {
            npqn_solve(obj, pre, x0, &NpqnOptions { qn: qn_config(cfg), line_search: outer_line_search(cfg), stop })
        }
        _ => fixed_point_solve(obj, q, x0, &stop),
    }
}

fn run_tucker(cfg: &ExperimentConfig, p: &TuckerProblem) -> npqn_core::Result<SolveReport> {
    let x0 = p.hosvd()?.factors;
    let hooi = p.hooi(sweep(cfg));
    let stop = stop_rule(cfg);
    let pre = if cfg.precond == PrecondKind::None { ManifoldPrecond::Identity } else { ManifoldPrecond::FixedPoint(&hooi) };
    let transport = match cfg.transport {
        TransportKind::Parallel => TransportMode::Parallel,
        TransportKind::Projection => TransportMode::Projection,
    };
    match cfg.method {
        MethodKind::Hooi => manifold_fixed_point_solve(p, &hooi, &x0, &stop),
        MethodKind::Ncg => {
            let (rule, variant) = ncg_parts(cfg);
            let opts = ManifoldNcgOptions {
                rule,
                variant,
                restart: cfg.restart_period(),
                line_search: outer_line_search(cfg),
                transport,
                stop,
            };
            manifold_npncg_solve(p, pre, &x0, &opts)
        }
        _ => {
            let opts = ManifoldOptions {
                qn: qn_config(cfg),
                line_search: outer_line_search(cfg),
                transport,
                window_transport: cfg.window_transport,
                stop,
            };
            manifold_npqn_solve(p, pre, &x0, &opts)
        }
    }
}

fn run_trial(cfg: &ExperimentConfig, inst: &Instance, trial: usize) -> npqn_core::Result<SolveReport> {
    match inst {
        Instance::Quadratic { q, p } => {
            let x0 = vec![0.0; q.dim()];
            let tol = cfg.tolerance();
            match cfg.method {
                MethodKind::Cg => cg_solve(q, &x0, tol, cfg.max_iters),
                MethodKind::Pcg => pcg_solve(q, &x0, Some(p), tol, cfg.max_iters),
                _ => {
                    let map = LinearFixedPoint::new(q, p)?;
                    run_euclidean(cfg, q, &map, &x0)
                }
            }
        }
        Instance::Cp(p) => {
            let x0 = random_cp_start(p.tensor().shape(), p.rank(), cfg.seed, trial as u64);
            let als = p.als(sweep(cfg));
            run_euclidean(cfg, p, &als, &x0)
        }
        Instance::Tucker(Some(p)) => run_tucker(cfg, p),
        Instance::Tucker(None) => {
            let spec = TuckerTestSpec {
                extents: cfg.extents.clone(),
                ranks: cfg.true_ranks.clone(),
                l1: cfg.l1,
                l2: cfg.l2,
                seed: cfg.seed,
            };
            let x = generate_synthetic_tucker(&spec, trial as u64)?;
            run_tucker(cfg, &TuckerProblem::new(x, cfg.ranks.clone())?)
        }
    }
}

/// Worker count: `BENCH_THREADS` if set, else all cores, never more than
/// the number of trials.
pub fn worker_count(trials: usize) -> usize {
    let cap = std::env::var("BENCH_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    cap.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).min(trials).max(1)
}

/// Runs trials `0..cfg.trials`. Solver failures are recorded as failed
/// trials; only configuration and setup errors abort the campaign.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Campaign, RunError> {
    run_trials(cfg, &(0..cfg.trials).collect::<Vec<_>>())
}

/// Runs the given trial indices; results depend only on the index.
pub fn run_trials(cfg: &ExperimentConfig, indices: &[usize]) -> Result<Campaign, RunError> {
    cfg.validate()?;
    let inst = build_instance(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(indices.len()))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let trials: Vec<TrialResult> = pool.install(|| {
        indices
            .par_iter()
            .map(|&t| {
                let start = Instant::now();
                let res = run_trial(cfg, &inst, t);
                let secs = start.elapsed().as_secs_f64();
                match res {
                    Ok(r) => TrialResult::from_report(t, r, secs),
                    Err(e) => TrialResult::aborted(t, e, secs),
                }
            })
            .collect()
    });
    let summary = Summary::of(&trials);
    Ok(Campaign { config: cfg.clone(), trials, summary })
}
