//! Per-iteration trace records, cost counters and solver reports.

use alloc::vec::Vec;

use crate::error::Error;

/// Bit flags attached to a [`TraceRecord`].
pub mod flags {
    /// Quasi-Newton memory was cleared during the iteration.
    pub const RESET: u32 = 1;
    /// The line search fell back to the preconditioner direction.
    pub const FALLBACK: u32 = 1 << 1;
    /// The manifold log map failed and a projected difference was used.
    pub const LOG_FALLBACK: u32 = 1 << 2;
    /// NCG restarted with beta = 0.
    pub const RESTART: u32 = 1 << 3;
    /// The stored pair was damped.
    pub const DAMPED: u32 = 1 << 4;
    /// The pair was not admitted to memory.
    pub const SKIPPED_PAIR: u32 = 1 << 5;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub q_applies: usize,
    pub f_evals: usize,
    pub g_evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub f: f64,
    pub gnorm_scaled: f64,
    pub alpha: f64,
    pub flags: u32,
    pub q_applies: usize,
    pub f_evals: usize,
    pub g_evals: usize,
}

impl TraceRecord {
    pub fn new(k: usize, f: f64, gnorm_scaled: f64, alpha: f64, flags: u32, c: Counters) -> Self {
        Self { k, f, gnorm_scaled, alpha, flags, q_applies: c.q_applies, f_evals: c.f_evals, g_evals: c.g_evals }
    }
}

/// Gradient-norm scaling used by the stopping test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// `‖g‖ / numel(x)`.
    GradPerUnknown,
    /// `‖g‖ / |f|`.
    GradRelObjective,
    /// `‖g‖ / ‖g_0‖`.
    GradRelInitial,
}

impl Termination {
    pub fn scaled(&self, gnorm: f64, f: f64, gnorm0: f64, numel: usize) -> f64 {
        match self {
            Termination::GradPerUnknown => gnorm / numel as f64,
            Termination::GradRelObjective => gnorm / f.abs(),
            Termination::GradRelInitial => {
                if gnorm0 == 0.0 {
                    0.0
                } else {
                    gnorm / gnorm0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub termination: Termination,
    pub tol: f64,
    pub max_iters: usize,
    pub max_fevals: usize,
}

impl StopRule {
    pub fn new(termination: Termination, tol: f64, max_iters: usize) -> Self {
        Self { termination, tol, max_iters, max_fevals: usize::MAX }
    }

    pub fn with_max_fevals(mut self, max_fevals: usize) -> Self {
        self.max_fevals = max_fevals;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Converged,
    MaxIterations,
    MaxFunctionEvaluations,
    LineSearchFailed,
    NonFinite,
    Failed(Error),
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub f: f64,
    pub status: Status,
    pub iterations: usize,
    pub initial_f: f64,
    pub initial_gnorm_scaled: f64,
    pub trace: Vec<TraceRecord>,
    pub counters: Counters,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// Scaled gradient norms including the starting point.
    pub fn residual_history(&self) -> Vec<f64> {
        core::iter::once(self.initial_gnorm_scaled).chain(self.trace.iter().map(|r| r.gnorm_scaled)).collect()
    }

    /// First iteration whose scaled gradient norm is at most `tol`.
    pub fn iterations_to(&self, tol: f64) -> Option<usize> {
        if self.initial_gnorm_scaled <= tol {
            return Some(0);
        }
        self.trace.iter().find(|r| r.gnorm_scaled <= tol).map(|r| r.k)
    }
}
