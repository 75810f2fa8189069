//! The preconditioner run on its own: `x_{k+1} = Q(x_k)`.

use super::FixedPointMap;
use crate::error::{Error, Result};
use crate::optim::Objective;
use crate::trace::{Counters, SolveReport, Status, StopRule};

use super::driver::Monitor;

/// Iterates `Q`, monitoring `obj` for the stopping test. Each sweep counts
/// one `Q` application and one objective evaluation.
pub fn fixed_point_solve(obj: &dyn Objective, q: &dyn FixedPointMap, x0: &[f64], stop: &StopRule) -> Result<SolveReport> {
    if x0.len() != obj.dim() || q.dim() != obj.dim() {
        return Err(Error::dims("fixed_point_solve", alloc::format!("x0 {}, Q {}, objective {}", x0.len(), q.dim(), obj.dim())));
    }
    let mut c = Counters::default();
    let (f0, g0) = obj.value_and_gradient(x0)?;
    c.f_evals += 1;
    c.g_evals += 1;
    let mut mon = Monitor::new(*stop, x0, f0, &g0);
    if mon.initially_converged() {
        mon.report.status = Status::Converged;
        return Ok(mon.finish(c));
    }
    let mut x = x0.to_vec();
    let mut k = 1;
    while mon.may_start(k, 1, &c) {
        let xn = match q.apply(&x) {
            Ok(v) => v,
            Err(e) => {
                mon.fail(e);
                break;
            }
        };
        c.q_applies += 1;
        let (f, g) = match obj.value_and_gradient(&xn) {
            Ok(v) => v,
            Err(e) => {
                mon.fail(e);
                break;
            }
        };
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
