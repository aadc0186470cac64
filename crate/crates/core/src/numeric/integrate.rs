use crate::expr::{Env, Expr, Var};

use super::{Integrator, NumericError, Sample, Trajectory};

/// Number of uniform steps covering `span` with steps no longer than `step`.
pub(crate) fn step_count(span: f64, step: f64) -> usize {
    let n = (span.abs() / step * (1.0 - 1e-12)).ceil();
    (n as usize).max(1)
}

/// Classical RK4 for `y' = f(x, y)` from `(x0, y0)` to `x_end`, where `f` is
/// written in `x` (or `t`) and `p`.
///
/// The step is shrunk so that the grid lands exactly on `x_end`. A domain
/// error stops the run and returns the samples computed so far.
pub fn integrate_explicit(f: &Expr, x0: f64, y0: f64, step: f64, x_end: f64) -> Result<Trajectory, NumericError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(NumericError::InvalidStep(step));
    }
    let f = f.with_independent_x();
    let rhs = |x: f64, y: f64| f.evaluate(&Env::new().with(Var::X, x).with(Var::P, y));
    let n = if x_end == x0 { 0 } else { step_count(x_end - x0, step) };
    let h = if n == 0 { 0.0 } else { (x_end - x0) / n as f64 };
    let mut traj = Trajectory { samples: Vec::with_capacity(n + 1), step: h, integrator: Integrator::Rk4, stopped: None };
    let mut y = y0;
    let mut x = x0;
    let mut dy = match rhs(x, y) {
        Ok(v) => v,
        Err(e) => {
            traj.samples.push(Sample { x, y, dy: f64::NAN });
            traj.stopped = Some(e.to_string());
            return Ok(traj);
        }
    };
    traj.samples.push(Sample { x, y, dy });
    for i in 1..=n {
        let stage = || -> Result<(f64, f64), crate::expr::ExprError> {
            let k1 = dy;
            let k2 = rhs(x + 0.5 * h, y + 0.5 * h * k1)?;
            let k3 = rhs(x + 0.5 * h, y + 0.5 * h * k2)?;
            let k4 = rhs(x + h, y + h * k3)?;
            let y_next = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            let x_next = if i == n { x_end } else { x0 + i as f64 * h };
            Ok((y_next, rhs(x_next, y_next)?))
        };
        match stage() {
            Ok((y_next, dy_next)) => {
                x = if i == n { x_end } else { x0 + i as f64 * h };
                y = y_next;
                dy = dy_next;
                traj.samples.push(Sample { x, y, dy });
            }
            Err(e) => {
                traj.stopped = Some(format!("{e} near x = {x}"));
                break;
            }
        }
    }
    Ok(traj)
}
