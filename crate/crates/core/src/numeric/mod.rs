//! Numerical references: explicit RK4, the bubble integrator, residual
//! profiles, finite-difference jets and trajectory comparison.

mod bubble;
pub mod csv;
mod fdjet;
mod integrate;
mod validate;

use serde::Serialize;
use thiserror::Error;

use crate::approx::ClosedFormSolution;
use crate::expr::{Env, Expr, ExprError, Var};

pub use bubble::{bubble_acceleration, collapse_time_oracle, integrate_bubble, BubbleParams, BubbleRun, ENERGY_DRIFT_TOL};
pub use fdjet::{finite_difference_jet, FdJet};
pub use integrate::integrate_explicit;
pub use validate::{compare_trajectories, residual_profile, sample_grid, ValidationReport, ValidationRow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("energy monitor rejected the step at t = {t}: drift {drift:e} exceeds {allowed:e}")]
    StepTooLarge { t: f64, drift: f64, allowed: f64 },
    #[error("implicit root lost at ({x}, {s}) while building the stencil")]
    RootLost { x: f64, s: f64 },
    #[error("interval [{a}, {b}] is not inside the domain [{lo}, {hi}] of {which}")]
    IntervalMismatch { a: f64, b: f64, lo: f64, hi: f64, which: &'static str },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Integrator {
    Rk4,
    /// RK4 on the bubble system with energy-monitored substeps.
    Rk4Bubble,
}

/// Samples on a uniform grid `x_i = x_start + i * step`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub step: f64,
    pub integrator: Integrator,
    /// Why the integration stopped before the requested end, if it did.
    pub stopped: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    pub fn domain(&self) -> (f64, f64) {
        let (a, b) = (self.samples[0].x, self.last().x);
        (a.min(b), a.max(b))
    }

    /// Cubic Hermite interpolation from node values and slopes.
    pub fn interpolate(&self, x: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return None;
        }
        let n = self.samples.len();
        if n == 1 {
            let s = self.samples[0];
            return Some((s.y, s.dy));
        }
        let pos = ((x - self.samples[0].x) / self.step).floor();
        let i = (pos.max(0.0) as usize).min(n - 2);
        let (a, b) = (self.samples[i], self.samples[i + 1]);
        let h = b.x - a.x;
        let t = (x - a.x) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let y = h00 * a.y + h10 * h * a.dy + h01 * b.y + h11 * h * b.dy;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        let dy = d00 * a.y + d10 * a.dy + d01 * b.y + d11 * b.dy;
        Some((y, dy))
    }
}

/// Anything that can be sampled as `(u(x), u'(x))`.
pub trait Curve {
    fn name(&self) -> &'static str;
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn eval(&self, x: f64) -> Result<(f64, f64), ExprError>;
}

impl Curve for ClosedFormSolution {
    fn name(&self) -> &'static str {
        "closed-form solution"
    }

    fn eval(&self, x: f64) -> Result<(f64, f64), ExprError> {
        Ok((self.value(x), self.derivative(x)))
    }
}

impl Curve for Trajectory {
    fn name(&self) -> &'static str {
        "trajectory"
    }

    fn domain(&self) -> (f64, f64) {
        Trajectory::domain(self)
    }

    fn eval(&self, x: f64) -> Result<(f64, f64), ExprError> {
        self.interpolate(x).ok_or_else(|| ExprError::Domain(format!("{x} outside the trajectory")))
    }
}

/// A solution given as an expression in `x` (or `t`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub expr: Expr,
    derivative: Expr,
}

impl ExactSolution {
    pub fn new(expr: Expr) -> ExactSolution {
        let expr = expr.with_independent_x();
        let derivative = expr.differentiate(Var::X);
        ExactSolution { expr, derivative }
    }
}

impl Curve for ExactSolution {
    fn name(&self) -> &'static str {
        "exact solution"
    }

    fn eval(&self, x: f64) -> Result<(f64, f64), ExprError> {
        let env = Env::new().with(Var::X, x);
        Ok((self.expr.evaluate(&env)?, self.derivative.evaluate(&env)?))
    }
}
