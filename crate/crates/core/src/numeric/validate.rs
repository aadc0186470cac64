use serde::Serialize;

use crate::expr::{Env, Expr};

use super::{Curve, NumericError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub x: f64,
    pub value_a: f64,
    pub value_b: f64,
    pub abs_error: f64,
    /// `|F(x, u, u')|` along the first curve, when an equation was supplied.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub interval: (f64, f64),
    pub samples: usize,
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
    pub max_residual: Option<f64>,
    pub rows: Vec<ValidationRow>,
    /// Sample abscissae skipped because of a domain error.
    pub excluded: Vec<f64>,
}

impl ValidationReport {
    fn from_rows(interval: (f64, f64), rows: Vec<ValidationRow>, excluded: Vec<f64>) -> Self {
        let samples = rows.len() + excluded.len();
        let n = rows.len().max(1) as f64;
        let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
        let mean_abs_error = rows.iter().map(|r| r.abs_error).sum::<f64>() / n;
        let max_residual = rows.iter().filter_map(|r| r.residual).reduce(f64::max);
        ValidationReport { interval, samples, max_abs_error, mean_abs_error, max_residual, rows, excluded }
    }

    pub fn csv_rows(&self) -> Vec<[f64; 4]> {
        self.rows.iter().map(|r| [r.x, r.value_a, r.value_b, r.abs_error]).collect()
    }
}

/// `samples` uniform abscissae from `a` to `b` inclusive; one point when `a == b`.
pub fn sample_grid(a: f64, b: f64, samples: usize) -> Vec<f64> {
    if samples <= 1 || a == b {
        return vec![a];
    }
    let last = samples - 1;
    (0..samples).map(|i| if i == last { b } else { a + (b - a) * i as f64 / last as f64 }).collect()
}

fn residual_at(f: &Expr, x: f64, u: f64, du: f64) -> Result<f64, crate::expr::ExprError> {
    Ok(f.evaluate(&Env::xpq(x, u, du))?.abs())
}

/// `|F(x, u(x), u'(x))|` on a uniform grid. `value_a` is `u`, `value_b` is
/// `u'` and `abs_error` is the residual.
pub fn residual_profile(
    f: &Expr,
    sol: &dyn Curve,
    interval: (f64, f64),
    samples: usize,
) -> Result<ValidationReport, NumericError> {
    check_domain(sol, interval)?;
    let f = f.with_independent_x();
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for x in sample_grid(interval.0, interval.1, samples) {
        match sol.eval(x).and_then(|(u, du)| Ok((u, du, residual_at(&f, x, u, du)?))) {
            Ok((u, du, r)) => rows.push(ValidationRow { x, value_a: u, value_b: du, abs_error: r, residual: Some(r) }),
            Err(_) => excluded.push(x),
        }
    }
    Ok(ValidationReport::from_rows(interval, rows, excluded))
}

fn check_domain(c: &dyn Curve, (a, b): (f64, f64)) -> Result<(), NumericError> {
    let (lo, hi) = c.domain();
    let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()).min(1e300));
    if a.min(b) < lo - tol || a.max(b) > hi + tol {
        return Err(NumericError::IntervalMismatch { a, b, lo, hi, which: c.name() });
    }
    Ok(())
}

/// Pointwise `|a(x) - b(x)|`; with `f`, also the residual of `a` against it.
pub fn compare_trajectories(
    a: &dyn Curve,
    b: &dyn Curve,
    interval: (f64, f64),
    samples: usize,
    f: Option<&Expr>,
) -> Result<ValidationReport, NumericError> {
    check_domain(a, interval)?;
    check_domain(b, interval)?;
    let f = f.map(|f| f.with_independent_x());
    let (lo, hi) = (a.domain().0.max(b.domain().0), a.domain().1.min(b.domain().1));
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for x in sample_grid(interval.0, interval.1, samples) {
        let xc = x.clamp(lo, hi);
        let row = (|| {
            let (ua, dua) = a.eval(xc)?;
            let (ub, _) = b.eval(xc)?;
            let residual = match &f {
                Some(f) => Some(residual_at(f, xc, ua, dua)?),
                None => None,
            };
            Ok::<_, crate::expr::ExprError>(ValidationRow { x, value_a: ua, value_b: ub, abs_error: (ua - ub).abs(), residual })
        })();
        match row {
            Ok(r) => rows.push(r),
            Err(_) => excluded.push(x),
        }
    }
    Ok(ValidationReport::from_rows(interval, rows, excluded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::ClosedFormSolution;
    use crate::expr::parse;
    use crate::numeric::{integrate_explicit, ExactSolution};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn exact(text: &str) -> ExactSolution {
        ExactSolution::new(parse(text).unwrap())
    }

    #[test]
    fn exact_solutions_have_tiny_residuals() {
        let r = residual_profile(&parse("2*p - q").unwrap(), &exact("exp(2*x)"), (-1.0, 1.0), 101).unwrap();
        assert_eq!(r.rows.len(), 101);
        assert!(r.max_residual.unwrap() <= 1e-12);
        let r = residual_profile(&parse("p^2 + q^2 - 1").unwrap(), &exact("sin(x)"), (0.0, PI), 101).unwrap();
        assert!(r.max_residual.unwrap() <= 1e-12);
        assert!(r.max_abs_error >= r.mean_abs_error && r.mean_abs_error >= 0.0);
    }

    #[test]
    fn quadratic_local_solution_residual() {
        let sol = ClosedFormSolution {
            x0: FRAC_PI_2,
            p0: 1.0,
            q0: 0.0,
            poly: vec![1.0, 0.0, -0.5],
            amplitude: 0.0,
            rate: 0.0,
            forcing: Vec::new(),
        };
        let f = parse("p^2 + q^2 - 1").unwrap();
        let r = residual_profile(&f, &sol, (FRAC_PI_2 - 0.5, FRAC_PI_2 + 0.5), 101).unwrap();
        // endpoints: (1 - d^2/2)^2 + d^2 - 1 = d^4/4
        assert!((r.max_residual.unwrap() - 0.5f64.powi(4) / 4.0).abs() < 1e-12);
        let c = compare_trajectories(&sol, &exact("sin(x)"), (FRAC_PI_2 - 0.5, FRAC_PI_2 + 0.5), 101, None).unwrap();
        assert!(c.max_abs_error <= 0.003);
    }

    #[test]
    fn identical_inputs_and_degenerate_interval() {
        let e = exact("x^2");
        let r = compare_trajectories(&e, &e, (0.0, 1.0), 11, None).unwrap();
        assert_eq!(r.max_abs_error, 0.0);
        let r = compare_trajectories(&e, &e, (0.5, 0.5), 11, None).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.mean_abs_error, 0.0);
    }

    #[test]
    fn trajectory_interpolation_and_mismatch() {
        let t = integrate_explicit(&parse("2*p").unwrap(), 0.0, 1.0, 1e-2, 1.0).unwrap();
        let r = compare_trajectories(&t, &exact("exp(2*x)"), (0.0, 1.0), 333, None).unwrap();
        assert!(r.max_abs_error < 1e-6, "{}", r.max_abs_error);
        let err = compare_trajectories(&t, &exact("exp(2*x)"), (0.0, 2.0), 10, None).unwrap_err();
        assert!(matches!(err, NumericError::IntervalMismatch { .. }));
    }

    #[test]
    fn domain_failures_are_excluded() {
        let r = residual_profile(&parse("q").unwrap(), &exact("log(x)"), (-1.0, 1.0), 5).unwrap();
        assert_eq!(r.excluded, vec![-1.0, -0.5, 0.0]);
        assert_eq!(r.rows.len(), 2);
    }
}
