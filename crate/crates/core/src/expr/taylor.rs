use serde::Serialize;

use super::{Env, Expr, ExprError, Var};

/// Truncated bivariate Taylor polynomial
/// `sum c[i][j] (v1 - a1)^i (v2 - a2)^j` with `i <= m`, `j <= n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedPoly {
    pub vars: [Var; 2],
    pub centers: [f64; 2],
    pub orders: (usize, usize),
    coeffs: Vec<f64>,
}

impl TruncatedPoly {
    pub fn zeros(vars: [Var; 2], centers: [f64; 2], orders: (usize, usize)) -> TruncatedPoly {
        TruncatedPoly { vars, centers, orders, coeffs: vec![0.0; (orders.0 + 1) * (orders.1 + 1)] }
    }

    fn index(&self, i: usize, j: usize) -> Option<usize> {
        (i <= self.orders.0 && j <= self.orders.1).then(|| i * (self.orders.1 + 1) + j)
    }

    /// Coefficient of `(v1 - a1)^i (v2 - a2)^j`; zero outside the declared orders.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.index(i, j).map_or(0.0, |k| self.coeffs[k])
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j).expect("exponent outside truncation orders");
        self.coeffs[k] = value;
    }

    pub fn evaluate(&self, v1: f64, v2: f64) -> f64 {
        let (d1, d2) = (v1 - self.centers[0], v2 - self.centers[1]);
        let mut total = 0.0;
        for i in (0..=self.orders.0).rev() {
            let mut row = 0.0;
            for j in (0..=self.orders.1).rev() {
                row = row * d2 + self.coeff(i, j);
            }
            total = total * d1 + row;
        }
        total
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Taylor coefficients of `e` in `vars` about the point bound in `centers`,
/// by repeated symbolic differentiation followed by evaluation.
///
/// `centers` must bind every free variable of `e`; variables other than
/// `vars` are held fixed at their bound values.
pub fn taylor_coefficients(
    e: &Expr,
    centers: &Env,
    vars: [Var; 2],
    orders: (usize, usize),
) -> Result<TruncatedPoly, ExprError> {
    let center_of = |v: Var, order: usize| match centers.get(v) {
        Some(c) => Ok(c),
        None if order == 0 => Ok(0.0),
        None => Err(ExprError::Unbound(v)),
    };
    let mut poly = TruncatedPoly::zeros(vars, [center_of(vars[0], orders.0)?, center_of(vars[1], orders.1)?], orders);
    let mut di = e.clone();
    for i in 0..=orders.0 {
        let mut dij = di.clone();
        for j in 0..=orders.1 {
            let value = dij.evaluate(centers)?;
            poly.set(i, j, value / (factorial(i) * factorial(j)));
            if j < orders.1 {
                dij = dij.differentiate(vars[1]);
            }
        }
        if i < orders.0 {
            di = di.differentiate(vars[0]);
        }
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn sine_about_half_pi() {
        let e = parse("sin(x)").unwrap();
        let t = taylor_coefficients(&e, &Env::new().with(Var::X, FRAC_PI_2), [Var::X, Var::P], (2, 0)).unwrap();
        assert!((t.coeff(0, 0) - 1.0).abs() < 1e-15);
        assert!(t.coeff(1, 0).abs() < 1e-15);
        assert!((t.coeff(2, 0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn linear_reproduced_exactly() {
        let e = parse("2*p").unwrap();
        let t = taylor_coefficients(&e, &Env::new().with(Var::P, 1.0), [Var::X, Var::P], (0, 1)).unwrap();
        assert_eq!(t.coeff(0, 0), 2.0);
        assert_eq!(t.coeff(0, 1), 2.0);
        assert_eq!(t.evaluate(0.0, 3.5), 7.0);
    }

    /// Central finite differences of the evaluated expression, h = 1e-4.
    fn fd_oracle(e: &Expr, x: f64, p: f64) -> (f64, f64) {
        let h = 1e-4;
        let f = |x: f64, p: f64| e.evaluate(&Env::new().with(Var::X, x).with(Var::P, p)).unwrap();
        let dxx = (f(x + h, p) - 2.0 * f(x, p) + f(x - h, p)) / (h * h);
        let dp = (f(x, p + h) - f(x, p - h)) / (2.0 * h);
        (dxx / 2.0, dp)
    }

    #[test]
    fn sine_power_mixed_orders() {
        let e = parse("-3*sin(x)*p^(4/3)").unwrap();
        let centers = Env::new().with(Var::X, PI / 3.0).with(Var::P, 1.0);
        let t = taylor_coefficients(&e, &centers, [Var::X, Var::P], (2, 1)).unwrap();
        let (c20, c01) = fd_oracle(&e, PI / 3.0, 1.0);
        // frozen from the oracle: 3*sqrt(3)/4 and -2*sqrt(3)
        assert!((c20 - 1.299038105676658).abs() < 1e-6);
        assert!((c01 + 3.4641016151377544).abs() < 1e-6);
        assert!((t.coeff(2, 0) - 1.299038105676658).abs() < 1e-6);
        assert!((t.coeff(0, 1) + 3.4641016151377544).abs() < 1e-6);
        assert!((t.coeff(2, 0) - 3f64.sqrt() * 3.0 / 4.0).abs() < 1e-14);
    }

    #[test]
    fn domain_violation_propagates() {
        let e = parse("p^(1/3)").unwrap();
        let r = taylor_coefficients(&e, &Env::new().with(Var::P, 0.0), [Var::P, Var::X], (2, 0));
        assert!(matches!(r, Err(ExprError::Domain(_))));
    }
}
