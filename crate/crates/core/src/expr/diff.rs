use std::sync::Arc;

use num_rational::Rational64;

use super::{simplify::simplify, Expr, Func, Var};

/// Exact symbolic partial derivative, simplified.
pub(super) fn differentiate(e: &Expr, var: Var) -> Expr {
    simplify(&raw(e, var))
}

fn raw(e: &Expr, var: Var) -> Expr {
    if !e.contains(var) {
        return Expr::zero();
    }
    let d = |a: &Arc<Expr>| raw(a, var);
    let own = |a: &Arc<Expr>| Expr::clone(a);
    match e {
        Expr::Var(v) => {
            if *v == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Num(_) | Expr::Real(_) | Expr::Pi => Expr::zero(),
        Expr::Neg(a) => -d(a),
        Expr::Add(a, b) => d(a) + d(b),
        Expr::Sub(a, b) => d(a) - d(b),
        Expr::Mul(a, b) => d(a) * own(b) + own(a) * d(b),
        Expr::Div(a, b) => (d(a) * own(b) - own(a) * d(b)) / own(b).powi(2),
        Expr::Pow(a, r) => Expr::Num(*r) * own(a).pow(*r - Rational64::from_integer(1)) * d(a),
        Expr::Func(f, a) => {
            let inner = d(a);
            let outer = match f {
                Func::Sin => own(a).cos(),
                Func::Cos => -own(a).sin(),
                Func::Exp => own(a).exp(),
                Func::Log => return inner / own(a),
                Func::Sqrt => return inner / (Expr::int(2) * own(a).sqrt()),
            };
            outer * inner
        }
    }
}
