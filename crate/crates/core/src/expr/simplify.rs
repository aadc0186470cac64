//! Conservative bottom-up simplification.
//!
//! Folds constants (exactly for rationals), removes additive and
//! multiplicative identities, collapses nested negations, cancels
//! syntactically equal operands and merges powers of a common base. No
//! factoring, no trigonometric identities.

use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Zero};

use super::{Expr, Func};

pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Real(_) | Expr::Pi | Expr::Var(_) => e.clone(),
        Expr::Neg(a) => neg(simplify(a)),
        Expr::Add(a, b) => add(simplify(a), simplify(b)),
        Expr::Sub(a, b) => sub(simplify(a), simplify(b)),
        Expr::Mul(a, b) => mul(simplify(a), simplify(b)),
        Expr::Div(a, b) => div(simplify(a), simplify(b)),
        Expr::Pow(a, r) => pow(simplify(a), *r),
        Expr::Func(f, a) => func(*f, simplify(a)),
    }
}

enum Lit {
    Exact(Rational64),
    Inexact,
}

fn lit(e: &Expr) -> Option<Lit> {
    match e {
        Expr::Num(r) => Some(Lit::Exact(*r)),
        Expr::Real(_) => Some(Lit::Inexact),
        _ => None,
    }
}

/// Folds two literals, exactly when both are rationals and no overflow occurs.
fn fold(
    a: &Expr,
    b: &Expr,
    exact: impl Fn(&Rational64, &Rational64) -> Option<Rational64>,
    inexact: impl Fn(f64, f64) -> f64,
) -> Option<Expr> {
    match (lit(a)?, lit(b)?) {
        (Lit::Exact(x), Lit::Exact(y)) => exact(&x, &y).map(Expr::Num),
        _ => Some(Expr::Real(inexact(a.as_f64()?, b.as_f64()?))),
    }
}

fn is_negative_literal(e: &Expr) -> bool {
    match e {
        Expr::Num(r) => *r.numer() < 0,
        Expr::Real(v) => *v < 0.0,
        _ => false,
    }
}

fn negate_literal(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Num(r) => Some(Expr::Num(-*r)),
        Expr::Real(v) => Some(Expr::Real(-*v)),
        _ => None,
    }
}

fn neg(a: Expr) -> Expr {
    if let Some(n) = negate_literal(&a) {
        return n;
    }
    match a {
        Expr::Neg(inner) => Expr::clone(&inner),
        Expr::Sub(x, y) => Expr::Sub(y, x),
        // keep a leading numeric factor as the carrier of the sign
        other => match leading_literal(&other) {
            Some((c, rest)) => mul(negate_literal(&c).unwrap(), rest),
            None => Expr::Neg(Arc::new(other)),
        },
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if let Some(v) = fold(&a, &b, |x, y| x.checked_add(y), |x, y| x + y) {
        return v;
    }
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    if let Expr::Neg(c) = &b {
        return sub(a, Expr::clone(c));
    }
    if is_negative_literal(&b) {
        return sub(a, negate_literal(&b).unwrap());
    }
    if let Expr::Neg(c) = &a {
        return sub(b, Expr::clone(c));
    }
    if let Some((c, rest)) = leading_literal(&b).filter(|(c, _)| is_negative_literal(c)) {
        return sub(a, mul(negate_literal(&c).unwrap(), rest));
    }
    if a == b {
        return mul(Expr::int(2), a);
    }
    Expr::Add(Arc::new(a), Arc::new(b))
}

fn sub(a: Expr, b: Expr) -> Expr {
    if let Some(v) = fold(&a, &b, |x, y| x.checked_sub(y), |x, y| x - y) {
        return v;
    }
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    if a == b {
        return Expr::zero();
    }
    if let Expr::Neg(c) = &b {
        return add(a, Expr::clone(c));
    }
    if is_negative_literal(&b) {
        return add(a, negate_literal(&b).unwrap());
    }
    if let Some((c, rest)) = leading_literal(&b).filter(|(c, _)| is_negative_literal(c)) {
        return add(a, mul(negate_literal(&c).unwrap(), rest));
    }
    Expr::Sub(Arc::new(a), Arc::new(b))
}

/// Leftmost literal factor of a left-nested product, with the remaining product.
fn leading_literal(e: &Expr) -> Option<(Expr, Expr)> {
    match e {
        Expr::Mul(x, y) if lit(x).is_some() => Some((Expr::clone(x), Expr::clone(y))),
        Expr::Mul(x, y) => leading_literal(x).map(|(c, r)| (c, Expr::Mul(Arc::new(r), y.clone()))),
        _ => None,
    }
}

/// Inserts the literal `c` as the leftmost factor of `e`.
fn prepend(c: Expr, e: Expr) -> Expr {
    match e {
        Expr::Mul(x, y) => Expr::Mul(Arc::new(prepend(c, Expr::clone(&x))), y),
        other => Expr::Mul(Arc::new(c), Arc::new(other)),
    }
}

/// Splits `e` into `(base, exponent)` for power merging.
fn as_power(e: &Expr) -> (&Expr, Rational64) {
    match e {
        Expr::Pow(b, r) => (b, *r),
        other => (other, Rational64::from_integer(1)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if let Some(v) = fold(&a, &b, |x, y| x.checked_mul(y), |x, y| x * y) {
        return v;
    }
    if a.is_zero() || b.is_zero() {
        return Expr::zero();
    }
    if a.is_one() {
        return b;
    }
    if b.is_one() {
        return a;
    }
    if lit(&b).is_some() {
        return mul(b, a);
    }
    if let Some(Lit::Exact(r)) = lit(&a) {
        if r == Rational64::from_integer(-1) {
            return neg(b);
        }
    }
    if let Expr::Neg(x) = &a {
        return neg(mul(Expr::clone(x), b));
    }
    if let Expr::Neg(y) = &b {
        return neg(mul(a, Expr::clone(y)));
    }
    // products keep their numeric coefficient as the leftmost factor
    if lit(&a).is_some() {
        if let Some((c, rest)) = leading_literal(&b) {
            return mul(mul(a, c), rest);
        }
        return prepend(a, b);
    }
    if let Some((c, rest)) = leading_literal(&b) {
        return mul(c, mul(a, rest));
    }
    let (base_a, ra) = as_power(&a);
    let (base_b, rb) = as_power(&b);
    if base_a == base_b && lit(base_a).is_none() {
        if let Some(r) = ra.checked_add(&rb) {
            return pow(base_a.clone(), r);
        }
    }
    Expr::Mul(Arc::new(a), Arc::new(b))
}

fn div(a: Expr, b: Expr) -> Expr {
    if !b.is_zero() {
        if let Some(v) = fold(&a, &b, |x, y| Some(*x / *y), |x, y| x / y) {
            return v;
        }
    }
    if b.is_one() {
        return a;
    }
    if a.is_zero() && !b.is_zero() {
        return Expr::zero();
    }
    if a == b && !b.is_zero() {
        return Expr::one();
    }
    if let Expr::Neg(x) = &a {
        return neg(div(Expr::clone(x), b));
    }
    if let Expr::Neg(y) = &b {
        return neg(div(a, Expr::clone(y)));
    }
    if let Expr::Num(r) = &b {
        if !r.is_zero() {
            return mul(Expr::Num(r.recip()), a);
        }
    }
    Expr::Div(Arc::new(a), Arc::new(b))
}

fn checked_rational_powi(r: Rational64, n: i64) -> Option<Rational64> {
    if n < 0 {
        if r.is_zero() {
            return None;
        }
        return checked_rational_powi(r.recip(), -n);
    }
    let mut acc = Rational64::from_integer(1);
    for _ in 0..n.min(64) {
        acc = acc.checked_mul(&r)?;
    }
    if n > 64 {
        return None;
    }
    Some(acc)
}

fn pow(a: Expr, r: Rational64) -> Expr {
    if r.is_zero() {
        return Expr::one();
    }
    if r == Rational64::from_integer(1) {
        return a;
    }
    if a.is_one() {
        return Expr::one();
    }
    if a.is_zero() && r > Rational64::zero() {
        return Expr::zero();
    }
    if *r.denom() == 1 {
        let n = *r.numer();
        match &a {
            Expr::Num(base) => {
                if let Some(v) = checked_rational_powi(*base, n) {
                    return Expr::Num(v);
                }
            }
            Expr::Real(v) if *v != 0.0 || n > 0 => {
                if let Ok(n) = i32::try_from(n) {
                    return Expr::Real(v.powi(n));
                }
            }
            // (e^s)^n = e^(s*n) holds wherever e^s is defined
            Expr::Pow(inner, s) => {
                if let Some(rs) = s.checked_mul(&r) {
                    return pow(Expr::clone(inner), rs);
                }
            }
            Expr::Neg(inner) if n % 2 == 0 => return pow(Expr::clone(inner), r),
            _ => {}
        }
    }
    Expr::Pow(Arc::new(a), r)
}

fn func(f: Func, a: Expr) -> Expr {
    if let Expr::Real(x) = a {
        // same operation evaluation would perform; domain errors stay symbolic
        let v = match f {
            Func::Sin => Some(x.sin()),
            Func::Cos => Some(x.cos()),
            Func::Exp => Some(x.exp()),
            Func::Log => (x > 0.0).then(|| x.ln()),
            Func::Sqrt => (x >= 0.0).then(|| x.sqrt()),
        };
        if let Some(v) = v {
            return Expr::Real(v);
        }
    }
    match (f, &a) {
        (Func::Sin, e) | (Func::Sqrt, e) if e.is_zero() => Expr::zero(),
        (Func::Cos, e) | (Func::Exp, e) if e.is_zero() => Expr::one(),
        (Func::Log, e) | (Func::Sqrt, e) if e.is_one() => {
            if f == Func::Log {
                Expr::zero()
            } else {
                Expr::one()
            }
        }
        (Func::Log, Expr::Func(Func::Exp, inner)) => Expr::clone(inner),
        _ => Expr::Func(f, Arc::new(a)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Env, Var};

    fn s(text: &str) -> String {
        simplify(&parse(text).unwrap()).to_text()
    }

    #[test]
    fn identities() {
        assert_eq!(s("1*q"), "q");
        assert_eq!(s("2*3 + x"), "6 + x");
        assert_eq!(s("q - q"), "0");
        assert_eq!(s("x + 0"), "x");
        assert_eq!(s("0*sin(x) + p"), "p");
        assert_eq!(s("x^1 + p^0"), "x + 1");
        assert_eq!(s("--x"), "x");
        assert_eq!(s("x/1"), "x");
    }

    #[test]
    fn exact_rationals() {
        assert_eq!(s("1/3 + 1/6"), "1/2");
        assert_eq!(s("(2/3)^2"), "4/9");
        assert_eq!(s("x/3"), "1/3*x");
        assert_eq!(s("4/3*(1/3)"), "4/9");
    }

    #[test]
    fn powers_and_signs() {
        assert_eq!(s("p^(1/3)*p^(1/3)"), "p^(2/3)");
        assert_eq!(s("(x^2)^3"), "x^6");
        assert_eq!(s("x*x"), "x^2");
        assert_eq!(s("-(2*x)"), "-2*x");
        assert_eq!(s("x + -3"), "x - 3");
        assert_eq!(s("x - (-p)"), "x + p");
        assert_eq!(s("1 + (-1/2)*q^2"), "1 - 1/2*q^2");
        assert_eq!(s("x - (-2)*p"), "x + 2*p");
    }

    #[test]
    fn real_literals_fold_like_evaluation() {
        let e = Expr::Real(0.3).sin() * Expr::Var(Var::X);
        let simple = simplify(&e);
        let env = Env::new().with(Var::X, 1.7);
        assert_eq!(e.evaluate(&env).unwrap(), simple.evaluate(&env).unwrap());
        assert!(matches!(simple, Expr::Mul(a, _) if matches!(*a, Expr::Real(_))));
    }

    #[test]
    fn domain_errors_are_not_folded_away() {
        let e = simplify(&Expr::Real(-1.0).log());
        assert!(e.evaluate(&Env::new()).is_err());
        assert_eq!(s("1/0"), "1/0");
    }
}
