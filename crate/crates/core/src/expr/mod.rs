//! Expression trees over the ODE alphabet.
//!
//! An [`Expr`] is an immutable tree whose leaves are exact rationals, inexact
//! reals, the constant `pi`, or variables. Children are reference counted so
//! derivative construction can share subtrees freely.

mod diff;
mod eval;
mod parse;
mod print;
mod simplify;
mod taylor;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use serde::Serialize;
use thiserror::Error;

pub use eval::Env;
pub use parse::parse;
pub use simplify::simplify;
pub use taylor::{taylor_coefficients, TruncatedPoly};
pub(crate) use taylor::factorial;

/// Variables understood by the expression engine.
///
/// `X`/`T` are the independent variable, `P` stands for `y` and `Q` for `y'`.
/// `Y(k)` is the unknown k-th derivative used by the series expansion and
/// `Jet(i, j)` is an unknown mixed partial of an implicit function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Var {
    X,
    T,
    P,
    Q,
    Y(u8),
    Jet(u8, u8),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X => f.write_str("x"),
            Var::T => f.write_str("t"),
            Var::P => f.write_str("p"),
            Var::Q => f.write_str("q"),
            Var::Y(k) => write!(f, "y{k}"),
            Var::Jet(i, j) => write!(f, "d{i}_{j}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Exact rational literal.
    Num(Rational64),
    /// Inexact literal; produced for long decimals and numeric coefficients.
    Real(f64),
    Pi,
    Var(Var),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    /// Power with an exact rational exponent, kept in lowest terms.
    Pow(Arc<Expr>, Rational64),
    Func(Func, Arc<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("malformed exponent at byte {offset}: {message}")]
    MalformedExponent { offset: usize, message: String },
    #[error("unbound variable `{0}`")]
    Unbound(Var),
    #[error("domain error: {0}")]
    Domain(String),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Num(Rational64::from_integer(n))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::Num(Rational64::new(n, d))
    }

    pub fn real(v: f64) -> Expr {
        Expr::Real(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn pow(self, exponent: Rational64) -> Expr {
        Expr::Pow(Arc::new(self), exponent)
    }

    pub fn powi(self, exponent: i64) -> Expr {
        self.pow(Rational64::from_integer(exponent))
    }

    pub fn apply(self, func: Func) -> Expr {
        Expr::Func(func, Arc::new(self))
    }

    pub fn sin(self) -> Expr {
        self.apply(Func::Sin)
    }

    pub fn cos(self) -> Expr {
        self.apply(Func::Cos)
    }

    pub fn exp(self) -> Expr {
        self.apply(Func::Exp)
    }

    pub fn log(self) -> Expr {
        self.apply(Func::Log)
    }

    pub fn sqrt(self) -> Expr {
        self.apply(Func::Sqrt)
    }

    /// Literal for a numeric coefficient, using an exact rational or a
    /// rational multiple of pi when `v` is exactly representable that way.
    pub fn from_f64(v: f64) -> Expr {
        if let Some(r) = small_rational(v, 1_000_000) {
            return Expr::Num(r);
        }
        if v != 0.0 && v.is_finite() {
            if let Some(r) = small_rational(v / std::f64::consts::PI, 24) {
                let (n, d) = (*r.numer(), *r.denom());
                // n*pi/d, matching how `n*pi/d` evaluates after parsing
                let value = n as f64 * std::f64::consts::PI / d as f64;
                if value == v {
                    let scaled = if n == 1 {
                        Expr::Pi
                    } else if n == -1 {
                        -Expr::Pi
                    } else {
                        Expr::int(n) * Expr::Pi
                    };
                    return if d == 1 { scaled } else { scaled / Expr::int(d) };
                }
            }
        }
        Expr::Real(v)
    }

    /// Numeric value if the node is a literal.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Expr::Num(r) => Some(rational_to_f64(*r)),
            Expr::Real(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(r) if *r.numer() == 0) || matches!(self, Expr::Real(v) if *v == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(r) if *r.numer() == 1 && *r.denom() == 1)
            || matches!(self, Expr::Real(v) if *v == 1.0)
    }

    pub fn contains(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) | Expr::Real(_) | Expr::Pi => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => a.contains(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.contains(var) || b.contains(var)
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Num(_) | Expr::Real(_) | Expr::Pi => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replaces every occurrence of `var` by `with`. The result is not simplified.
    pub fn substitute(&self, var: Var, with: &Expr) -> Expr {
        if !self.contains(var) {
            return self.clone();
        }
        let sub = |a: &Arc<Expr>| Arc::new(a.substitute(var, with));
        match self {
            Expr::Var(v) if *v == var => with.clone(),
            Expr::Var(_) | Expr::Num(_) | Expr::Real(_) | Expr::Pi => self.clone(),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Pow(a, r) => Expr::Pow(sub(a), *r),
            Expr::Func(f, a) => Expr::Func(*f, sub(a)),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
        }
    }

    /// Rewrites `t` as `x` so downstream code only deals with one independent variable.
    pub fn with_independent_x(&self) -> Expr {
        self.substitute(Var::T, &Expr::Var(Var::X))
    }

    pub fn evaluate(&self, env: &Env) -> Result<f64, ExprError> {
        eval::evaluate(self, env)
    }

    pub fn differentiate(&self, var: Var) -> Expr {
        diff::differentiate(self, var)
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Num(_) | Expr::Real(_) | Expr::Pi => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => 1 + a.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }
}

pub(crate) fn rational_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact rational with denominator at most `max_denom` whose f64 value is `v`.
fn small_rational(v: f64, max_denom: i64) -> Option<Rational64> {
    if !v.is_finite() || v.abs() > 1e12 {
        return None;
    }
    for d in 1..=max_denom.min(64) {
        let n = (v * d as f64).round();
        if n.abs() < 9.0e15 && n / d as f64 == v {
            return Some(Rational64::new(n as i64, d));
        }
    }
    if max_denom > 64 {
        let approx = Rational64::approximate_float(v)?;
        if *approx.denom() <= max_denom && *approx.numer() < (1 << 53) && rational_to_f64(approx) == v {
            return Some(approx);
        }
    }
    None
}

impl From<f64> for Expr {
    fn from(v: f64) -> Expr {
        Expr::from_f64(v)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Expr {
        Expr::Var(v)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Arc::new(self), Arc::new(rhs))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Arc::new(self))
    }
}
