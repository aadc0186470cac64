//! Text rendering in the same grammar the parser accepts.

use std::fmt;

use num_rational::Rational64;

use super::Expr;

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Num(r) => {
            if *r.numer() < 0 {
                NEG
            } else if *r.denom() != 1 {
                MUL
            } else {
                ATOM
            }
        }
        Expr::Real(v) => {
            if v.is_sign_negative() {
                NEG
            } else {
                ATOM
            }
        }
        Expr::Pi | Expr::Var(_) | Expr::Func(..) => ATOM,
        Expr::Add(..) | Expr::Sub(..) => ADD,
        Expr::Mul(..) | Expr::Div(..) => MUL,
        Expr::Neg(_) => NEG,
        Expr::Pow(..) => POW,
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &Rational64) -> fmt::Result {
    if *r.denom() == 1 {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => write_rational(f, r),
            Expr::Real(v) => {
                if *v == 0.0 {
                    // drop the sign of -0.0 so the text stays parseable as a literal
                    f.write_str("0")
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Pi => f.write_str("pi"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                child(f, a, POW)
            }
            Expr::Add(a, b) => {
                child(f, a, ADD)?;
                f.write_str(" + ")?;
                child(f, b, MUL)
            }
            Expr::Sub(a, b) => {
                child(f, a, ADD)?;
                f.write_str(" - ")?;
                child(f, b, MUL)
            }
            Expr::Mul(a, b) => {
                child(f, a, MUL)?;
                f.write_str("*")?;
                child(f, b, POW)
            }
            Expr::Div(a, b) => {
                child(f, a, MUL)?;
                f.write_str("/")?;
                child(f, b, POW)
            }
            Expr::Pow(a, r) => {
                child(f, a, ATOM)?;
                if *r.denom() == 1 && *r.numer() >= 0 {
                    write!(f, "^{}", r.numer())
                } else {
                    f.write_str("^(")?;
                    write_rational(f, r)?;
                    f.write_str(")")
                }
            }
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
