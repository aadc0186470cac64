use super::{rational_to_f64, Expr, ExprError, Func, Var};

/// Variable bindings for evaluation. Small and linear-scanned; a tree rarely
/// has more than a handful of free variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Env {
    slots: Vec<(Var, f64)>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn xpq(x: f64, p: f64, q: f64) -> Env {
        Env::new().with(Var::X, x).with(Var::P, p).with(Var::Q, q)
    }

    pub fn with(mut self, var: Var, value: f64) -> Env {
        self.set(var, value);
        self
    }

    pub fn set(&mut self, var: Var, value: f64) {
        match self.slots.iter_mut().find(|(v, _)| *v == var) {
            Some(slot) => slot.1 = value,
            None => self.slots.push((var, value)),
        }
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        self.slots.iter().find(|(v, _)| *v == var).map(|(_, x)| *x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, f64)> + '_ {
        self.slots.iter().copied()
    }
}

impl FromIterator<(Var, f64)> for Env {
    fn from_iter<I: IntoIterator<Item = (Var, f64)>>(iter: I) -> Env {
        let mut env = Env::new();
        for (v, x) in iter {
            env.set(v, x);
        }
        env
    }
}

pub(super) fn evaluate(e: &Expr, env: &Env) -> Result<f64, ExprError> {
    Ok(match e {
        Expr::Num(r) => rational_to_f64(*r),
        Expr::Real(v) => *v,
        Expr::Pi => std::f64::consts::PI,
        Expr::Var(v) => env.get(*v).ok_or(ExprError::Unbound(*v))?,
        Expr::Neg(a) => -evaluate(a, env)?,
        Expr::Add(a, b) => evaluate(a, env)? + evaluate(b, env)?,
        Expr::Sub(a, b) => evaluate(a, env)? - evaluate(b, env)?,
        Expr::Mul(a, b) => evaluate(a, env)? * evaluate(b, env)?,
        Expr::Div(a, b) => {
            let num = evaluate(a, env)?;
            let den = evaluate(b, env)?;
            if den == 0.0 {
                return Err(ExprError::Domain(format!("division by zero in {e}")));
            }
            num / den
        }
        Expr::Pow(a, r) => {
            let base = evaluate(a, env)?;
            if *r.denom() == 1 {
                let n = *r.numer();
                if base == 0.0 && n < 0 {
                    return Err(ExprError::Domain(format!("zero raised to negative power in {e}")));
                }
                match i32::try_from(n) {
                    Ok(n) => base.powi(n),
                    Err(_) => base.powf(n as f64),
                }
            } else {
                if base <= 0.0 {
                    return Err(ExprError::Domain(format!(
                        "non-integer power of non-positive base {base} in {e}"
                    )));
                }
                base.powf(rational_to_f64(*r))
            }
        }
        Expr::Func(f, a) => {
            let x = evaluate(a, env)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(ExprError::Domain(format!("log of non-positive value {x}")));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(ExprError::Domain(format!("sqrt of negative value {x}")));
                    }
                    x.sqrt()
                }
            }
        }
    })
}
