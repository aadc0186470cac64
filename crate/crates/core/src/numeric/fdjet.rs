use std::collections::BTreeMap;

use serde::Serialize;

use crate::expr::{Env, Expr, Var};
use crate::jet::{BasePoint, JetError, SolveFor, MAX_TOTAL_ORDER};

use super::NumericError;

/// Finite-difference estimate of an implicit jet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdJet {
    pub base: BasePoint,
    pub orders: (usize, usize),
    pub h: f64,
    table: Vec<f64>,
}

impl FdJet {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        (i <= self.orders.0 && j <= self.orders.1).then(|| self.table[i * (self.orders.1 + 1) + j])
    }
}

/// Central-difference weights for the k-th derivative, as `(offset, weight)` for unit spacing.
fn weights(k: usize) -> &'static [(i32, f64)] {
    match k {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("orders above 4 are rejected"),
    }
}

struct Continuation<'a> {
    f: &'a Expr,
    dfdw: Expr,
    base: &'a BasePoint,
    slopes: (f64, f64),
}

impl Continuation<'_> {
    fn env(&self, x: f64, s: f64, w: f64) -> Env {
        match self.base.mode {
            SolveFor::Q => Env::xpq(x, s, w),
            SolveFor::P => Env::xpq(x, w, s),
        }
    }

    fn residual(&self, x: f64, s: f64, w: f64) -> Option<f64> {
        self.f.evaluate(&self.env(x, s, w)).ok().filter(|v| v.is_finite())
    }

    /// Root in `w` of `F` at `(x, s)`: Newton from the linear prediction, bisection as fallback.
    fn solve(&self, dx: f64, ds: f64) -> Result<f64, NumericError> {
        let (x, s) = (self.base.x0 + dx, self.base.free_value() + ds);
        let w0 = self.base.solved_value();
        let guess = w0 + self.slopes.0 * dx + self.slopes.1 * ds;
        let radius = 10.0 * (dx.abs() + ds.abs()) * (1.0 + self.slopes.0.abs() + self.slopes.1.abs()) + 1e-12;
        let mut w = guess;
        for _ in 0..50 {
            let (Some(g), Ok(dg)) = (self.residual(x, s, w), self.dfdw.evaluate(&self.env(x, s, w))) else {
                break;
            };
            if g == 0.0 {
                return Ok(w);
            }
            if dg == 0.0 || !dg.is_finite() {
                break;
            }
            let next = w - g / dg;
            if (next - guess).abs() > radius {
                break;
            }
            if (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
                return Ok(next);
            }
            w = next;
        }
        self.bisect(x, s, guess - radius, guess + radius).ok_or(NumericError::RootLost { x, s })
    }

    fn bisect(&self, x: f64, s: f64, lo: f64, hi: f64) -> Option<f64> {
        let n = 64;
        let mut prev = (lo, self.residual(x, s, lo));
        for k in 1..=n {
            let w = lo + (hi - lo) * k as f64 / n as f64;
            let g = self.residual(x, s, w);
            if let (Some(ga), Some(gb)) = (prev.1, g) {
                if ga == 0.0 {
                    return Some(prev.0);
                }
                if ga.signum() != gb.signum() {
                    let (mut a, mut b, mut fa) = (prev.0, w, ga);
                    for _ in 0..200 {
                        let m = 0.5 * (a + b);
                        if m == a || m == b {
                            break;
                        }
                        let fm = self.residual(x, s, m)?;
                        if fm.signum() == fa.signum() {
                            (a, fa) = (m, fm);
                        } else {
                            b = m;
                        }
                    }
                    return Some(0.5 * (a + b));
                }
            }
            prev = (w, g);
        }
        None
    }
}

/// Jet of the implicit function by continuation on a stencil around the base
/// and tensor-product central differences (second-order accurate).
pub fn finite_difference_jet(f: &Expr, base: &BasePoint, orders: (usize, usize), h: f64) -> Result<FdJet, NumericError> {
    if !(h > 0.0 && h <= 1e-2) {
        return Err(NumericError::InvalidStep(h));
    }
    let (m, n) = orders;
    if m + n > MAX_TOTAL_ORDER {
        return Err(NumericError::InvalidParameter(JetError::OrderUnsupported(m, n).to_string()));
    }
    let f = f.with_independent_x();
    let w = base.mode.solved_var();
    let env = base.env();
    let fw = f.differentiate(w).evaluate(&env)?;
    let fx = f.differentiate(Var::X).evaluate(&env)?;
    let fs = f.differentiate(base.mode.free_var()).evaluate(&env)?;
    let cont = Continuation { f: &f, dfdw: f.differentiate(w), base, slopes: (-fx / fw, -fs / fw) };

    let mut cache: BTreeMap<(i32, i32), f64> = BTreeMap::new();
    let cols = n + 1;
    let mut table = vec![0.0; (m + 1) * cols];
    for i in 0..=m {
        for j in 0..=n {
            if i + j == 0 {
                table[0] = base.solved_value();
                continue;
            }
            let mut acc = 0.0;
            for &(a, wa) in weights(i) {
                for &(b, wb) in weights(j) {
                    let value = match cache.get(&(a, b)) {
                        Some(v) => *v,
                        None => {
                            let v = cont.solve(a as f64 * h, b as f64 * h)?;
                            cache.insert((a, b), v);
                            v
                        }
                    };
                    acc += wa * wb * value;
                }
            }
            table[i * cols + j] = acc / h.powi((i + j) as i32);
        }
    }
    Ok(FdJet { base: *base, orders, h, table })
}
