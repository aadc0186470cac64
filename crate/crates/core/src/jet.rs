//! Base-point validation and jets of the implicit function defined by
//! `F(x, p, q) = 0`.
//!
//! In [`SolveFor::Q`] mode the equation is solved for the derivative,
//! `q = phi(x, p)`; in [`SolveFor::P`] mode for the function value,
//! `p = psi(x, q)`. A jet entry `D(i, j)` is the mixed partial
//! `d^i/dx^i d^j/ds^j` of the implicit function at the base point, where `s`
//! is the free (non-solved) variable.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{Env, Expr, ExprError, Var};

/// Largest supported total order `m + n` of a jet.
pub const MAX_TOTAL_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveFor {
    /// `q = phi(x, p)`, requires a nonzero `dF/dq` at the base.
    Q,
    /// `p = psi(x, q)`, requires a nonzero `dF/dp` at the base.
    P,
}

impl SolveFor {
    pub fn solved_var(self) -> Var {
        match self {
            SolveFor::Q => Var::Q,
            SolveFor::P => Var::P,
        }
    }

    pub fn free_var(self) -> Var {
        match self {
            SolveFor::Q => Var::P,
            SolveFor::P => Var::Q,
        }
    }

    pub fn other(self) -> SolveFor {
        match self {
            SolveFor::Q => SolveFor::P,
            SolveFor::P => SolveFor::Q,
        }
    }
}

impl std::str::FromStr for SolveFor {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "q" | "Q" => Ok(SolveFor::Q),
            "p" | "P" => Ok(SolveFor::P),
            _ => Err(format!("expected `q` or `p`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Allowed `|F(T0)|`, scaled by `1 + max(|x0|, |p0|, |q0|)`.
    pub residual: f64,
    /// Minimum `|dF/d(solved var)|` at the base.
    pub degenerate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: 1e-9, degenerate: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("base point is not on F = 0: |F(T0)| = {residual:e} exceeds {allowed:e}")]
    ResidualTooLarge { residual: f64, allowed: f64 },
    #[error("implicit function hypothesis fails: |dF/d{var}(T0)| = {value:e} <= {tolerance:e}")]
    Degenerate { var: Var, value: f64, tolerance: f64 },
    #[error("no root of F in [{lo}, {hi}] (min |F| = {min_abs:e})")]
    NoRootFound { lo: f64, hi: f64, min_abs: f64 },
    #[error("jet order ({0}, {1}) exceeds supported total order {MAX_TOTAL_ORDER}")]
    OrderUnsupported(usize, usize),
    #[error("expected exactly one unknown coordinate")]
    BadUnknowns,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A validated base point `T0 = (x0, p0, q0)` with its solve-for mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasePoint {
    pub x0: f64,
    pub p0: f64,
    pub q0: f64,
    pub mode: SolveFor,
    /// `F(T0)` as evaluated.
    pub residual: f64,
    /// `dF/d(solved var)` at `T0`; never within tolerance of zero.
    pub pivot: f64,
}

impl BasePoint {
    pub fn env(&self) -> Env {
        Env::xpq(self.x0, self.p0, self.q0)
    }

    /// Value of the solved coordinate at the base.
    pub fn solved_value(&self) -> f64 {
        match self.mode {
            SolveFor::Q => self.q0,
            SolveFor::P => self.p0,
        }
    }

    pub fn free_value(&self) -> f64 {
        match self.mode {
            SolveFor::Q => self.p0,
            SolveFor::P => self.q0,
        }
    }
}

/// Checks `F(T0) = 0` and the nonvanishing partial required by `mode`.
pub fn check_base_point(f: &Expr, point: [f64; 3], mode: SolveFor, tol: &Tolerances) -> Result<BasePoint, JetError> {
    let f = f.with_independent_x();
    let [x0, p0, q0] = point;
    let env = Env::xpq(x0, p0, q0);
    let residual = f.evaluate(&env)?;
    let allowed = tol.residual * (1.0 + x0.abs().max(p0.abs()).max(q0.abs()));
    if !(residual.abs() <= allowed) {
        return Err(JetError::ResidualTooLarge { residual: residual.abs(), allowed });
    }
    let var = mode.solved_var();
    let pivot = f.differentiate(var).evaluate(&env)?;
    if !(pivot.abs() > tol.degenerate) {
        return Err(JetError::Degenerate { var, value: pivot.abs(), tolerance: tol.degenerate });
    }
    Ok(BasePoint { x0, p0, q0, mode, residual, pivot })
}

/// A point with exactly one unknown coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PartialPoint {
    pub x: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

/// Finds the missing coordinate of `known` so that `F = 0`, searching `bracket`.
///
/// The first sign change on a uniform scan is refined by bisection. Without
/// a sign change (touching roots such as `-q^2 = 0`) the minimiser of `|F|`
/// is accepted when `|F|` there is within `residual_tol`.
pub fn solve_missing_coordinate(
    f: &Expr,
    known: PartialPoint,
    bracket: (f64, f64),
    residual_tol: f64,
) -> Result<f64, JetError> {
    let f = f.with_independent_x();
    let unknown = match (known.x, known.p, known.q) {
        (None, Some(_), Some(_)) => Var::X,
        (Some(_), None, Some(_)) => Var::P,
        (Some(_), Some(_), None) => Var::Q,
        _ => return Err(JetError::BadUnknowns),
    };
    let mut env = Env::new();
    for (v, val) in [(Var::X, known.x), (Var::P, known.p), (Var::Q, known.q)] {
        if let Some(val) = val {
            env.set(v, val);
        }
    }
    let g = |t: f64| -> Option<f64> {
        let e = env.clone().with(unknown, t);
        f.evaluate(&e).ok().filter(|v| v.is_finite())
    };
    let (lo, hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    const SCAN: usize = 400;
    let node = |k: usize| lo + (hi - lo) * k as f64 / SCAN as f64;

    let mut best: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=SCAN {
        let t = node(k);
        let Some(v) = g(t) else {
            prev = None;
            continue;
        };
        if v == 0.0 {
            return Ok(t);
        }
        if best.is_none_or(|(_, b)| v.abs() < b) {
            best = Some((t, v.abs()));
        }
        if let Some((tp, vp)) = prev {
            if vp.signum() != v.signum() {
                if let Some(root) = bisect(&g, tp, t, vp) {
                    return Ok(root);
                }
            }
        }
        prev = Some((t, v));
    }
    let Some((t_best, _)) = best else {
        return Err(JetError::NoRootFound { lo, hi, min_abs: f64::INFINITY });
    };
    let step = (hi - lo) / SCAN as f64;
    let (a, b) = ((t_best - step).max(lo), (t_best + step).min(hi));
    let t_min = golden_min(|t| g(t).map_or(f64::INFINITY, f64::abs), a, b);
    let min_abs = g(t_min).map_or(f64::INFINITY, f64::abs);
    if min_abs <= residual_tol {
        Ok(t_min)
    } else {
        Err(JetError::NoRootFound { lo, hi, min_abs })
    }
}

fn bisect(g: &impl Fn(f64) -> Option<f64>, mut a: f64, mut b: f64, mut ga: f64) -> Option<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(m)?;
        if gm == 0.0 {
            return Some(m);
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

pub(crate) fn golden_min(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if hc < hd {
            b = d;
            d = c;
            hd = hc;
            c = b - ratio * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + ratio * (b - a);
            hd = h(d);
        }
    }
    0.5 * (a + b)
}

/// Partial derivatives of the implicit function at the base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplicitJet {
    pub base: BasePoint,
    pub orders: (usize, usize),
    table: Vec<f64>,
}

impl ImplicitJet {
    /// `D(i, j)`; entries outside the computed orders are reported as `None`.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        (i <= self.orders.0 && j <= self.orders.1).then(|| self.table[i * (self.orders.1 + 1) + j])
    }

    /// `D(i, j)`, panicking outside the computed orders.
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.get(i, j).unwrap_or_else(|| panic!("D({i},{j}) outside jet orders {:?}", self.orders))
    }

    pub fn mode(&self) -> SolveFor {
        self.base.mode
    }

    /// All entries as `((i, j), D(i, j))`, in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        let cols = self.orders.1 + 1;
        self.table.iter().enumerate().map(move |(k, v)| ((k / cols, k % cols), *v))
    }

    /// Replaces `D(i, j)`; used to build published-value variants.
    pub fn with_entry(mut self, i: usize, j: usize, value: f64) -> ImplicitJet {
        let cols = self.orders.1 + 1;
        assert!(i <= self.orders.0 && j <= self.orders.1);
        self.table[i * cols + j] = value;
        self
    }
}

/// Total derivative of `h` along `x` (axis 0) or the free variable (axis 1),
/// where the solved variable is the implicit function and `Jet(a, b)` is its
/// `(a, b)` partial.
fn total_derivative(h: &Expr, mode: SolveFor, axis: usize) -> Expr {
    let direction = if axis == 0 { Var::X } else { mode.free_var() };
    let step = |a: u8, b: u8| if axis == 0 { Var::Jet(a + 1, b) } else { Var::Jet(a, b + 1) };
    let mut out = h.differentiate(direction);
    let first = if axis == 0 { Var::Jet(1, 0) } else { Var::Jet(0, 1) };
    out = out + h.differentiate(mode.solved_var()) * Expr::Var(first);
    for v in h.vars() {
        if let Var::Jet(a, b) = v {
            out = out + h.differentiate(v) * Expr::Var(step(a, b));
        }
    }
    out.simplify()
}

/// The identity `d^i/dx^i d^j/ds^j F(x, s, w(x, s)) = 0` as an expression in
/// `x, p, q` and the unknown partials `Jet(a, b)` of `w`.
pub fn differentiated_identity(f: &Expr, mode: SolveFor, i: usize, j: usize) -> Expr {
    let mut h = f.with_independent_x().simplify();
    for _ in 0..i {
        h = total_derivative(&h, mode, 0);
    }
    for _ in 0..j {
        h = total_derivative(&h, mode, 1);
    }
    h
}

/// Jet of the implicit function to orders `(m, n)` by recursive total
/// differentiation of `F(x, s, w(x, s)) = 0`. The highest partial enters
/// each differentiated identity linearly with coefficient `dF/dw(T0)`.
pub fn implicit_jet(f: &Expr, base: &BasePoint, orders: (usize, usize)) -> Result<ImplicitJet, JetError> {
    let (m, n) = orders;
    if m + n > MAX_TOTAL_ORDER {
        return Err(JetError::OrderUnsupported(m, n));
    }
    let f = f.with_independent_x().simplify();
    let cols = n + 1;
    let mut table = vec![0.0; (m + 1) * cols];
    table[0] = base.solved_value();

    // identities[i][j] = d^i_x d^j_s F along the implicit function
    let mut rows: Vec<Vec<Expr>> = Vec::with_capacity(m + 1);
    let mut x_chain = f.clone();
    for i in 0..=m {
        if i > 0 {
            x_chain = total_derivative(&x_chain, base.mode, 0);
        }
        let mut row = vec![x_chain.clone()];
        for j in 1..=n {
            let next = total_derivative(&row[j - 1], base.mode, 1);
            row.push(next);
        }
        rows.push(row);
    }

    let mut env = base.env();
    for total in 1..=(m + n) {
        for i in 0..=m.min(total) {
            let j = total - i;
            if j > n {
                continue;
            }
            env.set(Var::Jet(i as u8, j as u8), 0.0);
            let rest = rows[i][j].evaluate(&env)?;
            let value = -rest / base.pivot;
            env.set(Var::Jet(i as u8, j as u8), value);
            table[i * cols + j] = value;
        }
    }
    Ok(ImplicitJet { base: *base, orders, table })
}

/// One closed-form cross-check of a jet entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormEntry {
    pub label: String,
    pub order: (usize, usize),
    pub closed_form: f64,
    pub jet: f64,
    pub abs_delta: f64,
    pub rel_delta: f64,
    /// False for formulas reported for comparison only, which are not expected to agree.
    pub expected_to_agree: bool,
}

impl ClosedFormEntry {
    fn new(label: &str, order: (usize, usize), closed_form: f64, jet: f64, expected_to_agree: bool) -> Self {
        let abs_delta = (closed_form - jet).abs();
        let rel_delta = abs_delta / jet.abs().max(closed_form.abs()).max(f64::MIN_POSITIVE);
        ClosedFormEntry { label: label.into(), order, closed_form, jet, abs_delta, rel_delta, expected_to_agree }
    }

    pub fn agrees(&self, rel_tol: f64) -> bool {
        self.abs_delta <= rel_tol * (1.0 + self.jet.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormReport {
    pub base: BasePoint,
    pub entries: Vec<ClosedFormEntry>,
}

impl ClosedFormReport {
    /// Entries expected to agree that do not, at relative tolerance `tol`.
    pub fn failures(&self, tol: f64) -> Vec<&ClosedFormEntry> {
        self.entries.iter().filter(|e| e.expected_to_agree && !e.agrees(tol)).collect()
    }

    pub fn entry(&self, label_prefix: &str) -> Option<&ClosedFormEntry> {
        self.entries.iter().find(|e| e.label.starts_with(label_prefix))
    }
}

/// Evaluates the explicit first-, second- and third-order formulas for the
/// implicit function's partials and compares them with [`implicit_jet`].
///
/// Two third-order x formulas are reported: the chain-rule expansion of
/// `d^3/dx^3 F(x, s, w(x)) = 0` with `s` fixed (which must agree), and the
/// variant written with free-variable partials in place of solved-variable
/// partials (reported for comparison only).
pub fn jet_closed_form_check(f: &Expr, base: &BasePoint) -> Result<ClosedFormReport, JetError> {
    let f = f.with_independent_x().simplify();
    let (w, s) = (base.mode.solved_var(), base.mode.free_var());
    let env = base.env();
    let partial = |vars: &[Var]| -> Result<f64, JetError> {
        let mut e = f.clone();
        for v in vars {
            e = e.differentiate(*v);
        }
        Ok(e.evaluate(&env)?)
    };
    let x = Var::X;
    let fw = base.pivot;
    let (fx, fs) = (partial(&[x])?, partial(&[s])?);
    let (fww, fxw, fxx) = (partial(&[w, w])?, partial(&[x, w])?, partial(&[x, x])?);
    let (fss, fsw) = (partial(&[s, s])?, partial(&[s, w])?);
    let (fwww, fxww, fxxw, fxxx) = (partial(&[w, w, w])?, partial(&[x, w, w])?, partial(&[x, x, w])?, partial(&[x, x, x])?);
    let (fsss, fxs, fxss, fxxs) = (partial(&[s, s, s])?, partial(&[x, s])?, partial(&[x, s, s])?, partial(&[x, x, s])?);

    let along_x = implicit_jet(&f, base, (3, 0))?;
    let along_s = implicit_jet(&f, base, (0, 2))?;
    let (d10, d20, d30) = (along_x.d(1, 0), along_x.d(2, 0), along_x.d(3, 0));
    let (d01, d02) = (along_s.d(0, 1), along_s.d(0, 2));

    let first_x = -fx / fw;
    let first_s = -fs / fw;
    let second_x = -(first_x * first_x * fww + 2.0 * first_x * fxw + fxx) / fw;
    let second_s = -(first_s * first_s * fww + 2.0 * first_s * fsw + fss) / fw;
    let third_x = -(3.0 * d10 * d20 * fww
        + d10.powi(3) * fwww
        + 3.0 * d20 * fxw
        + 3.0 * d10 * d10 * fxww
        + 3.0 * d10 * fxxw
        + fxxx)
        / fw;
    let third_x_free = -(3.0 * d10 * d20 * fss
        + d10.powi(3) * fsss
        + 3.0 * d20 * fxs
        + 3.0 * d10 * d10 * fxss
        + 3.0 * d10 * fxxs
        + fxxx)
        / fw;

    let entries = vec![
        ClosedFormEntry::new("first order in x: -F_x/F_w", (1, 0), first_x, d10, true),
        ClosedFormEntry::new("first order in s: -F_s/F_w", (0, 1), first_s, d01, true),
        ClosedFormEntry::new(
            "second order in x: -(w_x^2 F_ww + 2 w_x F_xw + F_xx)/F_w",
            (2, 0),
            second_x,
            d20,
            true,
        ),
        ClosedFormEntry::new(
            "second order in s: -(w_s^2 F_ww + 2 w_s F_sw + F_ss)/F_w",
            (0, 2),
            second_s,
            d02,
            true,
        ),
        ClosedFormEntry::new("third order in x: chain rule with s fixed", (3, 0), third_x, d30, true),
        ClosedFormEntry::new(
            "third order in x: free-variable partials variant (comparison only)",
            (3, 0),
            third_x_free,
            d30,
            false,
        ),
    ];
    Ok(ClosedFormReport { base: *base, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn linear_base_is_valid() {
        let f = parse("2*p - q").unwrap();
        let b = check_base_point(&f, [0.0, 1.0, 2.0], SolveFor::Q, &tol()).unwrap();
        assert_eq!(b.pivot, -1.0);
    }

    #[test]
    fn circle_base_degenerate_in_q_valid_in_p() {
        let f = parse("p^2 + q^2 - 1").unwrap();
        let err = check_base_point(&f, [FRAC_PI_2, 1.0, 0.0], SolveFor::Q, &tol()).unwrap_err();
        assert!(matches!(err, JetError::Degenerate { var: Var::Q, value, .. } if value == 0.0));
        let b = check_base_point(&f, [FRAC_PI_2, 1.0, 0.0], SolveFor::P, &tol()).unwrap();
        assert_eq!(b.pivot, 2.0);
    }

    #[test]
    fn residual_is_reported() {
        let f = parse("2*p - q").unwrap();
        match check_base_point(&f, [0.0, 1.0, 2.5], SolveFor::Q, &tol()) {
            Err(JetError::ResidualTooLarge { residual, .. }) => assert_eq!(residual, 0.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_coordinates() {
        let r0 = 0.1;
        let f = parse("2/3*0.1^3 - (2/3 + q^2)*p^3").unwrap();
        let q0 = solve_missing_coordinate(&f, PartialPoint { x: Some(0.0), p: Some(r0), q: None }, (-1.0, 1.0), 1e-9)
            .unwrap();
        assert!(q0.abs() < 1e-6, "{q0}");

        let f = parse("2*p - q").unwrap();
        let q0 = solve_missing_coordinate(&f, PartialPoint { x: Some(0.0), p: Some(1.0), q: None }, (0.0, 4.0), 1e-9)
            .unwrap();
        assert!((q0 - 2.0).abs() < 1e-12);

        let f = parse("q - x").unwrap();
        let q0 = solve_missing_coordinate(&f, PartialPoint { x: Some(5.0), p: Some(-3.0), q: None }, (0.0, 10.0), 1e-9)
            .unwrap();
        assert!((q0 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn missing_coordinate_failure() {
        let f = parse("q^2 + 1").unwrap();
        let r = solve_missing_coordinate(&f, PartialPoint { x: Some(0.0), p: Some(0.0), q: None }, (-1.0, 1.0), 1e-9);
        assert!(matches!(r, Err(JetError::NoRootFound { min_abs, .. }) if (min_abs - 1.0).abs() < 1e-9));
        let r = solve_missing_coordinate(&f, PartialPoint { x: Some(0.0), ..Default::default() }, (-1.0, 1.0), 1e-9);
        assert_eq!(r, Err(JetError::BadUnknowns));
    }

    fn example3() -> (Expr, BasePoint) {
        let f = parse("-3*sin(x)*p^(4/3) - q").unwrap();
        let q0 = -1.5 * 3f64.sqrt();
        let b = check_base_point(&f, [PI / 3.0, 1.0, q0], SolveFor::Q, &tol()).unwrap();
        (f, b)
    }

    #[test]
    fn sine_power_jet() {
        let (f, b) = example3();
        let jet = implicit_jet(&f, &b, (3, 1)).unwrap();
        let r3 = 3f64.sqrt();
        assert_eq!(jet.d(0, 0), b.q0);
        assert!((jet.d(1, 0) + 1.5).abs() < 1e-12);
        assert!((jet.d(2, 0) - 1.5 * r3).abs() < 1e-12);
        assert!((jet.d(0, 1) + 2.0 * r3).abs() < 1e-12);
        // phi = -3 sin(x) p^(4/3) is explicit: third x-derivative 3 cos(pi/3) = 3/2
        assert!((jet.d(3, 0) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bubble_jet() {
        let f = parse("2/3*(1/10)^3 - (2/3 + q^2)*p^3").unwrap();
        let b = check_base_point(&f, [0.0, 0.1, 0.0], SolveFor::P, &tol()).unwrap();
        let jet = implicit_jet(&f, &b, (1, 2)).unwrap();
        assert_eq!(jet.d(1, 0), 0.0);
        assert!(jet.d(0, 1).abs() < 1e-15);
        assert!((jet.d(0, 2) + 0.1).abs() < 1e-14);
    }

    #[test]
    fn circle_jet() {
        let f = parse("p^2 + q^2 - 1").unwrap();
        let b = check_base_point(&f, [FRAC_PI_2, 1.0, 0.0], SolveFor::P, &tol()).unwrap();
        let jet = implicit_jet(&f, &b, (1, 2)).unwrap();
        assert_eq!(jet.d(1, 0), 0.0);
        assert_eq!(jet.d(0, 1), 0.0);
        assert_eq!(jet.d(0, 2), -1.0);
    }

    #[test]
    fn order_cap() {
        let (f, b) = example3();
        assert_eq!(implicit_jet(&f, &b, (4, 1)), Err(JetError::OrderUnsupported(4, 1)));
    }

    #[test]
    fn closed_forms() {
        let f = parse("2*p - q").unwrap();
        let b = check_base_point(&f, [0.0, 1.0, 2.0], SolveFor::Q, &tol()).unwrap();
        let report = jet_closed_form_check(&f, &b).unwrap();
        let first = report.entry("first order in s").unwrap();
        assert_eq!(first.closed_form, 2.0);
        assert_eq!(first.abs_delta, 0.0);
        assert!(report.failures(1e-10).is_empty());

        let f = parse("p^2 + q^2 - 1").unwrap();
        let b = check_base_point(&f, [FRAC_PI_2, 1.0, 0.0], SolveFor::P, &tol()).unwrap();
        let report = jet_closed_form_check(&f, &b).unwrap();
        let second = report.entry("second order in s").unwrap();
        assert_eq!(second.closed_form, -1.0);
        assert_eq!(second.abs_delta, 0.0);

        let (f, b) = example3();
        let report = jet_closed_form_check(&f, &b).unwrap();
        assert!(report.failures(1e-10).is_empty(), "{report:#?}");
        let third = report.entry("third order in x: chain rule").unwrap();
        assert!((third.closed_form - 1.5).abs() < 1e-12);
        let variant = report.entry("third order in x: free-variable").unwrap();
        assert!(variant.abs_delta > 1.0);
    }

    #[test]
    fn identity_text_for_second_order() {
        let f = parse("p^2 + q^2 - 1").unwrap();
        let h = differentiated_identity(&f, SolveFor::P, 0, 1);
        let env = Env::xpq(0.0, 0.6, 0.8).with(Var::Jet(0, 1), -0.8 / 0.6);
        assert!(h.evaluate(&env).unwrap().abs() < 1e-15);
    }
}
