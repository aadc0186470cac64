//! Local approximated ODEs built from implicit jets, and their closed-form
//! solutions.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{factorial, Expr, TruncatedPoly, Var};
use crate::jet::{ImplicitJet, SolveFor};
use crate::poly;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApproxError {
    #[error("jet was computed in mode {found:?}, this form requires {expected:?}")]
    WrongMode { expected: SolveFor, found: SolveFor },
    #[error("unsupported approximation orders ({0}, {1})")]
    UnsupportedOrders(usize, usize),
    #[error("unsupported local form: {0}")]
    UnsupportedForm(String),
    #[error("the polynomial ansatz has no real solution")]
    NoRealBranch,
    #[error("solution has no zero crossing after the base point")]
    NoZeroCrossing,
}

/// `y' = sum_i alpha_i (x - x0)^i + beta (y - p0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalForm {
    pub x0: f64,
    pub p0: f64,
    pub q0: f64,
    /// `alpha_i`, coefficient of `(x - x0)^i`; `alpha_0 = q0`.
    pub forcing: Vec<f64>,
    pub beta: f64,
}

/// `y = sum a(i, j) (x - x0)^i (y' - q0)^j`, with `a(0, 0) = p0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiForm {
    pub x0: f64,
    pub p0: f64,
    pub q0: f64,
    pub coeffs: TruncatedPoly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LocalOde {
    Normal(NormalForm),
    Psi(PsiForm),
}

fn centered(var: Var, center: f64) -> Expr {
    if center == 0.0 {
        Expr::Var(var)
    } else {
        Expr::Var(var) - Expr::from_f64(center)
    }
}

fn power_of(base: &Expr, k: usize) -> Expr {
    match k {
        0 => Expr::one(),
        1 => base.clone(),
        _ => base.clone().powi(k as i64),
    }
}

impl NormalForm {
    /// Right-hand side as an expression in `x` and `p` (standing for `y`).
    pub fn rhs_expr(&self) -> Expr {
        let dx = centered(Var::X, self.x0);
        let mut e = Expr::zero();
        for (i, a) in self.forcing.iter().enumerate() {
            e = e + Expr::from_f64(*a) * power_of(&dx, i);
        }
        (e + Expr::from_f64(self.beta) * centered(Var::P, self.p0)).simplify()
    }

    /// `F_approx(x, p, q) = q - rhs`, whose zero set is the local equation.
    pub fn residual_expr(&self) -> Expr {
        (Expr::Var(Var::Q) - self.rhs_expr()).simplify()
    }

    pub fn rhs(&self, x: f64, y: f64) -> f64 {
        poly::eval(&self.forcing, x - self.x0) + self.beta * (y - self.p0)
    }

    /// Uncentered form `y' = sum_k c_k x^k + beta y`: returns `(c, beta)`.
    /// For first-order forcing this is `y' = q0 - D10 x0 - D01 p0 + D10 x + D01 y`.
    pub fn origin_form(&self) -> (Vec<f64>, f64) {
        let mut c = poly::recenter_to_origin(&self.forcing, self.x0);
        if c.is_empty() {
            c.push(0.0);
        }
        c[0] -= self.beta * self.p0;
        (c, self.beta)
    }

    /// Copy with the coefficient of `(x - x0)^k` replaced.
    pub fn with_forcing_coefficient(&self, k: usize, value: f64) -> NormalForm {
        let mut out = self.clone();
        if out.forcing.len() <= k {
            out.forcing.resize(k + 1, 0.0);
        }
        out.forcing[k] = value;
        out
    }
}

impl PsiForm {
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.coeffs.coeff(i, j)
    }

    /// Right-hand side as an expression in `x` and `q` (standing for `y'`).
    pub fn rhs_expr(&self) -> Expr {
        let dx = centered(Var::X, self.x0);
        let dq = centered(Var::Q, self.q0);
        let (m, n) = self.coeffs.orders;
        let mut e = Expr::zero();
        for i in 0..=m {
            for j in 0..=n {
                let a = self.a(i, j);
                if a != 0.0 {
                    e = e + Expr::from_f64(a) * power_of(&dx, i) * power_of(&dq, j);
                }
            }
        }
        e.simplify()
    }

    pub fn residual_expr(&self) -> Expr {
        (Expr::Var(Var::P) - self.rhs_expr()).simplify()
    }

    pub fn rhs(&self, x: f64, slope: f64) -> f64 {
        self.coeffs.evaluate(x, slope)
    }
}

impl LocalOde {
    pub fn residual_expr(&self) -> Expr {
        match self {
            LocalOde::Normal(n) => n.residual_expr(),
            LocalOde::Psi(p) => p.residual_expr(),
        }
    }

    /// Residual of the local equation along a candidate solution.
    pub fn residual_along(&self, sol: &ClosedFormSolution, x: f64) -> f64 {
        match self {
            LocalOde::Normal(n) => sol.derivative(x) - n.rhs(x, sol.value(x)),
            LocalOde::Psi(p) => sol.value(x) - p.rhs(x, sol.derivative(x)),
        }
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q = {}", self.rhs_expr())
    }
}

impl fmt::Display for PsiForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p = {}", self.rhs_expr())
    }
}

impl fmt::Display for LocalOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalOde::Normal(n) => n.fmt(f),
            LocalOde::Psi(p) => p.fmt(f),
        }
    }
}

fn require_mode(jet: &ImplicitJet, expected: SolveFor) -> Result<(), ApproxError> {
    if jet.mode() == expected {
        Ok(())
    } else {
        Err(ApproxError::WrongMode { expected, found: jet.mode() })
    }
}

/// `y' = sum_i D(i,0)/i! (x - x0)^i + D(0,1) (y - p0)` from a jet of orders `(m, 1)`, `m <= 3`.
pub fn build_normal_form(jet: &ImplicitJet) -> Result<NormalForm, ApproxError> {
    require_mode(jet, SolveFor::Q)?;
    let (m, n) = jet.orders;
    if m > 3 || n < 1 {
        return Err(ApproxError::UnsupportedOrders(m, n));
    }
    let b = jet.base;
    Ok(NormalForm {
        x0: b.x0,
        p0: b.p0,
        q0: b.q0,
        forcing: (0..=m).map(|i| jet.d(i, 0) / factorial(i)).collect(),
        beta: jet.d(0, 1),
    })
}

/// `y = p0 + sum D(i,j)/(i! j!) (x - x0)^i (y' - q0)^j` from a jet of orders `(m, n)`, `m <= 1`, `n <= 2`.
pub fn build_psi_form(jet: &ImplicitJet) -> Result<PsiForm, ApproxError> {
    require_mode(jet, SolveFor::P)?;
    let (m, n) = jet.orders;
    if m > 1 || n > 2 {
        return Err(ApproxError::UnsupportedOrders(m, n));
    }
    let b = jet.base;
    let mut coeffs = TruncatedPoly::zeros([Var::X, Var::Q], [b.x0, b.q0], (m, n));
    for ((i, j), d) in jet.entries() {
        coeffs.set(i, j, d / (factorial(i) * factorial(j)));
    }
    Ok(PsiForm { x0: b.x0, p0: b.p0, q0: b.q0, coeffs })
}

/// `y(x) = sum_k poly[k] (x - x0)^k + amplitude * exp(rate (x - x0))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormSolution {
    pub x0: f64,
    /// Base values the solution is expected to reproduce at `x0`.
    pub p0: f64,
    pub q0: f64,
    pub poly: Vec<f64>,
    pub amplitude: f64,
    pub rate: f64,
    /// Forcing `alpha` of the normal form this solves, when it came from one.
    /// Used to evaluate without the cancellation between the polynomial and
    /// exponential parts when `rate` is small.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub forcing: Vec<f64>,
}

/// `phi_n(z) = sum_j z^j / (j + n)!`, so `phi_0 = exp`.
fn phi(n: usize, z: f64) -> f64 {
    if z.abs() <= 1.0 {
        let mut term = 1.0 / factorial(n);
        let mut sum = term;
        for j in 1..60 {
            term *= z / (j + n) as f64;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    let mut v = z.exp();
    for k in 1..=n {
        v = (v - 1.0 / factorial(k - 1)) / z;
    }
    v
}

/// The solution written in powers of `x` as in the classical first-order shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SolutionShape {
    /// `a0 + b0 x`
    Line { a0: f64, b0: f64 },
    /// `a0 + b0 x + c0 x^2`
    Quadratic { a0: f64, b0: f64, c0: f64 },
    /// `a0 + b0 x + c0 exp(d0 x)`
    Exponential { a0: f64, b0: f64, c0: f64, d0: f64 },
    /// Higher-degree polynomial part, not one of the first-order shapes.
    Other,
}

impl ClosedFormSolution {
    fn has_exponential(&self) -> bool {
        self.amplitude != 0.0 && self.rate != 0.0
    }

    fn uses_forcing(&self) -> bool {
        !self.forcing.is_empty() && self.rate != 0.0
    }

    /// `y - p0 = sum_i alpha_i i! d^(i+1) phi_(i+1)(rate d)`.
    fn forced_offset(&self, d: f64) -> f64 {
        let z = self.rate * d;
        self.forcing
            .iter()
            .enumerate()
            .map(|(i, a)| a * factorial(i) * d.powi(i as i32 + 1) * phi(i + 1, z))
            .sum()
    }

    pub fn value(&self, x: f64) -> f64 {
        let d = x - self.x0;
        if self.uses_forcing() {
            return self.p0 + self.forced_offset(d);
        }
        poly::eval(&self.poly, d) + self.amplitude * (self.rate * d).exp()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let d = x - self.x0;
        if self.uses_forcing() {
            return poly::eval(&self.forcing, d) + self.rate * self.forced_offset(d);
        }
        poly::eval(&poly::derivative(&self.poly), d) + self.amplitude * self.rate * (self.rate * d).exp()
    }

    /// Taylor coefficients about `x0` up to `(x - x0)^order`.
    pub fn taylor(&self, order: usize) -> Vec<f64> {
        if self.uses_forcing() {
            // (k + 1) c_(k+1) = alpha_k + rate c_k for the offset y - p0
            let mut c = vec![0.0; order + 1];
            for k in 0..order {
                c[k + 1] = (self.forcing.get(k).copied().unwrap_or(0.0) + self.rate * c[k]) / (k + 1) as f64;
            }
            c[0] = self.p0;
            return c;
        }
        (0..=order)
            .map(|k| self.poly.get(k).copied().unwrap_or(0.0) + self.amplitude * self.rate.powi(k as i32) / factorial(k))
            .collect()
    }

    /// Polynomial part in powers of `x`.
    pub fn poly_in_x(&self) -> Vec<f64> {
        let mut c = poly::recenter_to_origin(&self.poly, self.x0);
        while c.len() > 1 && c.last() == Some(&0.0) {
            c.pop();
        }
        c
    }

    /// Coefficient of `exp(rate x)` in uncentered form, i.e. the integration constant.
    pub fn c0(&self) -> f64 {
        self.amplitude * (-self.rate * self.x0).exp()
    }

    pub fn shape(&self) -> SolutionShape {
        let c = self.poly_in_x();
        let get = |k: usize| c.get(k).copied().unwrap_or(0.0);
        let degree = c.iter().rposition(|v| *v != 0.0).unwrap_or(0);
        match (self.has_exponential(), degree) {
            (true, 0 | 1) => SolutionShape::Exponential { a0: get(0), b0: get(1), c0: self.c0(), d0: self.rate },
            (false, 0 | 1) => SolutionShape::Line { a0: get(0), b0: get(1) },
            (false, 2) => SolutionShape::Quadratic { a0: get(0), b0: get(1), c0: get(2) },
            _ => SolutionShape::Other,
        }
    }

    pub fn is_constant(&self) -> bool {
        !self.has_exponential() && self.poly.iter().skip(1).all(|c| *c == 0.0)
    }

    /// `(|y(x0) - p0|, |y'(x0) - q0|)`.
    pub fn base_errors(&self) -> (f64, f64) {
        ((self.value(self.x0) - self.p0).abs(), (self.derivative(self.x0) - self.q0).abs())
    }

    /// Both base conditions within relative tolerance `tol`.
    pub fn satisfies_base(&self, tol: f64) -> bool {
        let (ev, es) = self.base_errors();
        ev <= tol * (1.0 + self.p0.abs()) && es <= tol * (1.0 + self.q0.abs())
    }

    /// Centered expression in `x`.
    pub fn to_expr(&self) -> Expr {
        let dx = centered(Var::X, self.x0);
        let mut e = Expr::zero();
        for (k, c) in self.poly.iter().enumerate() {
            e = e + Expr::from_f64(*c) * power_of(&dx, k);
        }
        if self.has_exponential() {
            e = e + Expr::from_f64(self.amplitude) * (Expr::from_f64(self.rate) * dx).exp();
        }
        e.simplify()
    }

    /// Expression in powers of `x`.
    pub fn to_expr_power_basis(&self) -> Expr {
        let x = Expr::Var(Var::X);
        let mut e = Expr::zero();
        for (k, c) in self.poly_in_x().iter().enumerate() {
            e = e + Expr::from_f64(*c) * power_of(&x, k);
        }
        if self.has_exponential() {
            e = e + Expr::from_f64(self.c0()) * (Expr::from_f64(self.rate) * x).exp();
        }
        e.simplify()
    }
}

impl fmt::Display for ClosedFormSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Closed-form solution of a normal form with `y(x0) = p0`.
///
/// `beta = 0` integrates the forcing directly. Otherwise a particular
/// polynomial of the forcing's degree is found by undetermined coefficients
/// and the homogeneous term `A exp(beta (x - x0))` fixes the initial value.
pub fn solve_normal_form(ode: &NormalForm) -> ClosedFormSolution {
    let alpha = &ode.forcing;
    let mut sol = ClosedFormSolution { x0: ode.x0, p0: ode.p0, q0: ode.q0, poly: vec![ode.p0], amplitude: 0.0, rate: 0.0, forcing: Vec::new() };
    if alpha.is_empty() {
        return sol;
    }
    if ode.beta == 0.0 {
        sol.poly.extend(alpha.iter().enumerate().map(|(k, a)| a / (k + 1) as f64));
        return sol;
    }
    // u' - beta u = alpha with u = y - p0
    let m = alpha.len() - 1;
    let mut u = vec![0.0; m + 1];
    u[m] = -alpha[m] / ode.beta;
    for k in (0..m).rev() {
        u[k] = ((k + 1) as f64 * u[k + 1] - alpha[k]) / ode.beta;
    }
    sol.amplitude = -u[0];
    sol.rate = ode.beta;
    sol.forcing = alpha.clone();
    sol.poly = u;
    sol.poly[0] += ode.p0;
    sol
}

/// Which condition picks the member of a one-parameter family of solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitialCondition {
    /// `y'(x0) = q0`
    Slope,
    /// `y(x0) = p0`
    Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub solution: ClosedFormSolution,
    pub constant: bool,
    pub satisfies_base: bool,
}

/// All real solution branches; the branch matching both base conditions
/// comes first, constant branches after non-constant ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiSolution {
    pub branches: Vec<Branch>,
}

impl PsiSolution {
    pub fn primary(&self) -> &ClosedFormSolution {
        &self.branches[0].solution
    }

    /// Constant branches (e.g. `y = p0` when `y' = q0 = 0` solves the equation).
    pub fn trivial(&self) -> impl Iterator<Item = &ClosedFormSolution> {
        self.branches.iter().filter(|b| b.constant).map(|b| &b.solution)
    }
}

const BASE_TOL: f64 = 1e-9;

fn branch(solution: ClosedFormSolution) -> Branch {
    Branch { constant: solution.is_constant(), satisfies_base: solution.satisfies_base(BASE_TOL), solution }
}

fn line(form: &PsiForm) -> ClosedFormSolution {
    ClosedFormSolution {
        x0: form.x0,
        p0: form.p0,
        q0: form.q0,
        poly: vec![form.a(0, 0), form.a(1, 0)],
        amplitude: 0.0,
        rate: 0.0,
        forcing: Vec::new(),
    }
}

/// Solves `y = psi_approx(x, y')` for `m <= 1`, `n <= 2`.
///
/// * `n = 0`: the line `y = a00 + a10 (x - x0)`.
/// * `n = 1`: rearranged to a normal form and solved as such.
/// * `n = 2`: quadratic ansatz `y = A + B d + C d^2`, `d = x - x0`, matching
///   the coefficients of `1, d, d^2`. When the ansatz leaves a free
///   parameter, `initial` selects the family member.
pub fn solve_psi_form(form: &PsiForm, initial: InitialCondition) -> Result<PsiSolution, ApproxError> {
    let (m, n) = form.coeffs.orders;
    if m > 1 || n > 2 {
        return Err(ApproxError::UnsupportedOrders(m, n));
    }
    let tiny = |v: f64| v.abs() <= 1e-12 * (1.0 + form.p0.abs());
    // a vanishing quadratic part leaves a linear psi-form, solved exactly when unmixed
    let linear = tiny(form.a(0, 2)) && tiny(form.a(1, 2)) && tiny(form.a(1, 1));
    let n = if n == 2 && linear { 1 } else { n };
    match n {
        0 => Ok(PsiSolution { branches: vec![branch(line(form))] }),
        1 => {
            if !tiny(form.a(1, 1)) {
                return Err(ApproxError::UnsupportedForm("mixed (x - x0)(y' - q0) term in a linear psi-form".into()));
            }
            let a01 = form.a(0, 1);
            if a01 == 0.0 {
                return Ok(PsiSolution { branches: vec![branch(line(form))] });
            }
            // y' = q0 + (y - a00 - a10 d)/a01
            let normal = NormalForm {
                x0: form.x0,
                p0: form.a(0, 0),
                q0: form.q0,
                forcing: vec![form.q0, -form.a(1, 0) / a01],
                beta: 1.0 / a01,
            };
            let mut sol = solve_normal_form(&normal);
            sol.p0 = form.p0;
            Ok(PsiSolution { branches: vec![branch(sol)] })
        }
        _ => solve_quadratic_ansatz(form, initial),
    }
}

fn solve_quadratic_ansatz(form: &PsiForm, initial: InitialCondition) -> Result<PsiSolution, ApproxError> {
    if !(form.a(1, 2).abs() <= 1e-12 * (1.0 + form.p0.abs())) {
        return Err(ApproxError::UnsupportedForm("cubic (x - x0)(y' - q0)^2 term breaks the quadratic ansatz".into()));
    }
    let (a00, a10, a01, a11, a02) = (form.a(0, 0), form.a(1, 0), form.a(0, 1), form.a(1, 1), form.a(0, 2));
    let q0 = form.q0;
    let eps = 1e-12 * (1.0 + a00.abs() + a10.abs() + a01.abs() + a11.abs() + a02.abs() + q0.abs());

    // d^2: C = 2 a11 C + 4 a02 C^2
    let mut curvatures = vec![0.0];
    if a02 != 0.0 {
        curvatures.push((1.0 - 2.0 * a11) / (4.0 * a02));
    }
    let value_at = |slope_offset: f64| a00 + a01 * slope_offset + a02 * slope_offset * slope_offset;
    let mut candidates: Vec<[f64; 3]> = Vec::new();
    for c in curvatures {
        // d^1: B (1 - a11 - 4 a02 C) = a10 + 2 C a01 - (a11 + 4 a02 C) q0
        let k = 1.0 - a11 - 4.0 * a02 * c;
        let r = a10 + 2.0 * c * a01 - (a11 + 4.0 * a02 * c) * q0;
        if k.abs() > eps {
            let b = r / k;
            candidates.push([value_at(b - q0), b, c]);
        } else if r.abs() <= eps {
            // one-parameter family in B
            match initial {
                InitialCondition::Slope => candidates.push([a00, q0, c]),
                InitialCondition::Value => {
                    match poly::real_quadratic_roots(a02, a01, a00 - form.p0, eps) {
                        None => candidates.push([a00, q0, c]),
                        Some(roots) => {
                            for offset in roots {
                                candidates.push([value_at(offset), q0 + offset, c]);
                            }
                        }
                    }
                }
            }
        }
    }
    let mut unique: Vec<[f64; 3]> = Vec::new();
    for cand in candidates {
        let dup = unique.iter().any(|u| u.iter().zip(cand.iter()).all(|(a, b)| (a - b).abs() <= eps));
        if !dup {
            unique.push(cand);
        }
    }
    if unique.is_empty() {
        return Err(ApproxError::NoRealBranch);
    }
    let mut branches: Vec<Branch> = unique
        .into_iter()
        .map(|[a, b, c]| {
            branch(ClosedFormSolution { x0: form.x0, p0: form.p0, q0, poly: vec![a, b, c], amplitude: 0.0, rate: 0.0, forcing: Vec::new() })
        })
        .collect();
    branches.sort_by_key(|b| (!b.satisfies_base, b.constant));
    Ok(PsiSolution { branches })
}

/// Smallest root of `y` after the base point (closed form for pure quadratics).
pub fn collapse_time(sol: &ClosedFormSolution) -> Result<f64, ApproxError> {
    let start = sol.value(sol.x0);
    if !(start > 0.0) {
        return Err(ApproxError::NoZeroCrossing);
    }
    if !sol.has_exponential() && sol.poly.len() <= 3 {
        let c = |k: usize| sol.poly.get(k).copied().unwrap_or(0.0);
        let roots = poly::real_quadratic_roots(c(2), c(1), c(0), 0.0).unwrap_or_default();
        return roots
            .into_iter()
            .filter(|r| *r > 0.0)
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.min(r))))
            .map(|r| sol.x0 + r)
            .ok_or(ApproxError::NoZeroCrossing);
    }
    let mut prev = 0.0;
    let mut step = 1e-8 * (1.0 + sol.x0.abs());
    for _ in 0..500 {
        let next = prev + step;
        let v = sol.value(sol.x0 + next);
        if !v.is_finite() {
            break;
        }
        if v <= 0.0 {
            let (mut a, mut b) = (prev, next);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid == a || mid == b {
                    break;
                }
                if sol.value(sol.x0 + mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(sol.x0 + 0.5 * (a + b));
        }
        prev = next;
        step *= 1.1;
    }
    Err(ApproxError::NoZeroCrossing)
}
