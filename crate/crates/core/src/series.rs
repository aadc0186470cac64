//! Series-expansion route: expand `F(x, y, y')` in powers of `x - x0` with the
//! derivatives `y^(k)(x0)` as unknowns and annihilate the coefficients.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::approx::{build_normal_form, build_psi_form, solve_normal_form, solve_psi_form, ApproxError, InitialCondition};
use crate::expr::{factorial, Env, Expr, ExprError, Var};
use crate::jet::{implicit_jet, BasePoint, JetError, SolveFor};
use crate::poly;

pub const MAX_SERIES_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("series order {0} exceeds the supported maximum of 3")]
    OrderTooHigh(usize),
    #[error("equation for (x - x0)^{power} introduces more than one new unknown: {unknowns}")]
    UnderDetermined { power: usize, unknowns: String },
    #[error("equation for (x - x0)^{power} is not polynomial of degree <= 2 in {unknown}")]
    NotQuadratic { power: usize, unknown: String },
    #[error("no real root for the equation of (x - x0)^{power}")]
    NoRealRoot { power: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
}

/// Coefficient of `(x - x0)^power` in the expanded residual, a polynomial in
/// the unknowns `y0 = y(x0)`, `y1 = y'(x0)`, ...
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesEquation {
    pub power: usize,
    pub coefficient: Expr,
}

/// Total derivative along `y(x)` with `Y(k)` standing for `y^(k)`.
fn total_derivative(h: &Expr) -> Expr {
    let mut out = h.differentiate(Var::X);
    for v in h.vars() {
        if let Var::Y(k) = v {
            out = out + h.differentiate(v) * Expr::Var(Var::Y(k + 1));
        }
    }
    out.simplify()
}

/// Evaluates every variable-free subtree, surfacing domain errors such as `log(0)`.
fn check_constant_subtrees(e: &Expr) -> Result<(), ExprError> {
    if e.vars().is_empty() {
        e.evaluate(&Env::new())?;
        return Ok(());
    }
    match e {
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => check_constant_subtrees(a),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            check_constant_subtrees(a)?;
            check_constant_subtrees(b)
        }
        _ => Ok(()),
    }
}

pub fn expand_residual(f: &Expr, x0: f64, order: usize) -> Result<Vec<SeriesEquation>, SeriesError> {
    if order > MAX_SERIES_ORDER {
        return Err(SeriesError::OrderTooHigh(order));
    }
    let x0e = Expr::from_f64(x0);
    let mut h = f
        .with_independent_x()
        .substitute(Var::P, &Expr::Var(Var::Y(0)))
        .substitute(Var::Q, &Expr::Var(Var::Y(1)))
        .simplify();
    let mut out = Vec::with_capacity(order + 1);
    for k in 0..=order {
        if k > 0 {
            h = total_derivative(&h);
        }
        let at = (h.substitute(Var::X, &x0e) / Expr::from_f64(factorial(k))).simplify();
        check_constant_subtrees(&at)?;
        out.push(SeriesEquation { power: k, coefficient: at });
    }
    Ok(out)
}

/// Values of `y^(k)(x0)` along one branch of the solution tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeBranch {
    pub values: BTreeMap<usize, f64>,
    /// One line per determined unknown: which equation and which root.
    pub provenance: Vec<String>,
}

impl DerivativeBranch {
    fn env(&self) -> Env {
        self.values.iter().map(|(k, v)| (Var::Y(*k as u8), *v)).collect()
    }

    /// Taylor coefficients `y^(k)(x0)/k!` for `k <= order`; `None` where undetermined.
    pub fn taylor(&self, order: usize) -> Vec<Option<f64>> {
        (0..=order).map(|k| self.values.get(&k).map(|v| v / factorial(k))).collect()
    }

    /// Residual of each equation whose unknowns are all determined.
    pub fn residuals(&self, equations: &[SeriesEquation]) -> Vec<(usize, f64)> {
        let env = self.env();
        equations
            .iter()
            .filter_map(|eq| eq.coefficient.evaluate(&env).ok().map(|r| (eq.power, r)))
            .collect()
    }
}

fn substitute_known(e: &Expr, values: &BTreeMap<usize, f64>) -> Expr {
    let mut out = e.clone();
    for (k, v) in values {
        out = out.substitute(Var::Y(*k as u8), &Expr::from_f64(*v));
    }
    out.simplify()
}

/// `Some((a, b, c))` if `g(u) = a u^2 + b u + c` on probe points.
fn quadratic_in(g: &Expr, u: Var) -> Option<(f64, f64, f64)> {
    let at = |t: f64| g.evaluate(&Env::new().with(u, t)).ok();
    let (g0, g1, gm) = (at(0.0)?, at(1.0)?, at(-1.0)?);
    let c = g0;
    let a = 0.5 * (g1 + gm) - c;
    let b = 0.5 * (g1 - gm);
    let scale = 1.0 + a.abs() + b.abs() + c.abs();
    for t in [2.0, 0.5, -3.0] {
        if (at(t)? - (a * t * t + b * t + c)).abs() > 1e-9 * scale * (1.0 + t * t) {
            return None;
        }
    }
    Some((a, b, c))
}

/// Solves the equations in ascending power order, branching on quadratic roots.
///
/// An equation without unknowns must vanish (branches where it does not are
/// discarded); an equation that vanishes identically leaves its unknown free.
pub fn solve_branches(
    equations: &[SeriesEquation],
    initial: &BTreeMap<usize, f64>,
) -> Result<Vec<DerivativeBranch>, SeriesError> {
    let mut branches = vec![DerivativeBranch { values: initial.clone(), provenance: Vec::new() }];
    for eq in equations {
        let mut next = Vec::new();
        for br in branches {
            let g = substitute_known(&eq.coefficient, &br.values);
            let unknowns: Vec<Var> = g.vars().into_iter().collect();
            match unknowns.as_slice() {
                [] => {
                    let scale = 1.0 + br.values.values().fold(0.0f64, |m, v| m.max(v.abs()));
                    if g.evaluate(&Env::new())?.abs() <= 1e-9 * scale {
                        next.push(br);
                    }
                }
                [u @ Var::Y(k)] => {
                    let (a, b, c) = quadratic_in(&g, *u)
                        .ok_or_else(|| SeriesError::NotQuadratic { power: eq.power, unknown: u.to_string() })?;
                    let eps = 1e-12 * (1.0 + a.abs() + b.abs() + c.abs());
                    let clean = |v: f64| if v.abs() <= eps { 0.0 } else { v };
                    let (a, b, c) = (clean(a), clean(b), clean(c));
                    let Some(roots) = poly::real_quadratic_roots(a, b, c, eps) else {
                        next.push(br);
                        continue;
                    };
                    let count = roots.len();
                    for (i, r) in roots.into_iter().enumerate() {
                        let r = r + 0.0;
                        let mut child = br.clone();
                        child.values.insert(*k as usize, r);
                        child.provenance.push(format!(
                            "{u} = {r} from (x - x0)^{}: {} = 0 (root {} of {count})",
                            eq.power,
                            g.to_text(),
                            i + 1
                        ));
                        next.push(child);
                    }
                }
                _ => {
                    let names: Vec<String> = unknowns.iter().map(|v| v.to_string()).collect();
                    return Err(SeriesError::UnderDetermined { power: eq.power, unknowns: names.join(", ") });
                }
            }
        }
        if next.is_empty() {
            return Err(SeriesError::NoRealRoot { power: eq.power });
        }
        branches = next;
    }
    Ok(branches)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchComparison {
    pub branch: DerivativeBranch,
    pub taylor: Vec<Option<f64>>,
    /// `|series - implicit|` per coefficient; `None` where the series leaves it free.
    pub deltas: Vec<Option<f64>>,
    pub max_delta: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub order: usize,
    pub implicit_taylor: Vec<f64>,
    /// Sorted by `max_delta`, closest first.
    pub branches: Vec<BranchComparison>,
    pub tolerance: f64,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.branches.iter().any(|b| b.matches)
    }

    pub fn best(&self) -> Option<&BranchComparison> {
        self.branches.first()
    }
}

pub const EQUIVALENCE_TOL: f64 = 1e-9;

/// Taylor coefficients (about `x0`, up to `order`) of the implicit-method solution.
pub fn implicit_taylor(f: &Expr, base: &BasePoint, order: usize) -> Result<Vec<f64>, SeriesError> {
    let sol = match base.mode {
        SolveFor::Q => {
            let m = order.clamp(1, 3);
            solve_normal_form(&build_normal_form(&implicit_jet(f, base, (m, 1))?)?)
        }
        SolveFor::P => {
            let form = build_psi_form(&implicit_jet(f, base, (1, 2))?)?;
            solve_psi_form(&form, InitialCondition::Slope)?.primary().clone()
        }
    };
    Ok(sol.taylor(order))
}

/// Runs both routes at `base` and compares their expansions coefficient by coefficient.
pub fn compare_with_implicit(f: &Expr, base: &BasePoint, order: usize) -> Result<EquivalenceReport, SeriesError> {
    let implicit = implicit_taylor(f, base, order)?;
    let equations = expand_residual(f, base.x0, order)?;
    let initial = BTreeMap::from([(0, base.p0), (1, base.q0)]);
    let mut branches: Vec<BranchComparison> = solve_branches(&equations, &initial)?
        .into_iter()
        .map(|branch| {
            let taylor = branch.taylor(order);
            let deltas: Vec<Option<f64>> =
                taylor.iter().zip(&implicit).map(|(s, i)| s.map(|s| (s - i).abs())).collect();
            let max_delta = deltas.iter().map(|d| d.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
            let scale = 1.0 + implicit.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            BranchComparison { branch, taylor, deltas, max_delta, matches: max_delta <= EQUIVALENCE_TOL * scale }
        })
        .collect();
    branches.sort_by(|a, b| a.max_delta.total_cmp(&b.max_delta));
    Ok(EquivalenceReport { order, implicit_taylor: implicit, branches, tolerance: EQUIVALENCE_TOL })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::jet::{check_base_point, Tolerances};
    use std::f64::consts::FRAC_PI_2;

    fn eqs(f: &str, x0: f64, order: usize) -> Vec<SeriesEquation> {
        expand_residual(&parse(f).unwrap(), x0, order).unwrap()
    }

    fn texts(e: &[SeriesEquation]) -> Vec<String> {
        e.iter().map(|e| e.coefficient.to_text()).collect()
    }

    #[test]
    fn hand_expansions() {
        assert_eq!(texts(&eqs("q - 1", 0.0, 1)), ["y1 - 1", "y2"]);
        assert_eq!(texts(&eqs("2*p - q", 0.0, 1)), ["2*y0 - y1", "2*y1 - y2"]);
    }

    #[test]
    fn circle_expansion_and_branches() {
        let e = eqs("p^2 + q^2 - 1", FRAC_PI_2, 2);
        assert_eq!(e[0].coefficient.to_text(), "y0^2 + y1^2 - 1");
        // linear coefficient is 2 y1 (y0 + y2)
        let env: Env = [(Var::Y(0), 0.3), (Var::Y(1), 0.7), (Var::Y(2), -1.1)].into_iter().collect();
        let lin = e[1].coefficient.evaluate(&env).unwrap();
        assert!((lin - 2.0 * 0.7 * (0.3 - 1.1)).abs() < 1e-14);
        let branches = solve_branches(&e, &BTreeMap::from([(0, 1.0), (1, 0.0)])).unwrap();
        let mut y2: Vec<f64> = branches.iter().map(|b| b.values[&2]).collect();
        y2.sort_by(f64::total_cmp);
        assert_eq!(y2, vec![-1.0, 0.0]);
        for b in &branches {
            assert!(b.residuals(&e).iter().all(|(_, r)| r.abs() < 1e-12));
        }
    }

    #[test]
    fn linear_line() {
        let e = eqs("q - 1", 0.0, 1);
        let branches = solve_branches(&e, &BTreeMap::from([(0, 0.0)])).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].taylor(1), vec![Some(0.0), Some(1.0)]);
    }

    #[test]
    fn two_new_unknowns() {
        let e = eqs("p*q - x", 0.0, 0);
        let err = solve_branches(&e, &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, SeriesError::UnderDetermined { power: 0, .. }));
    }

    #[test]
    fn no_real_root() {
        let e = eqs("q^2 + 1", 0.0, 0);
        assert_eq!(solve_branches(&e, &BTreeMap::from([(0, 0.0)])), Err(SeriesError::NoRealRoot { power: 0 }));
    }

    #[test]
    fn domain_violation_is_reported() {
        let err = expand_residual(&parse("q - log(x)").unwrap(), 0.0, 1).unwrap_err();
        assert!(matches!(err, SeriesError::Expr(ExprError::Domain(_))));
    }

    #[test]
    fn equivalence_on_exponential_and_circle() {
        let tol = Tolerances::default();
        let f = parse("2*p - q").unwrap();
        let base = check_base_point(&f, [0.0, 1.0, 2.0], SolveFor::Q, &tol).unwrap();
        let r = compare_with_implicit(&f, &base, 2).unwrap();
        assert_eq!(r.implicit_taylor, vec![1.0, 2.0, 2.0]);
        assert!(r.equivalent());
        assert_eq!(r.best().unwrap().max_delta, 0.0);

        let f = parse("p^2 + q^2 - 1").unwrap();
        let base = check_base_point(&f, [FRAC_PI_2, 1.0, 0.0], SolveFor::P, &tol).unwrap();
        let r = compare_with_implicit(&f, &base, 2).unwrap();
        assert!(r.equivalent());
        let best = r.best().unwrap();
        assert_eq!(best.branch.values[&2], -1.0);
        assert!(best.max_delta <= 1e-12);
        assert_eq!(r.branches.len(), 2);
    }
}
