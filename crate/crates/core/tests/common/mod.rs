//! Strategies and checks shared by the property suite and the acceptance run.
#![allow(dead_code)]

use ift_ode_core::approx::{build_normal_form, solve_normal_form};
use ift_ode_core::builtin::{self, ExampleId};
use ift_ode_core::expr::{parse, Env, Expr, Var};
use ift_ode_core::jet::{check_base_point, implicit_jet, SolveFor, Tolerances};
use ift_ode_core::numeric::{finite_difference_jet, integrate_bubble, integrate_explicit, BubbleParams, ENERGY_DRIFT_TOL};
use num_rational::Rational64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::var(Var::X)),
        Just(Expr::var(Var::P)),
        Just(Expr::var(Var::Q)),
        (-5i64..=5, 1i64..=4).prop_map(|(n, d)| Expr::rational(n, d)),
        Just(Expr::Pi),
    ]
}

/// Random trees of depth at most 6, built so that every node is defined
/// for all real bindings.
pub fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        let positive = |a: Expr| Expr::one() + a.powi(2);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(move |(a, b)| a / positive(b)),
            (inner.clone(), 0i64..=2).prop_map(|(a, k)| a.powi(k)),
            (inner.clone(), prop::sample::select(vec![(1, 2), (1, 3), (-1, 2), (4, 3)]))
                .prop_map(move |(a, (n, d))| positive(a).pow(Rational64::new(n, d))),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.sin().exp()),
            inner.clone().prop_map(move |a| positive(a).log()),
            inner.clone().prop_map(move |a| positive(a).sqrt()),
            inner.prop_map(|a| -a),
        ]
    })
}

pub fn binding() -> impl Strategy<Value = (f64, f64, f64)> {
    (-1.2f64..1.2, -1.2f64..1.2, -1.2f64..1.2)
}

/// `g(x, p)` from a random tree, with `q` replaced so only `x`, `p` remain.
pub fn explicit_rhs() -> impl Strategy<Value = Expr> {
    tree().prop_map(|e| e.substitute(Var::Q, &(Expr::var(Var::X) - Expr::var(Var::P))).simplify())
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

pub fn sample_points(x0: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |k| x0 - 1.0 + 2.0 * k as f64 / (count - 1) as f64)
}

pub fn derivative_matches_central_difference(e: &Expr, (x, p, q): (f64, f64, f64), which: usize) -> Result<(), TestCaseError> {
    let var = [Var::X, Var::P, Var::Q][which];
    let env = Env::xpq(x, p, q);
    let exact = e.differentiate(var).evaluate(&env).unwrap();
    let v = env.get(var).unwrap();
    let h = 1e-5 * (1.0 + v.abs());
    let plus = e.evaluate(&env.clone().with(var, v + h)).unwrap();
    let minus = e.evaluate(&env.clone().with(var, v - h)).unwrap();
    let fd = (plus - minus) / (2.0 * h);
    prop_assert!((exact - fd).abs() <= 1e-4 * (1.0 + exact.abs()), "{}: {exact} vs {fd}", e.to_text());
    Ok(())
}

/// For `F = q - g(x, p)` the jet is the table of partials of `g`.
pub fn jet_of_explicit_equation(g: &Expr, x0: f64, p0: f64, m: usize, n: usize) -> Result<(), TestCaseError> {
    let f = Expr::var(Var::Q) - g.clone();
    let q0 = g.evaluate(&Env::xpq(x0, p0, 0.0)).unwrap();
    let base = check_base_point(&f, [x0, p0, q0], SolveFor::Q, &Tolerances::default()).unwrap();
    let jet = implicit_jet(&f, &base, (m, n)).unwrap();
    let env = Env::xpq(x0, p0, q0);
    for i in 0..=m {
        for j in 0..=n {
            let mut d = g.clone();
            for _ in 0..i {
                d = d.differentiate(Var::X);
            }
            for _ in 0..j {
                d = d.differentiate(Var::P);
            }
            let oracle = d.evaluate(&env).unwrap();
            prop_assert!(close(jet.d(i, j), oracle, 1e-9), "D({i},{j}) of q = {}: {} vs {oracle}", g.to_text(), jet.d(i, j));
        }
    }
    Ok(())
}

/// Base conditions to 1e-10 and the local ODE satisfied to 1e-9 at 50 points.
pub fn normal_form_solution_is_exact(g: &Expr, x0: f64, p0: f64, m: usize) -> Result<(), TestCaseError> {
    let f = Expr::var(Var::Q) - g.clone();
    let q0 = g.evaluate(&Env::xpq(x0, p0, 0.0)).unwrap();
    let base = check_base_point(&f, [x0, p0, q0], SolveFor::Q, &Tolerances::default()).unwrap();
    let ode = build_normal_form(&implicit_jet(&f, &base, (m, 1)).unwrap()).unwrap();
    prop_assert!(close(ode.forcing[0], q0, 1e-12));
    let sol = solve_normal_form(&ode);
    prop_assert!(close(sol.value(x0), p0, 1e-10) && close(sol.derivative(x0), q0, 1e-10), "{sol}");
    for x in sample_points(x0, 50) {
        let (lhs, rhs) = (sol.derivative(x), ode.rhs(x, sol.value(x)));
        prop_assert!(close(lhs, rhs, 1e-9), "x = {x}: {lhs} vs {rhs}");
    }
    Ok(())
}

/// Error ratios of RK4 on `y' = 2y` over `[0, 1]` when the step is halved.
pub fn rk4_ratios() -> Vec<(f64, f64)> {
    let f = parse("2*p").unwrap();
    let err = |h: f64| (integrate_explicit(&f, 0.0, 1.0, h, 1.0).unwrap().last().y - 2f64.exp()).abs();
    [0.1, 0.05, 0.02].into_iter().map(|h| (h, err(h) / err(h / 2.0))).collect()
}

pub fn bubble_energy_is_conserved(params: BubbleParams) -> Result<(), TestCaseError> {
    let run = integrate_bubble(&params, params.default_step(), 1e-3).unwrap();
    let bound = ENERGY_DRIFT_TOL * params.r0.powi(3) * params.drive();
    prop_assert!(run.max_energy_drift <= bound);
    for s in run.trajectory.samples.iter().chain(&run.approach) {
        prop_assert!(params.energy(s.y, s.dy).abs() <= bound);
    }
    Ok(())
}

/// Steps used against the published base points; below ~3e-3 the
/// fourth-order stencils are dominated by rounding.
pub const FD_STEPS: [f64; 3] = [1e-2, 5e-3, 3e-3];

pub fn finite_differences_agree_on_examples() -> Result<(), String> {
    let tol = Tolerances::default();
    for id in [ExampleId::One, ExampleId::TwoTer, ExampleId::Three, ExampleId::Four] {
        let p = builtin::problem(id, &BubbleParams::default());
        let base = check_base_point(&p.ode, p.point, p.mode, &tol).map_err(|e| e.to_string())?;
        let jet = implicit_jet(&p.ode, &base, p.orders).map_err(|e| e.to_string())?;
        for h in FD_STEPS {
            let fd = finite_difference_jet(&p.ode, &base, p.orders, h).map_err(|e| e.to_string())?;
            for ((i, j), d) in jet.entries() {
                let approx = fd.get(i, j).unwrap();
                if (d - approx).abs() > 10.0 * h * h * (1.0 + d.abs()) {
                    return Err(format!("example {id}, h = {h}, D({i},{j}) = {d} vs {approx}"));
                }
            }
        }
    }
    Ok(())
}
