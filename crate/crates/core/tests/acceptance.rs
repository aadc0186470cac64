//! Acceptance criteria 1-6. Each criterion prints one PASS/FAIL line; run with
//! `cargo test -p ift-ode-core --test acceptance -- --nocapture` to see them.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use ift_ode_core::approx::{ClosedFormSolution, SolutionShape};
use ift_ode_core::builtin::{
    example1, example2ter, example3, example4, run, ExampleConfig, ExampleId, PublishedValue,
};
use ift_ode_core::jet::Tolerances;
use ift_ode_core::numeric::BubbleParams;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn criterion1() -> Outcome {
    let e = example1(&Tolerances::default()).map_err(|e| e.to_string())?;
    let SolutionShape::Exponential { a0, b0, c0, d0 } = e.shape else {
        return Err(format!("shape {:?} is not exponential", e.shape));
    };
    check((a0, b0) == (0.0, 0.0) && (c0 - 1.0).abs() <= 1e-12 && (d0 - 2.0).abs() <= 1e-12, format!("constants {a0} {b0} {c0} {d0}"))?;
    let c = e.constants;
    check((c.a0, c.b0, c.c0, c.d0) == (0.0, 0.0, 1.0, Some(2.0)), format!("printed-formula constants {c:?}"))?;
    let text = e.run.solution.to_expr_power_basis().to_text();
    check(text == "exp(2*x)", format!("solution text `{text}`"))?;
    let residual = e.residual.max_residual.unwrap_or(f64::INFINITY);
    check(residual <= 1e-12, format!("residual {residual:e}"))?;
    Ok(format!("a0=b0=0, c0=1, d0=2, y = {text}, max residual {residual:e} on [-1, 1]"))
}

fn quadratic_coefficients_ok(c: &[f64]) -> Result<(), String> {
    let expected = [1.0 - PI * PI / 8.0, FRAC_PI_2, -0.5];
    check(c.len() == 3, format!("coefficients {c:?}"))?;
    for (got, want) in c.iter().zip(expected) {
        check(rel(*got, want) <= 1e-12, format!("coefficient {got} vs {want}"))?;
    }
    Ok(())
}

fn criterion2() -> Outcome {
    let e = example2ter(&Tolerances::default()).map_err(|e| e.to_string())?;
    let f = &e.run.ode;
    let expected = [((0, 0), 1.0), ((1, 0), 0.0), ((0, 1), 0.0), ((1, 1), 0.0), ((0, 2), -0.5), ((1, 2), 0.0)];
    for ((i, j), want) in expected {
        check((f.a(i, j) - want).abs() <= 1e-12, format!("psi coefficient a{i}{j} = {} vs {want}", f.a(i, j)))?;
    }
    quadratic_coefficients_ok(&e.coefficients)?;
    let err = e.sine_error.max_abs_error;
    check(err <= 0.003, format!("max |u - sin| = {err}"))?;
    Ok(format!("psi-form `{f}`, coefficients {:?}, max |u - sin| = {err:.6} <= 0.003", e.coefficients))
}

fn criterion3() -> Outcome {
    let e = example2ter(&Tolerances::default()).map_err(|e| e.to_string())?;
    let mut y2: Vec<f64> = e.series_branches.iter().map(|b| b.values.get(&2).copied().unwrap_or(f64::NAN)).collect();
    y2.sort_by(f64::total_cmp);
    check(y2.len() == 2 && (y2[0] + 1.0).abs() <= 1e-9 && y2[1].abs() <= 1e-9, format!("y''(pi/2) branches {y2:?}"))?;
    let minus_one = e
        .series_branches
        .iter()
        .find(|b| (b.values[&2] + 1.0).abs() <= 1e-9)
        .ok_or("no branch y'' = -1")?;
    let taylor: Vec<f64> = minus_one.taylor(2).into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let as_solution = ClosedFormSolution {
        x0: FRAC_PI_2,
        p0: 1.0,
        q0: 0.0,
        poly: taylor,
        amplitude: 0.0,
        rate: 0.0,
        forcing: Vec::new(),
    };
    quadratic_coefficients_ok(&as_solution.poly_in_x())?;
    let eq = &e.equivalence;
    let best = eq.best().ok_or("no branches compared")?;
    let worst_delta = best.deltas.iter().map(|d| d.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    check(eq.equivalent() && worst_delta <= 1e-9, format!("equivalence deltas {:?}", best.deltas))?;
    Ok(format!("y''(pi/2) in {y2:?}, branch -1 gives the quadratic, max delta {worst_delta:e}"))
}

fn criterion4() -> Outcome {
    let e = example3(&Tolerances::default()).map_err(|e| e.to_string())?;
    let s3 = 3f64.sqrt();
    let jet = &e.run.jet;
    for ((i, j), want) in [((1, 0), -1.5), ((2, 0), 1.5 * s3), ((0, 1), -2.0 * s3)] {
        check(rel(jet.d(i, j), want) <= 1e-10, format!("D({i},{j}) = {} vs {want}", jet.d(i, j)))?;
    }
    check((jet.d(3, 0) - 1.5).abs() <= 1e-10, format!("D(3,0) = {}", jet.d(3, 0)))?;
    check((e.explicit_d30 - 1.5).abs() <= 1e-10, format!("explicit oracle {}", e.explicit_d30))?;
    let flagged: Vec<&PublishedValue> = e.published.iter().filter(|p| p.entry == (3, 0)).collect();
    check(flagged.len() == 1 && (flagged[0].value - 1.5 * s3).abs() <= 1e-12, "published D(3,0) not flagged")?;
    let mut config = ExampleConfig::new(ExampleId::Three);
    config.paper_variant = true;
    let report = run(&config).map_err(|e| e.to_string())?;
    check(
        report.notes.iter().any(|n| n.contains("D(3,0)") && n.contains("3*sqrt(3)/2")),
        "report has no flagged note for D(3,0)",
    )?;
    let expected = [1.0, s3 / 2.0, 5.0 / 12.0, 1.0 / (4.0 * s3)];
    for (label, got) in [("approximation", &e.solution_expansion), ("published variant", &e.published_solution_expansion)] {
        for (k, (g, w)) in got.iter().zip(expected).enumerate() {
            check((g - w).abs() <= 1e-9, format!("{label} expansion coefficient {k}: {g} vs {w}"))?;
        }
    }
    let cubic = e.exact_expansion[3];
    check((cubic - 2.0 / (9.0 * s3)).abs() <= 1e-9, format!("exact cubic coefficient {cubic}"))?;
    Ok(format!(
        "D(1,0), D(2,0), D(0,1) as published; D(3,0) = {} flagged against 3*sqrt(3)/2; expansion {:?}; exact cubic {cubic:.12}",
        jet.d(3, 0),
        e.solution_expansion
    ))
}

fn criterion5() -> Outcome {
    let params = BubbleParams::default();
    let r0 = params.r0;
    let e = example4(&params, &Tolerances::default()).map_err(|e| e.to_string())?;
    let f = &e.run.ode;
    for ((i, j), want) in [((0, 0), r0), ((0, 1), 0.0), ((0, 2), -0.5 * r0), ((1, 0), 0.0), ((1, 1), 0.0), ((1, 2), 0.0)] {
        check((f.a(i, j) - want).abs() <= 1e-12, format!("psi coefficient a{i}{j} = {} vs {want}", f.a(i, j)))?;
    }
    let sol = e.run.solution.primary();
    let c = sol.poly_in_x();
    check(
        c.len() == 3 && (c[0] - r0).abs() <= 1e-12 && c[1].abs() <= 1e-12 && (c[2] + 1.0 / (2.0 * r0)).abs() <= 1e-12,
        format!("solution coefficients {c:?}"),
    )?;
    let tc = e.collapse_time;
    check(rel(tc, 2f64.sqrt() * r0) <= 1e-12, format!("t_c = {tc}"))?;
    check(format!("{tc:.7}") == "0.1414214", format!("t_c rounds to {tc:.7}"))?;
    let numeric = e.numeric.collapse_time;
    check((e.oracle_collapse_time - 0.091468).abs() <= 5e-6, format!("energy-integral t_c = {}", e.oracle_collapse_time))?;
    check(rel(numeric, e.oracle_collapse_time) <= 0.01, format!("numeric t_c = {numeric}"))?;
    let agreement = e.early_agreement.max_abs_error;
    check(agreement <= 0.05 * r0, format!("max |approx - numeric| = {agreement}"))?;
    Ok(format!(
        "y = R0 - t^2/(2 R0), t_c = {tc:.7}, numeric collapse {numeric:.6} (oracle {:.6}), early error {:.4} R0",
        e.oracle_collapse_time,
        agreement / r0
    ))
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn criterion6() -> Outcome {
    runner(200)
        .run(&(common::tree(), common::binding(), 0usize..3), |(e, b, which)| {
            common::derivative_matches_central_difference(&e, b, which)
        })
        .map_err(|e| format!("symbolic vs finite-difference derivative: {e}"))?;
    runner(50)
        .run(&(common::explicit_rhs(), -1.0f64..1.0, -1.0f64..1.0, 0usize..=2, 0usize..=1), |(g, x0, p0, m, n)| {
            common::jet_of_explicit_equation(&g, x0, p0, m, n)
        })
        .map_err(|e| format!("jet vs explicit-function oracle: {e}"))?;
    common::finite_differences_agree_on_examples()?;
    for (h, ratio) in common::rk4_ratios() {
        check((12.0..=20.0).contains(&ratio), format!("RK4 error ratio {ratio} at h = {h}"))?;
    }
    runner(4)
        .run(&(0.05f64..2.0, 0.5f64..3.0, 0.5f64..2.0), |(r0, p_f, rho)| {
            common::bubble_energy_is_conserved(BubbleParams { r0, p_f, rho })
        })
        .map_err(|e| format!("bubble first integral: {e}"))?;
    runner(100)
        .run(&(common::explicit_rhs(), -1.0f64..1.0, -1.0f64..1.0, 1usize..=3), |(g, x0, p0, m)| {
            common::normal_form_solution_is_exact(&g, x0, p0, m)
        })
        .map_err(|e| format!("closed-form base conditions: {e}"))?;
    let tol = Tolerances::default();
    let mut solutions = vec![example1(&tol).unwrap().run.solution, example3(&tol).unwrap().run.solution];
    solutions.push(example2ter(&tol).unwrap().run.solution.primary().clone());
    solutions.push(example4(&BubbleParams::default(), &tol).unwrap().run.solution.primary().clone());
    for s in &solutions {
        check(s.satisfies_base(1e-10), format!("{s} misses a base condition"))?;
    }
    Ok("derivatives on 200 trees, jets on 50 explicit F, finite-difference jets, RK4 order, bubble drift, base conditions".into())
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 6] = [
        ("1 example 1 exponential solution", criterion1),
        ("2 example 2 ter quadratic", criterion2),
        ("3 series method branches", criterion3),
        ("4 example 3 jet and expansions", criterion4),
        ("5 example 4 bubble collapse", criterion5),
        ("6 property suites", criterion6),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                println!("FAIL criterion {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

