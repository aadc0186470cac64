//! The worked examples: equations, base points, pipelines and reports.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::approx::{
    build_normal_form, build_psi_form, collapse_time, solve_normal_form, solve_psi_form, ClosedFormSolution,
    InitialCondition, NormalForm, PsiForm, PsiSolution, SolutionShape,
};
use crate::expr::{parse, Env, Expr, Var};
use crate::jet::{
    check_base_point, implicit_jet, jet_closed_form_check, solve_missing_coordinate, BasePoint, ClosedFormReport,
    ImplicitJet, PartialPoint, SolveFor, Tolerances,
};
use crate::numeric::csv::{COMPARISON_HEADER, RADIUS_HEADER, RESIDUAL_HEADER};
use crate::numeric::{
    collapse_time_oracle, compare_trajectories, integrate_bubble, residual_profile, BubbleParams, BubbleRun,
    ExactSolution, ValidationReport,
};
use crate::report::{list, num, num_approx, CsvTable, Error, Report, Section};
use crate::series::{compare_with_implicit, expand_residual, solve_branches, DerivativeBranch, EquivalenceReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExampleId {
    One,
    OneBis,
    Two,
    TwoBis,
    TwoTer,
    Three,
    Four,
}

impl ExampleId {
    pub const ALL: [ExampleId; 7] = [
        ExampleId::One,
        ExampleId::OneBis,
        ExampleId::Two,
        ExampleId::TwoBis,
        ExampleId::TwoTer,
        ExampleId::Three,
        ExampleId::Four,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExampleId::One => "1",
            ExampleId::OneBis => "1bis",
            ExampleId::Two => "2",
            ExampleId::TwoBis => "2bis",
            ExampleId::TwoTer => "2ter",
            ExampleId::Three => "3",
            ExampleId::Four => "4",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.name() == s.trim())
            .ok_or_else(|| format!("unknown example `{s}` (expected one of 1, 1bis, 2, 2bis, 2ter, 3, 4)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExampleConfig {
    pub id: ExampleId,
    pub bubble: BubbleParams,
    /// Also build the variant that uses published (uncorrected) jet values.
    pub paper_variant: bool,
    pub tol: Tolerances,
}

impl ExampleConfig {
    pub fn new(id: ExampleId) -> ExampleConfig {
        ExampleConfig { id, bubble: BubbleParams::default(), paper_variant: false, tol: Tolerances::default() }
    }
}

pub const EXAMPLE1_ODE: &str = "2*p - q";
pub const EXAMPLE2_ODE: &str = "p^2 + q^2 - 1";
pub const EXAMPLE3_ODE: &str = "-3*sin(x)*p^(4/3) - q";
/// General integral of the cubic-forcing example with `c = -9/2`.
pub const EXAMPLE3_EXACT: &str = "-27/(-9/2 + 3*cos(x))^3";
/// `q` solved explicitly from the cubic-forcing example.
pub const EXAMPLE3_EXPLICIT: &str = "-3*sin(x)*p^(4/3)";

fn sqrt3() -> f64 {
    3f64.sqrt()
}

pub fn example3_base_point() -> [f64; 3] {
    [FRAC_PI_3, 1.0, -1.5 * sqrt3()]
}

/// `F(t, p, q) = (2/3)(p_f/rho) R0^3 - ((2/3)(p_f/rho) + q^2) p^3`.
pub fn bubble_equation(params: &BubbleParams) -> Expr {
    let k = Expr::from_f64(params.drive());
    let r0 = Expr::from_f64(params.r0);
    let two_thirds = Expr::rational(2, 3);
    let q2 = Expr::Var(Var::Q).powi(2);
    (two_thirds.clone() * k.clone() * r0.powi(3) - (two_thirds * k + q2) * Expr::Var(Var::P).powi(3)).simplify()
}

fn parse_known(text: &str) -> Expr {
    parse(text).expect("built-in expression parses")
}

// ---------------------------------------------------------------------------
// published values

/// A jet entry whose published value differs from the computed one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublishedValue {
    pub entry: (usize, usize),
    pub value: f64,
    pub text: &'static str,
    pub note: &'static str,
}

struct PublishedCase {
    equation: &'static str,
    point: fn() -> [f64; 3],
    mode: SolveFor,
    values: fn() -> Vec<PublishedValue>,
}

const PUBLISHED: &[PublishedCase] = &[PublishedCase {
    equation: EXAMPLE3_ODE,
    point: example3_base_point,
    mode: SolveFor::Q,
    values: || {
        vec![PublishedValue {
            entry: (3, 0),
            value: 1.5 * 3f64.sqrt(),
            text: "3*sqrt(3)/2",
            note: "published third x-derivative; direct differentiation of q = -3 sin(x) p^(4/3) gives 3/2",
        }]
    },
}];

/// Compares two equations on a fixed cloud of points around `center`.
fn same_equation(a: &Expr, b: &Expr, center: [f64; 3]) -> bool {
    let offsets = [-0.11, 0.0, 0.07];
    for dx in offsets {
        for dp in offsets {
            for dq in [-0.05, 0.0, 0.13] {
                let env = Env::xpq(center[0] + dx, center[1] + dp, center[2] + dq);
                match (a.evaluate(&env), b.evaluate(&env)) {
                    (Ok(u), Ok(v)) if (u - v).abs() <= 1e-12 * (1.0 + u.abs().max(v.abs())) => {}
                    (Err(_), Err(_)) => {}
                    _ => return false,
                }
            }
        }
    }
    true
}

/// Published jet values known for this equation and base point, if any.
pub fn published_overrides(f: &Expr, base: &BasePoint) -> Vec<PublishedValue> {
    let f = f.with_independent_x();
    let point = [base.x0, base.p0, base.q0];
    PUBLISHED
        .iter()
        .filter(|case| case.mode == base.mode)
        .filter(|case| {
            let p = (case.point)();
            p.iter().zip(point).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
        })
        .filter(|case| same_equation(&f, &parse_known(case.equation), point))
        .flat_map(|case| (case.values)())
        .collect()
}

/// The jet with every applicable published value substituted.
pub fn apply_published(jet: &ImplicitJet, values: &[PublishedValue]) -> ImplicitJet {
    values.iter().fold(jet.clone(), |j, v| match j.get(v.entry.0, v.entry.1) {
        Some(_) => j.with_entry(v.entry.0, v.entry.1, v.value),
        None => j,
    })
}

// ---------------------------------------------------------------------------
// first-order constants

/// Constants of the first-order local solution written in powers of `x`:
/// `a0 + b0 x + c0 x^2` when `dF/dp = 0`, else `a0 + b0 x + c exp(d0 x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstOrderConstants {
    pub fx: f64,
    pub fp: f64,
    pub fq: f64,
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub d0: Option<f64>,
}

/// The textbook closed form for the first-order normal form, straight from
/// the partials of `F` at the base point.
pub fn first_order_constants(f: &Expr, base: &BasePoint) -> Result<FirstOrderConstants, Error> {
    let f = f.with_independent_x();
    let env = base.env();
    let fx = f.differentiate(Var::X).evaluate(&env)?;
    let fp = f.differentiate(Var::P).evaluate(&env)?;
    let fq = f.differentiate(Var::Q).evaluate(&env)?;
    let (x0, p0, q0) = (base.x0, base.p0, base.q0);
    if fp == 0.0 {
        let b0 = q0 + fx / fq * x0;
        let c0 = -0.5 * fx / fq;
        let a0 = p0 - b0 * x0 - c0 * x0 * x0;
        return Ok(FirstOrderConstants { fx, fp, fq, a0, b0, c0, d0: None });
    }
    let a0 = p0 + fx * fq / (fp * fp) + (fx * x0 + fq * q0) / fp;
    let b0 = -fx / fp;
    let c = -(fx + fp * q0) * fq * (fp / fq * x0).exp() / (fp * fp);
    Ok(FirstOrderConstants { fx, fp, fq, a0, b0, c0: c, d0: Some(-fp / fq) })
}

impl FirstOrderConstants {
    pub fn value(&self, x: f64) -> f64 {
        match self.d0 {
            None => self.a0 + self.b0 * x + self.c0 * x * x,
            Some(d0) => self.a0 + self.b0 * x + self.c0 * (d0 * x).exp(),
        }
    }
}

// ---------------------------------------------------------------------------
// typed pipelines

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalFormRun {
    pub base: BasePoint,
    pub jet: ImplicitJet,
    pub ode: NormalForm,
    pub solution: ClosedFormSolution,
}

pub fn normal_form_pipeline(f: &Expr, base: &BasePoint, m: usize) -> Result<NormalFormRun, Error> {
    let jet = implicit_jet(f, base, (m, 1))?;
    let ode = build_normal_form(&jet)?;
    let solution = solve_normal_form(&ode);
    Ok(NormalFormRun { base: *base, jet, ode, solution })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiFormRun {
    pub base: BasePoint,
    pub jet: ImplicitJet,
    pub ode: PsiForm,
    pub solution: PsiSolution,
}

pub fn psi_form_pipeline(
    f: &Expr,
    base: &BasePoint,
    orders: (usize, usize),
    initial: InitialCondition,
) -> Result<PsiFormRun, Error> {
    let jet = implicit_jet(f, base, orders)?;
    let ode = build_psi_form(&jet)?;
    let solution = solve_psi_form(&ode, initial)?;
    Ok(PsiFormRun { base: *base, jet, ode, solution })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example1 {
    pub run: NormalFormRun,
    pub shape: SolutionShape,
    pub constants: FirstOrderConstants,
    pub residual: ValidationReport,
}

pub fn example1(tol: &Tolerances) -> Result<Example1, Error> {
    let f = parse_known(EXAMPLE1_ODE);
    let q0 = solve_missing_coordinate(&f, PartialPoint { x: Some(0.0), p: Some(1.0), q: None }, (-10.0, 10.0), tol.residual)?;
    let base = check_base_point(&f, [0.0, 1.0, q0], SolveFor::Q, tol)?;
    let run = normal_form_pipeline(&f, &base, 1)?;
    let shape = run.solution.shape();
    let constants = first_order_constants(&f, &base)?;
    let residual = residual_profile(&f, &run.solution, (-1.0, 1.0), 101)?;
    Ok(Example1 { run, shape, constants, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example2 {
    pub base: BasePoint,
    /// Why the normal form is not available at this base point.
    pub normal_form_rejection: String,
    pub psi_jet: ImplicitJet,
    pub explicit_psi_jet: Vec<f64>,
    pub sine_residual: ValidationReport,
}

pub fn example2(tol: &Tolerances) -> Result<Example2, Error> {
    let f = parse_known(EXAMPLE2_ODE);
    let point = [FRAC_PI_2, 1.0, 0.0];
    let normal_form_rejection = match check_base_point(&f, point, SolveFor::Q, tol) {
        Ok(_) => "accepted".to_string(),
        Err(e) => e.to_string(),
    };
    let base = check_base_point(&f, point, SolveFor::P, tol)?;
    let psi_jet = implicit_jet(&f, &base, (1, 2))?;
    let explicit = parse_known("sqrt(1 - q^2)");
    let env = Env::new().with(Var::Q, 0.0);
    let d1 = explicit.differentiate(Var::Q);
    let d2 = d1.differentiate(Var::Q);
    let explicit_psi_jet = vec![explicit.evaluate(&env)?, d1.evaluate(&env)?, d2.evaluate(&env)?];
    let sine = ExactSolution::new(parse_known("sin(x)"));
    let sine_residual = residual_profile(&f, &sine, (0.0, PI), 101)?;
    Ok(Example2 { base, normal_form_rejection, psi_jet, explicit_psi_jet, sine_residual })
}

fn sine_window() -> (f64, f64) {
    (FRAC_PI_2 - 0.5, FRAC_PI_2 + 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example2Bis {
    pub run: PsiFormRun,
    pub shape: SolutionShape,
    pub sine_error: ValidationReport,
}

pub fn example2bis(tol: &Tolerances) -> Result<Example2Bis, Error> {
    let f = parse_known(EXAMPLE2_ODE);
    let base = check_base_point(&f, [FRAC_PI_2, 1.0, 0.0], SolveFor::P, tol)?;
    let run = psi_form_pipeline(&f, &base, (1, 1), InitialCondition::Slope)?;
    let shape = run.solution.primary().shape();
    let sine = ExactSolution::new(parse_known("sin(x)"));
    let sine_error = compare_trajectories(run.solution.primary(), &sine, sine_window(), 101, Some(&f))?;
    Ok(Example2Bis { run, shape, sine_error })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example2Ter {
    pub run: PsiFormRun,
    /// Primary solution in powers of `x`.
    pub coefficients: Vec<f64>,
    pub sine_error: ValidationReport,
    pub series_equations: Vec<String>,
    pub series_branches: Vec<DerivativeBranch>,
    pub equivalence: EquivalenceReport,
}

pub fn example2ter(tol: &Tolerances) -> Result<Example2Ter, Error> {
    let f = parse_known(EXAMPLE2_ODE);
    let base = check_base_point(&f, [FRAC_PI_2, 1.0, 0.0], SolveFor::P, tol)?;
    let run = psi_form_pipeline(&f, &base, (1, 2), InitialCondition::Slope)?;
    let coefficients = run.solution.primary().poly_in_x();
    let sine = ExactSolution::new(parse_known("sin(x)"));
    let sine_error = compare_trajectories(run.solution.primary(), &sine, sine_window(), 101, Some(&f))?;
    let equations = expand_residual(&f, FRAC_PI_2, 2)?;
    let series_branches = solve_branches(&equations, &[(0, 1.0), (1, 0.0)].into_iter().collect())?;
    let equivalence = compare_with_implicit(&f, &base, 2)?;
    Ok(Example2Ter {
        run,
        coefficients,
        sine_error,
        series_equations: equations.iter().map(|e| e.coefficient.to_text()).collect(),
        series_branches,
        equivalence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example3 {
    pub run: NormalFormRun,
    pub closed_form: ClosedFormReport,
    /// Third x-derivative of the explicit `q = -3 sin(x) p^(4/3)`.
    pub explicit_d30: f64,
    pub published: Vec<PublishedValue>,
    pub published_ode: NormalForm,
    pub published_solution: ClosedFormSolution,
    /// Taylor coefficients of the local solution in powers of `pi - 3x`.
    pub solution_expansion: Vec<f64>,
    pub published_solution_expansion: Vec<f64>,
    /// Same for the exact solution.
    pub exact_expansion: Vec<f64>,
    pub figure: ValidationReport,
}

/// Coefficients in powers of `(x - x0)` rewritten in powers of `pi - 3x = -3(x - pi/3)`.
fn in_powers_of_pi_minus_3x(taylor: &[f64]) -> Vec<f64> {
    taylor.iter().enumerate().map(|(k, c)| c * (-1.0f64 / 3.0).powi(k as i32)).collect()
}

fn derivatives_at(e: &Expr, x: f64, order: usize) -> Result<Vec<f64>, Error> {
    let env = Env::new().with(Var::X, x);
    let mut out = Vec::with_capacity(order + 1);
    let mut d = e.clone();
    for k in 0..=order {
        if k > 0 {
            d = d.differentiate(Var::X);
        }
        out.push(d.evaluate(&env)?);
    }
    Ok(out)
}

pub fn example3(tol: &Tolerances) -> Result<Example3, Error> {
    let f = parse_known(EXAMPLE3_ODE);
    let base = check_base_point(&f, example3_base_point(), SolveFor::Q, tol)?;
    let run = normal_form_pipeline(&f, &base, 3)?;
    let closed_form = jet_closed_form_check(&f, &base)?;
    let explicit = parse_known(EXAMPLE3_EXPLICIT).substitute(Var::P, &Expr::one());
    let explicit_d30 = derivatives_at(&explicit, FRAC_PI_3, 3)?[3];
    let published = published_overrides(&f, &base);
    let published_jet = apply_published(&run.jet, &published);
    let published_ode = build_normal_form(&published_jet)?;
    let published_solution = solve_normal_form(&published_ode);

    let solution_expansion = in_powers_of_pi_minus_3x(&run.solution.taylor(3));
    let published_solution_expansion = in_powers_of_pi_minus_3x(&published_solution.taylor(3));
    let exact = parse_known(EXAMPLE3_EXACT);
    let exact_taylor: Vec<f64> = derivatives_at(&exact, FRAC_PI_3, 3)?
        .iter()
        .enumerate()
        .map(|(k, d)| d / crate::expr::factorial(k))
        .collect();
    let exact_expansion = in_powers_of_pi_minus_3x(&exact_taylor);
    let figure = compare_trajectories(
        &run.solution,
        &ExactSolution::new(exact),
        (FRAC_PI_3 - 1.0, FRAC_PI_3 + 1.0),
        201,
        Some(&f),
    )?;
    Ok(Example3 {
        run,
        closed_form,
        explicit_d30,
        published,
        published_ode,
        published_solution,
        solution_expansion,
        published_solution_expansion,
        exact_expansion,
        figure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example4 {
    pub params: BubbleParams,
    pub equation: String,
    pub run: PsiFormRun,
    pub collapse_time: f64,
    pub oracle_collapse_time: f64,
    pub numeric: BubbleRun,
    /// `|approx - numeric|` on `[0, numeric collapse / 2]`.
    pub early_agreement: ValidationReport,
    /// Both curves up to the last uniform node of the numeric run.
    pub figure: ValidationReport,
}

pub fn example4(params: &BubbleParams, tol: &Tolerances) -> Result<Example4, Error> {
    params.validate()?;
    let f = bubble_equation(params);
    let base = check_base_point(&f, [0.0, params.r0, 0.0], SolveFor::P, tol)?;
    let run = psi_form_pipeline(&f, &base, (1, 2), InitialCondition::Value)?;
    let tc = collapse_time(run.solution.primary())?;
    let numeric = integrate_bubble(params, params.default_step(), 1e-3)?;
    let approx = run.solution.primary();
    let early_agreement =
        compare_trajectories(approx, &numeric.trajectory, (0.0, 0.5 * numeric.collapse_time), 201, None)?;
    let figure = compare_trajectories(approx, &numeric.trajectory, (0.0, numeric.trajectory.last().x), 201, None)?;
    Ok(Example4 {
        params: *params,
        equation: f.to_text(),
        run,
        collapse_time: tc,
        oracle_collapse_time: collapse_time_oracle(params),
        numeric,
        early_agreement,
        figure,
    })
}

/// Inputs of an example as a plain problem, for the generic commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub ode: Expr,
    pub point: [f64; 3],
    pub mode: SolveFor,
    pub orders: (usize, usize),
    pub condition: InitialCondition,
    /// Known exact solution `y(x)`, if any.
    pub exact: Option<Expr>,
}

pub fn problem(id: ExampleId, params: &BubbleParams) -> Problem {
    let circle = |orders| Problem {
        ode: parse_known(EXAMPLE2_ODE),
        point: [FRAC_PI_2, 1.0, 0.0],
        mode: SolveFor::P,
        orders,
        condition: InitialCondition::Slope,
        exact: Some(parse_known("sin(x)")),
    };
    match id {
        ExampleId::One | ExampleId::OneBis => Problem {
            ode: parse_known(EXAMPLE1_ODE),
            point: [0.0, 1.0, 2.0],
            mode: SolveFor::Q,
            orders: (1, 1),
            condition: InitialCondition::Slope,
            exact: Some(parse_known("exp(2*x)")),
        },
        ExampleId::Two | ExampleId::TwoTer => circle((1, 2)),
        ExampleId::TwoBis => circle((1, 1)),
        ExampleId::Three => Problem {
            ode: parse_known(EXAMPLE3_ODE),
            point: example3_base_point(),
            mode: SolveFor::Q,
            orders: (3, 1),
            condition: InitialCondition::Slope,
            exact: Some(parse_known(EXAMPLE3_EXACT)),
        },
        ExampleId::Four => Problem {
            ode: bubble_equation(params),
            point: [0.0, params.r0, 0.0],
            mode: SolveFor::P,
            orders: (1, 2),
            condition: InitialCondition::Value,
            exact: None,
        },
    }
}

// ---------------------------------------------------------------------------
// report sections

pub fn base_section(f: &Expr, base: &BasePoint) -> Section {
    Section::new("base point")
        .line("F(x,p,q)", f.to_text())
        .line("T0 = (x0, p0, q0)", format!("({}, {}, {})", num(base.x0), num(base.p0), num(base.q0)))
        .line("solve for", match base.mode {
            SolveFor::Q => "q = phi(x, p)",
            SolveFor::P => "p = psi(x, q)",
        })
        .line("F(T0)", num(base.residual))
        .line(format!("dF/d{}(T0)", base.mode.solved_var()), num(base.pivot))
}

pub fn jet_section(jet: &ImplicitJet) -> Section {
    let mut s = Section::new(format!("jet of order ({}, {})", jet.orders.0, jet.orders.1));
    for ((i, j), v) in jet.entries() {
        s.push(format!("D({i},{j})"), num(v));
    }
    s
}

pub fn solution_lines(s: &mut Section, sol: &ClosedFormSolution) {
    s.push("y(x), centered", sol.to_expr().to_text());
    s.push("y(x), powers of x", sol.to_expr_power_basis().to_text());
    match sol.shape() {
        SolutionShape::Line { a0, b0 } => s.push("shape a0 + b0 x", format!("a0 = {}, b0 = {}", num(a0), num(b0))),
        SolutionShape::Quadratic { a0, b0, c0 } => {
            s.push("shape a0 + b0 x + c0 x^2", format!("a0 = {}, b0 = {}, c0 = {}", num(a0), num(b0), num(c0)))
        }
        SolutionShape::Exponential { a0, b0, c0, d0 } => s.push(
            "shape a0 + b0 x + c0 exp(d0 x)",
            format!("a0 = {}, b0 = {}, c0 = {}, d0 = {}", num(a0), num(b0), num(c0), num(d0)),
        ),
        SolutionShape::Other => s.push("polynomial part (powers of x)", list(&sol.poly_in_x())),
    }
    let (ev, es) = sol.base_errors();
    s.push("|y(x0) - p0|, |y'(x0) - q0|", format!("{}, {}", num(ev), num(es)));
}

pub fn psi_solution_section(sol: &PsiSolution) -> Section {
    let mut s = Section::new("closed-form solution");
    solution_lines(&mut s, sol.primary());
    for (k, b) in sol.branches.iter().enumerate().skip(1) {
        let kind = if b.constant { "constant branch" } else { "other branch" };
        let base = if b.satisfies_base { "meets both base conditions" } else { "misses a base condition" };
        s.push(format!("{kind} {k}"), format!("y = {} ({base})", b.solution.to_expr_power_basis().to_text()));
    }
    s
}

fn validation_section(title: &str, r: &ValidationReport, what: &str) -> Section {
    let mut s = Section::new(title)
        .line("interval", format!("[{}, {}]", num(r.interval.0), num(r.interval.1)))
        .line("samples", r.samples)
        .line(format!("max {what}"), num(r.max_abs_error))
        .line(format!("mean {what}"), num(r.mean_abs_error));
    if let Some(res) = r.max_residual.filter(|_| what != "|F|") {
        s.push("max |F(x, u, u')|", num(res));
    }
    if !r.excluded.is_empty() {
        s.push("excluded samples (domain)", r.excluded.len());
    }
    s
}

// ---------------------------------------------------------------------------
// reports

pub fn run(config: &ExampleConfig) -> Result<Report, Error> {
    match config.id {
        ExampleId::One => report1(&example1(&config.tol)?),
        ExampleId::OneBis => report1bis(&example1(&config.tol)?),
        ExampleId::Two => report2(&example2(&config.tol)?),
        ExampleId::TwoBis => report2bis(&example2bis(&config.tol)?),
        ExampleId::TwoTer => report2ter(&example2ter(&config.tol)?),
        ExampleId::Three => report3(&example3(&config.tol)?, config.paper_variant),
        ExampleId::Four => report4(&example4(&config.bubble, &config.tol)?),
    }
}

fn report1(e: &Example1) -> Result<Report, Error> {
    let f = parse_known(EXAMPLE1_ODE);
    let mut r = Report::new("example 1: 2 y - y' = 0");
    r.sections.push(base_section(&f, &e.run.base));
    r.sections.push(jet_section(&e.run.jet));
    r.sections.push(Section::new("normal form").line("local ODE", &e.run.ode).line("explicit phi(x, p)", "2*p"));
    let mut s = Section::new("closed-form solution");
    solution_lines(&mut s, &e.run.solution);
    s.push("integration constant c", num(e.run.solution.c0()));
    r.sections.push(s);
    r.sections.push(validation_section("residual against F", &e.residual, "|F|"));
    r.csv = Some(CsvTable { header: RESIDUAL_HEADER, rows: e.residual.csv_rows() });
    Ok(r)
}

fn report1bis(e: &Example1) -> Result<Report, Error> {
    let mut r = report1(e)?;
    r.title = "example 1 bis: first-order constants".into();
    let c = &e.constants;
    let mut s = Section::new("first-order constants from the partials")
        .line("dF/dx, dF/dp, dF/dq", format!("{}, {}, {}", num(c.fx), num(c.fp), num(c.fq)))
        .line("a0", num(c.a0))
        .line("b0", num(c.b0))
        .line("c0", num(c.c0));
    s.push("d0", c.d0.map_or("none (quadratic case)".into(), num));
    let worst = (0..=20)
        .map(|k| -1.0 + 0.1 * k as f64)
        .map(|x| (c.value(x) - e.run.solution.value(x)).abs())
        .fold(0.0, f64::max);
    s.push("max |closed form - solver| on [-1, 1]", num(worst));
    r.sections.insert(4, s);
    Ok(r)
}

fn report2(e: &Example2) -> Result<Report, Error> {
    let f = parse_known(EXAMPLE2_ODE);
    let mut r = Report::new("example 2: y'^2 + y^2 - 1 = 0");
    r.sections.push(base_section(&f, &e.base));
    r.sections.push(Section::new("normal form at T0").line("q = phi(x, p)", &e.normal_form_rejection));
    r.sections.push(jet_section(&e.psi_jet));
    r.sections.push(
        Section::new("explicit psi(x, q) = sqrt(1 - q^2)")
            .line("psi, dpsi/dq, d2psi/dq2 at q = 0", list(&e.explicit_psi_jet)),
    );
    let mut s = validation_section("u(x) = sin(x) against F", &e.sine_residual, "|F|");
    s.push("u(pi/2), u'(pi/2)", "1, 0");
    r.sections.push(s);
    r.csv = Some(CsvTable { header: RESIDUAL_HEADER, rows: e.sine_residual.csv_rows() });
    Ok(r)
}

fn report2bis(e: &Example2Bis) -> Result<Report, Error> {
    let f = parse_known(EXAMPLE2_ODE);
    let mut r = Report::new("example 2 bis: first-order psi-form");
    r.sections.push(base_section(&f, &e.run.base));
    r.sections.push(jet_section(&e.run.jet));
    r.sections.push(Section::new("psi-form").line("local ODE", &e.run.ode));
    r.sections.push(psi_solution_section(&e.run.solution));
    r.sections.push(validation_section("comparison with sin(x)", &e.sine_error, "|u - sin|"));
    r.csv = Some(CsvTable { header: COMPARISON_HEADER, rows: e.sine_error.csv_rows() });
    r.notes.push("the published constants for this case are a0 = 1, b0 = 0, c0 = 0, d0 = 2; with c0 = 0 the rate d0 plays no role".into());
    r.notes.push("the first-order psi-form only gives y = 1; the order (1, 2) form is needed (example 2ter)".into());
    Ok(r)
}

fn report2ter(e: &Example2Ter) -> Result<Report, Error> {
    let f = parse_known(EXAMPLE2_ODE);
    let mut r = Report::new("example 2 ter: order (1, 2) psi-form");
    r.sections.push(base_section(&f, &e.run.base));
    r.sections.push(jet_section(&e.run.jet));
    r.sections.push(Section::new("psi-form").line("local ODE", &e.run.ode));
    let mut s = psi_solution_section(&e.run.solution);
    let c = &e.coefficients;
    s.push("coefficients of 1, x, x^2", list(c));
    s.push("1 - pi^2/8, pi/2, -1/2", list(&[1.0 - PI * PI / 8.0, FRAC_PI_2, -0.5]));
    r.sections.push(s);
    r.sections.push(validation_section("comparison with sin(x)", &e.sine_error, "|u - sin|"));
    r.csv = Some(CsvTable { header: COMPARISON_HEADER, rows: e.sine_error.csv_rows() });

    let mut s = Section::new("series expansion method");
    for (k, eq) in e.series_equations.iter().enumerate() {
        s.push(format!("coefficient of (x - pi/2)^{k}"), format!("{eq} = 0"));
    }
    let mut y2: Vec<f64> = e.series_branches.iter().filter_map(|b| b.values.get(&2).copied()).collect();
    y2.sort_by(f64::total_cmp);
    s.push("branches for y''(pi/2)", list(&y2));
    for cmp in &e.equivalence.branches {
        let t: Vec<f64> = cmp.taylor.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        s.push(
            format!("branch y''(pi/2) = {}", num(cmp.branch.values.get(&2).copied().unwrap_or(f64::NAN))),
            format!("taylor {} max delta {} match {}", list(&t), num(cmp.max_delta), cmp.matches),
        );
    }
    s.push("implicit-method taylor", list(&e.equivalence.implicit_taylor));
    s.push("equivalent", e.equivalence.equivalent());
    r.sections.push(s);
    Ok(r)
}

fn expansion_text(c: &[f64]) -> String {
    format!(
        "{} + {}*(pi - 3*x) + {}*(pi - 3*x)^2 + {}*(pi - 3*x)^3",
        num(c[0]),
        num(c[1]),
        num(c[2]),
        num(c[3])
    )
}

fn report3(e: &Example3, paper_variant: bool) -> Result<Report, Error> {
    let f = parse_known(EXAMPLE3_ODE);
    let mut r = Report::new("example 3: y' = -3 sin(x) y^(4/3)");
    r.sections.push(base_section(&f, &e.run.base));
    let mut jet = jet_section(&e.run.jet);
    jet.push("3*sqrt(3)/2, -2*sqrt(3)", format!("{}, {}", num(1.5 * sqrt3()), num(-2.0 * sqrt3())));
    jet.push("explicit d3phi/dx3", num(e.explicit_d30));
    r.sections.push(jet);
    let mut cf = Section::new("closed-form jet formulas");
    for entry in &e.closed_form.entries {
        cf.push(entry.label.clone(), format!("{} (jet {}, delta {})", num(entry.closed_form), num(entry.jet), num(entry.abs_delta)));
    }
    r.sections.push(cf);

    r.sections.push(Section::new("normal form").line("local ODE", &e.run.ode).line("forcing coefficients", list(&e.run.ode.forcing)));
    let mut s = Section::new("closed-form solution");
    solution_lines(&mut s, &e.run.solution);
    s.push("rate", num(e.run.solution.rate));
    s.push("third-order expansion", expansion_text(&e.solution_expansion));
    s.push("sqrt(3)/2, 5/12, 1/(4*sqrt(3))", list(&[sqrt3() / 2.0, 5.0 / 12.0, 1.0 / (4.0 * sqrt3())]));
    r.sections.push(s);
    r.sections.push(
        Section::new("exact solution")
            .line("y(x)", EXAMPLE3_EXACT)
            .line("third-order expansion", expansion_text(&e.exact_expansion))
            .line("2/(9*sqrt(3))", num(2.0 / (9.0 * sqrt3()))),
    );
    r.sections.push(validation_section("approximated vs exact", &e.figure, "|approx - exact|"));
    if paper_variant {
        let mut s = Section::new("published variant").line("local ODE", &e.published_ode);
        for p in &e.published {
            s.push(format!("D({},{}) used", p.entry.0, p.entry.1), format!("{} = {}", p.text, num(p.value)));
        }
        solution_lines(&mut s, &e.published_solution);
        s.push("third-order expansion", expansion_text(&e.published_solution_expansion));
        r.sections.push(s);
    }
    for p in &e.published {
        let computed = e.run.jet.d(p.entry.0, p.entry.1);
        r.notes.push(format!(
            "D({},{}) = {} computed; published {} = {}: {}",
            p.entry.0,
            p.entry.1,
            num(computed),
            p.text,
            num(p.value),
            p.note
        ));
    }
    r.notes.push(format!(
        "cubic forcing coefficient: {} computed (D(3,0)/6), sqrt(3)/4 = {} published; the third-order solution expansion does not depend on it",
        num(e.run.ode.forcing[3]),
        num(sqrt3() / 4.0)
    ));
    if let Some(v) = e.closed_form.entry("third order in x: free-variable") {
        r.notes.push(format!(
            "third-order formula written with p-partials in place of q-partials evaluates to {} (comparison only)",
            num(v.closed_form)
        ));
    }
    r.csv = Some(CsvTable {
        header: COMPARISON_HEADER,
        rows: if paper_variant {
            figure_rows(&e.published_solution, &e.figure)
        } else {
            e.figure.csv_rows()
        },
    });
    Ok(r)
}

fn figure_rows(sol: &ClosedFormSolution, reference: &ValidationReport) -> Vec<[f64; 4]> {
    reference
        .rows
        .iter()
        .map(|row| {
            let a = sol.value(row.x);
            [row.x, a, row.value_b, (a - row.value_b).abs()]
        })
        .collect()
}

fn report4(e: &Example4) -> Result<Report, Error> {
    let f = bubble_equation(&e.params);
    let p = e.params;
    let mut r = Report::new("example 4: bubble collapse");
    r.sections.push(
        Section::new("parameters")
            .line("R0", num(p.r0))
            .line("p_f", num(p.p_f))
            .line("rho", num(p.rho)),
    );
    r.sections.push(base_section(&f, &e.run.base));
    r.sections.push(jet_section(&e.run.jet));
    r.sections.push(
        Section::new("psi-form")
            .line("local ODE", &e.run.ode)
            .line("R0*(1 - 1/2*q^2) for p_f = rho = 1", format!("{}*(1 - 1/2*q^2)", num(p.r0))),
    );
    r.sections.push(psi_solution_section(&e.run.solution));
    r.sections.push(
        Section::new("collapse time")
            .line("t_c from the local solution", num_approx(e.collapse_time))
            .line("sqrt(2)*R0*sqrt(rho/p_f)", num_approx(2f64.sqrt() * p.r0 / p.drive().sqrt()))
            .line("numeric collapse time", num_approx(e.numeric.collapse_time))
            .line("energy-integral collapse time", num_approx(e.oracle_collapse_time))
            .line(
                "numeric vs energy integral (relative)",
                num((e.numeric.collapse_time - e.oracle_collapse_time).abs() / e.oracle_collapse_time),
            ),
    );
    r.sections.push(
        Section::new("numeric integration")
            .line("grid step", num(e.numeric.trajectory.step))
            .line("grid samples", e.numeric.trajectory.samples.len())
            .line("substeps", e.numeric.substeps)
            .line("smallest substep", num(e.numeric.smallest_substep))
            .line("radius floor", num(e.numeric.floor))
            .line("max |energy drift|", num(e.numeric.max_energy_drift)),
    );
    let mut s = validation_section("approximation vs numeric on [0, t_numeric/2]", &e.early_agreement, "|approx - numeric|");
    s.push("max error / R0", num(e.early_agreement.max_abs_error / p.r0));
    r.sections.push(s);
    r.sections.push(validation_section("approximation vs numeric up to collapse", &e.figure, "|approx - numeric|"));
    r.notes.push("the local solution ignores the y^(-3/2) blow-up of y' at collapse, so t_c overestimates the collapse time".into());
    r.csv = Some(CsvTable { header: RADIUS_HEADER, rows: e.figure.csv_rows() });
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ExampleId::ALL {
            assert_eq!(id.name().parse::<ExampleId>().unwrap(), id);
        }
        assert!("5".parse::<ExampleId>().is_err());
    }

    #[test]
    fn bubble_equation_text() {
        assert_eq!(bubble_equation(&BubbleParams::default()).to_text(), "1/1500 - (2/3 + q^2)*p^3");
    }

    #[test]
    fn published_registry_matches_semantically() {
        let tol = Tolerances::default();
        let rewritten = parse("-(q + 3*p^(4/3)*sin(x))").unwrap();
        let base = check_base_point(&rewritten, example3_base_point(), SolveFor::Q, &tol).unwrap();
        let found = published_overrides(&rewritten, &base);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].entry, (3, 0));
        let other = parse("-3*sin(x)*p^(4/3) - q + (x - pi/3)^5").unwrap();
        assert!(published_overrides(&other, &base).is_empty());
    }

    #[test]
    fn first_order_constants_of_exponential_example() {
        let e = example1(&Tolerances::default()).unwrap();
        let c = e.constants;
        assert_eq!((c.a0, c.b0, c.c0, c.d0), (0.0, 0.0, 1.0, Some(2.0)));
        assert_eq!(e.run.base.q0, 2.0);
    }

    #[test]
    fn every_example_reports() {
        for id in ExampleId::ALL {
            let mut config = ExampleConfig::new(id);
            config.paper_variant = true;
            let r = run(&config).unwrap_or_else(|e| panic!("example {id}: {e}"));
            assert!(!r.render_text().is_empty());
        }
    }
}
