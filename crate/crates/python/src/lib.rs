//! Python bindings: `import ift_ode`.

use std::collections::{BTreeMap, HashMap};

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ift_ode_core::approx::{self, ClosedFormSolution, InitialCondition, SolutionShape};
use ift_ode_core::builtin::{self, ExampleConfig, ExampleId};
use ift_ode_core::expr::{self, Env, Var};
use ift_ode_core::jet::{self, PartialPoint, SolveFor, Tolerances};
use ift_ode_core::numeric::{self, BubbleParams, Curve, ExactSolution};
use ift_ode_core::report;
use ift_ode_core::series;

create_exception!(ift_ode, IftOdeError, PyException, "Any failure raised by the core library.");
create_exception!(ift_ode, ParseError, IftOdeError, "The expression could not be parsed.");
create_exception!(ift_ode, PreconditionError, IftOdeError, "The base point is off F = 0 or degenerate.");

fn to_py(e: report::Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        2 => ParseError::new_err(msg),
        3 => PreconditionError::new_err(msg),
        _ => IftOdeError::new_err(msg),
    }
}

fn err<E: Into<report::Error>>(e: E) -> PyErr {
    to_py(e.into())
}

fn mode(solve_for: &str) -> PyResult<SolveFor> {
    solve_for.parse().map_err(PyValueError::new_err)
}

fn condition(name: &str) -> PyResult<InitialCondition> {
    match name {
        "slope" => Ok(InitialCondition::Slope),
        "value" => Ok(InitialCondition::Value),
        _ => Err(PyValueError::new_err(format!("condition must be `slope` or `value`, got `{name}`"))),
    }
}

fn variable(name: &str) -> PyResult<Var> {
    match name {
        "x" => Ok(Var::X),
        "p" => Ok(Var::P),
        "q" => Ok(Var::Q),
        _ => Err(PyValueError::new_err(format!("unknown variable `{name}`"))),
    }
}

/// A symbolic expression in `x`, `p` (= y) and `q` (= y').
#[pyclass(module = "ift_ode", frozen, from_py_object)]
#[derive(Clone)]
pub struct Expr {
    inner: expr::Expr,
}

/// Accepts either an `Expr` or its text.
#[derive(FromPyObject)]
pub enum ExprLike {
    Expr(Expr),
    Text(String),
}

impl ExprLike {
    fn into_expr(self) -> PyResult<expr::Expr> {
        match self {
            ExprLike::Expr(e) => Ok(e.inner),
            ExprLike::Text(t) => expr::parse(&t).map_err(err),
        }
    }
}

#[pymethods]
impl Expr {
    #[new]
    fn new(text: &str) -> PyResult<Expr> {
        Ok(Expr { inner: expr::parse(text).map_err(err)? })
    }

    #[pyo3(signature = (x = 0.0, p = 0.0, q = 0.0))]
    fn evaluate(&self, x: f64, p: f64, q: f64) -> PyResult<f64> {
        self.inner.evaluate(&Env::xpq(x, p, q)).map_err(err)
    }

    /// Partial derivative with respect to `x`, `p` or `q`.
    fn diff(&self, var: &str) -> PyResult<Expr> {
        Ok(Expr { inner: self.inner.differentiate(variable(var)?) })
    }

    fn simplify(&self) -> Expr {
        Expr { inner: self.inner.simplify() }
    }

    fn __str__(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Expr('{}')", self.inner.to_text())
    }

    fn __eq__(&self, other: &Expr) -> bool {
        self.inner == other.inner
    }
}

/// A validated base point `(x0, p0, q0)`.
#[pyclass(module = "ift_ode", frozen, from_py_object)]
#[derive(Clone)]
pub struct BasePoint {
    inner: jet::BasePoint,
}

#[pymethods]
impl BasePoint {
    #[getter]
    fn x0(&self) -> f64 {
        self.inner.x0
    }
    #[getter]
    fn p0(&self) -> f64 {
        self.inner.p0
    }
    #[getter]
    fn q0(&self) -> f64 {
        self.inner.q0
    }
    /// `"q"` for q = phi(x, p), `"p"` for p = psi(x, q).
    #[getter]
    fn solve_for(&self) -> &'static str {
        match self.inner.mode {
            SolveFor::Q => "q",
            SolveFor::P => "p",
        }
    }
    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }
    #[getter]
    fn pivot(&self) -> f64 {
        self.inner.pivot
    }

    fn __repr__(&self) -> String {
        let b = &self.inner;
        format!("BasePoint(x0={}, p0={}, q0={}, solve_for='{}')", b.x0, b.p0, b.q0, self.solve_for())
    }
}

/// Closed-form local solution `y(x)`.
#[pyclass(module = "ift_ode", frozen, from_py_object)]
#[derive(Clone)]
pub struct Solution {
    inner: ClosedFormSolution,
}

#[pymethods]
impl Solution {
    fn __call__(&self, x: f64) -> f64 {
        self.inner.value(x)
    }

    fn value(&self, x: f64) -> f64 {
        self.inner.value(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.inner.derivative(x)
    }

    /// Taylor coefficients about `x0`.
    fn taylor(&self, order: usize) -> Vec<f64> {
        self.inner.taylor(order)
    }

    /// Polynomial part in powers of `x`.
    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.poly_in_x()
    }

    #[getter]
    fn amplitude(&self) -> f64 {
        self.inner.amplitude
    }

    #[getter]
    fn rate(&self) -> f64 {
        self.inner.rate
    }

    /// The solution in powers of `x`.
    #[getter]
    fn text(&self) -> String {
        self.inner.to_expr_power_basis().to_text()
    }

    /// The solution in powers of `x - x0`.
    #[getter]
    fn centered(&self) -> String {
        self.inner.to_expr().to_text()
    }

    /// `{"kind": ..., "a0": ..., ...}` for the first-order shapes.
    fn shape<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        match self.inner.shape() {
            SolutionShape::Line { a0, b0 } => {
                d.set_item("kind", "line")?;
                d.set_item("a0", a0)?;
                d.set_item("b0", b0)?;
            }
            SolutionShape::Quadratic { a0, b0, c0 } => {
                d.set_item("kind", "quadratic")?;
                d.set_item("a0", a0)?;
                d.set_item("b0", b0)?;
                d.set_item("c0", c0)?;
            }
            SolutionShape::Exponential { a0, b0, c0, d0 } => {
                d.set_item("kind", "exponential")?;
                d.set_item("a0", a0)?;
                d.set_item("b0", b0)?;
                d.set_item("c0", c0)?;
                d.set_item("d0", d0)?;
            }
            SolutionShape::Other => d.set_item("kind", "other")?,
        }
        Ok(d)
    }

    /// `(|y(x0) - p0|, |y'(x0) - q0|)`.
    fn base_errors(&self) -> (f64, f64) {
        self.inner.base_errors()
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn satisfies_base(&self, tol: f64) -> bool {
        self.inner.satisfies_base(tol)
    }

    /// First zero of `y` after `x0`.
    fn collapse_time(&self) -> PyResult<f64> {
        approx::collapse_time(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Solution('{}')", self.text())
    }
}

/// Result of `approximate`.
#[pyclass(module = "ift_ode", frozen, get_all)]
pub struct Approximation {
    base: BasePoint,
    /// `{(i, j): D(i, j)}`
    jet: HashMap<(usize, usize), f64>,
    /// The local ODE in the parser's grammar.
    local_ode: String,
    /// All real branches; the first one meets both base conditions when any does.
    solutions: Vec<Solution>,
}

#[pymethods]
impl Approximation {
    #[getter]
    fn solution(&self) -> Solution {
        self.solutions[0].clone()
    }

    fn __repr__(&self) -> String {
        format!("Approximation(local_ode='{}', solution='{}')", self.local_ode, self.solutions[0].text())
    }
}

fn tolerances(tol_residual: f64, tol_degenerate: f64) -> Tolerances {
    Tolerances { residual: tol_residual, degenerate: tol_degenerate }
}

/// Validates `F(x0, p0, q0) = 0` and the partial needed by `solve_for`.
/// A missing `q0` is solved for in `bracket`.
#[pyfunction]
#[pyo3(signature = (ode, x0, p0, q0 = None, solve_for = "q", bracket = (-10.0, 10.0), tol_residual = 1e-9, tol_degenerate = 1e-8))]
#[allow(clippy::too_many_arguments)]
fn check_base_point(
    ode: ExprLike,
    x0: f64,
    p0: f64,
    q0: Option<f64>,
    solve_for: &str,
    bracket: (f64, f64),
    tol_residual: f64,
    tol_degenerate: f64,
) -> PyResult<BasePoint> {
    let f = ode.into_expr()?;
    let tol = tolerances(tol_residual, tol_degenerate);
    let q0 = match q0 {
        Some(q0) => q0,
        None => {
            let known = PartialPoint { x: Some(x0), p: Some(p0), q: None };
            jet::solve_missing_coordinate(&f, known, bracket, tol.residual).map_err(err)?
        }
    };
    let inner = jet::check_base_point(&f, [x0, p0, q0], mode(solve_for)?, &tol).map_err(err)?;
    Ok(BasePoint { inner })
}

/// Derivatives `D(i, j)` of the implicit function for `i <= m`, `j <= n`.
#[pyfunction]
fn implicit_jet(ode: ExprLike, base: &BasePoint, m: usize, n: usize) -> PyResult<HashMap<(usize, usize), f64>> {
    let f = ode.into_expr()?;
    let jet = jet::implicit_jet(&f, &base.inner, (m, n)).map_err(err)?;
    Ok(jet.entries().collect())
}

/// Builds the local ODE at the base point and solves it in closed form.
#[pyfunction]
#[pyo3(signature = (ode, base, order = (1, 1), condition = "slope"))]
fn approximate(ode: ExprLike, base: &BasePoint, order: (usize, usize), condition: &str) -> PyResult<Approximation> {
    let f = ode.into_expr()?;
    let b = &base.inner;
    let (jet, local_ode, solutions) = match b.mode {
        SolveFor::Q => {
            if order.1 != 1 {
                return Err(PyValueError::new_err("solving for q needs order (m, 1)"));
            }
            let run = builtin::normal_form_pipeline(&f, b, order.0).map_err(to_py)?;
            (run.jet, format!("q = {}", run.ode.rhs_expr().to_text()), vec![run.solution])
        }
        SolveFor::P => {
            let run = builtin::psi_form_pipeline(&f, b, order, self::condition(condition)?).map_err(to_py)?;
            let sols = run.solution.branches.into_iter().map(|br| br.solution).collect();
            (run.jet, format!("p = {}", run.ode.rhs_expr().to_text()), sols)
        }
    };
    Ok(Approximation {
        base: base.clone(),
        jet: jet.entries().collect(),
        local_ode,
        solutions: solutions.into_iter().map(|inner| Solution { inner }).collect(),
    })
}

/// Series method: expands `F(x, y, y')` about `x0` and returns every real
/// branch as `{"values": {k: y^(k)(x0)}, "taylor": [...], "provenance": [...]}`.
/// `initial` maps derivative orders to known values, e.g. `{0: 1.0}`.
#[pyfunction]
#[pyo3(signature = (ode, x0, initial, order = 2))]
fn series_branches<'py>(
    py: Python<'py>,
    ode: ExprLike,
    x0: f64,
    initial: BTreeMap<usize, f64>,
    order: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let f = ode.into_expr()?;
    let equations = series::expand_residual(&f, x0, order).map_err(err)?;
    let branches = series::solve_branches(&equations, &initial).map_err(err)?;
    branches
        .iter()
        .map(|b| {
            let d = PyDict::new(py);
            d.set_item("values", &b.values)?;
            d.set_item("taylor", b.taylor(order))?;
            d.set_item("provenance", &b.provenance)?;
            Ok(d)
        })
        .collect()
}

/// Compares the series branches with the implicit-function Taylor expansion.
/// Returns `(equivalent, implicit_taylor, smallest max delta)`.
#[pyfunction]
#[pyo3(signature = (ode, base, order = 2))]
fn compare_with_implicit(ode: ExprLike, base: &BasePoint, order: usize) -> PyResult<(bool, Vec<f64>, f64)> {
    let f = ode.into_expr()?;
    let report = series::compare_with_implicit(&f, &base.inner, order).map_err(err)?;
    let best = report.best().map_or(f64::INFINITY, |b| b.max_delta);
    Ok((report.equivalent(), report.implicit_taylor.clone(), best))
}

#[derive(FromPyObject)]
pub enum CurveLike {
    Solution(Solution),
    Expr(ExprLike),
}

/// `(max, mean, samples)` of `|F(x, u, u')|` on `[a, b]`.
#[pyfunction]
#[pyo3(signature = (ode, solution, a, b, samples = 101))]
fn residual_profile(ode: ExprLike, solution: CurveLike, a: f64, b: f64, samples: usize) -> PyResult<(f64, f64, usize)> {
    let f = ode.into_expr()?;
    let curve: Box<dyn Curve> = match solution {
        CurveLike::Solution(s) => Box::new(s.inner),
        CurveLike::Expr(e) => Box::new(ExactSolution::new(e.into_expr()?)),
    };
    let r = numeric::residual_profile(&f, curve.as_ref(), (a, b), samples).map_err(err)?;
    Ok((r.max_abs_error, r.mean_abs_error, r.samples))
}

/// Integrates the bubble collapse. Returns a dict with `collapse_time`,
/// `oracle_collapse_time`, `max_energy_drift` and the samples `t`, `radius`, `velocity`.
#[pyfunction]
#[pyo3(signature = (r0 = 0.1, p_f = 1.0, rho = 1.0, step = None, floor_fraction = 1e-3))]
fn bubble_collapse<'py>(
    py: Python<'py>,
    r0: f64,
    p_f: f64,
    rho: f64,
    step: Option<f64>,
    floor_fraction: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let params = BubbleParams { r0, p_f, rho };
    params.validate().map_err(err)?;
    let run = numeric::integrate_bubble(&params, step.unwrap_or_else(|| params.default_step()), floor_fraction).map_err(err)?;
    let samples: Vec<_> = run.trajectory.samples.iter().chain(&run.approach).collect();
    let d = PyDict::new(py);
    d.set_item("collapse_time", run.collapse_time)?;
    d.set_item("oracle_collapse_time", numeric::collapse_time_oracle(&params))?;
    d.set_item("max_energy_drift", run.max_energy_drift)?;
    d.set_item("t", samples.iter().map(|s| s.x).collect::<Vec<_>>())?;
    d.set_item("radius", samples.iter().map(|s| s.y).collect::<Vec<_>>())?;
    d.set_item("velocity", samples.iter().map(|s| s.dy).collect::<Vec<_>>())?;
    Ok(d)
}

fn example_config(id: &str, r0: f64, p_f: f64, rho: f64, paper_variant: bool) -> PyResult<ExampleConfig> {
    let id: ExampleId = id.parse().map_err(PyValueError::new_err)?;
    let mut config = ExampleConfig::new(id);
    config.bubble = BubbleParams { r0, p_f, rho };
    config.paper_variant = paper_variant;
    Ok(config)
}

/// Runs a built-in example and returns its report as text.
#[pyfunction]
#[pyo3(signature = (id, r0 = 0.1, p_f = 1.0, rho = 1.0, paper_variant = false))]
fn example_text(id: &str, r0: f64, p_f: f64, rho: f64, paper_variant: bool) -> PyResult<String> {
    let config = example_config(id, r0, p_f, rho, paper_variant)?;
    Ok(builtin::run(&config).map_err(to_py)?.render_text())
}

/// Runs a built-in example and returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (id, r0 = 0.1, p_f = 1.0, rho = 1.0, paper_variant = false))]
fn example<'py>(py: Python<'py>, id: &str, r0: f64, p_f: f64, rho: f64, paper_variant: bool) -> PyResult<Bound<'py, PyAny>> {
    let config = example_config(id, r0, p_f, rho, paper_variant)?;
    let json = builtin::run(&config).map_err(to_py)?.render_json();
    py.import("json")?.call_method1("loads", (json,))
}

/// Runs the command-line interface with `args` (without the program name)
/// and returns its exit code. Output goes to the process stdout/stderr.
#[pyfunction]
fn main(args: Vec<String>) -> i32 {
    ift_ode_core::cli::main_with_args(std::iter::once("ift-ode".to_string()).chain(args))
}

#[pymodule]
fn ift_ode(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("IftOdeError", py.get_type::<IftOdeError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("PreconditionError", py.get_type::<PreconditionError>())?;
    m.add_class::<Expr>()?;
    m.add_class::<BasePoint>()?;
    m.add_class::<Solution>()?;
    m.add_class::<Approximation>()?;
    m.add_function(wrap_pyfunction!(check_base_point, m)?)?;
    m.add_function(wrap_pyfunction!(implicit_jet, m)?)?;
    m.add_function(wrap_pyfunction!(approximate, m)?)?;
    m.add_function(wrap_pyfunction!(series_branches, m)?)?;
    m.add_function(wrap_pyfunction!(compare_with_implicit, m)?)?;
    m.add_function(wrap_pyfunction!(residual_profile, m)?)?;
    m.add_function(wrap_pyfunction!(bubble_collapse, m)?)?;
    m.add_function(wrap_pyfunction!(example_text, m)?)?;
    m.add_function(wrap_pyfunction!(example, m)?)?;
    m.add_function(wrap_pyfunction!(main, m)?)?;
    Ok(())
}
