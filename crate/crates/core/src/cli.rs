//! Command-line front end. `run` does all the work and returns the text to
//! print, so the binary is a thin wrapper and tests can call it directly.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::approx::{
    build_normal_form, build_psi_form, solve_normal_form, solve_psi_form, ClosedFormSolution, InitialCondition,
};
use crate::builtin::{self, ExampleConfig, ExampleId};
use crate::expr::{parse, Env, Expr};
use crate::jet::{check_base_point, implicit_jet, solve_missing_coordinate, BasePoint, PartialPoint, SolveFor, Tolerances};
use crate::numeric::csv::{COMPARISON_HEADER, RESIDUAL_HEADER};
use crate::numeric::{compare_trajectories, integrate_bubble, residual_profile, BubbleParams, Curve, ExactSolution};
use crate::report::{list, num, CsvTable, Error, Report, Section};
use crate::series::{compare_with_implicit, expand_residual, solve_branches, MAX_SERIES_ORDER};

#[derive(Debug, Parser)]
#[command(name = "ift-ode", version, about = "Local closed-form approximation of implicit ODEs F(x, y, y') = 0")]
pub struct Cli {
    /// Write plot data (CSV) to this path
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Print the report as JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,
    /// Allowed |F(T0)| (scaled by 1 + max|coordinate|)
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_residual: Option<f64>,
    /// Smallest accepted |dF/d(solved variable)| at the base point
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_degenerate: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the local ODE at a base point and solve it in closed form
    Approximate(ApproximateArgs),
    /// Expand F along y(x) and solve for the unknown derivatives
    Series(SeriesArgs),
    /// Residual profile of a solution, and comparison with a reference
    Validate(ValidateArgs),
    /// Run one of the built-in examples (1, 1bis, 2, 2bis, 2ter, 3, 4)
    Example(ExampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Condition {
    /// y'(x0) = q0 selects the member of a solution family
    Slope,
    /// y(x0) = p0 selects it
    Value,
}

impl From<Condition> for InitialCondition {
    fn from(c: Condition) -> Self {
        match c {
            Condition::Slope => InitialCondition::Slope,
            Condition::Value => InitialCondition::Value,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// F(x, p, q) with p = y and q = y'
    #[arg(long, allow_hyphen_values = true)]
    pub ode: String,
    /// Base point x0,p0[,q0]; entries may be constant expressions such as pi/2
    #[arg(long, allow_hyphen_values = true)]
    pub at: String,
    /// Coordinate given by the implicit function: q = phi(x, p) or p = psi(x, q)
    #[arg(long, default_value = "q")]
    pub solve_for: SolveFor,
    /// Jet orders m,n
    #[arg(long, default_value = "1,1")]
    pub order: String,
    /// Search interval lo,hi for a missing q0
    #[arg(long, allow_hyphen_values = true, default_value = "-10,10")]
    pub bracket: String,
    /// Condition fixing a member of a solution family (p-mode only)
    #[arg(long, value_enum, default_value = "slope")]
    pub condition: Condition,
}

#[derive(Debug, Args)]
pub struct ApproximateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Also show the solution built from published jet values, where they differ
    #[arg(long)]
    pub paper_variant: bool,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub ode: String,
    /// x0[,y(x0)[,y'(x0)]]
    #[arg(long, allow_hyphen_values = true)]
    pub at: String,
    /// Highest power of (x - x0) retained
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Extra initial condition such as "y=0", "y'=1" or "y''=-1"; repeatable
    #[arg(long, allow_hyphen_values = true)]
    pub ic: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolutionSource {
    Approximate,
    File,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Use a built-in example's equation, base point and exact solution
    #[arg(long, conflicts_with_all = ["ode", "at"])]
    pub example: Option<ExampleId>,
    #[arg(long, allow_hyphen_values = true, requires = "at")]
    pub ode: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<String>,
    #[arg(long)]
    pub solve_for: Option<SolveFor>,
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value = "-10,10")]
    pub bracket: String,
    #[arg(long, value_enum)]
    pub condition: Option<Condition>,
    /// Where the candidate solution comes from
    #[arg(long, value_enum, default_value = "approximate")]
    pub solution_from: SolutionSource,
    /// File holding the candidate y(x) as an expression in x
    #[arg(long, required_if_eq("solution_from", "file"))]
    pub file: Option<PathBuf>,
    /// Reference solution y(x) to compare against
    #[arg(long, allow_hyphen_values = true)]
    pub exact: Option<String>,
    /// Interval a,b (default: x0 -+ 0.5)
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<String>,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    pub id: ExampleId,
    /// Initial bubble radius (example 4)
    #[arg(long = "R0", alias = "r0", default_value_t = 0.1)]
    pub r0: f64,
    /// Far-field pressure (example 4)
    #[arg(long = "p-f", alias = "pf", default_value_t = 1.0)]
    pub p_f: f64,
    /// Liquid density (example 4)
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Also show results built from published jet values (example 3)
    #[arg(long)]
    pub paper_variant: bool,
}

/// Everything the binary writes.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub csv: Option<(PathBuf, String)>,
}

/// Parses `args` (program name first) and runs the command. The CSV file,
/// if requested, is written before returning.
pub fn run<I, T>(args: I) -> Result<Output, Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Input(e.to_string()))?;
    let out = execute(&cli)?;
    if let Some((path, body)) = &out.csv {
        std::fs::write(path, body)?;
    }
    Ok(out)
}

pub fn execute(cli: &Cli) -> Result<Output, Error> {
    let defaults = Tolerances::default();
    let tol = Tolerances {
        residual: cli.tol_residual.unwrap_or(defaults.residual),
        degenerate: cli.tol_degenerate.unwrap_or(defaults.degenerate),
    };
    let report = match &cli.command {
        Command::Approximate(a) => approximate(a, &tol)?,
        Command::Series(a) => series(a, &tol)?,
        Command::Validate(a) => validate(a, &tol)?,
        Command::Example(a) => {
            let config = ExampleConfig {
                id: a.id,
                bubble: BubbleParams { r0: a.r0, p_f: a.p_f, rho: a.rho },
                paper_variant: a.paper_variant,
                tol,
            };
            config.bubble.validate()?;
            builtin::run(&config)?
        }
    };
    let stdout = if cli.json { report.render_json() } else { report.render_text() };
    let csv = match (&cli.csv, &report.csv) {
        (Some(path), Some(table)) => Some((path.clone(), table.render())),
        (Some(_), None) => return Err(Error::Input("this command has no CSV data".into())),
        (None, _) => None,
    };
    Ok(Output { stdout, csv })
}

// ---------------------------------------------------------------------------
// argument helpers

fn parse_ode(text: &str) -> Result<Expr, Error> {
    Ok(parse(text)?)
}

/// A constant expression such as `pi/2` or `-3*sqrt(3)/2`.
pub fn constant(text: &str) -> Result<f64, Error> {
    let e = parse(text)?;
    if !e.vars().is_empty() {
        return Err(Error::Input(format!("`{text}` is not a constant")));
    }
    let v = e.evaluate(&Env::new())?;
    if !v.is_finite() {
        return Err(Error::Input(format!("`{text}` is not finite")));
    }
    Ok(v)
}

pub fn constant_list(text: &str, min: usize, max: usize, what: &str) -> Result<Vec<f64>, Error> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.len() < min || items.len() > max {
        let expected = if min == max { min.to_string() } else { format!("{min} to {max}") };
        return Err(Error::Input(format!("{what} needs {expected} comma-separated values, got `{text}`")));
    }
    items.into_iter().map(constant).collect()
}

fn pair(text: &str, what: &str) -> Result<(f64, f64), Error> {
    let v = constant_list(text, 2, 2, what)?;
    Ok((v[0], v[1]))
}

fn orders(text: &str) -> Result<(usize, usize), Error> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [m, n] => match (m.parse(), n.parse()) {
            (Ok(m), Ok(n)) => Ok((m, n)),
            _ => Err(Error::Input(format!("--order expects two integers m,n, got `{text}`"))),
        },
        _ => Err(Error::Input(format!("--order expects m,n, got `{text}`"))),
    }
}

/// Validated base point, solving for `q0` when only `x0,p0` are given.
fn base_point(f: &Expr, at: &str, mode: SolveFor, bracket: &str, tol: &Tolerances) -> Result<(BasePoint, bool), Error> {
    let v = constant_list(at, 2, 3, "--at")?;
    let (q0, solved) = match v.get(2) {
        Some(q0) => (*q0, false),
        None => {
            let known = PartialPoint { x: Some(v[0]), p: Some(v[1]), q: None };
            (solve_missing_coordinate(f, known, pair(bracket, "--bracket")?, tol.residual)?, true)
        }
    };
    Ok((check_base_point(f, [v[0], v[1], q0], mode, tol)?, solved))
}

// ---------------------------------------------------------------------------
// approximate

struct Approximation {
    report: Report,
    primary: ClosedFormSolution,
}

fn approximation(
    f: &Expr,
    base: BasePoint,
    orders: (usize, usize),
    condition: InitialCondition,
    paper_variant: bool,
) -> Result<Approximation, Error> {
    let mut report = Report::new("local approximation");
    report.sections.push(builtin::base_section(f, &base));
    let jet = implicit_jet(f, &base, orders)?;
    report.sections.push(builtin::jet_section(&jet));
    let primary = match base.mode {
        SolveFor::Q => {
            let ode = build_normal_form(&jet)?;
            let sol = solve_normal_form(&ode);
            report.sections.push(Section::new("local ODE").line("normal form", &ode));
            let mut s = Section::new("closed-form solution");
            builtin::solution_lines(&mut s, &sol);
            report.sections.push(s);
            sol
        }
        SolveFor::P => {
            let ode = build_psi_form(&jet)?;
            let sol = solve_psi_form(&ode, condition)?;
            report.sections.push(Section::new("local ODE").line("psi-form", &ode));
            report.sections.push(builtin::psi_solution_section(&sol));
            sol.primary().clone()
        }
    };
    let (ev, es) = primary.base_errors();
    report.sections.push(
        Section::new("base conditions")
            .line("y(x0) = p0", format!("{} (error {})", primary.satisfies_base(1e-10) || ev <= 1e-10, num(ev)))
            .line("y'(x0) = q0", format!("{} (error {})", es <= 1e-10, num(es))),
    );
    let published = builtin::published_overrides(f, &base);
    for p in &published {
        report.notes.push(format!(
            "D({},{}) = {} computed; published {} = {}: {}",
            p.entry.0,
            p.entry.1,
            num(jet.d(p.entry.0, p.entry.1)),
            p.text,
            num(p.value),
            p.note
        ));
    }
    if paper_variant {
        let variant = builtin::apply_published(&jet, &published);
        let mut s = Section::new("published variant");
        if published.is_empty() || variant == jet {
            s.push("published jet values", "none differ for this equation and base point");
        } else {
            let ode = build_normal_form(&variant)?;
            s.push("normal form", &ode);
            builtin::solution_lines(&mut s, &solve_normal_form(&ode));
        }
        report.sections.push(s);
    }
    Ok(Approximation { report, primary })
}

fn approximate(a: &ApproximateArgs, tol: &Tolerances) -> Result<Report, Error> {
    let p = &a.problem;
    let f = parse_ode(&p.ode)?;
    let (base, solved) = base_point(&f, &p.at, p.solve_for, &p.bracket, tol)?;
    let mut out = approximation(&f, base, orders(&p.order)?, p.condition.into(), a.paper_variant)?;
    if solved {
        out.report.notes.push(format!("q0 = {} found by root search in [{}]", num(base.q0), p.bracket));
    }
    let window = (base.x0 - 0.5, base.x0 + 0.5);
    let profile = residual_profile(&f, &out.primary, window, 101)?;
    out.report.csv = Some(CsvTable { header: RESIDUAL_HEADER, rows: profile.csv_rows() });
    Ok(out.report)
}

// ---------------------------------------------------------------------------
// series

fn initial_condition(text: &str) -> Result<(usize, f64), Error> {
    let bad = || Error::Input(format!("--ic expects y=<value>, y'=<value>, y''=<value> or y'''=<value>, got `{text}`"));
    let (lhs, rhs) = text.split_once('=').ok_or_else(bad)?;
    let lhs = lhs.trim();
    let rest = lhs.strip_prefix('y').ok_or_else(bad)?;
    let rest = rest.split('(').next().unwrap_or_default();
    if !rest.chars().all(|c| c == '\'') || rest.len() > MAX_SERIES_ORDER {
        return Err(bad());
    }
    Ok((rest.len(), constant(rhs)?))
}

fn series(a: &SeriesArgs, tol: &Tolerances) -> Result<Report, Error> {
    let f = parse_ode(&a.ode)?;
    let at = constant_list(&a.at, 1, 3, "--at")?;
    let x0 = at[0];
    let mut initial: BTreeMap<usize, f64> = at[1..].iter().copied().enumerate().collect();
    for ic in &a.ic {
        let (k, v) = initial_condition(ic)?;
        if let Some(old) = initial.insert(k, v) {
            if (old - v).abs() > 1e-12 * (1.0 + v.abs()) {
                return Err(Error::Input(format!("conflicting values for y^({k})(x0): {} and {}", num(old), num(v))));
            }
        }
    }
    let equations = expand_residual(&f, x0, a.order)?;
    let branches = solve_branches(&equations, &initial)?;

    let mut report = Report::new("series expansion");
    let mut s = Section::new("expansion").line("F(x,p,q)", f.to_text()).line("x0", num(x0));
    let fixed: Vec<String> = initial.iter().map(|(k, v)| format!("y^({k}) = {}", num(*v))).collect();
    s.push("initial conditions", if fixed.is_empty() { "none".into() } else { fixed.join(", ") });
    for eq in &equations {
        s.push(format!("coefficient of (x - x0)^{}", eq.power), format!("{} = 0", eq.coefficient.to_text()));
    }
    report.sections.push(s);

    let mut bases: Vec<(f64, f64)> = Vec::new();
    for (i, br) in branches.iter().enumerate() {
        let mut s = Section::new(format!("branch {}", i + 1));
        for (k, v) in &br.values {
            s.push(format!("y^({k})(x0)"), num(*v));
        }
        for line in &br.provenance {
            s.push("from", line);
        }
        let taylor = br.taylor(a.order);
        if taylor.iter().all(Option::is_some) {
            let coeffs: Vec<f64> = taylor.iter().map(|c| c.unwrap()).collect();
            let sol = ClosedFormSolution { x0, p0: coeffs[0], q0: 0.0, poly: coeffs.clone(), amplitude: 0.0, rate: 0.0, forcing: Vec::new() };
            s.push("taylor coefficients", list(&coeffs));
            s.push("y(x)", sol.to_expr_power_basis().to_text());
        } else {
            s.push("taylor coefficients", "some derivatives are left free");
        }
        let worst = br.residuals(&equations).iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
        s.push("max |coefficient residual|", num(worst));
        report.sections.push(s);
        if let (Some(p0), Some(q0)) = (br.values.get(&0), br.values.get(&1)) {
            if !bases.contains(&(*p0, *q0)) {
                bases.push((*p0, *q0));
            }
        }
    }

    for (p0, q0) in bases {
        let title = format!("implicit method at ({}, {}, {})", num(x0), num(p0), num(q0));
        let base = check_base_point(&f, [x0, p0, q0], SolveFor::Q, tol)
            .or_else(|_| check_base_point(&f, [x0, p0, q0], SolveFor::P, tol));
        let mut s = Section::new(title);
        match base.map_err(Error::from).and_then(|b| Ok(compare_with_implicit(&f, &b, a.order)?)) {
            Ok(cmp) => {
                s.push("implicit taylor", list(&cmp.implicit_taylor));
                if let Some(best) = cmp.best() {
                    let t: Vec<f64> = best.taylor.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
                    s.push("closest branch taylor", list(&t));
                    s.push("max delta", num(best.max_delta));
                }
                s.push("equivalent", cmp.equivalent());
            }
            Err(e) => s.push("not applicable", e),
        }
        report.sections.push(s);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// validate

fn validate(a: &ValidateArgs, tol: &Tolerances) -> Result<Report, Error> {
    let params = BubbleParams::default();
    let (f, point_text, mode, order_pair, condition, mut exact, example) = match a.example {
        Some(id) => {
            let p = builtin::problem(id, &params);
            let at = p.point.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",");
            (p.ode, at, p.mode, p.orders, p.condition, p.exact, Some(id))
        }
        None => {
            let ode = a.ode.as_deref().ok_or_else(|| Error::Input("validate needs --example or --ode/--at".into()))?;
            let at = a.at.clone().ok_or_else(|| Error::Input("validate needs --at with --ode".into()))?;
            let order = orders(a.order.as_deref().unwrap_or("1,1"))?;
            (parse_ode(ode)?, at, a.solve_for.unwrap_or(SolveFor::Q), order, InitialCondition::Slope, None, None)
        }
    };
    let mode = a.solve_for.unwrap_or(mode);
    let condition = a.condition.map(InitialCondition::from).unwrap_or(condition);
    let order_pair = match &a.order {
        Some(o) => orders(o)?,
        None => order_pair,
    };
    if let Some(text) = &a.exact {
        exact = Some(parse(text)?);
    }
    let (base, _) = base_point(&f, &point_text, mode, &a.bracket, tol)?;
    let interval = match &a.interval {
        Some(text) => pair(text, "--interval")?,
        None => (base.x0 - 0.5, base.x0 + 0.5),
    };
    let (lo, hi) = (interval.0.min(interval.1), interval.0.max(interval.1));
    if !(lo <= base.x0 && base.x0 <= hi) {
        return Err(Error::Input(format!("interval [{}, {}] does not contain x0 = {}", num(lo), num(hi), num(base.x0))));
    }
    if a.samples == 0 {
        return Err(Error::Input("--samples must be at least 1".into()));
    }

    let mut report = Report::new("validation");
    let candidate: Box<dyn Curve> = match a.solution_from {
        SolutionSource::Approximate => {
            let approx = approximation(&f, base, order_pair, condition, false)?;
            report.sections.extend(approx.report.sections);
            Box::new(approx.primary)
        }
        SolutionSource::File => {
            let path = a.file.as_ref().ok_or_else(|| Error::Input("--solution-from file needs --file".into()))?;
            let text = std::fs::read_to_string(path)?;
            let e = parse(text.trim())?;
            report.sections.push(builtin::base_section(&f, &base).line("candidate y(x)", e.to_text()));
            Box::new(ExactSolution::new(e))
        }
    };

    let profile = residual_profile(&f, candidate.as_ref(), interval, a.samples)?;
    let mut s = Section::new("residual profile")
        .line("interval", format!("[{}, {}]", num(interval.0), num(interval.1)))
        .line("samples", profile.samples)
        .line("max |F(x, u, u')|", num(profile.max_abs_error))
        .line("mean |F(x, u, u')|", num(profile.mean_abs_error));
    if !profile.excluded.is_empty() {
        s.push("excluded samples (domain)", list(&profile.excluded));
    }
    report.sections.push(s);
    let mut csv = CsvTable { header: RESIDUAL_HEADER, rows: profile.csv_rows() };

    let reference: Option<(String, Box<dyn Curve>)> = match (exact, example) {
        (Some(e), _) => Some((e.to_text(), Box::new(ExactSolution::new(e)))),
        (None, Some(ExampleId::Four)) => {
            let run = integrate_bubble(&params, params.default_step(), 1e-3)?;
            Some(("numeric bubble trajectory".into(), Box::new(run.trajectory)))
        }
        _ => None,
    };
    if let Some((name, curve)) = reference {
        let cmp = compare_trajectories(candidate.as_ref(), curve.as_ref(), interval, a.samples, None)?;
        let mut s = Section::new("comparison with reference")
            .line("reference", name)
            .line("max |u - reference|", num(cmp.max_abs_error))
            .line("mean |u - reference|", num(cmp.mean_abs_error));
        if !cmp.excluded.is_empty() {
            s.push("excluded samples (domain)", list(&cmp.excluded));
        }
        report.sections.push(s);
        csv = CsvTable { header: COMPARISON_HEADER, rows: cmp.csv_rows() };
    }
    report.csv = Some(csv);
    Ok(report)
}

/// Entry point used by the binary: returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = execute(&cli).and_then(|out| {
        if let Some((path, body)) = &out.csv {
            std::fs::write(path, body)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
