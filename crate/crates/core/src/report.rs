//! Plain-text and JSON rendering shared by the CLI and the built-in examples.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::approx::ApproxError;
use crate::expr::ExprError;
use crate::jet::JetError;
use crate::numeric::NumericError;
use crate::series::SeriesError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section {
    pub heading: String,
    pub lines: Vec<(String, String)>,
}

impl Section {
    pub fn new(heading: impl Into<String>) -> Section {
        Section { heading: heading.into(), lines: Vec::new() }
    }

    pub fn line(mut self, key: impl Into<String>, value: impl ToString) -> Section {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn value(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvTable {
    pub header: [&'static str; 4],
    pub rows: Vec<[f64; 4]>,
}

impl CsvTable {
    pub fn render(&self) -> String {
        crate::numeric::csv::render(self.header, &self.rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub title: String,
    pub sections: Vec<Section>,
    /// Flagged discrepancies and caveats.
    pub notes: Vec<String>,
    #[serde(skip)]
    pub csv: Option<CsvTable>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Report {
        Report { title: title.into(), sections: Vec::new(), notes: Vec::new(), csv: None }
    }

    pub fn section(&self, heading: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.heading == heading)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "== {} ==", self.title);
        for s in &self.sections {
            let _ = writeln!(out, "\n[{}]", s.heading);
            let width = s.lines.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
            for (k, v) in &s.lines {
                let _ = writeln!(out, "  {k:<width$} : {v}");
            }
        }
        if !self.notes.is_empty() {
            let _ = writeln!(out, "\n[notes]");
            for n in &self.notes {
                let _ = writeln!(out, "  ! {n}");
            }
        }
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Shortest round-trip decimal of a value.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.is_finite() && (v.abs() < 1e-4 || v.abs() >= 1e16) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Full value followed by a 7-significant-digit rounding.
pub fn num_approx(v: f64) -> String {
    format!("{} (~{})", num(v), sig7(v))
}

fn sig7(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return num(v);
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (6 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| num(*v)).collect();
    format!("[{}]", items.join(", "))
}

/// Any failure surfaced to the command line, grouped by exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(ExprError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("base point rejected: {0}")]
    Precondition(JetError),
    #[error("{0}")]
    Jet(JetError),
    #[error("{0}")]
    Approx(#[from] ApproxError),
    #[error("{0}")]
    Series(SeriesError),
    #[error("{0}")]
    Numeric(#[from] NumericError),
    #[error("{0}")]
    Expr(ExprError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<JetError> for Error {
    fn from(e: JetError) -> Error {
        match e {
            JetError::ResidualTooLarge { .. } | JetError::Degenerate { .. } | JetError::NoRootFound { .. } => {
                Error::Precondition(e)
            }
            other => Error::Jet(other),
        }
    }
}

impl From<SeriesError> for Error {
    fn from(e: SeriesError) -> Error {
        match e {
            SeriesError::Jet(j) => j.into(),
            SeriesError::Approx(a) => Error::Approx(a),
            other => Error::Series(other),
        }
    }
}

impl From<ExprError> for Error {
    fn from(e: ExprError) -> Error {
        match e {
            ExprError::Syntax { .. } | ExprError::UnknownIdentifier { .. } | ExprError::MalformedExponent { .. } => {
                Error::Parse(e)
            }
            other => Error::Expr(other),
        }
    }
}

impl Error {
    /// 2 parse or usage, 3 base-point precondition, 4 solver or i/o failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Input(_) => 2,
            Error::Precondition(_) => 3,
            _ => 4,
        }
    }
}
