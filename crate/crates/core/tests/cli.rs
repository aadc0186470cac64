use std::path::Path;
use std::process::{Command, Output};

fn ift_ode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ift-ode")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = ift_ode(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    ift_ode(args).status.code().expect("exit code")
}

/// Value column of the first `key : value` line.
fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| {
            let (k, v) = l.split_once(" : ")?;
            (k.trim() == key).then(|| v.trim())
        })
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

fn number(text: &str, key: &str) -> f64 {
    let v = field(text, key);
    v.split_whitespace().next().unwrap().parse().unwrap_or_else(|_| panic!("`{key}` = {v}"))
}

#[test]
fn approximate_examples() {
    let out = stdout(&["approximate", "--ode", "2*p - q", "--at", "0,1", "--solve-for", "q", "--order", "1,1"]);
    assert_eq!(field(&out, "y(x), powers of x"), "exp(2*x)");
    assert_eq!(field(&out, "T0 = (x0, p0, q0)"), "(0, 1, 2)");

    let out = stdout(&["approximate", "--ode", "p^2+q^2-1", "--at", "pi/2,1,0", "--solve-for", "p", "--order", "1,2"]);
    assert_eq!(field(&out, "y(x), powers of x"), "-0.23370055013616975 + 1/2*pi*x - 1/2*x^2");
    assert_eq!(field(&out, "y(x0) = p0"), "true (error 0)");

    let out = stdout(&["approximate", "--ode", "q - x", "--at", "0,0,0", "--solve-for", "q", "--order", "1,1"]);
    assert_eq!(field(&out, "y(x), powers of x"), "1/2*x^2");
}

#[test]
fn series_examples() {
    let out = stdout(&["series", "--ode", "p^2+q^2-1", "--at", "pi/2,1", "--order", "2"]);
    let mut second: Vec<&str> = out.lines().filter(|l| l.trim_start().starts_with("y^(2)(x0)")).map(|l| l.rsplit(':').next().unwrap().trim()).collect();
    second.sort();
    assert_eq!(second, ["-1", "0"]);
    assert_eq!(field(&out, "equivalent"), "true");
    assert_eq!(number(&out, "max delta"), 0.0);

    let out = stdout(&["series", "--ode", "q-1", "--at", "0,0", "--ic", "y=0"]);
    assert_eq!(field(&out, "y(x)"), "x");

    let out = stdout(&["series", "--ode", "2*p - q", "--at", "0,1", "--order", "2"]);
    assert_eq!(field(&out, "taylor coefficients"), "[1, 2, 2]");
    assert_eq!(field(&out, "equivalent"), "true");
}

#[test]
fn validate_examples() {
    let out = stdout(&["validate", "--example", "2ter", "--interval", "pi/2-0.5,pi/2+0.5", "--samples", "101"]);
    assert!(number(&out, "max |u - reference|") <= 0.003);

    let out = stdout(&["validate", "--ode", "2*p - q", "--at", "0,1", "--interval", "-1,1"]);
    assert!(number(&out, "max |F(x, u, u')|") <= 1e-12);

    let out = stdout(&["validate", "--example", "1", "--interval", "0,0"]);
    assert_eq!(field(&out, "samples"), "1");
    assert_eq!(field(&out, "max |F(x, u, u')|"), "0");
    assert_eq!(field(&out, "max |u - reference|"), "0");
}

#[test]
fn validate_reads_a_solution_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.txt");
    std::fs::write(&path, "exp(2*x)\n").unwrap();
    let out = stdout(&["validate", "--ode", "2*p - q", "--at", "0,1", "--solution-from", "file", "--file", path.to_str().unwrap()]);
    assert_eq!(field(&out, "candidate y(x)"), "exp(2*x)");
    assert!(number(&out, "max |F(x, u, u')|") <= 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["approximate", "--ode", "2*p -", "--at", "0,1"]), 2);
    assert_eq!(code(&["approximate", "--ode", "2*p - q", "--at", "zero,1"]), 2);
    assert_eq!(code(&["example", "5"]), 2);
    assert_eq!(code(&["validate", "--example", "1", "--interval", "1,2"]), 2);
    assert_eq!(code(&["approximate", "--ode", "2*p - q", "--at", "0,5,3"]), 3);
    assert_eq!(code(&["approximate", "--ode", "p^2+q^2-1", "--at", "pi/2,1,0", "--solve-for", "q"]), 3);
    assert_eq!(code(&["approximate", "--ode", "q^2 + 1", "--at", "0,0"]), 3);
    assert_eq!(code(&["series", "--ode", "q^2+1", "--at", "0,0"]), 4);
    assert_eq!(code(&["validate", "--ode", "q - x", "--at", "0,0,0", "--solution-from", "file", "--file", "/nonexistent/u.txt"]), 4);
    assert_eq!(code(&["approximate", "--ode", "2*p - q", "--at", "0,1"]), 0);
}

#[test]
fn diagnostics_go_to_stderr() {
    let out = ift_ode(&["approximate", "--ode", "2*p - q", "--at", "0,5,3"]);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("base point"));
}

fn run_with_csv(args: &[&str], csv: &Path) -> (Vec<u8>, Vec<u8>) {
    let mut all = vec!["--csv", csv.to_str().unwrap()];
    all.extend_from_slice(args);
    let out = ift_ode(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    (out.stdout, std::fs::read(csv).unwrap())
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["example", "4"],
        &["example", "3"],
        &["approximate", "--ode", "p^2+q^2-1", "--at", "pi/2,1,0", "--solve-for", "p", "--order", "1,2"],
        &["validate", "--example", "2ter"],
    ];
    for args in cases {
        let a = run_with_csv(args, &dir.path().join("a.csv"));
        let b = run_with_csv(args, &dir.path().join("b.csv"));
        assert_eq!(a, b, "{args:?}");
        assert!(!a.1.is_empty());
    }
    assert_eq!(stdout(&["--json", "example", "2"]), stdout(&["--json", "example", "2"]));
}

#[test]
fn csv_has_header_and_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let (_, csv) = run_with_csv(&["example", "4", "--R0", "0.1"], &path);
    let csv = String::from_utf8(csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,radius_approx,radius_numeric,abs_error"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, [0.0, 0.1, 0.1, 0.0]);
    assert!(csv.lines().count() > 100);
}

#[test]
fn csv_rejected_without_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    assert_eq!(code(&["--csv", path.to_str().unwrap(), "series", "--ode", "q-1", "--at", "0,0", "--ic", "y=0"]), 2);
}

#[test]
fn example_1_values() {
    let out = stdout(&["example", "1"]);
    assert_eq!(field(&out, "y(x), powers of x"), "exp(2*x)");
    assert_eq!(field(&out, "shape a0 + b0 x + c0 exp(d0 x)"), "a0 = 0, b0 = 0, c0 = 1, d0 = 2");
    assert_eq!(field(&out, "max |F|"), "0");
}

#[test]
fn example_2ter_values() {
    let out = stdout(&["example", "2ter"]);
    assert_eq!(field(&out, "coefficients of 1, x, x^2"), "[-0.23370055013616975, 1.5707963267948966, -0.5]");
    assert!(number(&out, "max |u - sin|") <= 0.003);
    assert_eq!(field(&out, "branches for y''(pi/2)"), "[-1, 0]");
    assert_eq!(field(&out, "equivalent"), "true");
}

#[test]
fn example_3_values() {
    let out = stdout(&["example", "3"]);
    assert_eq!(field(&out, "3*sqrt(3)/2, -2*sqrt(3)"), "2.598076211353316, -3.4641016151377544");
    assert!((number(&out, "D(1,0)") + 1.5).abs() < 1e-12);
    assert!((number(&out, "D(3,0)") - 1.5).abs() < 1e-12);
    assert!(out.contains("published 3*sqrt(3)/2"));
    let expansion = field(&out, "third-order expansion");
    assert!(expansion.starts_with("1 + 0.8660254037844386*(pi - 3*x) + 0.41666666666666663*(pi - 3*x)^2 + 0.1443375672974064"));
    assert_eq!(field(&out, "2/(9*sqrt(3))"), "0.12830005981991685");
    assert!(out.contains("0.1283000598199166"));
}

#[test]
fn example_4_values() {
    let out = stdout(&["example", "4", "--R0", "0.1"]);
    assert_eq!(field(&out, "local ODE"), "p = 1/10 - 1/20*q^2");
    assert_eq!(field(&out, "y(x), powers of x"), "1/10 - 5*x^2");
    assert!(field(&out, "t_c from the local solution").ends_with("(~0.1414214)"));
    let numeric = number(&out, "numeric collapse time");
    assert!((numeric - 0.091468).abs() / 0.091468 <= 0.01, "{numeric}");
}

#[test]
fn example_4_scales_with_radius() {
    let out = stdout(&["example", "4", "--R0", "0.2", "--p-f", "2", "--rho", "1"]);
    let tc = number(&out, "t_c from the local solution");
    assert!((tc - 2f64.sqrt() * 0.2 * (0.5f64).sqrt()).abs() < 1e-12, "{tc}");
}
