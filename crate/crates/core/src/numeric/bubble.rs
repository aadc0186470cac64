//! Collapse of an empty spherical bubble:
//! `(2/3) y y'' + y'^2 = -(2/3) p_f / rho`, `y(0) = R0`, `y'(0) = 0`.

use serde::Serialize;

use super::{Integrator, NumericError, Sample, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BubbleParams {
    pub r0: f64,
    pub p_f: f64,
    pub rho: f64,
}

impl Default for BubbleParams {
    fn default() -> Self {
        BubbleParams { r0: 0.1, p_f: 1.0, rho: 1.0 }
    }
}

impl BubbleParams {
    pub fn validate(&self) -> Result<(), NumericError> {
        for (name, v) in [("R0", self.r0), ("p_f", self.p_f), ("rho", self.rho)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(NumericError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `p_f / rho`
    pub fn drive(&self) -> f64 {
        self.p_f / self.rho
    }

    /// `y^3 v^2 - (2/3)(p_f/rho)(R0^3 - y^3)`, zero along exact solutions.
    pub fn energy(&self, y: f64, v: f64) -> f64 {
        let y3 = y * y * y;
        y3 * v * v - 2.0 / 3.0 * self.drive() * (self.r0.powi(3) - y3)
    }

    /// Grid step used when none is given: 1e-4 of the natural time scale.
    pub fn default_step(&self) -> f64 {
        1e-4 * self.r0 * (self.rho / self.p_f).sqrt()
    }
}

/// `v' = -(p_f/rho + 1.5 v^2) / y`
pub fn bubble_acceleration(params: &BubbleParams, y: f64, v: f64) -> f64 {
    -(params.drive() + 1.5 * v * v) / y
}

/// `t_c = R0 sqrt(3 rho / (2 p_f)) * int_0^1 dz / sqrt(z^-3 - 1)` from the first integral.
pub fn collapse_time_oracle(params: &BubbleParams) -> f64 {
    // z = 1 - u^2 removes the endpoint singularity
    let g = |u: f64| {
        let z = 1.0 - u * u;
        2.0 * z.powf(1.5) / (1.0 + z + z * z).sqrt()
    };
    params.r0 * (1.5 * params.rho / params.p_f).sqrt() * adaptive_simpson(&g, 0.0, 1.0, 1e-14)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 40)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BubbleRun {
    pub params: BubbleParams,
    /// Uniform-grid samples `(t, y, y')` up to the last full grid step above the floor.
    pub trajectory: Trajectory,
    /// Refined substeps after the last grid node, ending below the floor.
    pub approach: Vec<Sample>,
    pub floor: f64,
    pub collapse_time: f64,
    /// Largest `|energy|` over all accepted substeps.
    pub max_energy_drift: f64,
    pub substeps: usize,
    pub smallest_substep: f64,
}

/// Per-substep energy increment allowed before the substep is halved, as a
/// fraction of `R0^3 p_f/rho`.
const STEP_ENERGY_TOL: f64 = 1e-10;
/// Bound on accumulated energy drift, same units.
pub const ENERGY_DRIFT_TOL: f64 = 1e-6;
const MAX_HALVINGS: u32 = 60;

fn rk4(params: &BubbleParams, y: f64, v: f64, s: f64) -> (f64, f64) {
    let acc = |y: f64, v: f64| bubble_acceleration(params, y, v);
    let (k1y, k1v) = (v, acc(y, v));
    let (k2y, k2v) = (v + 0.5 * s * k1v, acc(y + 0.5 * s * k1y, v + 0.5 * s * k1v));
    let (k3y, k3v) = (v + 0.5 * s * k2v, acc(y + 0.5 * s * k2y, v + 0.5 * s * k2v));
    let (k4y, k4v) = (v + s * k3v, acc(y + s * k3y, v + s * k3v));
    (
        y + s / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        v + s / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// Fixed-grid RK4 on `(y, v)` with energy-monitored substeps.
///
/// Each grid interval is covered by substeps of `step / 2^level`; a substep
/// is retried at the next level when the energy changes by more than the
/// per-step budget or `y` leaves `(0, inf)`. Levels only increase, so the
/// integration stays deterministic. The run stops at the first substep below
/// `floor_fraction * R0` and the collapse time is the value at `y = 0` of the
/// quadratic `t(y)` through the last three substeps.
pub fn integrate_bubble(params: &BubbleParams, step: f64, floor_fraction: f64) -> Result<BubbleRun, NumericError> {
    params.validate()?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(NumericError::InvalidStep(step));
    }
    if !(floor_fraction > 0.0 && floor_fraction < 1.0) {
        return Err(NumericError::InvalidParameter(format!("floor fraction must be in (0, 1), got {floor_fraction}")));
    }
    let scale = params.r0.powi(3) * params.drive();
    let step_tol = STEP_ENERGY_TOL * scale;
    let allowed = ENERGY_DRIFT_TOL * scale;
    let floor = floor_fraction * params.r0;

    let mut trajectory =
        Trajectory { samples: vec![Sample { x: 0.0, y: params.r0, dy: 0.0 }], step, integrator: Integrator::Rk4Bubble, stopped: None };
    let (mut y, mut v) = (params.r0, 0.0);
    let mut energy = params.energy(y, v);
    let mut max_drift = energy.abs();
    let mut level = 0u32;
    let mut substeps = 0usize;
    let mut recent: Vec<Sample> = vec![trajectory.samples[0]];

    for grid in 0usize.. {
        let t_start = grid as f64 * step;
        let mut approach = Vec::new();
        // position inside the interval in units of step / 2^level
        let mut done = 0u64;
        loop {
            let per = 1u64 << level;
            if done == per {
                break;
            }
            let s = step / per as f64;
            let (yn, vn) = rk4(params, y, v, s);
            let en = params.energy(yn, vn);
            let ok = yn > 0.0 && yn.is_finite() && vn.is_finite() && (en - energy).abs() <= step_tol;
            if !ok {
                if level == MAX_HALVINGS {
                    let t = t_start + done as f64 * s;
                    return Err(NumericError::StepTooLarge { t, drift: (en - energy).abs(), allowed: step_tol });
                }
                level += 1;
                done *= 2;
                continue;
            }
            done += 1;
            substeps += 1;
            (y, v, energy) = (yn, vn, en);
            max_drift = max_drift.max(energy.abs());
            let t = if done == per { (grid + 1) as f64 * step } else { t_start + done as f64 * s };
            if energy.abs() > allowed {
                return Err(NumericError::StepTooLarge { t, drift: energy.abs(), allowed });
            }
            let sample = Sample { x: t, y, dy: v };
            recent.push(sample);
            if recent.len() > 3 {
                recent.remove(0);
            }
            if y < floor {
                approach.push(sample);
                let collapse_time = extrapolate_to_zero(&recent);
                return Ok(BubbleRun {
                    params: *params,
                    trajectory,
                    approach,
                    floor,
                    collapse_time,
                    max_energy_drift: max_drift,
                    substeps,
                    smallest_substep: step / (1u64 << level) as f64,
                });
            }
            if done == per {
                trajectory.samples.push(sample);
            } else {
                approach.push(sample);
            }
        }
    }
    unreachable!("the grid loop only exits by returning")
}

/// Lagrange interpolation of `t(y)` evaluated at `y = 0`.
fn extrapolate_to_zero(pts: &[Sample]) -> f64 {
    let mut t0 = 0.0;
    for (i, pi) in pts.iter().enumerate() {
        let mut w = 1.0;
        for (j, pj) in pts.iter().enumerate() {
            if i != j {
                w *= -pj.y / (pi.y - pj.y);
            }
        }
        t0 += w * pi.x;
    }
    t0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_values() {
        let p = BubbleParams::default();
        let tc = collapse_time_oracle(&p);
        assert!((tc - 0.091468).abs() < 5e-6, "{tc}");
        let unit = BubbleParams { r0: 1.0, ..p };
        assert!((collapse_time_oracle(&unit) - 10.0 * tc).abs() < 1e-12);
    }

    #[test]
    fn initial_acceleration() {
        let p = BubbleParams::default();
        assert_eq!(bubble_acceleration(&p, p.r0, 0.0), -10.0);
    }

    #[test]
    fn collapse_matches_oracle() {
        let p = BubbleParams::default();
        let run = integrate_bubble(&p, p.default_step(), 1e-3).unwrap();
        let oracle = collapse_time_oracle(&p);
        assert!((run.collapse_time - oracle).abs() < 1e-6 * oracle, "{} vs {oracle}", run.collapse_time);
        assert!(run.max_energy_drift <= ENERGY_DRIFT_TOL * p.r0.powi(3));
        let steps: Vec<f64> = run.trajectory.samples.windows(2).map(|w| w[1].x - w[0].x).collect();
        assert!(steps.iter().all(|s| (s - run.trajectory.step).abs() <= 1e-15));
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = BubbleParams { rho: 0.0, ..Default::default() };
        assert!(matches!(integrate_bubble(&p, 1e-5, 1e-3), Err(NumericError::InvalidParameter(_))));
    }
}
