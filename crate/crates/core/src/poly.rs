//! Dense univariate polynomial helpers (coefficients in ascending powers).

pub fn eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Re-expands `sum c_k (x - x0)^k` in powers of `x`.
pub fn recenter_to_origin(centered: &[f64], x0: f64) -> Vec<f64> {
    let mut out = vec![0.0; centered.len()];
    for (k, c) in centered.iter().enumerate() {
        for (j, slot) in out.iter_mut().enumerate().take(k + 1) {
            *slot += c * binomial(k, j) * (-x0).powi((k - j) as i32);
        }
    }
    out
}

/// Real roots of `a t^2 + b t + c`, ascending; `None` when the polynomial
/// vanishes identically. A negative discriminant within `disc_tol` of zero is
/// treated as a double root.
pub fn real_quadratic_roots(a: f64, b: f64, c: f64, disc_tol: f64) -> Option<Vec<f64>> {
    if a == 0.0 {
        if b == 0.0 {
            return if c == 0.0 { None } else { Some(vec![]) };
        }
        return Some(vec![-c / b]);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < -disc_tol {
        return Some(vec![]);
    }
    if disc <= 0.0 {
        return Some(vec![-b / (2.0 * a)]);
    }
    let sq = disc.sqrt();
    // avoid cancellation in the smaller-magnitude root
    let qq = -0.5 * (b + b.signum() * sq);
    let (mut r1, mut r2) = if qq == 0.0 { (sq / (2.0 * a), -sq / (2.0 * a)) } else { (qq / a, c / qq) };
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    Some(vec![r1, r2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recentering() {
        // (x - 1)^2 = x^2 - 2x + 1
        assert_eq!(recenter_to_origin(&[0.0, 0.0, 1.0], 1.0), vec![1.0, -2.0, 1.0]);
        let c = [0.3, -1.2, 0.7, 2.0];
        let x0 = 0.9;
        let b = recenter_to_origin(&c, x0);
        for x in [-1.0, 0.0, 0.4, 2.5] {
            assert!((eval(&b, x) - eval(&c, x - x0)).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_roots() {
        assert_eq!(real_quadratic_roots(1.0, -3.0, 2.0, 0.0), Some(vec![1.0, 2.0]));
        assert_eq!(real_quadratic_roots(1.0, 0.0, 1.0, 0.0), Some(vec![]));
        assert_eq!(real_quadratic_roots(1.0, 1.0, 0.0, 0.0), Some(vec![-1.0, 0.0]));
        assert_eq!(real_quadratic_roots(-0.5, 0.0, 0.0, 0.0), Some(vec![0.0]));
        assert_eq!(real_quadratic_roots(0.0, 2.0, -1.0, 0.0), Some(vec![0.5]));
        assert_eq!(real_quadratic_roots(0.0, 0.0, 0.0, 0.0), None);
    }
}
