//! Real rational functions `num(x)/den(x)` given by ascending coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFn {
    /// `[a₀, a₁, …]` for `a₀ + a₁x + …`.
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

fn trimmed(c: &[f64]) -> &[f64] {
    let end = c.iter().rposition(|&v| v != 0.0).map_or(0, |k| k + 1);
    &c[..end]
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

impl RationalFn {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Self {
        RationalFn { num, den }
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.num, x) / horner(&self.den, x)
    }

    pub fn degrees(&self) -> (Option<usize>, Option<usize>) {
        let d = |c: &[f64]| trimmed(c).len().checked_sub(1);
        (d(&self.num), d(&self.den))
    }

    /// Limit as `|x| → ∞`; `None` when the function grows without bound.
    pub fn at_infinity(&self) -> Option<f64> {
        match self.degrees() {
            (_, None) => None,
            (None, Some(_)) => Some(0.0),
            (Some(n), Some(d)) if n < d => Some(0.0),
            (Some(n), Some(d)) if n == d => Some(self.num[n] / self.den[d]),
            _ => None,
        }
    }

    /// Checks that the function is bounded on the extended line and the
    /// denominator has no real roots.
    pub fn validate(&self) -> Result<()> {
        if self.num.iter().chain(&self.den).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("non-finite coefficient".into()));
        }
        let Some(_) = self.degrees().1 else {
            return Err(Error::InvalidProblem("denominator is identically zero".into()));
        };
        if self.at_infinity().is_none() {
            return Err(Error::InvalidProblem(
                "numerator degree exceeds denominator degree".into(),
            ));
        }
        if let Some(r) = real_roots(&self.den).first() {
            return Err(Error::InvalidProblem(format!(
                "denominator vanishes on the real axis near x = {r}"
            )));
        }
        Ok(())
    }
}

/// Complex roots of a real polynomial (Durand-Kerner iteration).
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let c = trimmed(coeffs);
    if c.len() <= 1 {
        return Vec::new();
    }
    let deg = c.len() - 1;
    let lead = c[deg];
    let monic: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v / lead, 0.0)).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
    let radius = 1.0 + monic[..deg].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * radius.min(2.0)).collect();
    for _ in 0..1000 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm() / z[i].norm().max(1.0));
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Real roots (imaginary part below `1e-7` relative to the root size).
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let c = trimmed(coeffs);
    let mut out: Vec<f64> = roots(c)
        .into_iter()
        .filter(|r| r.im.abs() <= 1e-7 * r.norm().max(1.0))
        .map(|r| r.re)
        .collect();
    // a sign change is a real root regardless of how the iteration landed
    if out.is_empty() && c.len() > 1 {
        let lo = horner(c, -1e8);
        let hi = horner(c, 1e8);
        let mid = horner(c, 0.0);
        if lo * mid < 0.0 || mid * hi < 0.0 || mid == 0.0 {
            out.push(0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_and_limits() {
        let p = RationalFn::new(vec![10.0, 0.0, 1.0], vec![1.0, 0.0, 1.0]);
        assert_eq!(p.eval(0.0), 10.0);
        assert_eq!(p.at_infinity(), Some(1.0));
        let q = RationalFn::new(vec![6.0], vec![1.0, 0.0, 1.0]);
        assert_eq!(q.eval(1.0), 3.0);
        assert_eq!(q.at_infinity(), Some(0.0));
        let grows = RationalFn::new(vec![0.0, 0.0, 1.0], vec![1.0]);
        assert_eq!(grows.at_infinity(), None);
        assert!(grows.validate().is_err());
        assert!(p.validate().is_ok() && q.validate().is_ok());
    }

    #[test]
    fn real_rooted_denominators_are_rejected() {
        // x² − 1
        assert!(RationalFn::new(vec![1.0], vec![-1.0, 0.0, 1.0]).validate().is_err());
        // x² (double root at 0)
        assert!(RationalFn::new(vec![1.0], vec![0.0, 0.0, 1.0]).validate().is_err());
        // (x − 2)(x² + 1)
        assert!(RationalFn::new(vec![1.0], vec![-2.0, 1.0, -2.0, 1.0])
            .validate()
            .is_err());
        // (x² + 4)(x² + 9)
        assert!(RationalFn::new(vec![1.0], vec![36.0, 0.0, 13.0, 0.0, 1.0])
            .validate()
            .is_ok());
        assert!(RationalFn::new(vec![1.0], vec![0.0]).validate().is_err());
    }

    #[test]
    fn durand_kerner_roots() {
        let mut r = roots(&[4.0, 0.0, 1.0]);
        r.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((r[0] - Complex64::new(0.0, -2.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        let mut rr = real_roots(&[-6.0, 11.0, -6.0, 1.0]);
        rr.sort_by(f64::total_cmp);
        for (a, b) in rr.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
