use std::fmt;

use whasym::asymfact::{self, alpha_bound_violations, alpha_sequence, alpha_to_f64};
use whasym::cauchy::jump_solve;
use whasym::scalarfact::scalar_factor;
use whasym::{CMat, Complex64, Grid, Result, SampledMatrixFunction};

pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
}

impl Check {
    fn new(name: &'static str, tolerance: f64, measured: Result<f64>) -> Self {
        match measured {
            Ok(measured) => Check {
                name,
                measured,
                tolerance,
                error: None,
            },
            Err(e) => Check {
                name,
                measured: f64::NAN,
                tolerance,
                error: Some(e.to_string()),
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.measured < self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => write!(f, "{verdict} {}: error: {e}", self.name),
            None => write!(
                f,
                "{verdict} {}: measured {:.3e}, tolerance {:.1e}",
                self.name, self.measured, self.tolerance
            ),
        }
    }
}

pub struct Report {
    pub checks: Vec<Check>,
    /// Lines describing the α table; informational.
    pub alpha_table: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn plemelj_split(grid: &std::sync::Arc<Grid>) -> Result<(f64, f64)> {
    let m = SampledMatrixFunction::sample_scalar(grid, |x| c(1.0 / (x * x + 1.0), 0.0), c(0.0, 0.0))?;
    let sol = jump_solve(&m)?;
    let exact_minus = SampledMatrixFunction::sample_scalar(grid, |x| c(0.0, -0.5) / c(x, -1.0), c(0.0, 0.0))?;
    let exact_plus = SampledMatrixFunction::sample_scalar(grid, |x| c(0.0, 0.5) / c(x, 1.0), c(0.0, 0.0))?;
    let err = sol
        .n_minus
        .max_abs_diff(&exact_minus)?
        .max(sol.n_plus.max_abs_diff(&exact_plus)?);
    Ok((err, sol.reconstruction_defect(&m)?))
}

/// Max relative error of the factors of `(x²+a²)/(x²+1)` against `(x∓ia)/(x∓i)`.
fn scalar_oracle(grid: &std::sync::Arc<Grid>, a: f64) -> Result<f64> {
    let f = SampledMatrixFunction::sample_scalar(grid, |x| c((x * x + a * a) / (x * x + 1.0), 0.0), c(1.0, 0.0))?;
    let pair = scalar_factor(&f)?;
    let mut worst = 0.0f64;
    for (j, &x) in grid.nodes().iter().enumerate() {
        let minus = c(x, -a) / c(x, -1.0);
        let plus = c(x, a) / c(x, 1.0);
        worst = worst
            .max((pair.minus.values()[j][(0, 0)] - minus).norm() / minus.norm())
            .max((pair.plus.values()[j][(0, 0)] - plus).norm() / plus.norm());
    }
    Ok(worst)
}

/// Constant `G₁ = (1 + c)·I`: each factor term must equal `binom(1/2, k)·cᵏ`.
fn binomial_series(grid: &std::sync::Arc<Grid>, c0: f64, order: usize) -> Result<f64> {
    let g1 = SampledMatrixFunction::constant(grid, CMat::identity(2).scale(c(1.0 + c0, 0.0)));
    let series = asymfact::run(&g1, order, 1e-300)?;
    let mut coeff = 1.0;
    let mut worst = 0.0f64;
    for k in 1..=series.order() {
        coeff *= (0.5 - (k as f64 - 1.0)) / k as f64;
        let expected =
            SampledMatrixFunction::constant(grid, CMat::identity(2).scale(c(coeff * c0.powi(k as i32), 0.0)));
        worst = worst
            .max(series.terms_minus[k - 1].max_abs_diff(&expected)?)
            .max(series.terms_plus[k - 1].max_abs_diff(&expected)?);
    }
    Ok(worst)
}

fn alpha_prefix() -> (f64, Vec<String>) {
    let alpha = alpha_sequence(20);
    let expected = [0.5, 0.125, 0.0625, 0.0390625];
    let err = expected
        .iter()
        .zip(&alpha)
        .map(|(e, a)| (alpha_to_f64(a) - e).abs())
        .fold(0.0, f64::max);
    let mut lines: Vec<String> = alpha
        .iter()
        .enumerate()
        .map(|(i, a)| format!("alpha[{}] = {} = {:.6e}", i + 1, a, alpha_to_f64(a)))
        .collect();
    let violations = alpha_bound_violations(&alpha);
    if !violations.is_empty() {
        lines.push(format!("note: alpha_k < 1/(16(k-3)) fails at k = {violations:?}"));
    }
    (err, lines)
}

pub fn run(scale: f64, nodes: usize) -> Result<Report> {
    let grid = Grid::new(scale, nodes)?;
    let plemelj = plemelj_split(&grid);
    let (split, recon) = match plemelj {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    let (alpha_err, alpha_table) = alpha_prefix();
    let checks = vec![
        Check::new("plemelj split of 1/(x^2+1)", 1e-6, split),
        Check::new("plemelj reconstruction", 1e-10, recon),
        Check::new("scalar factors of (x^2+16)/(x^2+1)", 1e-6, scalar_oracle(&grid, 4.0)),
        Check::new("scalar factors of (x^2+4)/(x^2+1)", 1e-6, scalar_oracle(&grid, 2.0)),
        Check::new("binomial series for sqrt(1.2)", 1e-14, binomial_series(&grid, 0.2, 8)),
        Check::new("alpha recurrence prefix", 1e-15, Ok(alpha_err)),
    ];
    Ok(Report { checks, alpha_table })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_on_default_grid() {
        let report = run(10.0, 4096).unwrap();
        for check in &report.checks {
            assert!(check.passed(), "{check}");
        }
        assert!(report.alpha_table[0].contains("1/2"));
        assert!(report.alpha_table[1].contains("1/8"));
        assert!(report.alpha_table[2].contains("1/16"));
    }

    #[test]
    fn coarse_grid_fails_plemelj() {
        let report = run(10.0, 32).unwrap();
        assert!(!report.checks[0].passed(), "{}", report.checks[0]);
        assert!(!report.passed());
    }
}
