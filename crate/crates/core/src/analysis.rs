//! Remainders of first-order factorizations and the data behind the error
//! comparisons: the full scheme built from `N = N1 + N2`, and the scheme that
//! factors only the anti-diagonal part `N2`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cauchy::jump_solve;
use crate::error::{Error, Result};
use crate::example_oracle::{
    closed_first_order, closed_star_factors, exact_density, exact_first_order, exact_star_factors, sample_printed_m0,
};
use crate::gridfn::{Grid, SampledMatrixFunction};
use crate::special2x2::{ClassSpec2x2, FFactorization2x2};

/// Where the first-order factors come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstOrderModel {
    /// Numerical pipeline: product `G₁`, quadrature jump solutions.
    Computed,
    /// The published closed forms of the worked example.
    Published,
    /// Exact partial-fraction factors of the worked example's product `G₁`.
    Exact,
}

/// Everything needed to evaluate both first-order schemes at one `φ`.
#[derive(Debug, Clone)]
pub struct FirstOrderScheme {
    pub model: FirstOrderModel,
    pub phi: f64,
    pub g1: SampledMatrixFunction,
    pub n1_minus: SampledMatrixFunction,
    pub n1_plus: SampledMatrixFunction,
    /// Diagonal part `N1` of `N = G₁ − I`.
    pub n_diag: SampledMatrixFunction,
    pub star_minus: SampledMatrixFunction,
    pub star_plus: SampledMatrixFunction,
}

impl FirstOrderScheme {
    /// Numerical scheme for a validated 2×2 class member.
    pub fn computed(spec: &ClassSpec2x2, ff: &FFactorization2x2) -> Result<Self> {
        let g1 = spec.build_g1(ff)?;
        let split = spec.split_n(ff, &g1)?;
        let first = jump_solve(&split.n)?;
        let star = jump_solve(&split.n2)?;
        Ok(FirstOrderScheme {
            model: FirstOrderModel::Computed,
            phi: spec.phi(),
            g1,
            n1_minus: first.n_minus,
            n1_plus: first.n_plus,
            n_diag: split.n1,
            star_minus: star.n_minus,
            star_plus: star.n_plus,
        })
    }

    /// The worked example with the published density and factors.
    pub fn published(phi: f64, grid: &Arc<Grid>) -> Result<Self> {
        let m0 = sample_printed_m0(phi, grid)?;
        let (minus, plus) = closed_first_order(phi);
        let (star_minus, star_plus) = closed_star_factors(phi);
        Ok(FirstOrderScheme {
            model: FirstOrderModel::Published,
            phi,
            g1: m0.checked_add(&SampledMatrixFunction::identity(grid, 2))?,
            n_diag: m0.map(|m| m.diagonal_part()),
            n1_minus: minus.sample(grid)?,
            n1_plus: plus.sample(grid)?,
            star_minus: star_minus.sample(grid)?,
            star_plus: star_plus.sample(grid)?,
        })
    }

    /// The worked example with exact factors of the product `G₁`.
    pub fn exact(phi: f64, grid: &Arc<Grid>) -> Result<Self> {
        let density = exact_density(phi);
        let (minus, plus) = exact_first_order(phi)?;
        let (star_minus, star_plus) = exact_star_factors(phi)?;
        Ok(FirstOrderScheme {
            model: FirstOrderModel::Exact,
            phi,
            g1: density
                .sample(grid)?
                .checked_add(&SampledMatrixFunction::identity(grid, 2))?,
            n_diag: density.diagonal().sample(grid)?,
            n1_minus: minus.sample(grid)?,
            n1_plus: plus.sample(grid)?,
            star_minus: star_minus.sample(grid)?,
            star_plus: star_plus.sample(grid)?,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.g1.grid()
    }

    pub fn remainder(&self) -> Result<SampledMatrixFunction> {
        remainder_first_order(&self.g1, &self.n1_minus, &self.n1_plus)
    }

    pub fn remainder_star(&self) -> Result<SampledMatrixFunction> {
        remainder_star(&self.n_diag, &self.star_minus, &self.star_plus)
    }
}

/// `ΔK = G₁ − (I + N₁⁻)(I + N₁⁺)`, which equals `−N₁⁻N₁⁺` whenever
/// `N₁⁻ + N₁⁺ = G₁ − I`.
pub fn remainder_first_order(
    g1: &SampledMatrixFunction,
    n1_minus: &SampledMatrixFunction,
    n1_plus: &SampledMatrixFunction,
) -> Result<SampledMatrixFunction> {
    let id = SampledMatrixFunction::identity(g1.grid(), g1.dim());
    let minus = id.checked_add(n1_minus)?;
    let plus = id.checked_add(n1_plus)?;
    g1.checked_sub(&minus.checked_mul(&plus)?)
}

/// `ΔK* = N1 − N*⁻N*⁺`; with diagonal `N1` and anti-diagonal factors its
/// off-diagonal entries vanish identically.
pub fn remainder_star(
    n1_diag: &SampledMatrixFunction,
    star_minus: &SampledMatrixFunction,
    star_plus: &SampledMatrixFunction,
) -> Result<SampledMatrixFunction> {
    n1_diag.checked_sub(&star_minus.checked_mul(star_plus)?)
}

/// `(|ΔK₁₁(0)|/φ², |ΔK₂₂(0)|/φ²)`.
pub fn quad_coefficient(scheme: &FirstOrderScheme) -> Result<(f64, f64)> {
    let dk = scheme.remainder()?.eval_at(0.0);
    let s = scheme.phi * scheme.phi;
    Ok((dk[(0, 0)].norm() / s, dk[(1, 1)].norm() / s))
}

/// Polynomial extrapolation of `(h, value)` samples to `h = 0` (Neville).
pub fn richardson(points: &[(f64, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidProblem("no points to extrapolate".into()));
    }
    let h: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut t: Vec<f64> = points.iter().map(|p| p.1).collect();
    let n = t.len();
    for level in 1..n {
        for i in 0..n - level {
            let (hi, hj) = (h[i], h[i + level]);
            if hi == hj {
                return Err(Error::InvalidProblem("repeated extrapolation step".into()));
            }
            t[i] = (hi * t[i + 1] - hj * t[i]) / (hi - hj);
        }
    }
    Ok(t[0])
}

/// One row of the error comparison, moduli normalized by `φ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub phi: f64,
    pub dk11: f64,
    pub dk22: f64,
    pub dk12: f64,
    pub dk11_star: f64,
    pub dk22_star: f64,
    pub dk12_star: f64,
}

/// Summary of one scheme at one `φ`.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub model: FirstOrderModel,
    pub phi: f64,
    pub grid_scale: f64,
    pub grid_nodes: usize,
    /// `|ΔK_jj(0)|/φ²` for `j = 1, 2`.
    pub quad_coefficient: (f64, f64),
    pub delta_k_sup: f64,
    pub delta_k_star_sup: f64,
    /// `sup |ΔK + N₁⁻N₁⁺|`.
    pub identity_defect: f64,
    /// `max off-diagonal |ΔK*| / max diagonal |ΔK*|`.
    pub star_off_diagonal_ratio: f64,
    /// Node and value of the largest `|ΔK₁₁|/φ²` over `|x| > 1`.
    pub dk11_argmax_outside_unit: (f64, f64),
    /// `sup_{|x|>100} |ΔK₁₁| / |ΔK₁₁(0)|`.
    pub far_to_center_ratio: f64,
    /// Fraction of nodes with `|x| > 10` where `|ΔK₁₁| < |ΔK*₁₁|`.
    pub full_beats_star_fraction: f64,
    pub rows: Vec<ComparisonRow>,
}

/// Remainders of both schemes over the grid and their summary.
pub fn comparison_table(scheme: &FirstOrderScheme) -> Result<AnalysisReport> {
    let phi = scheme.phi;
    let dk = scheme.remainder()?;
    let dks = scheme.remainder_star()?;
    let product = scheme.n1_minus.checked_mul(&scheme.n1_plus)?;
    let identity_defect = dk.checked_add(&product)?.sup_norm();

    let norm = if phi != 0.0 { 1.0 / (phi * phi) } else { 1.0 };
    let rows: Vec<ComparisonRow> = scheme
        .grid()
        .nodes()
        .iter()
        .zip(dk.values().iter().zip(dks.values()))
        .map(|(&x, (a, b))| ComparisonRow {
            x,
            phi,
            dk11: a[(0, 0)].norm() * norm,
            dk22: a[(1, 1)].norm() * norm,
            dk12: a[(0, 1)].norm() * norm,
            dk11_star: b[(0, 0)].norm() * norm,
            dk22_star: b[(1, 1)].norm() * norm,
            dk12_star: b[(0, 1)].norm() * norm,
        })
        .collect();

    let star_diag = dks
        .values()
        .iter()
        .map(|m| m.diagonal_part().max_abs())
        .fold(0.0, f64::max);
    let star_off = dks
        .values()
        .iter()
        .map(|m| m.max_abs_off_diagonal())
        .fold(0.0, f64::max);
    let star_off_diagonal_ratio = if star_diag > 0.0 {
        star_off / star_diag
    } else {
        star_off
    };

    let dk11_argmax_outside_unit = rows
        .iter()
        .filter(|r| r.x.abs() > 1.0)
        .map(|r| (r.x, r.dk11))
        .fold((f64::NAN, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });

    let center = dk.eval_at(0.0)[(0, 0)].norm();
    let far = rows
        .iter()
        .filter(|r| r.x.abs() > 100.0)
        .map(|r| r.dk11 / norm)
        .fold(0.0, f64::max);
    let far_to_center_ratio = if center > 0.0 { far / center } else { f64::INFINITY };

    let outer: Vec<&ComparisonRow> = rows.iter().filter(|r| r.x.abs() > 10.0).collect();
    let wins = outer.iter().filter(|r| r.dk11 < r.dk11_star).count();
    let full_beats_star_fraction = if outer.is_empty() {
        f64::NAN
    } else {
        wins as f64 / outer.len() as f64
    };

    let grid = scheme.grid();
    Ok(AnalysisReport {
        model: scheme.model,
        phi,
        grid_scale: grid.scale(),
        grid_nodes: grid.len(),
        quad_coefficient: quad_coefficient(scheme)?,
        delta_k_sup: dk.sup_norm(),
        delta_k_star_sup: dks.sup_norm(),
        identity_defect,
        star_off_diagonal_ratio,
        dk11_argmax_outside_unit,
        far_to_center_ratio,
        full_beats_star_fraction,
        rows,
    })
}

/// Rows for several reports merged in ascending `x`, then `φ`.
pub fn merged_rows(reports: &[AnalysisReport]) -> Vec<ComparisonRow> {
    let mut rows: Vec<ComparisonRow> = reports.iter().flat_map(|r| r.rows.iter().copied()).collect();
    rows.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.phi.total_cmp(&b.phi)));
    rows
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example_oracle::example_spec;

    fn grid() -> Arc<Grid> {
        Grid::new(10.0, 4096).unwrap()
    }

    #[test]
    fn richardson_recovers_polynomials() {
        let f = |h: f64| 4.0 + 3.0 * h - 7.0 * h * h;
        let pts: Vec<(f64, f64)> = [1e-2, 5e-3, 1e-3].iter().map(|&h| (h, f(h))).collect();
        assert!((richardson(&pts).unwrap() - 4.0).abs() < 1e-12);
        assert!((richardson(&pts[..2]).unwrap() - (2.0 * f(5e-3) - f(1e-2))).abs() < 1e-12);
        assert!(richardson(&[(1.0, 2.0), (1.0, 3.0)]).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [0.1, 0.01, 0.001].iter().map(|&p| (p, 3.0 * p * p)).collect();
        assert!((log_log_slope(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_phase_has_zero_remainders() {
        let g = Grid::new(10.0, 256).unwrap();
        let spec = example_spec(0.0, 0.5, &g).unwrap();
        let ff = spec.factorize_f().unwrap();
        let s = FirstOrderScheme::computed(&spec, &ff).unwrap();
        assert!(s.remainder().unwrap().sup_norm() < 1e-12);
        assert_eq!(s.remainder_star().unwrap().sup_norm(), 0.0);
        for model in [FirstOrderScheme::published(0.0, &g), FirstOrderScheme::exact(0.0, &g)] {
            let s = model.unwrap();
            assert!(s.remainder().unwrap().sup_norm() < 1e-15);
        }
    }

    #[test]
    fn remainder_is_minus_the_product() {
        let g = grid();
        let spec = example_spec(0.1, 0.5, &g).unwrap();
        let ff = spec.factorize_f().unwrap();
        let s = FirstOrderScheme::computed(&spec, &ff).unwrap();
        let report = comparison_table(&s).unwrap();
        assert!(report.identity_defect < 1e-12 * report.delta_k_sup.max(1.0));
        assert!(report.star_off_diagonal_ratio <= 1e-12);
        assert!(report.far_to_center_ratio < 0.1, "{}", report.far_to_center_ratio);
        assert!(report.rows.iter().all(|r| r.dk12_star == 0.0));
    }

    #[test]
    fn quadratic_law_by_model() {
        let g = grid();
        let published = quad_coefficient(&FirstOrderScheme::published(1e-3, &g).unwrap()).unwrap();
        assert!(
            (published.0 - 4.0).abs() < 0.2 && (published.1 - 4.0).abs() < 0.2,
            "{published:?}"
        );
        let exact = quad_coefficient(&FirstOrderScheme::exact(1e-3, &g).unwrap()).unwrap();
        assert!(
            (exact.0 - 1.0).abs() < 0.05 && (exact.1 - 1.0).abs() < 0.05,
            "{exact:?}"
        );
    }

    #[test]
    fn computed_agrees_with_exact() {
        let g = grid();
        let phi = 0.1;
        let spec = example_spec(phi, 0.5, &g).unwrap();
        let ff = spec.factorize_f().unwrap();
        let c = FirstOrderScheme::computed(&spec, &ff).unwrap();
        let e = FirstOrderScheme::exact(phi, &g).unwrap();
        assert!(c.g1.max_abs_diff(&e.g1).unwrap() < 1e-6);
        assert!(c.n1_minus.max_abs_diff(&e.n1_minus).unwrap() < 1e-4);
        assert!(c.star_plus.max_abs_diff(&e.star_plus).unwrap() < 1e-4);
    }

    #[test]
    fn rows_are_sorted_by_x_then_phi() {
        let g = Grid::new(10.0, 64).unwrap();
        let reports: Vec<AnalysisReport> = [0.1, 0.01]
            .iter()
            .map(|&p| comparison_table(&FirstOrderScheme::exact(p, &g).unwrap()).unwrap())
            .collect();
        let rows = merged_rows(&reports);
        assert_eq!(rows.len(), 128);
        assert!(rows
            .windows(2)
            .all(|w| w[0].x < w[1].x || (w[0].x == w[1].x && w[0].phi < w[1].phi)));
    }
}
