//! End-to-end runs on a [`ProblemSpec`].

use std::sync::Arc;

use crate::analysis::{comparison_table, AnalysisReport, FirstOrderModel, FirstOrderScheme};
use crate::asymfact::{self, convergence_gate, ConvergenceGate, FactorSeries};
use crate::error::{Error, Result};
use crate::gridfn::{Grid, SampledMatrixFunction};
use crate::problem::ProblemSpec;
use crate::special2x2::{FFactorization2x2, ValidationReport};

/// Factorization `G = G⁻G⁺` with `G⁻ = F⁻·G₁⁻` and `G⁺ = G₁⁺·F⁺`.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub grid: Arc<Grid>,
    pub phi: f64,
    pub validation: ValidationReport,
    pub f_factors: FFactorization2x2,
    pub g1: SampledMatrixFunction,
    pub series: FactorSeries,
    pub gate: ConvergenceGate,
    /// `sup |G₁ − G₁⁻G₁⁺|` for partial products of order `0..=series.order()`.
    pub residual_norms: Vec<f64>,
    pub g_minus: SampledMatrixFunction,
    pub g_plus: SampledMatrixFunction,
    /// `sup |G − G⁻G⁺|` at the highest computed order.
    pub full_residual: f64,
}

pub fn factorize(problem: &ProblemSpec) -> Result<Factorization> {
    problem.validate()?;
    let grid = problem.build_grid()?;
    let spec = problem.class_spec(problem.phi, &grid)?;
    let validation = spec.validation().clone();
    let ff = spec.factorize_f()?;
    let g1 = spec.build_g1(&ff)?;
    let series = asymfact::run(&g1, problem.order, problem.tol)?;
    let gate = convergence_gate(series.density(), problem.mu, problem.c_mu)?;
    let residual_norms = (0..=series.order())
        .map(|k| asymfact::residual(&g1, &series, k).map(|r| r.sup_norm()))
        .collect::<Result<Vec<_>>>()?;
    let (g1_minus, g1_plus) = asymfact::assemble(&series, series.order())?;
    let g_minus = ff.f_minus.checked_mul(&g1_minus)?;
    let g_plus = g1_plus.checked_mul(&ff.f_plus)?;
    let full_residual = spec.build_g()?.max_abs_diff(&g_minus.checked_mul(&g_plus)?)?;
    Ok(Factorization {
        grid,
        phi: problem.phi,
        validation,
        f_factors: ff,
        g1,
        series,
        gate,
        residual_norms,
        g_minus,
        g_plus,
        full_residual,
    })
}

/// First-order error comparison at each `phi` in turn.
pub fn analyze(problem: &ProblemSpec, phis: &[f64], model: FirstOrderModel) -> Result<Vec<AnalysisReport>> {
    problem.validate()?;
    if phis.is_empty() {
        return Err(Error::InvalidProblem("at least one phi is required".into()));
    }
    if model != FirstOrderModel::Computed && !problem.is_preset() {
        return Err(Error::InvalidProblem(
            "published and exact models exist only for the preset problem".into(),
        ));
    }
    let grid = problem.build_grid()?;
    phis.iter()
        .map(|&phi| {
            if !phi.is_finite() || phi == 0.0 {
                return Err(Error::InvalidProblem(format!(
                    "phi must be finite and nonzero, got {phi}"
                )));
            }
            let scheme = match model {
                FirstOrderModel::Computed => {
                    let spec = problem.class_spec(phi, &grid)?;
                    let ff = spec.factorize_f()?;
                    FirstOrderScheme::computed(&spec, &ff)?
                }
                FirstOrderModel::Published => FirstOrderScheme::published(phi, &grid)?,
                FirstOrderModel::Exact => FirstOrderScheme::exact(phi, &grid)?,
            };
            comparison_table(&scheme)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{GridSpec, Preset};

    fn small(phi: f64, order: usize) -> ProblemSpec {
        let mut p = ProblemSpec::preset(Preset::PaperExample);
        p.phi = phi;
        p.order = order;
        p.grid = GridSpec {
            scale: 10.0,
            nodes: 1024,
        };
        p
    }

    #[test]
    fn zero_phase_is_exact_at_every_order() {
        let f = factorize(&small(0.0, 3)).unwrap();
        assert!(f.residual_norms.iter().all(|&r| r < 1e-14));
        assert!(f.full_residual < 1e-10);
    }

    #[test]
    fn residual_decreases_with_order() {
        let f = factorize(&small(0.1, 3)).unwrap();
        let r = &f.residual_norms;
        assert_eq!(r.len(), 4);
        assert!(r[2] < r[1] && r[1] < r[0], "{r:?}");
        assert!(f.full_residual < 10.0 * r[3].max(1e-12), "{} vs {r:?}", f.full_residual);
        assert!((f.gate.a * f.gate.epsilon_bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_preset_rejects_closed_models() {
        use crate::rational::RationalFn;
        let p = ProblemSpec::rational(
            RationalFn::new(vec![10.0, 0.0, 1.0], vec![1.0, 0.0, 1.0]),
            RationalFn::new(vec![6.0], vec![1.0, 0.0, 1.0]),
        );
        assert!(analyze(&p, &[0.1], FirstOrderModel::Published).is_err());
        let reports = analyze(&small(0.1, 1), &[0.1, 0.05], FirstOrderModel::Exact).unwrap();
        assert_eq!(reports.len(), 2);
    }
}
