//! Iterative asymptotic factorization `I + N = (I + Σ N_k⁻)(I + Σ N_k⁺)`.
//!
//! Order `k` solves the jump problem `N_k⁻ + N_k⁺ = M_{k−1}` with `M₀ = N`
//! and `M_{k−1} = −Σ_{j=1}^{k−1} N_j⁻·N_{k−j}⁺`, which makes every partial
//! product exact up to terms of order `k + 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::cauchy::jump_solve;
use crate::error::{Error, Result};
use crate::gridfn::SampledMatrixFunction;
use crate::matrix::CMat;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MU: f64 = 0.5;
pub const DEFAULT_C_MU: f64 = 2.0;

/// Consecutive increases of the term norms that count as divergence.
pub const DIVERGENCE_RUN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// The right-hand side of the next order fell below the tolerance.
    Converged,
    /// The requested order was reached.
    OrderReached,
}

/// Terms `N_k∓` of the series together with per-order diagnostics.
#[derive(Debug, Clone)]
pub struct FactorSeries {
    pub requested_order: usize,
    pub terms_minus: Vec<SampledMatrixFunction>,
    pub terms_plus: Vec<SampledMatrixFunction>,
    pub epsilon: f64,
    /// `max(sup|N_k⁻|, sup|N_k⁺|)` for each computed order.
    pub term_norms: Vec<f64>,
    /// `sup|M_{k−1}|` for each computed order.
    pub rhs_norms: Vec<f64>,
    /// `sup|N_k⁻ + N_k⁺ − M_{k−1}|` for each computed order.
    pub jump_defects: Vec<f64>,
    pub stop: StopReason,
    n: SampledMatrixFunction,
}

impl FactorSeries {
    /// Number of orders actually computed.
    pub fn order(&self) -> usize {
        self.terms_minus.len()
    }

    /// The density `N = G₁ − I` the series was built from.
    pub fn density(&self) -> &SampledMatrixFunction {
        &self.n
    }
}

/// Node-wise `Σ_j a_j·b_j` in the listed order, including the value at infinity.
fn sum_of_products(pairs: &[(&SampledMatrixFunction, &SampledMatrixFunction)]) -> Result<SampledMatrixFunction> {
    let first = pairs[0].0;
    for (a, b) in pairs {
        if a.grid() != first.grid() || b.grid() != first.grid() {
            return Err(Error::GridMismatch);
        }
    }
    let at = |node: Option<usize>| {
        let mut acc = CMat::zeros(first.dim());
        for (a, b) in pairs {
            let (x, y) = match node {
                Some(j) => (&a.values()[j], &b.values()[j]),
                None => (a.at_infinity(), b.at_infinity()),
            };
            acc += &(x * y);
        }
        acc
    };
    let values: Vec<CMat> = (0..first.grid().len()).into_par_iter().map(|j| at(Some(j))).collect();
    SampledMatrixFunction::from_values(first.grid(), values, at(None))
}

/// `M_{k−1} = −Σ_{j=1}^{k−1} N_j⁻·N_{k−j}⁺`, minus factors on the left.
pub fn next_rhs(series: &FactorSeries, k: usize) -> Result<SampledMatrixFunction> {
    let available = series.order();
    if k < 2 || k - 1 > available {
        return Err(Error::OrderOutOfRange { k, available });
    }
    let pairs: Vec<_> = (1..k)
        .map(|j| (&series.terms_minus[j - 1], &series.terms_plus[k - j - 1]))
        .collect();
    Ok(sum_of_products(&pairs)?.scaled((-1.0).into()))
}

/// Runs the scheme on `G₁` up to order `order`, stopping early once the next
/// right-hand side is below `tol`.
pub fn run(g1: &SampledMatrixFunction, order: usize, tol: f64) -> Result<FactorSeries> {
    if !(tol > 0.0) {
        return Err(Error::InvalidProblem(format!("tolerance must be positive, got {tol}")));
    }
    let n = g1.checked_sub(&SampledMatrixFunction::identity(g1.grid(), g1.dim()))?;
    let mut series = FactorSeries {
        requested_order: order,
        terms_minus: Vec::new(),
        terms_plus: Vec::new(),
        epsilon: 1.0,
        term_norms: Vec::new(),
        rhs_norms: Vec::new(),
        jump_defects: Vec::new(),
        stop: StopReason::OrderReached,
        n: n.clone(),
    };
    let mut rhs = n;
    for k in 1..=order {
        let rhs_norm = rhs.sup_norm().max(rhs.at_infinity().max_abs());
        if rhs_norm < tol {
            series.stop = StopReason::Converged;
            break;
        }
        let sol = jump_solve(&rhs)?;
        series.jump_defects.push(sol.reconstruction_defect(&rhs)?);
        series.rhs_norms.push(rhs_norm);
        series
            .term_norms
            .push(sol.n_minus.sup_norm().max(sol.n_plus.sup_norm()));
        series.terms_minus.push(sol.n_minus);
        series.terms_plus.push(sol.n_plus);
        let norms = &series.term_norms;
        if norms.len() > DIVERGENCE_RUN
            && norms[norms.len() - DIVERGENCE_RUN - 1..]
                .windows(2)
                .all(|w| w[1] > w[0])
        {
            return Err(Error::Divergence { norms: norms.clone() });
        }
        if k < order {
            rhs = next_rhs(&series, k + 1)?;
        }
    }
    Ok(series)
}

/// Partial products `(I + Σ_{k≤upto} εᵏN_k⁻, I + Σ_{k≤upto} εᵏN_k⁺)`.
pub fn assemble(series: &FactorSeries, upto: usize) -> Result<(SampledMatrixFunction, SampledMatrixFunction)> {
    if upto > series.order() {
        return Err(Error::OrderOutOfRange {
            k: upto,
            available: series.order(),
        });
    }
    let grid = series.n.grid();
    let mut minus = SampledMatrixFunction::identity(grid, series.n.dim());
    let mut plus = minus.clone();
    let mut weight = 1.0;
    for k in 0..upto {
        weight *= series.epsilon;
        minus = minus.checked_add(&series.terms_minus[k].scaled(weight.into()))?;
        plus = plus.checked_add(&series.terms_plus[k].scaled(weight.into()))?;
    }
    Ok((minus, plus))
}

/// `G₁ − G⁻·G⁺` for the partial products of order `upto`.
pub fn residual(g1: &SampledMatrixFunction, series: &FactorSeries, upto: usize) -> Result<SampledMatrixFunction> {
    let (minus, plus) = assemble(series, upto)?;
    g1.checked_sub(&minus.checked_mul(&plus)?)
}

/// Sufficient condition for convergence of the series with `ε = 1`:
/// `A = ‖N‖_μ·(1 + C_μ)² < 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceGate {
    pub mu: f64,
    pub c_mu: f64,
    pub n_norm: f64,
    pub a: f64,
    /// Admissible `|ε| ≤ 1/A`.
    pub epsilon_bound: f64,
    pub admissible: bool,
}

impl ConvergenceGate {
    pub fn from_norm(n_norm: f64, mu: f64, c_mu: f64) -> Result<Self> {
        if !(c_mu > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "operator norm constant must be positive, got {c_mu}"
            )));
        }
        let a = n_norm * (1.0 + c_mu) * (1.0 + c_mu);
        Ok(ConvergenceGate {
            mu,
            c_mu,
            n_norm,
            a,
            epsilon_bound: 1.0 / a,
            admissible: a < 1.0,
        })
    }
}

/// Gate for a density `N`, with `‖N‖_μ` estimated entrywise as sup norm
/// plus Hölder seminorm, maximized over entries.
pub fn convergence_gate(n: &SampledMatrixFunction, mu: f64, c_mu: f64) -> Result<ConvergenceGate> {
    let dim = n.dim();
    let mut n_norm = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let entry = SampledMatrixFunction::from_entries(
                n.grid(),
                1,
                &[n.entry(i, j)],
                CMat::scalar(n.at_infinity()[(i, j)]),
            )?;
            n_norm = n_norm.max(entry.holder_norm_estimate(mu)?);
        }
    }
    ConvergenceGate::from_norm(n_norm, mu, c_mu)
}

/// `α₁ = 1/2`, `α_k = ½·Σ_{j=1}^{k−1} α_j·α_{k−j}`, exactly.
pub fn alpha_sequence(k_max: usize) -> Vec<BigRational> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut alpha: Vec<BigRational> = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        if k == 1 {
            alpha.push(half.clone());
            continue;
        }
        let mut sum = BigRational::from_integer(BigInt::from(0));
        for j in 1..k {
            sum += &alpha[j - 1] * &alpha[k - j - 1];
        }
        alpha.push(sum * &half);
    }
    alpha
}

/// Orders `12 ≤ k ≤ len` at which `α_k < 1/(16(k − 3))` fails.
pub fn alpha_bound_violations(alpha: &[BigRational]) -> Vec<usize> {
    (12..=alpha.len())
        .filter(|&k| {
            let bound = BigRational::new(BigInt::one(), BigInt::from(16 * (k - 3)));
            alpha[k - 1] >= bound
        })
        .collect()
}

pub fn alpha_to_f64(a: &BigRational) -> f64 {
    a.to_f64().unwrap_or(f64::NAN)
}
