//! Canonical factorization `f = f⁻·f⁺` of scalar functions with zero index,
//! by splitting `log f` into its half-plane parts and exponentiating.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::cauchy::jump_solve;
use crate::error::{Error, Result};
use crate::gridfn::SampledMatrixFunction;
use crate::matrix::CMat;

/// Samples with modulus below this are treated as zeros on the contour.
pub const ZERO_GUARD: f64 = 1e-12;

/// Winding numbers farther than this from an integer are unresolved.
pub const INDEX_RESOLUTION: f64 = 0.1;

const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingIndex {
    pub index: i64,
    /// Accumulated argument increment over `2π` before rounding.
    pub raw: f64,
}

/// Boundary values of the factors analytic in the lower and upper half-planes.
#[derive(Debug, Clone)]
pub struct ScalarFactorPair {
    pub minus: SampledMatrixFunction,
    pub plus: SampledMatrixFunction,
    pub index: i64,
}

impl ScalarFactorPair {
    /// `max |f⁻f⁺/f − 1|` over the nodes.
    pub fn reconstruction_defect(&self, f: &SampledMatrixFunction) -> Result<f64> {
        let prod = self.minus.checked_mul(&self.plus)?;
        Ok(prod
            .values()
            .iter()
            .zip(f.values())
            .map(|(p, v)| (p[(0, 0)] / v[(0, 0)] - 1.0).norm())
            .fold(0.0, f64::max))
    }
}

fn scalar_samples(f: &SampledMatrixFunction) -> Result<(Vec<Complex64>, Complex64)> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim(),
        });
    }
    let values = f.entry(0, 0);
    for (v, &x) in values.iter().zip(f.grid().nodes()) {
        if v.norm() < ZERO_GUARD {
            return Err(Error::ZeroOnContour { x });
        }
    }
    Ok((values, f.at_infinity()[(0, 0)]))
}

/// Increment of `arg f` along the closed contour (the line closed through
/// infinity) divided by `2π`.
pub fn winding_index(f: &SampledMatrixFunction) -> Result<WindingIndex> {
    let (values, inf) = scalar_samples(f)?;
    let mut total: f64 = values.windows(2).map(|w| (w[1] / w[0]).arg()).sum();
    let (first, last) = (values[0], values[values.len() - 1]);
    total += if inf.norm() >= ZERO_GUARD {
        (inf / last).arg() + (first / inf).arg()
    } else {
        (first / last).arg()
    };
    let raw = total / (2.0 * PI);
    let index = raw.round();
    if (raw - index).abs() > INDEX_RESOLUTION {
        return Err(Error::IndexResolution { raw });
    }
    Ok(WindingIndex {
        index: index as i64,
        raw,
    })
}

/// Factors `f` with `f(∞) = 1` and zero index as `exp(N⁻)·exp(N⁺)`, where
/// `N⁻ + N⁺ = log f` with the branch of `log f` continuous along the line.
pub fn scalar_factor(f: &SampledMatrixFunction) -> Result<ScalarFactorPair> {
    let w = winding_index(f)?;
    if w.index != 0 {
        return Err(Error::NonzeroIndex { index: w.index });
    }
    let (values, inf) = scalar_samples(f)?;
    if (inf - 1.0).norm() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { value: inf });
    }
    // unwrap from the far left, where f is close to f(∞) = 1
    let mut logs = Vec::with_capacity(values.len());
    let mut current = values[0].ln();
    logs.push(current);
    for pair in values.windows(2) {
        let step = pair[1] / pair[0];
        current += Complex64::new(step.norm().ln(), step.arg());
        logs.push(current);
    }
    let log_f = SampledMatrixFunction::from_entries(f.grid(), 1, &[logs], CMat::scalar(Complex64::new(0.0, 0.0)))?;
    let parts = jump_solve(&log_f)?;
    let exp = |m: &CMat| CMat::scalar(m[(0, 0)].exp());
    Ok(ScalarFactorPair {
        minus: parts.n_minus.map(exp),
        plus: parts.n_plus.map(exp),
        index: 0,
    })
}
