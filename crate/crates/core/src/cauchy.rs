//! Modified Cauchy integral `C₀`, singular operator `S₀` and the jump
//! problem `N⁻ + N⁺ = M` on the real line.
//!
//! Both operators act on the ∞-subtracted density `g = M − M(∞)`. With
//! `t = L·tan(s/2)` and `x = L·tan(σ/2)`,
//!
//! ```text
//! dt/(t − x) = ½·[cot((s − σ)/2) + tan(s/2)]·ds,
//! ```
//!
//! so the principal value becomes a periodic conjugate-function integral plus
//! a regular term. The cotangent part is computed with the singularity
//! subtracted: `(g(s) − g(σ))·cot((s − σ)/2)` is smooth and periodic, the
//! subtracted piece integrates to zero over the period, and at the coincident
//! node the integrand's limit `2g′(σ)` is supplied by spectral differencing.
//! On the uniform grid in `s` the remaining off-diagonal sum is circulant and
//! evaluated by FFT with the exact spectrum `i(N − 2m)` of `cot(πk/N)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::gridfn::SampledMatrixFunction;
use crate::matrix::CMat;

/// Separates off-axis evaluation from boundary values.
pub const AXIS_GUARD: f64 = 1e-12;

/// Half-plane in which a function is analytic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPlane {
    /// `Π⁻`, `Im z < 0`.
    Minus,
    /// `Π⁺`, `Im z > 0`.
    Plus,
}

impl HalfPlane {
    pub fn opposite(self) -> Self {
        match self {
            HalfPlane::Minus => HalfPlane::Plus,
            HalfPlane::Plus => HalfPlane::Minus,
        }
    }

    fn sign(self) -> f64 {
        match self {
            HalfPlane::Minus => -1.0,
            HalfPlane::Plus => 1.0,
        }
    }
}

/// Boundary values of the two halves of a jump problem.
#[derive(Debug, Clone)]
pub struct JumpSolution {
    pub n_minus: SampledMatrixFunction,
    pub n_plus: SampledMatrixFunction,
}

impl JumpSolution {
    /// `sup |N⁻ + N⁺ − M|`.
    pub fn reconstruction_defect(&self, density: &SampledMatrixFunction) -> Result<f64> {
        self.n_minus.checked_add(&self.n_plus)?.max_abs_diff(density)
    }
}

/// `(C₀M)(z) = (1/2πi)∫ (M(t) − M(∞))/(t − z) dt` for `z` off the real axis.
pub fn cauchy_offaxis(m: &SampledMatrixFunction, z: Complex64) -> Result<CMat> {
    if z.im.abs() < AXIS_GUARD {
        return Err(Error::OnAxis { z });
    }
    let grid = m.grid();
    let inf = m.at_infinity();
    let mut acc = CMat::zeros(m.dim());
    for ((v, &t), &w) in m.values().iter().zip(grid.nodes()).zip(grid.weights()) {
        let k = Complex64::new(w, 0.0) / (Complex64::new(t, 0.0) - z);
        acc += &(v - inf).scale(k);
    }
    Ok(acc.scale(Complex64::new(0.0, -1.0 / (2.0 * PI))))
}

/// `(S₀M)(x) = (1/πi)·PV∫ (M(t) − M(∞))/(t − x) dt` at every node; the result
/// vanishes at infinity.
pub fn singular_transform(m: &SampledMatrixFunction) -> Result<SampledMatrixFunction> {
    let dim = m.dim();
    let inf = m.at_infinity();
    let channels: Vec<Vec<Complex64>> = (0..dim * dim)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / dim, k % dim);
            let g: Vec<Complex64> = m.values().iter().map(|v| v[(i, j)] - inf[(i, j)]).collect();
            singular_channel(&g, m.grid().nodes(), m.grid().scale())
        })
        .collect();
    SampledMatrixFunction::from_entries(m.grid(), dim, &channels, CMat::zeros(dim))
}

/// `S₀` for one scalar channel of ∞-subtracted samples.
pub(crate) fn singular_channel(g: &[Complex64], nodes: &[f64], scale: f64) -> Vec<Complex64> {
    let n = g.len();
    let nf = n as f64;
    let h = 2.0 * PI / nf;

    // Σ_{j≠i} g_j·cot((s_j − s_i)/2) via the spectrum of the circulant kernel,
    // and the derivative g′(s_i) by spectral (infinite-order centered)
    // differencing of the same transform
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut spec = g.to_vec();
    forward.process(&mut spec);
    let mut circ = spec.clone();
    let mut deriv = spec;
    circ[0] = Complex64::new(0.0, 0.0);
    deriv[0] = Complex64::new(0.0, 0.0);
    for m in 1..n {
        circ[m] *= Complex64::new(0.0, nf - 2.0 * m as f64);
        let wave = if 2 * m < n {
            m as f64
        } else if 2 * m > n {
            m as f64 - nf
        } else {
            0.0
        };
        deriv[m] *= Complex64::new(0.0, wave);
    }
    inverse.process(&mut circ);
    inverse.process(&mut deriv);

    // ∫ g(s)·tan(s/2) ds term, tan(s_j/2) = x_j / L
    let regular: Complex64 = pairwise_sum(&g.iter().zip(nodes).map(|(&v, &x)| v * (x / scale)).collect::<Vec<_>>());

    circ.iter()
        .zip(&deriv)
        .map(|(&c, &d)| {
            let pv = (c / nf + d * (2.0 / nf) + regular) * (h / 2.0);
            pv / Complex64::new(0.0, PI)
        })
        .collect()
}

/// Fixed-order pairwise summation.
pub(crate) fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Solves `N⁻ + N⁺ = M` with `N∓ = ½M ∓ ½S₀M` and `N∓(∞) = ½M(∞)`.
pub fn jump_solve(m: &SampledMatrixFunction) -> Result<JumpSolution> {
    let s = singular_transform(m)?;
    let half = Complex64::new(0.5, 0.0);
    let n_minus = m.zip_with(&s, |a, b| (a - b).scale(half))?;
    let n_plus = m.zip_with(&s, |a, b| (a + b).scale(half))?;
    Ok(JumpSolution { n_minus, n_plus })
}

/// Continuation of a half-plane function from its boundary values:
/// `h(z) = h(∞) − C₀h(z)` in `Π⁻`, `h(z) = h(∞) + C₀h(z)` in `Π⁺`.
pub fn continue_into(h: &SampledMatrixFunction, tag: HalfPlane, z: Complex64) -> Result<CMat> {
    if z.im * tag.sign() <= 0.0 {
        return Err(Error::OnAxis { z });
    }
    let c = cauchy_offaxis(h, z)?;
    Ok(h.at_infinity() + &c.scale(Complex64::new(tag.sign(), 0.0)))
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyticityReport {
    /// Largest `|C₀h(z)|` over probes in the opposite half-plane.
    pub max_defect: f64,
    pub worst_probe: Complex64,
}

/// Checks that `h` is the boundary value of a function analytic in `tag`'s
/// half-plane: its Cauchy integral must vanish throughout the other one.
/// Probes sit at `x ± i·d` for each offset `d`.
pub fn verify_analyticity(
    h: &SampledMatrixFunction,
    tag: HalfPlane,
    probe_offsets: &[f64],
) -> Result<AnalyticityReport> {
    let scale = h.grid().scale();
    let side = tag.opposite().sign();
    // probes stay within |x| ≤ 3L, where a fixed offset remains resolvable
    const PROBES: usize = 33;
    const SPAN: f64 = 1.249;
    let mut probes = Vec::with_capacity(PROBES * probe_offsets.len());
    for &d in probe_offsets {
        for k in 0..PROBES {
            let theta = SPAN * (2.0 * k as f64 / (PROBES - 1) as f64 - 1.0);
            probes.push(Complex64::new(scale * theta.tan(), side * d.abs()));
        }
    }
    let defects: Vec<(f64, Complex64)> = probes
        .par_iter()
        .map(|&z| cauchy_offaxis(h, z).map(|c| (c.max_abs(), z)))
        .collect::<Result<_>>()?;
    let (max_defect, worst_probe) =
        defects
            .into_iter()
            .fold((0.0, Complex64::new(0.0, 0.0)), |b, c| if c.0 > b.0 { c } else { b });
    Ok(AnalyticityReport {
        max_defect,
        worst_probe,
    })
}
