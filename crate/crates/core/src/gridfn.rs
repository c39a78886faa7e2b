//! Matrix-valued functions on the extended real line, sampled on a
//! compactified grid.
//!
//! Nodes are `x_j = L·tan(θ_j)` with `θ_j` the midpoints of `N` equal cells of
//! `(−π/2, π/2)`. In the doubled angle `s = 2θ` the grid is a uniform periodic
//! grid on the circle whose missing point `s = ±π` is the point at infinity,
//! which is what the Cauchy operators in [`crate::cauchy`] exploit.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::CMat;

/// Compactified discretization of the real line.
#[derive(Debug, Clone)]
pub struct Grid {
    scale: f64,
    nodes: Vec<f64>,
    angles: Vec<f64>,
    weights: Vec<f64>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.scale == other.scale && self.nodes.len() == other.nodes.len()
    }
}

impl Grid {
    /// Builds the grid with scale `L > 0` and an even node count `N ≥ 8`.
    pub fn new(scale: f64, n: usize) -> Result<Arc<Grid>> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidGrid(format!("scale must be positive, got {scale}")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "node count must be even and at least 8, got {n}"
            )));
        }
        let h = PI / n as f64;
        let half = n / 2;
        let mut nodes = vec![0.0; n];
        let mut angles = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for j in 0..half {
            // θ_j = (j + ½ − N/2)·π/N, negative on the first half
            let theta = (j as f64 + 0.5 - half as f64) * h;
            let x = scale * theta.tan();
            let w = h * (scale * scale + x * x) / scale;
            nodes[j] = x;
            nodes[n - 1 - j] = -x;
            angles[j] = 2.0 * theta;
            angles[n - 1 - j] = -2.0 * theta;
            weights[j] = w;
            weights[n - 1 - j] = w;
        }
        Ok(Arc::new(Grid {
            scale,
            nodes,
            angles,
            weights,
        }))
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Doubled angles `s_j = 2θ_j ∈ (−π, π)`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Weights for `∫_ℝ f(x) dx ≈ Σ w_j f(x_j)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Spacing of the uniform periodic grid in `s`.
    pub fn angle_step(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    /// Whether an `e^{iφx}` factor has at least 16 nodes per period near the
    /// origin (`N ≥ 16·|φ|·L`).
    pub fn resolves_phase(&self, phi: f64) -> bool {
        self.len() as f64 >= 16.0 * phi.abs() * self.scale
    }

    fn theta_of(&self, x: f64) -> f64 {
        (x / self.scale).atan()
    }
}

/// Samples of an `n×n` matrix function at every grid node, plus its value
/// at infinity.
#[derive(Debug, Clone)]
pub struct SampledMatrixFunction {
    grid: Arc<Grid>,
    dim: usize,
    values: Vec<CMat>,
    at_infinity: CMat,
}

impl SampledMatrixFunction {
    /// Samples `f` at every node. A non-finite sample is reported with its node.
    pub fn sample<F>(grid: &Arc<Grid>, f: F, at_infinity: CMat) -> Result<Self>
    where
        F: Fn(f64) -> CMat + Sync,
    {
        let dim = at_infinity.dim();
        let values: Vec<CMat> = grid.nodes().par_iter().map(|&x| f(x)).collect();
        for (v, &x) in values.iter().zip(grid.nodes()) {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { x });
            }
        }
        if !at_infinity.is_finite() {
            return Err(Error::NonFinite { x: f64::INFINITY });
        }
        Ok(SampledMatrixFunction {
            grid: grid.clone(),
            dim,
            values,
            at_infinity,
        })
    }

    /// Scalar (1×1) function.
    pub fn sample_scalar<F>(grid: &Arc<Grid>, f: F, at_infinity: Complex64) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        Self::sample(grid, |x| CMat::scalar(f(x)), CMat::scalar(at_infinity))
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<CMat>, at_infinity: CMat) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let dim = at_infinity.dim();
        if let Some(bad) = values.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(SampledMatrixFunction {
            grid: grid.clone(),
            dim,
            values,
            at_infinity,
        })
    }

    pub fn constant(grid: &Arc<Grid>, value: CMat) -> Self {
        SampledMatrixFunction {
            grid: grid.clone(),
            dim: value.dim(),
            values: vec![value.clone(); grid.len()],
            at_infinity: value,
        }
    }

    pub fn identity(grid: &Arc<Grid>, dim: usize) -> Self {
        Self::constant(grid, CMat::identity(dim))
    }

    pub fn zeros(grid: &Arc<Grid>, dim: usize) -> Self {
        Self::constant(grid, CMat::zeros(dim))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn at_infinity(&self) -> &CMat {
        &self.at_infinity
    }

    /// Samples of entry `(i, j)` in node order.
    pub fn entry(&self, i: usize, j: usize) -> Vec<Complex64> {
        self.values.iter().map(|m| m[(i, j)]).collect()
    }

    /// Inverse of [`entry`](Self::entry): assembles a function from per-entry
    /// channels (row-major) and their values at infinity.
    pub fn from_entries(grid: &Arc<Grid>, dim: usize, channels: &[Vec<Complex64>], at_infinity: CMat) -> Result<Self> {
        if channels.len() != dim * dim || channels.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch);
        }
        let values = (0..grid.len())
            .map(|node| {
                let mut m = CMat::zeros(dim);
                for (k, c) in channels.iter().enumerate() {
                    m.as_mut_slice()[k] = c[node];
                }
                m
            })
            .collect();
        Self::from_values(grid, values, at_infinity)
    }

    /// Node-wise map, including the value at infinity.
    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(&CMat) -> CMat + Sync,
    {
        let values: Vec<CMat> = self.values.par_iter().map(&f).collect();
        let at_infinity = f(&self.at_infinity);
        SampledMatrixFunction {
            grid: self.grid.clone(),
            dim: at_infinity.dim(),
            values,
            at_infinity,
        }
    }

    /// Node-wise combination of two functions on the same grid.
    pub fn zip_with<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(&CMat, &CMat) -> CMat + Sync,
    {
        self.check_compatible(other)?;
        let values: Vec<CMat> = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(a, b)| f(a, b))
            .collect();
        let at_infinity = f(&self.at_infinity, &other.at_infinity);
        Ok(SampledMatrixFunction {
            grid: self.grid.clone(),
            dim: at_infinity.dim(),
            values,
            at_infinity,
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Node-wise matrix product `self(x)·other(x)`, left factor first.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        self.map(|m| m.scale(s))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !(Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// Max over nodes of the largest entry modulus.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(CMat::max_abs).fold(0.0, f64::max)
    }

    /// Node and modulus of the largest entry of `entry (i, j)`.
    pub fn argmax_entry(&self, i: usize, j: usize) -> (f64, f64) {
        self.values
            .iter()
            .zip(self.grid.nodes())
            .map(|(m, &x)| (x, m[(i, j)].norm()))
            .fold((f64::NAN, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
    }

    /// `sup_x |self(x) − other(x)|` entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.checked_sub(other)?.sup_norm())
    }

    /// Largest deviation of the `count` outermost nodes on each side from the
    /// stored value at infinity.
    pub fn tail_defect(&self, count: usize) -> f64 {
        let n = self.values.len();
        let count = count.min(n / 2);
        self.values[..count]
            .iter()
            .chain(&self.values[n - count..])
            .map(|v| (v - &self.at_infinity).max_abs())
            .fold(0.0, f64::max)
    }

    /// `x ↦ conj(f(−x))`, exact on the symmetric grid.
    pub fn conj_reflect(&self) -> Self {
        let values = self.values.iter().rev().map(CMat::conj).collect();
        SampledMatrixFunction {
            grid: self.grid.clone(),
            dim: self.dim,
            values,
            at_infinity: self.at_infinity.conj(),
        }
    }

    /// Interpolated value at `x`.
    ///
    /// Six-point Lagrange interpolation in `θ = atan(x/L)`, where the nodes are
    /// equispaced; exact at nodes. Between the outermost node and infinity the
    /// value is blended linearly in `θ` toward the value at infinity.
    pub fn eval_at(&self, x: f64) -> CMat {
        let nodes = self.grid.nodes();
        if let Ok(k) = nodes.binary_search_by(|v| v.total_cmp(&x)) {
            return self.values[k].clone();
        }
        let n = nodes.len();
        let h = PI / n as f64;
        let theta = self.grid.theta_of(x);
        // fractional node index
        let u = (theta + PI / 2.0) / h - 0.5;
        if u <= 0.0 || u >= (n - 1) as f64 {
            let (edge, dist) = if u <= 0.0 {
                (0, (theta + PI / 2.0) / (h / 2.0))
            } else {
                (n - 1, (PI / 2.0 - theta) / (h / 2.0))
            };
            let t = dist.clamp(0.0, 1.0);
            return &self.values[edge].scale(Complex64::new(t, 0.0))
                + &self.at_infinity.scale(Complex64::new(1.0 - t, 0.0));
        }
        const STENCIL: usize = 6;
        let base = (u.floor() as isize - 2).clamp(0, (n - STENCIL) as isize) as usize;
        let mut out = CMat::zeros(self.dim);
        for k in 0..STENCIL {
            let mut l = 1.0;
            for m in 0..STENCIL {
                if m != k {
                    l *= (u - (base + m) as f64) / (k as f64 - m as f64);
                }
            }
            out += &self.values[base + k].scale(Complex64::new(l, 0.0));
        }
        out
    }

    /// Discrete lower bound on the Hölder seminorm in the compactified metric
    /// `|1/(x₁+i) − 1/(x₂+i)|^μ`, over adjacent node pairs, power-of-two
    /// strides, and pairs with the point at infinity.
    pub fn holder_seminorm_estimate(&self, mu: f64) -> Result<f64> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::HolderExponent(mu));
        }
        let nodes = self.grid.nodes();
        let n = nodes.len();
        let inv: Vec<Complex64> = nodes
            .iter()
            .map(|&x| Complex64::new(1.0, 0.0) / Complex64::new(x, 1.0))
            .collect();
        let mut strides = Vec::new();
        let mut s = 1;
        while s < n {
            strides.push(s);
            s *= 2;
        }
        let per_stride: Vec<f64> = strides
            .par_iter()
            .map(|&s| {
                let mut best = 0.0f64;
                for j in 0..n - s {
                    let num = (&self.values[j + s] - &self.values[j]).max_abs();
                    if num == 0.0 {
                        continue;
                    }
                    let den = (inv[j + s] - inv[j]).norm().powf(mu);
                    best = best.max(num / den);
                }
                best
            })
            .collect();
        let mut best = per_stride.into_iter().fold(0.0, f64::max);
        for (v, w) in self.values.iter().zip(&inv) {
            let num = (v - &self.at_infinity).max_abs();
            if num > 0.0 {
                best = best.max(num / w.norm().powf(mu));
            }
        }
        Ok(best)
    }

    /// Hölder norm estimate: sup norm plus seminorm estimate.
    pub fn holder_norm_estimate(&self, mu: f64) -> Result<f64> {
        Ok(self.sup_norm().max(self.at_infinity.max_abs()) + self.holder_seminorm_estimate(mu)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1.0, 7).is_err());
        assert!(Grid::new(1.0, 6).is_err());
        assert!(Grid::new(0.0, 8).is_err());
        assert!(Grid::new(-2.0, 8).is_err());
        assert!(Grid::new(f64::NAN, 8).is_err());
    }

    #[test]
    fn eight_node_grid() {
        let g = Grid::new(1.0, 8).unwrap();
        assert_eq!(g.len(), 8);
        let t = (PI / 16.0).tan();
        assert!((g.nodes()[3] + t).abs() < 1e-15);
        assert!((g.nodes()[4] - t).abs() < 1e-15);
        for j in 0..8 {
            assert_eq!(g.nodes()[7 - j], -g.nodes()[j]);
        }
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.weights().iter().all(|&w| w > 0.0));

        let g2 = Grid::new(2.0, 8).unwrap();
        for (a, b) in g.nodes().iter().zip(g2.nodes()) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn quadrature_of_lorentzian() {
        let g = Grid::new(1.0, 4096).unwrap();
        let s: f64 = g.nodes().iter().zip(g.weights()).map(|(x, w)| w / (1.0 + x * x)).sum();
        assert!((s - PI).abs() < 1e-10);

        // other scales: smooth integrand in θ, error well under 10/N²
        for &(l, n) in &[(3.0, 64usize), (10.0, 256)] {
            let g = Grid::new(l, n).unwrap();
            let s: f64 = g.nodes().iter().zip(g.weights()).map(|(x, w)| w / (1.0 + x * x)).sum();
            assert!((s - PI).abs() < 10.0 / (n * n) as f64, "L={l} N={n}: {s}");
        }
    }

    #[test]
    fn sampling_constants_and_point_values() {
        let g = Grid::new(1.0, 16).unwrap();
        let id = SampledMatrixFunction::sample(&g, |_| CMat::identity(2), CMat::identity(2)).unwrap();
        assert!(id.values().iter().all(|m| *m == CMat::identity(2)));
        assert_eq!(id.sup_norm(), 1.0);
        assert_eq!(SampledMatrixFunction::zeros(&g, 2).sup_norm(), 0.0);

        let f = |x: f64| {
            let mut m = CMat::identity(2);
            m[(0, 0)] += re(1.0 / (x * x + 1.0));
            m
        };
        let v = f(0.0);
        assert_eq!(v, CMat::diag(&[re(2.0), re(1.0)]));

        let bad = SampledMatrixFunction::sample_scalar(&g, |x| re(if x > 0.0 { f64::NAN } else { 1.0 }), re(0.0));
        assert!(matches!(bad, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn interpolation_is_exact_at_nodes_and_accurate_between() {
        let g = Grid::new(1.0, 4096).unwrap();
        let q = SampledMatrixFunction::sample_scalar(&g, |x| re(6.0 / (x * x + 1.0)), re(0.0)).unwrap();
        for k in [0, 1, 17, 2047, 2048, 4095] {
            assert_eq!(q.eval_at(g.nodes()[k]), q.values()[k]);
        }
        assert!((q.eval_at(1.0)[(0, 0)] - re(3.0)).norm() < 1e-8);
        assert!((q.eval_at(0.0)[(0, 0)] - re(6.0)).norm() < 1e-8);
        // beyond the outermost node the value blends toward infinity
        assert!(q.eval_at(1e12)[(0, 0)].norm() < 1e-6);

        let c = SampledMatrixFunction::constant(&g, CMat::scalar(Complex64::new(2.0, -1.0)));
        for x in [-1e9, -3.3, 0.0, 0.123, 77.0] {
            assert!((c.eval_at(x)[(0, 0)] - Complex64::new(2.0, -1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn holder_estimate() {
        let g = Grid::new(1.0, 512).unwrap();
        let c = SampledMatrixFunction::constant(&g, CMat::identity(2));
        assert_eq!(c.holder_seminorm_estimate(0.5).unwrap(), 0.0);

        let f =
            SampledMatrixFunction::sample_scalar(&g, |x| Complex64::new(1.0, 0.0) / Complex64::new(x, 1.0), re(0.0))
                .unwrap();
        assert!(matches!(f.holder_seminorm_estimate(1.0), Err(Error::HolderExponent(_))));
        assert!(f.holder_seminorm_estimate(0.0).is_err());

        let q = |n| {
            let g = Grid::new(1.0, n).unwrap();
            SampledMatrixFunction::sample_scalar(&g, |x| re(6.0 / (x * x + 1.0)), re(0.0))
                .unwrap()
                .holder_seminorm_estimate(0.5)
                .unwrap()
        };
        let (a, b) = (q(1024), q(2048));
        assert!(a > 0.0 && a.is_finite());
        assert!((a - b).abs() / b < 0.05, "{a} vs {b}");
    }

    #[test]
    fn conj_reflect_and_tail() {
        let g = Grid::new(1.0, 64).unwrap();
        let f = SampledMatrixFunction::sample_scalar(
            &g,
            |x| Complex64::new(0.0, x) / Complex64::new(x * x + 1.0, 0.0),
            re(0.0),
        )
        .unwrap();
        // i·x/(x²+1) is conj-symmetric: conj(f(−x)) = f(x)
        assert!(f.max_abs_diff(&f.conj_reflect()).unwrap() < 1e-15);
        assert!(f.tail_defect(1) < 0.03);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = SampledMatrixFunction::identity(&Grid::new(1.0, 8).unwrap(), 2);
        let b = SampledMatrixFunction::identity(&Grid::new(1.0, 16).unwrap(), 2);
        assert_eq!(a.checked_add(&b).unwrap_err(), Error::GridMismatch);
        let c = SampledMatrixFunction::identity(&Grid::new(1.0, 8).unwrap(), 3);
        assert!(matches!(a.checked_mul(&c), Err(Error::DimensionMismatch { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn grid_is_symmetric(l in 0.01f64..100.0, half in 4usize..300) {
                let g = Grid::new(l, 2 * half).unwrap();
                let n = g.len();
                for j in 0..n {
                    prop_assert_eq!(g.nodes()[n - 1 - j], -g.nodes()[j]);
                }
            }

            #[test]
            fn sup_norm_is_subadditive(a in -5.0f64..5.0, b in -5.0f64..5.0, c in 0.1f64..3.0) {
                let g = Grid::new(1.0, 32).unwrap();
                let f = SampledMatrixFunction::sample_scalar(&g, |x| Complex64::new(a / (x * x + c), b), Complex64::new(0.0, b)).unwrap();
                let h = SampledMatrixFunction::sample_scalar(&g, |x| Complex64::new(b * x / (x * x + 1.0), a), Complex64::new(0.0, a)).unwrap();
                let s = f.checked_add(&h).unwrap();
                prop_assert!(s.sup_norm() <= f.sup_norm() + h.sup_norm() + 1e-12);
            }
        }
    }
}
