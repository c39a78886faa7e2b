//! Closed forms for the worked example `p = (x²+10)/(x²+1)`, `q = 6/(x²+1)`.
//!
//! Densities in this example are sums of `c·e^{σiφx}/(x − a)` with `σ ∈
//! {−1, 0, 1}` and off-axis poles `a`, plus a constant. Such sums split into
//! half-plane parts by residue placement, which gives exact jump solutions to
//! test the quadrature against, and lets the published first-order factors be
//! written down term by term.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gridfn::{Grid, SampledMatrixFunction};
use crate::matrix::CMat;
use crate::rational::RationalFn;
use crate::scalarfact::ScalarFactorPair;
use crate::special2x2::{ClassSpec2x2, FFactorization2x2, RealRule};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Exponential factor `e^{σiφx}` of a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    None,
    Plus,
    Minus,
}

impl Phase {
    fn sign(self) -> f64 {
        match self {
            Phase::None => 0.0,
            Phase::Plus => 1.0,
            Phase::Minus => -1.0,
        }
    }

    /// `e^{σiφz}`.
    pub fn factor(self, phi: f64, z: Complex64) -> Complex64 {
        (I * (self.sign() * phi) * z).exp()
    }
}

/// `coeff·e^{σiφx}/(x − pole)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub coeff: Complex64,
    pub pole: Complex64,
    pub phase: Phase,
}

/// `constant + Σ coeff·e^{σiφx}/(x − pole)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalExpDensity {
    pub constant: Complex64,
    pub terms: Vec<Term>,
    pub phi: f64,
}

impl RationalExpDensity {
    pub fn zero(phi: f64) -> Self {
        RationalExpDensity {
            constant: re(0.0),
            terms: Vec::new(),
            phi,
        }
    }

    pub fn push(&mut self, coeff: Complex64, pole: Complex64, phase: Phase) {
        self.terms.push(Term { coeff, pole, phase });
    }

    /// `e^{σiφa}` for a pole `a`.
    pub fn phase_at(&self, phase: Phase, pole: Complex64) -> Complex64 {
        phase.factor(self.phi, pole)
    }

    /// Value at any point off the poles.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms.iter().fold(self.constant, |acc, t| {
            acc + t.coeff * t.phase.factor(self.phi, z) / (z - t.pole)
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self.terms.iter().find(|t| t.pole.im == 0.0) {
            Some(t) => Err(Error::PoleOnAxis { pole: t.pole }),
            None => Ok(()),
        }
    }

    /// Adds like terms (same pole and phase) and drops exact zeros.
    pub fn canonical(&self) -> Self {
        let mut merged: Vec<Term> = Vec::new();
        for t in &self.terms {
            match merged.iter_mut().find(|m| m.pole == t.pole && m.phase == t.phase) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(*t),
            }
        }
        merged.retain(|t| t.coeff != re(0.0));
        RationalExpDensity {
            constant: self.constant,
            terms: merged,
            phi: self.phi,
        }
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        RationalExpDensity {
            constant: self.constant + other.constant,
            terms,
            phi: self.phi,
        }
    }

    /// Largest coefficient modulus left after merging like terms.
    pub fn symbolic_size(&self) -> f64 {
        let c = self.canonical();
        c.terms.iter().map(|t| t.coeff.norm()).fold(c.constant.norm(), f64::max)
    }
}

/// Splits `d` into the parts analytic and bounded in the lower and upper
/// half-planes. A term whose exponential decays in the half-plane containing
/// its pole is made regular there by moving `c·e^{σiφa}/(x − a)` to the other
/// part. The constant is shared equally.
pub fn partial_fraction_jump(d: &RationalExpDensity) -> Result<(RationalExpDensity, RationalExpDensity)> {
    d.validate()?;
    let mut minus = RationalExpDensity::zero(d.phi);
    let mut plus = RationalExpDensity::zero(d.phi);
    minus.constant = d.constant / 2.0;
    plus.constant = d.constant / 2.0;
    for t in &d.terms {
        // sign of the exponent in e^{i·s·z}: decays where s·Im z > 0
        let s = t.phase.sign() * d.phi.signum() * (d.phi != 0.0) as i32 as f64;
        let upper = t.pole.im > 0.0;
        let shift = d.phase_at(t.phase, t.pole) * t.coeff;
        match (s, upper) {
            (s, true) if s <= 0.0 => minus.push(t.coeff, t.pole, t.phase),
            (s, false) if s >= 0.0 => plus.push(t.coeff, t.pole, t.phase),
            (_, true) => {
                plus.push(t.coeff, t.pole, t.phase);
                plus.push(-shift, t.pole, Phase::None);
                minus.push(shift, t.pole, Phase::None);
            }
            (_, false) => {
                minus.push(t.coeff, t.pole, t.phase);
                minus.push(-shift, t.pole, Phase::None);
                plus.push(shift, t.pole, Phase::None);
            }
        }
    }
    Ok((minus, plus))
}

/// A 2×2 matrix of [`RationalExpDensity`] entries, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalExpMatrix {
    pub entries: [RationalExpDensity; 4],
}

impl RationalExpMatrix {
    pub fn zero(phi: f64) -> Self {
        let z = RationalExpDensity::zero(phi);
        RationalExpMatrix {
            entries: [z.clone(), z.clone(), z.clone(), z],
        }
    }

    pub fn eval(&self, z: Complex64) -> CMat {
        let e = &self.entries;
        CMat::new2(e[0].eval(z), e[1].eval(z), e[2].eval(z), e[3].eval(z))
    }

    pub fn at_infinity(&self) -> CMat {
        let e = &self.entries;
        CMat::new2(e[0].constant, e[1].constant, e[2].constant, e[3].constant)
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> Result<SampledMatrixFunction> {
        SampledMatrixFunction::sample(grid, |x| self.eval(re(x)), self.at_infinity())
    }

    pub fn sum(&self, other: &Self) -> Self {
        RationalExpMatrix {
            entries: std::array::from_fn(|k| self.entries[k].sum(&other.entries[k])),
        }
    }

    /// Diagonal entries only.
    pub fn diagonal(&self) -> Self {
        let mut out = self.clone();
        out.entries[1] = RationalExpDensity::zero(self.entries[1].phi);
        out.entries[2] = RationalExpDensity::zero(self.entries[2].phi);
        out
    }

    /// Off-diagonal entries only.
    pub fn off_diagonal(&self) -> Self {
        let mut out = self.clone();
        out.entries[0] = RationalExpDensity::zero(self.entries[0].phi);
        out.entries[3] = RationalExpDensity::zero(self.entries[3].phi);
        out
    }

    /// Largest coefficient left after merging like terms entrywise; zero, up
    /// to rounding in the merged coefficients, when the matrix vanishes
    /// identically.
    pub fn symbolic_size(&self) -> f64 {
        self.entries
            .iter()
            .map(RationalExpDensity::symbolic_size)
            .fold(0.0, f64::max)
    }

    pub fn difference(&self, other: &Self) -> Self {
        let neg = |d: &RationalExpDensity| RationalExpDensity {
            constant: -d.constant,
            terms: d.terms.iter().map(|t| Term { coeff: -t.coeff, ..*t }).collect(),
            phi: d.phi,
        };
        RationalExpMatrix {
            entries: std::array::from_fn(|k| self.entries[k].sum(&neg(&other.entries[k]))),
        }
    }
}

/// Entrywise [`partial_fraction_jump`].
pub fn matrix_jump(m: &RationalExpMatrix) -> Result<(RationalExpMatrix, RationalExpMatrix)> {
    let mut minus = RationalExpMatrix::zero(m.entries[0].phi);
    let mut plus = minus.clone();
    for k in 0..4 {
        let (a, b) = partial_fraction_jump(&m.entries[k])?;
        minus.entries[k] = a;
        plus.entries[k] = b;
    }
    Ok((minus, plus))
}

pub fn example_p() -> RationalFn {
    RationalFn::new(vec![10.0, 0.0, 1.0], vec![1.0, 0.0, 1.0])
}

pub fn example_q() -> RationalFn {
    RationalFn::new(vec![6.0], vec![1.0, 0.0, 1.0])
}

pub fn example_spec(phi: f64, mu: f64, grid: &Arc<Grid>) -> Result<ClassSpec2x2> {
    ClassSpec2x2::new(
        RealRule::rational(example_p())?,
        RealRule::rational(example_q())?,
        phi,
        mu,
        grid,
    )
}

/// `(x − a)/(x − b)` with the limit 1 at infinity.
fn mobius(grid: &Arc<Grid>, a: Complex64, b: Complex64) -> Result<SampledMatrixFunction> {
    SampledMatrixFunction::sample_scalar(grid, |x| (re(x) - a) / (re(x) - b), re(1.0))
}

/// Exact factors: `(p + q)∓ = (x ∓ 4i)/(x ∓ i)` and `(p − q)∓ = (x ∓ 2i)/(x ∓ i)`.
pub fn closed_f_factors(grid: &Arc<Grid>) -> Result<FFactorization2x2> {
    let pair = |a: f64| -> Result<ScalarFactorPair> {
        Ok(ScalarFactorPair {
            minus: mobius(grid, I * a, I)?,
            plus: mobius(grid, -I * a, -I)?,
            index: 0,
        })
    };
    FFactorization2x2::from_scalar_pairs(pair(4.0)?, pair(2.0)?)
}

/// `coeff·w(x)/((x − a)(x − b))` where `w = Σ weight·e^{σiφx}`.
fn modulated_pair(
    phi: f64,
    coeff: Complex64,
    a: Complex64,
    b: Complex64,
    weights: &[(Phase, Complex64)],
) -> RationalExpDensity {
    let mut d = RationalExpDensity::zero(phi);
    let r = coeff / (a - b);
    for &(phase, w) in weights {
        d.push(r * w, a, phase);
        d.push(-r * w, b, phase);
    }
    d
}

/// `sin²(φx/2) = ½ − ¼e^{iφx} − ¼e^{−iφx}`.
fn sin_sq_half() -> [(Phase, Complex64); 3] {
    [
        (Phase::None, re(0.5)),
        (Phase::Plus, re(-0.25)),
        (Phase::Minus, re(-0.25)),
    ]
}

/// `sin(φx) = (e^{iφx} − e^{−iφx})/(2i)`.
fn sin_full() -> [(Phase, Complex64); 2] {
    let h = re(1.0) / (2.0 * I);
    [(Phase::Plus, h), (Phase::Minus, -h)]
}

/// `N = (F⁻)⁻¹G_φ(F⁺)⁻¹ − I` for the example, in closed form:
/// `[[−12 sin²(φx/2)/(x²+16), −6i sin φx/((x+2i)(x−4i))],
///   [6i sin φx/((x+4i)(x−2i)), 12 sin²(φx/2)/(x²+4)]]`.
pub fn exact_density(phi: f64) -> RationalExpMatrix {
    RationalExpMatrix {
        entries: [
            modulated_pair(phi, re(-12.0), 4.0 * I, -4.0 * I, &sin_sq_half()),
            modulated_pair(phi, -6.0 * I, -2.0 * I, 4.0 * I, &sin_full()),
            modulated_pair(phi, 6.0 * I, -4.0 * I, 2.0 * I, &sin_full()),
            modulated_pair(phi, re(12.0), 2.0 * I, -2.0 * I, &sin_sq_half()),
        ],
    }
}

/// Exact first-order factors: the half-plane parts of [`exact_density`].
pub fn exact_first_order(phi: f64) -> Result<(RationalExpMatrix, RationalExpMatrix)> {
    matrix_jump(&exact_density(phi))
}

/// Exact factors of the anti-diagonal part alone.
pub fn exact_star_factors(phi: f64) -> Result<(RationalExpMatrix, RationalExpMatrix)> {
    matrix_jump(&exact_density(phi).off_diagonal())
}

/// Builder for the published closed forms, written in the units
/// `P(σ, a) = e^{σiφx}/(x − a)`, `S(a) = 1/(x − a)` and
/// `R(σ, a) = (e^{σiφx} − e^{σiφa})/(x − a)`.
struct Printed {
    d: RationalExpDensity,
}

impl Printed {
    fn new(phi: f64) -> Self {
        Printed {
            d: RationalExpDensity::zero(phi),
        }
    }

    fn p(mut self, c: Complex64, phase: Phase, a: Complex64) -> Self {
        self.d.push(c, a, phase);
        self
    }

    fn s(mut self, c: Complex64, a: Complex64) -> Self {
        self.d.push(c, a, Phase::None);
        self
    }

    fn r(mut self, c: Complex64, phase: Phase, a: Complex64) -> Self {
        let at = self.d.phase_at(phase, a);
        self.d.push(c, a, phase);
        self.d.push(-c * at, a, Phase::None);
        self
    }

    /// `e^{σiφa}`, the decay constants `e^{−2φ}`, `e^{−4φ}` of the printed forms.
    fn at(&self, phase: Phase, a: Complex64) -> Complex64 {
        self.d.phase_at(phase, a)
    }

    fn done(self) -> RationalExpDensity {
        self.d
    }
}

/// The published first-order factors `N₁∓` of the example.
pub fn closed_first_order(phi: f64) -> (RationalExpMatrix, RationalExpMatrix) {
    use Phase::{Minus as M, Plus as P};
    let b = || Printed::new(phi);
    let (i2, i4) = (2.0 * I, 4.0 * I);
    // e^{−2φ}, e^{−4φ}
    let e2 = b().at(M, -i2);
    let e4 = b().at(M, -i4);
    let (k4, k16) = (re(6.0 / 32.0), re(6.0 / 16.0));
    let minus = RationalExpMatrix {
        entries: [
            b().p(-k4, M, i4).s(k4 * (2.0 - e4), i4).r(k4, M, -i4).done(),
            b().p(-I, M, i4).s(I * e4, i4).r(I, M, -i2).done(),
            b().p(I, M, i2).s(-I * e2, i2).r(-I, M, -i4).done(),
            b().p(k16, M, i2).s(k16 * (e2 - 2.0), i2).r(-k16, M, -i2).done(),
        ],
    };
    let plus = RationalExpMatrix {
        entries: [
            b().p(k4, P, -i4).s(k4 * (e4 - 2.0), -i4).r(-k4, P, i4).done(),
            b().p(-I, P, -i2).s(I * e2, -i2).r(I, P, i4).done(),
            b().p(I, P, -i4).s(-I * e4, -i4).r(-I, P, i2).done(),
            b().p(-k16, P, -i2).s(k16 * (2.0 - e2), -i2).r(k16, P, i2).done(),
        ],
    };
    (minus, plus)
}

/// The published anti-diagonal factors of the scheme that keeps only the
/// `O(φ)` part of `N`.
pub fn closed_star_factors(phi: f64) -> (RationalExpMatrix, RationalExpMatrix) {
    use Phase::{Minus as M, Plus as P};
    let b = || Printed::new(phi);
    let (i2, i4) = (2.0 * I, 4.0 * I);
    let e2 = b().at(M, -i2);
    let e4 = b().at(M, -i4);
    let mut minus = RationalExpMatrix::zero(phi);
    let mut plus = RationalExpMatrix::zero(phi);
    minus.entries[1] = b().p(-I, M, i4).s(I * e4, i4).p(I, M, -i2).s(-I * e2, -i2).done();
    minus.entries[2] = b().p(I, M, i2).s(-I * e2, i2).p(-I, M, -i4).s(I * e4, -i4).done();
    plus.entries[1] = b().p(-I, P, -i2).s(I * e2, -i2).p(I, P, i4).s(-I * e4, i4).done();
    plus.entries[2] = b().p(I, P, -i4).s(-I * e4, -i4).p(-I, P, i2).s(I * e2, i2).done();
    (minus, plus)
}

/// The published density `M₀` of the example, pointwise.
pub fn printed_m0(phi: f64, x: f64) -> CMat {
    let s2 = (phi * x / 2.0).sin().powi(2);
    let s = (phi * x).sin();
    let z = re(x);
    let k = 6.0 * I;
    CMat::new2(
        k * s2 / (x * x + 16.0),
        k * (-2.0 * s) / ((z + 2.0 * I) * (z - 4.0 * I)),
        k * (2.0 * s) / ((z - 2.0 * I) * (z + 4.0 * I)),
        -k * s2 / (x * x + 4.0),
    )
}

pub fn sample_printed_m0(phi: f64, grid: &Arc<Grid>) -> Result<SampledMatrixFunction> {
    SampledMatrixFunction::sample(grid, |x| printed_m0(phi, x), CMat::zeros(2))
}

/// How a published entry relates to the computed one: the best complex scale
/// `s` in `published ≈ s·computed` and what is left after rescaling.
#[derive(Debug, Clone, Serialize)]
pub struct EntryDiscrepancy {
    pub row: usize,
    pub col: usize,
    pub max_abs_diff: f64,
    pub scale: Complex64,
    pub rescaled_residual: f64,
}

/// Entrywise comparison of a published function against a computed one.
pub fn discrepancy_report(
    published: &SampledMatrixFunction,
    computed: &SampledMatrixFunction,
) -> Result<Vec<EntryDiscrepancy>> {
    if published.grid() != computed.grid() {
        return Err(Error::GridMismatch);
    }
    let mut out = Vec::new();
    for row in 0..2 {
        for col in 0..2 {
            let a = published.entry(row, col);
            let b = computed.entry(row, col);
            let num: Complex64 = b.iter().zip(&a).map(|(b, a)| b.conj() * a).sum();
            let den: f64 = b.iter().map(|b| b.norm_sqr()).sum();
            let scale = if den > 0.0 { num / den } else { re(0.0) };
            let max_abs_diff = a.iter().zip(&b).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let rescaled_residual = a
                .iter()
                .zip(&b)
                .map(|(a, b)| (a - scale * b).norm())
                .fold(0.0, f64::max);
            out.push(EntryDiscrepancy {
                row,
                col,
                max_abs_diff,
                scale,
                rescaled_residual,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::{jump_solve, verify_analyticity, HalfPlane};

    fn c(a: f64, b: f64) -> Complex64 {
        Complex64::new(a, b)
    }

    #[test]
    fn example_functions() {
        let (p, q) = (example_p(), example_q());
        assert_eq!(p.eval(0.0), 10.0);
        assert_eq!(q.eval(0.0), 6.0);
        assert_eq!(p.at_infinity(), Some(1.0));
        assert_eq!(q.at_infinity(), Some(0.0));
        for x in [-3.0, 0.0, 0.5, 7.0] {
            assert!((p.eval(x) - q.eval(x) - (x * x + 4.0) / (x * x + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn jump_of_lorentzian() {
        let mut d = RationalExpDensity::zero(0.0);
        // 1/(x²+1) = (1/2i)(1/(x−i) − 1/(x+i))
        d.push(-0.5 * I, I, Phase::None);
        d.push(0.5 * I, -I, Phase::None);
        let (m, p) = partial_fraction_jump(&d).unwrap();
        for x in [-2.0, 0.0, 1.5] {
            let z = re(x);
            assert!((m.eval(z) - (-I / (2.0 * (z - I)))).norm() < 1e-15);
            assert!((p.eval(z) - (I / (2.0 * (z + I)))).norm() < 1e-15);
        }
    }

    #[test]
    fn jump_shifts_decaying_exponentials() {
        let phi = 0.3;
        let mut d = RationalExpDensity::zero(phi);
        d.constant = c(0.4, -1.0);
        d.push(c(2.0, 1.0), -4.0 * I, Phase::Minus);
        d.push(c(-1.0, 0.5), 2.0 * I, Phase::Plus);
        d.push(c(1.0, 0.0), 3.0 * I, Phase::Minus);
        let (m, p) = partial_fraction_jump(&d).unwrap();
        assert_eq!(m.constant, d.constant / 2.0);
        // the minus part carries (e^{−iφx} − e^{−4φ})/(x + 4i)
        let e4 = (-4.0 * phi).exp();
        let z = c(0.7, 0.0);
        let expected = c(2.0, 1.0) * ((-I * phi * z).exp() - e4) / (z + 4.0 * I);
        // plus the pole term moved over from e^{iφx}/(x − 2i)
        let moved = c(-1.0, 0.5) * (-2.0 * phi).exp() / (z - 2.0 * I);
        let kept = (-I * phi * z).exp() / (z - 3.0 * I);
        let minus_only: f64 = (m.eval(z) - m.constant - expected - moved - kept).norm();
        assert!(minus_only < 1e-15, "{minus_only}");
        // parts sum to the input identically
        let back = m.sum(&p);
        let mut neg = d.clone();
        neg.constant = -neg.constant;
        neg.terms.iter_mut().for_each(|t| t.coeff = -t.coeff);
        assert!(back.sum(&neg).symbolic_size() < 1e-15);
        // each part is regular in its half-plane
        for y in [0.5, 3.0, 4.0, 20.0] {
            assert!(m.eval(c(0.3, -y)).norm().is_finite());
            assert!(p.eval(c(0.3, y)).norm().is_finite());
        }
    }

    #[test]
    fn on_axis_pole_is_rejected() {
        let mut d = RationalExpDensity::zero(0.1);
        d.push(re(1.0), re(2.0), Phase::Plus);
        assert!(matches!(partial_fraction_jump(&d), Err(Error::PoleOnAxis { .. })));
    }

    #[test]
    fn constant_splits_evenly() {
        let mut d = RationalExpDensity::zero(0.1);
        d.constant = c(3.0, 1.0);
        let (m, p) = partial_fraction_jump(&d).unwrap();
        assert_eq!(m.eval(re(5.0)), c(1.5, 0.5));
        assert_eq!(p.eval(re(-1.0)), c(1.5, 0.5));
    }

    #[test]
    fn exact_density_matches_the_product() {
        let grid = Grid::new(10.0, 512).unwrap();
        let phi = 0.1;
        let spec = example_spec(phi, 0.5, &grid).unwrap();
        let ff = closed_f_factors(&grid).unwrap();
        let g1 = spec.build_g1(&ff).unwrap();
        let n = g1.checked_sub(&SampledMatrixFunction::identity(&grid, 2)).unwrap();
        let exact = exact_density(phi).sample(&grid).unwrap();
        let e = n.max_abs_diff(&exact).unwrap();
        assert!(e < 1e-14, "{e}");
    }

    #[test]
    fn closed_f_factors_reproduce_f() {
        let grid = Grid::new(10.0, 256).unwrap();
        let ff = closed_f_factors(&grid).unwrap();
        let f = example_spec(0.0, 0.5, &grid).unwrap().build_f().unwrap();
        assert!(ff.product_defect(&f).unwrap() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let inf = ff.f_minus.at_infinity();
        assert!((inf - &CMat::new2(re(s), re(s), re(s), re(-s))).max_abs() < 1e-15);
        let direct = |x: f64| {
            let z = re(x);
            let a = (z - 4.0 * I) / (z - I);
            let b = (z - 2.0 * I) / (z - I);
            CMat::new2(a, b, a, -b).scale(re(s))
        };
        let j = grid.len() / 2;
        let e = (&ff.f_minus.values()[j] - &direct(grid.nodes()[j])).max_abs();
        assert!(e < 1e-15, "{e}");
        // at x = 0 the entries are 4/√2 and 2/√2
        let d0 = direct(0.0);
        assert!((d0[(0, 0)] - re(4.0 * s)).norm() < 1e-15 && (d0[(0, 1)] - re(2.0 * s)).norm() < 1e-15);
    }

    #[test]
    fn printed_forms_are_self_consistent() {
        for phi in [0.0, 0.1, 1.0] {
            let (m, p) = closed_first_order(phi);
            for x in [-30.0, -1.0, 0.0, 0.3, 2.0, 50.0] {
                let sum = &m.eval(re(x)) + &p.eval(re(x));
                assert!((&sum - &printed_m0(phi, x)).max_abs() < 1e-14, "{phi} {x}");
            }
            assert_eq!(m.at_infinity().max_abs(), 0.0);
            assert!(m.eval(re(1e9)).max_abs() < 1e-8);
        }
        let (m, p) = closed_first_order(0.0);
        assert!(m.eval(re(1.3)).max_abs() < 1e-16 && p.eval(re(-0.2)).max_abs() < 1e-16);
        let (sm, sp) = closed_star_factors(0.0);
        assert!(sm.eval(re(0.4)).max_abs() < 1e-16 && sp.eval(re(0.4)).max_abs() < 1e-16);
    }

    #[test]
    fn exact_parts_are_analytic_and_sum_back() {
        let phi = 0.1;
        let (m, p) = exact_first_order(phi).unwrap();
        let back = m.sum(&p).difference(&exact_density(phi));
        assert!(back.symbolic_size() < 1e-15);
        for y in [-0.5, -3.0, -4.0, -20.0] {
            assert!(m.eval(c(1.0, y)).is_finite());
        }
        // N₁⁻ is regular at the lower poles ±... and decays at infinity
        assert!(m.eval(c(0.0, -1e6)).max_abs() < 1e-5);
        assert!(p.eval(c(0.0, 1e6)).max_abs() < 1e-5);
    }

    #[test]
    fn star_factors_are_anti_diagonal() {
        let phi = 0.05;
        let (sm, sp) = closed_star_factors(phi);
        for x in [-2.0, 0.0, 3.0] {
            let (a, b) = (sm.eval(re(x)), sp.eval(re(x)));
            assert_eq!(a[(0, 0)], re(0.0));
            assert_eq!(b[(1, 1)], re(0.0));
        }
        let (em, ep) = exact_star_factors(phi).unwrap();
        let back = em.sum(&ep).difference(&exact_density(phi).off_diagonal());
        assert!(back.symbolic_size() < 1e-15);
    }

    #[test]
    fn quadrature_matches_exact_first_order() {
        let grid = Grid::new(10.0, 8192).unwrap();
        let phi = 0.1;
        let density = exact_density(phi).sample(&grid).unwrap();
        let sol = jump_solve(&density).unwrap();
        let (m, p) = exact_first_order(phi).unwrap();
        let em = sol.n_minus.max_abs_diff(&m.sample(&grid).unwrap()).unwrap();
        let ep = sol.n_plus.max_abs_diff(&p.sample(&grid).unwrap()).unwrap();
        assert!(em < 1e-5 && ep < 1e-5, "{em} {ep}");
        let probe = verify_analyticity(&sol.n_minus, HalfPlane::Minus, &[1.0]).unwrap();
        assert!(probe.max_defect < 1e-4, "{probe:?}");
    }

    #[test]
    fn printed_density_differs_from_the_product_by_entry_scales() {
        let grid = Grid::new(10.0, 1024).unwrap();
        let phi = 0.1;
        let printed = sample_printed_m0(phi, &grid).unwrap();
        let exact = exact_density(phi).sample(&grid).unwrap();
        let report = discrepancy_report(&printed, &exact).unwrap();
        let expect = [c(0.0, -0.5), re(2.0), re(2.0), c(0.0, -0.5)];
        for (r, e) in report.iter().zip(expect) {
            assert!((r.scale - e).norm() < 1e-12, "{r:?}");
            assert!(r.rescaled_residual < 1e-12);
            assert!(r.max_abs_diff > 1e-3);
        }
    }
}
