//! The symmetric 2×2 class `G_φ = [[p, q·e^{iφx}], [q·e^{−iφx}, p]]`.
//!
//! Conjugating by the involution `P = (1/√2)[[1, 1], [1, −1]]` diagonalizes
//! `F = [[p, q], [q, p]]` into `diag(p + q, p − q)`, so `F` factors through two
//! scalar factorizations. The remaining matrix `G₁ = (F⁻)⁻¹·G_φ·(F⁺)⁻¹` is
//! close to the identity for small `φ` and is what the asymptotic engine
//! factors.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gridfn::{Grid, SampledMatrixFunction};
use crate::matrix::CMat;
use crate::rational::RationalFn;
use crate::scalarfact::{scalar_factor, ScalarFactorPair};

/// Largest allowed deviation of the outermost samples from the limits.
pub const DECAY_TOL: f64 = 1e-3;

const LIMIT_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;
const SPLIT_TOL: f64 = 1e-8;

/// A real scalar function on the line together with its limit at infinity.
#[derive(Clone)]
pub struct RealRule {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    at_infinity: f64,
}

impl RealRule {
    pub fn new<F>(f: F, at_infinity: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RealRule {
            f: Arc::new(f),
            at_infinity,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, c)
    }

    /// Wraps a validated rational function.
    pub fn rational(r: RationalFn) -> Result<Self> {
        r.validate()?;
        let inf = r.at_infinity().unwrap_or(f64::NAN);
        Ok(Self::new(move |x| r.eval(x), inf))
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn at_infinity(&self) -> f64 {
        self.at_infinity
    }
}

impl fmt::Debug for RealRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealRule")
            .field("at_infinity", &self.at_infinity)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassCondition {
    Holder,
    Positivity,
    Limits,
    Symmetry,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub condition: ClassCondition,
    pub passed: bool,
    /// The quantity compared against the threshold.
    pub measure: f64,
    /// Node where the measure is attained, if it is attained at a node.
    pub worst_x: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
    /// Set when the grid is too coarse for the phase `e^{iφx}`.
    pub nyquist_warning: Option<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn failures(&self) -> String {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| match c.worst_x {
                Some(x) => format!("{:?} (measure {:e} at x = {x})", c.condition, c.measure),
                None => format!("{:?} (measure {:e})", c.condition, c.measure),
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// `(p, q, φ)` sampled on a grid, with the class conditions checked once.
#[derive(Debug, Clone)]
pub struct ClassSpec2x2 {
    p: RealRule,
    q: RealRule,
    phi: f64,
    mu: f64,
    grid: Arc<Grid>,
    p_samples: Vec<f64>,
    q_samples: Vec<f64>,
    validation: ValidationReport,
}

impl ClassSpec2x2 {
    pub fn new(p: RealRule, q: RealRule, phi: f64, mu: f64, grid: &Arc<Grid>) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::HolderExponent(mu));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "phase parameter must be finite, got {phi}"
            )));
        }
        let sample = |r: &RealRule| -> Result<Vec<f64>> {
            grid.nodes()
                .iter()
                .map(|&x| {
                    let v = r.eval(x);
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::NonFinite { x })
                    }
                })
                .collect()
        };
        let p_samples = sample(&p)?;
        let q_samples = sample(&q)?;
        let mut spec = ClassSpec2x2 {
            p,
            q,
            phi,
            mu,
            grid: grid.clone(),
            p_samples,
            q_samples,
            validation: ValidationReport {
                checks: Vec::new(),
                nyquist_warning: None,
            },
        };
        spec.validation = spec.run_validation()?;
        Ok(spec)
    }

    /// The same functions with another phase parameter.
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.p.clone(), self.q.clone(), phi, self.mu, &self.grid)
    }

    pub fn p(&self) -> &RealRule {
        &self.p
    }

    pub fn q(&self) -> &RealRule {
        &self.q
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn validation(&self) -> &ValidationReport {
        &self.validation
    }

    fn require_valid(&self) -> Result<()> {
        if self.validation.passed() {
            Ok(())
        } else {
            Err(Error::InvalidClass(self.validation.failures()))
        }
    }

    fn scalar(&self, samples: &[f64], inf: f64) -> Result<SampledMatrixFunction> {
        let channel = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        SampledMatrixFunction::from_entries(&self.grid, 1, &[channel], CMat::scalar(Complex64::new(inf, 0.0)))
    }

    fn run_validation(&self) -> Result<ValidationReport> {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        let (p_inf, q_inf) = (self.p.at_infinity, self.q.at_infinity);

        let holder = self
            .scalar(&self.p_samples, p_inf)?
            .holder_norm_estimate(self.mu)?
            .max(self.scalar(&self.q_samples, q_inf)?.holder_norm_estimate(self.mu)?);

        let (mut min_pos, mut min_x) = (f64::INFINITY, f64::NAN);
        for ((&p, &q), &x) in self.p_samples.iter().zip(&self.q_samples).zip(nodes) {
            let m = (p + q).min(p - q);
            if m < min_pos {
                (min_pos, min_x) = (m, x);
            }
        }

        let limits_declared = (p_inf - 1.0).abs().max(q_inf.abs());
        let (mut tail, mut tail_x) = (0.0f64, f64::NAN);
        for j in [0, n - 1] {
            let d = (self.p_samples[j] - p_inf).abs().max((self.q_samples[j] - q_inf).abs());
            if d >= tail {
                (tail, tail_x) = (d, nodes[j]);
            }
        }
        let limits_ok = limits_declared.is_finite() && limits_declared <= LIMIT_TOL && tail <= DECAY_TOL;

        let (mut asym, mut asym_x) = (0.0f64, f64::NAN);
        for j in 0..n / 2 {
            let d = (self.p_samples[j] - self.p_samples[n - 1 - j])
                .abs()
                .max((self.q_samples[j] - self.q_samples[n - 1 - j]).abs());
            if d > asym {
                (asym, asym_x) = (d, nodes[j]);
            }
        }
        let scale = self
            .p_samples
            .iter()
            .chain(&self.q_samples)
            .fold(1.0f64, |m, v| m.max(v.abs()));

        let checks = vec![
            ConditionCheck {
                condition: ClassCondition::Holder,
                passed: holder.is_finite(),
                measure: holder,
                worst_x: None,
            },
            ConditionCheck {
                condition: ClassCondition::Positivity,
                passed: min_pos > 0.0,
                measure: min_pos,
                worst_x: Some(min_x),
            },
            ConditionCheck {
                condition: ClassCondition::Limits,
                passed: limits_ok,
                measure: limits_declared.max(tail),
                worst_x: if limits_declared > LIMIT_TOL {
                    None
                } else {
                    Some(tail_x)
                },
            },
            ConditionCheck {
                condition: ClassCondition::Symmetry,
                passed: asym <= SYMMETRY_TOL * scale,
                measure: asym,
                worst_x: (asym > 0.0).then_some(asym_x),
            },
        ];
        let nyquist_warning = (!self.grid.resolves_phase(self.phi)).then(|| {
            format!(
                "grid with N = {} and L = {} under-resolves e^(i·{}·x); expect reduced accuracy",
                n,
                self.grid.scale(),
                self.phi
            )
        });
        Ok(ValidationReport {
            checks,
            nyquist_warning,
        })
    }

    /// `G_φ = [[p, q·e^{iφx}], [q·e^{−iφx}, p]]`.
    pub fn build_g(&self) -> Result<SampledMatrixFunction> {
        let values = self
            .p_samples
            .iter()
            .zip(&self.q_samples)
            .zip(self.grid.nodes())
            .map(|((&p, &q), &x)| {
                let e = Complex64::from_polar(1.0, self.phi * x);
                let p = Complex64::new(p, 0.0);
                CMat::new2(p, e * q, e.conj() * q, p)
            })
            .collect();
        let p_inf = Complex64::new(self.p.at_infinity, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        SampledMatrixFunction::from_values(&self.grid, values, CMat::new2(p_inf, zero, zero, p_inf))
    }

    /// `F = [[p, q], [q, p]] = P·diag(p + q, p − q)·P`.
    pub fn build_f(&self) -> Result<SampledMatrixFunction> {
        let values = self
            .p_samples
            .iter()
            .zip(&self.q_samples)
            .map(|(&p, &q)| {
                let (p, q) = (Complex64::new(p, 0.0), Complex64::new(q, 0.0));
                CMat::new2(p, q, q, p)
            })
            .collect();
        let (p, q) = (
            Complex64::new(self.p.at_infinity, 0.0),
            Complex64::new(self.q.at_infinity, 0.0),
        );
        SampledMatrixFunction::from_values(&self.grid, values, CMat::new2(p, q, q, p))
    }

    /// Canonical factorization `F = F⁻·F⁺` from the scalar factorizations of
    /// `p + q` and `p − q`.
    pub fn factorize_f(&self) -> Result<FFactorization2x2> {
        self.require_valid()?;
        let combine = |sign: f64| {
            let samples: Vec<f64> = self
                .p_samples
                .iter()
                .zip(&self.q_samples)
                .map(|(&p, &q)| p + sign * q)
                .collect();
            self.scalar(&samples, self.p.at_infinity + sign * self.q.at_infinity)
        };
        let sum = scalar_factor(&combine(1.0)?)?;
        let diff = scalar_factor(&combine(-1.0)?)?;
        FFactorization2x2::from_scalar_pairs(sum, diff)
    }

    /// `G₁ = (F⁻)⁻¹·G_φ·(F⁺)⁻¹` as a node-wise product; `G₁(∞) = I`.
    pub fn build_g1(&self, ff: &FFactorization2x2) -> Result<SampledMatrixFunction> {
        self.require_valid()?;
        let g = self.build_g()?;
        let prod = ff.f_minus_inv.checked_mul(&g)?.checked_mul(&ff.f_plus_inv)?;
        SampledMatrixFunction::from_values(&self.grid, prod.values().to_vec(), CMat::identity(2))
    }

    /// Splits `N = G₁ − I` into its diagonal `O(φ²)` part and anti-diagonal
    /// `O(φ)` part, computed from closed expressions in `p`, `q` and the
    /// scalar factors, and checks that they add up to `N`.
    pub fn split_n(&self, ff: &FFactorization2x2, g1: &SampledMatrixFunction) -> Result<NSplit> {
        let n = g1.checked_sub(&SampledMatrixFunction::identity(&self.grid, 2))?;
        let (am, ap) = (ff.sum.minus.entry(0, 0), ff.sum.plus.entry(0, 0));
        let (bm, bp) = (ff.diff.minus.entry(0, 0), ff.diff.plus.entry(0, 0));
        let zero = Complex64::new(0.0, 0.0);
        let mut n1 = Vec::with_capacity(self.grid.len());
        let mut n2 = Vec::with_capacity(self.grid.len());
        for (j, &x) in self.grid.nodes().iter().enumerate() {
            let (p, q) = (self.p_samples[j], self.q_samples[j]);
            let half = (self.phi * x / 2.0).sin();
            let s2 = 2.0 * half * half;
            n1.push(CMat::diag(&[
                Complex64::new(-s2 * q / (p + q), 0.0),
                Complex64::new(s2 * q / (p - q), 0.0),
            ]));
            let f = Complex64::new(0.0, (self.phi * x).sin() * q / ((p - q) * (p + q)));
            n2.push(CMat::new2(zero, -f * bm[j] * ap[j], f * bp[j] * am[j], zero));
        }
        let n1 = SampledMatrixFunction::from_values(&self.grid, n1, CMat::zeros(2))?;
        let n2 = SampledMatrixFunction::from_values(&self.grid, n2, CMat::zeros(2))?;
        let defect = n1.checked_add(&n2)?.max_abs_diff(&n)?;
        if !(defect <= SPLIT_TOL * n.sup_norm().max(1.0)) {
            return Err(Error::Inconsistent {
                what: "diagonal/anti-diagonal split of G1 - I",
                defect,
            });
        }
        Ok(NSplit { n, n1, n2, defect })
    }

    /// `ε₁ = max_x |q(x)·sin(φx/2)|`.
    pub fn epsilon1(&self) -> f64 {
        let (q, phi) = (&self.q, self.phi);
        dense_max(self.grid.scale(), |x| (q.eval(x) * (phi * x / 2.0).sin()).abs()).0
    }

    /// `q_h = sup_x |x·q(x)|`.
    pub fn q_h(&self) -> f64 {
        let q = &self.q;
        dense_max(self.grid.scale(), |x| (x * q.eval(x)).abs()).0
    }

    /// `φ = 2δ/q_h`, which guarantees `ε₁ ≤ δ` since `|sin t| ≤ |t|`.
    pub fn phi_for_delta(&self, delta: f64) -> Result<PhiChoice> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidProblem(format!("delta must be positive, got {delta}")));
        }
        let q_h = self.q_h();
        if q_h == 0.0 {
            return Ok(PhiChoice {
                phi: f64::INFINITY,
                q_h,
                epsilon1: 0.0,
                degenerate: true,
            });
        }
        let phi = 2.0 * delta / q_h;
        let epsilon1 = self.with_phi(phi)?.epsilon1();
        Ok(PhiChoice {
            phi,
            q_h,
            epsilon1,
            degenerate: false,
        })
    }
}

/// Result of [`ClassSpec2x2::phi_for_delta`]. For `q ≡ 0` every `φ` works;
/// `phi` is then `+∞` and `degenerate` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiChoice {
    pub phi: f64,
    pub q_h: f64,
    /// `ε₁` re-evaluated at the returned `φ`.
    pub epsilon1: f64,
    pub degenerate: bool,
}

/// Maximizes `f` over the line: a coarse pass over `10⁴` points uniform in
/// `atan(x/L)`, then a pass `100×` finer around the coarse maximizer.
fn dense_max<F: Fn(f64) -> f64>(scale: f64, f: F) -> (f64, f64) {
    const COARSE: usize = 10_000;
    const REFINE: usize = 100;
    let at = |theta: f64| scale * theta.tan();
    let step = 2.0 * FRAC_PI_2 / COARSE as f64;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for k in 0..COARSE {
        let theta = -FRAC_PI_2 + (k as f64 + 0.5) * step;
        let v = f(at(theta));
        if v > best.0 {
            best = (v, at(theta), theta);
        }
    }
    let (lo, fine) = (best.2 - step, step / REFINE as f64);
    for k in 0..=2 * REFINE {
        let theta = lo + k as f64 * fine;
        if theta.abs() >= FRAC_PI_2 {
            continue;
        }
        let v = f(at(theta));
        if v > best.0 {
            best = (v, at(theta), theta);
        }
    }
    (best.0, best.1)
}

/// `F = F⁻·F⁺` with
/// `F⁻ = (1/√2)[[a⁻, b⁻], [a⁻, −b⁻]]`, `F⁺ = (1/√2)[[a⁺, a⁺], [b⁺, −b⁺]]`,
/// where `a = p + q`, `b = p − q`.
#[derive(Debug, Clone)]
pub struct FFactorization2x2 {
    pub f_minus: SampledMatrixFunction,
    pub f_plus: SampledMatrixFunction,
    pub f_minus_inv: SampledMatrixFunction,
    pub f_plus_inv: SampledMatrixFunction,
    /// Factors of `p + q`.
    pub sum: ScalarFactorPair,
    /// Factors of `p − q`.
    pub diff: ScalarFactorPair,
}

impl FFactorization2x2 {
    pub fn from_scalar_pairs(sum: ScalarFactorPair, diff: ScalarFactorPair) -> Result<Self> {
        let grid = sum.minus.grid().clone();
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let build = |f: &dyn Fn(Complex64, Complex64) -> CMat, a: &SampledMatrixFunction, b: &SampledMatrixFunction| {
            let values = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(a, b)| f(a[(0, 0)], b[(0, 0)]))
                .collect();
            SampledMatrixFunction::from_values(&grid, values, f(a.at_infinity()[(0, 0)], b.at_infinity()[(0, 0)]))
        };
        let one = Complex64::new(1.0, 0.0);
        let f_minus = build(&|a, b| CMat::new2(a, b, a, -b).scale(s), &sum.minus, &diff.minus)?;
        let f_plus = build(&|a, b| CMat::new2(a, a, b, -b).scale(s), &sum.plus, &diff.plus)?;
        let f_minus_inv = build(
            &|a, b| CMat::new2(one / a, one / a, one / b, -one / b).scale(s),
            &sum.minus,
            &diff.minus,
        )?;
        let f_plus_inv = build(
            &|a, b| CMat::new2(one / a, one / b, one / a, -one / b).scale(s),
            &sum.plus,
            &diff.plus,
        )?;
        Ok(FFactorization2x2 {
            f_minus,
            f_plus,
            f_minus_inv,
            f_plus_inv,
            sum,
            diff,
        })
    }

    /// `sup |F⁻F⁺ − F|`.
    pub fn product_defect(&self, f: &SampledMatrixFunction) -> Result<f64> {
        self.f_minus.checked_mul(&self.f_plus)?.max_abs_diff(f)
    }

    /// `max(sup |F⁻(F⁻)⁻¹ − I|, sup |(F⁺)⁻¹F⁺ − I|)`.
    pub fn inverse_defect(&self) -> Result<f64> {
        let id = SampledMatrixFunction::identity(self.f_minus.grid(), 2);
        let m = self.f_minus.checked_mul(&self.f_minus_inv)?.max_abs_diff(&id)?;
        let p = self.f_plus_inv.checked_mul(&self.f_plus)?.max_abs_diff(&id)?;
        Ok(m.max(p))
    }
}

/// `N = G₁ − I = N1 + N2` with `N1` diagonal and `N2` anti-diagonal.
#[derive(Debug, Clone)]
pub struct NSplit {
    pub n: SampledMatrixFunction,
    pub n1: SampledMatrixFunction,
    pub n2: SampledMatrixFunction,
    /// `sup |N1 + N2 − N|`.
    pub defect: f64,
}
