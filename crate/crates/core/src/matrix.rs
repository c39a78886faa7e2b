//! Small dense complex matrices, evaluated once per grid node.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major n×n complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "matrix must be square");
            data.extend_from_slice(row);
        }
        CMat { n, data }
    }

    /// 2×2 matrix `[[a, b], [c, d]]`.
    pub fn new2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        CMat {
            n: 2,
            data: vec![a, b, c, d],
        }
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn scalar(v: Complex64) -> Self {
        CMat { n: 1, data: vec![v] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CMat {
            n: self.n,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        CMat {
            n: self.n,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Diagonal part, off-diagonal entries zeroed.
    pub fn diagonal_part(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            out[(i, i)] = self[(i, i)];
        }
        out
    }

    /// Largest modulus among off-diagonal entries.
    pub fn max_abs_off_diagonal(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    m = m.max(self[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn det(&self) -> Complex64 {
        match self.n {
            0 => ONE,
            1 => self.data[0],
            2 => self.data[0] * self.data[3] - self.data[1] * self.data[2],
            _ => {
                let (lu, sign) = match self.lu() {
                    Some(v) => v,
                    None => return ZERO,
                };
                (0..self.n).fold(Complex64::new(sign, 0.0), |acc, i| acc * lu[(i, i)])
            }
        }
    }

    /// Inverse, or `None` when the matrix is numerically singular.
    pub fn inverse(&self) -> Option<Self> {
        if self.n == 2 {
            let d = self.det();
            if d.norm() <= f64::MIN_POSITIVE {
                return None;
            }
            let [a, b, c, e] = [self.data[0], self.data[1], self.data[2], self.data[3]];
            return Some(CMat::new2(e / d, -b / d, -c / d, a / d));
        }
        // Gauss-Jordan with partial pivoting
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
                .unwrap_or(col);
            if a[(pivot, col)].norm() <= f64::MIN_POSITIVE {
                return None;
            }
            if pivot != col {
                for k in 0..n {
                    a.data.swap(pivot * n + k, col * n + k);
                    inv.data.swap(pivot * n + k, col * n + k);
                }
            }
            let p = a[(col, col)];
            for k in 0..n {
                a[(col, k)] /= p;
                inv[(col, k)] /= p;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = a[(row, col)];
                if f == ZERO {
                    continue;
                }
                for k in 0..n {
                    let av = a[(col, k)];
                    let iv = inv[(col, k)];
                    a[(row, k)] -= f * av;
                    inv[(row, k)] -= f * iv;
                }
            }
        }
        Some(inv)
    }

    fn lu(&self) -> Option<(Self, f64)> {
        let n = self.n;
        let mut a = self.clone();
        let mut sign = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
                .unwrap_or(col);
            if a[(pivot, col)].norm() <= f64::MIN_POSITIVE {
                return None;
            }
            if pivot != col {
                for k in 0..n {
                    a.data.swap(pivot * n + k, col * n + k);
                }
                sign = -sign;
            }
            for row in col + 1..n {
                let f = a[(row, col)] / a[(col, col)];
                for k in col..n {
                    let v = a[(col, k)];
                    a[(row, k)] -= f * v;
                }
                a[(row, col)] = f;
            }
        }
        Some((a, sign))
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        CMat {
            n: self.n,
            data: self.data.iter().map(|z| -z).collect(),
        }
    }
}

impl AddAssign<&CMat> for CMat {
    fn add_assign(&mut self, rhs: &CMat) {
        assert_eq!(self.n, rhs.n);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.n {
            list.entry(&&self.data[i * self.n..(i + 1) * self.n]);
        }
        list.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_2x2_and_general_agree() {
        let m = CMat::new2(c(1.0, 2.0), c(0.5, 0.0), c(-1.0, 0.3), c(3.0, -1.0));
        let inv = m.inverse().unwrap();
        let prod = &m * &inv;
        assert!((&prod - &CMat::identity(2)).max_abs() < 1e-14);

        let m3 = CMat::from_rows(&[
            &[c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.0)],
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, -0.5)],
            &[c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)],
        ]);
        let inv3 = m3.inverse().unwrap();
        assert!((&(&m3 * &inv3) - &CMat::identity(3)).max_abs() < 1e-14);
        let expected = c(2.0, 0.0) * c(3.0, 0.0) - c(2.0, 0.0) * c(0.0, 0.0)
            + c(1.0, 1.0) * (c(0.5, -0.5) * c(1.0, 0.0))
            - c(1.0, 1.0) * c(0.0, 0.0) * c(3.0, 0.0);
        assert!((m3.det() - expected).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = CMat::new2(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0));
        assert!(m.inverse().is_none());
        let m3 = CMat::zeros(3);
        assert!(m3.inverse().is_none());
        assert_eq!(m3.det(), ZERO);
    }

    #[test]
    fn off_diagonal_and_diagonal_parts() {
        let m = CMat::new2(c(1.0, 0.0), c(0.0, -2.0), c(3.0, 0.0), c(4.0, 0.0));
        assert_eq!(m.max_abs_off_diagonal(), 3.0);
        assert_eq!(m.diagonal_part().max_abs_off_diagonal(), 0.0);
    }
}
