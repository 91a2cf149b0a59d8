//! 2×2 complex matrices carried as `e^logscale · entries`.

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat2 = [[Complex64; 2]; 2];

/// A 2×2 complex matrix with a separate natural-log magnitude factor.
///
/// After construction the largest entry modulus is exactly 1 (up to
/// rounding), so products of any length never overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMatrix2 {
    entries: Mat2,
    logscale: f64,
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn max_modulus(m: &Mat2) -> f64 {
    m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

impl LogMatrix2 {
    pub fn new(entries: Mat2, logscale: f64) -> Result<Self> {
        for (i, z) in entries.iter().flatten().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { what: "matrix entry", index: i });
            }
        }
        if !logscale.is_finite() {
            return Err(Error::NonFinite { what: "logscale", index: 0 });
        }
        Self::normalized(entries, logscale)
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(
            [
                [Complex64::new(m[0][0], 0.0), Complex64::new(m[0][1], 0.0)],
                [Complex64::new(m[1][0], 0.0), Complex64::new(m[1][1], 0.0)],
            ],
            0.0,
        )
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self { entries: [[one, zero], [zero, one]], logscale: 0.0 }
    }

    fn normalized(entries: Mat2, logscale: f64) -> Result<Self> {
        let m = max_modulus(&entries);
        if m == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        if !m.is_finite() {
            return Err(Error::NonFinite { what: "matrix product", index: 0 });
        }
        let inv = 1.0 / m;
        let mut e = entries;
        for z in e.iter_mut().flatten() {
            *z *= inv;
        }
        Ok(Self { entries: e, logscale: logscale + m.ln() })
    }

    /// Normalized entries; the represented matrix is `e^logscale` times these.
    pub fn entries(&self) -> &Mat2 {
        &self.entries
    }

    pub fn logscale(&self) -> f64 {
        self.logscale
    }

    /// The plain matrix, if every entry is representable.
    pub fn to_matrix(&self) -> Option<Mat2> {
        if self.logscale > 700.0 {
            return None;
        }
        let s = self.logscale.exp();
        let mut e = self.entries;
        for z in e.iter_mut().flatten() {
            *z *= s;
        }
        Some(e)
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i][j] * self.logscale.exp()
    }

    /// Trace of the represented matrix (may overflow to infinity).
    pub fn trace(&self) -> Complex64 {
        (self.entries[0][0] + self.entries[1][1]) * self.logscale.exp()
    }

    /// Natural log of |trace|; `-inf` for a traceless matrix.
    pub fn ln_abs_trace(&self) -> f64 {
        (self.entries[0][0] + self.entries[1][1]).norm().ln() + self.logscale
    }

    /// Determinant of the represented matrix.
    pub fn det(&self) -> Complex64 {
        let e = &self.entries;
        (e[0][0] * e[1][1] - e[0][1] * e[1][0]) * (2.0 * self.logscale).exp()
    }

    /// Natural log of the spectral (operator 2-) norm.
    pub fn ln_norm(&self) -> f64 {
        let e = &self.entries;
        let fro2: f64 = e.iter().flatten().map(|z| z.norm_sqr()).sum();
        let det = (e[0][0] * e[1][1] - e[0][1] * e[1][0]).norm();
        let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
        0.5 * (0.5 * (fro2 + disc)).ln() + self.logscale
    }

    /// Adjugate; equals the inverse when the determinant is 1.
    pub fn adjugate(&self) -> Self {
        let e = &self.entries;
        Self {
            entries: [[e[1][1], -e[0][1]], [-e[1][0], e[0][0]]],
            logscale: self.logscale,
        }
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Self {
        let mut acc = Self::identity();
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                acc = logmat_mul(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = logmat_mul(&base, &base);
            }
        }
        acc
    }
}

/// Product of two log-scaled matrices.
///
/// Normalized inputs keep the intermediate entries below 2 in modulus, so the
/// product is always finite; an exactly singular cancellation to zero falls
/// back to the tiniest representable scale.
pub fn logmat_mul(a: &LogMatrix2, b: &LogMatrix2) -> LogMatrix2 {
    let e = mat_mul(&a.entries, &b.entries);
    let scale = a.logscale + b.logscale;
    LogMatrix2::normalized(e, scale).unwrap_or(LogMatrix2 { entries: e, logscale: scale })
}

impl Mul for LogMatrix2 {
    type Output = LogMatrix2;
    fn mul(self, rhs: LogMatrix2) -> LogMatrix2 {
        logmat_mul(&self, &rhs)
    }
}

impl Mul for &LogMatrix2 {
    type Output = LogMatrix2;
    fn mul(self, rhs: &LogMatrix2) -> LogMatrix2 {
        logmat_mul(self, rhs)
    }
}
