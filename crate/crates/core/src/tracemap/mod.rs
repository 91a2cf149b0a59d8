//! Trace maps of Sturmian Jacobi operators: model parameters, Chebyshev
//! polynomials, trace orbits, transfer matrices and escape tests.

mod growth;
mod orbit;
mod transfer;

pub use growth::{growth_floor, growth_floor_from, GrowthFloor};
pub use orbit::{
    fricke_vogt_residual, pseudospectrum_member, trace_derivatives, trace_orbit, trace_sequence,
    EscapeReason, Membership, TraceOrbit, Verdict, OVERFLOW_GUARD,
};
pub use transfer::{one_step, site_transfer, transfer_matrix};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::LogMatrix2;

/// Default escape margin δ.
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Quasiperiodic potential b(n) = λ1·v(n), hopping 1.
    Diagonal,
    /// Quasiperiodic hopping a(n) ∈ {λ1, λ2}, no potential.
    OffDiagonal,
}

/// Couplings and model kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    lambda1: f64,
    lambda2: f64,
    kind: ModelKind,
}

impl ModelParams {
    /// Diagonal model with potential strength λ1 ≥ 0 (λ1 = 0 is the free chain).
    pub fn diagonal(lambda1: f64) -> Result<Self> {
        if !(lambda1.is_finite() && lambda1 >= 0.0) {
            return Err(Error::InvalidArgument(format!("lambda1 must be >= 0, got {lambda1}")));
        }
        Ok(Self { lambda1, lambda2: 1.0, kind: ModelKind::Diagonal })
    }

    /// Off-diagonal model: hopping λ1 on letter 1, λ2 on letter 0.
    pub fn offdiagonal(lambda1: f64, lambda2: f64) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self { lambda1, lambda2, kind: ModelKind::OffDiagonal })
    }

    /// Off-diagonal model with λ1 = 1 and λ2 < 1 chosen so that the
    /// coupling equals `c`.
    pub fn offdiagonal_with_coupling(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidArgument(format!("coupling must be >= 0, got {c}")));
        }
        // (1 - λ²)/λ = c  ⇒  λ = (√(c² + 4) − c)/2
        let l2 = ((c * c + 4.0).sqrt() - c) / 2.0;
        Self::offdiagonal(1.0, l2)
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// c = (λ1² − λ2²)/(λ1λ2) off-diagonal, c = λ1 diagonal.
    pub fn coupling(&self) -> f64 {
        match self.kind {
            ModelKind::Diagonal => self.lambda1,
            ModelKind::OffDiagonal => {
                (self.lambda1 - self.lambda2) * (self.lambda1 + self.lambda2)
                    / (self.lambda1 * self.lambda2)
            }
        }
    }

    /// K with σ(H) ⊂ [−K+1, K−1].
    pub fn spectral_bound(&self) -> f64 {
        match self.kind {
            ModelKind::Diagonal => (3.0 + self.lambda1).max(4.0),
            ModelKind::OffDiagonal => (2.0 * self.lambda1.max(self.lambda2) + 1.0).max(4.0),
        }
    }

    /// Hopping a(n) for a site with Sturmian letter `v`.
    pub fn hopping(&self, v: u8) -> f64 {
        match self.kind {
            ModelKind::Diagonal => 1.0,
            ModelKind::OffDiagonal => {
                if v == 1 {
                    self.lambda1
                } else {
                    self.lambda2
                }
            }
        }
    }

    /// Potential b(n) for a site with Sturmian letter `v`.
    pub fn potential(&self, v: u8) -> f64 {
        match self.kind {
            ModelKind::Diagonal => self.lambda1 * v as f64,
            ModelKind::OffDiagonal => 0.0,
        }
    }

    /// Whether c exceeds λ(δ) = [12(1+δ)² + 8(1+δ)³ + 4]^{1/2}, the coupling
    /// needed for the complex-approximant estimates.
    pub fn complex_approximant_ok(&self, delta: f64) -> bool {
        let d = 1.0 + delta;
        self.coupling() > (12.0 * d * d + 8.0 * d * d * d + 4.0).sqrt()
    }
}

/// (x_{−1}, x_0, z_0)
pub fn initial_traces(p: &ModelParams, e: Complex64) -> (Complex64, Complex64, Complex64) {
    match p.kind {
        ModelKind::OffDiagonal => {
            let (l1, l2) = (p.lambda1, p.lambda2);
            (Complex64::new((l1 * l1 + l2 * l2) / (l1 * l2), 0.0), e / l2, e / l1)
        }
        ModelKind::Diagonal => (Complex64::new(2.0, 0.0), e, e - p.lambda1),
    }
}

const SMALL_ORDER: i64 = 64;
/// Below this modulus the three-term recursion is used for any order up to
/// [`RECURSION_CAP`]; it is exact at x = ±2, where matrix squaring is not.
const RECURSION_RADIUS: f64 = 2.2;
const RECURSION_CAP: i64 = 1 << 22;

/// S_l(x), extended to all integers by S_{−l−2} = −S_l (so S_{−1} = 0,
/// S_{−2} = −1). May overflow to infinity for large orders; use
/// [`chebyshev_scaled`] to avoid that.
pub fn chebyshev_s(l: i64, x: Complex64) -> Complex64 {
    let (s, _, scale) = chebyshev_scaled(l, x);
    if scale == 0.0 {
        s
    } else {
        s * scale.exp()
    }
}

/// (S_l(x), S_{l−1}(x)) as `e^scale · (a, b)`.
///
/// Three-term recursion (with rescaling) near the band |x| ≤ 2; repeated
/// squaring of [[x, −1], [1, 0]] in log scale for large |x| or huge orders.
pub fn chebyshev_scaled(l: i64, x: Complex64) -> (Complex64, Complex64, f64) {
    if l < -1 {
        // S_l = −S_{−l−2}, S_{l−1} = −S_{−l−1}
        let (s_hi, s_lo, sc) = chebyshev_scaled(-l - 1, x);
        return (-s_lo, -s_hi, sc);
    }
    if l <= SMALL_ORDER || (x.norm() <= RECURSION_RADIUS && l <= RECURSION_CAP) {
        let (mut prev, mut cur) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        if l == -1 {
            return (prev, -cur, 0.0);
        }
        let mut scale = 0.0;
        for _ in 0..l {
            let next = x * cur - prev;
            prev = cur;
            cur = next;
            let m = cur.norm();
            if m > 1e150 {
                prev /= m;
                cur /= m;
                scale += m.ln();
            }
        }
        return (cur, prev, scale);
    }
    // B = [[x, −1], [1, 0]] has B^l = [[S_l, −S_{l−1}], [S_{l−1}, −S_{l−2}]]
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let b = LogMatrix2::new([[x, -one], [one, zero]], 0.0).expect("nonzero finite matrix");
    let acc = b.pow(l as u64);
    let e = acc.entries();
    (e[0][0], e[1][0], acc.logscale())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn chebyshev_small() {
        for x in [c(0.0, 0.0), c(3.0, 0.0), c(2.0, 1.0)] {
            assert_eq!(chebyshev_s(1, x), x);
            assert_eq!(chebyshev_s(0, x), c(1.0, 0.0));
            assert_eq!(chebyshev_s(-1, x), c(0.0, 0.0));
            assert_eq!(chebyshev_s(-2, x), c(-1.0, 0.0));
            assert_eq!(chebyshev_s(-3, x), -x);
        }
        assert_eq!(chebyshev_s(2, c(3.0, 0.0)), c(8.0, 0.0));
        for l in 0..=50 {
            assert_eq!(chebyshev_s(l, c(2.0, 0.0)), c(l as f64 + 1.0, 0.0));
        }
    }

    #[test]
    fn chebyshev_large_orders() {
        for l in [65i64, 100, 1000, 123_457] {
            assert_eq!(chebyshev_s(l, c(2.0, 0.0)), c(l as f64 + 1.0, 0.0), "l={l}");
            let v = chebyshev_s(l, c(-2.0, 0.0));
            assert_eq!(v.re.abs(), l as f64 + 1.0);
        }
        // the scaled recursion and the matrix power agree just outside the band
        let x = c(2.15, 0.1);
        let (a, b, s) = chebyshev_scaled(5000, x);
        let m = LogMatrix2::new([[x, c(-1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]], 0.0)
            .unwrap()
            .pow(5000);
        let rel = ((a * (s - m.logscale()).exp()) - m.entries()[0][0]).norm();
        assert!(rel < 1e-9, "{rel}");
        assert!(b.norm() > 0.0);
        // |x| < 2: S_l(2cos θ) = sin((l+1)θ)/sin θ
        let t = 0.731f64;
        for l in [70i64, 1000, 1_000_000] {
            let v = chebyshev_s(l, c(2.0 * t.cos(), 0.0));
            let exact = ((l + 1) as f64 * t).sin() / t.sin();
            assert!((v.re - exact).abs() < 1e-8 * (l as f64), "l={l}");
        }
        // |x| > 2: log scale stays finite even when the value overflows
        let (a, b, s) = chebyshev_scaled(1_000_000, c(3.0, 0.5));
        assert!(s.is_finite() && s > 700.0);
        assert!(a.norm() > 0.1 && b.norm() > 0.0);
        // recursion consistency across the switch point
        let x = c(1.3, -0.4);
        let s63 = chebyshev_s(63, x);
        let s64 = chebyshev_s(64, x);
        let s65 = chebyshev_s(65, x);
        assert!((s65 - (x * s64 - s63)).norm() < 1e-9 * s65.norm().max(1.0));
    }

    #[test]
    fn initial_conditions() {
        let p = ModelParams::offdiagonal(1.0, 1.0).unwrap();
        assert_eq!(initial_traces(&p, c(0.0, 0.0)), (c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        let p = ModelParams::diagonal(4.0).unwrap();
        assert_eq!(initial_traces(&p, c(1.0, 0.0)), (c(2.0, 0.0), c(1.0, 0.0), c(-3.0, 0.0)));
        let p = ModelParams::offdiagonal(2.0, 1.0).unwrap();
        assert_eq!(initial_traces(&p, c(0.0, 0.0)), (c(2.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn params() {
        let p = ModelParams::offdiagonal(5.0, 0.5).unwrap();
        assert!((p.coupling() - 9.9).abs() < 1e-12);
        assert_eq!(p.spectral_bound(), 11.0);
        assert_eq!(ModelParams::diagonal(24.0).unwrap().spectral_bound(), 27.0);
        assert_eq!(ModelParams::diagonal(0.5).unwrap().spectral_bound(), 4.0);
        assert!(ModelParams::offdiagonal(0.0, 1.0).is_err());
        assert!(ModelParams::diagonal(-1.0).is_err());
        let q = ModelParams::offdiagonal_with_coupling(20.0).unwrap();
        assert!((q.coupling() - 20.0).abs() < 1e-10);
        assert_eq!(q.lambda1(), 1.0);
        assert!(q.complex_approximant_ok(0.1));
        assert!(!ModelParams::offdiagonal_with_coupling(4.0).unwrap().complex_approximant_ok(0.1));
    }
}
