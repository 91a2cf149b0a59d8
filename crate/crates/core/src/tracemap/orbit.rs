use num_complex::Complex64;

use super::{chebyshev_scaled, initial_traces, ModelKind, ModelParams};
use crate::cf::ContinuedFraction;
use crate::error::{Error, Result};

/// Orbits are truncated before any entry exceeds this modulus.
pub const OVERFLOW_GUARD: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EscapeReason {
    /// |x_{N−1}| ≤ 2+δ, |x_N| > 2+δ and |z_N| > 2+δ.
    Growth,
    /// |x_0| > 2 and |z_0| > 2 in the off-diagonal model.
    UnboundedStart,
    /// The next entry would exceed [`OVERFLOW_GUARD`].
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    BoundedSoFar,
    Escaped { index: usize, reason: EscapeReason },
}

/// x_{−1}, x_0, ..., x_K and z_0, ..., z_K at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceOrbit {
    pub energy: Complex64,
    pub delta: f64,
    xs: Vec<Complex64>,
    zs: Vec<Complex64>,
    pub verdict: Verdict,
}

impl TraceOrbit {
    /// Largest level K held.
    pub fn last_level(&self) -> usize {
        self.zs.len() - 1
    }

    /// x_k for k ≥ −1.
    pub fn x(&self, k: i64) -> Option<Complex64> {
        if k < -1 {
            return None;
        }
        self.xs.get((k + 1) as usize).copied()
    }

    /// z_k for k ≥ 0.
    pub fn z(&self, k: i64) -> Option<Complex64> {
        if k < 0 {
            return None;
        }
        self.zs.get(k as usize).copied()
    }

    /// N_0, the first level at which the escape test fired.
    pub fn escape_index(&self) -> Option<usize> {
        match self.verdict {
            Verdict::Escaped { index, .. } => Some(index),
            Verdict::BoundedSoFar => None,
        }
    }

    pub fn escaped(&self) -> bool {
        matches!(self.verdict, Verdict::Escaped { .. })
    }

    pub fn xs(&self) -> &[Complex64] {
        &self.xs
    }

    pub fn zs(&self) -> &[Complex64] {
        &self.zs
    }
}

/// One level of the trace map: (x_{k−1}, x_k, z_k) ↦ (x_{k+1}, z_{k+1}).
/// Returns `None` if either result would pass the overflow guard.
fn step(xm: Complex64, x: Complex64, z: Complex64, a: u64) -> Option<(Complex64, Complex64)> {
    let (sa, sa1, scale) = chebyshev_scaled(a as i64, x);
    let sa2 = x * sa1 - sa;
    let nx = z * sa1 - xm * sa2;
    let nz = z * sa - xm * sa1;
    let lim = OVERFLOW_GUARD.ln();
    let ok = |v: Complex64| {
        let m = v.norm();
        m.is_finite() && (m == 0.0 || m.ln() + scale <= lim)
    };
    if !ok(nx) || !ok(nz) {
        return None;
    }
    let f = scale.exp();
    Some((nx * f, nz * f))
}

fn escape_fires(xm: Complex64, x: Complex64, z: Complex64, delta: f64) -> bool {
    let t = 2.0 + delta;
    xm.norm() <= t && x.norm() > t && z.norm() > t
}

fn iterate(
    p: &ModelParams,
    cf: &ContinuedFraction,
    e: Complex64,
    k_max: usize,
    delta: f64,
    stop_on_escape: bool,
) -> Result<TraceOrbit> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be >= 0, got {delta}")));
    }
    if !(e.re.is_finite() && e.im.is_finite()) {
        return Err(Error::NonFinite { what: "energy", index: 0 });
    }
    // require the quotients up front so exhaustion is reported consistently
    if k_max > 0 {
        cf.require(k_max)?;
    }
    let (xm, x0, z0) = initial_traces(p, e);
    let mut xs = Vec::with_capacity(k_max + 2);
    let mut zs = Vec::with_capacity(k_max + 1);
    xs.extend([xm, x0]);
    zs.push(z0);
    let mut verdict = Verdict::BoundedSoFar;
    if escape_fires(xm, x0, z0, delta) {
        verdict = Verdict::Escaped { index: 0, reason: EscapeReason::Growth };
        if stop_on_escape {
            return Ok(TraceOrbit { energy: e, delta, xs, zs, verdict });
        }
    }
    for k in 0..k_max {
        let a = cf.require(k + 1)?;
        let (xm, x, z) = (xs[k], xs[k + 1], zs[k]);
        match step(xm, x, z, a) {
            None => {
                if verdict == Verdict::BoundedSoFar {
                    verdict = Verdict::Escaped { index: k + 1, reason: EscapeReason::Overflow };
                }
                break;
            }
            Some((nx, nz)) => {
                xs.push(nx);
                zs.push(nz);
                if verdict == Verdict::BoundedSoFar && escape_fires(x, nx, nz, delta) {
                    verdict = Verdict::Escaped { index: k + 1, reason: EscapeReason::Growth };
                    if stop_on_escape {
                        break;
                    }
                }
            }
        }
    }
    Ok(TraceOrbit { energy: e, delta, xs, zs, verdict })
}

/// Iterates the trace map until `k_max` or until the escape test fires.
pub fn trace_orbit(
    p: &ModelParams,
    cf: &ContinuedFraction,
    e: Complex64,
    k_max: usize,
    delta: f64,
) -> Result<TraceOrbit> {
    iterate(p, cf, e, k_max, delta, true)
}

/// Iterates through `k_max` regardless of escape (the verdict still records
/// where the escape test first fired); stops only at the overflow guard.
pub fn trace_sequence(
    p: &ModelParams,
    cf: &ContinuedFraction,
    e: Complex64,
    k_max: usize,
    delta: f64,
) -> Result<TraceOrbit> {
    iterate(p, cf, e, k_max, delta, false)
}

/// |x_k² + x_{k+1}² + z_{k+1}² − x_k x_{k+1} z_{k+1} − (c² + 4)|
pub fn fricke_vogt_residual(orbit: &TraceOrbit, p: &ModelParams, k: i64) -> Result<f64> {
    let out = || Error::OutOfRange { index: k, available: orbit.last_level() };
    let x0 = orbit.x(k).ok_or_else(out)?;
    let x1 = orbit.x(k + 1).ok_or_else(out)?;
    let z1 = orbit.z(k + 1).ok_or_else(out)?;
    let c = p.coupling();
    Ok((x0 * x0 + x1 * x1 + z1 * z1 - x0 * x1 * z1 - (c * c + 4.0)).norm())
}

/// Outcome of the escape-time membership test for the spectrum.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    /// Provably outside the spectrum; `index` is the level at which the test fired.
    Out { index: usize, reason: EscapeReason },
    /// Bounded through the examined levels.
    UndecidedIn,
}

/// Escape-time test: "out" as soon as the growth criterion fires.
pub fn pseudospectrum_member(
    p: &ModelParams,
    cf: &ContinuedFraction,
    e: Complex64,
    k_max: usize,
    delta: f64,
) -> Result<Membership> {
    if p.kind() == ModelKind::OffDiagonal && e.im == 0.0 {
        let (_, x0, z0) = initial_traces(p, e);
        if x0.norm() > 2.0 && z0.norm() > 2.0 {
            return Ok(Membership::Out { index: 0, reason: EscapeReason::UnboundedStart });
        }
    }
    let orbit = trace_orbit(p, cf, e, k_max, delta)?;
    Ok(match orbit.verdict {
        Verdict::Escaped { index, reason } => Membership::Out { index, reason },
        Verdict::BoundedSoFar => Membership::UndecidedIn,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dual {
    v: f64,
    d: f64,
}

impl Dual {
    fn mul(self, o: Dual) -> Dual {
        Dual { v: self.v * o.v, d: self.v * o.d + self.d * o.v }
    }
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}

/// Values and E-derivatives of x_k for k = −1..=k_max at real E, by forward
/// differentiation of the trace map. Returns pairs (x_k, x'_k) starting at
/// index −1, and the matching pairs for z_k starting at 0.
pub fn trace_derivatives(
    p: &ModelParams,
    cf: &ContinuedFraction,
    e: f64,
    k_max: usize,
) -> Result<(Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    let (xm, x0, z0) = initial_traces(p, Complex64::new(e, 0.0));
    let (dx0, dz0) = match p.kind() {
        ModelKind::OffDiagonal => (1.0 / p.lambda2(), 1.0 / p.lambda1()),
        ModelKind::Diagonal => (1.0, 1.0),
    };
    let mut xs = vec![Dual { v: xm.re, d: 0.0 }, Dual { v: x0.re, d: dx0 }];
    let mut zs = vec![Dual { v: z0.re, d: dz0 }];
    for k in 0..k_max {
        let a = cf.require(k + 1)? as usize;
        let (xm, x, z) = (xs[k], xs[k + 1], zs[k]);
        // S_{a−2}, S_{a−1}, S_a by the three-term recursion
        let mut s = vec![Dual { v: -1.0, d: 0.0 }, Dual { v: 0.0, d: 0.0 }];
        for _ in 0..=a {
            let n = s.len();
            s.push(x.mul(s[n - 1]).sub(s[n - 2]));
        }
        let n = s.len();
        let (sa, sa1, sa2) = (s[n - 1], s[n - 2], s[n - 3]);
        let nx = z.mul(sa1).sub(xm.mul(sa2));
        let nz = z.mul(sa).sub(xm.mul(sa1));
        if !(nx.v.abs() < OVERFLOW_GUARD && nz.v.abs() < OVERFLOW_GUARD) {
            break;
        }
        xs.push(nx);
        zs.push(nz);
    }
    Ok((
        xs.into_iter().map(|d| (d.v, d.d)).collect(),
        zs.into_iter().map(|d| (d.v, d.d)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn free_fibonacci_period_six() {
        let p = ModelParams::offdiagonal(1.0, 1.0).unwrap();
        let o = trace_orbit(&p, &ContinuedFraction::golden(), c(0.0), 12, 0.1).unwrap();
        let xs: Vec<f64> = o.xs().iter().map(|z| z.re).collect();
        assert_eq!(&xs[..8], &[2.0, 0.0, 0.0, -2.0, 0.0, 0.0, 2.0, 0.0]);
        assert_eq!(o.verdict, Verdict::BoundedSoFar);
    }

    #[test]
    fn golden_z_is_next_x() {
        let p = ModelParams::offdiagonal(2.0, 0.7).unwrap();
        let o = trace_sequence(&p, &ContinuedFraction::golden(), c(0.37), 10, 0.1).unwrap();
        for k in 0..10 {
            assert!((o.z(k).unwrap() - o.x(k + 1).unwrap()).norm() < 1e-12);
            if k >= 1 {
                let rec = o.x(k).unwrap() * o.x(k - 1).unwrap() - o.x(k - 2).unwrap();
                assert!((o.x(k + 1).unwrap() - rec).norm() < 1e-9 * rec.norm().max(1.0));
            }
        }
    }

    #[test]
    fn diagonal_large_energy_escapes() {
        let p = ModelParams::diagonal(4.0).unwrap();
        let o = trace_orbit(&p, &ContinuedFraction::golden(), c(100.0), 10, 0.0).unwrap();
        assert!(o.escape_index().unwrap() <= 2);
        let n = o.escape_index().unwrap() as i64;
        assert!(o.x(n).unwrap().norm() > 2.0);
        assert!(o.x(n - 1).unwrap().norm() <= 2.0);
    }

    #[test]
    fn base_case() {
        let p = ModelParams::diagonal(3.0).unwrap();
        let e = Complex64::new(0.4, 0.1);
        let o = trace_orbit(&p, &ContinuedFraction::silver(), e, 3, 0.1).unwrap();
        let (xm, x0, z0) = initial_traces(&p, e);
        assert_eq!((o.x(-1).unwrap(), o.x(0).unwrap(), o.z(0).unwrap()), (xm, x0, z0));
    }

    #[test]
    fn quotient_exhaustion() {
        let cf = ContinuedFraction::explicit(vec![1, 2]).unwrap();
        let p = ModelParams::diagonal(1.0).unwrap();
        assert_eq!(
            trace_orbit(&p, &cf, c(0.0), 5, 0.1).unwrap_err(),
            Error::InsufficientQuotients { required: 5, available: 2 }
        );
    }

    #[test]
    fn fricke_vogt_examples() {
        let p = ModelParams::offdiagonal(1.0, 1.0).unwrap();
        let o = trace_orbit(&p, &ContinuedFraction::golden(), c(0.0), 5, 0.1).unwrap();
        assert_eq!(fricke_vogt_residual(&o, &p, 0).unwrap(), 0.0);
        assert_eq!(fricke_vogt_residual(&o, &p, -1).unwrap(), 0.0);
        assert!(fricke_vogt_residual(&o, &p, 5).is_err());
        let p = ModelParams::diagonal(0.0).unwrap();
        let o = trace_orbit(&p, &ContinuedFraction::golden(), c(1.1), 8, 0.1).unwrap();
        for k in -1..(o.last_level() as i64) {
            assert!(fricke_vogt_residual(&o, &p, k).unwrap() < 1e-12);
        }
    }

    #[test]
    fn membership() {
        let p = ModelParams::offdiagonal(1.0, 1.0).unwrap();
        let g = ContinuedFraction::golden();
        assert_eq!(pseudospectrum_member(&p, &g, c(0.0), 20, 0.1).unwrap(), Membership::UndecidedIn);
        match pseudospectrum_member(&p, &g, c(10.0), 20, 0.1).unwrap() {
            Membership::Out { index, .. } => assert!(index <= 1),
            m => panic!("{m:?}"),
        }
        // diagonal: far outside escapes through the growth test
        let p = ModelParams::diagonal(2.0).unwrap();
        for e in [-6.0, 7.5, 40.0] {
            assert!(matches!(
                pseudospectrum_member(&p, &g, c(e), 20, 0.1).unwrap(),
                Membership::Out { .. }
            ));
        }
    }

    #[test]
    fn overflow_guard_truncates() {
        let p = ModelParams::offdiagonal(3.0, 1.0).unwrap();
        let o = trace_sequence(&p, &ContinuedFraction::silver(), c(7.9), 60, 0.1).unwrap();
        assert!(o.last_level() < 60);
        assert!(o.xs().iter().chain(o.zs()).all(|v| v.norm() <= OVERFLOW_GUARD));
        assert!(o.escaped());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = ModelParams::diagonal(5.0).unwrap();
        let cf = ContinuedFraction::explicit(vec![1, 2, 1, 3, 1, 1, 2]).unwrap();
        let e = 0.123;
        let h = 1e-6;
        let (xs, zs) = trace_derivatives(&p, &cf, e, 7).unwrap();
        let plus = trace_sequence(&p, &cf, c(e + h), 7, 0.1).unwrap();
        let minus = trace_sequence(&p, &cf, c(e - h), 7, 0.1).unwrap();
        for k in 0..=5i64 {
            let fd = (plus.x(k).unwrap().re - minus.x(k).unwrap().re) / (2.0 * h);
            let (v, d) = xs[(k + 1) as usize];
            assert!((v - plus.x(k).unwrap().re).abs() < 1e-3 * v.abs().max(1.0));
            assert!((d - fd).abs() < 1e-4 * d.abs().max(1.0), "k={k}: {d} vs {fd}");
            let fdz = (plus.z(k).unwrap().re - minus.z(k).unwrap().re) / (2.0 * h);
            assert!((zs[k as usize].1 - fdz).abs() < 1e-4 * fdz.abs().max(1.0));
        }
    }
}
