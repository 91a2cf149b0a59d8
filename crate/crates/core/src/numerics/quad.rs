//! One-dimensional quadrature.

use crate::error::{Error, Result};

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the local Richardson error estimates.
    pub error: f64,
    pub converged: bool,
    pub intervals: usize,
}

/// Hard cap on the number of subintervals examined.
pub const MAX_INTERVALS: usize = 1 << 20;
const INITIAL_PANELS: usize = 16;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// The target is `|result - exact| <= tol * (1 + |result|)`. If the interval
/// cap is hit, the best estimate is returned with `converged = false`.
pub fn quadrature<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidArgument(format!("integrand is not finite at {x}")))
        }
    };

    let h = (b - a) / INITIAL_PANELS as f64;
    let mut stack = Vec::with_capacity(64);
    let mut coarse = 0.0;
    let mut f_left = eval(a)?;
    for i in 0..INITIAL_PANELS {
        let pa = a + h * i as f64;
        let pb = if i + 1 == INITIAL_PANELS { b } else { a + h * (i + 1) as f64 };
        let fm = eval(0.5 * (pa + pb))?;
        let fb = eval(pb)?;
        let whole = simpson(pa, pb, f_left, fm, fb);
        coarse += whole;
        stack.push(Panel { a: pa, b: pb, fa: f_left, fm, fb, whole });
        f_left = fb;
    }
    stack.reverse();

    let width = b - a;
    let target = tol * (1.0 + coarse.abs());
    let mut value = 0.0;
    let mut error = 0.0;
    let mut intervals = INITIAL_PANELS;
    let mut converged = true;

    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let flm = eval(0.5 * (p.a + m))?;
        let frm = eval(0.5 * (m + p.b))?;
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let diff = left + right - p.whole;
        let local_tol = target * (p.b - p.a) / width;
        intervals = (intervals + 1).min(MAX_INTERVALS);
        let too_small = m <= p.a || m >= p.b;
        if diff.abs() <= 15.0 * local_tol || too_small || intervals >= MAX_INTERVALS {
            if !(diff.abs() <= 15.0 * local_tol) {
                converged = false;
            }
            value += left + right + diff / 15.0;
            error += diff.abs() / 15.0;
        } else {
            stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right });
            stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left });
        }
    }
    Ok(Quadrature { value, error, converged, intervals })
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order.max(1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n == 1 {
        w[0] = 2.0;
    }
    (x, w)
}

/// Composite Gauss–Legendre rule: nodes and weights for `panels` equal
/// subintervals of `[a, b]`, `order` points each.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * x.len());
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((mid + 0.5 * h * xi, 0.5 * h * wi));
        }
    }
    out
}
