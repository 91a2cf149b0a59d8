//! Closed-form dimension and exponent bounds, and box-counting estimates.

use std::f64::consts::LN_2;

use super::SpectrumCover;
use crate::cf::{khintchin_c, ContinuedFraction, SeriesValue};
use crate::error::{Error, Result};
use crate::numerics::linfit;
use crate::tracemap::{ModelKind, ModelParams};

/// Cutoff used for D when none is given.
pub const D_DEFAULT_TERMS: u64 = 100_000;
/// Accuracy of the Khintchin-type mean used in the almost-sure bound.
const KHINTCHIN_TOL: f64 = 1e-4;

fn golden_ratio() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

/// ln((√5+1)/2) / (C_k + ln(λ1+5)), C_k = (3/k) Σ_{j ≤ k} ln(a_j + 2).
pub fn dim_lower_bound(cf: &ContinuedFraction, lambda1: f64, k: usize) -> Result<f64> {
    if !(lambda1 > 20.0) {
        return Err(Error::Hypothesis(format!("lambda1 = {lambda1} must exceed 20")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("need k >= 1".into()));
    }
    let qs = cf.quotients(k)?;
    let c_k = 3.0 * qs.iter().map(|&a| (a as f64 + 2.0).ln()).sum::<f64>() / k as f64;
    Ok(golden_ratio().ln() / (c_k + (lambda1 + 5.0).ln()))
}

/// Two-step growth factor c(a_{2k}, a_{2k−1}) of n_{2k} over n_{2k−2}.
pub fn two_step_factor(a_even: u64, a_odd: u64) -> Result<u64> {
    if a_even == 0 || a_odd == 0 {
        return Err(Error::InvalidArgument("quotients must be >= 1".into()));
    }
    let (l, g) = (a_even, a_odd);
    let v = match (l, g) {
        (1, 1) => Some(2),
        (2, 1) | (1, 2) => Some(3),
        (2, 2) => Some(5),
        (l, 1) => Some(l - 1),
        (l, 2) => (l - 1).checked_mul(2),
        (1, g) => Some(g),
        (2, g) => g.checked_mul(2).map(|v| v - 1),
        (l, g) => (l - 1).checked_mul(g - 1),
    };
    v.ok_or(Error::Overflow("two_step_factor"))
}

fn g(r: f64) -> f64 {
    (1.0 / (r * (r + 2.0))).ln_1p()
}

/// The constant D of the almost-sure dimension bound, summed over
/// λ = 3..=terms with the double sum reduced to a single one. The tail
/// bound uses g(λ) ≤ 1/λ² and ln(λ−1) ≤ ln λ, then an integral comparison.
pub fn compute_d(terms: u64) -> Result<SeriesValue> {
    if terms < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 terms, got {terms}")));
    }
    let l43 = (4.0f64 / 3.0).ln();
    let l98 = (9.0f64 / 8.0).ln();
    let head = LN_2 * l43 * l43 + 2.0 * 3f64.ln() * l98 * l43 + 5f64.ln() * l98 * l98;
    let summand = |lam: f64| {
        let w = g(lam);
        let a = (lam.ln() + (lam - 1.0).ln()) * l43 * w;
        let b = ((2.0 * lam - 1.0).ln() + (2.0 * lam - 2.0).ln()) * l98 * w;
        let c = 2.0 * (lam - 1.0).ln() * w * l43;
        a + b + c
    };
    let tail: f64 = (3..=terms).rev().map(|l| summand(l as f64)).sum();
    let norm = 2.0 * LN_2 * LN_2;
    let n = terms as f64;
    let slope = 4.0 * l43 + 2.0 * l98;
    let bound = (slope * (n.ln() + 1.0) / n + 2.0 * LN_2 * l98 / n) / norm;
    Ok(SeriesValue { value: (head + tail) / norm, tail_bound: bound, terms })
}

/// (D − ν)/(C + ln(λ1 + 5)) with D from [`compute_d`] and C the
/// Gauss–Kuzmin mean of 3 ln(a + 2).
pub fn dim_lower_bound_as(lambda1: f64, nu: f64) -> Result<f64> {
    if !(lambda1 > 20.0) {
        return Err(Error::Hypothesis(format!("lambda1 = {lambda1} must exceed 20")));
    }
    let d = compute_d(D_DEFAULT_TERMS)?.value;
    if !(nu > 0.0 && nu < d) {
        return Err(Error::InvalidArgument(format!("nu must lie in (0, {d}), got {nu}")));
    }
    let c = khintchin_c(KHINTCHIN_TOL)?.value;
    Ok((d - nu) / (c + (lambda1 + 5.0).ln()))
}

/// ξ_c = c − 2 + √(c² − 4c + 1)
pub fn xi_c(c: f64) -> Result<f64> {
    let disc = c * c - 4.0 * c + 1.0;
    if !(disc >= 0.0) || !(c > 2.0) {
        return Err(Error::InvalidArgument(format!("xi_c undefined for c = {c}")));
    }
    Ok(c - 2.0 + disc.sqrt())
}

/// 2 ln φ / ln ξ_c with φ the golden ratio; requires the off-diagonal model
/// with c > 8.
pub fn alpha_upper_bound(p: &ModelParams) -> Result<f64> {
    if p.kind() != ModelKind::OffDiagonal {
        return Err(Error::Hypothesis("bound holds for the off-diagonal model".into()));
    }
    let c = p.coupling();
    if !(c > 8.0) {
        return Err(Error::Hypothesis(format!("coupling c = {c} must exceed 8")));
    }
    Ok(2.0 * golden_ratio().ln() / xi_c(c)?.ln())
}

/// Box-counting dimension estimates from covers at increasing levels.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDimension {
    /// Slope of ln(#bands of length ≥ ε_k) against −ln ε_k.
    pub counting: Option<f64>,
    /// Slope of ln N(ε) against −ln ε for dyadic boxes on the finest cover.
    pub dyadic: Option<f64>,
    /// (−ln ε, ln N) pairs used for the dyadic fit.
    pub dyadic_points: Vec<(f64, f64)>,
    pub dim_minus: f64,
    pub dim_plus: f64,
}

/// Number of grid boxes [origin + iε, origin + (i+1)ε) meeting the interiors
/// of the bands.
fn box_count(cover: &SpectrumCover, origin: f64, eps: f64) -> u64 {
    box_count_within(cover, origin, eps, i64::MIN, i64::MAX)
}

/// Same, restricted to box indices in [min, max].
fn box_count_within(cover: &SpectrumCover, origin: f64, eps: f64, min: i64, max: i64) -> u64 {
    let mut count = 0u64;
    let mut last: Option<i64> = None;
    for b in cover.bands() {
        let first = (((b.lo - origin) / eps).floor() as i64).max(min);
        // boxes meeting the open interval (lo, hi)
        let end = (((b.hi - origin) / eps).ceil() as i64 - 1).max(first).min(max);
        let start = match last {
            Some(l) if l >= first => l + 1,
            _ => first,
        };
        if end >= start {
            count += (end - start + 1) as u64;
        }
        last = Some(last.map_or(end, |l| l.max(end)));
    }
    count
}

const DYADIC_AGREEMENT: f64 = 0.02;
const DYADIC_MAX_HALVINGS: u32 = 40;

/// Two estimates of the box-counting dimension:
///
/// * counting: per cover, the number of bands of length at least the level
///   scale (from `scales`, else the shortest band of that cover), regressed
///   against −ln(scale);
/// * dyadic: boxes of size W·2^{−j} meeting the finest cover, over the scales
///   at which the two finest covers give counts within 2%.
///
/// `dim_minus`/`dim_plus` are the smaller/larger of the available slopes.
pub fn box_counting_estimate(covers: &[SpectrumCover], scales: Option<&[f64]>) -> Result<BoxDimension> {
    if covers.len() < 3 {
        return Err(Error::InvalidArgument(format!("need >= 3 covers, got {}", covers.len())));
    }
    if let Some(s) = scales {
        if s.len() != covers.len() {
            return Err(Error::InvalidArgument("one scale per cover is required".into()));
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, c) in covers.iter().enumerate() {
        let eps = match scales {
            Some(s) => s[i],
            None => c.bands().iter().map(|b| b.length()).fold(f64::INFINITY, f64::min),
        };
        let n = c.bands().iter().filter(|b| b.length() >= eps).count();
        if eps > 0.0 && eps.is_finite() && n > 0 {
            xs.push(-eps.ln());
            ys.push((n as f64).ln());
        }
    }
    let distinct = |v: &[f64]| {
        let mut w = v.to_vec();
        w.sort_by(f64::total_cmp);
        w.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        w.len()
    };
    let counting = if distinct(&xs) >= 3 { Some(linfit(&xs, &ys)?.slope) } else { None };

    let finest = &covers[covers.len() - 1];
    let reference = &covers[covers.len() - 2];
    let mut dyadic_points = Vec::new();
    if !finest.is_empty() {
        let origin = finest.bands()[0].lo;
        let width = finest.bands()[finest.len() - 1].hi - origin;
        let shortest = finest.bands().iter().map(|b| b.length()).fold(f64::INFINITY, f64::min);
        for j in 1..=DYADIC_MAX_HALVINGS {
            let eps = width / 2f64.powi(j as i32);
            if eps < 1e-3 * shortest {
                break;
            }
            let nf = box_count(finest, origin, eps) as f64;
            // the coarser cover sticks out past the window of the finest one
            let nr = box_count_within(reference, origin, eps, 0, (1i64 << j) - 1) as f64;
            if (nf - nr).abs() > DYADIC_AGREEMENT * nf {
                break;
            }
            dyadic_points.push((-eps.ln(), nf.ln()));
        }
    }
    let dyadic = if dyadic_points.len() >= 3 {
        let (a, b): (Vec<f64>, Vec<f64>) = dyadic_points.iter().copied().unzip();
        Some(linfit(&a, &b)?.slope)
    } else {
        None
    };
    let all: Vec<f64> = counting.iter().chain(dyadic.iter()).copied().collect();
    if all.is_empty() {
        return Err(Error::InvalidArgument("fewer than 3 usable scales".into()));
    }
    let dim_minus = all.iter().copied().fold(f64::INFINITY, f64::min);
    let dim_plus = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BoxDimension { counting, dyadic, dyadic_points, dim_minus, dim_plus })
}
