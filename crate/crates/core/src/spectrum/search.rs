//! Locating the components of {E : |f(E)| ≤ 2} inside an interval.

use crate::error::Result;

pub const SEARCH_MIN_POINTS: usize = 64;
pub const SEARCH_MAX_POINTS: usize = 1 << 17;

fn inside(v: f64) -> bool {
    v.abs() <= 2.0
}

/// Bisects for the point where |f| crosses 2 between `a` (inside) and `b`
/// (outside), to absolute width `tol`. Returns the point on the inside.
fn crossing<F: FnMut(f64) -> Result<f64>>(f: &mut F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if inside(f(m)?) {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(a)
}

/// Components of {|f| ≤ 2} ∩ [lo, hi], sampled on a uniform grid that
/// doubles from [`SEARCH_MIN_POINTS`] until at least `want` components are
/// seen (or [`SEARCH_MAX_POINTS`] is reached). Endpoints are bisected to
/// `tol`. With `want = None` the grid doubles until the count is unchanged
/// by two successive refinements. Refinement also continues while f changes
/// sign between two adjacent outside samples, which signals an unresolved
/// band.
///
/// The count returned may be smaller than `want`; the caller decides what a
/// mismatch means.
pub fn find_bands<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    lo: f64,
    hi: f64,
    want: Option<usize>,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut n = SEARCH_MIN_POINTS;
    let mut history: Vec<usize> = Vec::new();
    let (runs, xs) = loop {
        let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let mut vals = Vec::with_capacity(xs.len());
        for &x in &xs {
            vals.push(f(x)?);
        }
        let flags: Vec<bool> = vals.iter().map(|&v| inside(v)).collect();
        // a sign change between two outside samples hides a band between them
        let hidden = vals
            .windows(2)
            .filter(|w| !inside(w[0]) && !inside(w[1]) && w[0].is_finite() && w[1].is_finite())
            .filter(|w| w[0].signum() != w[1].signum())
            .count();
        let mut runs = Vec::new();
        let mut i = 0;
        while i < flags.len() {
            if flags[i] {
                let s = i;
                while i + 1 < flags.len() && flags[i + 1] {
                    i += 1;
                }
                runs.push((s, i));
            }
            i += 1;
        }
        history.push(runs.len());
        let done = hidden == 0
            && match want {
            Some(w) => runs.len() >= w,
            None => {
                let h = history.len();
                h >= 3 && history[h - 1] == history[h - 2] && history[h - 2] == history[h - 3]
            }
        };
        if done || n >= SEARCH_MAX_POINTS {
            break (runs, xs);
        }
        n *= 2;
    };
    let mut out = Vec::with_capacity(runs.len());
    for (s, e) in runs {
        let a = if s == 0 { lo } else { crossing(&mut f, xs[s], xs[s - 1], tol)? };
        let b = if e + 1 == xs.len() { hi } else { crossing(&mut f, xs[e], xs[e + 1], tol)? };
        out.push((a, b));
    }
    Ok(out)
}
