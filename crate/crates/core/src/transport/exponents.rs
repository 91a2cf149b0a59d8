//! Finite-time estimates of the transport exponents α_l^±, α_u^± and their
//! time-averaged versions.

use std::collections::BTreeMap;

use super::ProbabilityGrid;
use crate::error::{Error, Result};
use crate::numerics::linfit;

/// Thresholds of the finite-data exponent estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentConfig {
    /// A fitted decay slope below this counts as S(α) < ∞.
    pub finite_slope: f64,
    /// A fitted decay slope below this counts as S(α) = 0.
    pub zero_slope: f64,
    /// Probabilities at or below this are treated as 0 (slope = ∞).
    pub floor: f64,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        Self { finite_slope: 10.0, zero_slope: 0.1, floor: 1e-13 }
    }
}

/// Decay slopes of −ln P(t^α − 2, t) against ln t for one α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSlope {
    pub alpha: f64,
    /// fit over all times (proxy for S^+)
    pub s_plus: f64,
    /// max of that and the fit over the later half (proxy for S^−)
    pub s_minus: f64,
    pub averaged: bool,
}

/// Exponent estimates keyed by name (`alpha_u_plus`, `tilde_alpha_l_minus`, …).
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSummary {
    pub alpha_estimates: BTreeMap<String, f64>,
    pub slopes: Vec<ExponentSlope>,
    pub theoretical_bound: Option<f64>,
}

fn check_times(grid: &ProbabilityGrid) -> Result<Vec<usize>> {
    let idx: Vec<usize> = (0..grid.times.len()).filter(|&i| grid.times[i] > 1.0).collect();
    if idx.len() < 5 {
        return Err(Error::InvalidArgument(format!("need >= 5 times above 1, got {}", idx.len())));
    }
    let (lo, hi) = idx.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &i| {
        (lo.min(grid.times[i]), hi.max(grid.times[i]))
    });
    if (hi / lo).log10() < 1.5 {
        return Err(Error::InvalidArgument(format!(
            "times span {:.2} decades, 1.5 required",
            (hi / lo).log10()
        )));
    }
    Ok(idx)
}

fn slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.iter().any(|p| p.1.is_infinite()) {
        return Ok(f64::INFINITY);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    Ok(linfit(&x, &y)?.slope)
}

fn slopes_for(grid: &ProbabilityGrid, alphas: &[f64], cfg: &ExponentConfig) -> Result<Vec<ExponentSlope>> {
    let idx = check_times(grid)?;
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let points: Vec<(f64, f64)> = idx
            .iter()
            .map(|&i| {
                let t = grid.times[i];
                let radius = t.powf(alpha) - 2.0;
                let p = if radius >= grid.half as f64 { 0.0 } else { grid.outside_real(i, radius).total };
                let y = if p <= cfg.floor { f64::INFINITY } else { -p.ln() };
                (t.ln(), y)
            })
            .collect();
        let s_plus = slope(&points)?;
        let late = &points[points.len() / 2..];
        let s_late = if late.len() >= 2 { slope(late)? } else { s_plus };
        out.push(ExponentSlope { alpha, s_plus, s_minus: s_plus.max(s_late), averaged: grid.averaged });
    }
    Ok(out)
}

/// Largest α of the increasing grid such that every α' ≤ α passes; 0 if
/// the first one fails.
fn sup_where<F: Fn(&ExponentSlope) -> bool>(slopes: &[ExponentSlope], ok: F) -> f64 {
    let mut best = 0.0;
    for s in slopes {
        if !ok(s) {
            break;
        }
        best = s.alpha;
    }
    best
}

fn record(map: &mut BTreeMap<String, f64>, prefix: &str, slopes: &[ExponentSlope], cfg: &ExponentConfig) {
    map.insert(format!("{prefix}alpha_l_plus"), sup_where(slopes, |s| s.s_plus < cfg.zero_slope));
    map.insert(format!("{prefix}alpha_l_minus"), sup_where(slopes, |s| s.s_minus < cfg.zero_slope));
    map.insert(format!("{prefix}alpha_u_plus"), sup_where(slopes, |s| s.s_plus < cfg.finite_slope));
    map.insert(format!("{prefix}alpha_u_minus"), sup_where(slopes, |s| s.s_minus < cfg.finite_slope));
}

/// Exponent estimates from a plain grid and/or an averaged grid (tilded
/// names). `alphas` must be increasing and nonnegative.
pub fn fit_exponents(
    plain: Option<&ProbabilityGrid>,
    averaged: Option<&ProbabilityGrid>,
    alphas: &[f64],
    cfg: &ExponentConfig,
    theoretical_bound: Option<f64>,
) -> Result<TransportSummary> {
    if alphas.is_empty() || alphas[0] < 0.0 || alphas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("alphas must be nonnegative and increasing".into()));
    }
    if plain.is_none() && averaged.is_none() {
        return Err(Error::InvalidArgument("no probability data".into()));
    }
    let mut alpha_estimates = BTreeMap::new();
    let mut slopes = Vec::new();
    if let Some(g) = plain {
        if g.averaged {
            return Err(Error::InvalidArgument("plain grid is marked averaged".into()));
        }
        let s = slopes_for(g, alphas, cfg)?;
        record(&mut alpha_estimates, "", &s, cfg);
        slopes.extend(s);
    }
    if let Some(g) = averaged {
        if !g.averaged {
            return Err(Error::InvalidArgument("averaged grid is not marked averaged".into()));
        }
        let s = slopes_for(g, alphas, cfg)?;
        record(&mut alpha_estimates, "tilde_", &s, cfg);
        slopes.extend(s);
    }
    Ok(TransportSummary { alpha_estimates, slopes, theoretical_bound })
}
