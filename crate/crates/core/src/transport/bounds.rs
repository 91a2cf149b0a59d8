//! Transfer-matrix upper bounds on outside probabilities and the site scale
//! N(T) of the sub-ballistic estimate.

use num_complex::Complex64;

use crate::cf::{convergents, ContinuedFraction, SturmianWord};
use crate::error::{Error, Result};
use crate::numerics::{logmat_mul, quadrature, LogMatrix2};
use crate::spectrum::xi_c;
use crate::tracemap::{one_step, ModelKind, ModelParams};

/// Right-hand side of the outside-probability bound, prefactors set to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferBound {
    /// e^{−N} + T^p (I_right + I_left); only meaningful up to constants.
    pub value: f64,
    /// ∫_{−K}^{K} (max_{1≤n≤N} ‖F(n, E + i/T)‖²)^{−1} dE to the right of site 1
    pub right_integral: f64,
    /// same for the mirror-image half line
    pub left_integral: f64,
    /// p = 3 for the averaged bound, 4 for the plain one
    pub power: i32,
    /// the bound exceeds 1 and says nothing
    pub non_informative: bool,
}

const BOUND_TOL: f64 = 1e-6;

/// ln max_{1≤n≤N} ‖T_n ⋯ T_1‖ for the given step letters.
fn ln_max_norm(p: &ModelParams, e: Complex64, letters: &[u8]) -> f64 {
    let mut f = LogMatrix2::identity();
    let mut best = 0.0f64;
    for &v in letters {
        f = logmat_mul(&one_step(p, e, v), &f);
        best = best.max(f.ln_norm());
    }
    best
}

/// e^{−N} + T^p ∫_{−K}^{K} (max_{1≤n≤N} ‖F(n, E+i/T)‖²)^{−1} dE, summed over
/// both half lines; p = 3 if `averaged` else 4.
///
/// The left half line is handled by reflecting the chain about site 1.
pub fn transfer_bound_rhs(
    p: &ModelParams,
    cf: &ContinuedFraction,
    n: usize,
    t: f64,
    averaged: bool,
) -> Result<TransferBound> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("T must exceed 1, got {t}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    let word = SturmianWord::new(cf, n as i64 + 2)?;
    let right: Vec<u8> = (1..=n as i64).map(|j| word.letter(j)).collect();
    // reflection n ↦ 2 − n: the potential at site j comes from site 2 − j,
    // the bond (j, j+1) from bond (1 − j, 2 − j)
    let left: Vec<u8> = (1..=n as i64)
        .map(|j| match p.kind() {
            ModelKind::Diagonal => word.letter(2 - j),
            ModelKind::OffDiagonal => word.letter(1 - j),
        })
        .collect();
    let k = p.spectral_bound();
    let eps = 1.0 / t;
    let integral = |letters: &[u8]| -> Result<f64> {
        let f = |e: f64| (-2.0 * ln_max_norm(p, Complex64::new(e, eps), letters)).exp();
        Ok(quadrature(f, -k, k, BOUND_TOL)?.value)
    };
    let right_integral = integral(&right)?;
    let left_integral = integral(&left)?;
    let power = if averaged { 3 } else { 4 };
    let value = (-(n as f64)).exp() + t.powi(power) * (right_integral + left_integral);
    Ok(TransferBound { value, right_integral, left_integral, power, non_informative: value >= 1.0 })
}

/// γ(c) = ln ξ_c / (2 ln φ); off-diagonal with c > 8.
fn gamma(p: &ModelParams) -> Result<f64> {
    if p.kind() != ModelKind::OffDiagonal {
        return Err(Error::Hypothesis("the site scale is defined for the off-diagonal model".into()));
    }
    let c = p.coupling();
    if !(c > 8.0) {
        return Err(Error::Hypothesis(format!("coupling c = {c} must exceed 8")));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    Ok(xi_c(c)?.ln() / (2.0 * phi.ln()))
}

/// k(T): the least k ≥ 1 with T ≤ F_k^γ, where F_k = q_k (so F_{k−1}^γ < T).
pub fn k_of_t(cf: &ContinuedFraction, p: &ModelParams, t: f64) -> Result<usize> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("T must exceed 1, got {t}")));
    }
    let g = gamma(p)?;
    let target = t.ln() / g;
    let mut k = 1usize;
    loop {
        let q = convergents(cf, k)?.q(k as i64) as f64;
        if q.ln() >= target {
            return Ok(k);
        }
        k += 1;
    }
}

/// N(T) = F_{k(T) + ⌊√k(T)⌋}.
pub fn scale_n_of_t(cf: &ContinuedFraction, p: &ModelParams, t: f64) -> Result<u128> {
    let k = k_of_t(cf, p, t)?;
    let idx = k + (k as f64).sqrt().floor() as usize;
    Ok(convergents(cf, idx)?.q(idx as i64))
}
