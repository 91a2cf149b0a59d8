//! Band-count recursion, counting scale ε_k and band-length bounds.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::{BandLabel, IndexWord};
use crate::cf::ContinuedFraction;
use crate::error::{Error, Result};

/// Numbers of type I, II and III bands at one level (exact integers).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandCounts {
    pub level: usize,
    pub n_i: BigUint,
    pub n_ii: BigUint,
    pub n_iii: BigUint,
}

fn ln_big(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 900 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (n >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

impl BandCounts {
    /// n_k = n_{k,II} + n_{k,III}
    pub fn n(&self) -> BigUint {
        &self.n_ii + &self.n_iii
    }

    /// ln n_k, valid far beyond f64 range.
    pub fn ln_n(&self) -> f64 {
        ln_big(&self.n())
    }

    /// n_I ≥ 1, n_II + n_III ≥ 1 and n_I > n_III.
    pub fn side_conditions_hold(&self) -> bool {
        !self.n_i.is_zero() && !self.n().is_zero() && self.n_i > self.n_iii
    }
}

/// Counts at levels 0..=k from (1, 0, 1) by
/// n_{k+1,I} = (a+1) n_{k,II} + a n_{k,III},
/// n_{k+1,II} = 1_{a ≤ 2} n_{k,I},
/// n_{k+1,III} = a n_{k,II} + (a−1) n_{k,III},   with a = a_{k+1}.
pub fn band_count_sequence(cf: &ContinuedFraction, k: usize) -> Result<Vec<BandCounts>> {
    let qs = cf.quotients(k)?;
    let mut out = Vec::with_capacity(k + 1);
    out.push(BandCounts { level: 0, n_i: BigUint::one(), n_ii: BigUint::zero(), n_iii: BigUint::one() });
    for (j, &a) in qs.iter().enumerate() {
        let prev = &out[j];
        let a_big = BigUint::from(a);
        let n_i = (&a_big + 1u32) * &prev.n_ii + &a_big * &prev.n_iii;
        let n_ii = if a <= 2 { prev.n_i.clone() } else { BigUint::zero() };
        let n_iii = &a_big * &prev.n_ii + (&a_big - 1u32) * &prev.n_iii;
        out.push(BandCounts { level: j + 1, n_i, n_ii, n_iii });
    }
    Ok(out)
}

/// Counts at level k.
pub fn band_counts(cf: &ContinuedFraction, k: usize) -> Result<BandCounts> {
    let mut v = band_count_sequence(cf, k)?;
    Ok(v.pop().expect("level 0 is always present"))
}

fn require_strong(lambda1: f64) -> Result<()> {
    if lambda1 > 20.0 {
        Ok(())
    } else {
        Err(Error::Hypothesis(format!("lambda1 = {lambda1} must exceed 20")))
    }
}

/// ln ε_k, ε_k = 4 Π_{j ≤ k} (λ1+5)^{−1} (a_j+2)^{−3}.
pub fn ln_epsilon_scale(cf: &ContinuedFraction, k: usize, lambda1: f64) -> Result<f64> {
    require_strong(lambda1)?;
    let qs = cf.quotients(k)?;
    let l = (lambda1 + 5.0).ln();
    Ok(4f64.ln() - qs.iter().map(|&a| l + 3.0 * (a as f64 + 2.0).ln()).sum::<f64>())
}

/// ε_k (may underflow to 0 for very large k; use [`ln_epsilon_scale`]).
pub fn epsilon_scale(cf: &ContinuedFraction, k: usize, lambda1: f64) -> Result<f64> {
    Ok(ln_epsilon_scale(cf, k, lambda1)?.exp())
}

fn type_index(l: BandLabel) -> Result<usize> {
    match l {
        BandLabel::I => Ok(0),
        BandLabel::II => Ok(1),
        BandLabel::III => Ok(2),
        other => Err(Error::InvalidArgument(format!("label {other} is not in the I/II/III alphabet"))),
    }
}

/// ln of the transition factor t_{from,to}(n) for the upper (P) or lower
/// (Q) matrix; `None` for a forbidden transition.
fn ln_factor(from: usize, to: usize, a: u64, lambda1: f64, upper: bool) -> Option<f64> {
    let a_f = a as f64;
    let (ln_c, ln_branch) = if upper {
        let c1 = 3.0 / (lambda1 - 8.0);
        (c1.ln(), c1.ln() - a_f.ln())
    } else {
        let c2 = 1.0 / (lambda1 + 5.0);
        (c2.ln(), c2.ln() - 3.0 * (a_f + 2.0).ln())
    };
    match (from, to) {
        (0, 1) => Some((a_f - 1.0) * ln_c),
        (1, 0) | (1, 2) | (2, 0) | (2, 2) => Some(ln_branch),
        _ => None,
    }
}

/// (4 L_τ(Q), 4 L_τ(P)) for an index word τ = i_0 … i_k.
pub fn band_length_bounds(tau: &IndexWord, cf: &ContinuedFraction, lambda1: f64) -> Result<(f64, f64)> {
    require_strong(lambda1)?;
    let letters = tau.letters();
    let Some(&first) = letters.first() else {
        return Err(Error::InvalidArgument("empty index word".into()));
    };
    if first == BandLabel::II {
        return Err(Error::InvalidArgument("level 0 has no type II band".into()));
    }
    type_index(first)?;
    let (mut lo, mut hi) = (4f64.ln(), 4f64.ln());
    for (n, w) in letters.windows(2).enumerate() {
        let (i, j) = (type_index(w[0])?, type_index(w[1])?);
        let a = cf.require(n + 1)?;
        match (ln_factor(i, j, a, lambda1, false), ln_factor(i, j, a, lambda1, true)) {
            (Some(q), Some(p)) => {
                lo += q;
                hi += p;
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "transition {} -> {} at level {} is not allowed",
                    w[0],
                    w[1],
                    n + 1
                )))
            }
        }
    }
    Ok((lo.exp(), hi.exp()))
}
