use crate::cf::ContinuedFraction;
use crate::error::Result;

/// G_{−1}, G_0, ..., G_k with G_k = G_{k−1} + a_k G_{k−2}.
///
/// Values are exact while they fit in a `u128`; after that only the natural
/// logarithms are kept and `overflow_at` records the first inexact index.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFloor {
    exact: Vec<u128>,
    ln_values: Vec<f64>,
    pub overflow_at: Option<usize>,
}

impl GrowthFloor {
    /// Exact G_k when representable.
    pub fn get(&self, k: i64) -> Option<u128> {
        self.exact.get((k + 1) as usize).copied()
    }

    /// ln G_k
    pub fn ln(&self, k: i64) -> f64 {
        self.ln_values[(k + 1) as usize]
    }

    /// Largest index held.
    pub fn order(&self) -> usize {
        self.ln_values.len() - 2
    }

    pub fn exact_values(&self) -> &[u128] {
        &self.exact
    }
}

/// G computed with the quotients a_{offset+1}, a_{offset+2}, ... so that it
/// can be restarted at an escape level.
pub fn growth_floor_from(cf: &ContinuedFraction, offset: usize, k: usize) -> Result<GrowthFloor> {
    let mut exact = vec![1u128, 1];
    let mut ln_values = vec![0.0, 0.0];
    let mut overflow_at = None;
    for j in 1..=k {
        let a = cf.require(offset + j)?;
        let (g1, g2) = (ln_values[j], ln_values[j - 1]);
        // ln(G_{j−1} + a G_{j−2}) = g1 + ln(1 + a e^{g2 − g1})
        ln_values.push(g1 + ((a as f64).ln() + g2 - g1).exp().ln_1p());
        if overflow_at.is_none() {
            let next = (a as u128)
                .checked_mul(exact[j - 1])
                .and_then(|v| v.checked_add(exact[j]));
            match next {
                Some(v) => exact.push(v),
                None => overflow_at = Some(j),
            }
        }
    }
    Ok(GrowthFloor { exact, ln_values, overflow_at })
}

pub fn growth_floor(cf: &ContinuedFraction, k: usize) -> Result<GrowthFloor> {
    growth_floor_from(cf, 0, k)
}
