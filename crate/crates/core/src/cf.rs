//! Continued fractions of β ∈ (0,1), Sturmian letters and Gauss–Kuzmin
//! statistics.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Quotients beyond this are folded back by renormalizing the sampled law.
pub const GK_CUTOFF: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfKind {
    Explicit,
    Golden,
    Silver,
    Random { seed: u64 },
}

/// β = [0; a_1, a_2, ...], either a finite explicit prefix or a generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    kind: CfKind,
    prefix: Vec<u64>,
}

impl ContinuedFraction {
    pub fn golden() -> Self {
        Self { kind: CfKind::Golden, prefix: Vec::new() }
    }

    pub fn silver() -> Self {
        Self { kind: CfKind::Silver, prefix: Vec::new() }
    }

    pub fn explicit(quotients: Vec<u64>) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::InvalidArgument("empty quotient list".into()));
        }
        if let Some(i) = quotients.iter().position(|&a| a == 0) {
            return Err(Error::InvalidArgument(format!("quotient a_{} is zero", i + 1)));
        }
        Ok(Self { kind: CfKind::Explicit, prefix: quotients })
    }

    /// Random β whose first `k` quotients are materialized. Later quotients
    /// are still available on demand and agree with a longer sample.
    pub fn random(seed: u64, k: usize) -> Self {
        Self { kind: CfKind::Random { seed }, prefix: sample_stream(seed, k) }
    }

    pub fn kind(&self) -> CfKind {
        self.kind
    }

    /// Number of materialized quotients.
    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    /// Whether arbitrarily many quotients are available.
    pub fn is_unbounded(&self) -> bool {
        !matches!(self.kind, CfKind::Explicit)
    }

    /// a_j for j ≥ 1.
    pub fn quotient(&self, j: usize) -> Option<u64> {
        if j == 0 {
            return None;
        }
        if let Some(&a) = self.prefix.get(j - 1) {
            return Some(a);
        }
        match self.kind {
            CfKind::Explicit => None,
            CfKind::Golden => Some(1),
            CfKind::Silver => Some(2),
            CfKind::Random { seed } => Some(gk_quotient_at(seed, j)),
        }
    }

    /// a_j, or an error naming how many quotients were needed.
    pub fn require(&self, j: usize) -> Result<u64> {
        self.quotient(j).ok_or(Error::InsufficientQuotients {
            required: j,
            available: self.prefix.len(),
        })
    }

    /// a_1 ..= a_k
    pub fn quotients(&self, k: usize) -> Result<Vec<u64>> {
        if k <= self.prefix.len() {
            return Ok(self.prefix[..k].to_vec());
        }
        match self.kind {
            CfKind::Explicit => Err(Error::InsufficientQuotients {
                required: k,
                available: self.prefix.len(),
            }),
            CfKind::Golden => Ok(vec![1; k]),
            CfKind::Silver => Ok(vec![2; k]),
            CfKind::Random { seed } => Ok(sample_stream(seed, k)),
        }
    }
}

impl FromStr for ContinuedFraction {
    type Err = Error;

    /// Accepts `golden`, `silver`, `random:SEED` or `1,2,1,1,4`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "golden" => return Ok(Self::golden()),
            "silver" => return Ok(Self::silver()),
            _ => {}
        }
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidArgument(format!("bad seed {seed:?}: {e}")))?;
            return Ok(Self { kind: CfKind::Random { seed }, prefix: Vec::new() });
        }
        let qs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad quotient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::explicit(qs)
    }
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CfKind::Golden => write!(f, "golden"),
            CfKind::Silver => write!(f, "silver"),
            CfKind::Random { seed } => write!(f, "random:{seed}"),
            CfKind::Explicit => {
                let parts: Vec<String> = self.prefix.iter().map(u64::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

fn gk_cdf(r: u64) -> f64 {
    // Σ_{s ≤ r} d(s) telescopes to 1 − log2((r+2)/(r+1))
    1.0 - (1.0 / (r as f64 + 1.0)).ln_1p() / std::f64::consts::LN_2
}

/// Smallest r ≥ 1 with CDF(r) ≥ u, on the law truncated at [`GK_CUTOFF`].
fn gk_inverse(u: f64) -> u64 {
    let u = u * gk_cdf(GK_CUTOFF);
    let denom = ((1.0 - u) * std::f64::consts::LN_2).exp_m1();
    let guess = if denom > 0.0 { (1.0 / denom - 1.0).ceil() } else { GK_CUTOFF as f64 };
    let mut r = guess.clamp(1.0, GK_CUTOFF as f64) as u64;
    while r > 1 && gk_cdf(r - 1) >= u {
        r -= 1;
    }
    while r < GK_CUTOFF && gk_cdf(r) < u {
        r += 1;
    }
    r
}

fn sample_stream(seed: u64, k: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| gk_inverse(rng.random::<f64>())).collect()
}

/// The j-th (1-based) quotient of `random:seed`, without generating the
/// earlier ones. Each draw consumes two 32-bit words of the stream.
fn gk_quotient_at(seed: u64, j: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * (j as u128 - 1));
    gk_inverse(rng.random::<f64>())
}

/// Samples `k` i.i.d. Gauss–Kuzmin quotients.
pub fn sample_quotients(seed: u64, k: usize) -> ContinuedFraction {
    ContinuedFraction::random(seed, k)
}

/// Convergents p_j/q_j for j = −1..=k with p_{−1} = 1, p_0 = 0, q_{−1} = 0,
/// q_0 = 1, so that p_j/q_j → β.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentTable {
    p: Vec<u128>,
    q: Vec<u128>,
}

impl ConvergentTable {
    /// Largest index held.
    pub fn order(&self) -> usize {
        self.q.len() - 2
    }

    /// p_j for j ≥ −1.
    pub fn p(&self, j: i64) -> u128 {
        self.p[(j + 1) as usize]
    }

    /// q_j for j ≥ −1.
    pub fn q(&self, j: i64) -> u128 {
        self.q[(j + 1) as usize]
    }

    /// p_0, p_1, ..., p_k. With p_{−1} = 1, p_0 = 0 this is the sequence the
    /// recursion produces from the seeds (1, 0); for the golden mean it is the
    /// Fibonacci numbers 0, 1, 1, 2, 3, ...
    pub fn numerators(&self) -> &[u128] {
        &self.p[1..]
    }

    /// q_0, q_1, ..., q_k.
    pub fn denominators(&self) -> &[u128] {
        &self.q[1..]
    }
}

pub fn convergents(cf: &ContinuedFraction, k: usize) -> Result<ConvergentTable> {
    let mut p = Vec::with_capacity(k + 2);
    let mut q = Vec::with_capacity(k + 2);
    p.extend([1u128, 0]);
    q.extend([0u128, 1]);
    for j in 1..=k {
        let a = cf.require(j)? as u128;
        let next = |v: &Vec<u128>| -> Result<u128> {
            a.checked_mul(v[j])
                .and_then(|x| x.checked_add(v[j - 1]))
                .ok_or(Error::Overflow("convergents"))
        };
        let pn = next(&p)?;
        let qn = next(&q)?;
        p.push(pn);
        q.push(qn);
    }
    Ok(ConvergentTable { p, q })
}

/// Exact evaluation of ⌊nβ⌋ and Sturmian letters for |n| up to a bound.
#[derive(Debug, Clone)]
pub struct SturmianWord {
    /// index m of the convergent used
    m: usize,
    p: i128,
    q: i128,
    max_abs: i64,
}

impl SturmianWord {
    /// Prepares exact letters for all n with |n| ≤ `max_abs`.
    ///
    /// With |n| < q_{m+1} the value n·p_m/q_m lies within 1/q_m of nβ, which
    /// never crosses an integer except when q_m divides n; in that case the
    /// side is fixed by the sign of β − p_m/q_m, which is (−1)^m.
    pub fn new(cf: &ContinuedFraction, max_abs: i64) -> Result<Self> {
        let need = max_abs.unsigned_abs() as u128 + 1;
        let mut p = (1u128, 0u128);
        let mut q = (0u128, 1u128);
        let mut m = 0usize;
        loop {
            let a = cf.require(m + 1)? as u128;
            let q_next = a
                .checked_mul(q.1)
                .and_then(|x| x.checked_add(q.0))
                .ok_or(Error::Overflow("sturmian convergent"))?;
            if q_next > need {
                break;
            }
            let p_next = a * p.1 + p.0;
            p = (p.1, p_next);
            q = (q.1, q_next);
            m += 1;
        }
        Ok(Self { m, p: p.1 as i128, q: q.1 as i128, max_abs })
    }

    pub fn max_abs(&self) -> i64 {
        self.max_abs
    }

    /// ⌊nβ⌋ for |n| ≤ max_abs + 1.
    pub fn floor_beta(&self, n: i64) -> i64 {
        debug_assert!(n.unsigned_abs() <= self.max_abs.unsigned_abs() + 1);
        let t = n as i128 * self.p;
        let fl = t.div_euclid(self.q);
        let exact = t.rem_euclid(self.q) == 0;
        let beta_above = self.m % 2 == 0;
        let fl = if exact && n != 0 && ((n > 0) != beta_above) { fl - 1 } else { fl };
        fl as i64
    }

    /// ⌊(n+1)β⌋ − ⌊nβ⌋ for |n| ≤ max_abs.
    pub fn letter(&self, n: i64) -> u8 {
        (self.floor_beta(n + 1) - self.floor_beta(n)) as u8
    }
}

/// ⌊(n+1)β⌋ − ⌊nβ⌋, computed exactly.
pub fn sturmian_letter(cf: &ContinuedFraction, n: i64) -> Result<u8> {
    if n.unsigned_abs() > 1_000_000_000 {
        return Err(Error::InvalidArgument(format!("|n| = {} exceeds 1e9", n.unsigned_abs())));
    }
    Ok(SturmianWord::new(cf, n.abs())?.letter(n))
}

/// d(r) = ln(1 + 1/(r(r+2)))/ln 2.
pub fn gauss_kuzmin_density(r: u64) -> Result<f64> {
    if r == 0 {
        return Err(Error::InvalidArgument("density is defined for r >= 1".into()));
    }
    Ok(gk_log_weight(r) / std::f64::consts::LN_2)
}

/// ln(1 + 1/(r(r+2))), the unnormalized Gauss–Kuzmin weight.
pub(crate) fn gk_log_weight(r: u64) -> f64 {
    let r = r as f64;
    (1.0 / (r * (r + 2.0))).ln_1p()
}

/// Probability that a pair of consecutive quotients equals (λ, γ).
pub fn pair_probability(lambda: u64, gamma: u64) -> Result<f64> {
    Ok(gauss_kuzmin_density(lambda)? * gauss_kuzmin_density(gamma)?)
}

/// (1/k) Σ_{j ≤ k} f(a_j)
pub fn birkhoff_average<F: Fn(u64) -> f64>(cf: &ContinuedFraction, f: F, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("birkhoff average over zero terms".into()));
    }
    let qs = cf.quotients(k)?;
    let mut sum = 0.0;
    for (i, a) in qs.iter().enumerate() {
        let v = f(*a);
        if !v.is_finite() {
            return Err(Error::NonFinite { what: "observable", index: i + 1 });
        }
        sum += v;
    }
    Ok(sum / k as f64)
}

/// A truncated positive series: the exact value lies in
/// `[value, value + tail_bound]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: u64,
}

/// Upper bound on (3/ln 2) Σ_{r > n} ln(r+2)/r². Uses ln(x+2) ≤ ln x + 2/x
/// and an integral comparison.
fn khintchin_tail(n: u64) -> f64 {
    let n = n as f64;
    3.0 / std::f64::consts::LN_2 * ((n.ln() + 1.0) / n + 1.0 / (n * n))
}

/// 3·Σ_r ln(r+2)·d(r), summed until the analytic tail bound is below `tol`.
pub fn khintchin_c(tol: f64) -> Result<SeriesValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut n = 16u64;
    while khintchin_tail(n) > tol {
        n *= 2;
        if n > 1 << 40 {
            return Err(Error::InvalidArgument(format!("tolerance {tol} is too small")));
        }
    }
    Ok(SeriesValue { value: khintchin_partial(n), tail_bound: khintchin_tail(n), terms: n })
}

/// 3·Σ_{r ≤ n} ln(r+2)·d(r)
pub fn khintchin_partial(n: u64) -> f64 {
    // small terms first for accuracy
    let s: f64 = (1..=n).rev().map(|r| ((r + 2) as f64).ln() * gk_log_weight(r)).sum();
    3.0 * s / std::f64::consts::LN_2
}

/// Counts of consecutive quotient pairs (a_{2j}, a_{2j+1}) = (λ, γ) for
/// λ, γ ≤ `max`, over j = 1..=pairs. Entry `[λ-1][γ-1]`.
pub fn pair_counts(cf: &ContinuedFraction, pairs: usize, max: u64) -> Result<Vec<Vec<u64>>> {
    let qs = cf.quotients(2 * pairs + 1)?;
    let m = max as usize;
    let mut t = vec![vec![0u64; m]; m];
    for j in 1..=pairs {
        let (a, b) = (qs[2 * j - 1], qs[2 * j]);
        if a <= max && b <= max {
            t[a as usize - 1][b as usize - 1] += 1;
        }
    }
    Ok(t)
}
