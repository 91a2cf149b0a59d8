//! Periodic-approximant bands, their labelling, counting recursions,
//! band-length bounds and fractal-dimension formulas.

mod counting;
mod dimension;
mod enumerate;
mod search;

pub use counting::{
    band_count_sequence, band_counts, band_length_bounds, epsilon_scale, ln_epsilon_scale,
    BandCounts,
};
pub use dimension::{
    alpha_upper_bound, box_counting_estimate, compute_d, dim_lower_bound, dim_lower_bound_as,
    two_step_factor, xi_c, BoxDimension, D_DEFAULT_TERMS,
};
pub use enumerate::{
    band_hierarchy, derivative_ratio, enumerate_bands, scan_bands, BandHierarchy,
    EnumerationMode, DEFAULT_BAND_TOL,
};
pub use search::{find_bands, SEARCH_MAX_POINTS, SEARCH_MIN_POINTS};

use std::fmt;

use num_complex::Complex64;

use crate::cf::ContinuedFraction;
use crate::error::{Error, Result};
use crate::numerics::LogMatrix2;
use crate::tracemap::{chebyshev_s, trace_sequence, transfer_matrix, ModelParams};

/// Band labels: A/B for the Fibonacci taxonomy, I/II/III for the general one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BandLabel {
    A,
    B,
    I,
    II,
    III,
}

impl fmt::Display for BandLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BandLabel::A => "A",
            BandLabel::B => "B",
            BandLabel::I => "I",
            BandLabel::II => "II",
            BandLabel::III => "III",
        };
        f.write_str(s)
    }
}

/// Index word i_0 i_1 … i_k of a band: its type at each level of ancestry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexWord(pub Vec<BandLabel>);

impl IndexWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[BandLabel] {
        &self.0
    }

    fn child(&self, l: BandLabel) -> Self {
        let mut v = self.0.clone();
        v.push(l);
        IndexWord(v)
    }
}

impl fmt::Display for IndexWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// The trace function whose sublevel set {|·| ≤ 2} defines a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BandTrace {
    /// x_j = Tr M_j
    X(usize),
    /// z_j = Tr M_{j−1} M_j
    Z(usize),
}

impl BandTrace {
    /// Value of the trace function at real E (infinite past the overflow guard).
    pub fn eval(&self, p: &ModelParams, cf: &ContinuedFraction, e: f64) -> Result<f64> {
        let (j, use_z) = match *self {
            BandTrace::X(j) => (j, false),
            BandTrace::Z(j) => (j, true),
        };
        let o = trace_sequence(p, cf, Complex64::new(e, 0.0), j, 0.0)?;
        let v = if use_z { o.z(j as i64) } else { o.x(j as i64) };
        Ok(v.map_or(f64::INFINITY, |v| v.re))
    }
}

/// Connected component of a periodic-approximant set on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub level: usize,
    pub label: Option<BandLabel>,
    /// Ancestry word (general taxonomy only).
    pub tau: Option<IndexWord>,
    pub trace: BandTrace,
}

impl Band {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, other: &Band) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// Ordered, pairwise disjoint bands of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCover {
    pub level: usize,
    bands: Vec<Band>,
    total_measure: f64,
}

impl SpectrumCover {
    /// Sorts the bands and checks that they are disjoint.
    pub fn new(level: usize, mut bands: Vec<Band>) -> Result<Self> {
        for b in &bands {
            if !(b.lo < b.hi) || !b.lo.is_finite() || !b.hi.is_finite() {
                return Err(Error::InvalidArgument(format!("degenerate band [{}, {}]", b.lo, b.hi)));
            }
        }
        bands.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in bands.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::InvalidArgument(format!(
                    "bands [{}, {}] and [{}, {}] overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        let total_measure = bands.iter().map(Band::length).sum();
        Ok(Self { level, bands, total_measure })
    }

    /// Cover made of plain intervals (synthetic data, tests).
    pub fn from_intervals(level: usize, intervals: &[(f64, f64)]) -> Result<Self> {
        let bands = intervals
            .iter()
            .map(|&(lo, hi)| Band { lo, hi, level, label: None, tau: None, trace: BandTrace::X(level) })
            .collect();
        Self::new(level, bands)
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    /// Measure of the bands satisfying `keep`.
    pub fn measure_where<F: Fn(&Band) -> bool>(&self, keep: F) -> f64 {
        self.bands.iter().filter(|b| keep(b)).map(Band::length).sum()
    }
}

/// h_{n,m}(E) = Tr(M_{n−1} M_n^m) for m ∈ {−1, 0, 1}, from the trace orbit
/// via Tr(A B^m) = Tr(AB)·S_{m−1}(Tr B) − Tr(A)·S_{m−2}(Tr B).
///
/// Debug builds recompute it from explicit log-scaled matrix products and
/// assert agreement.
pub fn approximant_trace(
    p: &ModelParams,
    cf: &ContinuedFraction,
    e: Complex64,
    n: usize,
    m: i64,
) -> Result<Complex64> {
    if !(-1..=1).contains(&m) {
        return Err(Error::InvalidArgument(format!("approximant exponent {m} not in {{-1, 0, 1}}")));
    }
    let o = trace_sequence(p, cf, e, n, 0.0)?;
    let k = n as i64;
    let (x, xm, z) = match (o.x(k), o.x(k - 1), o.z(k)) {
        (Some(x), Some(xm), Some(z)) => (x, xm, z),
        _ => return Err(Error::Overflow("trace orbit")),
    };
    let h = z * chebyshev_s(m - 1, x) - xm * chebyshev_s(m - 2, x);
    #[cfg(debug_assertions)]
    {
        let (direct, scale) = approximant_trace_direct(p, cf, e, n, m)?;
        let tol = 1e-8 * scale.max(1.0);
        debug_assert!((direct - h).norm() <= tol, "h_{{{n},{m}}}: {h} vs {direct}");
    }
    Ok(h)
}

/// Tr(M_{n−1} M_n^m) by explicit products, with a magnitude scale for
/// rounding: ‖M_{n−1}‖·‖M_n‖^{|m|}.
pub fn approximant_trace_direct(
    p: &ModelParams,
    cf: &ContinuedFraction,
    e: Complex64,
    n: usize,
    m: i64,
) -> Result<(Complex64, f64)> {
    let a = transfer_matrix(p, cf, e, n as i64 - 1)?;
    let b = transfer_matrix(p, cf, e, n as i64)?;
    let bm = match m {
        1 => b,
        0 => LogMatrix2::identity(),
        -1 => b.adjugate(),
        _ => return Err(Error::InvalidArgument(format!("exponent {m}"))),
    };
    let prod = a * bm;
    let ln_scale = a.ln_norm() + (m.unsigned_abs() as f64) * b.ln_norm();
    if prod.logscale() > 700.0 || ln_scale > 700.0 {
        return Err(Error::Overflow("approximant product"));
    }
    Ok((prod.trace(), ln_scale.exp()))
}
