//! Hierarchical band enumeration guided by the nesting taxonomies.

use super::search::find_bands;
use super::{Band, BandLabel, BandTrace, IndexWord, SpectrumCover};
use crate::cf::ContinuedFraction;
use crate::error::{Error, Result};
use crate::tracemap::{ModelKind, ModelParams};

/// Absolute endpoint tolerance in E.
pub const DEFAULT_BAND_TOL: f64 = 1e-12;

/// How a hierarchy was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationMode {
    /// Golden-mean off-diagonal model, c > 4: bands of x_k labelled A/B.
    Fibonacci,
    /// Diagonal model, λ1 > 20: generating bands labelled I/II/III.
    General,
    /// Unlabelled scan of {|x_k| ≤ 2} over the whole spectral range.
    GridScan,
}

/// Covers for levels 0..=max_level, each checked against its parents.
#[derive(Debug, Clone)]
pub struct BandHierarchy {
    pub mode: EnumerationMode,
    levels: Vec<SpectrumCover>,
    /// Parents whose children have been counted, per level.
    parents_checked: Vec<usize>,
}

impl BandHierarchy {
    pub fn levels(&self) -> &[SpectrumCover] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> Option<&SpectrumCover> {
        self.levels.get(k)
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    /// Number of level-`k` bands whose full set of children was verified.
    pub fn parents_checked(&self, k: usize) -> usize {
        self.parents_checked.get(k).copied().unwrap_or(0)
    }
}

fn mode_for(p: &ModelParams, cf: &ContinuedFraction, k: usize) -> Result<EnumerationMode> {
    Ok(match p.kind() {
        ModelKind::OffDiagonal if p.coupling() > 4.0 => {
            let qs = cf.quotients(k.max(1))?;
            if qs.iter().all(|&a| a == 1) {
                EnumerationMode::Fibonacci
            } else {
                EnumerationMode::GridScan
            }
        }
        ModelKind::Diagonal if p.lambda1() > 20.0 => EnumerationMode::General,
        _ => EnumerationMode::GridScan,
    })
}

fn band(lo: f64, hi: f64, level: usize, label: Option<BandLabel>, tau: Option<IndexWord>, trace: BandTrace) -> Band {
    Band { lo, hi, level, label, tau, trace }
}

fn mismatch(parent: &Band, kind: &str, found: usize, expected: usize) -> Error {
    Error::ChildCount {
        lo: parent.lo,
        hi: parent.hi,
        level: parent.level,
        kind: kind.to_string(),
        found,
        expected,
    }
}

struct Searcher<'a> {
    p: &'a ModelParams,
    cf: &'a ContinuedFraction,
    tol: f64,
}

impl Searcher<'_> {
    fn within(&self, t: BandTrace, lo: f64, hi: f64, want: Option<usize>) -> Result<Vec<(f64, f64)>> {
        let (p, cf) = (self.p, self.cf);
        find_bands(|e| t.eval(p, cf, e), lo, hi, want, self.tol)
    }

    /// Children of `parent` for trace `t`, required to number exactly `expected`.
    fn children(&self, parent: &Band, t: BandTrace, expected: usize, kind: &str) -> Result<Vec<(f64, f64)>> {
        let found = self.within(t, parent.lo, parent.hi, Some(expected))?;
        if found.len() != expected {
            return Err(mismatch(parent, kind, found.len(), expected));
        }
        Ok(found)
    }
}

/// Bands of {|x_k| ≤ 2} over the full spectral range, by a grid that is
/// refined until the band count is stable.
pub fn scan_bands(p: &ModelParams, cf: &ContinuedFraction, k: usize, tol: f64) -> Result<Vec<(f64, f64)>> {
    let s = Searcher { p, cf, tol };
    let r = p.spectral_bound();
    s.within(BandTrace::X(k), -r, r, None)
}

/// Enumerates and checks the band hierarchy through level `k_max`.
///
/// Children are searched only inside their permitted parents; any count or
/// ordering that disagrees with the taxonomy is returned as
/// [`Error::ChildCount`].
pub fn band_hierarchy(p: &ModelParams, cf: &ContinuedFraction, k_max: usize, tol: f64) -> Result<BandHierarchy> {
    if k_max < 2 {
        return Err(Error::InvalidArgument(format!("hierarchy needs k >= 2, got {k_max}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    cf.require(k_max + 1)?;
    let s = Searcher { p, cf, tol };
    match mode_for(p, cf, k_max + 1)? {
        EnumerationMode::Fibonacci => fibonacci(&s, k_max),
        EnumerationMode::General => general(&s, k_max),
        EnumerationMode::GridScan => grid_scan(&s, k_max),
    }
}

/// Cover at level `k` (see [`band_hierarchy`]).
pub fn enumerate_bands(p: &ModelParams, cf: &ContinuedFraction, k: usize, tol: f64) -> Result<(SpectrumCover, EnumerationMode)> {
    let mut h = band_hierarchy(p, cf, k, tol)?;
    let mode = h.mode;
    Ok((h.levels.swap_remove(k), mode))
}

fn grid_scan(s: &Searcher, k_max: usize) -> Result<BandHierarchy> {
    let mut levels = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let bands = scan_bands(s.p, s.cf, k, s.tol)?
            .into_iter()
            .map(|(lo, hi)| band(lo, hi, k, None, None, BandTrace::X(k)))
            .collect();
        levels.push(SpectrumCover::new(k, bands)?);
    }
    Ok(BandHierarchy { mode: EnumerationMode::GridScan, levels, parents_checked: vec![0; k_max + 1] })
}

fn fibonacci(s: &Searcher, k_max: usize) -> Result<BandHierarchy> {
    let mut levels: Vec<SpectrumCover> = Vec::with_capacity(k_max + 1);
    let mut checked = vec![0usize; k_max + 1];
    // seed levels by global scans; levels 2 and 3 are typed by containment
    for k in 0..=3.min(k_max) {
        let r = s.p.spectral_bound();
        let found = s.within(BandTrace::X(k), -r, r, if k < 2 { Some(1) } else { None })?;
        let mut bands = Vec::with_capacity(found.len());
        for (lo, hi) in found {
            let mut b = band(lo, hi, k, None, None, BandTrace::X(k));
            if k >= 2 {
                let inside = |lvl: &SpectrumCover| lvl.bands().iter().any(|q| q.contains(&b));
                b.label = if inside(&levels[k - 1]) {
                    Some(BandLabel::A)
                } else if inside(&levels[k - 2]) {
                    Some(BandLabel::B)
                } else {
                    return Err(Error::Hypothesis(format!(
                        "level-{k} band [{lo}, {hi}] lies in no band of the two previous levels"
                    )));
                };
            }
            bands.push(b);
        }
        levels.push(SpectrumCover::new(k, bands)?);
    }
    if k_max >= 3 {
        // level-2 parents versus the scanned level 3
        for par in levels[2].bands() {
            let n = levels[3].bands().iter().filter(|b| par.contains(b)).count();
            let expected = if par.label == Some(BandLabel::A) { 0 } else { 1 };
            if n != expected {
                return Err(mismatch(par, "x_{k+1} bands", n, expected));
            }
        }
    }
    for j in 4..=k_max {
        let mut bands = Vec::new();
        // A children: one inside each type-B band of level j−1, none in type A
        for par in levels[j - 1].bands() {
            let expected = if par.label == Some(BandLabel::B) { 1 } else { 0 };
            for (lo, hi) in s.children(par, BandTrace::X(j), expected, "A children")? {
                bands.push(band(lo, hi, j, Some(BandLabel::A), None, BandTrace::X(j)));
            }
        }
        // B children: one in each type-A band of level j−2, two around the
        // level-(j−1) A band in each type-B band
        for par in levels[j - 2].bands() {
            let is_b = par.label == Some(BandLabel::B);
            let found = s.children(par, BandTrace::X(j), if is_b { 2 } else { 1 }, "B children")?;
            if is_b {
                let mid: Vec<&Band> = levels[j - 1].bands().iter().filter(|b| par.contains(b)).collect();
                let ok = mid.len() == 1
                    && mid[0].label == Some(BandLabel::A)
                    && found[0].1 <= mid[0].lo
                    && mid[0].hi <= found[1].0;
                if !ok {
                    return Err(mismatch(par, "B-A-B order", mid.len(), 1));
                }
            }
            checked[j - 2] += 1;
            for (lo, hi) in found {
                bands.push(band(lo, hi, j, Some(BandLabel::B), None, BandTrace::X(j)));
            }
        }
        levels.push(SpectrumCover::new(j, bands)?);
    }
    Ok(BandHierarchy { mode: EnumerationMode::Fibonacci, levels, parents_checked: checked })
}

fn general(s: &Searcher, k_max: usize) -> Result<BandHierarchy> {
    let r = s.p.spectral_bound();
    let mut levels: Vec<SpectrumCover> = Vec::with_capacity(k_max + 1);
    let mut checked = vec![0usize; k_max + 1];
    let mut level0 = Vec::new();
    for (t, label) in [(BandTrace::Z(0), BandLabel::I), (BandTrace::X(0), BandLabel::III)] {
        let found = s.within(t, -r, r, Some(1))?;
        if found.len() != 1 {
            let whole = band(-r, r, 0, None, None, t);
            return Err(mismatch(&whole, "level-0 band", found.len(), 1));
        }
        let (lo, hi) = found[0];
        level0.push(band(lo, hi, 0, Some(label), Some(IndexWord(vec![label])), t));
    }
    levels.push(SpectrumCover::new(0, level0)?);

    for k in 0..k_max {
        let a = s.cf.require(k + 1)? as usize;
        let mut bands = Vec::new();
        for par in levels[k].bands() {
            let tau = par.tau.clone().unwrap_or_default();
            let (n_i, n_iii) = match par.label {
                Some(BandLabel::I) => {
                    for (lo, hi) in s.children(par, BandTrace::X(k + 1), 1, "II child")? {
                        let t = Some(tau.child(BandLabel::II));
                        bands.push(band(lo, hi, k + 1, Some(BandLabel::II), t, BandTrace::X(k + 1)));
                    }
                    checked[k] += 1;
                    continue;
                }
                Some(BandLabel::II) => (a + 1, a),
                Some(BandLabel::III) => (a, a - 1),
                _ => return Err(Error::InvalidArgument("unlabelled band in general hierarchy".into())),
            };
            let ones = s.children(par, BandTrace::Z(k + 1), n_i, "I children")?;
            let threes = s.children(par, BandTrace::X(k + 1), n_iii, "III children")?;
            // I and III children alternate, starting and ending with I
            let ok = threes
                .iter()
                .enumerate()
                .all(|(i, t)| ones[i].1 <= t.0 && t.1 <= ones[i + 1].0);
            if !ok {
                return Err(mismatch(par, "I/III alternation", n_i + n_iii, n_i + n_iii));
            }
            for (lo, hi) in ones {
                let t = Some(tau.child(BandLabel::I));
                bands.push(band(lo, hi, k + 1, Some(BandLabel::I), t, BandTrace::Z(k + 1)));
            }
            for (lo, hi) in threes {
                let t = Some(tau.child(BandLabel::III));
                bands.push(band(lo, hi, k + 1, Some(BandLabel::III), t, BandTrace::X(k + 1)));
            }
            checked[k] += 1;
        }
        levels.push(SpectrumCover::new(k + 1, bands)?);
    }
    Ok(BandHierarchy { mode: EnumerationMode::General, levels, parents_checked: checked })
}

/// |x'_j / x'_m| at the band midpoint by central differences, with m = j−1
/// for a type-A band and m = j−2 for type B.
pub fn derivative_ratio(p: &ModelParams, cf: &ContinuedFraction, b: &Band) -> Result<f64> {
    let j = b.level;
    let m = match b.label {
        Some(BandLabel::A) if j >= 1 => j - 1,
        Some(BandLabel::B) if j >= 2 => j - 2,
        _ => return Err(Error::InvalidArgument(format!("band at level {j} has no A/B label"))),
    };
    let e = b.midpoint();
    let h = 1e-4 * b.length();
    let d = |t: BandTrace| -> Result<f64> { Ok((t.eval(p, cf, e + h)? - t.eval(p, cf, e - h)?) / (2.0 * h)) };
    Ok((d(BandTrace::X(j))? / d(BandTrace::X(m))?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracemap::trace_derivatives;

    fn golden() -> ContinuedFraction {
        ContinuedFraction::golden()
    }

    #[test]
    fn fibonacci_hierarchy_counts() {
        let p = ModelParams::offdiagonal(5.0, 0.5).unwrap();
        let h = band_hierarchy(&p, &golden(), 8, DEFAULT_BAND_TOL).unwrap();
        assert_eq!(h.mode, EnumerationMode::Fibonacci);
        // x_k has q_{k+1}-many bands: 1, 1, 2, 3, 5, 8, ...
        let counts: Vec<usize> = h.levels().iter().map(SpectrumCover::len).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 8, 13, 21, 34]);
        for k in 2..=6 {
            assert_eq!(h.parents_checked(k), h.level(k).unwrap().len());
        }
    }

    #[test]
    fn band_endpoints_are_level_crossings() {
        let p = ModelParams::offdiagonal(5.0, 0.5).unwrap();
        let cf = golden();
        let (cov, _) = enumerate_bands(&p, &cf, 6, DEFAULT_BAND_TOL).unwrap();
        for b in cov.bands() {
            for e in [b.lo, b.hi] {
                let v = b.trace.eval(&p, &cf, e).unwrap();
                assert!((v.abs() - 2.0).abs() < 1e-6, "{v}");
            }
            for i in 1..8 {
                let e = b.lo + b.length() * i as f64 / 8.0;
                assert!(b.trace.eval(&p, &cf, e).unwrap().abs() <= 2.0);
            }
        }
    }

    #[test]
    fn hierarchy_agrees_with_global_scan() {
        let p = ModelParams::offdiagonal(5.0, 0.5).unwrap();
        let cf = golden();
        let h = band_hierarchy(&p, &cf, 7, DEFAULT_BAND_TOL).unwrap();
        let r = p.spectral_bound();
        for k in 2..=7 {
            // oracle: x_k is monotone through ±2 on each band and keeps its
            // sign on gaps, so its sign changes on a fine grid count the bands
            let n = 1 << 16;
            let vals: Vec<f64> = (0..=n)
                .map(|i| BandTrace::X(k).eval(&p, &cf, -r + 2.0 * r * i as f64 / n as f64).unwrap())
                .collect();
            let zeros = vals.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
            let cov = h.level(k).unwrap();
            assert_eq!(zeros, cov.len(), "level {k}");
            let scan = scan_bands(&p, &cf, k, DEFAULT_BAND_TOL).unwrap();
            assert_eq!(scan.len(), cov.len(), "level {k}");
            for (s, b) in scan.iter().zip(cov.bands()) {
                assert!((s.0 - b.lo).abs() < 1e-9 && (s.1 - b.hi).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn general_golden_taxonomy() {
        let p = ModelParams::diagonal(24.0).unwrap();
        let h = band_hierarchy(&p, &golden(), 6, DEFAULT_BAND_TOL).unwrap();
        assert_eq!(h.mode, EnumerationMode::General);
        let l0 = h.level(0).unwrap();
        assert_eq!(l0.len(), 2);
        assert!((l0.bands()[0].lo + 2.0).abs() < 1e-12 && (l0.bands()[1].hi - 26.0).abs() < 1e-12);
        // type counts follow the unrestricted recursion with a = 1
        let (mut ni, mut nii, mut niii) = (1usize, 0usize, 1usize);
        for k in 0..=6 {
            let cov = h.level(k).unwrap();
            let count = |l| cov.bands().iter().filter(|b| b.label == Some(l)).count();
            assert_eq!((count(BandLabel::I), count(BandLabel::II), count(BandLabel::III)), (ni, nii, niii));
            for b in cov.bands() {
                assert_eq!(b.tau.as_ref().unwrap().len(), k + 1);
            }
            (ni, nii, niii) = (2 * nii + niii, ni, nii);
        }
    }

    #[test]
    fn general_with_larger_quotients() {
        let p = ModelParams::diagonal(30.0).unwrap();
        let cf = ContinuedFraction::explicit(vec![2, 3, 1, 2, 1, 1]).unwrap();
        let h = band_hierarchy(&p, &cf, 4, DEFAULT_BAND_TOL).unwrap();
        let c1 = h.level(1).unwrap();
        // a_1 = 2: level 1 has 2 I bands, 1 II band and 1 III band
        let count = |l| c1.bands().iter().filter(|b| b.label == Some(l)).count();
        assert_eq!((count(BandLabel::I), count(BandLabel::II), count(BandLabel::III)), (2, 1, 1));
        assert_eq!(h.parents_checked(3), h.level(3).unwrap().len());
    }

    #[test]
    fn weak_coupling_falls_back_to_scan() {
        let p = ModelParams::diagonal(2.0).unwrap();
        let (cov, mode) = enumerate_bands(&p, &golden(), 4, DEFAULT_BAND_TOL).unwrap();
        assert_eq!(mode, EnumerationMode::GridScan);
        assert!(cov.bands().iter().all(|b| b.label.is_none()));
        assert_eq!(cov.len(), 5);
    }

    #[test]
    fn finite_difference_ratio_matches_dual_numbers() {
        let p = ModelParams::offdiagonal_with_coupling(20.0).unwrap();
        let cf = golden();
        let (cov, _) = enumerate_bands(&p, &cf, 5, DEFAULT_BAND_TOL).unwrap();
        for b in cov.bands().iter().filter(|b| b.label == Some(BandLabel::A)) {
            let fd = derivative_ratio(&p, &cf, b).unwrap();
            let (xs, _) = trace_derivatives(&p, &cf, b.midpoint(), 5).unwrap();
            let exact = (xs[6].1 / xs[5].1).abs();
            assert!((fd / exact - 1.0).abs() < 1e-5, "{fd} vs {exact}");
        }
    }
}
