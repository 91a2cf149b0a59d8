//! End-to-end runs across modules.

use num_complex::Complex64;
use sturmian::cf::{convergents, ContinuedFraction};
use sturmian::spectrum::{
    band_counts, band_hierarchy, box_counting_estimate, dim_lower_bound, BandLabel, BandTrace, SpectrumCover, DEFAULT_BAND_TOL,
};
use sturmian::tracemap::{pseudospectrum_member, Membership, ModelParams};
use sturmian::transport::{
    averaged_outside, build_operator, evolve, fit_exponents, outside_probability, parseval_average, ExponentConfig,
    ParsevalConfig,
};

#[test]
fn general_hierarchy_counts_bound_the_recursion() {
    let cf = ContinuedFraction::explicit(vec![1, 2, 1, 3, 1, 1, 2]).unwrap();
    let p = ModelParams::diagonal(30.0).unwrap();
    let h = band_hierarchy(&p, &cf, 5, DEFAULT_BAND_TOL).unwrap();
    let q = convergents(&cf, 5).unwrap();
    let qs = cf.quotients(5).unwrap();
    // every type I band holds one type II child whatever a is, so the
    // indicator rule only bounds the type II count from below
    let (mut ni, mut nii, mut niii) = (1u64, 0u64, 1u64);
    for k in 0..=5 {
        let cov = h.level(k).unwrap();
        let count = |l| cov.bands().iter().filter(|b| b.label == Some(l)).count() as u64;
        assert_eq!((count(BandLabel::I), count(BandLabel::II), count(BandLabel::III)), (ni, nii, niii), "level {k}");
        let lower = band_counts(&cf, k).unwrap();
        assert!(lower.n_i <= ni.into() && lower.n_ii <= nii.into() && lower.n_iii <= niii.into(), "level {k}");
        let xs = cov.bands().iter().filter(|b| b.trace == BandTrace::X(k)).count();
        assert_eq!(xs as u128, q.q(k as i64), "level {k}");
        if k < 5 {
            let a = qs[k];
            (ni, nii, niii) = ((a + 1) * nii + a * niii, ni, a * nii + (a - 1) * niii);
        }
    }
}

#[test]
fn spectrum_bands_are_not_escaped() {
    let g = ContinuedFraction::golden();
    let p = ModelParams::offdiagonal(5.0, 0.5).unwrap();
    let h = band_hierarchy(&p, &g, 7, DEFAULT_BAND_TOL).unwrap();
    let top = h.level(7).unwrap();
    // band centres of level 7 cannot have escaped by level 7; a gap point
    // of level 3 escapes eventually
    for b in top.bands() {
        let m = pseudospectrum_member(&p, &g, Complex64::new(b.midpoint(), 0.0), 7, 0.1).unwrap();
        assert_eq!(m, Membership::UndecidedIn, "{b:?}");
    }
    let l3 = h.level(3).unwrap().bands();
    let gap = 0.5 * (l3[0].hi + l3[1].lo);
    let m = pseudospectrum_member(&p, &g, Complex64::new(gap, 0.0), 40, 0.1).unwrap();
    assert!(matches!(m, Membership::Out { .. }), "{m:?}");
}

#[test]
fn dimension_estimate_above_bound() {
    let g = ContinuedFraction::golden();
    let p = ModelParams::diagonal(24.0).unwrap();
    let h = band_hierarchy(&p, &g, 8, DEFAULT_BAND_TOL).unwrap();
    let d = box_counting_estimate(&h.levels()[3..=8], None).unwrap();
    let bound = dim_lower_bound(&g, 24.0, 1).unwrap();
    assert!(d.dim_minus >= bound, "{} < {bound}", d.dim_minus);
    assert!(d.dim_plus <= 1.0);
    let measures: Vec<f64> = h.levels().iter().map(SpectrumCover::total_measure).collect();
    assert!(measures[8] < measures[3]);
}

#[test]
fn strong_coupling_spreads_slower_than_free_chain() {
    let g = ContinuedFraction::golden();
    let times = [0.0, 5.0, 10.0, 20.0, 40.0];
    let free = build_operator(&ModelParams::offdiagonal(1.0, 1.0).unwrap(), &g, 201).unwrap();
    let hard = build_operator(&ModelParams::offdiagonal_with_coupling(20.0).unwrap(), &g, 201).unwrap();
    let (gf, gh) = (evolve(&free, &times).unwrap(), evolve(&hard, &times).unwrap());
    for &t in &times[1..] {
        let pf = outside_probability(&gf, 10, t).unwrap().total;
        let ph = outside_probability(&gh, 10, t).unwrap().total;
        assert!(ph < pf, "t = {t}: {ph} vs {pf}");
    }
}

#[test]
fn averaged_routes_agree_on_a_small_chain() {
    let g = ContinuedFraction::golden();
    let op = build_operator(&ModelParams::offdiagonal(1.0, 0.6).unwrap(), &g, 121).unwrap();
    for (n, t) in [(2, 3.0), (5, 5.0)] {
        let a = averaged_outside(&op, n, t).unwrap();
        let b = parseval_average(&op, n, t, &ParsevalConfig::default()).unwrap();
        assert!(b.converged);
        assert!((a - b.outside).abs() <= 1e-6 * a.max(1e-12), "N = {n}, T = {t}: {a} vs {}", b.outside);
    }
}

#[test]
fn free_chain_fit_reports_all_names() {
    let op = build_operator(&ModelParams::offdiagonal(1.0, 1.0).unwrap(), &ContinuedFraction::golden(), 501).unwrap();
    let times: Vec<f64> = (0..9).map(|i| 2.0 * 1.6f64.powi(i)).collect();
    let grid = evolve(&op, &times).unwrap();
    let alphas: Vec<f64> = (0..=12).map(|i| 0.1 * i as f64).collect();
    let s = fit_exponents(Some(&grid), None, &alphas, &ExponentConfig::default(), None).unwrap();
    for k in ["alpha_l_plus", "alpha_l_minus", "alpha_u_plus", "alpha_u_minus"] {
        assert!(s.alpha_estimates.contains_key(k), "{k}");
    }
    // ballistic: nothing below α = 0.5 looks localized
    assert!(s.alpha_estimates["alpha_u_plus"] >= 0.9);
}
