//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` fail for documented reasons and are
//! reported as such; any other failure makes the run exit non-zero.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sturmian::cf::{convergents, khintchin_c, ContinuedFraction, SturmianWord};
use sturmian::numerics::{linfit, LogMatrix2};
use sturmian::spectrum::{
    alpha_upper_bound, band_count_sequence, band_counts, band_hierarchy, band_length_bounds,
    box_counting_estimate, compute_d, derivative_ratio, xi_c, BandLabel, BandTrace, EnumerationMode,
    SpectrumCover, DEFAULT_BAND_TOL,
};
use sturmian::tracemap::{fricke_vogt_residual, one_step, trace_orbit, trace_sequence, transfer_matrix, ModelParams, DEFAULT_DELTA};
use sturmian::transport::{
    averaged_outside, build_operator, fit_exponents, parseval_average, scale_n_of_t, ExponentConfig,
    ParsevalConfig, Propagator,
};

const KNOWN_RED: &[u32] = &[1, 3, 6, 10];

type Outcome = Result<(bool, String), String>;

fn phi() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn constants() -> Outcome {
    let t0 = Instant::now();
    let d = compute_d(100_000).map_err(err)?;
    let c = khintchin_c(1e-4).map_err(err)?;
    let secs = t0.elapsed().as_secs_f64();
    let ok = (d.value - 1.0382).abs() <= 5e-3 && (c.value - 5.04).abs() <= 5e-3 && secs < 5.0;
    Ok((ok, format!("D = {:.5} (target 1.0382), C = {:.5} (target 5.04), {secs:.2} s", d.value, c.value)))
}

fn x_at(p: &ModelParams, cf: &ContinuedFraction, k: usize, e: f64) -> Option<f64> {
    let o = trace_sequence(p, cf, Complex64::new(e, 0.0), k, 0.0).ok()?;
    o.x(k as i64).map(|v| v.re).filter(|v| v.is_finite())
}

/// A point of {|x_k| ≤ 2}: a zero of x_k bracketed on a randomly shifted grid.
fn spectral_energy(p: &ModelParams, cf: &ContinuedFraction, k: usize, rng: &mut ChaCha8Rng) -> Option<f64> {
    let r = p.spectral_bound();
    let n = 512;
    let shift: f64 = rng.random_range(0.0..1.0);
    let grid: Vec<(f64, Option<f64>)> = (0..n)
        .map(|i| {
            let e = -r + 2.0 * r * (i as f64 + shift) / n as f64;
            (e, x_at(p, cf, k, e))
        })
        .collect();
    let brackets: Vec<(f64, f64)> = grid
        .windows(2)
        .filter_map(|w| match (w[0].1, w[1].1) {
            (Some(a), Some(b)) if a.signum() != b.signum() => Some((w[0].0, w[1].0)),
            _ => None,
        })
        .collect();
    if brackets.is_empty() {
        return None;
    }
    let (mut a, mut b) = brackets[rng.random_range(0..brackets.len())];
    let sa = x_at(p, cf, k, a)?.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        match x_at(p, cf, k, m) {
            Some(v) if v.signum() == sa => a = m,
            _ => b = m,
        }
    }
    let e = 0.5 * (a + b);
    x_at(p, cf, k, e).filter(|v| v.abs() <= 2.0).map(|_| e)
}

fn random_model(rng: &mut ChaCha8Rng, diagonal: bool) -> Result<ModelParams, String> {
    if diagonal {
        ModelParams::diagonal(rng.random_range(0.5..30.0)).map_err(err)
    } else {
        ModelParams::offdiagonal(rng.random_range(0.2..3.0), rng.random_range(0.2..3.0)).map_err(err)
    }
}

fn fricke_vogt() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // energies on σ_{15,0}, where the orbit stays of size c: the plain bound
    let (mut worst, mut energies) = (0.0f64, 0usize);
    // uniform energies: the orbit may grow to the overflow guard, so the
    // residual is measured against the size of the terms
    let mut worst_scaled = 0.0f64;
    let mut i = 0u64;
    while energies < 200 {
        i += 1;
        let cf = if i % 2 == 0 { ContinuedFraction::golden() } else { ContinuedFraction::random(i, 20) };
        let p = random_model(&mut rng, i % 4 < 2)?;
        let c2 = p.coupling().powi(2) + 4.0;
        if let Some(e) = spectral_energy(&p, &cf, 15, &mut rng) {
            let o = trace_sequence(&p, &cf, Complex64::new(e, 0.0), 15, 0.0).map_err(err)?;
            for k in -1..15 {
                worst = worst.max(fricke_vogt_residual(&o, &p, k).map_err(err)? / c2);
            }
            energies += 1;
        }
        let r = p.spectral_bound();
        let e = Complex64::new(rng.random_range(-r..r), 0.0);
        let o = trace_orbit(&p, &cf, e, 15, DEFAULT_DELTA).map_err(err)?;
        for k in -1..o.last_level() as i64 {
            let (x0, x1, z1) = (o.x(k).unwrap(), o.x(k + 1).unwrap(), o.z(k + 1).unwrap());
            let size = [x0.norm_sqr(), x1.norm_sqr(), z1.norm_sqr(), (x0 * x1 * z1).norm(), c2].into_iter().fold(0.0, f64::max);
            worst_scaled = worst_scaled.max(fricke_vogt_residual(&o, &p, k).map_err(err)? / size);
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-8 && worst_scaled <= 1e-8 && secs < 1.0,
        format!(
            "{energies} spectral energies: max residual/(c²+4) = {worst:.2e}; uniform energies: residual/size = {worst_scaled:.2e}; {secs:.2} s"
        ),
    ))
}

fn representations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut compared, mut skipped) = (0.0f64, 0usize, 0usize);
    for trial in 0..60u64 {
        let cf = if trial % 3 == 0 { ContinuedFraction::golden() } else { ContinuedFraction::random(100 + trial, 16) };
        let p = if trial % 2 == 0 {
            ModelParams::diagonal(rng.random_range(0.5..4.0)).map_err(err)?
        } else {
            ModelParams::offdiagonal(rng.random_range(0.3..2.0), rng.random_range(0.3..2.0)).map_err(err)?
        };
        let r = p.spectral_bound();
        let e = Complex64::new(rng.random_range(-r..r), rng.random_range(-0.1..0.1));
        let o = trace_sequence(&p, &cf, e, 12, 0.0).map_err(err)?;
        for k in 0..=12i64 {
            let (Some(x), Some(z)) = (o.x(k), o.z(k)) else {
                skipped += 1;
                continue;
            };
            let mk = transfer_matrix(&p, &cf, e, k).map_err(err)?;
            let mk1 = transfer_matrix(&p, &cf, e, k - 1).map_err(err)?;
            let prod = mk1 * mk;
            // rounding in a product scales with the norms of its factors
            let ln_scale = mk.ln_norm() + mk1.ln_norm();
            if ln_scale > 600.0 {
                skipped += 1;
                continue;
            }
            worst = worst.max((mk.trace() - x).norm() / mk.ln_norm().exp().max(1.0));
            worst = worst.max((prod.trace() - z).norm() / ln_scale.exp().max(1.0));
            compared += 1;
        }
    }
    // det F_n site by site up to 10^4, on σ_{20,0} (q_20 > 10^4) where the
    // products stay moderate; elsewhere rounding grows like ‖F_n‖²
    let g = ContinuedFraction::golden();
    let word = SturmianWord::new(&g, 10_001).map_err(err)?;
    let (mut det_worst, mut ln_norm_max, mut det_energies) = (0.0f64, 0.0f64, 0usize);
    // worst det error in units of the rounding floor ε‖F_n‖²
    let mut det_rounding = 0.0f64;
    for (i, p) in [
        ModelParams::offdiagonal(2.0, 0.5),
        ModelParams::offdiagonal(1.0, 0.7),
        ModelParams::diagonal(1.0),
        ModelParams::diagonal(2.0),
    ]
    .into_iter()
    .enumerate()
    {
        let p = p.map_err(err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(30 + i as u64);
        for _ in 0..5 {
            let Some(e) = spectral_energy(&p, &g, 20, &mut rng) else { continue };
            let e = Complex64::new(e, 0.0);
            let mut f = LogMatrix2::identity();
            // rounding drift persists once the norm shrinks again
            let mut peak = 0.0f64;
            for n in 1..=10_000i64 {
                f = one_step(&p, e, word.letter(n)) * f;
                let d = (f.det() - 1.0).norm();
                peak = peak.max(f.ln_norm());
                det_worst = det_worst.max(d);
                det_rounding = det_rounding.max(d / (f64::EPSILON * (2.0 * peak).exp()));
                ln_norm_max = ln_norm_max.max(f.ln_norm());
            }
            det_energies += 1;
        }
    }
    let ok = worst <= 1e-8 && det_worst <= 1e-8 && compared > 0 && det_energies > 0;
    Ok((
        ok,
        format!(
            "trace relative error {worst:.2e} over {compared} levels ({skipped} past overflow); \
             det error {det_worst:.2e} over {det_energies} energies, max ‖F_n‖ = {:.1e}, \
             worst det error / (ε‖F_n‖²) = {det_rounding:.2}",
            ln_norm_max.exp()
        ),
    ))
}

fn taxonomy() -> Outcome {
    let g = ContinuedFraction::golden();
    let p = ModelParams::offdiagonal_with_coupling(9.9).map_err(err)?;
    let h = band_hierarchy(&p, &g, 9, DEFAULT_BAND_TOL).map_err(|e| format!("Fibonacci c = 9.9: {e}"))?;
    let mut ok = h.mode == EnumerationMode::Fibonacci;
    // parents at levels 2..=7 have their children at levels 4..=9 checked
    for k in 2..=7 {
        ok &= h.parents_checked(k) == h.level(k).map_or(0, SpectrumCover::len);
    }
    let fib: Vec<usize> = h.levels().iter().map(SpectrumCover::len).collect();
    let p = ModelParams::diagonal(24.0).map_err(err)?;
    let hd = band_hierarchy(&p, &g, 7, DEFAULT_BAND_TOL).map_err(|e| format!("diagonal 24: {e}"))?;
    ok &= hd.mode == EnumerationMode::General;
    for k in 2..7 {
        ok &= hd.parents_checked(k) == hd.level(k).map_or(0, SpectrumCover::len);
    }
    let gen: Vec<usize> = hd.levels().iter().map(SpectrumCover::len).collect();
    Ok((ok, format!("Fibonacci band counts {fib:?}, general {gen:?}")))
}

fn bracketing() -> Outcome {
    let t0 = Instant::now();
    let g = ContinuedFraction::golden();
    let p = ModelParams::diagonal(24.0).map_err(err)?;
    let tol = DEFAULT_BAND_TOL;
    let h = band_hierarchy(&p, &g, 7, tol).map_err(err)?;
    let (mut inside, mut total) = (0usize, 0usize);
    for cov in h.levels() {
        for b in cov.bands() {
            let tau = b.tau.as_ref().ok_or("general band without index word")?;
            let (lo, hi) = band_length_bounds(tau, &g, 24.0).map_err(err)?;
            total += 1;
            if b.length() >= lo - 2.0 * tol && b.length() <= hi + 2.0 * tol {
                inside += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    Ok((inside == total && secs < 60.0, format!("{inside}/{total} band lengths bracketed, {secs:.1} s")))
}

fn derivative_ratios() -> Outcome {
    let g = ContinuedFraction::golden();
    let c = 20.0;
    let p = ModelParams::offdiagonal_with_coupling(c).map_err(err)?;
    let h = band_hierarchy(&p, &g, 7, DEFAULT_BAND_TOL).map_err(err)?;
    let (lo, hi) = (0.95 * xi_c(c).map_err(err)?, 1.05 * (2.0 * c + 7.0));
    let (mut min, mut max, mut n, mut bad) = (f64::INFINITY, 0.0f64, 0usize, 0usize);
    for k in 3..=7 {
        for b in h.level(k).ok_or("missing level")?.bands().iter().filter(|b| b.label == Some(BandLabel::A)) {
            let r = derivative_ratio(&p, &g, b).map_err(err)?;
            min = min.min(r);
            max = max.max(r);
            n += 1;
            if !(lo..=hi).contains(&r) {
                bad += 1;
            }
        }
    }
    Ok((
        bad == 0 && n > 0,
        format!("{n} A bands, ratios in [{min:.3}, {max:.3}], allowed [{lo:.3}, {hi:.3}], {bad} outside"),
    ))
}

fn counting() -> Outcome {
    let mut ok = true;
    for seed in 0..20u64 {
        let cf = ContinuedFraction::random(seed, 200);
        let seq = band_count_sequence(&cf, 200).map_err(err)?;
        let qs = cf.quotients(200).map_err(err)?;
        for k in 0..200 {
            let (a, prev, next) = (BigUint::from(qs[k]), &seq[k], &seq[k + 1]);
            ok &= next.n_i == (&a + 1u32) * &prev.n_ii + &a * &prev.n_iii;
            ok &= next.n_ii == if qs[k] <= 2 { prev.n_i.clone() } else { BigUint::ZERO };
            ok &= next.n_iii == &a * &prev.n_ii + (&a - 1u32) * &prev.n_iii;
        }
        for k in 3..=200 {
            ok &= seq[k].n() >= BigUint::from(2u32) * seq[k - 2].n() + seq[k - 3].n();
        }
    }
    let rate = band_counts(&ContinuedFraction::golden(), 60).map_err(err)?.ln_n() / 60.0;
    ok &= (rate - phi().ln()).abs() <= 0.01;
    Ok((ok, format!("20 seeds to k = 200 exact; golden (ln n_60)/60 = {rate:.5} vs ln φ = {:.5}", phi().ln())))
}

fn shrinkage() -> Outcome {
    let g = ContinuedFraction::golden();
    let p = ModelParams::diagonal(24.0).map_err(err)?;
    let h = band_hierarchy(&p, &g, 10, DEFAULT_BAND_TOL).map_err(err)?;
    let q = convergents(&g, 10).map_err(err)?;
    let (mut ok, mut measures) = (true, Vec::new());
    for k in 3..=10 {
        // σ_{k,0} = {|x_k| ≤ 2}: the x_k-traced bands of level k, q_k of them
        let bands: Vec<_> = h.level(k).ok_or("missing level")?.bands().iter().filter(|b| b.trace == BandTrace::X(k)).collect();
        ok &= bands.len() as u128 == q.q(k as i64);
        measures.push(bands.iter().map(|b| b.length()).sum::<f64>());
    }
    ok &= measures.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = measures.iter().map(|m| format!("{m:.3e}")).collect();
    Ok((ok, format!("|σ_k,0| for k = 3..10: {}", shown.join(", "))))
}

fn log_times(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (a.ln() + (b / a).ln() * i as f64 / (n - 1) as f64).exp()).collect()
}

fn ballistic() -> Outcome {
    let p = ModelParams::offdiagonal(1.0, 1.0).map_err(err)?;
    let op = build_operator(&p, &ContinuedFraction::golden(), 1001).map_err(err)?;
    let prop = Propagator::new(&op).map_err(err)?;
    let mut times = vec![0.0];
    times.extend(log_times(1.5, 50.0, 13));
    let grid = prop.evolve(&times).map_err(err)?;
    let unitarity = (0..times.len()).map(|i| (grid.mass(i) - 1.0).abs()).fold(0.0, f64::max);
    // spreading exponent from the second moment, later half of the times
    let half = op.half_width() as f64;
    let pts: Vec<(f64, f64)> = (7..times.len())
        .map(|i| {
            let m2: f64 = grid.probs[i].iter().enumerate().map(|(j, &v)| v * (j as f64 - half).powi(2)).sum();
            (times[i].ln(), 0.5 * m2.ln())
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let beta = linfit(&x, &y).map_err(err)?.slope;
    let ok = (beta - 1.0).abs() <= 0.05 && unitarity <= 1e-8 && grid.invalid_at.is_none();
    Ok((ok, format!("moment exponent {beta:.4}, max |mass − 1| = {unitarity:.1e}")))
}

fn sub_ballistic() -> Outcome {
    let t0 = Instant::now();
    let g = ContinuedFraction::golden();
    let p = ModelParams::offdiagonal_with_coupling(20.0).map_err(err)?;
    let op = build_operator(&p, &g, 4001).map_err(err)?;
    let prop = Propagator::new(&op).map_err(err)?;
    let ts = log_times(10.0, 1000.0, 9);
    let avg = prop.averaged(&ts).map_err(err)?;
    if let Some(t) = avg.invalid_at {
        return Ok((false, format!("boundary mass limit exceeded at T = {t}")));
    }
    let alphas: Vec<f64> = (0..=30).map(|i| 0.05 * i as f64).collect();
    let bound = alpha_upper_bound(&p).map_err(err)?;
    let s = fit_exponents(None, Some(&avg), &alphas, &ExponentConfig::default(), Some(bound)).map_err(err)?;
    let au = *s.alpha_estimates.get("tilde_alpha_u_plus").ok_or("no tilde_alpha_u_plus")?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (i, &t) in ts.iter().enumerate() {
        let n = scale_n_of_t(&g, &p, t).map_err(err)? as f64;
        let pn = avg.outside_real(i, n).total;
        if pn > 0.0 {
            x.push(t.ln());
            y.push(pn.ln());
        }
    }
    let slope = linfit(&x, &y).map_err(err)?.slope;
    let secs = t0.elapsed().as_secs_f64();
    let limit = bound + 0.1;
    let ok = au <= limit && slope < -2.0 && secs < 600.0;
    Ok((
        ok,
        format!("tilde α_u+ = {au:.3} (limit {limit:.3}), slope of ⟨P(N(T),T)⟩ = {slope:.3} (need < −2), {secs:.0} s"),
    ))
}

fn two_routes() -> Outcome {
    let p = ModelParams::offdiagonal_with_coupling(20.0).map_err(err)?;
    let op = build_operator(&p, &ContinuedFraction::golden(), 101).map_err(err)?;
    let (t, n) = (20.0, 10);
    let direct = averaged_outside(&op, n, t).map_err(err)?;
    let pv = parseval_average(&op, n, t, &ParsevalConfig::default()).map_err(err)?;
    let rel = (direct - pv.outside).abs() / direct.abs().max(f64::MIN_POSITIVE);
    let ok = rel <= 0.05 && (pv.total - 1.0).abs() <= 1e-4 && pv.converged;
    Ok((
        ok,
        format!("closed form {direct:.6e}, Parseval {:.6e} (rel {rel:.1e}), total {:.8}", pv.outside, pv.total),
    ))
}

fn cantor(level: usize) -> SpectrumCover {
    let mut iv = vec![(0.0, 1.0)];
    for _ in 0..level {
        iv = iv.iter().flat_map(|&(a, b)| { let w = (b - a) / 3.0; [(a, a + w), (b - w, b)] }).collect();
    }
    SpectrumCover::from_intervals(level, &iv).expect("disjoint intervals")
}

fn dimensions() -> Outcome {
    let exact = LN_2 / 3f64.ln();
    let covers: Vec<_> = (4..=12).map(cantor).collect();
    let d = box_counting_estimate(&covers, None).map_err(err)?;
    let mut ok = (d.dim_minus - exact).abs() <= 0.02 && (d.dim_plus - exact).abs() <= 0.02;
    let g = ContinuedFraction::golden();
    let p = ModelParams::diagonal(24.0).map_err(err)?;
    let h = band_hierarchy(&p, &g, 9, DEFAULT_BAND_TOL).map_err(err)?;
    let gd = box_counting_estimate(&h.levels()[4..=9], None).map_err(err)?;
    let bound = phi().ln() / (3.0 * 3f64.ln() + 29f64.ln());
    ok &= gd.dim_minus >= bound;
    Ok((
        ok,
        format!(
            "Cantor [{:.4}, {:.4}] vs {exact:.4}; golden λ1 = 24 estimate {:.4} vs bound {bound:.4}",
            d.dim_minus, d.dim_plus, gd.dim_minus
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 12] = [
        (1, "constants", constants),
        (2, "Fricke-Vogt conservation", fricke_vogt),
        (3, "representation consistency", representations),
        (4, "band taxonomy", taxonomy),
        (5, "band-length bracketing", bracketing),
        (6, "derivative ratios", derivative_ratios),
        (7, "counting recursion", counting),
        (8, "Cantor shrinkage", shrinkage),
        (9, "ballistic control", ballistic),
        (10, "sub-ballistic inequality", sub_ballistic),
        (11, "two-route oracle", two_routes),
        (12, "dimension sanity", dimensions),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    let mut passed = 0;
    let mut run = 0;
    for (id, name, f) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        run += 1;
        let t0 = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        let tag = match (ok, KNOWN_RED.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        if ok {
            passed += 1;
        } else if !KNOWN_RED.contains(&id) {
            unexpected += 1;
        }
        println!("criterion {id:>2} {tag:<12} {name}: {detail} [{:.1} s]", t0.elapsed().as_secs_f64());
    }
    println!("acceptance: {passed}/{run} passed, {unexpected} unexpected failures");
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
