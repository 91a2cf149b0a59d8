//! The four pipelines. Each resolves defaults into the config, computes, and
//! returns the report plus the run status (results are written even when
//! the status is a numerical failure).

use serde_json::{json, Value};
use sturmian::cf::{
    birkhoff_average, gauss_kuzmin_density, khintchin_c, pair_counts, pair_probability, ContinuedFraction,
};
use sturmian::numerics::linfit;
use sturmian::spectrum::{
    alpha_upper_bound, band_count_sequence, band_hierarchy, band_length_bounds, box_counting_estimate,
    compute_d, dim_lower_bound, xi_c, BandLabel, EnumerationMode, DEFAULT_BAND_TOL, D_DEFAULT_TERMS,
};
use sturmian::tracemap::{ModelKind, ModelParams};
use sturmian::transport::{
    build_operator, fit_exponents, scale_n_of_t, transfer_bound_rhs, ExponentConfig, Propagator,
};

use crate::config::{parse_grid, ModelName, RunConfig};
use crate::error::CliError;
use crate::report::{num, Report, Table};

pub type Outcome = Result<(RunConfig, Report, Result<(), CliError>), CliError>;

/// Smallest accepted transport box.
pub const MIN_BOX: usize = 21;
const DENSITY_ROWS: u64 = 10;
const PAIR_MAX: u64 = 4;
const KHINTCHIN_TOL: f64 = 1e-4;

fn c_k(cf: &ContinuedFraction, k: usize) -> Result<f64, CliError> {
    Ok(3.0 * birkhoff_average(cf, |a| (a as f64 + 2.0).ln(), k)?)
}

pub fn cf_stats(mut cfg: RunConfig) -> Outcome {
    cfg.cf.get_or_insert_with(|| "random".into());
    if cfg.cf.as_deref() == Some("random") {
        cfg.seed.get_or_insert(7);
    }
    let k = *cfg.k.get_or_insert(100_000);
    if k == 0 {
        return Err(CliError::Validation("--k must be >= 1".into()));
    }
    let cf = cfg.continued_fraction()?;
    let qs = cf.quotients(k)?;

    let mut report = Report::default();
    let mut density = Table::new("density", &["r", "count", "empirical", "gauss_kuzmin"]);
    for r in 1..=DENSITY_ROWS {
        let count = qs.iter().filter(|&&a| a == r).count();
        density.push(vec![json!(r), json!(count), num(count as f64 / k as f64), num(gauss_kuzmin_density(r)?)]);
    }
    let mut trace = Table::new("trace", &["k", "c_k"]);
    let mut checkpoints: Vec<usize> = std::iter::successors(Some(10usize), |&j| j.checked_mul(10))
        .take_while(|&j| j < k)
        .collect();
    checkpoints.push(k);
    for &j in &checkpoints {
        trace.push(vec![json!(j), num(c_k(&cf, j)?)]);
    }
    let pairs = (k - 1) / 2;
    if pairs >= 1 {
        let counts = pair_counts(&cf, pairs, PAIR_MAX)?;
        let mut t = Table::new("pairs", &["lambda", "gamma", "count", "empirical", "law"]);
        for l in 1..=PAIR_MAX {
            for g in 1..=PAIR_MAX {
                let c = counts[l as usize - 1][g as usize - 1];
                t.push(vec![json!(l), json!(g), json!(c), num(c as f64 / pairs as f64), num(pair_probability(l, g)?)]);
            }
        }
        report.tables.push(t);
    }
    report.tables.insert(0, density);
    report.tables.insert(1, trace);
    let kc = khintchin_c(KHINTCHIN_TOL)?;
    report.set("cf", cf.to_string());
    report.set("k", k);
    report.set("c_k", num(c_k(&cf, k)?));
    report.set("khintchin_c", num(kc.value));
    report.set("khintchin_c_tail_bound", num(kc.tail_bound));
    Ok((cfg, report, Ok(())))
}

fn label_name(l: Option<BandLabel>) -> String {
    l.map_or_else(String::new, |l| l.to_string())
}

pub fn spectrum(mut cfg: RunConfig) -> Outcome {
    cfg.model.get_or_insert(ModelName::Diag);
    cfg.l1.get_or_insert(24.0);
    if cfg.model == Some(ModelName::Offdiag) {
        cfg.l2.get_or_insert(1.0);
    }
    cfg.cf.get_or_insert_with(|| "golden".into());
    let level = *cfg.level.get_or_insert(6);
    let tol = *cfg.tol.get_or_insert(DEFAULT_BAND_TOL);
    let want_bounds = cfg.bounds.unwrap_or(false);
    let want_alpha = cfg.alpha.unwrap_or(false);
    let p = cfg.params()?;
    let cf = cfg.continued_fraction()?;
    if level > 40 {
        return Err(CliError::Validation(format!("--level {level} is beyond the supported 40")));
    }

    let h = band_hierarchy(&p, &cf, level.max(2), tol)?;
    if h.mode == EnumerationMode::GridScan {
        eprintln!(
            "warning: labelled enumeration refused (needs off-diagonal golden with c > 4, or diagonal with \
             lambda1 > 20; here c = {}); using an unlabelled grid scan",
            p.coupling()
        );
    }
    if want_bounds && h.mode != EnumerationMode::General {
        return Err(CliError::Validation(
            "refusing --bounds: the length bounds need the diagonal model with lambda1 > 20".into(),
        ));
    }
    let cover = h.level(level).expect("hierarchy reaches the requested level");
    let mut header = vec!["level", "band_index", "lo", "hi", "length", "label", "tau"];
    if want_bounds {
        header.extend(["bound_lo", "bound_hi", "bracketed"]);
    }
    let mut bands = Table::new("bands", &header);
    let mut all_bracketed = true;
    for (i, b) in cover.bands().iter().enumerate() {
        let tau = b.tau.as_ref().map_or_else(String::new, |t| t.to_string());
        let mut row =
            vec![json!(level), json!(i), num(b.lo), num(b.hi), num(b.length()), json!(label_name(b.label)), json!(tau)];
        if want_bounds {
            let word = b.tau.as_ref().expect("general mode records index words");
            let (lo, hi) = band_length_bounds(word, &cf, p.lambda1())?;
            // endpoints are bisected to tol, so the length is known to 2·tol
            let ok = b.length() >= lo - 2.0 * tol && b.length() <= hi + 2.0 * tol;
            all_bracketed &= ok;
            row.extend([num(lo), num(hi), json!(ok)]);
        }
        bands.push(row);
    }
    let mut levels = Table::new("levels", &["level", "bands", "measure"]);
    for c in h.levels().iter().take(level + 1) {
        levels.push(vec![json!(c.level), json!(c.len()), num(c.total_measure())]);
    }
    let mut counts = Table::new(
        "counts",
        &["level", "n_I", "n_II", "n_III", "n", "found_I", "found_II", "found_III", "found_A", "found_B"],
    );
    let seq = band_count_sequence(&cf, level)?;
    for (c, s) in h.levels().iter().take(level + 1).zip(&seq) {
        let found = |l: BandLabel| c.bands().iter().filter(|b| b.label == Some(l)).count();
        counts.push(vec![
            json!(c.level),
            json!(s.n_i.to_string()),
            json!(s.n_ii.to_string()),
            json!(s.n_iii.to_string()),
            json!(s.n().to_string()),
            json!(found(BandLabel::I)),
            json!(found(BandLabel::II)),
            json!(found(BandLabel::III)),
            json!(found(BandLabel::A)),
            json!(found(BandLabel::B)),
        ]);
    }
    let mut report = Report { tables: vec![bands, levels, counts], ..Default::default() };
    report.set("mode", format!("{:?}", h.mode));
    report.set("coupling", num(p.coupling()));
    report.set("bands", cover.len());
    report.set("measure", num(cover.total_measure()));
    if want_bounds {
        report.set("all_bracketed", all_bracketed);
    }
    if level >= 4 {
        let covers: Vec<_> = h.levels()[2..=level].to_vec();
        if let Ok(d) = box_counting_estimate(&covers, None) {
            report.set("box_dim_minus", num(d.dim_minus));
            report.set("box_dim_plus", num(d.dim_plus));
        }
    }
    if p.kind() == ModelKind::Diagonal && p.lambda1() > 20.0 && level >= 1 {
        report.set("dim_lower_bound", num(dim_lower_bound(&cf, p.lambda1(), level)?));
    }
    if want_alpha {
        report.set("xi_c", num(xi_c(p.coupling())?));
        report.set("alpha_upper_bound", num(alpha_upper_bound(&p)?));
    }
    Ok((cfg, report, Ok(())))
}

fn log_times(tmin: f64, tmax: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![tmax];
    }
    let (a, b) = (tmin.ln(), tmax.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Largest group velocity 2·max a(n).
fn max_speed(p: &ModelParams) -> f64 {
    match p.kind() {
        ModelKind::Diagonal => 2.0,
        ModelKind::OffDiagonal => 2.0 * p.lambda1().max(p.lambda2()),
    }
}

pub fn transport(mut cfg: RunConfig) -> Outcome {
    cfg.model.get_or_insert(ModelName::Offdiag);
    cfg.l1.get_or_insert(1.0);
    if cfg.model == Some(ModelName::Offdiag) {
        cfg.l2.get_or_insert(1.0);
    }
    cfg.cf.get_or_insert_with(|| "golden".into());
    let l = *cfg.size.get_or_insert(1001);
    let tmax = *cfg.tmax.get_or_insert(50.0);
    let tmin = *cfg.tmin.get_or_insert((tmax / 100.0).max(1.0 + 1e-9));
    let nt = *cfg.times.get_or_insert(13);
    let want_bound = cfg.bound.unwrap_or(false);
    if l < MIN_BOX || l % 2 == 0 {
        return Err(CliError::Validation(format!("--L must be odd and >= {MIN_BOX}, got {l}")));
    }
    if !(tmin > 1.0 && tmax > tmin && tmax.is_finite()) {
        return Err(CliError::Validation(format!("need 1 < tmin < tmax, got tmin = {tmin}, tmax = {tmax}")));
    }
    if nt < 5 {
        return Err(CliError::Validation(format!("--times must be >= 5, got {nt}")));
    }
    // the exponent fits need 1.5 decades of time
    if (tmax / tmin).log10() < 1.5 {
        return Err(CliError::Validation(format!("tmax/tmin must span 1.5 decades, got {tmin}..{tmax}")));
    }
    let p = cfg.params()?;
    let cf = cfg.continued_fraction()?;
    let half = (l - 1) / 2;
    if max_speed(&p) * tmax > half as f64 {
        eprintln!(
            "warning: light cone {:.0} at tmax exceeds the box half-width {half}; relying on the boundary-mass check",
            max_speed(&p) * tmax
        );
    }
    let theory = alpha_upper_bound(&p).ok();
    if want_bound && theory.is_none() {
        return Err(CliError::Validation(
            "refusing --bound: the site scale N(T) needs the off-diagonal model with c > 8".into(),
        ));
    }

    let op = build_operator(&p, &cf, l)?;
    let prop = Propagator::new(&op)?;
    let times = log_times(tmin, tmax, nt);
    let mut grid_times = vec![0.0];
    grid_times.extend(&times);
    let plain = prop.evolve(&grid_times)?;
    let avg = prop.averaged(&times)?;

    let mut probs = Table::new("probabilities", &["n", "t", "prob"]);
    for (i, &t) in plain.times.iter().enumerate() {
        for (j, &v) in plain.probs[i].iter().enumerate() {
            probs.push(vec![json!(op.site(j)), num(t), num(v)]);
        }
    }
    let radii: Vec<usize> = [5usize, 10, 20, 50, 100, 200, 500].into_iter().filter(|&n| n < half).collect();
    let mut outside = Table::new("outside", &["t", "N", "P", "P_r", "P_l", "P_avg"]);
    for (i, &t) in times.iter().enumerate() {
        for &n in &radii {
            let o = plain.outside_real(i + 1, n as f64);
            let a = avg.outside_real(i, n as f64);
            outside.push(vec![num(t), json!(n), num(o.total), num(o.right), num(o.left), num(a.total)]);
        }
    }
    let alphas: Vec<f64> = (0..=30).map(|i| 0.05 * i as f64).collect();
    let summary = fit_exponents(Some(&plain), Some(&avg), &alphas, &ExponentConfig::default(), theory)?;
    let mut exps = Table::new("exponents", &["alpha", "averaged", "s_plus", "s_minus"]);
    for s in &summary.slopes {
        exps.push(vec![num(s.alpha), json!(s.averaged), num(s.s_plus), num(s.s_minus)]);
    }

    let mut report = Report::default();
    // spreading from the second moment at the later half of the times
    let moments: Vec<(f64, f64)> = (1..plain.times.len())
        .map(|i| {
            let m2: f64 = plain.probs[i].iter().enumerate().map(|(j, &v)| v * ((j as f64 - half as f64).powi(2))).sum();
            (plain.times[i].ln(), 0.5 * m2.ln())
        })
        .collect();
    let late = &moments[moments.len() / 2..];
    let (x, y): (Vec<f64>, Vec<f64>) = late.iter().copied().unzip();
    report.set("moment_exponent", num(linfit(&x, &y)?.slope));
    let unitarity = (0..plain.times.len()).map(|i| (plain.mass(i) - 1.0).abs()).fold(0.0, f64::max);
    report.set("unitarity_max_deviation", num(unitarity));
    report.set("modes_kept", prop.modes());
    report.set("dropped_weight", num(prop.dropped_weight()));
    for (k, v) in &summary.alpha_estimates {
        report.set(k, num(*v));
    }
    if let Some(b) = theory {
        report.set("alpha_upper_bound", num(b));
    }

    if want_bound {
        let mut bt = Table::new("bound", &["T", "N", "lhs", "rhs", "non_informative"]);
        let mut c0 = 0.0f64;
        for (i, &t) in times.iter().enumerate() {
            let n = scale_n_of_t(&cf, &p, t)?;
            let n = usize::try_from(n).map_err(|_| CliError::Numerical("N(T) overflows".into()))?;
            if n >= half {
                bt.push(vec![num(t), json!(n), Value::Null, Value::Null, Value::Null]);
                continue;
            }
            let lhs = avg.outside_real(i, n as f64).total;
            let rhs = transfer_bound_rhs(&p, &cf, n, t, true)?;
            c0 = c0.max(lhs / rhs.value);
            bt.push(vec![num(t), json!(n), num(lhs), num(rhs.value), json!(rhs.non_informative)]);
        }
        report.tables.push(bt);
        report.set("bound_constant", num(c0));
    }
    report.tables.splice(0..0, [probs, outside, exps]);

    // the Abelian average reaches times far past tmax, so its boundary
    // mass is reported but only the plain evolution decides validity
    report.set("averaged_valid", avg.invalid_at.is_none());
    if let Some(t) = avg.invalid_at {
        eprintln!("warning: averaged boundary mass exceeds the limit at T = {t}; P_avg is box-affected");
    }
    report.set("valid", plain.invalid_at.is_none());
    let status = match plain.invalid_at {
        None => Ok(()),
        Some(t) => Err(CliError::Numerical(format!("boundary mass exceeds the limit at t = {t}; results flagged invalid"))),
    };
    Ok((cfg, report, status))
}

pub fn constants(mut cfg: RunConfig) -> Outcome {
    let terms = *cfg.d_terms.get_or_insert(D_DEFAULT_TERMS);
    let grid = cfg.xi_grid.get_or_insert_with(|| "8:40:1".into()).clone();
    let l1 = *cfg.l1.get_or_insert(24.0);
    let cs = parse_grid(&grid)?;
    let d = compute_d(terms)?;
    let c = khintchin_c(KHINTCHIN_TOL)?;
    let mut xi = Table::new("xi", &["c", "xi_c", "alpha_bound"]);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    for &cv in &cs {
        let x = xi_c(cv)?;
        xi.push(vec![num(cv), num(x), num(2.0 * phi.ln() / x.ln())]);
    }
    let mut report = Report::default();
    report.tables.push(xi);
    report.set("D", num(d.value));
    report.set("D_tail_bound", num(d.tail_bound));
    report.set("D_terms", d.terms);
    report.set("C", num(c.value));
    report.set("C_tail_bound", num(c.tail_bound));
    report.set("golden_dim_lower_bound", num(dim_lower_bound(&ContinuedFraction::golden(), l1, 1)?));
    report.set("golden_dim_lambda1", num(l1));
    Ok((cfg, report, Ok(())))
}
