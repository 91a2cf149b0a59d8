use num_complex::Complex64;

use super::{ModelKind, ModelParams};
use crate::cf::{ContinuedFraction, SturmianWord};
use crate::error::{Error, Result};
use crate::numerics::{logmat_mul, LogMatrix2};

/// One-site transfer matrix for a site with Sturmian letter `v`:
/// (1/a)[[E, −1], [a², 0]] off-diagonal, [[E − b, −1], [1, 0]] diagonal.
pub fn one_step(p: &ModelParams, e: Complex64, v: u8) -> LogMatrix2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let m = match p.kind() {
        ModelKind::OffDiagonal => {
            let a = p.hopping(v);
            [[e / a, -one / a], [Complex64::new(a, 0.0), zero]]
        }
        ModelKind::Diagonal => [[e - p.potential(v), -one], [one, zero]],
    };
    LogMatrix2::new(m, 0.0).expect("transfer matrix has a unit entry")
}

fn seed_minus_one(p: &ModelParams) -> LogMatrix2 {
    let m = match p.kind() {
        ModelKind::OffDiagonal => {
            let r = p.lambda1() / p.lambda2();
            [[1.0 / r, 0.0], [0.0, r]]
        }
        ModelKind::Diagonal => [[1.0, -p.lambda1()], [0.0, 1.0]],
    };
    LogMatrix2::from_real(m).expect("nonzero seed")
}

/// M_k for k ≥ −1, with M_k = M_{k−2}·M_{k−1}^{a_k}.
pub fn transfer_matrix(
    p: &ModelParams,
    cf: &ContinuedFraction,
    e: Complex64,
    k: i64,
) -> Result<LogMatrix2> {
    if k < -1 {
        return Err(Error::InvalidArgument(format!("transfer matrix index {k} < -1")));
    }
    let mut prev = seed_minus_one(p);
    if k == -1 {
        return Ok(prev);
    }
    let mut cur = one_step(p, e, 0);
    for j in 1..=k as usize {
        let a = cf.require(j)?;
        let next = logmat_mul(&prev, &cur.pow(a));
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// F_n = T_n ⋯ T_1 using the exact Sturmian letters v(1), ..., v(n).
pub fn site_transfer(
    p: &ModelParams,
    cf: &ContinuedFraction,
    e: Complex64,
    n: usize,
) -> Result<LogMatrix2> {
    if n == 0 {
        return Err(Error::InvalidArgument("site_transfer needs n >= 1".into()));
    }
    let word = SturmianWord::new(cf, n as i64)?;
    let mut f = LogMatrix2::identity();
    for j in 1..=n as i64 {
        f = logmat_mul(&one_step(p, e, word.letter(j)), &f);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::convergents;
    use crate::tracemap::trace_sequence;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
    }

    #[test]
    fn seeds() {
        let p = ModelParams::offdiagonal(2.0, 1.0).unwrap();
        let m = transfer_matrix(&p, &ContinuedFraction::golden(), c(0.3, 0.0), -1)
            .unwrap()
            .to_matrix()
            .unwrap();
        let expect = [[c(0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(2.0, 0.0)]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[i][j] - expect[i][j]).norm() < 1e-15);
            }
        }
        let p = ModelParams::diagonal(3.0).unwrap();
        let m = transfer_matrix(&p, &ContinuedFraction::golden(), c(0.3, 0.0), -1)
            .unwrap()
            .to_matrix()
            .unwrap();
        assert!((m[0][1] - c(-3.0, 0.0)).norm() < 1e-15);
        assert!((m[0][0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((m[1][1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(m[1][0].norm() < 1e-15);
    }

    #[test]
    fn single_site_factors() {
        let p = ModelParams::diagonal(1.0).unwrap();
        let m = one_step(&p, c(0.0, 0.0), 1).to_matrix().unwrap();
        assert_eq!(m, [[c(-1.0, 0.0), c(-1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
        let p = ModelParams::offdiagonal(1.0, 1.0).unwrap();
        let m = site_transfer(&p, &ContinuedFraction::golden(), c(2.0, 0.0), 1)
            .unwrap()
            .to_matrix()
            .unwrap();
        assert_eq!(m, [[c(2.0, 0.0), c(-1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
    }

    #[test]
    fn trace_of_m3_matches_orbit() {
        let g = ContinuedFraction::golden();
        for p in [ModelParams::offdiagonal(2.0, 0.5).unwrap(), ModelParams::diagonal(2.5).unwrap()] {
            for e in [c(0.1, 0.0), c(-1.7, 0.2), c(3.3, -0.01)] {
                let o = trace_sequence(&p, &g, e, 5, 0.1).unwrap();
                let m = transfer_matrix(&p, &g, e, 3).unwrap();
                assert!(close(m.trace(), o.x(3).unwrap(), 1e-10));
            }
        }
    }

    #[test]
    fn mk_equals_f_qk() {
        let cf = ContinuedFraction::explicit(vec![2, 1, 3, 1, 2, 1]).unwrap();
        let t = convergents(&cf, 6).unwrap();
        for p in [ModelParams::offdiagonal(1.5, 0.6).unwrap(), ModelParams::diagonal(1.2).unwrap()] {
            let e = c(0.4, 0.05);
            for k in 1..=5i64 {
                let m = transfer_matrix(&p, &cf, e, k).unwrap().to_matrix().unwrap();
                let f = site_transfer(&p, &cf, e, t.q(k) as usize).unwrap().to_matrix().unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        assert!(close(m[i][j], f[i][j], 1e-8), "k={k} ({i},{j})");
                    }
                }
            }
        }
        // golden n = q_5
        let g = ContinuedFraction::golden();
        let t = convergents(&g, 5).unwrap();
        let p = ModelParams::offdiagonal(1.0, 0.3).unwrap();
        let e = c(0.77, 0.0);
        let m = transfer_matrix(&p, &g, e, 5).unwrap().to_matrix().unwrap();
        let f = site_transfer(&p, &g, e, t.q(5) as usize).unwrap().to_matrix().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(m[i][j], f[i][j], 1e-10));
            }
        }
    }

    #[test]
    fn unit_determinant() {
        let g = ContinuedFraction::golden();
        let p = ModelParams::offdiagonal(2.0, 0.5).unwrap();
        let f = site_transfer(&p, &g, c(0.0, 0.0), 10_000).unwrap();
        assert!((f.det() - c(1.0, 0.0)).norm() < 1e-8);
        // determinant accuracy is limited by ‖M‖² · eps
        for e in [0.0, 0.9, 2.3] {
            let m = transfer_matrix(&p, &g, c(e, 0.0), 8).unwrap();
            let tol = 1e-9f64.max(1e-14 * (2.0 * m.ln_norm()).exp());
            assert!((m.det() - c(1.0, 0.0)).norm() < tol, "E={e}");
        }
    }
}
