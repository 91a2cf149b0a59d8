//! Symmetric tridiagonal matrices: eigensolver, complex shifted solves and
//! single resolvent columns.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix. `offdiag[i]` couples rows `i` and `i+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("empty tridiagonal matrix".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidArgument(format!(
                "offdiag has length {}, expected {}",
                offdiag.len(),
                diag.len() - 1
            )));
        }
        if let Some(i) = diag.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "diag", index: i });
        }
        if let Some(i) = offdiag.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "offdiag", index: i });
        }
        Ok(Self { diag, offdiag })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Gershgorin bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// y = H x
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.offdiag[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiag[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// y = (H - z) x for complex x.
    pub fn apply_shifted(&self, z: Complex64, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = (self.diag[i] - z) * x[i];
                if i > 0 {
                    s += self.offdiag[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiag[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors.
///
/// Vectors are stored one after another: `vector(j)` is the eigenvector of
/// `values[j]`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    vectors: Vec<f64>,
    n: usize,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }

    /// Component `site` of every eigenvector.
    pub fn component(&self, site: usize) -> Vec<f64> {
        (0..self.n).map(|j| self.vectors[j * self.n + site]).collect()
    }
}

const MAX_SWEEPS: usize = 60;

fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::NoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(v) = z.as_deref_mut() {
                    let (lo, hi) = v.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_next = &mut hi[..n];
                    for (a, b) in row_i.iter_mut().zip(row_next.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Full eigendecomposition by implicit-shift QL iteration.
pub fn tridiag_eigh(m: &TridiagMatrix) -> Result<EigenSystem> {
    let n = m.len();
    let mut d = m.diag.clone();
    let mut e = m.offdiag.clone();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    ql_implicit(&mut d, &mut e, Some(&mut z))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&j| d[j]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &j in &order {
        let row = &z[j * n..(j + 1) * n];
        // fix the sign so the output does not depend on rotation history details
        let pivot = row
            .iter()
            .copied()
            .fold(0.0_f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        vectors.extend(row.iter().map(|v| v * sign));
    }
    Ok(EigenSystem { values, vectors, n })
}

/// Eigenvalues only, ascending.
pub fn tridiag_eigvals(m: &TridiagMatrix) -> Result<Vec<f64>> {
    let mut d = m.diag.clone();
    let mut e = m.offdiag.clone();
    e.push(0.0);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Solves (H - z) x = rhs by banded LU with partial pivoting.
pub fn tridiag_solve_complex(
    m: &TridiagMatrix,
    z: Complex64,
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    if z.im == 0.0 {
        return Err(Error::RealShift(z.re));
    }
    let n = m.len();
    if rhs.len() != n {
        return Err(Error::InvalidArgument(format!(
            "rhs has length {}, matrix has size {n}",
            rhs.len()
        )));
    }
    if let Some(i) = rhs.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite { what: "rhs", index: i });
    }
    let mut d: Vec<Complex64> = m.diag.iter().map(|&b| b - z).collect();
    let mut dl: Vec<Complex64> = m.offdiag.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    let mut du = dl.clone();
    let mut du2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
    let mut swap = vec![false; n.saturating_sub(1)];

    for i in 0..n.saturating_sub(1) {
        if cabs1(d[i]) >= cabs1(dl[i]) {
            if d[i] != Complex64::new(0.0, 0.0) {
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            }
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swap[i] = true;
        }
    }
    if let Some(i) = d.iter().position(|v| *v == Complex64::new(0.0, 0.0)) {
        return Err(Error::InvalidArgument(format!("singular pivot at {i}")));
    }

    let mut b = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if swap[i] {
            let temp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = temp - dl[i] * b[i];
        } else {
            b[i + 1] = b[i + 1] - dl[i] * b[i];
        }
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
    Ok(b)
}

/// Column `site` of the resolvent (H - z)^{-1}.
///
/// Uses continued-fraction ratios swept in from both ends, so entries far from
/// `site` keep relative accuracy even when they are tiny.
pub fn resolvent_column(m: &TridiagMatrix, z: Complex64, site: usize) -> Result<Vec<Complex64>> {
    if z.im == 0.0 {
        return Err(Error::RealShift(z.re));
    }
    let n = m.len();
    if site >= n {
        return Err(Error::OutOfRange { index: site as i64, available: n });
    }
    let a = &m.offdiag;
    let d: Vec<Complex64> = m.diag.iter().map(|&b| b - z).collect();
    let zero = Complex64::new(0.0, 0.0);

    // left[i] = g_i / g_{i+1} for i < site
    let mut left = vec![zero; site];
    for i in 0..site {
        let mut den = d[i];
        if i > 0 {
            den += a[i - 1] * left[i - 1];
        }
        left[i] = -a[i] / den;
    }
    // right[i] = g_i / g_{i-1} for i > site
    let mut right = vec![zero; n];
    for i in (site + 1..n).rev() {
        let mut den = d[i];
        if i + 1 < n {
            den += a[i] * right[i + 1];
        }
        right[i] = -a[i - 1] / den;
    }
    let mut den = d[site];
    if site > 0 {
        den += a[site - 1] * left[site - 1];
    }
    if site + 1 < n {
        den += a[site] * right[site + 1];
    }
    let mut g = vec![zero; n];
    g[site] = 1.0 / den;
    for i in (0..site).rev() {
        g[i] = left[i] * g[i + 1];
    }
    for i in site + 1..n {
        g[i] = right[i] * g[i - 1];
    }
    Ok(g)
}
