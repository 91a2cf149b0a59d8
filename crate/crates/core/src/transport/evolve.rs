//! Exact time evolution in the eigenbasis of the box and closed-form Abelian
//! time averages.

use num_complex::Complex64;

use super::JacobiOperator;
use crate::error::{Error, Result};
use crate::numerics::{resolvent_column, tridiag_eigh, TridiagMatrix};

/// Largest probability tolerated in the boundary layer.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-6;

/// Eigenvectors whose squared overlap with the start site is below this are
/// dropped; the total dropped weight is kept in [`Propagator::dropped_weight`].
const WEIGHT_CUTOFF: f64 = 1e-18;

/// Outer share of the box (per side) counted as boundary layer.
const BOUNDARY_FRACTION: f64 = 0.05;

/// Eigensystem of a box with the start-site overlaps, ready to propagate δ_1.
#[derive(Debug, Clone)]
pub struct Propagator {
    matrix: TridiagMatrix,
    size: usize,
    half: usize,
    /// eigenvalues of the retained modes
    energies: Vec<f64>,
    /// b[n·J + j] = v_j(n)·v_j(centre) for the J retained modes
    b: Vec<f64>,
    dropped: f64,
}

/// Site probabilities a(n, t) (or averages ⟨a(n, T)⟩) on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityGrid {
    pub times: Vec<f64>,
    /// half-width h; columns run over the offsets m = n − 1 ∈ [−h, h]
    pub half: usize,
    /// probs[i][m + h] at times[i]
    pub probs: Vec<Vec<f64>>,
    pub averaged: bool,
    /// probability within the boundary layer at each time
    pub boundary_mass: Vec<f64>,
    /// first time whose boundary mass exceeds [`BOUNDARY_MASS_LIMIT`]
    pub invalid_at: Option<f64>,
}

/// P(N, t) = P_r + P_l, distances measured from the start site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutsideProbability {
    pub total: f64,
    pub right: f64,
    pub left: f64,
}

impl Propagator {
    pub fn new(op: &JacobiOperator) -> Result<Self> {
        let eig = tridiag_eigh(op.matrix())?;
        let n = op.size();
        let c = op.center();
        let w = eig.component(c);
        let keep: Vec<usize> = (0..n).filter(|&j| w[j] * w[j] >= WEIGHT_CUTOFF).collect();
        let dropped = (0..n).filter(|&j| w[j] * w[j] < WEIGHT_CUTOFF).map(|j| w[j] * w[j]).sum();
        let jn = keep.len();
        let mut b = vec![0.0; n * jn];
        for (col, &j) in keep.iter().enumerate() {
            let v = eig.vector(j);
            for site in 0..n {
                b[site * jn + col] = v[site] * w[j];
            }
        }
        let energies = keep.iter().map(|&j| eig.values[j]).collect();
        Ok(Self { matrix: op.matrix().clone(), size: n, half: op.half_width(), energies, b, dropped })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of eigenmodes kept.
    pub fn modes(&self) -> usize {
        self.energies.len()
    }

    /// Start-site weight of the discarded eigenmodes.
    pub fn dropped_weight(&self) -> f64 {
        self.dropped
    }

    fn row(&self, site: usize) -> &[f64] {
        let jn = self.modes();
        &self.b[site * jn..(site + 1) * jn]
    }

    /// a(·, t) for every box site.
    pub fn probabilities(&self, t: f64) -> Vec<f64> {
        let phases: Vec<Complex64> = self.energies.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect();
        (0..self.size)
            .map(|s| {
                let amp: Complex64 = self.row(s).iter().zip(&phases).map(|(&b, &ph)| ph * b).sum();
                amp.norm_sqr()
            })
            .collect()
    }

    /// ⟨a(·, T)⟩ = Σ_{j,k} b_nj b_nk η²/(η² + (E_j − E_k)²) with η = 2/T.
    ///
    /// The sum over k runs over all modes and collapses to a resolvent entry:
    /// Σ_k b_nk η/(η + i(E_j − E_k)) = iη·G(n, 1; E_j − iη). So each retained
    /// mode j costs one resolvent column, not a J² kernel.
    pub fn averaged_probabilities(&self, t: f64) -> Result<Vec<f64>> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("averaging time must be positive, got {t}")));
        }
        let eta = 2.0 / t;
        let jn = self.modes();
        let mut out = vec![0.0; self.size];
        for j in 0..jn {
            let g = resolvent_column(&self.matrix, Complex64::new(self.energies[j], eta), self.half)?;
            for (s, (o, gv)) in out.iter_mut().zip(&g).enumerate() {
                *o += eta * self.b[s * jn + j] * gv.im;
            }
        }
        Ok(out)
    }

    /// The same average from the explicit double sum over retained modes.
    #[cfg(test)]
    fn averaged_direct(&self, t: f64) -> Vec<f64> {
        let eta2 = (2.0 / t).powi(2);
        (0..self.size)
            .map(|s| {
                let r = self.row(s);
                let mut acc = 0.0;
                for j in 0..r.len() {
                    for k in 0..r.len() {
                        let d = self.energies[j] - self.energies[k];
                        acc += r[j] * r[k] * eta2 / (eta2 + d * d);
                    }
                }
                acc
            })
            .collect()
    }

    fn grid(&self, times: &[f64], averaged: bool) -> Result<ProbabilityGrid> {
        let mut probs = Vec::with_capacity(times.len());
        for &t in times {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::InvalidArgument(format!("times must be finite and >= 0, got {t}")));
            }
            probs.push(if averaged { self.averaged_probabilities(t)? } else { self.probabilities(t) });
        }
        let layer = ((BOUNDARY_FRACTION * self.size as f64).ceil() as usize).clamp(1, self.half);
        let boundary_mass: Vec<f64> = probs
            .iter()
            .map(|p| p[..layer].iter().sum::<f64>() + p[self.size - layer..].iter().sum::<f64>())
            .collect();
        let invalid_at = boundary_mass.iter().position(|&m| m > BOUNDARY_MASS_LIMIT).map(|i| times[i]);
        Ok(ProbabilityGrid { times: times.to_vec(), half: self.half, probs, averaged, boundary_mass, invalid_at })
    }

    /// a(n, t) at each time.
    pub fn evolve(&self, times: &[f64]) -> Result<ProbabilityGrid> {
        self.grid(times, false)
    }

    /// ⟨a(n, T)⟩ at each averaging time T > 0.
    pub fn averaged(&self, times: &[f64]) -> Result<ProbabilityGrid> {
        if let Some(&t) = times.iter().find(|&&t| !(t > 0.0)) {
            return Err(Error::InvalidArgument(format!("averaging time must be positive, got {t}")));
        }
        self.grid(times, true)
    }
}

impl ProbabilityGrid {
    /// Column index of time `t` (exact match up to rounding).
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    /// Σ_n of column i.
    pub fn mass(&self, i: usize) -> f64 {
        self.probs[i].iter().sum()
    }

    /// Mass strictly farther than `radius` (real) from the start site.
    pub fn outside_real(&self, i: usize, radius: f64) -> OutsideProbability {
        let h = self.half as i64;
        let p = &self.probs[i];
        // first offset with m > radius
        let m0 = if radius < 0.0 { 0 } else { radius.floor() as i64 + 1 };
        let (mut right, mut left) = (0.0, 0.0);
        if radius < 0.0 {
            // every site is outside; the start site is counted on the right
            right += p[self.half];
        }
        for m in m0.max(1)..=h {
            right += p[(h + m) as usize];
            left += p[(h - m) as usize];
        }
        OutsideProbability { total: right + left, right, left }
    }
}

/// a(n, t) for every site and time, through a fresh eigendecomposition.
pub fn evolve(op: &JacobiOperator, times: &[f64]) -> Result<ProbabilityGrid> {
    Propagator::new(op)?.evolve(times)
}

/// (P, P_r, P_l) at one grid time; N ≤ h.
pub fn outside_probability(grid: &ProbabilityGrid, n: usize, t: f64) -> Result<OutsideProbability> {
    if n > grid.half {
        return Err(Error::InvalidArgument(format!("N = {n} exceeds the box half-width {}", grid.half)));
    }
    let i = grid
        .time_index(t)
        .ok_or_else(|| Error::InvalidArgument(format!("time {t} is not on the grid")))?;
    Ok(grid.outside_real(i, n as f64))
}

/// ⟨P(N, T)⟩ in closed form. Also checks the boundary layer.
pub fn averaged_outside(op: &JacobiOperator, n: usize, t: f64) -> Result<f64> {
    if !(t > 1.0) {
        return Err(Error::InvalidArgument(format!("T must exceed 1, got {t}")));
    }
    let grid = Propagator::new(op)?.averaged(&[t])?;
    if grid.invalid_at.is_some() {
        return Err(Error::Hypothesis(format!(
            "boundary mass {:.3e} exceeds {BOUNDARY_MASS_LIMIT:e} at T = {t}",
            grid.boundary_mass[0]
        )));
    }
    Ok(outside_probability(&grid, n, t)?.total)
}
