//! Wavepacket dynamics on a finite Sturmian box: operator construction,
//! eigenbasis time evolution, outside probabilities, resolvent averages,
//! transfer-matrix upper bounds and exponent fits.

mod bounds;
mod evolve;
mod exponents;
mod parseval;

pub use bounds::{k_of_t, scale_n_of_t, transfer_bound_rhs, TransferBound};
pub use evolve::{
    averaged_outside, evolve, outside_probability, OutsideProbability, ProbabilityGrid, Propagator,
    BOUNDARY_MASS_LIMIT,
};
pub use exponents::{fit_exponents, ExponentConfig, ExponentSlope, TransportSummary};
pub use parseval::{parseval_average, ParsevalAverage, ParsevalConfig};

use crate::cf::{ContinuedFraction, SturmianWord};
use crate::error::{Error, Result};
use crate::numerics::TridiagMatrix;
use crate::tracemap::ModelParams;

/// Jacobi operator restricted to the sites 1−h, …, 1+h (L = 2h+1) with
/// Dirichlet ends. The start site 1 sits at the centre of the box.
#[derive(Debug, Clone)]
pub struct JacobiOperator {
    params: ModelParams,
    matrix: TridiagMatrix,
    half: usize,
}

impl JacobiOperator {
    /// Number of sites L.
    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    /// h = (L−1)/2.
    pub fn half_width(&self) -> usize {
        self.half
    }

    /// Box index of the start site.
    pub fn center(&self) -> usize {
        self.half
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn matrix(&self) -> &TridiagMatrix {
        &self.matrix
    }

    /// Lattice site of box index `i`.
    pub fn site(&self, i: usize) -> i64 {
        i as i64 - self.half as i64 + 1
    }

    /// Box index of lattice site `n`, if inside.
    pub fn index(&self, n: i64) -> Option<usize> {
        let i = n - 1 + self.half as i64;
        (0..self.size() as i64).contains(&i).then_some(i as usize)
    }

    /// b(n) for a site inside the box.
    pub fn potential(&self, n: i64) -> Option<f64> {
        self.index(n).map(|i| self.matrix.diag()[i])
    }

    /// a(n), the coupling of n and n+1, when both are inside the box.
    pub fn hopping(&self, n: i64) -> Option<f64> {
        let i = self.index(n)?;
        self.matrix.offdiag().get(i).copied()
    }
}

/// Box of L (odd, ≥ 3) sites around site 1, coefficients from the exact
/// Sturmian letters of `cf`.
pub fn build_operator(p: &ModelParams, cf: &ContinuedFraction, l: usize) -> Result<JacobiOperator> {
    if l < 3 || l % 2 == 0 {
        return Err(Error::InvalidArgument(format!("box size must be odd and >= 3, got {l}")));
    }
    let half = (l - 1) / 2;
    let first = 1 - half as i64;
    let word = SturmianWord::new(cf, half as i64 + 1)?;
    let diag = (0..l as i64).map(|i| p.potential(word.letter(first + i))).collect();
    let offdiag = (0..l as i64 - 1).map(|i| p.hopping(word.letter(first + i))).collect();
    Ok(JacobiOperator { params: *p, matrix: TridiagMatrix::new(diag, offdiag)?, half })
}
