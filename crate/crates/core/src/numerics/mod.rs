//! Numerical kernels shared by the other modules.

mod fit;
mod logmat;
mod quad;
mod tridiag;

pub use fit::{linfit, LineFit};
pub use logmat::{logmat_mul, LogMatrix2, Mat2};
pub use quad::{composite_gauss, gauss_legendre, quadrature, Quadrature, MAX_INTERVALS};
pub use tridiag::{
    resolvent_column, tridiag_eigh, tridiag_eigvals, tridiag_solve_complex, EigenSystem,
    TridiagMatrix,
};
