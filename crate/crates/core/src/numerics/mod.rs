//! Complex dense linear algebra, seeded sampling and operation counting.

mod counter;
mod linalg;
mod matrix;
mod rng;

pub use counter::{MulCounter, DEFAULT_SVD_COST};
pub use linalg::{default_rel_tol, pinv, pinv_real, pinv_tol, rank, svd, Svd};
pub use matrix::{abs2_hadamard, col_norms_sq, row_norms_sq, CMatrix, RMatrix};
pub use num_complex::Complex64;
pub use rng::{cgauss, RngStream};
