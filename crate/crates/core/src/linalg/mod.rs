//! Dense matrices, symmetric eigendecomposition and covariance primitives.

mod cov;
mod eigen;
mod matrix;

pub use cov::{covariance, covariance_of, weighted_covariance_at};
pub use eigen::{
    fix_sign, jacobi_eigen, lanczos_top_k, sym_eig, SymEigResult, SymOperator, JACOBI_MAX_DIM,
};
pub use matrix::{distance, dot, norm, squared_distance, DataMatrix, Matrix};
