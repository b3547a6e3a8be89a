//! Exact arithmetic: Z/p scalars, truncated integer series, matrices and subspaces over Z/p.

mod echelon;
mod field;
mod matrix;
mod series;

pub use echelon::{left_kernel, EchelonBasis};
pub use field::{is_odd_prime, PrimeField};
pub use matrix::FpMatrix;
pub use series::TruncatedSeries;

/// Cauchy product of two series with the same cap.
pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> crate::Result<TruncatedSeries> {
    a.mul(b)
}

/// Inverse of a series whose constant term is a unit in Z.
pub fn series_inv(a: &TruncatedSeries) -> crate::Result<TruncatedSeries> {
    a.inv()
}

/// Rank over Z/p.
pub fn matrix_rank(m: &FpMatrix) -> usize {
    m.rank()
}
