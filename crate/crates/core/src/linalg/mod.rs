//! Exact integer linear algebra: Smith normal form, determinants, minor gcds
//! and cokernels.

mod abelian;
mod det;
mod matrix;
mod minors;
pub(crate) mod scalar;
mod snf;

use num_bigint::BigInt;
use thiserror::Error;

pub use abelian::{cokernel, cokernel_from_diag, factorize, gcd_all, AbelianGroupDecomp};
pub use det::determinant;
pub use matrix::IntMatrix;
pub use minors::{binomial, combinations, minor_count, minor_gcd, DEFAULT_MINOR_BUDGET};
pub use snf::{smith_normal_form, SnfResult};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("minor order {k} outside 1..={max}")]
    MinorOrder { k: usize, max: usize },
    #[error("enumerating minors needs {required} submatrices, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("circulant of an empty vector")]
    EmptyVector,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Circulant matrix whose row `i` is `v` cyclically shifted right by `i`.
pub fn circulant(v: &[BigInt]) -> Result<IntMatrix, LinalgError> {
    let n = v.len();
    if n == 0 {
        return Err(LinalgError::EmptyVector);
    }
    Ok(IntMatrix::from_fn(n, n, |i, j| v[(j + n - i) % n].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn circulants() {
        assert_eq!(
            circulant(&ints(&[0, 1, 1])).unwrap(),
            IntMatrix::from_rows(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]])
        );
        assert_eq!(circulant(&ints(&[1, -1])).unwrap(), IntMatrix::from_rows(&[vec![1, -1], vec![-1, 1]]));
        assert_eq!(circulant(&ints(&[5])).unwrap(), IntMatrix::from_rows(&[vec![5]]));
        assert_eq!(
            circulant(&ints(&[1, 2, 3])).unwrap(),
            IntMatrix::from_rows(&[vec![1, 2, 3], vec![3, 1, 2], vec![2, 3, 1]])
        );
        assert_eq!(circulant(&[]), Err(LinalgError::EmptyVector));
    }
}
