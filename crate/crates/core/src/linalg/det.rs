//! Fraction-free (Bareiss) determinant, independent of the SNF path.

use num_bigint::BigInt;

use super::matrix::IntMatrix;
use super::scalar::Scalar;
use super::LinalgError;

pub(crate) fn bareiss<S: Scalar>(mut a: Vec<S>, n: usize) -> Option<S> {
    if n == 0 {
        return Some(S::one());
    }
    let mut sign_flip = false;
    let mut prev = S::one();
    for k in 0..n - 1 {
        if a[k * n + k].is_zero() {
            let swap = (k + 1..n).find(|&i| !a[i * n + k].is_zero());
            match swap {
                None => return Some(S::zero()),
                Some(i) => {
                    for j in 0..n {
                        a.swap(k * n + j, i * n + j);
                    }
                    sign_flip = !sign_flip;
                }
            }
        }
        let pivot = a[k * n + k].clone();
        for i in k + 1..n {
            let lead = a[i * n + k].clone();
            for j in k + 1..n {
                a[i * n + j] = a[i * n + j].bareiss(&pivot, &lead, &a[k * n + j], &prev)?;
            }
        }
        prev = pivot;
    }
    let det = a[n * n - 1].clone();
    if sign_flip {
        det.checked_neg()
    } else {
        Some(det)
    }
}

fn load<S: Scalar>(entries: &[BigInt]) -> Option<Vec<S>> {
    entries.iter().map(S::from_big).collect()
}

/// Exact determinant of a square matrix.
pub fn determinant(m: &IntMatrix) -> Result<BigInt, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    // Bareiss intermediates are minors of the input; i128 covers every
    // matrix of modest size with small entries.
    if let Some(d) = load::<i128>(m.entries()).and_then(|a| bareiss(a, n)) {
        return Ok(BigInt::from(d));
    }
    Ok(bareiss(m.entries().to_vec(), n).expect("big-integer elimination cannot overflow"))
}
