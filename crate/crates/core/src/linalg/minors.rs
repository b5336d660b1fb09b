//! Exhaustive k x k minor gcd, the independent oracle for SNF prefixes.

use std::sync::atomic::{AtomicBool, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::det::bareiss;
use super::matrix::IntMatrix;
use super::scalar::Scalar;
use super::LinalgError;

pub const DEFAULT_MINOR_BUDGET: u64 = 10_000_000;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Number of k x k submatrices of an `rows x cols` matrix.
pub fn minor_count(rows: usize, cols: usize, k: usize) -> u128 {
    binomial(rows, k).saturating_mul(binomial(cols, k))
}

/// Lexicographic k-subsets of `0..n`.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[pos] += 1;
        for i in pos + 1..k {
            idx[i] = idx[i - 1] + 1;
        }
    }
}

fn gcd_for_rows<S: Scalar>(
    a: &[S],
    cols: usize,
    rows_sel: &[usize],
    col_sets: &[Vec<usize>],
    done: &AtomicBool,
) -> Option<BigInt> {
    let k = rows_sel.len();
    let mut g = <BigInt as Zero>::zero();
    let mut buf = Vec::with_capacity(k * k);
    for cs in col_sets {
        if done.load(Ordering::Relaxed) {
            break;
        }
        buf.clear();
        for &r in rows_sel {
            for &c in cs {
                buf.push(a[r * cols + c].clone());
            }
        }
        let d = bareiss(buf.clone(), k)?;
        if !d.is_zero() {
            g = g.gcd(&d.to_big());
            if g.is_one() {
                done.store(true, Ordering::Relaxed);
                break;
            }
        }
    }
    Some(g)
}

fn run<S: Scalar>(m: &IntMatrix, k: usize) -> Option<BigInt> {
    let a: Vec<S> = m.entries().iter().map(S::from_big).collect::<Option<_>>()?;
    let row_sets = combinations(m.rows(), k);
    let col_sets = combinations(m.cols(), k);
    let done = AtomicBool::new(false);
    let partial: Option<Vec<BigInt>> =
        row_sets.par_iter().map(|rs| gcd_for_rows(&a, m.cols(), rs, &col_sets, &done)).collect();
    Some(partial?.into_iter().fold(<BigInt as Zero>::zero(), |acc, g| acc.gcd(&g)))
}

/// gcd of all k x k minors of `m` (0 when every minor vanishes).
///
/// Refuses to enumerate more than `budget` submatrices; the error carries the
/// required count.
pub fn minor_gcd(m: &IntMatrix, k: usize, budget: u64) -> Result<BigInt, LinalgError> {
    let limit = m.rows().min(m.cols());
    if k == 0 || k > limit {
        return Err(LinalgError::MinorOrder { k, max: limit });
    }
    let required = minor_count(m.rows(), m.cols(), k);
    if required > budget as u128 {
        return Err(LinalgError::BudgetExceeded { required, budget });
    }
    // gcd is order independent and the early exit only fires once the
    // running gcd is already 1, so the parallel result equals the sequential one.
    Ok(run::<i128>(m, k).or_else(|| run::<BigInt>(m, k)).expect("big-integer elimination cannot overflow"))
}
