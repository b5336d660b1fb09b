//! Smith normal form by elementary row and column operations.
//!
//! Each step moves a nonzero entry of least absolute value into the pivot
//! position, clears its row and column with rounded quotients, and repeats
//! until the pivot divides every remaining entry. The kernel first runs on
//! `i64` and restarts on `BigInt` the moment anything overflows.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfResult {
    /// `s_1, ..., s_min(rows, cols)`: non-negative, nonzero entries first,
    /// each dividing the next.
    #[serde(with = "crate::serde_int::vec")]
    pub diag: Vec<BigInt>,
    pub rank: usize,
    /// `(U, V)` unimodular with `U * M * V` equal to the diagonal matrix.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub transforms: Option<(IntMatrix, IntMatrix)>,
}

impl SnfResult {
    /// The full `rows x cols` diagonal matrix.
    pub fn diagonal_matrix(&self, rows: usize, cols: usize) -> IntMatrix {
        let mut d = IntMatrix::zeros(rows, cols);
        for (i, s) in self.diag.iter().enumerate() {
            d[(i, i)] = s.clone();
        }
        d
    }
}

struct Work<S> {
    rows: usize,
    cols: usize,
    a: Vec<S>,
    u: Option<Vec<S>>,
    v: Option<Vec<S>>,
}

impl<S: Scalar> Work<S> {
    fn load(m: &IntMatrix, transforms: bool) -> Option<Self> {
        let a = m.entries().iter().map(S::from_big).collect::<Option<Vec<_>>>()?;
        let ident = |n: usize| {
            let mut id = vec![S::zero(); n * n];
            for i in 0..n {
                id[i * n + i] = S::one();
            }
            id
        };
        Some(Work {
            rows: m.rows(),
            cols: m.cols(),
            a,
            u: transforms.then(|| ident(m.rows())),
            v: transforms.then(|| ident(m.cols())),
        })
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> &S {
        &self.a[i * self.cols + j]
    }

    fn swap_rows(&mut self, i: usize, k: usize) {
        if i == k {
            return;
        }
        let c = self.cols;
        for j in 0..c {
            self.a.swap(i * c + j, k * c + j);
        }
        if let Some(u) = &mut self.u {
            let n = self.rows;
            for j in 0..n {
                u.swap(i * n + j, k * n + j);
            }
        }
    }

    fn swap_cols(&mut self, j: usize, l: usize) {
        if j == l {
            return;
        }
        let c = self.cols;
        for i in 0..self.rows {
            self.a.swap(i * c + j, i * c + l);
        }
        if let Some(v) = &mut self.v {
            let n = self.cols;
            for i in 0..n {
                v.swap(i * n + j, i * n + l);
            }
        }
    }

    /// row_i -= q * row_src, starting at column `from` (earlier columns of
    /// both rows are already zero in `a`).
    fn row_axpy(&mut self, i: usize, src: usize, q: &S, from: usize) -> Option<()> {
        let c = self.cols;
        for j in from..c {
            let s = &self.a[src * c + j];
            if !s.is_zero() {
                self.a[i * c + j] = self.a[i * c + j].checked_sub_mul(q, s)?;
            }
        }
        if let Some(u) = &mut self.u {
            let n = self.rows;
            for j in 0..n {
                let s = &u[src * n + j];
                if !s.is_zero() {
                    u[i * n + j] = u[i * n + j].checked_sub_mul(q, s)?;
                }
            }
        }
        Some(())
    }

    /// col_j -= q * col_src, touching rows from `from` on.
    fn col_axpy(&mut self, j: usize, src: usize, q: &S, from: usize) -> Option<()> {
        let c = self.cols;
        for i in from..self.rows {
            let s = &self.a[i * c + src];
            if !s.is_zero() {
                self.a[i * c + j] = self.a[i * c + j].checked_sub_mul(q, s)?;
            }
        }
        if let Some(v) = &mut self.v {
            let n = self.cols;
            for i in 0..n {
                let s = &v[i * n + src];
                if !s.is_zero() {
                    v[i * n + j] = v[i * n + j].checked_sub_mul(q, s)?;
                }
            }
        }
        Some(())
    }

    fn negate_row(&mut self, i: usize) -> Option<()> {
        let c = self.cols;
        for j in 0..c {
            self.a[i * c + j] = self.a[i * c + j].checked_neg()?;
        }
        if let Some(u) = &mut self.u {
            let n = self.rows;
            for j in 0..n {
                u[i * n + j] = u[i * n + j].checked_neg()?;
            }
        }
        Some(())
    }

    /// Nonzero entry of least absolute value in the trailing block `[t.., t..]`.
    fn min_in_block(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let x = self.at(i, j);
                if x.is_zero() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, bj)) => x.cmp_abs(self.at(bi, bj)).is_lt(),
                };
                if better {
                    best = Some((i, j));
                    if x.cmp_abs(&S::one()).is_eq() {
                        return best;
                    }
                }
            }
        }
        best
    }

    /// Nonzero entry of least absolute value in row `t` / column `t` beyond the pivot.
    fn min_in_cross(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        let cand = (t + 1..self.rows).map(|i| (i, t)).chain((t + 1..self.cols).map(|j| (t, j)));
        for (i, j) in cand {
            let x = self.at(i, j);
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.cmp_abs(self.at(bi, bj)).is_lt()) {
                best = Some((i, j));
            }
        }
        best
    }

    fn run(&mut self) -> Option<()> {
        let steps = self.rows.min(self.cols);
        for t in 0..steps {
            let Some((pi, pj)) = self.min_in_block(t) else {
                break;
            };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                // Clear column t below and row t to the right.
                for i in t + 1..self.rows {
                    if !self.at(i, t).is_zero() {
                        let q = self.at(i, t).nearest_quotient(self.at(t, t));
                        self.row_axpy(i, t, &q, t)?;
                    }
                }
                for j in t + 1..self.cols {
                    if !self.at(t, j).is_zero() {
                        let q = self.at(t, j).nearest_quotient(self.at(t, t));
                        self.col_axpy(j, t, &q, t)?;
                    }
                }
                if let Some((i, j)) = self.min_in_cross(t) {
                    // Remainders are strictly smaller than the pivot; promote one.
                    if i != t {
                        self.swap_rows(t, i);
                    } else {
                        self.swap_cols(t, j);
                    }
                    continue;
                }
                // Divisibility repair: fold in a row the pivot does not divide.
                let pivot = self.at(t, t).clone();
                let offender = (t + 1..self.rows).find(|&i| (t + 1..self.cols).any(|j| !pivot.divides(self.at(i, j))));
                match offender {
                    Some(i) => self.row_axpy(t, i, &S::one().checked_neg()?, t)?,
                    None => break,
                }
            }
            if self.at(t, t).is_negative() {
                self.negate_row(t)?;
            }
        }
        Some(())
    }

    fn finish(self) -> SnfResult {
        let steps = self.rows.min(self.cols);
        let diag: Vec<BigInt> = (0..steps).map(|i| self.at(i, i).to_big()).collect();
        let rank = diag.iter().take_while(|d| !num_traits::Zero::is_zero(*d)).count();
        let to_matrix = |data: Vec<S>, n: usize| {
            IntMatrix::new(n, n, data.iter().map(S::to_big).collect()).expect("square transform")
        };
        let transforms = match (self.u, self.v) {
            (Some(u), Some(v)) => Some((to_matrix(u, self.rows), to_matrix(v, self.cols))),
            _ => None,
        };
        SnfResult { diag, rank, transforms }
    }
}

fn attempt<S: Scalar>(m: &IntMatrix, transforms: bool) -> Option<SnfResult> {
    let mut w = Work::<S>::load(m, transforms)?;
    w.run()?;
    Some(w.finish())
}

/// Smith normal form of `m`, optionally with unimodular `(U, V)` such that
/// `U * m * V` is the diagonal matrix.
pub fn smith_normal_form(m: &IntMatrix, want_transforms: bool) -> SnfResult {
    attempt::<i64>(m, want_transforms)
        .or_else(|| attempt::<BigInt>(m, want_transforms))
        .expect("big-integer elimination cannot overflow")
}

#[cfg(test)]
pub(crate) fn smith_normal_form_big(m: &IntMatrix, want_transforms: bool) -> SnfResult {
    attempt::<BigInt>(m, want_transforms).unwrap()
}
