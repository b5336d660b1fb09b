use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LinalgError;
use crate::serde_int::JsonInt;

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    /// Builds from nested rows. Panics on ragged input; meant for literals.
    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix literal");
        Self::from_fn(r, c, |i, j| rows[i][j].into())
    }

    pub fn try_from_rows(rows: Vec<Vec<BigInt>>, cols_hint: Option<usize>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = cols_hint.unwrap_or_else(|| rows.first().map_or(0, |row| row.len()));
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(LinalgError::Shape(format!("row {i} has {} entries, expected {c}", row.len())));
            }
            data.extend(row);
        }
        Ok(IntMatrix { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(BigInt::zero(), |acc, k| acc + &self[(i, k)] * &other[(k, j)])
        }))
    }

    /// Entry `(i, j)` of the result is `self[(rows[i], cols[j])]`.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn paste(&mut self, r0: usize, c0: usize, block: &IntMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)].clone();
            }
        }
    }

    /// Permutation matrix `P` with `P[i][perm[i]] = 1`, so `P * M` has row `i`
    /// equal to row `perm[i]` of `M`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = Self::zeros(n, n);
        for (i, &p) in perm.iter().enumerate() {
            m[(i, p)] = BigInt::one();
        }
        m
    }

    /// Plain-text form: a `rows cols` header, then one whitespace-separated line per row.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, LinalgError> {
        let mut tokens = text.split_whitespace();
        let mut header = |what: &str| -> Result<usize, LinalgError> {
            tokens
                .next()
                .ok_or_else(|| LinalgError::Parse(format!("missing {what} in header")))?
                .parse::<usize>()
                .map_err(|e| LinalgError::Parse(format!("bad {what}: {e}")))
        };
        let rows = header("row count")?;
        let cols = header("column count")?;
        let data = tokens
            .map(|t| t.parse::<BigInt>().map_err(|_| LinalgError::Parse(format!("`{t}` is not an integer"))))
            .collect::<Result<Vec<_>, _>>()?;
        if data.len() != rows * cols {
            return Err(LinalgError::Parse(format!("header says {rows}x{cols} but {} entries follow", data.len())));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LinalgError> {
        serde_json::from_str(text).map_err(|e| LinalgError::Parse(e.to_string()))
    }

    /// Accepts either the JSON or the plain-text format.
    pub fn parse_any(text: &str) -> Result<Self, LinalgError> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_text(text)
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix {}x{} ", self.rows, self.cols)?;
        f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.data.iter().map(|x| x.to_string().len()).max().unwrap_or(1);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|x| format!("{x:>width$}")).collect();
            writeln!(f, "[{}]", line.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<JsonInt>>,
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: (0..self.rows).map(|i| self.row(i).iter().cloned().map(JsonInt).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.entries.len() != raw.rows {
            return Err(serde::de::Error::custom(format!(
                "declared {} rows but found {}",
                raw.rows,
                raw.entries.len()
            )));
        }
        let rows = raw.entries.into_iter().map(|r| r.into_iter().map(|x| x.0).collect()).collect();
        IntMatrix::try_from_rows(rows, Some(raw.cols)).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_formats() {
        let big: BigInt = "-99999999999999999999999".parse().unwrap();
        let mut m = IntMatrix::from_rows(&[vec![1, -2, 3], vec![0, 5, -6]]);
        m[(1, 0)] = big.clone();
        let text = m.to_text();
        assert!(text.starts_with("2 3\n"));
        assert_eq!(IntMatrix::from_text(&text).unwrap(), m);

        let json = m.to_json();
        assert!(json.contains("\"-99999999999999999999999\""));
        assert!(json.contains("\"rows\":2"));
        assert_eq!(IntMatrix::from_json(&json).unwrap(), m);
        assert_eq!(IntMatrix::parse_any(&json).unwrap(), m);
        assert_eq!(IntMatrix::parse_any(&text).unwrap(), m);
    }

    #[test]
    fn parse_errors() {
        assert!(IntMatrix::from_text("2 2\n1 2 3").is_err());
        assert!(IntMatrix::from_text("2 x").is_err());
        assert!(IntMatrix::from_json(r#"{"rows":2,"cols":1,"entries":[[1]]}"#).is_err());
        assert!(IntMatrix::from_json(r#"{"rows":1,"cols":2,"entries":[[1]]}"#).is_err());
    }

    #[test]
    fn empty_shapes() {
        let m = IntMatrix::zeros(3, 0);
        assert_eq!(IntMatrix::from_text(&m.to_text()).unwrap(), m);
        assert_eq!(IntMatrix::from_json(&m.to_json()).unwrap(), m);
        assert_eq!(m.transpose().rows(), 0);
    }

    #[test]
    fn products_and_permutations() {
        let m = IntMatrix::from_rows(&[vec![1, 2], vec![3, 4]]);
        let p = IntMatrix::permutation(&[1, 0]);
        assert_eq!(p.mul(&m).unwrap(), IntMatrix::from_rows(&[vec![3, 4], vec![1, 2]]));
        assert_eq!(m.mul(&IntMatrix::identity(2)).unwrap(), m);
        assert!(m.mul(&IntMatrix::zeros(3, 1)).is_err());
        assert_eq!(m.select(&[1], &[0, 1]), IntMatrix::from_rows(&[vec![3, 4]]));
    }
}
